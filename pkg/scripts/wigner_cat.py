"""Wigner distribution of a single-mode state (odd cat by default)."""
import json

import numpy as np

from _common import execute, parser, pyplot
from thirdq.io import read_csv


def main():
    args = parser(__doc__, "out/wigner").parse_args()
    out = execute("wigner", args)
    diag = json.loads((out / "manifest.json").read_text())["diagnostics"]
    print(f"min W = {diag['wigner_min']:.5f}, integral on grid = {diag['wigner_integral_on_grid']:.8f}")
    if args.plot:
        _, rows = read_csv(out / "wigner.csv")
        data = np.array(rows)
        x = np.unique(data[:, 0])
        w = data[:, 2].reshape(len(x), len(x))
        plt = pyplot()
        fig, ax = plt.subplots(figsize=(5, 4))
        mesh = ax.pcolormesh(x, x, w.T, cmap="RdBu_r", shading="auto",
                             vmin=-abs(w).max(), vmax=abs(w).max())
        fig.colorbar(mesh)
        ax.set(xlabel="x", ylabel="p")
        fig.savefig(out / "wigner.png", dpi=120)


if __name__ == "__main__":
    main()
