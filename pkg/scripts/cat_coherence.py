"""Interference of a cat state versus its phase, before and after the beam splitter."""
import json

import numpy as np

from _common import execute, parser, pyplot
from thirdq.io import read_csv


def main():
    args = parser(__doc__, "out/coherence").parse_args()
    out = execute("coherence", args)
    summary = json.loads((out / "manifest.json").read_text())["diagnostics"]["coherence_summary"]
    first = summary[0]
    for row in summary:
        contrast_drop = 1 - row["contrast"] / first["contrast"]
        field_drop = 1 - np.sqrt(row["photons_j"] / first["photons_j"])
        print(f"t={row['t']:g}  delta*={row['delta']:.3f}  contrast={row['contrast']:.5f}  "
              f"contrast drop={contrast_drop:.3f}  field drop={field_drop:.3f}")
    if args.plot:
        plt = pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        for row in summary:
            _, rows = read_csv(out / f"coherence_t{row['t']:g}.csv")
            data = np.array(rows)
            ax.plot(data[:, 0], data[:, 2], label=f"t = {row['t']:g}")
        ax.set(xlabel="theta", ylabel="<C_j(0, delta*)>")
        ax.legend()
        fig.savefig(out / "coherence.png", dpi=120)


if __name__ == "__main__":
    main()
