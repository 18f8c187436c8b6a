"""Quadrature densities of both modes while a coherent state leaks through the beam splitter."""
import numpy as np

from _common import execute, parser, pyplot
from thirdq.io import read_csv


def main():
    args = parser(__doc__, "out/density").parse_args()
    out = execute("evolve", args)
    if not args.plot:
        print(f"wrote {out}")
        return
    plt = pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, mode in zip(axes, ("j", "k")):
        _, rows = read_csv(out / f"density_{mode}.csv")
        data = np.array(rows)
        t, x = np.unique(data[:, 0]), np.unique(data[:, 1])
        p = data[:, 2].reshape(len(t), len(x))
        ax.pcolormesh(x, t, p, shading="auto")
        ax.set(xlabel=f"x_{mode}", title=f"P(x_{mode}, t)")
    axes[0].set_ylabel("t")
    fig.savefig(out / "density.png", dpi=120)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
