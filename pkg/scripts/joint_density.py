"""Joint quadrature density before and after the beam splitter, with its correlation coefficient."""
import numpy as np

from _common import execute, parser, pyplot
from thirdq.engine import correlation_coefficient
from thirdq.io import read_csv


def main():
    args = parser(__doc__, "out/joint").parse_args()
    out = execute("joint", args)
    _, rows = read_csv(out / "joint_density.csv")
    data = np.array(rows)
    x = np.unique(data[:, 1])
    frames = {t: data[data[:, 0] == t, 3].reshape(len(x), len(x)) for t in np.unique(data[:, 0])}
    for t, p in frames.items():
        print(f"t={t:g}: corr(x_j, x_k) = {correlation_coefficient(p, x, x):+.6f}")
    if args.plot:
        plt = pyplot()
        fig, axes = plt.subplots(1, len(frames), figsize=(5 * len(frames), 4))
        for ax, (t, p) in zip(np.atleast_1d(axes), frames.items()):
            ax.contourf(x, x, p.T, levels=30)
            ax.set(xlabel="x_j", ylabel="x_k", title=f"t = {t:g}")
        fig.savefig(out / "joint_density.png", dpi=120)


if __name__ == "__main__":
    main()
