"""Exact-diagonalization mixing angle against the closed form over a grid of couplings."""
from _common import execute, parser
from thirdq.io import read_csv


def main():
    args = parser(__doc__, "out/gamma").parse_args()
    out = execute("gamma-oracle", args)
    header, rows = read_csv(out / "gamma_oracle.csv")
    print("  ".join(f"{h:>17}" for h in header))
    for row in rows:
        print("  ".join(f"{v:17.6e}" for v in row))


if __name__ == "__main__":
    main()
