"""Subharmonic scattering: ratio vs mixing angle, rate vs detuning, emitted frequency vs mass."""
from _common import execute, parser
from thirdq.io import read_csv


def main():
    args = parser(__doc__, "out/scattering").parse_args()
    out = execute("scattering", args)
    for name in ("scattering_point", "ratio_sweep", "rate_vs_detuning", "omega_prime_vs_mass"):
        header, rows = read_csv(out / f"{name}.csv")
        print(f"\n{name}")
        print("  ".join(f"{h:>26}" for h in header))
        for row in rows:
            print("  ".join(f"{v:>26}" if isinstance(v, str) else f"{v:26.16e}" for v in row))


if __name__ == "__main__":
    main()
