"""Corner shrinkages and DoF estimates for the exp(-|i-j|/3) spectrum, n = 2..4.

Usage: python3 scripts/corner_table.py [--out corners.csv]
"""

import argparse

import numpy as np

from plsgeom import DEFAULT_CONFIG, reference_spectrum
from plsgeom.cli import corner_table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", help="write the full-precision CSV here")
    parser.add_argument("--n-min", type=int, default=2)
    parser.add_argument("--n-max", type=int, default=4)
    args = parser.parse_args()

    sp = reference_spectrum()
    print("lambda =", np.array2string(sp.lam, precision=6), f"cond = {sp.lam[0] / sp.lam[-1]:.4f}")
    text = corner_table(sp, range(args.n_min, args.n_max + 1), DEFAULT_CONFIG)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    rows = [r.split(",") for r in text.strip().splitlines()]
    print(f"{'n':>2} {'tau':<10}" + "".join(f"{h:>11}" for h in rows[0][2:]))
    for r in rows[1:]:
        vals = [float(v) for v in r[2:]]
        cells = "".join(f"{v:>11.2f}" if abs(v) < 1e5 else f"{v:>11.3e}" for v in vals)
        print(f"{r[0]:>2} {'{' + r[1].replace(';', ',') + '}':<10}{cells}")


if __name__ == "__main__":
    main()
