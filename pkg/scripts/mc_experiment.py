"""Monte Carlo distribution of gdof_hat and gdof_dp_hat under y = Lambda beta + u.

Defaults are the exp(-|i-j|/3) spectrum, beta = (0.1, 0.01, 0.01, 5, 5),
sigma = 0.02, n = 3, R = 20000. Writes the per-replicate samples and sorted
CDF samples to --out-dir (no plotting).

Usage: python3 scripts/mc_experiment.py --out-dir runs/mc [--reps 20000] [--seed 20240101] [--jobs 1]
"""

import argparse
import time

from plsgeom.cli import main as cli_main
from plsgeom import reference_spectrum


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--reps", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=20240101)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--sigma", type=float, default=0.02)
    parser.add_argument("--n", type=int, default=3)
    args = parser.parse_args()

    lam = ",".join(repr(float(v)) for v in reference_spectrum().lam)
    t0 = time.perf_counter()
    code = cli_main([
        "mc", "--lambda", lam, "--beta", "0.1,0.01,0.01,5,5", "--sigma", str(args.sigma),
        "--n", str(args.n), "--reps", str(args.reps), "--seed", str(args.seed),
        "--jobs", str(args.jobs), "--out-dir", args.out_dir,
    ])
    print(f"elapsed {time.perf_counter() - t0:.1f} s")
    raise SystemExit(code)


if __name__ == "__main__":
    main()
