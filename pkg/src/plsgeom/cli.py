"""Command line front end: ``plsgeom <subcommand> ...``.

Exit codes: 0 success, 2 validation, 3 numerical singularity,
4 enumeration cap, 5 ray-positivity conjecture violation.
"""

from __future__ import annotations

import argparse
import functools
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dof import McConfig, corner_dof, mc_gdof, prediction_jacobian
from .errors import CrossCheckFailure, EnumerationCapExceeded, PlsGeomError, ValidationError
from .geometry import (
    SignPattern,
    enumerate_signatures,
    expand_template,
    inverse_rays,
    ray_membership,
    simplex_template,
    simplex_vertex_patterns,
)
from .io import csv_text, fmt, json_text, manifest, matrix_rows, read_matrix, read_vector, vector_rows, write_text
from .model import EigenSpectrum, IndexSubset, PlsConfig, all_subsets, exp_correlation, spectrum_from_gram
from .shrinkage import corner_shrinkage, shrinkage_average, shrinkage_direct


_VECTOR_FLAGS = ("--lambda", "--gram", "--y", "--psi", "--z", "--omega", "--beta")
_VECTOR_FLAGS_DEST = ("lambda_", "gram", "y", "psi", "z", "omega", "beta")


def _glue_negative_values(argv):
    """``--z -1,2`` -> ``--z=-1,2`` so argparse does not read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VECTOR_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] in "0123456789.":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


class _Run:
    """Collects output files of one command and writes their manifests."""

    def __init__(self, args):
        self.command = args.command
        self.argv = list(getattr(args, "argv", None) or [])
        skip = ("func", "command", "argv")
        self.inputs = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
        for key in _VECTOR_FLAGS_DEST:
            val = self.inputs.get(key)
            if isinstance(val, str) and os.path.isfile(val):
                self.inputs[key] = os.path.realpath(val)
        self.seed = getattr(args, "seed", None)

    def _manifest(self):
        return json_text(manifest(self.command, self.argv, self.inputs, self.seed))

    def write_file(self, path, text):
        write_text(path, text)
        if path is not None and str(path) != "-":
            write_text(str(path) + ".manifest.json", self._manifest())

    def write_dir(self, out_dir, files: dict):
        out = Path(out_dir)
        for name, text in files.items():
            write_text(out / name, text)
        write_text(out / "manifest.json", self._manifest())


def _exit_codes(cmd):
    """Turn package errors into exit codes with a one-line diagnostic on stderr."""

    @functools.wraps(cmd)
    def wrapped(args) -> int:
        try:
            return cmd(args)
        except PlsGeomError as exc:
            sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
            return exc.exit_code

    return wrapped


def _spectrum(args) -> EigenSpectrum:
    lam, gram = getattr(args, "lambda_", None), getattr(args, "gram", None)
    if lam is not None and gram is not None:
        raise ValidationError("give either --lambda or --gram, not both")
    if gram is not None:
        return spectrum_from_gram(read_matrix(gram))
    if lam is None:
        raise ValidationError("a spectrum is required: --lambda or --gram")
    return EigenSpectrum(read_vector(lam))


def _config(args) -> PlsConfig:
    return PlsConfig(enum_cap=getattr(args, "enum_cap", None) or PlsConfig().enum_cap)


def _psi_from(args, m: int):
    y, psi = args.y, args.psi
    if y is not None and psi is not None:
        raise ValidationError("give either --y or --psi, not both")
    if y is None and psi is None:
        raise ValidationError("an observation is required: --y or --psi")
    v = read_vector(y if y is not None else psi)
    if v.size != m:
        raise ValidationError(f"observation has length {v.size}, spectrum has m={m}")
    return v * v if y is not None else v


def _parse_range(text: str) -> range:
    try:
        if ".." in text:
            a, b = text.split("..")
            return range(int(a), int(b) + 1)
        return range(int(text), int(text) + 1)
    except ValueError:
        raise ValidationError(f"bad range {text!r}, expected a..b") from None


@_exit_codes
def cmd_spectrum(args) -> int:
    run = _Run(args)
    sp = spectrum_from_gram(read_matrix(args.gram))
    run.write_file(args.out, csv_text(None, vector_rows(sp.lam)))
    return 0


@_exit_codes
def cmd_exp_corr(args) -> int:
    run = _Run(args)
    run.write_file(args.out, csv_text(None, matrix_rows(exp_correlation(args.m, args.rate))))
    return 0


@_exit_codes
def cmd_shrink(args) -> int:
    run = _Run(args)
    sp = _spectrum(args)
    cfg = _config(args)
    psi = _psi_from(args, sp.m)
    files = {"psi.csv": csv_text(None, vector_rows(psi))}
    summary = {"n": args.n, "m": sp.m, "method": args.method}
    triple = None
    if args.method in ("direct", "both"):
        triple = shrinkage_direct(sp, psi, args.n, cfg)
    if args.method in ("average", "both"):
        avg = shrinkage_average(sp, psi, args.n, cfg)
        files["weights.csv"] = csv_text(["tau", "p"], [[t.label(), fmt(p)] for t, p in avg.weights.items()])
        summary["weight_sum"] = math.fsum(avg.weights.values())
        if triple is not None:
            dev = float(np.max(np.abs(avg.triple.omega - triple.omega) / np.maximum(1.0, np.abs(triple.omega))))
            summary["max_deviation"] = dev
            if dev > 1e-8:
                raise CrossCheckFailure(f"direct and average routes differ by {dev:.3g}")
        else:
            triple = avg.triple
    files["omega.csv"] = csv_text(None, vector_rows(triple.omega))
    files["z.csv"] = csv_text(None, vector_rows(triple.z))
    files["alpha.csv"] = csv_text(None, vector_rows(triple.alpha))
    summary["omega"] = triple.omega.tolist()
    files["summary.json"] = json_text(summary)
    if args.out:
        run.write_dir(args.out, files)
    sys.stdout.write(files["summary.json"])
    return 0


def corner_table(sp: EigenSpectrum, ns, cfg: PlsConfig) -> str:
    """Corner shrinkages and closed-form DoF estimates, one row per (n, tau)."""
    header = ["n", "tau"] + [f"omega_{i}" for i in range(1, sp.m + 1)] + ["gdof", "gdof_dp"]
    rows = []
    for n in ns:
        sp.check_directions(n)
        if math.comb(sp.m, n) > cfg.enum_cap:
            raise EnumerationCapExceeded(f"C({sp.m},{n}) exceeds enum_cap={cfg.enum_cap}")
    for n in ns:
        for tau in all_subsets(sp.m, n):
            omega = corner_shrinkage(sp, tau, cfg).omega
            g, gdp = corner_dof(sp, tau)
            rows.append([str(n), tau.label()] + [fmt(w) for w in omega] + [fmt(g), fmt(gdp)])
    return csv_text(header, rows)


@_exit_codes
def cmd_corners(args) -> int:
    run = _Run(args)
    sp = _spectrum(args)
    run.write_file(args.out, corner_table(sp, _parse_range(args.n_range), _config(args)))
    return 0


def signature_table(m: int, n: int) -> str:
    pats = enumerate_signatures(m, n)
    return csv_text(["pattern", "change_positions"], [[str(p), ";".join(map(str, p.change_positions))] for p in pats])


def template_table(T: IndexSubset) -> str:
    rows = [[tau.label(), str(p)] for tau, p in simplex_vertex_patterns(T)]
    rows.append(["interior", str(simplex_template(T))])
    return csv_text(["vertex", "pattern"], rows)


def expansion_table(T: IndexSubset) -> str:
    pats = expand_template(simplex_template(T), len(T) - 1)
    return csv_text(["pattern", "switch_positions"], [[str(p), ";".join(map(str, p.switch_positions))] for p in pats])


@_exit_codes
def cmd_signatures(args) -> int:
    run = _Run(args)
    if args.simplex is None:
        if args.n is None:
            raise ValidationError("--n is required without --simplex")
        text = signature_table(args.m, args.n)
    else:
        T = IndexSubset.parse(args.simplex, args.m)
        if args.n is not None and args.n != len(T) - 1:
            raise ValidationError(f"--simplex has {len(T)} indices, expected n+1={args.n + 1}")
        text = expansion_table(T) if args.expand else template_table(T)
    run.write_file(args.out, text)
    return 0


@_exit_codes
def cmd_rays(args) -> int:
    run = _Run(args)
    sp = _spectrum(args)
    cfg = _config(args)
    given = [f for f in ("z", "omega", "psi") if getattr(args, f) is not None]
    if len(given) > 1:
        raise ValidationError("give exactly one of --z, --omega, --psi")
    psi = None
    if args.z is not None:
        z = read_vector(args.z)
    elif args.omega is not None:
        z = 1.0 - read_vector(args.omega)
    elif args.psi is not None:
        psi = read_vector(args.psi)
        z = shrinkage_direct(sp, psi, args.n, cfg).z
    else:
        raise ValidationError("one of --z, --omega, --psi is required")
    fan = inverse_rays(sp, z, args.n, cfg)
    header = ["support"] + [f"d_{i}" for i in range(1, sp.m + 1)]
    files = {
        "rays.csv": csv_text(header, [[s.label()] + [fmt(v) for v in d] for s, d in zip(fan.supports, fan.rays)]),
    }
    summary = {"k_z": fan.k_z, "sections": list(fan.sections), "signature": str(fan.signature), "n": args.n}
    if psi is not None:
        mem = ray_membership(sp, psi, z, fan)
        files["decomposition.csv"] = csv_text(
            ["ray", "support", "t"], [[str(i + 1), s.label(), fmt(t)] for i, (s, t) in enumerate(zip(fan.supports, mem.t))]
        )
        summary["residual"] = mem.residual
    files["summary.json"] = json_text(summary)
    if args.out:
        run.write_dir(args.out, files)
    sys.stdout.write(files["summary.json"])
    return 0


@_exit_codes
def cmd_dof(args) -> int:
    run = _Run(args)
    sp = _spectrum(args)
    y = read_vector(args.y)
    rep = prediction_jacobian(sp, y, args.n, _config(args), check_fd=not args.no_fd)
    summary = {"gdof_hat": rep.gdof_hat, "gdof_dp_hat": rep.gdof_dp_hat, "fd_error": rep.fd_error, "n": args.n}
    files = {"jacobian.csv": csv_text(None, matrix_rows(rep.jacobian)), "summary.json": json_text(summary)}
    if args.out:
        run.write_dir(args.out, files)
    sys.stdout.write(files["summary.json"])
    return 0


@_exit_codes
def cmd_mc(args) -> int:
    run = _Run(args)
    sp = _spectrum(args)
    mc = McConfig(beta=read_vector(args.beta), sigma=args.sigma, replications=args.reps, seed=args.seed, n=args.n)
    res = mc_gdof(sp, mc, _config(args), n_jobs=args.jobs)
    rows = [[str(r + 1), fmt(g), fmt(d)] for r, (g, d) in enumerate(zip(res.gdof, res.gdof_dp)) if not np.isnan(g)]
    g_sorted, d_sorted = res.cdf_samples
    summary = {
        "mean": res.mean_gdof,
        "se": res.mc_se,
        "prob_negative": res.prob_negative,
        "excluded_count": res.excluded,
        "seed": res.seed,
        "replications": int(args.reps),
        "n": args.n,
        "sigma": args.sigma,
    }
    files = {
        "replicates.csv": csv_text(["replicate", "gdof_hat", "gdof_dp_hat"], rows),
        "cdf_gdof.csv": csv_text(["gdof_hat"], vector_rows(g_sorted)),
        "cdf_gdof_dp.csv": csv_text(["gdof_dp_hat"], vector_rows(d_sorted)),
        "summary.json": json_text(summary),
    }
    if args.out_dir:
        run.write_dir(args.out_dir, files)
    sys.stdout.write(files["summary.json"])
    return 0


def _add_spectrum(p):
    p.add_argument("--lambda", dest="lambda_", metavar="LAMBDA", help="eigenvalues: CSV file or inline a,b,c")
    p.add_argument("--gram", help="CSV file with the m x m Gram matrix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plsgeom", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of a Gram matrix")
    p.add_argument("--gram", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("exp-corr", help="exponential correlation matrix exp(-rate|i-j|)")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_exp_corr)

    p = sub.add_parser("shrink", help="shrinkage vector omega, z and alpha")
    _add_spectrum(p)
    p.add_argument("--y")
    p.add_argument("--psi")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("direct", "average", "both"), default="direct")
    p.add_argument("--enum-cap", type=int)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_shrink)

    p = sub.add_parser("corners", help="table of corner shrinkages and DoF estimates")
    _add_spectrum(p)
    p.add_argument("--n-range", required=True, help="a..b")
    p.add_argument("--enum-cap", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_corners)

    p = sub.add_parser("signatures", help="admissible sign patterns and simplex templates")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--simplex", help="1-based indices i,j,k,...")
    p.add_argument("--expand", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_signatures)

    p = sub.add_parser("rays", help="extremal rays of the inverse cone of z")
    _add_spectrum(p)
    p.add_argument("--z", help="relative residual 1 - omega")
    p.add_argument("--omega", help="shrinkage vector; z = 1 - omega")
    p.add_argument("--psi", help="squared observation; z is computed first")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_rays)

    p = sub.add_parser("dof", help="prediction Jacobian and DoF estimates")
    _add_spectrum(p)
    p.add_argument("--y", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--no-fd", action="store_true", help="skip the finite-difference check")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_dof)

    p = sub.add_parser("mc", help="Monte Carlo distribution of the DoF estimators")
    _add_spectrum(p)
    p.add_argument("--beta", required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, default=20000)
    p.add_argument("--seed", type=int, default=20240101)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", "--out", dest="out_dir")
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    args = build_parser().parse_args(argv)
    args.argv = argv
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
