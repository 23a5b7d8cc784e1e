"""Command-line front end: ``spectrum``, ``rigidity`` and ``verify``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 internal invariant violated.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from .rigidity import default_test_vector, rigidity_deficit, theorem_family
from .spectrum import (
    annulus_scan,
    classify,
    inverse_spectrum_annulus,
    roots_of_unity_family,
    theoretical_r,
    unit_circle_contact,
)
from .suites import SUITES, run_all

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3
FORMULA_K_MAX = 30
DENSE_K_MAX = 9


class ConfigError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """``start:end:step``, endpoints included when within half a step."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like start:end:step, got {text!r}") from None
    if not (step > 0 and 0 < start <= stop and math.isfinite(stop)):
        raise ConfigError(f"need 0 < start <= end and step > 0, got {text!r}")
    count = int(math.floor((stop - start) / step + 0.5))
    return [start + i * step for i in range(count + 1)]


def _num(x: float):
    # JSON has no infinities; spell them out
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def cmd_spectrum(args) -> int:
    grid = parse_grid(args.grid)
    if args.angles < 1:
        raise ConfigError("--angles must be positive")
    if args.diagonal_roots:
        if args.r != 1.0:
            raise ConfigError("--diagonal-roots builds the r = 1 family; pass --r 1")
        if args.roots < 2:
            raise ConfigError("--roots must be at least 2")
        family = roots_of_unity_family(args.roots)
    else:
        if args.r == 1.0:
            raise ConfigError("r = 1 needs --diagonal-roots")
        if not 0.0 <= args.r < 1.0:
            raise ConfigError(f"r must lie in [0, 1], got {args.r}")
        if not 2 <= args.k_max <= FORMULA_K_MAX:
            raise ConfigError(f"k-max must lie in [2, {FORMULA_K_MAX}]")
        family = theorem_family(args.r, args.k_max)
    est = annulus_scan(family, grid, angular_samples=args.angles, threads=args.threads)
    origin = classify(family, 0.0)
    out = est.to_dict()
    out.update({
        "r": args.r,
        "k_max": family.k_max,
        "family": family.label,
        "origin_verdict": origin.kind.value,
        "unit_circle_contact": unit_circle_contact(est),
    })
    if family.params_of is not None and family.k_max >= 5:
        out["theoretical_r"] = theoretical_r(family, k_analytic=family.k_max)
    try:
        out["inverse_annulus"] = list(inverse_spectrum_annulus(est))
    except ValueError as exc:
        out["inverse_annulus"] = str(exc)

    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_json(outdir / "annulus.json", _clean(out))
    with open(outdir / "profile.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rho", "log_resolvent_sup", "verdict", "log_upper_sup"])
        for s in est.samples:
            w.writerow([_fmt(s.rho), _fmt(s.log_lower_sup), s.kind.value, _fmt(s.log_upper_sup)])
    print(f"annulus [{est.r_inner:.4g}, {est.r_outer:.4g}]  lambda=0: {origin.kind.value}")
    if est.warning:
        print(f"warning: {est.warning}", file=sys.stderr)
    return EXIT_OK


def _clean(obj):
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def cmd_rigidity(args) -> int:
    if not 0.0 <= args.r < 1.0:
        raise ConfigError(f"r must lie in [0, 1), got {args.r}")
    if not 2 <= args.k_max <= DENSE_K_MAX:
        raise ConfigError(f"k-max must lie in [2, {DENSE_K_MAX}]")
    if args.ell_max < 2:
        raise ConfigError("ell-max must be at least 2")
    family = theorem_family(args.r, args.k_max)
    y = default_test_vector(family)
    reports = [rigidity_deficit(family, y, ell) for ell in range(2, args.ell_max + 1)]
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "rigidity.jsonl", "w") as fh:
        for rep in reports:
            row = {k: _num(v) if isinstance(v, float) else v for k, v in rep._asdict().items()}
            fh.write(json.dumps(row, allow_nan=False) + "\n")
    for rep in reports:
        note = "  (saturated)" if rep.saturated else ""
        print(f"ell={rep.ell}  deficit={rep.deficit:.6e}  bound^(1/2)={math.sqrt(rep.analytic_bound):.6e}{note}")
    print("note: checked on one test vector; rigidity quantifies over every vector")
    if not all(rep.bound_holds for rep in reports):
        print("error: deficit exceeds the analytic bound", file=sys.stderr)
        return EXIT_INTERNAL
    d = [rep.deficit for rep in reports]
    monotone = all(b < a or a == b == 0.0 for a, b in zip(d, d[1:]))
    if monotone and d[-1] < args.goal:
        return EXIT_OK
    print(f"deficits not decreasing to below {args.goal}", file=sys.stderr)
    return EXIT_FAIL


def cmd_verify(args) -> int:
    only = None
    if args.only:
        only = [name for chunk in args.only for name in chunk.split(",") if name]
        unknown = [n for n in only if n not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)}; known: {', '.join(SUITES)}")
    if args.fuzz is not None and args.fuzz < 1:
        raise ConfigError("--fuzz must be positive")
    results = run_all(args.seed, args.fuzz, only, threads=args.threads)
    print(f"seed {args.seed}")
    for res in results:
        print(res.line())
    failing = [r.name for r in results if not r.passed]
    if failing:
        print("failing: " + ", ".join(failing))
        return EXIT_FAIL
    print(f"all {len(results)} suites passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rigidspec",
                                     description="Spectra and rigidity of block-diagonal weighted shifts.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--seed", type=int, default=0, help="seed for fuzzed suites")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="scan the annulus of a family")
    p.add_argument("--r", type=float, required=True, help="inner radius of the family, in [0, 1]")
    p.add_argument("--k-max", type=int, default=FORMULA_K_MAX, help="truncation horizon")
    p.add_argument("--grid", default="0.05:1.5:0.05", help="radial grid start:end:step")
    p.add_argument("--angles", type=int, default=1, help="angles sampled per radius")
    p.add_argument("--diagonal-roots", action="store_true",
                   help="use the diagonal roots-of-unity operator (r = 1)")
    p.add_argument("--roots", type=int, default=500, help="number of diagonal entries with --diagonal-roots")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("rigidity", parents=[common], help="deficits of u**(ell!) on a test vector")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k-max", type=int, default=7)
    p.add_argument("--ell-max", type=int, default=6)
    p.add_argument("--goal", type=float, default=0.5, help="required final deficit")
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--only", action="append", help="suite name(s), comma separated")
    p.add_argument("--fuzz", type=int, default=None, help="trials per fuzzed suite")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
