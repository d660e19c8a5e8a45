"""Command-line entry point.

Subcommands: solve, certify, map, dualize, eigen, maglev, verify-all.
JSON configs in, CSV/JSON artifacts out; artifacts are written atomically.
Exit codes: 0 success or certificate pass, 1 certificate fail or tolerance
miss, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import acceptance, runs
from .core import HalfPlaneGrid, StripGrid
from .errors import ConfigError


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=".", help="output directory for artifacts")
    p.add_argument("--seed", type=int, default=acceptance.SEED,
                   help="seed recorded in reports and used by sampling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="striplev",
        description="numerical lab for the convection-diffusion strip equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="finite-difference solve from a JSON config")
    p.add_argument("--config", required=True, help="path to the run config JSON")
    _add_common(p)

    p = sub.add_parser("certify", help="run the barrier certificate")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--R", dest="radius", type=float, required=True)
    p.add_argument("--density", type=int, default=81)
    _add_common(p)

    p = sub.add_parser("map", help="transport a traveling wave to the half-plane")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--wavelength", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("dualize", help="reconstruct the conjugate stream function")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--wavelength", type=float, default=1.0)
    p.add_argument("--patch", default="1.5,2.5,33,0.8,1.8,33",
                   help="xt_min,xt_max,nxt,yt_min,yt_max,nyt")
    _add_common(p)

    p = sub.add_parser("eigen", help="smallest Dirichlet eigenvalue on [-X,X]x[0,pi]")
    p.add_argument("--x-extent", type=float, default=math.pi)
    p.add_argument("--nx", type=int, default=129)
    p.add_argument("--ny", type=int, default=63)
    _add_common(p)

    p = sub.add_parser("maglev", help="sweep the wavelength-averaged force proxies")
    p.add_argument("--k-values", default="0,0.5,1,2",
                   help="comma-separated drift coefficients (>= 0)")
    p.add_argument("--y-values", default="0,0.5,1",
                   help="comma-separated heights (>= 0)")
    p.add_argument("--wavelength", type=float, default=1.0)
    p.add_argument("--b0", type=float, default=1.0)
    p.add_argument("--mu0", type=float, default=1.0)
    _add_common(p)

    p = sub.add_parser("verify-all", help="run the acceptance battery")
    p.add_argument("--profile", choices=("quick", "full"), default="quick")
    _add_common(p)

    return parser


def _floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_patch(text: str) -> HalfPlaneGrid:
    vals = text.split(",")
    if len(vals) != 6:
        raise ConfigError("patch needs six comma-separated values")
    try:
        return HalfPlaneGrid(float(vals[0]), float(vals[1]), int(vals[2]),
                             float(vals[3]), float(vals[4]), int(vals[5]))
    except ValueError as exc:
        raise ConfigError(f"invalid patch: {exc}") from exc


def _cmd_solve(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.is_file():
        raise ConfigError(f"config file not found: {cfg_path}")
    try:
        config = json.loads(cfg_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    report = runs.run_solve(config, args.out, seed=args.seed)
    print(f"residual {report['residual']:.3e}"
          + (f", order estimate {report['order_estimate']:.3f}"
             if "order_estimate" in report else ""))
    return 0


def _cmd_certify(args) -> int:
    cert = runs.run_certify(args.k, args.lam, args.radius, args.out,
                            density=args.density, seed=args.seed)
    rep = cert.report
    print(f"max violation {rep.max_violation:.3e} over {rep.samples_checked} "
          f"samples (tolerance {rep.tolerance:g}); "
          f"ratio bound margin {cert.ratio_bound_limit - cert.ratio_bound_max:.3e}; "
          f"fd cross-check {cert.fd_crosscheck_max:.3e}")
    return 0 if cert.all_checks_pass else 1


def _cmd_map(args) -> int:
    report = runs.run_map(args.k, args.out, lam=args.lam,
                          wavelength=args.wavelength, seed=args.seed)
    note = "" if report["admissible_weight"] else " (weight outside k < 2 range)"
    print(f"weighted residual {report['weighted_residual']:.3e}{note}")
    return 0


def _cmd_dualize(args) -> int:
    report = runs.run_dualize(args.k, args.out, patch=_parse_patch(args.patch),
                              wavelength=args.wavelength, seed=args.seed)
    print(f"path independence gap {report['path_independence_gap']:.3e}, "
          f"dual residual {report['dual_residual']:.3e}")
    return 0


def _cmd_eigen(args) -> int:
    report = runs.run_eigen(args.x_extent, args.nx, args.ny, args.out,
                            seed=args.seed)
    print(f"min eigenvalue {report['min_eigenvalue']:.8f} "
          f"(continuum {report['continuum_estimate']:.8f}, "
          f"{report['iterations']} iterations)")
    return 0 if report["positive"] else 1


def _cmd_maglev(args) -> int:
    ks = _floats(args.k_values)
    ys = _floats(args.y_values)
    rows = runs.run_maglev(ks, ys, args.out, wavelength=args.wavelength,
                           B0=args.b0, mu0=args.mu0, seed=args.seed)
    print(f"wrote {len(rows)} sweep rows")
    return 0


def _cmd_verify_all(args) -> int:
    results = acceptance.run_all(profile=args.profile, out_dir=args.out)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed "
          f"({args.profile} profile)")
    return 1 if failed else 0


_DISPATCH = {
    "solve": _cmd_solve,
    "certify": _cmd_certify,
    "map": _cmd_map,
    "dualize": _cmd_dualize,
    "eigen": _cmd_eigen,
    "maglev": _cmd_maglev,
    "verify-all": _cmd_verify_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code) if exc.code else 0
    try:
        return _DISPATCH[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
