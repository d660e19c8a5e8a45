"""Config-driven runs producing the CSV/JSON artifacts.

Each ``run_*`` function validates its inputs, computes, and writes artifacts
atomically into an output directory.  The CLI subcommands are thin wrappers
around these; the acceptance battery reuses them for the determinism check.
Every report records the seed it was given.  Timing appears only in the
solve report (as runtime_ms) and is the one field excluded from byte-level
determinism comparisons.
"""

from __future__ import annotations

import math
import time
import warnings
from pathlib import Path

import numpy as np

from . import conformal, duality, fdsolver, maglev
from .analytic import SeparationMode, TravelingWave
from .barrier import BarrierSpec, certify_barrier
from .core import (HEIGHT, HalfPlaneGrid, MaglevParams, PdeParams, StripGrid,
                   atomic_write_text, sample, write_field_csv, write_json)
from .errors import ConfigError


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _get(cfg: dict, key: str, kind, default=None, required: bool = False):
    if key not in cfg:
        _require(not required, f"missing config key {key!r}")
        return default
    val = cfg[key]
    try:
        return kind(val)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {key!r} has invalid value {val!r}") from None


def _parse_grid(cfg: dict) -> StripGrid:
    _require(isinstance(cfg, dict), "grid block must be an object")
    try:
        return StripGrid(x_min=_get(cfg, "x_min", float, required=True),
                         x_max=_get(cfg, "x_max", float, required=True),
                         nx=_get(cfg, "nx", int, required=True),
                         ny=_get(cfg, "ny", int, required=True))
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc


def _parse_params(cfg: dict) -> PdeParams:
    _require(isinstance(cfg, dict), "params block must be an object")
    try:
        return PdeParams(k=_get(cfg, "k", float, required=True),
                         lam=_get(cfg, "lambda", float, 0.0))
    except ValueError as exc:
        raise ConfigError(f"invalid params: {exc}") from exc


def _solution_preset(bc_cfg: dict, params: PdeParams):
    """Exact solution object for a bc preset, or None for mode 'zero'."""
    mode = _get(bc_cfg, "mode", str, required=True)
    if mode == "traveling-wave":
        return TravelingWave.for_params(
            params.k, params.lam,
            _get(bc_cfg, "wavelength", float, 1.0),
            _get(bc_cfg, "B0", float, 1.0))
    if mode == "separation-mode":
        _require(params.lam == 0.0,
                 "separation-mode data solves the lambda = 0 equation only")
        return SeparationMode.for_params(
            params.k, _get(bc_cfg, "l", int, 1),
            _get(bc_cfg, "A", float, 0.0), _get(bc_cfg, "B", float, 1.0))
    if mode == "manufactured-sine":
        class SineProfile:
            @staticmethod
            def value(x, y):
                return np.sin(np.asarray(y, dtype=float)) + 0.0 * np.asarray(x)
        return SineProfile()
    if mode == "zero":
        return None
    raise ConfigError(f"unknown bc mode {mode!r}")


def _forcing_preset(name: str, params: PdeParams):
    if name == "zero":
        return None
    if name == "manufactured-sine":
        # L[sin y] = -(1 + lambda) sin y
        return lambda x, y: -(1.0 + params.lam) * np.sin(np.asarray(y, dtype=float))
    raise ConfigError(f"unknown forcing preset {name!r}")


def run_solve(config: dict, out_dir, seed: int = 0) -> dict:
    """Solve per config; writes the field CSV and solve_report.json."""
    _require(isinstance(config, dict), "config must be a JSON object")
    grid = _parse_grid(config.get("grid", {}))
    params = _parse_params(config.get("params", {}))
    bc_cfg = config.get("bc", {})
    _require(isinstance(bc_cfg, dict), "bc block must be an object")
    exact = _solution_preset(bc_cfg, params)
    closure = _get(bc_cfg, "closure", str, "dirichlet")
    _require(closure in ("dirichlet", "periodic"),
             f"unknown closure {closure!r}")
    forcing = _forcing_preset(_get(config, "forcing", str, "zero"), params)
    scheme = _get(config, "scheme", str, "central")
    _require(scheme in ("central", "upwind"), f"unknown scheme {scheme!r}")
    levels = _get(config, "convergence_levels", int, 0)
    _require(levels == 0 or levels >= 2, "convergence_levels must be >= 2")
    _require(levels == 0 or exact is not None,
             "convergence study needs a bc preset with a known solution")
    out_name = _get(config, "output", str, "field.csv")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    if exact is None:
        bc = fdsolver.BoundaryData.zero(closure)
    elif closure == "periodic":
        bc = fdsolver.BoundaryData(
            bottom=lambda x: exact.value(x, np.zeros_like(np.asarray(x, float))),
            top=lambda x: exact.value(x, np.full_like(np.asarray(x, float), HEIGHT)),
            closure="periodic")
    else:
        bc = fdsolver.BoundaryData.from_exact(exact.value)
    system = fdsolver.assemble(grid, params, bc, forcing, scheme)
    field = fdsolver.solve(system)
    report = {
        "residual": fdsolver.algebraic_residual(system, field),
        "seed": seed,
    }
    if levels:
        study = fdsolver.convergence_order(grid, params, exact.value, forcing,
                                           levels=levels, scheme=scheme,
                                           closure=closure)
        report["order_estimate"] = study.order
        report["errors"] = list(study.errors)
    report["runtime_ms"] = 1000.0 * (time.perf_counter() - t0)
    write_field_csv(field, out_dir / out_name)
    write_json(out_dir / "solve_report.json", report)
    return report


def run_certify(k: float, lam: float, radius: float, out_dir,
                density: int = 81, seed: int = 2026):
    """Barrier certificate; writes cert_report.json (the five-field report)."""
    try:
        spec = BarrierSpec(k=k, lam=lam, radius=radius)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cert = certify_barrier(spec, density=density, seed=seed)
    write_json(out_dir / "cert_report.json", cert.report.to_json_dict())
    return cert


def run_map(k: float, out_dir, lam: float = 0.0, wavelength: float = 1.0,
            grid: StripGrid | None = None, patch: HalfPlaneGrid | None = None,
            seed: int = 0) -> dict:
    """Transport the traveling wave and report its weighted residual."""
    if grid is None:
        grid = StripGrid(-math.pi, math.pi, 65, 31)
    if patch is None:
        patch = HalfPlaneGrid(1.0, 2.0, 33, 0.5, 1.5, 33)
    wave = TravelingWave.for_params(k, lam, wavelength)
    image = conformal.pushforward(sample(grid, wave.value))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    conformal.write_map_csv(image, out_dir / "map.csv")
    tw = conformal.TransportedField(wave)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        resid = conformal.weighted_residual(tw.value, patch, k)
    report = {
        "weighted_residual": resid,
        "admissible_weight": bool(k < conformal.ADMISSIBLE_K_MAX),
        "exclusion_radius": image.default_exclusion,
        "seed": seed,
    }
    write_json(out_dir / "map_report.json", report)
    return report


def run_dualize(k: float, out_dir, patch: HalfPlaneGrid | None = None,
                wavelength: float = 1.0, seed: int = 0) -> dict:
    """Reconstruct the conjugate of the transported traveling wave."""
    if patch is None:
        patch = HalfPlaneGrid(1.5, 2.5, 33, 0.8, 1.8, 33)
    wave = TravelingWave.for_params(k, 0.0, wavelength)
    tw = conformal.TransportedField(wave)
    base = (patch.xs()[0], patch.ys()[0])
    target = (patch.xs()[-1], patch.ys()[-1])
    gap = duality.path_independence_gap(tw, k, base, target, tol=1e-10)
    values = duality.dual_on_patch(tw, k, patch, tol=1e-10)
    resid = duality.dual_residual(values, patch, k)

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = "%.17g"
    rows = ["x,y,value"]
    xs, ys = patch.xs(), patch.ys()
    for i in range(patch.nxt):
        for j in range(patch.nyt):
            rows.append(f"{fmt % xs[i]},{fmt % ys[j]},{fmt % values[i, j]}")
    atomic_write_text(out_dir / "dual.csv", "\n".join(rows) + "\n")
    report = {
        "path_independence_gap": gap,
        "dual_residual": resid,
        "basepoint": [base[0], base[1]],
        "seed": seed,
    }
    write_json(out_dir / "dual_report.json", report)
    return report


def run_eigen(x_extent: float, nx: int, ny: int, out_dir, seed: int = 0) -> dict:
    """Smallest Dirichlet eigenvalue on [-X, X] x [0, pi]."""
    _require(x_extent > 0, "x_extent must be positive")
    grid = StripGrid(-x_extent, x_extent, nx, ny)
    pair = fdsolver.smallest_eigenpair(grid)
    report = {
        "min_eigenvalue": pair.value,
        "iterations": pair.iterations,
        "eigen_residual": pair.residual,
        "continuum_estimate": fdsolver.continuum_min_eigenvalue(grid),
        "positive": bool(pair.value > 0.0),
        "seed": seed,
    }
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "eigen_report.json", report)
    return report


def run_maglev(k_values, y_values, out_dir, wavelength: float = 1.0,
               B0: float = 1.0, mu0: float = 1.0, seed: int = 0) -> list[tuple]:
    """Sweep of the wavelength-averaged force proxies; writes maglev_sweep.csv."""
    rows = ["k,y,drag_proxy,lift_proxy"]
    fmt = "%.17g"
    out = []
    for k in k_values:
        _require(k >= 0.0, f"sweep coefficient k must be >= 0, got {k}")
        p = MaglevParams(mu0=mu0, sigma=k / mu0, vx=1.0, B0=B0,
                         wavelength=wavelength)
        for y in y_values:
            _require(y >= 0.0, f"height must be >= 0, got {y}")
            drag, lift = maglev.wavelength_averages(p, y)
            rows.append(f"{fmt % k},{fmt % y},{fmt % drag},{fmt % lift}")
            out.append((k, y, drag, lift))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "maglev_sweep.csv", "\n".join(rows) + "\n")
    write_json(out_dir / "maglev_report.json",
               {"rows": len(out), "seed": seed})
    return out
