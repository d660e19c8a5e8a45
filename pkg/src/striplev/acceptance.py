"""Acceptance battery: ten numbered criteria with pinned tolerances.

Each criterion function measures, decides pass/fail against the tolerances
in ``FULL`` (the normative profile), and returns a result record.  The
``quick`` profile caps grids at 129 x 65 and scales the tolerances that are
resolution-bound; it exists for fast smoke runs, not as the gate.

Everything here is deterministic for a fixed seed: randomized cases draw
from seeded generators, sample sets are fixed, and summaries contain no
timing data, so two runs of the battery serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conformal, duality, fdsolver, maglev, runs
from .analytic import SeparationMode, TravelingWave
from .barrier import (BarrierSpec, certify_barrier, drift_ramp_slope0,
                      scaled_limit_deviations)
from .core import (HEIGHT, HalfPlaneGrid, MaglevParams, PdeParams, StripGrid,
                   sample, write_json)

SEED = 20260810

#: grid triples are (nx, ny); the full profile tops out at 513 x 257 nodes
FULL = {
    "dispersion_grids": [(129, 63), (257, 127), (513, 255)],
    "dispersion_extrapolation_tol": 1e-9,
    "solver_grid": (129, 63),
    "certify_density": 61,
    "certify_random": 1000,
    "eigen_ny": 63,
    "eigen_nx": {math.pi: 129, 2 * math.pi: 257, 4 * math.pi: 513},
}

QUICK = {
    "dispersion_grids": [(33, 15), (65, 31), (129, 63)],
    "dispersion_extrapolation_tol": 1e-5,
    "solver_grid": (33, 15),
    "certify_density": 41,
    "certify_random": 300,
    "eigen_ny": 31,
    "eigen_nx": {math.pi: 65, 2 * math.pi: 129, 4 * math.pi: 129},
}


def _profile(name: str) -> dict:
    if name == "full":
        return FULL
    if name == "quick":
        return QUICK
    raise ValueError(f"unknown profile {name!r}")


@dataclass
class CriterionResult:
    cid: int
    name: str
    passed: bool
    runtime_s: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.cid:2d} {self.name} ({self.runtime_s:.1f}s)"


def _timed(cid, name, fn):
    t0 = time.perf_counter()
    passed, details = fn()
    return CriterionResult(cid=cid, name=name, passed=passed,
                           runtime_s=time.perf_counter() - t0, details=details)


# ---------------------------------------------------------------------------
# 1. dispersion consistency


def _residual_on(grid: StripGrid, wave: TravelingWave, params: PdeParams):
    return fdsolver.operator_residual_grid(sample(grid, wave.value), params)


def criterion_1_dispersion(profile: str = "full") -> CriterionResult:
    """Traveling-wave residuals halve in h at second order and the
    three-level pointwise extrapolation sits at the roundoff floor."""
    prof = _profile(profile)

    def body():
        rng = np.random.default_rng(SEED)
        grids = [StripGrid(-math.pi, math.pi, nx, ny)
                 for nx, ny in prof["dispersion_grids"]]
        worst_ratio = (math.inf, -math.inf)
        worst_extrap = 0.0
        for _ in range(20):
            k = rng.uniform(-5.0, 5.0)
            lam = rng.uniform(0.0, 4.0)
            wavelength = rng.uniform(0.5, 2.0)
            wave = TravelingWave.for_params(k, lam, wavelength)
            params = PdeParams(k=k, lam=lam)
            r1, r2, r3 = (_residual_on(g, wave, params) for g in grids)
            shared = (r1, r2[1::2, 1::2], r3[3::4, 3::4])
            m = [float(np.max(np.abs(r))) for r in shared]
            ratios = (m[0] / m[1], m[1] / m[2])
            extrap = float(np.max(np.abs(
                (64.0 * shared[2] - 20.0 * shared[1] + shared[0]) / 45.0)))
            worst_ratio = (min(worst_ratio[0], *ratios),
                           max(worst_ratio[1], *ratios))
            worst_extrap = max(worst_extrap, extrap)
        tol = prof["dispersion_extrapolation_tol"]
        ok = (3.5 <= worst_ratio[0] and worst_ratio[1] <= 4.5
              and worst_extrap < tol)
        return ok, {"ratio_min": worst_ratio[0], "ratio_max": worst_ratio[1],
                    "extrapolation_max": worst_extrap,
                    "extrapolation_tol": tol, "cases": 20}

    result = _timed(1, "dispersion consistency", body)
    result.passed = result.passed and result.runtime_s < 10.0
    result.details["runtime_limit_s"] = 10.0
    return result


# ---------------------------------------------------------------------------
# 2. solver convergence


def criterion_2_solver_convergence(profile: str = "full") -> CriterionResult:
    """Dirichlet solve against the k = 2 traveling wave converges at
    order 2.0 +- 0.1 over three nested grids."""
    prof = _profile(profile)

    def body():
        wave = TravelingWave.for_params(2.0, 0.0, 1.0)
        nx, ny = prof["solver_grid"]
        study = fdsolver.convergence_order(
            StripGrid(-math.pi, math.pi, nx, ny), PdeParams(k=2.0, lam=0.0),
            wave.value, levels=3)
        ok = 1.9 <= study.order <= 2.1
        return ok, {"order": study.order, "errors": list(study.errors),
                    "spacings": list(study.spacings)}

    result = _timed(2, "solver convergence", body)
    result.passed = result.passed and result.runtime_s < 30.0
    result.details["runtime_limit_s"] = 30.0
    return result


# ---------------------------------------------------------------------------
# 3. barrier certificates


def criterion_3_barrier(profile: str = "full") -> CriterionResult:
    """Supersolution certificate passes for every (k, lam, R) in the sweep,
    with the gradient-ratio bound and FD cross-check intact."""
    prof = _profile(profile)

    def body():
        worst_violation = -math.inf
        worst_fd = 0.0
        worst_margin = math.inf
        all_ok = True
        cases = 0
        for k in (0.0, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0):
            for lam in (0.0, 1.0, 5.0):
                for radius in (10.0, 100.0):
                    cert = certify_barrier(
                        BarrierSpec(k=k, lam=lam, radius=radius),
                        density=prof["certify_density"],
                        n_random=prof["certify_random"], seed=SEED)
                    cases += 1
                    worst_violation = max(worst_violation,
                                          cert.report.max_violation)
                    worst_fd = max(worst_fd, cert.fd_crosscheck_max)
                    worst_margin = min(worst_margin,
                                       cert.ratio_bound_limit
                                       - cert.ratio_bound_max)
                    all_ok &= (cert.report.passed and cert.ratio_bound_ok
                               and cert.fd_crosscheck_ok
                               and cert.value_range_ok)
        return all_ok, {"cases": cases, "max_violation": worst_violation,
                        "violation_tol": 1e-8,
                        "fd_crosscheck_max": worst_fd, "fd_tol": 1e-6,
                        "ratio_bound_min_margin": worst_margin}

    result = _timed(3, "barrier certificate", body)
    result.passed = result.passed and result.runtime_s < 20.0
    result.details["runtime_limit_s"] = 20.0
    return result


# ---------------------------------------------------------------------------
# 4. scaled limit


def criterion_4_scaled_limit(profile: str = "full") -> CriterionResult:
    """R * barrier(0, 1) approaches (4/pi) f'(0): monotone in R and within
    1 percent at R = 1e4, for k in {0, 2}."""

    def body():
        details = {}
        ok = True
        for k in (0.0, 2.0):
            devs = scaled_limit_deviations(k, point=(0.0, 1.0),
                                           radii=(1e2, 1e3, 1e4))
            target = (4.0 / math.pi) * drift_ramp_slope0(k)
            rel = devs[-1] / target
            monotone = all(b < a for a, b in zip(devs, devs[1:]))
            ok &= monotone and rel < 0.01
            details[f"k={k:g}"] = {"deviations": devs, "relative_at_1e4": rel,
                                   "monotone": monotone}
        return ok, details

    return _timed(4, "scaled limit", body)


# ---------------------------------------------------------------------------
# 5. discrete maximum principle


def criterion_5_maximum_principle(profile: str = "full") -> CriterionResult:
    """Fifty random problems with f <= 0 and nonnegative boundary data stay
    nonnegative to 1e-12."""

    def body():
        rng = np.random.default_rng(SEED + 5)
        worst = math.inf
        for _ in range(50):
            nx = int(rng.integers(9, 25))
            ny = int(rng.integers(7, 17))
            x0 = rng.uniform(-3.0, 0.0)
            width = rng.uniform(2.0, 5.0)
            grid = StripGrid(x0, x0 + width, nx, ny)
            kmax = min(4.0, 0.95 * 2.0 / grid.hx)
            params = PdeParams(k=rng.uniform(-kmax, kmax),
                               lam=rng.uniform(0.0, 5.0))
            a, b, c = rng.uniform(0.0, 1.0, 3)
            d, e = rng.uniform(0.0, 1.0, 2)
            forcing = lambda x, y, a=a, b=b: -(a + b * np.sin(x)) ** 2
            bc = fdsolver.BoundaryData(
                bottom=lambda x, c=c: (c + 0.3 * np.cos(x)) ** 2,
                top=lambda x, d=d: (d + 0.2 * np.sin(2 * x)) ** 2,
                closure="dirichlet",
                sides=lambda x, y, e=e: (e + 0.1 * y) ** 2)
            fld = fdsolver.solve(fdsolver.assemble(grid, params, bc, forcing))
            worst = min(worst, float(np.min(fld.values)))
        return worst >= -1e-12, {"cases": 50, "min_value": worst,
                                 "floor": -1e-12}

    return _timed(5, "discrete maximum principle", body)


# ---------------------------------------------------------------------------
# 6. conformal equivalence


def criterion_6_conformal(profile: str = "full") -> CriterionResult:
    """Transported traveling-wave residual decays at order 2.0 +- 0.2 under
    patch refinement, and wall-vanishing data transports to vanishing ray
    traces."""

    def body():
        details = {}
        ok = True
        for k in (0.0, 2.0):
            wave = TravelingWave.for_params(k, 0.0, 1.0)
            tw = conformal.TransportedField(wave)
            hs, errs = [], []
            patch = HalfPlaneGrid(1.0, 2.0, 33, 0.5, 1.5, 33)
            for _ in range(3):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    errs.append(conformal.weighted_residual(tw.value, patch, k))
                hs.append(max(patch.hx, patch.hy))
                patch = patch.refined()
            order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
            ok &= 1.8 <= order <= 2.2
            details[f"k={k:g}"] = {"order": order, "residuals": errs}

        # wall-vanishing strip data has vanishing transported traces
        mode = SeparationMode.for_params(2.0, l=1, A=0.3, B=0.7)
        tm = conformal.TransportedField(mode)
        pos, neg = conformal.ray_traces(tm, np.linspace(0.2, 3.0, 25))
        trace_max = float(max(np.max(np.abs(pos)), np.max(np.abs(neg))))
        ok &= trace_max <= 1e-12
        details["ray_trace_max"] = trace_max
        return ok, details

    return _timed(6, "conformal equivalence", body)


# ---------------------------------------------------------------------------
# 7. duality


def criterion_7_duality(profile: str = "full") -> CriterionResult:
    """Conjugate reconstruction: path independence, dual-equation decay,
    basepoint gauge freedom, and the classical k = 0 conjugate pairs."""

    def body():
        details = {}
        wave = TravelingWave.for_params(2.0, 0.0, 1.0)
        tw = conformal.TransportedField(wave)

        gap = duality.path_independence_gap(tw, 2.0, (1.0, 0.5), (0.3, 1.1),
                                            tol=1e-10)
        details["path_independence_gap"] = gap
        ok = gap <= 1e-8

        hs, errs = [], []
        patch = HalfPlaneGrid(1.5, 2.5, 33, 0.8, 1.8, 33)
        for _ in range(3):
            vals = duality.dual_on_patch(tw, 2.0, patch, tol=1e-11)
            errs.append(duality.dual_residual(vals, patch, 2.0))
            hs.append(max(patch.hx, patch.hy))
            patch = patch.refined()
        order = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
        details["dual_residual_order"] = order
        details["dual_residuals"] = errs
        ok &= order >= 1.8

        base_patch = HalfPlaneGrid(1.5, 2.5, 17, 0.8, 1.8, 17)
        v1 = duality.dual_on_patch(tw, 2.0, base_patch, tol=1e-11)
        v2 = duality.dual_on_patch(tw, 2.0, base_patch,
                                   basepoint=(2.5, 1.8), tol=1e-11)
        shift_std = float(np.std(v1 - v2))
        details["basepoint_shift_std"] = shift_std
        ok &= shift_std <= 1e-8

        class _X:
            @staticmethod
            def value(xt, yt):
                return np.asarray(xt, float) + 0.0 * np.asarray(yt, float)

            @staticmethod
            def gradient(xt, yt):
                z = np.zeros_like(np.asarray(xt, float))
                return z + 1.0, z

        class _Log:
            @staticmethod
            def value(xt, yt):
                xt, yt = np.asarray(xt, float), np.asarray(yt, float)
                return 0.5 * np.log(xt**2 + yt**2)

            @staticmethod
            def gradient(xt, yt):
                xt, yt = np.asarray(xt, float), np.asarray(yt, float)
                r2 = xt**2 + yt**2
                return xt / r2, yt / r2

        patch0 = HalfPlaneGrid(0.5, 1.5, 21, 0.4, 1.4, 21)
        X, Y = patch0.nodes()
        vx = duality.dual_on_patch(_X(), 0.0, patch0, tol=1e-12)
        err_linear = float(np.max(np.abs(vx - (Y - Y[0, 0]))))
        varg = duality.dual_on_patch(_Log(), 0.0, patch0, tol=1e-12)
        arg = np.arctan2(Y, X)
        err_log = float(np.max(np.abs(varg - (arg - arg[0, 0]))))
        details["conjugate_of_coordinate_err"] = err_linear
        details["conjugate_of_log_err"] = err_log
        ok &= err_linear <= 1e-10 and err_log <= 1e-10

        return ok, details

    return _timed(7, "stream-function duality", body)


# ---------------------------------------------------------------------------
# 8. eigenvalue check


def criterion_8_eigenvalue(profile: str = "full") -> CriterionResult:
    """Smallest Dirichlet eigenvalue: 1.25 on the unit-aspect window within
    5 h^2, decreasing toward 1 as the window doubles, always positive."""
    prof = _profile(profile)

    def body():
        ny = prof["eigen_ny"]
        values = []
        details = {}
        for extent, nx in prof["eigen_nx"].items():
            grid = StripGrid(-extent, extent, nx, ny)
            pair = fdsolver.smallest_eigenpair(grid)
            values.append(pair.value)
            details[f"X={extent / math.pi:g}pi"] = {
                "min_eigenvalue": pair.value,
                "iterations": pair.iterations,
                "continuum": fdsolver.continuum_min_eigenvalue(grid)}
        first = StripGrid(-math.pi, math.pi, prof["eigen_nx"][math.pi], ny)
        h = max(first.hx, first.hy)
        err0 = abs(values[0] - 1.25)
        details["abs_error_at_pi"] = err0
        details["tolerance_5h2"] = 5.0 * h * h
        ok = (err0 <= 5.0 * h * h
              and values[0] > values[1] > values[2]
              and all(v > 0.0 for v in values))
        return ok, details

    return _timed(8, "strip eigenvalue exclusion", body)


# ---------------------------------------------------------------------------
# 9. maglev physics


def criterion_9_maglev(profile: str = "full") -> CriterionResult:
    """Field laws hold at second order; proxies vanish for a static plate,
    match the closed forms for k = 2, and obey the exponential decay law."""

    def body():
        details = {}
        ok = True
        for k in (0.0, 2.0):
            p = MaglevParams(mu0=1.0, sigma=k, vx=1.0, B0=1.0, wavelength=1.0)
            g = StripGrid(0.0, 2.0 * math.pi, 65, 31)
            d1, c1 = maglev.maxwell_residuals(p, g)
            d2, c2 = maglev.maxwell_residuals(p, g.refined())
            ratios = (d1 / d2, c1 / c2)
            ok &= all(3.5 <= r <= 4.5 for r in ratios)
            details[f"k={k:g}_ratios"] = list(ratios)

        p0 = MaglevParams(mu0=1.0, sigma=0.0, vx=1.0, B0=1.0, wavelength=1.0)
        drag0, lift0 = maglev.wavelength_averages(p0, 0.0)
        ok &= abs(drag0) <= 1e-10 and abs(lift0) <= 1e-10
        details["static_proxies"] = [drag0, lift0]

        p2 = MaglevParams(mu0=1.0, sigma=2.0, vx=1.0, B0=1.0, wavelength=1.0)
        drag, lift = maglev.wavelength_averages(p2, 0.0)
        drag_c, lift_c = maglev.wavelength_averages_closed(p2, 0.0)
        quad_err = max(abs(drag - drag_c), abs(lift - lift_c))
        ok &= quad_err <= 1e-8
        ok &= abs(drag - 0.393075) < 1e-6 and abs(lift - 0.309017) < 1e-6
        details["k2_proxies"] = [drag, lift]
        details["quadrature_vs_closed"] = quad_err

        wave = TravelingWave.for_params(2.0, 0.0, 1.0)
        decay_err = 0.0
        for y in (0.3, 0.7):
            dy, ly = maglev.wavelength_averages(p2, y)
            fac = math.exp(-2.0 * wave.alpha * y)
            decay_err = max(decay_err,
                            abs(dy - drag * fac) / abs(drag * fac),
                            abs(ly - lift * fac) / abs(lift * fac))
        ok &= decay_err <= 1e-10
        details["decay_law_rel_err"] = decay_err
        return ok, details

    return _timed(9, "maglev field physics", body)


# ---------------------------------------------------------------------------
# 10. determinism


def _pipeline(out_dir: Path, seed: int) -> None:
    """One pass of every artifact-emitting run, small settings."""
    runs.run_solve({
        "grid": {"x_min": -math.pi, "x_max": math.pi, "nx": 33, "ny": 15},
        "params": {"k": 2.0, "lambda": 0.0},
        "bc": {"mode": "traveling-wave"},
    }, out_dir, seed=seed)
    runs.run_certify(2.0, 1.0, 10.0, out_dir, density=31, seed=seed)
    runs.run_map(2.0, out_dir, grid=StripGrid(-math.pi, math.pi, 33, 15),
                 patch=HalfPlaneGrid(1.0, 2.0, 17, 0.5, 1.5, 17), seed=seed)
    runs.run_dualize(2.0, out_dir,
                     patch=HalfPlaneGrid(1.5, 2.5, 17, 0.8, 1.8, 17), seed=seed)
    runs.run_eigen(math.pi, 33, 15, out_dir, seed=seed)
    runs.run_maglev([0.0, 1.0, 2.0], [0.0, 0.5], out_dir, seed=seed)


_VOLATILE_KEYS = {"runtime_ms"}


def _comparable_bytes(path: Path) -> bytes:
    data = path.read_bytes()
    if path.suffix == ".json":
        payload = json.loads(data)
        for key in _VOLATILE_KEYS:
            payload.pop(key, None)
        return json.dumps(payload, indent=2, sort_keys=True).encode()
    return data


def criterion_10_determinism(profile: str = "full",
                             workdir=None) -> CriterionResult:
    """Identical seeds give byte-identical artifacts and summaries, and the
    quick battery finishes inside its time budget."""

    def body():
        import tempfile

        base = Path(workdir) if workdir else Path(tempfile.mkdtemp(
            prefix="striplev-determinism-"))
        base.mkdir(parents=True, exist_ok=True)

        mismatches = []
        dirs = [base / "run_a", base / "run_b"]
        for d in dirs:
            _pipeline(d, seed=SEED)
        names = sorted(p.name for p in dirs[0].iterdir())
        for name in names:
            if _comparable_bytes(dirs[0] / name) != _comparable_bytes(dirs[1] / name):
                mismatches.append(name)

        summaries = []
        elapsed = []
        for tag in ("a", "b"):
            t0 = time.perf_counter()
            results = run_battery("quick")
            elapsed.append(time.perf_counter() - t0)
            payload = summary_payload(results, profile="quick", seed=SEED)
            summaries.append(json.dumps(payload, indent=2, sort_keys=True))
        battery_ok = all(r.passed for r in results)

        ok = (not mismatches and summaries[0] == summaries[1]
              and min(elapsed) < 60.0 and battery_ok)
        return ok, {"artifact_files": names, "mismatched": mismatches,
                    "summary_bytes_equal": summaries[0] == summaries[1],
                    "quick_battery_s": elapsed,
                    "quick_battery_passed": battery_ok,
                    "time_budget_s": 60.0}

    return _timed(10, "determinism and quick budget", body)


# ---------------------------------------------------------------------------
# orchestration

_BATTERY = [
    criterion_1_dispersion,
    criterion_2_solver_convergence,
    criterion_3_barrier,
    criterion_4_scaled_limit,
    criterion_5_maximum_principle,
    criterion_6_conformal,
    criterion_7_duality,
    criterion_8_eigenvalue,
    criterion_9_maglev,
]


def run_battery(profile: str = "full") -> list[CriterionResult]:
    """Criteria 1 through 9 (criterion 10 wraps this battery itself)."""
    return [fn(profile) for fn in _BATTERY]


def summary_payload(results: list[CriterionResult], profile: str,
                    seed: int) -> dict:
    """Deterministic summary: no timings, only computed metrics."""
    crit = {}
    for r in results:
        details = {k: v for k, v in r.details.items()
                   if "runtime" not in str(k)}
        crit[f"criterion_{r.cid:02d}"] = {
            "name": r.name, "passed": r.passed, "metrics": details}
    return {"profile": profile, "seed": seed, "criteria": crit,
            "all_passed": all(r.passed for r in results)}


def run_all(profile: str = "full", out_dir=None,
            verbose: bool = True) -> list[CriterionResult]:
    """Full acceptance run: criteria 1-9 at the requested profile plus the
    determinism criterion; optionally writes verify_summary.json."""
    results = run_battery(profile)
    if verbose:
        for r in results:
            print(r.line())
    det = criterion_10_determinism(profile)
    results.append(det)
    if verbose:
        print(det.line())
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_json(out_dir / "verify_summary.json",
                   summary_payload(results, profile, SEED))
    return results
