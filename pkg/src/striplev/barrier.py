"""Comparison-function certificate for nonnegativity on the strip.

The certificate rests on a two-stage construction.  ``harmonic_measure`` is
the harmonic function on the upper unit half-disk that vanishes on the
diameter and equals one on the arc; rescaled to radius R it controls
boundary behaviour on expanding half-disks.  ``drift_ramp`` is a normalized
exponential ramp whose log-derivative is the constant -pi^2 |k| / 2, which
is exactly strong enough to absorb the worst case of the drift term.  The
composition

    barrier_value(x, y) = drift_ramp(k, harmonic_measure(x/R, y/R))

is then a supersolution:  lap(v) - k v_x - lam v <= 0  everywhere on the
half-disk portion of the strip.  ``certify_barrier`` checks that sign, the
gradient-ratio bound behind it, and the large-R scaling limit, on a dense
deterministic sample set, using closed-form derivatives (finite differences
are kept as an independent cross-check only, since they degrade near the
corner singularities).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HEIGHT
from .errors import SingularCornerError

# damping rate of the ramp per unit |k|; chosen to dominate the
# gradient-ratio bound  |k R h_x| / |grad h|^2 <= |k| pi^2 / 2
DAMPING_PER_K = math.pi**2 / 2.0

_CORNER_TOL = 1e-12


def _corner_guard(x, y, half_width: float, tol: float) -> None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    near = np.hypot(x - half_width, y) <= tol
    near |= np.hypot(x + half_width, y) <= tol
    if np.any(near):
        idx = np.argwhere(near)[0] if near.ndim else ()
        raise SingularCornerError(
            f"evaluation within {tol:g} of a corner (+-{half_width:g}, 0)"
            + (f" at sample index {tuple(map(int, idx))}" if near.ndim else ""))


def harmonic_measure(x, y):
    """Harmonic measure of the arc of the upper unit half-disk.

    Equals 0 on the open diameter, 1 on the arc, and lies strictly between
    on the interior.  The two-angle form below is free of cancellation all
    the way down to the diameter.  Discontinuous at the corners (+-1, 0),
    which are rejected.
    """
    _corner_guard(x, y, 1.0, _CORNER_TOL)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (2.0 / math.pi) * (np.arctan2(y, 1.0 + x) + np.arctan2(y, 1.0 - x))


def harmonic_measure_gradient(x, y):
    """Closed-form gradient of ``harmonic_measure``."""
    _corner_guard(x, y, 1.0, _CORNER_TOL)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = (1.0 + x) ** 2 + y**2
    b = (1.0 - x) ** 2 + y**2
    gx = (2.0 / math.pi) * (-y / a + y / b)
    gy = (2.0 / math.pi) * ((1.0 + x) / a + (1.0 - x) / b)
    return gx, gy


def drift_ramp(k: float, t):
    """Normalized exponential ramp with f(0) = 0, f(1) = 1.

    For k = 0 this is the identity; otherwise
    f(t) = (1 - e^{-c t}) / (1 - e^{-c}) with c = pi^2 |k| / 2, so that
    f'' / f' is the constant -c.
    """
    t = np.asarray(t, dtype=float)
    c = DAMPING_PER_K * abs(k)
    if c == 0.0:
        return t + 0.0
    return np.expm1(-c * t) / np.expm1(-c)


def drift_ramp_deriv(k: float, t):
    t = np.asarray(t, dtype=float)
    c = DAMPING_PER_K * abs(k)
    if c == 0.0:
        return np.ones_like(t)
    return c * np.exp(-c * t) / -np.expm1(-c)


def drift_ramp_slope0(k: float) -> float:
    return float(drift_ramp_deriv(k, 0.0))


# ---------------------------------------------------------------------------
# the rescaled barrier


@dataclass(frozen=True)
class BarrierSpec:
    """Operator coefficients plus the half-disk radius under certification."""

    k: float
    lam: float
    radius: float
    corner_exclusion: float = 0.0  # 0 means: use the default radius/1000

    def __post_init__(self):
        if not self.lam >= 0.0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not self.radius > HEIGHT:
            raise ValueError(f"radius must exceed the strip height, got {self.radius}")
        if self.corner_exclusion == 0.0:
            object.__setattr__(self, "corner_exclusion", 1e-3 * self.radius)
        if not 0.0 < self.corner_exclusion < self.radius / 10.0:
            raise ValueError("corner_exclusion must lie in (0, radius/10)")


@dataclass(frozen=True)
class CertReport:
    """Outcome of a numerical certificate run."""

    max_violation: float
    samples_checked: int
    tolerance: float
    passed: bool
    seed: int

    @classmethod
    def make(cls, max_violation: float, samples_checked: int, tolerance: float,
             seed: int) -> "CertReport":
        return cls(max_violation=float(max_violation),
                   samples_checked=int(samples_checked),
                   tolerance=float(tolerance),
                   passed=bool(max_violation <= tolerance),
                   seed=int(seed))

    def to_json_dict(self) -> dict:
        return {"max_violation": self.max_violation,
                "samples_checked": self.samples_checked,
                "tolerance": self.tolerance,
                "passed": self.passed,
                "seed": self.seed}


def barrier_value(spec: BarrierSpec, x, y):
    """drift_ramp(k, harmonic_measure(x/R, y/R)); zero on the bottom wall,
    one on the arc of radius R."""
    R = spec.radius
    _corner_guard(x, y, R, spec.corner_exclusion)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return drift_ramp(spec.k, harmonic_measure(x / R, y / R))


def barrier_operator_closed(spec: BarrierSpec, x, y):
    """Closed-form value of  (lap - k d_x - lam)[barrier]  at (x, y).

    Uses the harmonicity of ``harmonic_measure``: the Laplacian of the
    composition collapses to f''(h) |grad h|^2 / R^2 evaluated at the
    rescaled point.
    """
    R = spec.radius
    _corner_guard(x, y, R, spec.corner_exclusion)
    xi = np.asarray(x, dtype=float) / R
    eta = np.asarray(y, dtype=float) / R
    h = harmonic_measure(xi, eta)
    gx, gy = harmonic_measure_gradient(xi, eta)
    c = DAMPING_PER_K * abs(spec.k)
    fp = drift_ramp_deriv(spec.k, h)
    fpp = -c * fp
    return (fpp * (gx**2 + gy**2) / R**2
            - (spec.k / R) * fp * gx
            - spec.lam * drift_ramp(spec.k, h))


def barrier_operator_fd(spec: BarrierSpec, x, y, step: float):
    """Finite-difference evaluation of the same operator (cross-check path)."""
    v = lambda a, b: barrier_value(spec, a, b)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lap = ((v(x + step, y) - 2.0 * v(x, y) + v(x - step, y)) / step**2
           + (v(x, y + step) - 2.0 * v(x, y) + v(x, y - step)) / step**2)
    dx = (v(x + step, y) - v(x - step, y)) / (2.0 * step)
    return lap - spec.k * dx - spec.lam * v(x, y)


def gradient_ratio(spec: BarrierSpec, x, y):
    """|k R h_x| / |grad h|^2 at the rescaled point; bounded by |k| pi^2 / 2."""
    R = spec.radius
    xi = np.asarray(x, dtype=float) / R
    eta = np.asarray(y, dtype=float) / R
    gx, gy = harmonic_measure_gradient(xi, eta)
    return np.abs(spec.k * R * gx) / (gx**2 + gy**2)


def scaled_limit_deviations(k: float, point=(0.0, 1.0),
                            radii=(1e2, 1e3, 1e4)) -> list[float]:
    """|R * barrier_value(point) - (4 y / pi) f'(0)| for each radius.

    As R grows the rescaled barrier flattens onto its linearization at the
    origin, so the deviations must decrease toward zero.
    """
    x, y = point
    target = (4.0 * y / math.pi) * drift_ramp_slope0(k)
    out = []
    for R in radii:
        spec = BarrierSpec(k=k, lam=0.0, radius=R)
        out.append(abs(float(R * barrier_value(spec, x, y)) - target))
    return out


# ---------------------------------------------------------------------------
# the certificate


@dataclass(frozen=True)
class BarrierCertificate:
    """Full outcome of ``certify_barrier``; ``report`` carries the core
    differential-inequality result, the other fields the auxiliary checks."""

    report: CertReport
    ratio_bound_max: float       # max of |k R h_x| / |grad h|^2 over samples
    ratio_bound_limit: float     # |k| pi^2 / 2
    ratio_bound_ok: bool
    fd_crosscheck_max: float     # max |closed form - finite difference|
    fd_crosscheck_ok: bool
    fd_step: float
    value_min: float             # extremes of the barrier over samples
    value_max: float
    value_range_ok: bool         # strictly inside (0, 1)
    wall_max_abs: float          # |barrier| on the bottom wall
    arc_max_dev: float           # |barrier - 1| on the arc
    top_row_ok: bool             # 0 < barrier <= 1 on the y = pi line
    scaled_limit_deviations: tuple
    scaled_limit_ok: bool

    @property
    def all_checks_pass(self) -> bool:
        return (self.report.passed and self.ratio_bound_ok and
                self.fd_crosscheck_ok and self.value_range_ok and
                self.wall_max_abs <= 1e-14 and self.arc_max_dev <= 1e-12 and
                self.top_row_ok and self.scaled_limit_ok)


def _interior_samples(spec: BarrierSpec, density: int, n_random: int,
                      seed: int, pad: float):
    """Tensor lattice over the half-disk interior plus uniform random points.

    ``pad`` keeps samples far enough from walls and arc for finite
    difference stencils.  Deterministic for a fixed seed.
    """
    R = spec.radius
    xs = np.linspace(-R, R, density)
    ys = np.linspace(0.0, HEIGHT, density + 2)[1:-1]
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    X, Y = X.ravel(), Y.ravel()

    rng = np.random.default_rng(seed)
    got_x, got_y = [], []
    while sum(len(g) for g in got_x) < n_random:
        cand_x = rng.uniform(-R, R, size=4 * n_random)
        cand_y = rng.uniform(0.0, HEIGHT, size=4 * n_random)
        ok = _admissible_mask(spec, cand_x, cand_y, pad)
        got_x.append(cand_x[ok])
        got_y.append(cand_y[ok])
    rx = np.concatenate(got_x)[:n_random]
    ry = np.concatenate(got_y)[:n_random]

    keep = _admissible_mask(spec, X, Y, pad)
    return np.concatenate([X[keep], rx]), np.concatenate([Y[keep], ry])


def _admissible_mask(spec: BarrierSpec, x, y, pad: float):
    R = spec.radius
    r = np.hypot(x, y)
    ok = (y > pad) & (y < HEIGHT) & (r < R - pad)
    ok &= np.hypot(x - R, y) > spec.corner_exclusion
    ok &= np.hypot(x + R, y) > spec.corner_exclusion
    return ok


def certify_barrier(spec: BarrierSpec, density: int = 81, seed: int = 2026,
                    tolerance: float = 1e-8, n_random: int = 1000,
                    fd_crosscheck_points: int = 250,
                    fd_crosscheck_tol: float = 1e-6) -> BarrierCertificate:
    """Certify the supersolution inequality and its supporting bounds.

    The differential inequality is evaluated in closed form at every
    sample; the finite-difference cross-check runs on the subset of samples
    at least 0.4 R away from the corners, where second differences of the
    barrier are trustworthy at the chosen step.
    """
    R = spec.radius
    step = min(1e-3, 1e-5 * R)
    X, Y = _interior_samples(spec, density, n_random, seed, pad=2.0 * step)

    lv = barrier_operator_closed(spec, X, Y)
    max_violation = float(np.max(lv))
    report = CertReport.make(max_violation, X.size, tolerance, seed)

    ratio = gradient_ratio(spec, X, Y)
    ratio_max = float(np.max(ratio)) if X.size else 0.0
    ratio_limit = abs(spec.k) * DAMPING_PER_K
    ratio_ok = ratio_max <= ratio_limit + 1e-10

    vals = barrier_value(spec, X, Y)
    vmin, vmax = float(np.min(vals)), float(np.max(vals))
    range_ok = 0.0 < vmin and vmax < 1.0

    # boundary behaviour: zero on the wall, one on the arc, (0, 1] on y = pi
    wall_x = np.linspace(-R + 2 * spec.corner_exclusion,
                         R - 2 * spec.corner_exclusion, 101)
    wall_max = float(np.max(np.abs(barrier_value(spec, wall_x, np.zeros_like(wall_x)))))
    phi = np.linspace(0.05, math.pi - 0.05, 101)
    arc_dev = float(np.max(np.abs(
        barrier_value(spec, R * np.cos(phi), R * np.sin(phi)) - 1.0)))
    span = math.sqrt(R**2 - HEIGHT**2)
    top_x = np.linspace(-0.95 * span, 0.95 * span, 101)
    top_vals = barrier_value(spec, top_x, np.full_like(top_x, HEIGHT))
    top_ok = bool(np.all((top_vals > 0.0) & (top_vals <= 1.0)))

    # cross-check on the corner-safe subset
    safe = (np.hypot(X - R, Y) >= 0.4 * R) & (np.hypot(X + R, Y) >= 0.4 * R)
    sx, sy = X[safe], Y[safe]
    if sx.size > fd_crosscheck_points:
        stride = sx.size // fd_crosscheck_points + 1
        sx, sy = sx[::stride], sy[::stride]
    fd_max = float(np.max(np.abs(
        barrier_operator_fd(spec, sx, sy, step) -
        barrier_operator_closed(spec, sx, sy)))) if sx.size else 0.0
    fd_ok = fd_max <= fd_crosscheck_tol

    devs = tuple(scaled_limit_deviations(spec.k))
    devs_ok = all(devs[i + 1] < devs[i] for i in range(len(devs) - 1))

    return BarrierCertificate(
        report=report,
        ratio_bound_max=ratio_max, ratio_bound_limit=ratio_limit,
        ratio_bound_ok=ratio_ok,
        fd_crosscheck_max=fd_max, fd_crosscheck_ok=fd_ok, fd_step=step,
        value_min=vmin, value_max=vmax, value_range_ok=range_ok,
        wall_max_abs=wall_max, arc_max_dev=arc_dev, top_row_ok=top_ok,
        scaled_limit_deviations=devs, scaled_limit_ok=devs_ok)
