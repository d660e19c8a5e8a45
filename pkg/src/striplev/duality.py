"""Stream-function duality for the weighted half-plane equation.

A solution u~ of  div(|x|^(-k) grad u~) = 0  owns a conjugate function v~
with

    |x|^(-k) grad u~ = perp(grad v~),      perp(a, b) = (b, -a),

so grad v~ = (-|x|^(-k) d_y u~, |x|^(-k) d_x u~).  The conjugate solves the
dual equation  div(|x|^k grad v~) = 0  and is unique up to a constant; for
k = 0 the pair (u~, v~) is just a holomorphic function split into real and
imaginary parts.  v~ is reconstructed here by quadrature of its gradient
along axis-aligned staircase paths; path independence of that integral is
itself a check that u~ solves the equation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import HalfPlaneGrid
from .errors import (PathThroughPunctureError, PunctureProximityError,
                     QuadratureToleranceWarning)

_FD_STEP = 1e-6


def perp(vec):
    """Quarter turn (a, b) -> (b, -a); applying it twice negates."""
    a, b = vec
    return (b, -a)


def _gradient_of(u, xt, yt):
    if hasattr(u, "gradient"):
        return u.gradient(xt, yt)
    fn = u.value if hasattr(u, "value") else u
    xt = np.asarray(xt, dtype=float)
    yt = np.asarray(yt, dtype=float)
    hx = _FD_STEP * np.maximum(1.0, np.abs(xt))
    hy = _FD_STEP * np.maximum(1.0, np.abs(yt))
    gx = (fn(xt + hx, yt) - fn(xt - hx, yt)) / (2 * hx)
    gy = (fn(xt, yt + hy) - fn(xt, yt - hy)) / (2 * hy)
    return gx, gy


def stream_gradient(u, k: float, xt, yt, exclusion_radius: float = 0.0):
    """Gradient of the conjugate:  (-|x|^(-k) u_y, |x|^(-k) u_x)."""
    xt = np.asarray(xt, dtype=float)
    yt = np.asarray(yt, dtype=float)
    if exclusion_radius > 0.0 and np.any(np.hypot(xt, yt) <= exclusion_radius):
        raise PunctureProximityError(
            f"stream gradient requested inside the exclusion disk "
            f"(radius {exclusion_radius:g})")
    ux, uy = _gradient_of(u, xt, yt)
    weight = (xt**2 + yt**2) ** (-k / 2.0)
    return -weight * uy, weight * ux


# ---------------------------------------------------------------------------
# paths and quadrature


@dataclass(frozen=True)
class StreamPath:
    """Axis-aligned polyline in the half-plane, origin-avoiding."""

    vertices: tuple
    exclusion_radius: float = 0.0

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 2:
            raise ValueError("a path needs at least two vertices")
        for (x0, y0), (x1, y1) in zip(verts, verts[1:]):
            if x0 != x1 and y0 != y1:
                raise ValueError(
                    f"segment ({x0},{y0}) -> ({x1},{y1}) is not axis-aligned")
            if self.exclusion_radius > 0.0:
                if self._segment_origin_distance((x0, y0), (x1, y1)) <= self.exclusion_radius:
                    raise PathThroughPunctureError(
                        "path segment crosses the puncture exclusion disk")

    @staticmethod
    def _segment_origin_distance(p0, p1) -> float:
        (x0, y0), (x1, y1) = p0, p1
        if y0 == y1:  # horizontal
            lo, hi = min(x0, x1), max(x0, x1)
            xc = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
            return float(np.hypot(xc, y0))
        lo, hi = min(y0, y1), max(y0, y1)
        yc = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
        return float(np.hypot(x0, yc))

    @property
    def basepoint(self):
        return self.vertices[0]

    @property
    def target(self):
        return self.vertices[-1]

    @classmethod
    def staircase(cls, base, target, order: str = "xy",
                  exclusion_radius: float = 0.0) -> "StreamPath":
        """L-shaped path: horizontal then vertical ("xy") or the reverse."""
        bx, by = base
        tx, ty = target
        mid = (tx, by) if order == "xy" else (bx, ty)
        return cls(vertices=(tuple(base), mid, tuple(target)),
                   exclusion_radius=exclusion_radius)


def _segment_integral(u, k: float, p0, p1, panels: int, rho: float):
    """Composite Simpson along one axis-aligned segment."""
    (x0, y0), (x1, y1) = p0, p1
    t = np.linspace(0.0, 1.0, panels + 1)
    xs = x0 + (x1 - x0) * t
    ys = y0 + (y1 - y0) * t
    gx, gy = stream_gradient(u, k, xs, ys, exclusion_radius=rho)
    integrand = gx * (x1 - x0) + gy * (y1 - y0)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(np.dot(w, integrand) / (3.0 * panels))


def integrate_stream(u, k: float, path: StreamPath, tol: float = 1e-8,
                     min_panels: int = 256, max_doublings: int = 10) -> float:
    """Line integral of the conjugate gradient along the path.

    Panel counts double until two successive composite-Simpson values agree
    to ``tol``; if the doubling budget runs out a warning reports the gap
    and the last value is returned.
    """
    segs = [(p0, p1) for p0, p1 in zip(path.vertices, path.vertices[1:])
            if p0 != p1]
    rho = path.exclusion_radius
    panels = max(2, min_panels + (min_panels % 2))
    total = sum(_segment_integral(u, k, p0, p1, panels, rho) for p0, p1 in segs)
    for _ in range(max_doublings):
        panels *= 2
        refined = sum(_segment_integral(u, k, p0, p1, panels, rho)
                      for p0, p1 in segs)
        if abs(refined - total) <= tol:
            return refined
        total = refined
    warnings.warn(
        f"stream integral stopped at {panels} panels per segment without "
        f"meeting tolerance {tol:g}", QuadratureToleranceWarning, stacklevel=2)
    return total


def path_independence_gap(u, k: float, base, target, tol: float = 1e-10,
                          exclusion_radius: float = 0.0) -> float:
    """Disagreement between the two staircase integrals; small gaps certify
    that the source field actually solves the weighted equation."""
    vals = [integrate_stream(
        u, k, StreamPath.staircase(base, target, order, exclusion_radius), tol=tol)
        for order in ("xy", "yx")]
    return abs(vals[0] - vals[1])


# ---------------------------------------------------------------------------
# the conjugate on a patch


def _cumulative_interval_integrals(values_fn, breaks, panels):
    """Integrals of a 1-d integrand over consecutive intervals, vectorized.

    ``values_fn`` maps an array of coordinates to integrand samples with
    leading broadcast dimensions; returns the per-interval integrals.
    """
    s = np.linspace(0.0, 1.0, panels + 1)
    nodes = breaks[:-1, None] + np.diff(breaks)[:, None] * s[None, :]
    samples = values_fn(nodes)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    widths = np.diff(breaks) / (3.0 * panels)
    return np.tensordot(samples, w, axes=([-1], [0])) * widths


def dual_on_patch(u, k: float, patch: HalfPlaneGrid, basepoint=None,
                  tol: float = 1e-10, min_panels: int = 32,
                  max_doublings: int = 8) -> np.ndarray:
    """Conjugate values at every patch node, gauged to zero at the basepoint.

    The basepoint must be a patch node (default: the lower-left corner).
    Integration runs along the basepoint row and then up or down each
    column; all legs stay inside the patch rectangle, which is simply
    connected and clear of the puncture by construction.
    """
    xs, ys = patch.xs(), patch.ys()
    if basepoint is None:
        ib = jb = 0
    else:
        bx, by = basepoint
        ib = int(np.argmin(np.abs(xs - bx)))
        jb = int(np.argmin(np.abs(ys - by)))
        if abs(xs[ib] - bx) > 1e-9 or abs(ys[jb] - by) > 1e-9:
            raise ValueError("basepoint must coincide with a patch node")
    rho = patch.exclusion_radius

    def assemble(panels):
        # horizontal leg along the basepoint row
        row = _cumulative_interval_integrals(
            lambda t: stream_gradient(u, k, t, np.full_like(t, ys[jb]), rho)[0],
            xs, panels)
        hcum = np.concatenate([[0.0], np.cumsum(row)])
        h = hcum - hcum[ib]
        # vertical legs, one per column
        col = _cumulative_interval_integrals(
            lambda t: stream_gradient(
                u, k, np.broadcast_to(xs[:, None, None], (xs.size,) + t.shape), t, rho)[1],
            ys, panels)
        vcum = np.concatenate([np.zeros((xs.size, 1)), np.cumsum(col, axis=1)], axis=1)
        v = vcum - vcum[:, jb:jb + 1]
        return h[:, None] + v

    panels = max(2, min_panels + (min_panels % 2))
    out = assemble(panels)
    for _ in range(max_doublings):
        panels *= 2
        refined = assemble(panels)
        if np.max(np.abs(refined - out)) <= tol:
            return refined
        out = refined
    warnings.warn(
        f"conjugate reconstruction stopped at {panels} panels per interval "
        f"without meeting tolerance {tol:g}", QuadratureToleranceWarning,
        stacklevel=2)
    return out


def dual_residual(values, patch: HalfPlaneGrid, k: float,
                  exclusion_radius: float | None = None) -> float:
    """Max normalized residual of the dual equation,
    lap(v~) + k x . grad(v~) / |x|^2  (note the flipped drift sign)."""
    rho = patch.exclusion_radius if exclusion_radius is None else exclusion_radius
    if rho > 0.0:
        X, Y = patch.nodes()
        if np.any(np.hypot(X, Y) <= rho):
            raise PunctureProximityError(
                f"a residual stencil touches the exclusion disk of radius {rho:g}")
    vals = np.asarray(values, dtype=float)
    if vals.shape != patch.shape:
        raise ValueError(f"expected values of shape {patch.shape}, got {vals.shape}")
    hx, hy = patch.hx, patch.hy
    X, Y = patch.nodes()
    Xi, Yi = X[1:-1, 1:-1], Y[1:-1, 1:-1]
    lap = ((vals[2:, 1:-1] - 2 * vals[1:-1, 1:-1] + vals[:-2, 1:-1]) / hx**2
           + (vals[1:-1, 2:] - 2 * vals[1:-1, 1:-1] + vals[1:-1, :-2]) / hy**2)
    gx = (vals[2:, 1:-1] - vals[:-2, 1:-1]) / (2 * hx)
    gy = (vals[1:-1, 2:] - vals[1:-1, :-2]) / (2 * hy)
    return float(np.max(np.abs(lap + k * (Xi * gx + Yi * gy) / (Xi**2 + Yi**2))))
