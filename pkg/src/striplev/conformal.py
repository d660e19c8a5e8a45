"""Change of variables w = e^z between the strip and the upper half-plane.

The exponential sends the bottom wall to the positive real axis, the top
wall to the negative real axis, and the interior to the open half-plane
with the origin removed.  Transporting values along the map (no Jacobian
weight) turns solutions of  lap(u) - k u_x = 0  into solutions of the
degenerate weighted equation

    div(|x|^(-k) grad u~) = 0   equivalently   |x|^2 lap(u~) - k x . grad(u~) = 0,

which is what ``weighted_residual`` evaluates on a uniform Cartesian patch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import HalfPlaneGrid, ScalarField, StripGrid, atomic_write_text
from .errors import AdmissibilityWarning, PunctureError, PunctureProximityError

ADMISSIBLE_K_MAX = 2.0  # the weight |x|^(-k) backs a uniqueness theory only for k < 2


def strip_to_half(x, y):
    """(x, y) in the strip to (e^x cos y, e^x sin y); never hits the origin."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = np.exp(x)
    return r * np.cos(y), r * np.sin(y)


def half_to_strip(xt, yt):
    """Inverse map (log modulus, argument in [0, pi]); the origin is excluded."""
    xt = np.asarray(xt, dtype=float)
    yt = np.asarray(yt, dtype=float)
    if np.any(yt < 0.0):
        raise ValueError("inverse map requires y >= 0")
    r2 = xt**2 + yt**2
    if np.any(r2 == 0.0):
        raise PunctureError("inverse map is undefined at the origin")
    return 0.5 * np.log(r2), np.arctan2(yt, xt)


@dataclass(frozen=True)
class MapImage:
    """A strip field carried along the map: image points plus values."""

    source_grid: StripGrid
    xt: np.ndarray
    yt: np.ndarray
    values: np.ndarray

    @property
    def default_exclusion(self) -> float:
        # half the smallest mapped modulus
        return 0.5 * math.exp(self.source_grid.x_min)


def pushforward(field: ScalarField) -> MapImage:
    """Transport values to the mapped nodes (function transport, no weight)."""
    X, Y = field.grid.nodes()
    xt, yt = strip_to_half(X, Y)
    return MapImage(source_grid=field.grid, xt=xt, yt=yt, values=field.values)


def write_map_csv(image: MapImage, path) -> None:
    fmt = "%.17g"
    g = image.source_grid
    xs, ys = g.xs(), g.ys()
    rows = ["x,y,xt,yt,value"]
    for i in range(g.nx):
        for j in range(g.ny + 2):
            rows.append(",".join(fmt % v for v in (
                xs[i], ys[j], image.xt[i, j], image.yt[i, j], image.values[i, j])))
    atomic_write_text(path, "\n".join(rows) + "\n")


def transported(fn):
    """Compose a strip-side function with the inverse map."""
    def wrapped(xt, yt):
        x, y = half_to_strip(xt, yt)
        return fn(x, y)
    return wrapped


class TransportedField:
    """Half-plane view of a strip-side solution object.

    The wrapped object must provide ``value(x, y)``; when it also provides
    ``gradient(x, y)`` the half-plane gradient is exact via the chain rule
    through the inverse map.
    """

    def __init__(self, strip_field):
        self._field = strip_field

    def value(self, xt, yt):
        x, y = half_to_strip(xt, yt)
        return self._field.value(x, y)

    __call__ = value

    def gradient(self, xt, yt):
        xt = np.asarray(xt, dtype=float)
        yt = np.asarray(yt, dtype=float)
        x, y = half_to_strip(xt, yt)
        ux, uy = self._field.gradient(x, y)
        r2 = xt**2 + yt**2
        return (ux * xt - uy * yt) / r2, (ux * yt + uy * xt) / r2


def resample_to_patch(image: MapImage, patch: HalfPlaneGrid) -> np.ndarray:
    """Bilinear resampling of a mapped field onto a uniform patch.

    Interpolation runs in strip coordinates, where the source lattice is
    uniform; each patch node is pulled back through the inverse map first.
    """
    Xp, Yp = patch.nodes()
    x, y = half_to_strip(Xp, Yp)
    g = image.source_grid
    if np.any(x < g.x_min - 1e-12) or np.any(x > g.x_max + 1e-12):
        raise ValueError("patch pulls back outside the source strip window")
    fx = np.clip((x - g.x_min) / g.hx, 0.0, g.nx - 1 - 1e-12)
    fy = np.clip(y / g.hy, 0.0, g.ny + 1 - 1e-12)
    ix = fx.astype(int)
    jy = fy.astype(int)
    tx, ty = fx - ix, fy - jy
    v = image.values
    return ((1 - tx) * (1 - ty) * v[ix, jy]
            + tx * (1 - ty) * v[ix + 1, jy]
            + (1 - tx) * ty * v[ix, jy + 1]
            + tx * ty * v[ix + 1, jy + 1])


def _patch_values(u, patch: HalfPlaneGrid) -> np.ndarray:
    if isinstance(u, np.ndarray):
        if u.shape != patch.shape:
            raise ValueError(f"expected values of shape {patch.shape}, got {u.shape}")
        return u
    if isinstance(u, MapImage):
        return resample_to_patch(u, patch)
    X, Y = patch.nodes()
    return np.asarray(u(X, Y), dtype=float)


def _check_stencils_clear(patch: HalfPlaneGrid, rho: float) -> None:
    if rho <= 0.0:
        return
    X, Y = patch.nodes()
    inside = np.hypot(X, Y) <= rho
    # interior stencils use every node except the four extreme corners
    if np.any(inside):
        raise PunctureProximityError(
            f"a residual stencil touches the exclusion disk of radius {rho:g}")


def weighted_residual(u, patch: HalfPlaneGrid, k: float,
                      exclusion_radius: float | None = None) -> float:
    """Max normalized residual  lap(u~) - k x . grad(u~) / |x|^2  on the patch.

    ``u`` may be a callable on the half-plane, an array of patch samples or
    a MapImage (which is resampled first).  Emits a warning for k >= 2,
    where the weight leaves the admissible range of the uniqueness theory;
    the finite differences themselves do not care.
    """
    return float(np.max(np.abs(
        weighted_residual_grid(u, patch, k, exclusion_radius))))


def weighted_residual_grid(u, patch: HalfPlaneGrid, k: float,
                           exclusion_radius: float | None = None) -> np.ndarray:
    if k >= ADMISSIBLE_K_MAX:
        warnings.warn(
            f"weight exponent k = {k:g} is outside the admissible range k < 2; "
            "residuals are still meaningful", AdmissibilityWarning, stacklevel=2)
    rho = patch.exclusion_radius if exclusion_radius is None else exclusion_radius
    if isinstance(u, MapImage) and exclusion_radius is None and rho == 0.0:
        rho = u.default_exclusion
    _check_stencils_clear(patch, rho)

    vals = _patch_values(u, patch)
    hx, hy = patch.hx, patch.hy
    X, Y = patch.nodes()
    Xi, Yi = X[1:-1, 1:-1], Y[1:-1, 1:-1]
    lap = ((vals[2:, 1:-1] - 2 * vals[1:-1, 1:-1] + vals[:-2, 1:-1]) / hx**2
           + (vals[1:-1, 2:] - 2 * vals[1:-1, 1:-1] + vals[1:-1, :-2]) / hy**2)
    gx = (vals[2:, 1:-1] - vals[:-2, 1:-1]) / (2 * hx)
    gy = (vals[1:-1, 2:] - vals[1:-1, :-2]) / (2 * hy)
    r2 = Xi**2 + Yi**2
    return lap - k * (Xi * gx + Yi * gy) / r2


def ray_traces(u, moduli) -> tuple[np.ndarray, np.ndarray]:
    """Values of a half-plane function on the two boundary rays.

    Returns (values on x > 0, values on x < 0) at the given moduli; these
    are the transported traces of the bottom and top walls.
    """
    moduli = np.asarray(moduli, dtype=float)
    fn = u.value if hasattr(u, "value") else u
    pos = np.asarray(fn(moduli, np.zeros_like(moduli)), dtype=float)
    neg = np.asarray(fn(-moduli, np.zeros_like(moduli)), dtype=float)
    return pos, neg
