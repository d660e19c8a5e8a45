"""Grids, fields and parameter records shared by every other module.

The working domain is the horizontal strip of height pi, truncated in x to
[x_min, x_max] so that it fits in memory.  Nodes are laid out column by
column with y varying fastest; that order is fixed once and for all because
the CSV artifacts are compared byte for byte between runs.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidBoundsError, NonFiniteValueError

HEIGHT = math.pi  # strip height; the y-range of every StripGrid is [0, HEIGHT]


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class StripGrid:
    """Uniform lattice on [x_min, x_max] x [0, pi].

    ``nx`` counts columns (including both vertical edges), ``ny`` counts
    interior rows, so there are ``ny + 2`` y-levels with ``j = 0`` on the
    bottom wall and ``j = ny + 1`` on the top wall.
    """

    x_min: float
    x_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise InvalidBoundsError(
                f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.nx < 3 or self.ny < 3:
            raise InvalidBoundsError(
                f"need nx >= 3 and ny >= 3, got nx={self.nx}, ny={self.ny}")

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return HEIGHT / (self.ny + 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny + 2)

    def xs(self) -> np.ndarray:
        return self.x_min + np.arange(self.nx) * self.hx

    def ys(self) -> np.ndarray:
        return np.arange(self.ny + 2) * self.hy

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape ``self.shape`` (x index first)."""
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def node(self, i: int, j: int) -> tuple[float, float]:
        return (self.x_min + i * self.hx, j * self.hy)

    def refined(self) -> "StripGrid":
        """Grid with both spacings halved (nodes of self are kept)."""
        return StripGrid(self.x_min, self.x_max, 2 * self.nx - 1, 2 * self.ny + 1)


def build_strip_grid(x_min: float, x_max: float, nx: int, ny: int) -> StripGrid:
    return StripGrid(x_min, x_max, nx, ny)


@dataclass(frozen=True)
class HalfPlaneGrid:
    """Uniform Cartesian patch in the open upper half-plane.

    Used as the evaluation lattice for the transformed equation; the
    optional exclusion radius keeps samples away from the puncture at the
    origin.
    """

    xt_min: float
    xt_max: float
    nxt: int
    yt_min: float
    yt_max: float
    nyt: int
    exclusion_radius: float = 0.0

    def __post_init__(self):
        if not self.xt_min < self.xt_max or not self.yt_min < self.yt_max:
            raise InvalidBoundsError("patch bounds must be increasing")
        if self.nxt < 3 or self.nyt < 3:
            raise InvalidBoundsError("patch needs at least 3 points per axis")
        if self.yt_min <= 0.0:
            raise InvalidBoundsError("patch must lie in the open half-plane y > 0")
        if self.exclusion_radius > 0.0:
            xn = min(abs(self.xt_min), abs(self.xt_max))
            if self.xt_min <= 0.0 <= self.xt_max:
                xn = 0.0
            if math.hypot(xn, self.yt_min) <= self.exclusion_radius:
                raise InvalidBoundsError(
                    "patch reaches inside the puncture exclusion disk")

    @property
    def hx(self) -> float:
        return (self.xt_max - self.xt_min) / (self.nxt - 1)

    @property
    def hy(self) -> float:
        return (self.yt_max - self.yt_min) / (self.nyt - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nxt, self.nyt)

    def xs(self) -> np.ndarray:
        return self.xt_min + np.arange(self.nxt) * self.hx

    def ys(self) -> np.ndarray:
        return self.yt_min + np.arange(self.nyt) * self.hy

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def refined(self) -> "HalfPlaneGrid":
        return HalfPlaneGrid(self.xt_min, self.xt_max, 2 * self.nxt - 1,
                             self.yt_min, self.yt_max, 2 * self.nyt - 1,
                             self.exclusion_radius)


# ---------------------------------------------------------------------------
# fields


def _frozen_array(values, shape, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.shape != shape:
        raise ValueError(f"{what}: expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_finite(arr: np.ndarray, grid, what: str) -> None:
    if np.all(np.isfinite(arr)):
        return
    i, j = map(int, np.argwhere(~np.isfinite(arr))[0])
    x, y = grid.node(i, j)
    raise NonFiniteValueError(
        f"{what} is not finite at node ({i},{j}) = ({x:.6g},{y:.6g})")


@dataclass(frozen=True)
class ScalarField:
    """Per-node real samples attached to a grid; immutable once built."""

    grid: StripGrid
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, self.grid.shape, "ScalarField values")
        object.__setattr__(self, "values", arr)
        _check_finite(arr, self.grid, "field value")


@dataclass(frozen=True)
class VectorField:
    """Two real components per node (field components or gradients)."""

    grid: StripGrid
    vx: np.ndarray
    vy: np.ndarray

    def __post_init__(self):
        vx = _frozen_array(self.vx, self.grid.shape, "VectorField vx")
        vy = _frozen_array(self.vy, self.grid.shape, "VectorField vy")
        object.__setattr__(self, "vx", vx)
        object.__setattr__(self, "vy", vy)
        _check_finite(vx, self.grid, "vx component")
        _check_finite(vy, self.grid, "vy component")


def sample(grid: StripGrid, fn) -> ScalarField:
    """Evaluate ``fn(x, y)`` at every node of ``grid``.

    ``fn`` may be vectorized over numpy arrays or accept plain scalars.
    Non-finite results are an error that names the offending node.
    """
    X, Y = grid.nodes()
    try:
        vals = np.broadcast_to(np.asarray(fn(X, Y), dtype=float), grid.shape)
    except (TypeError, ValueError):
        vals = np.vectorize(fn, otypes=[float])(X, Y)
    return ScalarField(grid, vals)


def sample_vector(grid: StripGrid, fn) -> VectorField:
    """Evaluate a two-component ``fn(x, y) -> (vx, vy)`` on the grid."""
    X, Y = grid.nodes()
    vx, vy = fn(X, Y)
    vx = np.broadcast_to(np.asarray(vx, dtype=float), grid.shape)
    vy = np.broadcast_to(np.asarray(vy, dtype=float), grid.shape)
    return VectorField(grid, vx, vy)


# ---------------------------------------------------------------------------
# parameter records


@dataclass(frozen=True)
class PdeParams:
    """Coefficients of the operator  Lu = lap(u) - k u_x - lam u."""

    k: float
    lam: float = 0.0

    def __post_init__(self):
        if not self.lam >= 0.0:
            raise ValueError(f"zeroth-order coefficient must be >= 0, got {self.lam}")


@dataclass(frozen=True)
class MaglevParams:
    """Physical inputs for the levitation field; k is derived, never set."""

    mu0: float
    sigma: float
    vx: float
    B0: float
    wavelength: float
    k: float = field(init=False)

    def __post_init__(self):
        if not self.sigma >= 0.0:
            raise ValueError(f"conductivity must be >= 0, got {self.sigma}")
        if not self.wavelength > 0.0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")
        object.__setattr__(self, "k", self.mu0 * self.sigma * self.vx)


# ---------------------------------------------------------------------------
# serialization

_FMT = "%.17g"  # 17 significant digits round-trip IEEE doubles exactly


def atomic_write_text(path, text: str) -> None:
    """Write to a sibling temp file, then rename into place."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_field_csv(field: ScalarField, path) -> None:
    rows = ["x,y,value"]
    xs, ys = field.grid.xs(), field.grid.ys()
    for i in range(field.grid.nx):
        for j in range(field.grid.ny + 2):
            rows.append(f"{_FMT % xs[i]},{_FMT % ys[j]},{_FMT % field.values[i, j]}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def write_vector_csv(field: VectorField, path) -> None:
    rows = ["x,y,vx,vy"]
    xs, ys = field.grid.xs(), field.grid.ys()
    for i in range(field.grid.nx):
        for j in range(field.grid.ny + 2):
            rows.append(f"{_FMT % xs[i]},{_FMT % ys[j]},"
                        f"{_FMT % field.vx[i, j]},{_FMT % field.vy[i, j]}")
    atomic_write_text(path, "\n".join(rows) + "\n")


def read_csv_columns(path) -> dict[str, np.ndarray]:
    """Read one of the package CSV artifacts back into float columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: np.array([float(row[c]) for row in data])
            for c, name in enumerate(header)}
    return cols


def field_from_csv(path, grid: StripGrid) -> ScalarField:
    cols = read_csv_columns(path)
    return ScalarField(grid, cols["value"].reshape(grid.shape))
