"""Second-order finite differences for  lap(u) - k u_x - lam u = f  on a
truncated strip with Dirichlet walls.

Convection is discretized centrally by default, guarded by the cell
constraint hx <= 2/|k| that keeps the system matrix an M-matrix (and with
it the discrete maximum principle); a first-order upwind fallback is
available for coarse meshes.  Systems are solved by a direct sparse LU
factorization with iterative refinement down to a tight algebraic residual,
so that repeated runs are bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import HEIGHT, PdeParams, ScalarField, StripGrid
from .errors import CellPecletError, NonConvergenceError, SingularSystemError

_PERMC = "MMD_ATA"  # fill-reducing ordering; fixed for determinism


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data: wall values as functions of x, side closure either
    sampled from ``sides(x, y)`` or periodic in x."""

    bottom: Callable
    top: Callable
    closure: str = "dirichlet"
    sides: Optional[Callable] = None

    def __post_init__(self):
        if self.closure not in ("dirichlet", "periodic"):
            raise ValueError(f"unknown closure {self.closure!r}")
        if self.closure == "dirichlet" and self.sides is None:
            raise ValueError("dirichlet closure needs a sides(x, y) function")

    @classmethod
    def from_exact(cls, exact: Callable) -> "BoundaryData":
        """All four boundaries sampled from a known solution."""
        return cls(bottom=lambda x: exact(x, np.zeros_like(np.asarray(x, float))),
                   top=lambda x: exact(x, np.full_like(np.asarray(x, float), HEIGHT)),
                   closure="dirichlet",
                   sides=exact)

    @classmethod
    def zero(cls, closure: str = "dirichlet") -> "BoundaryData":
        z1 = lambda x: np.zeros_like(np.asarray(x, float))
        z2 = lambda x, y: np.zeros_like(np.asarray(x, float))
        return cls(bottom=z1, top=z1, closure=closure,
                   sides=z2 if closure == "dirichlet" else None)


@dataclass
class LinearSystem:
    """Assembled sparse system A u = b over the interior unknowns.

    The unknown layout is column major in x with y fastest, matching the
    node ordering used for serialization.
    """

    matrix: sp.csc_matrix
    rhs: np.ndarray
    grid: StripGrid
    params: PdeParams
    bc: BoundaryData
    scheme: str

    @property
    def interior_shape(self) -> tuple[int, int]:
        nxi = self.grid.nx - 2 if self.bc.closure == "dirichlet" else self.grid.nx - 1
        return (nxi, self.grid.ny)

    def full_field(self, interior: np.ndarray) -> ScalarField:
        """Embed the interior solution into a field with boundary values."""
        g = self.grid
        vals = np.zeros(g.shape)
        xs, ys = g.xs(), g.ys()
        nxi, nyi = self.interior_shape
        block = interior.reshape(nxi, nyi)
        if self.bc.closure == "dirichlet":
            vals[0, :] = self.bc.sides(np.full_like(ys, xs[0]), ys)
            vals[-1, :] = self.bc.sides(np.full_like(ys, xs[-1]), ys)
            vals[1:-1, 1:-1] = block
        else:
            vals[:-1, 1:-1] = block
            vals[-1, 1:-1] = block[0]
        vals[:, 0] = self.bc.bottom(xs)
        vals[:, -1] = self.bc.top(xs)
        return ScalarField(g, vals)


def _convection_coeffs(k: float, hx: float, scheme: str):
    """Contributions of +k u_x to (sub, diag, sup) of the negated operator."""
    if scheme == "central":
        return -k / (2 * hx), 0.0, k / (2 * hx)
    if scheme == "upwind":
        if k >= 0:
            return -k / hx, k / hx, 0.0
        return 0.0, -k / hx, k / hx
    raise ValueError(f"unknown scheme {scheme!r}")


def assemble(grid: StripGrid, params: PdeParams, bc: BoundaryData,
             forcing: Optional[Callable] = None,
             scheme: str = "central") -> LinearSystem:
    """Discretize  -(lap u - k u_x - lam u) = -f  with Dirichlet folding.

    The sign flip makes the matrix positive on the diagonal; under the cell
    constraint its off-diagonal entries are nonpositive.
    """
    hx, hy = grid.hx, grid.hy
    k, lam = params.k, params.lam
    if scheme == "central" and k != 0.0 and hx > 2.0 / abs(k):
        raise CellPecletError(
            f"hx = {hx:.6g} exceeds 2/|k| = {2.0 / abs(k):.6g}; "
            "refine nx or use scheme='upwind'")

    csub, cdiag, csup = _convection_coeffs(k, hx, scheme)
    w = 1.0 / hx**2
    sub, diag, sup = -w + csub, 2.0 * w + cdiag, -w + csup

    periodic = bc.closure == "periodic"
    nxi = grid.nx - 1 if periodic else grid.nx - 2
    nyi = grid.ny

    ox = np.ones(nxi)
    xop = sp.diags([sub * ox[:-1], diag * ox, sup * ox[:-1]], [-1, 0, 1],
                   format="lil")
    if periodic:
        xop[0, nxi - 1] = sub
        xop[nxi - 1, 0] = sup
    oy = np.ones(nyi)
    wy = 1.0 / hy**2
    yop = sp.diags([-wy * oy[:-1], 2.0 * wy * oy, -wy * oy[:-1]], [-1, 0, 1])

    A = (sp.kron(xop.tocsr(), sp.identity(nyi))
         + sp.kron(sp.identity(nxi), yop)
         + lam * sp.identity(nxi * nyi)).tocsc()

    xs, ys = grid.xs(), grid.ys()
    xi = xs[:-1] if periodic else xs[1:-1]
    yi = ys[1:-1]
    Xi, Yi = np.meshgrid(xi, yi, indexing="ij")
    b = (np.zeros((nxi, nyi)) if forcing is None
         else -np.asarray(forcing(Xi, Yi), dtype=float) * np.ones((nxi, nyi)))

    b[:, 0] += wy * np.asarray(bc.bottom(xi), dtype=float)
    b[:, -1] += wy * np.asarray(bc.top(xi), dtype=float)
    if not periodic:
        b[0, :] += -sub * np.asarray(bc.sides(np.full_like(yi, xs[0]), yi), dtype=float)
        b[-1, :] += -sup * np.asarray(bc.sides(np.full_like(yi, xs[-1]), yi), dtype=float)

    return LinearSystem(matrix=A, rhs=b.ravel(), grid=grid, params=params,
                        bc=bc, scheme=scheme)


def _lu_solve_refined(A: sp.csc_matrix, b: np.ndarray, tol: float):
    try:
        lu = splu(A, permc_spec=_PERMC)
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    x = lu.solve(b)
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("factorization produced non-finite values")
    target = tol * np.linalg.norm(b, np.inf)
    for _ in range(6):
        r = b - A @ x
        if np.linalg.norm(r, np.inf) <= target:
            return x
        x = x + lu.solve(r)
    if np.linalg.norm(b - A @ x, np.inf) <= target:
        return x
    raise NonConvergenceError(
        f"iterative refinement stalled above residual target {target:.3e}")


def solve(system: LinearSystem, tol: float = 1e-12) -> ScalarField:
    """Direct solve with iterative refinement; the returned field carries
    the Dirichlet boundary values on the full grid."""
    x = _lu_solve_refined(system.matrix, system.rhs, tol)
    return system.full_field(x)


def algebraic_residual(system: LinearSystem, field: ScalarField) -> float:
    """Relative infinity-norm residual of the assembled system."""
    nxi, nyi = system.interior_shape
    if system.bc.closure == "dirichlet":
        interior = field.values[1:-1, 1:-1].ravel()
    else:
        interior = field.values[:-1, 1:-1].ravel()
    r = np.linalg.norm(system.rhs - system.matrix @ interior, np.inf)
    denom = np.linalg.norm(system.rhs, np.inf)
    return float(r / denom) if denom > 0 else float(r)


def operator_residual(field: ScalarField, params: PdeParams,
                      forcing: Optional[Callable] = None) -> float:
    """Max over interior nodes of |FD(L)[field] - f|, central differences."""
    return float(np.max(np.abs(operator_residual_grid(field, params, forcing))))


def operator_residual_grid(field: ScalarField, params: PdeParams,
                           forcing: Optional[Callable] = None) -> np.ndarray:
    g, u = field.grid, field.values
    hx, hy = g.hx, g.hy
    res = ((u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / hx**2
           + (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / hy**2
           - params.k * (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * hx)
           - params.lam * u[1:-1, 1:-1])
    if forcing is not None:
        X, Y = g.nodes()
        res = res - forcing(X[1:-1, 1:-1], Y[1:-1, 1:-1])
    return res


def uniqueness_gap(grid: StripGrid, params: PdeParams, bc: BoundaryData,
                   forcing: Optional[Callable] = None,
                   variant: str = "ordering", seed: int = 7,
                   scheme: str = "central") -> float:
    """Max-norm disagreement between two solve configurations.

    ``ordering`` re-solves the same system under a random symmetric
    permutation of the unknowns; ``refinement`` compares against the
    solution on the half-spacing grid at shared nodes.  Small gaps are the
    discrete shadow of the uniqueness theory for the continuum problem.
    """
    if variant == "ordering":
        system = assemble(grid, params, bc, forcing, scheme)
        x1 = _lu_solve_refined(system.matrix, system.rhs, 1e-12)
        p = np.random.default_rng(seed).permutation(x1.size)
        Ap = system.matrix[p][:, p].tocsc()
        xp = _lu_solve_refined(Ap, system.rhs[p], 1e-12)
        x2 = np.empty_like(xp)
        x2[p] = xp
        return float(np.max(np.abs(x1 - x2)))
    if variant == "refinement":
        coarse = solve(assemble(grid, params, bc, forcing, scheme))
        fine = solve(assemble(grid.refined(), params, bc, forcing, scheme))
        return float(np.max(np.abs(coarse.values - fine.values[::2, ::2])))
    raise ValueError(f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# eigenvalue check


@dataclass(frozen=True)
class EigenResult:
    value: float
    iterations: int
    residual: float


def smallest_eigenpair(grid: StripGrid, resid_tol: float = 1e-8,
                       drift_tol: float = 1e-10,
                       max_iterations: int = 10000) -> EigenResult:
    """Smallest eigenvalue of the negated Dirichlet Laplacian on the grid,
    by inverse power iteration with shift zero from the all-ones vector."""
    system = assemble(grid, PdeParams(k=0.0, lam=0.0), BoundaryData.zero())
    A = system.matrix
    try:
        lu = splu(A, permc_spec=_PERMC)
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc

    v = np.ones(A.shape[0])
    v /= np.linalg.norm(v)
    mu_old = math.inf
    for it in range(1, max_iterations + 1):
        w = lu.solve(v)
        v = w / np.linalg.norm(w)
        Av = A @ v
        mu = float(v @ Av)
        resid = float(np.linalg.norm(Av - mu * v))
        if abs(mu - mu_old) <= drift_tol and resid <= resid_tol * abs(mu):
            return EigenResult(value=mu, iterations=it, residual=resid)
        mu_old = mu
    raise NonConvergenceError(
        f"inverse power iteration did not settle in {max_iterations} steps")


def min_eigenvalue(grid: StripGrid, **kwargs) -> float:
    return smallest_eigenpair(grid, **kwargs).value


def continuum_min_eigenvalue(grid: StripGrid) -> float:
    """Smallest Dirichlet eigenvalue of the continuum rectangle."""
    width = grid.x_max - grid.x_min
    return (math.pi / width) ** 2 + (math.pi / HEIGHT) ** 2


# ---------------------------------------------------------------------------
# convergence studies


@dataclass(frozen=True)
class ConvergenceResult:
    order: float
    spacings: tuple
    errors: tuple


def convergence_order(grid: StripGrid, params: PdeParams, exact: Callable,
                      forcing: Optional[Callable] = None, levels: int = 3,
                      scheme: str = "central",
                      closure: str = "dirichlet") -> ConvergenceResult:
    """Least-squares order of max-norm error against a known solution over
    nested half-spacing grids."""
    if levels < 2:
        raise ValueError("need at least two levels")
    if closure == "dirichlet":
        bc = BoundaryData.from_exact(exact)
    else:
        bc = BoundaryData(
            bottom=lambda x: exact(x, np.zeros_like(np.asarray(x, float))),
            top=lambda x: exact(x, np.full_like(np.asarray(x, float), HEIGHT)),
            closure="periodic")
    hs, errs = [], []
    g = grid
    for _ in range(levels):
        field = solve(assemble(g, params, bc, forcing, scheme))
        X, Y = g.nodes()
        errs.append(float(np.max(np.abs(field.values - exact(X, Y)))))
        hs.append(max(g.hx, g.hy))
        g = g.refined()
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    return ConvergenceResult(order=slope, spacings=tuple(hs), errors=tuple(errs))
