"""Discretization, direct solve, uniqueness checks, eigenvalue iteration."""

import math

import numpy as np
import pytest
import scipy.sparse as sp

from striplev.analytic import SeparationMode, TravelingWave
from striplev.barrier import BarrierSpec, barrier_value
from striplev.core import HEIGHT, PdeParams, StripGrid, sample
from striplev.errors import (CellPecletError, NonConvergenceError,
                             SingularSystemError)
from striplev.fdsolver import (BoundaryData, LinearSystem, algebraic_residual,
                               assemble, continuum_min_eigenvalue,
                               convergence_order, min_eigenvalue,
                               operator_residual, smallest_eigenpair, solve,
                               uniqueness_gap)


def zero_bc():
    return BoundaryData.zero()


# ---------------------------------------------------------------------------
# assembly


def test_pure_laplace_matrix_symmetric():
    g = StripGrid(0.0, 1.0, 7, 5)
    system = assemble(g, PdeParams(k=0.0, lam=0.0), zero_bc())
    A = system.matrix
    assert (A != A.T).nnz == 0


def test_lambda_adds_to_diagonal_only():
    g = StripGrid(0.0, 1.0, 7, 5)
    a0 = assemble(g, PdeParams(k=1.0, lam=0.0), zero_bc()).matrix
    a1 = assemble(g, PdeParams(k=1.0, lam=1.0), zero_bc()).matrix
    diff = (a1 - a0).toarray()
    assert np.allclose(diff, np.eye(diff.shape[0]))


def test_cell_peclet_guard():
    g = StripGrid(0.0, 6.0, 5, 4)  # hx = 1.5 > 2/k = 1
    with pytest.raises(CellPecletError, match="upwind"):
        assemble(g, PdeParams(k=2.0, lam=0.0), zero_bc())
    # upwind accepts the same mesh
    assemble(g, PdeParams(k=2.0, lam=0.0), zero_bc(), scheme="upwind")


def test_m_matrix_under_guard():
    g = StripGrid(0.0, 2.0, 17, 9)
    for scheme in ("central", "upwind"):
        for k in (0.0, 1.5, -1.5):
            A = assemble(g, PdeParams(k=k, lam=0.5), zero_bc(),
                         scheme=scheme).matrix.tocoo()
            off = A.data[A.row != A.col]
            diag = A.diagonal()
            assert np.all(off <= 0.0)
            assert np.all(diag > 0.0)
            rowsums = np.asarray(A.sum(axis=1)).ravel()
            assert np.all(rowsums >= -1e-9)


# ---------------------------------------------------------------------------
# solving


def test_zero_data_gives_zero_field():
    g = StripGrid(-1.0, 1.0, 17, 9)
    fld = solve(assemble(g, PdeParams(k=1.0, lam=0.5), zero_bc()))
    assert np.max(np.abs(fld.values)) <= 1e-12


def test_manufactured_sine_profile():
    """u = sin y with lam = 1 needs forcing -2 sin y; the error is pure
    y-discretization and halves at second order."""
    params = PdeParams(k=0.0, lam=1.0)
    exact = lambda x, y: np.sin(y) + 0.0 * x
    forcing = lambda x, y: -2.0 * np.sin(y) + 0.0 * x
    errs = []
    g = StripGrid(0.0, 1.0, 9, 15)
    for _ in range(2):
        bc = BoundaryData.from_exact(exact)
        fld = solve(assemble(g, params, bc, forcing))
        X, Y = g.nodes()
        errs.append(np.max(np.abs(fld.values - exact(X, Y))))
        g = g.refined()
    assert errs[0] < 2e-3
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_traveling_wave_dirichlet_solve():
    wave = TravelingWave.for_params(2.0, 0.0, 1.0)
    g = StripGrid(-math.pi, math.pi, 65, 31)
    system = assemble(g, PdeParams(k=2.0, lam=0.0),
                      BoundaryData.from_exact(wave.value))
    fld = solve(system)
    assert algebraic_residual(system, fld) <= 1e-12
    X, Y = g.nodes()
    assert np.max(np.abs(fld.values - wave.value(X, Y))) < 5e-3


def test_periodic_closure_matches_wave():
    # window is exactly one period of the wave in x
    wave = TravelingWave.for_params(1.0, 0.0, 1.0)
    g = StripGrid(-math.pi, math.pi, 64, 31)
    bc = BoundaryData(
        bottom=lambda x: wave.value(x, np.zeros_like(np.asarray(x, float))),
        top=lambda x: wave.value(x, np.full_like(np.asarray(x, float), HEIGHT)),
        closure="periodic")
    fld = solve(assemble(g, PdeParams(k=1.0, lam=0.0), bc))
    X, Y = g.nodes()
    assert np.max(np.abs(fld.values - wave.value(X, Y))) < 5e-3


def test_linearity_of_solve():
    g = StripGrid(0.0, 2.0, 21, 11)
    params = PdeParams(k=1.0, lam=1.0)
    bc1 = BoundaryData.from_exact(lambda x, y: np.sin(x) * np.cosh(y))
    bc2 = BoundaryData.from_exact(lambda x, y: np.cos(2 * x) + y)
    f1 = lambda x, y: np.exp(-x) * y
    f2 = lambda x, y: x * 0.0 - 1.0
    a, b = 0.7, -1.3
    u1 = solve(assemble(g, params, bc1, f1)).values
    u2 = solve(assemble(g, params, bc2, f2)).values
    bc3 = BoundaryData(
        bottom=lambda x: a * bc1.bottom(x) + b * bc2.bottom(x),
        top=lambda x: a * bc1.top(x) + b * bc2.top(x),
        closure="dirichlet",
        sides=lambda x, y: a * bc1.sides(x, y) + b * bc2.sides(x, y))
    f3 = lambda x, y: a * f1(x, y) + b * f2(x, y)
    u3 = solve(assemble(g, params, bc3, f3)).values
    scale = np.max(np.abs(u3))
    assert np.max(np.abs(u3 - (a * u1 + b * u2))) <= 1e-11 * scale


def test_singular_system_error():
    A = sp.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
    system = LinearSystem(matrix=A, rhs=np.array([1.0, 0.0]),
                          grid=StripGrid(0, 1, 3, 3),
                          params=PdeParams(k=0.0, lam=0.0),
                          bc=zero_bc(), scheme="central")
    with pytest.raises((SingularSystemError, NonConvergenceError)):
        solve(system)


# ---------------------------------------------------------------------------
# operator residual


def test_operator_residual_zero_field():
    g = StripGrid(0.0, 1.0, 9, 7)
    fld = sample(g, lambda x, y: 0.0 * x)
    assert operator_residual(fld, PdeParams(k=1.0, lam=1.0)) == 0.0


@pytest.mark.parametrize("k,lam", [(0.0, 0.0), (2.0, 1.0)])
def test_operator_residual_wave_second_order(k, lam):
    wave = TravelingWave.for_params(k, lam, 1.0)
    params = PdeParams(k=k, lam=lam)
    g = StripGrid(-1.0, 1.0, 33, 31)
    r1 = operator_residual(sample(g, wave.value), params)
    r2 = operator_residual(sample(g.refined(), wave.value), params)
    assert 3.5 <= r1 / r2 <= 4.5


def test_operator_residual_with_forcing():
    g = StripGrid(0.0, 1.0, 17, 15)
    exact = lambda x, y: np.sin(y) + 0.0 * x
    forcing = lambda x, y: -2.0 * np.sin(y) + 0.0 * x
    r = operator_residual(sample(g, exact), PdeParams(k=0.0, lam=1.0), forcing)
    assert r < 5e-3


# ---------------------------------------------------------------------------
# uniqueness


def test_uniqueness_zero_data():
    g = StripGrid(-1.0, 1.0, 17, 9)
    gap = uniqueness_gap(g, PdeParams(k=1.0, lam=0.0), zero_bc(),
                         variant="ordering")
    assert gap <= 1e-12


def test_uniqueness_ordering_variant():
    wave = TravelingWave.for_params(2.0, 0.0, 1.0)
    g = StripGrid(-2.0, 2.0, 33, 17)
    gap = uniqueness_gap(g, PdeParams(k=2.0, lam=0.0),
                         BoundaryData.from_exact(wave.value),
                         variant="ordering")
    assert gap <= 1e-10


def test_uniqueness_refinement_variant():
    wave = TravelingWave.for_params(2.0, 0.0, 1.0)
    g = StripGrid(-2.0, 2.0, 33, 17)
    params = PdeParams(k=2.0, lam=0.0)
    bc = BoundaryData.from_exact(wave.value)
    gap = uniqueness_gap(g, params, bc, variant="refinement")
    # the gap is bounded by twice the coarse-level truncation error
    X, Y = g.nodes()
    coarse_err = np.max(np.abs(
        solve(assemble(g, params, bc)).values - wave.value(X, Y)))
    assert gap <= 2.0 * coarse_err


def test_exponential_mode_agreement_on_window():
    """Boundary data from an exponentially growing mode still produces a
    bounded discrete solution agreeing with the mode; nonuniqueness only
    lives in the unbounded limit."""
    mode = SeparationMode.for_params(1.0, l=1, A=0.4, B=0.6)
    g = StripGrid(-1.5, 1.5, 33, 17)
    params = PdeParams(k=1.0, lam=0.0)
    fld = solve(assemble(g, params, BoundaryData.from_exact(mode.value)))
    X, Y = g.nodes()
    err1 = np.max(np.abs(fld.values - mode.value(X, Y)))
    fld2 = solve(assemble(g.refined(), params,
                          BoundaryData.from_exact(mode.value)))
    X2, Y2 = g.refined().nodes()
    err2 = np.max(np.abs(fld2.values - mode.value(X2, Y2)))
    assert 3.0 <= err1 / err2 <= 5.0


# ---------------------------------------------------------------------------
# discrete maximum principle and the comparison bound


def test_discrete_maximum_principle_random_battery():
    rng = np.random.default_rng(99)
    for _ in range(10):
        nx, ny = int(rng.integers(9, 21)), int(rng.integers(7, 15))
        g = StripGrid(-1.0, rng.uniform(1.0, 3.0), nx, ny)
        kmax = min(3.0, 0.9 * 2.0 / g.hx)
        params = PdeParams(k=rng.uniform(-kmax, kmax), lam=rng.uniform(0, 4))
        a, b = rng.uniform(0, 1, 2)
        bc = BoundaryData(
            bottom=lambda x, a=a: (a + 0.5 * np.sin(x)) ** 2,
            top=lambda x, b=b: (b + 0.3 * np.cos(x)) ** 2,
            closure="dirichlet",
            sides=lambda x, y: 0.2 + 0.0 * x)
        forcing = lambda x, y: -(1.0 + np.cos(x) ** 2)
        fld = solve(assemble(g, params, bc, forcing))
        assert np.min(fld.values) >= -1e-12


def test_solution_dominates_scaled_barrier():
    """Homogeneous solve whose side data dips negative: the solution stays
    above (min boundary dip) * barrier at shared nodes, the discrete analog
    of the comparison argument."""
    radius = 6.0
    g = StripGrid(-radius, radius, 49, 23)
    params = PdeParams(k=1.0, lam=0.0)
    bc = BoundaryData(
        bottom=lambda x: 0.0 * x, top=lambda x: 0.0 * x,
        closure="dirichlet", sides=lambda x, y: -np.sin(y))
    fld = solve(assemble(g, params, bc))
    spec = BarrierSpec(k=1.0, lam=0.0, radius=radius,
                       corner_exclusion=radius * 1e-3)
    X, Y = g.nodes()
    inside = (np.hypot(X, Y) < radius - 0.2) & (Y > 0) & (Y < HEIGHT)
    # sigma: the most negative value near the circle of the given radius
    ring = (np.hypot(X, Y) >= radius - 0.45) & (Y > 0) & (Y < HEIGHT)
    sigma = min(0.0, float(np.min(fld.values[ring])))
    lower = sigma * barrier_value(spec, X[inside], Y[inside])
    assert np.all(fld.values[inside] >= lower - 1e-6)


# ---------------------------------------------------------------------------
# eigenvalue


def discrete_rectangle_eigenvalue(grid: StripGrid) -> float:
    """Closed-form smallest eigenvalue of the discrete Dirichlet Laplacian
    on the rectangle (independent of the iteration under test)."""
    width = grid.x_max - grid.x_min
    ex = (4.0 / grid.hx**2) * math.sin(math.pi * grid.hx / (2.0 * width)) ** 2
    ey = (4.0 / grid.hy**2) * math.sin(grid.hy / 2.0) ** 2
    return ex + ey


def test_min_eigenvalue_matches_discrete_closed_form():
    g = StripGrid(-math.pi, math.pi, 65, 31)
    pair = smallest_eigenpair(g)
    assert pair.value == pytest.approx(discrete_rectangle_eigenvalue(g), rel=1e-8)
    assert pair.residual <= 1e-8 * pair.value
    assert abs(pair.value - 1.25) < 5 * max(g.hx, g.hy) ** 2


def test_min_eigenvalue_monotone_in_width():
    ny = 31
    vals = []
    for extent, nx in ((math.pi, 65), (2 * math.pi, 129), (4 * math.pi, 257)):
        g = StripGrid(-extent, extent, nx, ny)
        vals.append(min_eigenvalue(g))
        assert abs(continuum_min_eigenvalue(g)
                   - (1.0 + (math.pi / (2 * extent)) ** 2)) < 1e-12
    assert vals[0] > vals[1] > vals[2] > 0.0


def test_min_eigenvalue_positive_small_grid():
    assert min_eigenvalue(StripGrid(0.0, 1.0, 5, 4)) > 0.0


def test_eigen_iteration_budget():
    with pytest.raises(NonConvergenceError):
        smallest_eigenpair(StripGrid(-math.pi, math.pi, 33, 15),
                           max_iterations=1)


# ---------------------------------------------------------------------------
# convergence order


def test_convergence_order_wave_k0():
    wave = TravelingWave.for_params(0.0, 0.0, 1.0)
    res = convergence_order(StripGrid(-math.pi, math.pi, 33, 15),
                            PdeParams(k=0.0, lam=0.0), wave.value, levels=3)
    assert 1.9 <= res.order <= 2.1


def test_convergence_order_wave_k2_central():
    wave = TravelingWave.for_params(2.0, 0.0, 1.0)
    res = convergence_order(StripGrid(-math.pi, math.pi, 33, 15),
                            PdeParams(k=2.0, lam=0.0), wave.value, levels=3)
    assert 1.9 <= res.order <= 2.1


def test_convergence_order_upwind_first_order():
    wave = TravelingWave.for_params(2.0, 0.0, 1.0)
    res = convergence_order(StripGrid(-math.pi, math.pi, 33, 15),
                            PdeParams(k=2.0, lam=0.0), wave.value, levels=3,
                            scheme="upwind")
    assert 0.9 <= res.order <= 1.1
