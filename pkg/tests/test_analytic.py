"""Closed-form families: dispersion pair, separation modes, gauge shift.

Derived expectations are recomputed here by independent means (polynomial
root finding, finite differences) rather than trusted from the formulas
under test.
"""

import math

import numpy as np
import pytest

from striplev.analytic import (SeparationMode, TravelingWave, dispersion,
                               gauge_shift, separation_exponents,
                               traveling_wave)
from striplev.core import PdeParams, StripGrid, sample
from striplev.fdsolver import operator_residual, operator_residual_grid


def quartic_alpha_oracle(k, lam, wavelength):
    """alpha from the quartic a^4 - S a^2 - k^2/(4 L^2) = 0 via np.roots."""
    s = 1.0 / wavelength**2 + lam
    roots = np.roots([1.0, 0.0, -s, 0.0, -(k / wavelength) ** 2 / 4.0])
    real = [r.real for r in roots if abs(r.imag) < 1e-10 and r.real > 0]
    return max(real)


def test_dispersion_harmonic_decay():
    assert dispersion(0.0, 0.0, 1.0) == (1.0, 0.0)


def test_dispersion_zeroth_order_only():
    alpha, b = dispersion(0.0, 1.0, 1.0)
    assert b == 0.0
    assert alpha == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_dispersion_k2_against_root_oracle():
    alpha, b = dispersion(2.0, 0.0, 1.0)
    # independent root of alpha^4 - alpha^2 - 1 = 0
    assert alpha == pytest.approx(quartic_alpha_oracle(2.0, 0.0, 1.0), rel=1e-12)
    assert alpha == pytest.approx(1.272019649514069, rel=1e-12)
    assert b == pytest.approx(-0.7861513777574233, rel=1e-12)


def test_dispersion_branch_signs():
    rng = np.random.default_rng(11)
    for _ in range(40):
        k = rng.uniform(-6, 6)
        alpha, b = dispersion(k, rng.uniform(0, 4), rng.uniform(0.5, 2))
        assert alpha > 0
        assert np.sign(b) == -np.sign(k)


def test_dispersion_system_satisfied():
    rng = np.random.default_rng(12)
    for _ in range(40):
        k, lam, L = rng.uniform(-5, 5), rng.uniform(0, 4), rng.uniform(0.5, 2)
        alpha, b = dispersion(k, lam, L)
        assert alpha**2 - b**2 == pytest.approx(1.0 / L**2 + lam, rel=1e-12)
        assert 2 * alpha * b == pytest.approx(-k / L, rel=1e-12, abs=1e-13)


def test_dispersion_rejects_bad_inputs():
    with pytest.raises(ValueError):
        dispersion(1.0, -0.1, 1.0)
    with pytest.raises(ValueError):
        dispersion(1.0, 0.0, 0.0)


def test_wave_value_examples():
    w = traveling_wave(0.0, 0.0, 1.0, B0=2.5)
    assert w.value(0.0, 0.0) == 0.0
    assert float(w.value(math.pi / 2, 0.0)) == pytest.approx(2.5, rel=1e-15)

    w2 = traveling_wave(2.0, 0.0, 1.0)
    alpha = quartic_alpha_oracle(2.0, 0.0, 1.0)
    b = -2.0 / (2.0 * alpha)
    assert float(w2.value(1.0, 1.0)) == pytest.approx(
        math.exp(-alpha) * math.sin(1.0 + b), rel=1e-12)
    assert float(w2.value(1.0, 1.0)) == pytest.approx(0.0594785187444013, rel=1e-10)


def test_wave_residual_second_order_with_extrapolation():
    """Residual of the sampled wave drops by ~4x per refinement and the
    three-level combination extrapolates to zero.  The ratio window needs
    the asymptotic regime, so the grids match the acceptance sizes."""
    rng = np.random.default_rng(20260810)
    grids = [StripGrid(-math.pi, math.pi, nx, ny)
             for nx, ny in ((129, 63), (257, 127), (513, 255))]
    for _ in range(8):
        k, lam, L = rng.uniform(-5, 5), rng.uniform(0, 4), rng.uniform(0.5, 2)
        w = traveling_wave(k, lam, L)
        params = PdeParams(k=k, lam=lam)
        res = [operator_residual_grid(sample(g, w.value), params) for g in grids]
        maxes = [float(np.max(np.abs(r))) for r in res]
        assert 3.5 <= maxes[0] / maxes[1] <= 4.5
        assert 3.5 <= maxes[1] / maxes[2] <= 4.5
        # combine values at shared nodes to kill the h^2 and h^4 terms
        shared = (res[0], res[1][1::2, 1::2], res[2][3::4, 3::4])
        extrap = np.max(np.abs((64 * shared[2] - 20 * shared[1] + shared[0]) / 45))
        assert extrap < 1e-9


def test_wave_gradient_matches_fd():
    w = traveling_wave(2.0, 1.0, 0.8)
    s = 1e-6
    for (x, y) in [(0.3, 0.5), (-1.0, 2.0), (2.0, 0.1)]:
        ux, uy = w.gradient(x, y)
        assert float(ux) == pytest.approx(
            float(w.value(x + s, y) - w.value(x - s, y)) / (2 * s), abs=1e-8)
        assert float(uy) == pytest.approx(
            float(w.value(x, y + s) - w.value(x, y - s)) / (2 * s), abs=1e-8)


def test_separation_exponents_examples():
    assert separation_exponents(0.0, 1) == (1.0, -1.0)
    assert separation_exponents(3.0, 2) == (4.0, -1.0)  # sqrt(9 + 16) = 5


def test_separation_vieta_identities():
    rng = np.random.default_rng(13)
    for _ in range(50):
        k = rng.uniform(-8, 8)
        l = int(rng.integers(1, 7))
        rp, rm = separation_exponents(k, l)
        assert rp >= rm
        assert rp + rm == pytest.approx(k, rel=1e-14, abs=1e-14)
        assert rp * rm == pytest.approx(-float(l * l), rel=1e-14)


def test_separation_mode_rejects_bad_index():
    with pytest.raises(ValueError):
        separation_exponents(1.0, 0)


def test_separation_mode_fd_residual():
    mode = SeparationMode.for_params(3.0, l=2, A=0.0, B=1.0)
    params = PdeParams(k=3.0, lam=0.0)
    g1 = StripGrid(-1.0, 1.0, 41, 31)
    r1 = operator_residual(sample(g1, mode.value), params)
    r2 = operator_residual(sample(g1.refined(), mode.value), params)
    assert 3.5 <= r1 / r2 <= 4.5


def test_gauge_shift_examples():
    assert gauge_shift(0.0, 0.0) == (0.0, 0.0, True)
    assert gauge_shift(1.0, 1.0) == (2.0, 0.0, True)
    shifted = gauge_shift(2.0, 1.0)
    assert shifted.k == 4.0 and shifted.lam == -3.0
    assert not shifted.admissible


def test_gauge_shift_boundary_of_interval():
    # |a| = sqrt(lam) is still admissible (lam' = 0); exact in floats here
    g = gauge_shift(0.5, 0.25)
    assert g.admissible and g.lam == 0.0


def test_gauge_property_fd_residual():
    """v = sin(l y) e^{s x} solves lap v = (s^2 - l^2) v; multiplying by
    e^{a x} must solve the shifted equation for any a."""
    s_exp, l, a = 2.0, 1.0, 1.0
    lam = s_exp**2 - l**2  # = 3, nonnegative
    shift = gauge_shift(a, lam)
    assert shift.admissible
    params = PdeParams(k=shift.k, lam=shift.lam)
    u = lambda x, y: np.sin(l * y) * np.exp((s_exp + a) * x)
    g1 = StripGrid(-0.5, 0.5, 33, 33)
    r1 = operator_residual(sample(g1, u), params)
    r2 = operator_residual(sample(g1.refined(), u), params)
    assert 3.5 <= r1 / r2 <= 4.5


def test_wave_invariants_stored():
    w = TravelingWave.for_params(1.5, 0.5, 1.2)
    assert w.alpha**2 - w.b**2 == pytest.approx(1 / 1.2**2 + 0.5, rel=1e-12)
    assert 2 * w.alpha * w.b == pytest.approx(-1.5 / 1.2, rel=1e-12)
    assert w.k == 1.5 and w.lam == 0.5
