"""Closed-form solution families of  lap(u) - k u_x - lam u = 0  on the strip.

Three families are provided:

* the decaying traveling wave  B0 exp(-alpha y) sin(x/wavelength + b y),
  whose (alpha, b) pair is pinned by an algebraic dispersion relation;
* exponential-in-x separation modes  (A e^{r+ x} + B e^{r- x}) sin(l y),
  which solve the homogeneous lam = 0 equation but grow as |x| -> oo;
* the gauge change u = v e^{a x} that turns the eigenvalue equation
  lap(v) = lam v into a drift equation with k' = 2a and lam' = lam - a^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


def dispersion(k: float, lam: float = 0.0, wavelength: float = 1.0) -> tuple[float, float]:
    """Decay rate and phase tilt of the traveling wave.

    Solves  alpha^2 - b^2 = 1/wavelength^2 + lam  and
    2 alpha b = -k/wavelength  on the branch with alpha > 0, so the wave
    decays upward.  Closed form: alpha^2 is the positive root of a
    biquadratic, and then b follows from the product constraint.
    """
    if not wavelength > 0.0:
        raise ValueError(f"wavelength must be > 0, got {wavelength}")
    if not lam >= 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    s = 1.0 / wavelength**2 + lam
    alpha = math.sqrt(0.5 * (s + math.hypot(s, k / wavelength)))
    b = -k / (2.0 * alpha * wavelength)
    return alpha, b


@dataclass(frozen=True)
class TravelingWave:
    """B0 exp(-alpha y) sin(x/wavelength + b y), built for a specific (k, lam)."""

    B0: float
    wavelength: float
    alpha: float
    b: float
    lam: float
    k: float

    @classmethod
    def for_params(cls, k: float, lam: float = 0.0, wavelength: float = 1.0,
                   B0: float = 1.0) -> "TravelingWave":
        alpha, b = dispersion(k, lam, wavelength)
        return cls(B0=B0, wavelength=wavelength, alpha=alpha, b=b, lam=lam, k=k)

    def phase(self, x, y):
        return x / self.wavelength + self.b * y

    def value(self, x, y):
        return self.B0 * np.exp(-self.alpha * np.asarray(y)) * np.sin(self.phase(x, y))

    def gradient(self, x, y):
        th = self.phase(x, y)
        damp = self.B0 * np.exp(-self.alpha * np.asarray(y))
        ux = damp * np.cos(th) / self.wavelength
        uy = damp * (self.b * np.cos(th) - self.alpha * np.sin(th))
        return ux, uy


def traveling_wave(k: float, lam: float = 0.0, wavelength: float = 1.0,
                   B0: float = 1.0) -> TravelingWave:
    return TravelingWave.for_params(k, lam, wavelength, B0)


def separation_exponents(k: float, l: int) -> tuple[float, float]:
    """Roots r of r^2 - k r - l^2 = 0, returned as (larger, smaller).

    The mode (A e^{r+ x} + B e^{r- x}) sin(l y) then annihilates
    lap - k d_x.  The root product is exactly -l^2 and the sum is k.
    """
    if l < 1:
        raise ValueError(f"mode index must be a positive integer, got {l}")
    disc = math.hypot(k, 2.0 * l)
    return (k + disc) / 2.0, (k - disc) / 2.0


@dataclass(frozen=True)
class SeparationMode:
    """(A e^{rplus x} + B e^{rminus x}) sin(l y); solves the lam = 0 equation."""

    l: int
    A: float
    B: float
    k: float
    rplus: float
    rminus: float

    @classmethod
    def for_params(cls, k: float, l: int, A: float = 0.0, B: float = 1.0) -> "SeparationMode":
        rp, rm = separation_exponents(k, l)
        return cls(l=l, A=A, B=B, k=k, rplus=rp, rminus=rm)

    def profile(self, x):
        return self.A * np.exp(self.rplus * np.asarray(x)) + self.B * np.exp(self.rminus * np.asarray(x))

    def value(self, x, y):
        return self.profile(x) * np.sin(self.l * np.asarray(y))

    def gradient(self, x, y):
        x = np.asarray(x)
        dprof = (self.A * self.rplus * np.exp(self.rplus * x)
                 + self.B * self.rminus * np.exp(self.rminus * x))
        return dprof * np.sin(self.l * np.asarray(y)), self.profile(x) * self.l * np.cos(self.l * np.asarray(y))


class GaugeShift(NamedTuple):
    k: float
    lam: float
    admissible: bool


def gauge_shift(a: float, lam: float) -> GaugeShift:
    """Drift coefficients produced by multiplying an eigenfunction by e^{a x}.

    If lap(v) = lam v then v e^{a x} solves the equation with k' = 2a and
    lam' = lam - a^2.  The shifted lam' is nonnegative only for
    |a| <= sqrt(lam); outside that interval the result is flagged, and
    PdeParams will refuse it.
    """
    if not lam >= 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    shifted = lam - a * a
    return GaugeShift(k=2.0 * a, lam=shifted, admissible=shifted >= 0.0)
