"""striplev: numerical verification lab for the convection-diffusion strip
equation behind magnetostatic levitation.

Subpackages cover closed-form solution families, a finite-difference solver
with uniqueness and convergence checks, a machine certificate for the
comparison-function argument, the conformal transfer to the weighted
half-plane equation, stream-function duality, and field/force-proxy
reconstruction, all driven by one CLI.
"""

__version__ = "0.1.0"

from .core import (HalfPlaneGrid, MaglevParams, PdeParams, ScalarField,
                   StripGrid, VectorField, build_strip_grid, sample)

__all__ = [
    "HalfPlaneGrid", "MaglevParams", "PdeParams", "ScalarField",
    "StripGrid", "VectorField", "build_strip_grid", "sample", "__version__",
]
