"""Exception and warning types shared across the package."""


class InvalidBoundsError(ValueError):
    """Grid bounds or sizes violate a construction precondition."""


class NonFiniteValueError(ValueError):
    """A sampled field contains NaN or infinity; the message names the node."""


class SingularCornerError(ValueError):
    """Evaluation requested at (or too close to) a corner where the
    comparison function is discontinuous."""


class CellPecletError(ValueError):
    """Central convection differencing would break diagonal dominance;
    the mesh must satisfy hx <= 2/|k| or switch to upwind."""


class SingularSystemError(RuntimeError):
    """The assembled linear system has no usable factorization."""


class NonConvergenceError(RuntimeError):
    """An iterative procedure exhausted its iteration budget."""


class PunctureError(ValueError):
    """The inverse map was evaluated at the excluded origin."""


class PunctureProximityError(ValueError):
    """A stencil or path point falls inside the puncture exclusion disk."""


class PathThroughPunctureError(PunctureProximityError):
    """An integration segment crosses the puncture exclusion disk."""


class ConfigError(ValueError):
    """A run configuration failed validation (CLI exit code 2)."""


class QuadratureToleranceWarning(UserWarning):
    """Panel doubling stopped before reaching the requested tolerance."""


class AdmissibilityWarning(UserWarning):
    """The weight |x|^(-k) with k >= 2 is outside the admissible range of
    the weighted uniqueness theory; numerics proceed regardless."""
