"""Exception types shared across the package."""


class ScheduleDomainError(ValueError):
    """Evaluation time outside the schedule's [0, T] domain."""


class DegenerateSpectrumError(ValueError):
    """Instantaneous gap too small for a well-defined eigenframe."""


class DegenerateInputError(ValueError):
    """Phase convention undefined for the given half-time coefficients."""


class InvalidStateError(ValueError):
    """State vector violates a normalization precondition."""


class SymmetryError(ValueError):
    """Schedule does not satisfy the required mirror symmetry."""


class EdgeRegimeError(ValueError):
    """Localization factor outside the topological regime |eta| < 1."""


class ConvergenceError(RuntimeError):
    """Step-count refinement failed to converge within the ceiling."""


class TransitionDetectionError(RuntimeError):
    """No qualifying transition dip found in the occupation derivative."""
