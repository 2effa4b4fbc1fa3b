"""Exception types shared across the package."""


class RotorlabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(RotorlabError, ValueError):
    """A run configuration is invalid; the message names the offending field."""


class UnderResolvedError(RotorlabError, RuntimeError):
    """Momentum-basis tail population exceeded the resolution tolerance.

    Raised when the guard band near the basis edge accumulates more than
    ``TAIL_TOL`` probability, i.e. the truncated basis can no longer
    represent the state faithfully.
    """

    def __init__(self, message: str, *, kick: int | None = None,
                 tail: float | None = None, n_max: int | None = None):
        super().__init__(message)
        self.kick = kick
        self.tail = tail
        self.n_max = n_max


class OutsideIslandError(RotorlabError, ValueError):
    """Ensemble halfwidth exceeds the resonance-island halfwidth, so the
    harmonic approximation behind the ensemble revival formula is invalid."""


class NonIntegrableError(RotorlabError, RuntimeError):
    """Smoothing a singular analytic curve did not converge under grid
    refinement (or was attempted on non-finite samples without a cap)."""


class ValidityWarning(UserWarning):
    """An analytic formula is being evaluated outside its stated asymptotic
    regime; results are still returned."""
