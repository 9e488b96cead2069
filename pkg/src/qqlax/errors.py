"""Exception types shared across the library."""


class QQLaxError(Exception):
    """Base class for all library errors."""


class DomainError(QQLaxError):
    """Parameter outside the allowed domain (|nome| >= 1, z = 0, ...)."""


class PoleError(QQLaxError):
    """Evaluation landed on (or too close to) a zero of theta."""


class PoleAtWeight(PoleError):
    """The plethystic kernel vanishes at one of the character weights."""

    def __init__(self, weight, value):
        self.weight = weight
        self.value = value
        super().__init__(f"theta kernel ~ {value:.3e} at weight {weight}")


class NonGenericX(QQLaxError):
    """Probe point x sits too close to a pole locus of the observable."""


class DegeneratePoint(QQLaxError):
    """Phase-space point violates x_w != 0 / distinct-ratio requirements."""


class ChamberError(QQLaxError):
    """Point is outside the stability chamber |q_w| < 1."""


class ChamberExit(QQLaxError):
    """A flow trajectory left the stability chamber."""


class WindowOverflow(QQLaxError):
    """Shift-operator window clipped a non-negligible amount of mass."""


class ConvergenceWarning(QQLaxError):
    """Truncated product/sum tail above the requested tolerance."""


class NotZIndependent(QQLaxError):
    """Trigonometric matrix limit changed across z probes."""


class PoleInResidual(QQLaxError):
    """Bethe residual hit a zero of a denominator Q."""


class SingularWindow(QQLaxError):
    """A diagonal entry of a spin Lax window vanished."""


class MapNotApplicable(QQLaxError):
    """Triple (mu, nu, n) outside the domain mu_1 - n >= nu_1."""


class InvalidData(QQLaxError):
    """Inconsistent combinatorial data (failed monotonicity etc.)."""


class ConfigError(QQLaxError):
    """Bad suite configuration (exit code 2 in the CLI)."""


class InternalError(QQLaxError):
    """Module precondition violated while running a suite (exit code 3)."""
