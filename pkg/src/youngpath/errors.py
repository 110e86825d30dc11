"""Exception types shared across the library."""


class YoungPathError(Exception):
    """Base class for all library errors."""


class CertificateError(YoungPathError):
    """An integrability certificate required by the solver theory failed."""


class NonIntegrableError(YoungPathError):
    """A quadrature was detected to diverge under grid refinement."""


class DivergenceError(YoungPathError):
    """A numerical iteration produced non-finite state."""


class LadderResolutionError(YoungPathError):
    """The grid is too coarse to resolve the dyadic stopping-time ladder."""
