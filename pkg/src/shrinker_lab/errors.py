"""Exception types shared by all modules."""


class ShrinkerLabError(Exception):
    """Base class for every error raised by the package."""


class InputError(ShrinkerLabError, ValueError):
    """Invalid arguments (bad parameter ranges, too few points, ...)."""


class DomainError(ShrinkerLabError, ValueError):
    """A point lies outside the domain of the metric (r <= 0, u <= 0, ...)."""


class GeometryError(ShrinkerLabError):
    """A curve violates a geometric precondition such as simplicity."""


class NotFoundError(ShrinkerLabError, LookupError):
    """A requested event occurrence does not exist on a trajectory."""


class SearchFailure(ShrinkerLabError):
    """A shooting or bisection search could not bracket or close a profile.

    Parameters
    ----------
    message : str
        Human readable reason.
    sweep : list of tuple, optional
        Diagnostic sweep table ``(parameter, value)`` collected while looking
        for a sign change.
    """

    def __init__(self, message, sweep=None):
        super().__init__(message)
        self.sweep = list(sweep) if sweep is not None else []


class StepRejected(ShrinkerLabError):
    """A flow step produced an invalid curve; the caller should reduce dt."""


class FlowStalled(ShrinkerLabError):
    """Repeated step rejections drove the time step below its floor."""
