"""Exception hierarchy shared by all modules."""


class GeoContactError(Exception):
    """Base class for every error raised by the package."""


class InvalidParameterError(GeoContactError, ValueError):
    pass


class DomainError(GeoContactError, ValueError):
    """A surface coordinate fell outside its chart's validity box."""


class DegenerateChartError(GeoContactError, ValueError):
    """The chart is singular (f_u x f_v vanishes) at the queried point."""


class SingularProfileError(GeoContactError, ValueError):
    """sigma(t) is too close to zero for sigma_dot / sigma to be finite."""


class IntegrationError(GeoContactError, RuntimeError):
    """Raised when a right-hand side fails or produces NaN during stepping."""

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time:.6g} s)")
        self.reason = message
        self.time = time


class ScenarioError(GeoContactError, ValueError):
    """Scenario file could not be parsed or failed validation."""

    def __init__(self, message, field=None):
        prefix = f"{field}: " if field else ""
        super().__init__(prefix + message)
        self.field = field
