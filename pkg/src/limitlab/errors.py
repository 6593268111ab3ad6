class LabError(Exception):
    """Base class for all errors raised by limitlab."""


class ParameterError(LabError, ValueError):
    """A family or measure parameter is outside its admissible range."""


class CapacityError(LabError, ValueError):
    """Exhaustive enumeration was requested beyond its configured bound."""


class DomainError(LabError, ValueError):
    """An uncertain interval leaves the domain of a monotone map."""
