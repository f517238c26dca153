"""Exception types shared across the package."""


class GeoforgeError(Exception):
    """Base class for all errors raised by geoforge."""


class DegreeMismatch(GeoforgeError, ValueError):
    pass


class ResourceLimitError(GeoforgeError):
    """A configured cap (degree, flag budget, edge budget) would be exceeded."""


class ParameterError(GeoforgeError, ValueError):
    """Construction parameters outside the admissible range."""


class NotAFlagError(GeoforgeError, ValueError):
    pass


class AttachmentError(GeoforgeError):
    """An attached group does not preserve types or incidence."""


class HypothesisError(GeoforgeError):
    """A structural precondition (transitivity, chamber, ...) does not hold."""
