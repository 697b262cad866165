"""Exceptions shared across the package."""


class LogBranchError(ValueError):
    """Principal matrix logarithm is undefined: rotation angle too close to pi."""


class NonUniqueGeodesicError(ValueError):
    """Endpoints are antipodal (or at angle pi): the minimizing geodesic is not unique."""


class RegularityError(ValueError):
    """A derivative of higher order than the field/function carries was requested."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent."""
