"""Exception hierarchy shared by every module."""


class ConvalgError(Exception):
    """Base class for all library errors."""


class DomainError(ConvalgError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(ConvalgError, ValueError):
    """A requested value lies outside the tabulated or resampled range."""


class GridMismatchError(ConvalgError, ValueError):
    """Two grid functions on different grids were combined."""


class ResolutionError(ConvalgError, ValueError):
    """The grid is too coarse to represent the requested object."""


class ParameterError(ConvalgError, ValueError):
    """Parameters violate an operation's precondition."""


class ConfigError(ConvalgError):
    """An experiment config is malformed or references unknown names."""
