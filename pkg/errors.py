class TensorLshError(Exception):
    """Base class for every error raised by this project."""


class DimensionError(TensorLshError, ValueError):
    """Shapes disagree, or factors/cores do not match the declared shape."""


class CapacityError(TensorLshError):
    """The element count of a shape cannot be addressed or materialized."""


class TensorFormatError(TensorLshError):
    """A tensor file is truncated, has a bad magic or an unknown format tag."""


class ParameterError(TensorLshError, ValueError):
    """A precondition on a numeric parameter does not hold."""


class UsageError(TensorLshError):
    """The command line was used in a way no command accepts."""
