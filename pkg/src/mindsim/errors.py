"""Exception types shared across the package."""


class MindsimError(Exception):
    """Base class for all package errors."""


class StructuralError(MindsimError):
    """A model description or input does not match the declared structure."""


class StabilityError(MindsimError):
    """A parameter set violates the stability condition on the weight matrix."""


class DataError(MindsimError):
    """Recorded or loaded data is malformed or insufficient."""


class NumericalError(MindsimError):
    """An optimization or prediction failed numerically."""


class ChannelOverflowWarning(UserWarning):
    """A reasoning channel output exceeded its declared bound and was saturated."""
