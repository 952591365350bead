class CylflowError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CylflowError, ValueError):
    """Invalid grid, run, or experiment parameters.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class ParityError(CylflowError, ValueError):
    pass


class NumericalInputError(CylflowError, ValueError):
    pass


class BlowUpError(CylflowError, RuntimeError):
    """Non-finite values appeared during time stepping.

    ``state`` is the last finite state reached.
    """

    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)


class FitError(CylflowError, ValueError):
    pass


class UndefinedRatioError(CylflowError, ZeroDivisionError):
    pass


class SupportMarginWarning(UserWarning):
    """Solution support came within 10% of the axial period boundary."""
