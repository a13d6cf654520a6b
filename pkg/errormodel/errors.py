class ErrorModelError(Exception):
    """Base class for every error raised by the toolkit"""


class DatasetError(ErrorModelError, ValueError):
    """A measurement file or series that cannot be used"""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class EmptyDatasetError(DatasetError):
    pass


class MissingReferenceError(DatasetError):
    pass


class SingularMatrixError(ErrorModelError, ArithmeticError):
    """Normal equations that cannot be solved at working precision"""

    def __init__(self, message, pivot, hint=None):
        if hint:
            message = f"{message} ({hint})"
        super().__init__(message)
        self.pivot = pivot
        self.hint = hint


class InsufficientDataError(ErrorModelError, ValueError):
    pass


class ConfigurationError(ErrorModelError, ValueError):
    """Invalid scenario, budget or simulation setup.

    ``pointer`` is a JSON pointer into the offending document, when known.
    """

    def __init__(self, message, pointer=None):
        if pointer is not None:
            message = f"{pointer}: {message}"
        super().__init__(message)
        self.pointer = pointer


class UnitError(ConfigurationError):

    def __init__(self, message, component, pointer=None):
        super().__init__(f"component '{component}': {message}", pointer=pointer)
        self.component = component
