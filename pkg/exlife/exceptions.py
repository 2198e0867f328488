"""Exceptions"""


class ExLifeError(Exception):
    """Base exception for exlife"""


class ExirError(ExLifeError):
    """Exception base for EXIR input errors

    :param message: what is wrong with the input
    :param line: 1-based line number, 0 when unknown
    :param column: 1-based column number, 0 when unknown
    :param source: file name or ``<string>``
    """

    def __init__(
        self,
        message: str,
        line: int = 0,
        column: int = 0,
        source: str = "<string>",
    ) -> None:
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


class ExirSyntaxError(ExirError):
    """Exception raised when EXIR text does not follow the grammar"""


class DuplicateMethodError(ExirError):
    """Exception raised when a method signature is declared twice"""


class UnresolvedLabelError(ExirError):
    """Exception raised for a jump to a missing or repeated label"""


class AmbiguousCallError(ExirError):
    """Exception raised when a direct call matches several overloads"""


class ReportFormatError(ExLifeError):
    """Exception raised when a JSON report does not follow its schema"""


class ModeMismatchError(ReportFormatError):
    """Exception raised when reports of different analysis modes are combined"""


class VersionSequenceError(ExLifeError):
    """Exception raised when change reports are not consecutive"""


class ConfigError(ExLifeError):
    """Exception raised when a run configuration value is out of range"""
