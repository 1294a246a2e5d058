"""
Error types raised by the library
"""


class DomainError(ValueError):
    """Input does not fit the mathematical objects it is used with"""


class FormulaSyntaxError(DomainError):
    """Positioned syntax error in formula text"""

    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class CapExceeded(RuntimeError):
    """An enumeration exceeded its configured cap"""


class InstabilityError(CapExceeded):
    """Truncated construction did not stabilise before its cap"""


EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CAP = 2


def exit_code_for(error):
    """Map an exception to the CLI exit code"""
    if isinstance(error, CapExceeded):
        return EXIT_CAP
    return EXIT_DOMAIN
