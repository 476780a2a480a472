"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 1 (bad configuration
or inputs that violate a contract), DataError -> 2 (unreadable or malformed
data files, missing stage inputs).
"""


class ValidationError(ValueError):
    """Input violates a documented invariant or precondition."""


class DataError(RuntimeError):
    """A data file is missing, truncated, or malformed."""


class ParseError(DataError):
    """A text file failed to parse; carries file and line context."""

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no
