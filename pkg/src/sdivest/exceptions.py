"""Exception types raised across the package."""


class SdivestError(Exception):
    """Base class for all package-specific errors."""


class EmptyCellUndefinedError(SdivestError):
    """The requested divergence is undefined because the data contain an
    empty cell and the data-side exponent is non-positive."""

    def __init__(self, alpha, lam, data_exp, message=None):
        self.alpha = alpha
        self.lam = lam
        self.data_exp = data_exp
        if message is None:
            message = (
                f"divergence undefined with empty cells: alpha={alpha}, "
                f"lambda={lam} gives data exponent {data_exp} <= 0"
            )
        super().__init__(message)


class DatasetParseError(SdivestError):
    """A dataset file failed to parse; carries file and line context."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + loc)


class DuplicateSupportPointError(DatasetParseError):
    """The same support point appears more than once in a dataset file."""


class NonPositiveCountError(DatasetParseError):
    """A dataset record carries a zero or negative count."""


class AllReplicatesFailedError(SdivestError):
    """Every replicate of a Monte-Carlo cell failed; no MSE can be formed."""


class MissingCellsError(SdivestError, KeyError):
    """A surface lookup referenced cells that were never simulated."""


class SingularInformationError(SdivestError):
    """The information matrix is numerically singular; no sandwich variance."""
