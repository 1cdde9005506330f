"""Exception types shared across the package.

Two families matter to callers (and to the CLI exit-code contract):
data/format problems (bad files, ragged rows, unparseable cells) and
statistical degeneracy (zero-variance inputs, factorization failures).
"""


class HdcltError(Exception):
    """Base class for package-specific errors."""


class DataFormatError(HdcltError):
    """Input data is malformed: ragged CSV rows, unparseable cells, too few rows."""


class DegenerateDataError(HdcltError):
    """The input carries no usable signal (zero-variance column, zero residual
    variance, zero long-run variance on the diagonal)."""


class NumericalError(HdcltError):
    """A numerical routine failed beyond recovery (e.g. Cholesky still fails
    after the one permitted jitter retry)."""
