"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3, anything else exits 1.
"""


class DivclustError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DivclustError):
    """Invalid algorithm, kernel, or CLI configuration."""


class DataValidationError(DivclustError):
    """Input data violates a structural invariant (NaN/Inf, bad shape)."""


class ParseError(DataValidationError):
    """A delimited file could not be parsed.

    Carries 1-based ``row`` and optional ``col`` of the offending cell.
    """

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class ShapeError(DataValidationError):
    """Dimension mismatch between related arrays."""


class ZeroVarianceError(DivclustError):
    """The data has no spread along any direction; the node is unsplittable."""


class ConvergenceError(DivclustError):
    """Power iteration failed to converge within the iteration budget.

    ``last_direction`` holds the final iterate so callers can inspect or
    accept it.
    """

    def __init__(self, message, last_direction=None, last_magnitude=None):
        super().__init__(message)
        self.last_direction = last_direction
        self.last_magnitude = last_magnitude


class RankError(DivclustError):
    """Whitening rank is below the requested component count."""


class DegenerateSplitError(DivclustError):
    """A split point would leave one side of the cut empty."""


class StructuralError(DivclustError):
    """A tree operation referenced a node that does not exist or is not a leaf."""


class LinkageValidationError(DivclustError):
    """A linkage matrix is malformed (bad indices, sizes, or heights)."""
