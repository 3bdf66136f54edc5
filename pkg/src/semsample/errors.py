"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data/format errors
exit 2, anything else exits 3.
"""


class SemSampleError(Exception):
    """Base class for all errors raised by this package."""


class BudgetError(SemSampleError, ValueError):
    """Requested sample budget is invalid for the input size."""


class DimensionError(SemSampleError, ValueError):
    """Array shapes do not line up."""


class MissingFeaturesError(SemSampleError, ValueError):
    """Operation requires per-point features but the cloud has none."""


class InvalidInputError(SemSampleError, ValueError):
    """Input values violate a precondition (non-finite, out of range, empty)."""


class ConfigError(SemSampleError, ValueError):
    """Configuration values are out of range or mutually inconsistent."""


class FormatError(SemSampleError, ValueError):
    """A file does not conform to its declared format.

    Messages carry the offending path plus a line number or byte offset.
    """


class UndefinedMetricError(SemSampleError, ValueError):
    """The metric has no defined value for this input (e.g. recall with no boxes)."""
