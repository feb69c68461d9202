"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: :class:`InputError` (and subclasses)
exit with 2, :class:`NumericError` and other internal failures with 3.
"""


class VwaaKelmError(Exception):
    """Base class for all package errors."""


class InputError(VwaaKelmError):
    """Invalid user input: bad flags, malformed files, unusable data."""


class SchemaError(InputError):
    """A dataset or model file does not match the expected columns/fields."""


class UnsupportedVersionError(InputError):
    """A serialized model declares a format_version this build cannot read."""


class NumericError(VwaaKelmError):
    """A numeric procedure failed (e.g. factorization after jitter escalation)."""


class UndefinedMetricError(VwaaKelmError):
    """A metric is mathematically undefined on the given data."""
