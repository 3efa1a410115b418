"""Exception types shared across the package."""


class InvalidSystemError(ValueError):
    """Rejected (type, rank) pair or malformed input data."""


class SliceCoverageError(RuntimeError):
    """A query needs group elements beyond the enumerated length cutoff.

    The message always names the cutoff that would have sufficed, so the
    caller can re-enumerate ("enlarge cutoff") instead of guessing.
    """


class ResourceCapError(RuntimeError):
    """An enumeration hit its configured element-count cap."""


class CacheFormatError(RuntimeError):
    """A cache file failed its magic, version, or checksum validation."""


class InvariantViolation(RuntimeError):
    """An internal mathematical invariant failed; always a bug or a finding."""
