"""Shared exception types."""


class SpecificationError(ValueError):
    """An operation was called with data that violates its contract."""


class TruncationError(RuntimeError):
    """A query cannot be answered honestly inside the finite truncation."""
