"""Shared exception types."""


class InvariantViolation(RuntimeError):
    """An internal mathematical invariant failed verification."""


class ConfigError(ValueError):
    """A configuration is syntactically valid but semantically wrong."""
