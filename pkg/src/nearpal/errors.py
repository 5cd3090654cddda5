"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, InputError -> 3,
InternalError -> 4.  Plain ValueError marks contract violations in the
pure arithmetic layers.
"""


class ConfigError(ValueError):
    """A run configuration that cannot be executed as requested."""


class InputError(ValueError):
    """Unreadable or malformed input data."""


class InternalError(AssertionError):
    """An internal invariant failed; indicates a bug, not bad input."""
