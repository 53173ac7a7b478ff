"""Exception types shared across the package."""


class SizeLimitError(ValueError):
    """An exact computation was asked for on a graph larger than its search limit."""


class ConfigError(ValueError):
    """A scenario or simulation configuration failed validation."""
