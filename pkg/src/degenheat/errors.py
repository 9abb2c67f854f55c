"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid user input: bad parameters, mismatched shapes, malformed configs."""


class NumericError(RuntimeError):
    """A numerical routine failed to converge or produced non-finite values."""
