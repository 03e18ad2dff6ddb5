"""Exception types shared across the package."""


class ParseError(ValueError):
    """A cell or record in an input file could not be parsed."""


class ValidationError(ValueError):
    """Input data violates a structural requirement."""


class ConfigError(ValueError):
    """A configuration value is outside its documented range."""


class ResourceLimitError(RuntimeError):
    """A safety cap (e.g. max_trees) was exhausted before the result was provable."""
