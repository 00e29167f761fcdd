"""Exception types shared across the pipeline."""


class ImmunidsError(Exception):
    """Base class for all errors raised by this package."""


class MalformedGraphError(ImmunidsError):
    """Attack graph is inconsistent (e.g. one predicate used at two arities)."""


class LoadError(ImmunidsError):
    """An input file failed to parse or validate; message names the location."""


class ConfigError(ImmunidsError):
    """A configuration value is outside its documented range."""
