"""Exception types shared across the package."""


class FairlensError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(FairlensError):
    """Invalid user-supplied configuration (bad flags, unknown columns, ...)."""


class DataFormatError(FairlensError):
    """Malformed input data (ragged CSV, non-binary target, parse failures)."""


class PipelineError(FairlensError):
    """A repetition of the audit pipeline failed; the message names the seed."""
