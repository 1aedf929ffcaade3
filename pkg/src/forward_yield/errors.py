"""Exception types shared across the package."""


class ForwardYieldError(Exception):
    """Base class for all errors raised by this package."""


class SubspaceViolationError(ForwardYieldError, ValueError):
    """A coefficient vector lies outside its required subspace."""


class ConfigError(ForwardYieldError, ValueError):
    """An experiment configuration failed validation."""
