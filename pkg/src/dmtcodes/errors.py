"""Exception types shared across the package."""


class DmtError(Exception):
    """Base class for all package errors."""


class UsageError(DmtError):
    """Bad arguments or misuse of an API (CLI exit code 2)."""


class ConfigError(UsageError):
    """Bad configuration value, e.g. an unknown preset name."""


class DomainError(DmtError):
    """Mathematically out-of-range input (CLI exit code 1)."""


class CapExceededError(DomainError):
    """Enumeration or decoding refused because a size cap would be exceeded."""


class UnsupportedError(DomainError):
    """Operation not available for the given preset or parameters."""
