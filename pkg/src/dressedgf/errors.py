"""Exception types shared across the package."""


class DressedGFError(Exception):
    """Base class for all package errors."""


class PoleError(DressedGFError):
    """Requested evaluation sits on (or numerically at) a pole of a resolvent."""


class BranchError(DressedGFError):
    """Analytic continuation requested on a branch cut (energy inside a band)."""


class ConfigError(DressedGFError):
    """A config document or run configuration is malformed."""


class RegimeError(DressedGFError):
    """Inputs are outside the regime where the requested quantity is defined."""
