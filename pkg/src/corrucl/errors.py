"""Exception hierarchy shared by all modules."""


class BanditError(Exception):
    """Base class for errors raised by corrucl."""


class SpecError(BanditError, ValueError):
    """Invalid instance, surface or kernel specification."""


class PriorError(BanditError, ValueError):
    """Prior mean/covariance is malformed or not positive definite."""


class NumericError(BanditError, ArithmeticError):
    """Non-finite values or a numerically singular matrix."""


class BoundParameterError(BanditError, ValueError):
    """Parameters violate the preconditions of a regret bound."""


class DegenerateGapError(BanditError, ValueError):
    """An arm labelled suboptimal has zero gap."""


class ConfigError(BanditError, ValueError):
    """Invalid experiment configuration; ``key`` names the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
