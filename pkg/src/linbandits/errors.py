"""Exception hierarchy shared by every module of the package."""


class BanditError(Exception):
    """Base class for all package errors."""


class ContractViolation(BanditError, ValueError):
    """A caller broke an operation's precondition (bad dimension, out-of-range value...)."""


class InitializationIncomplete(ContractViolation):
    """An index was requested while some variable has never been observed."""


class ConfigurationError(BanditError, ValueError):
    """The problem or policy configuration cannot be used as given."""


class UnsupportedVariantError(ConfigurationError):
    """The requested operation is not available for this action-set variant."""


class SizeLimitError(ConfigurationError):
    """Enumeration stopped because the feasible set is larger than the allowed limit."""

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count


class InfeasibleError(BanditError, RuntimeError):
    """The combinatorial problem has no feasible solution (no s-d path, disconnected graph...)."""


class SimulationError(BanditError, RuntimeError):
    """Wraps an error raised inside a simulation run, with the period where it happened."""

    def __init__(self, message: str, period: int | None = None):
        super().__init__(message if period is None else f"period {period}: {message}")
        self.period = period
