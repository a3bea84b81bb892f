"""Exception hierarchy shared by every stage of the pipeline."""


class FlareLQTError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(FlareLQTError, ValueError):
    pass


class NoRootError(FlareLQTError):
    """The flare constraint system has no solution inside the bracket."""


class TimeBeforeStartError(FlareLQTError, ValueError):
    pass


class IntegrationError(FlareLQTError):
    pass


class StepBudgetExceeded(IntegrationError):
    pass


class StepUnderflow(IntegrationError):
    pass


class NonFiniteRHS(IntegrationError):
    pass


class OutOfSpanError(FlareLQTError, ValueError):
    pass


class RiccatiBlowUp(FlareLQTError):
    """S(t) became non-finite before the backward sweep reached t0."""


class HorizonMismatch(FlareLQTError, ValueError):
    pass


class ConfigError(FlareLQTError, ValueError):
    pass
