"""Exception types shared across the package."""


class FingertipError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(FingertipError, ValueError):
    """A parameter or config value violates its contract."""


class InsufficientSamplesError(FingertipError, ValueError):
    """A signal is too short for the requested analysis."""


class ExtrapolationError(FingertipError, ValueError):
    """A lookup falls outside the supported time range."""


class InsufficientEdgesError(FingertipError, ValueError):
    """Fewer contact edges were detected than the plan requires."""


class RankDeficiencyError(FingertipError, ValueError):
    """A least-squares problem does not have full column rank."""


class TrainingDivergedError(FingertipError, RuntimeError):
    """Training produced a non-finite loss."""


class ModelFormatError(FingertipError, ValueError):
    """A serialized model file is corrupt or has an unsupported version."""


class ContractViolationError(FingertipError, ValueError):
    """An operation was invoked on state that its contract forbids."""
