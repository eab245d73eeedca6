"""Exception hierarchy for the simulator and inference chain."""

from typing import Iterable, List, Optional


class QjpdError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QjpdError, ValueError):
    """A parameter lies outside the domain of the model or evaluator."""


class UninformativeRuleError(QjpdError, ValueError):
    """A decision rule with 1 - eps_fp - eps_fn <= 0 cannot be inverted for P(QJ)."""


class EmptyHistogramError(QjpdError, ValueError):
    """A fit was asked for on a histogram without any counts."""


class ModelMismatchError(QjpdError, ValueError):
    """Observed counts fall where every model component has zero mass."""


class DegenerateDesignError(QjpdError, ValueError):
    """A regression design cannot identify its parameters."""


class ValidationFailure(QjpdError):
    """An oracle or calibration suite found a tolerance violation."""


class ConfigError(QjpdError):
    """Configuration could not be parsed or failed schema validation."""

    def __init__(self, message: str, keys: Optional[Iterable[str]] = None):
        """Initialize with a message and the offending keys.

        Args:
            message: Human-readable description
            keys: Dotted paths of the offending keys
        """
        self.keys: List[str] = sorted(keys) if keys else []
        if self.keys:
            message = f"{message}: {', '.join(self.keys)}"
        super().__init__(message)


class SchemaVersionError(ConfigError):
    """Configuration declares a schema version this code does not read."""


class UsageError(ConfigError):
    """Command-line arguments could not be parsed."""
