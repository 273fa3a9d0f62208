from __future__ import annotations

from collections.abc import Sequence
from copy import copy
from typing import TYPE_CHECKING, Any

from .metrics import metrics

if TYPE_CHECKING:
    from src.analysis.models import Violation


class TrackedException(Exception):  # noqa: N818
    """An exception that increments Prometheus metric counter for itself"""

    _labels: dict[str, str] = {}

    def __init__(self, *args: Any) -> None:
        labels = copy(self._labels)
        if args:
            labels["message"] = str(args[0])
        metrics.register(
            name=self.__class__.__name__,
            description=self.__class__.__doc__,
            labels=labels,
        )
        super().__init__(*args)


class ProblemFormatError(TrackedException):
    """Raised when a problem file cannot be turned into a problem"""

    def __init__(self, message: str, line: int | None = None, column: int | None = None) -> None:
        self.line = line
        self.column = column
        location = f"{line}:{column}: " if line is not None else ""
        super().__init__(f"{location}{message}")


class SidSyntaxError(ProblemFormatError):
    """Raised on malformed s-expressions or unexpected tokens"""

    def __init__(
        self, message: str, line: int | None = None, column: int | None = None, expected: Sequence[str] = ()
    ) -> None:
        self.expected = tuple(expected)
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__(message, line, column)


class SidArityError(ProblemFormatError):
    """Raised when a predicate atom has the wrong number of arguments"""


class SidFieldCountError(ProblemFormatError):
    """Raised when a points-to atom disagrees with the declared field count"""


class SidShadowingError(ProblemFormatError):
    """Raised when a bound variable shadows a parameter, a constant or another binder"""


class SidUndeclaredError(ProblemFormatError):
    """Raised on an undeclared predicate or a free variable in a rule body"""


class ConditionError(TrackedException):
    """Raised when a problem misses a side condition required by a pipeline stage"""

    def __init__(self, message: str, violations: Sequence[Violation] = ()) -> None:
        self.violations = list(violations)
        super().__init__(message)


class NotEstablishedError(ConditionError):
    """Raised when the established reduction receives a problem that is not established"""


class TransformBlowupError(TrackedException):
    """Raised when a transformation exceeds its configured rule cap"""


class PoolExhaustedError(TrackedException):
    """Raised when a core formula binds more variables than the variable pool provides"""


class CoreSizeBoundError(TrackedException):
    """Raised when a core formula exceeds the configured quadratic size bound"""


class ResourceExceededError(TrackedException):
    """Raised when the profile computation exceeds its formula or set budget"""


class OracleBudgetError(TrackedException):
    """Raised when bounded model search exceeds its caps"""
