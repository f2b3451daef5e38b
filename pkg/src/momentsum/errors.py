"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`MomentSumError`
so the CLI can map it to a structured report entry.
"""

from __future__ import annotations


class MomentSumError(Exception):
    code = "Error"


# sequences


class TableExhausted(MomentSumError, IndexError):
    code = "TableExhausted"


class LcViolation(MomentSumError, ValueError):
    """Log-convexity fails.

    ``p`` is the first index where the ratio sequence M_p/M_{p-1} decreases,
    i.e. ``M_{p-1}**2 > M_{p-2} * M_p``; ``center`` is ``p - 1``.
    """

    code = "LcViolation"

    def __init__(self, p: int):
        self.p = p
        self.center = p - 1
        super().__init__(
            f"log-convexity fails: M_{p}/M_{p - 1} < M_{p - 1}/M_{p - 2} "
            f"(M_{p - 1}^2 > M_{p - 2} M_{p})"
        )


class DegenerateFit(MomentSumError, ValueError):
    code = "DegenerateFit"


class GridTooSmall(MomentSumError, ValueError):
    code = "GridTooSmall"


# series


class ProfileMismatch(MomentSumError, ValueError):
    code = "ProfileMismatch"


class NotAUnit(MomentSumError, ZeroDivisionError):
    code = "NotAUnit"


class OrderExhausted(MomentSumError, ValueError):
    code = "OrderExhausted"


class TruncationOverflow(MomentSumError, ValueError):
    code = "TruncationOverflow"


class RadiusOutOfRange(MomentSumError, ValueError):
    code = "RadiusOutOfRange"


class GridMismatch(MomentSumError, ValueError):
    code = "GridMismatch"


# problem description


class SpecSyntaxError(MomentSumError, ValueError):
    code = "SyntaxError"

    def __init__(self, message: str, line: int, col: int, expected: str | None = None):
        self.line = line
        self.col = col
        self.expected = expected
        self.message = message
        where = f"line {line}, col {col}"
        extra = f" (expected {expected})" if expected else ""
        super().__init__(f"{where}: {message}{extra}")


class SemanticError(MomentSumError, ValueError):
    code = "SemanticError"


class NoPositiveSlope(MomentSumError, ValueError):
    code = "NoPositiveSlope"


class MultiplePositiveSlopes(MomentSumError, ValueError):
    code = "MultiplePositiveSlopes"


class SlopeConsistencyError(MomentSumError, ArithmeticError):
    """Hull slope disagrees with the closed form for the kappa term."""

    code = "SlopeConsistencyError"


# solver / analysis


class ValidationFailed(MomentSumError, ValueError):
    code = "ValidationFailed"

    def __init__(self, findings):
        self.findings = list(findings)
        msgs = "; ".join(f"{f.code}: {f.message}" for f in self.findings)
        super().__init__(f"problem failed validation: {msgs}")


class SearchBudgetExceeded(MomentSumError, RuntimeError):
    code = "SearchBudgetExceeded"


class InsufficientTerms(MomentSumError, ValueError):
    code = "InsufficientTerms"


class DomainGuard(MomentSumError, ValueError):
    code = "DomainGuard"


class DirectionOutOfDomain(MomentSumError, ValueError):
    code = "DirectionOutOfDomain"


class QuadratureBudget(MomentSumError, RuntimeError):
    code = "QuadratureBudget"


class RamifiedKernelRequired(MomentSumError, ValueError):
    code = "RamifiedKernelRequired"


class IoError(MomentSumError, OSError):
    code = "IoError"
