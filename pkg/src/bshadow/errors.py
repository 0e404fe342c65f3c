"""Exception hierarchy.

Errors fall into two families.  Input/budget errors (``InvalidInput`` and its
relatives) mean the caller asked for something the finite machinery cannot
certify.  ``TheoremViolation`` subclasses mean a check that is backed by a
proof failed, i.e. an implementation bug; they carry a JSON-serialisable
witness.
"""

from __future__ import annotations

from typing import Any


class BShadowError(Exception):
    """Base class for all package errors."""


class InvalidInput(BShadowError, ValueError):
    pass


class OutOfCertifiedBall(BShadowError):
    pass


class BudgetExceeded(BShadowError):
    pass


class RewritingIncomplete(BShadowError):
    pass


class NoValidWindow(InvalidInput):
    pass


class InsufficientRadius(BShadowError):
    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class InsufficientSupport(BShadowError):
    pass


class InsufficientDepth(BShadowError):
    pass


class DepthExceedsSupport(InsufficientSupport):
    pass


class NotStabilized(BShadowError):
    pass


class NotFoundWithinDepth(BShadowError):
    pass


class PerturbationTooLarge(BShadowError):
    pass


class SupportExhausted(InsufficientSupport):
    pass


class HypothesisViolated(InvalidInput):
    def __init__(self, failed: list[str]):
        super().__init__("gluing hypotheses violated: " + "; ".join(failed))
        self.failed = failed


class TheoremViolation(BShadowError):
    """A proven statement failed on concrete data."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class PropositionViolated(TheoremViolation):
    pass


class SeamMismatch(TheoremViolation):
    pass


class ClaimViolated(TheoremViolation):
    pass


class NoRayWithinK(TheoremViolation):
    pass


class ConsistencyViolated(TheoremViolation):
    pass
