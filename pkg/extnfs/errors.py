"""Exception hierarchy shared by every pipeline stage."""

from __future__ import annotations


class ExtnfsError(Exception):
    """Base error for pipeline failures."""


class PolynomialError(ExtnfsError):
    """Raised for vanishing, degenerate or projective polynomial inputs."""


class FieldError(ExtnfsError):
    """Raised for undefined finite field operations such as inverting zero."""


class LatticeError(ExtnfsError):
    """Raised when a lattice basis is rank deficient."""


class ContractViolation(ExtnfsError):
    """Raised when a caller guarantee does not hold."""


class NotSmooth(ExtnfsError):
    """Raised when an integer does not factor within the bound or budget."""

    EXCEEDS_BOUND = "exceeds-bound"
    BUDGET_EXHAUSTED = "budget-exhausted"

    def __init__(self, reason: str, cofactor: int = 0) -> None:
        super().__init__(f"{reason} (cofactor {cofactor})")
        self.reason = reason
        self.cofactor = cofactor


class SearchExhausted(ExtnfsError):
    """Raised when a bounded search finds nothing."""


class ConfigError(ExtnfsError, ValueError):
    """Raised when configuration values violate pipeline invariants."""


class SieveMemoryError(ExtnfsError):
    """Raised when a sieve task would exceed its memory budget."""


class Unattributable(ExtnfsError):
    """Raised when a norm cannot be split into listed prime ideals."""


class DegenerateRelation(ExtnfsError):
    """Raised when a relation has no defined duplicate key."""


class InsufficientRelations(ExtnfsError):
    """Raised when the relation excess drops below the Schirokauer map count."""


class SchirokauerUndefined(ExtnfsError):
    """Raised when ell divides the norm of an element."""


class FullRankError(ExtnfsError):
    """Raised when no nullspace vector can be found."""


class LogContradiction(ExtnfsError):
    """Raised when a fully known relation does not vanish mod ell."""


class DescentError(ExtnfsError):
    """Raised when the descent tree cannot be completed within its budget."""


class MissingArtifact(ExtnfsError):
    """Raised when a stage runs before its prerequisites exist."""
