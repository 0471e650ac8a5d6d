"""Error types raised by the toolkit.

Every error derives from ToolkitError, which is a ValueError, so callers that
only guard against bad input with ``except ValueError`` keep working.
"""

from typing import Any, Optional


class ToolkitError(ValueError):
    """Base class for all toolkit errors.

    Attributes:
        witness: Optional counterexample (elements, indices or a small dict)
            explaining why the operation failed.
    """

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class NotDivisible(ToolkitError):
    """A root of unity cannot be embedded into the requested modulus."""


class CapExceeded(ToolkitError):
    """An enumeration or table size is above the configured cap."""


class OrderCapExceeded(CapExceeded):
    """A root-of-unity order is above the configured order cap."""


class ParentMismatch(ToolkitError):
    """Operands belong to different groups, spaces or algebras."""


class ShapeMismatch(ToolkitError):
    """Homomorphisms or matrices cannot be composed."""


class InvalidHomomorphism(ToolkitError):
    """A matrix does not define a well-defined homomorphism."""


class InvalidForm(ToolkitError):
    """A table violates the quadratic-form or bicharacter axioms."""


class EvenPrime(ToolkitError):
    """Characteristic two was requested where an odd prime is required."""


class NotPrime(ToolkitError):
    """A field characteristic is not a prime number."""


class InvalidCocycle(ToolkitError):
    """A cochain or cochain pair fails its cocycle conditions."""


class NotSquareOrder(ToolkitError):
    """A metric group whose order is not a perfect square."""


class NoSolution(ToolkitError):
    """A linear system over Z/N has no solution."""


class HexagonViolation(ToolkitError):
    """A pair (tau, b) fails a hexagon relation."""


class NonScalarNorm(ToolkitError):
    """A spinor norm g * g^T is not a scalar multiple of 1."""


class RelationViolation(ToolkitError):
    """A module action fails the Clifford relations."""


class ParseError(ToolkitError):
    """Malformed command-line or file input."""


class VerificationFailure(ToolkitError):
    """A post-condition check failed on a computed result."""
