"""Custom exceptions for heytingkit."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any


class HeytingKitError(Exception):
    """Base exception for heytingkit."""

    pass


# -- Frames and filters --


class FrameError(HeytingKitError):
    """Raised when a frame specification is rejected.

    ``witness`` holds the element names that exhibit the failure.
    """

    def __init__(self, message: str, witness: tuple[Any, ...] = ()):
        super().__init__(message)
        self.witness = witness


class NotPartialOrderError(FrameError):
    """Raised when the given order is not reflexive, antisymmetric and transitive."""

    pass


class NotLatticeError(FrameError):
    """Raised when some pair of elements lacks a meet or a join."""

    pass


class NotDistributiveError(FrameError):
    """Raised when a lattice violates a ∧ (b ∨ c) = (a ∧ b) ∨ (a ∧ c)."""

    pass


class NotTopologyError(FrameError):
    """Raised when a family of open sets is not closed under ∩ and ∪."""

    pass


class UnknownElementError(HeytingKitError):
    """Raised when an element name or id does not belong to the frame."""

    pass


class NotFrameHomError(HeytingKitError):
    """Raised when a map between frames fails a preservation law."""

    def __init__(self, message: str, law: str = ""):
        super().__init__(message)
        self.law = law


class NotAFilterError(HeytingKitError):
    """Raised when an explicit member set is not a filter."""

    pass


class ImproperFilterError(HeytingKitError):
    """Raised when a quotient is requested by a filter containing bottom."""

    def __init__(self, message: str | None = None):
        if message is None:
            message = "Filter contains the bottom element; quotients need a proper filter."
        super().__init__(message)


# -- Heyting-valued sets --


@dataclass(frozen=True)
class Violation:
    """A failed law together with the carrier labels witnessing it."""

    law: str
    witness: tuple[Any, ...]

    def __str__(self) -> str:
        args = ", ".join(str(w) for w in self.witness)
        return f"{self.law}({args})"


class HSetLawError(HeytingKitError):
    """Raised when a valuation or morphism table breaks its defining laws."""

    def __init__(self, violations: Sequence[Violation], what: str = "valuation"):
        self.violations = tuple(violations)
        shown = "; ".join(str(v) for v in self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(f"Invalid {what}: {shown}{more}")


class NotMorphismError(HSetLawError):
    """Raised when a table is not a morphism of Heyting-valued sets."""

    def __init__(self, violations: Sequence[Violation]):
        super().__init__(violations, what="morphism")


class NotStrictError(HSetLawError):
    """Raised when a frame-valued predicate is not a strict relation."""

    def __init__(self, violations: Sequence[Violation]):
        super().__init__(violations, what="strict relation")


class FrameMismatchError(HeytingKitError):
    """Raised when objects over different frames are combined."""

    pass


class ObjectMismatchError(HeytingKitError):
    """Raised when a composite is requested for non-matching domain and codomain."""

    pass


class ArityMismatchError(HeytingKitError):
    """Raised when a limit diagram has legs of inconsistent shape."""

    pass


class SizeGuardError(HeytingKitError):
    """Raised when a brute-force enumeration would exceed the configured bound."""

    def __init__(self, what: str, size: int, limit: int):
        super().__init__(
            f"Enumerating {what} needs {size} candidates, above the limit of {limit}. "
            "Raise max_enumeration to allow it."
        )
        self.size = size
        self.limit = limit


# -- Presheaves --


class PresheafError(HeytingKitError):
    """Raised when presheaf data is malformed (missing sections, bad maps)."""

    pass


class NotFunctorialError(PresheafError):
    """Raised when restriction maps do not compose."""

    def __init__(self, message: str, witness: tuple[str, ...] = ()):
        super().__init__(message)
        self.witness = witness


# -- Syntax --


class LanguageError(HeytingKitError):
    """Raised when a signature declares a symbol twice or with a bad arity."""

    pass


class FormulaSyntaxError(HeytingKitError):
    """Raised when formula text cannot be parsed.

    ``column`` is 1-based into ``text``.
    """

    def __init__(self, message: str, text: str, column: int):
        super().__init__(f"SyntaxError at column {column}: {message}")
        self.text = text
        self.column = column


class ArityError(HeytingKitError):
    """Raised when a symbol is applied to the wrong number of arguments."""

    pass


class UnknownSymbolError(HeytingKitError):
    """Raised when a formula mentions a symbol the language does not declare."""

    pass


class DuplicateContextVariableError(HeytingKitError):
    """Raised when a context lists the same variable twice."""

    pass


class UnassignedVariableError(HeytingKitError):
    """Raised when evaluation meets a variable with no value."""

    pass


# -- Heyting-valued structures --


class AssumptionFailedError(HeytingKitError):
    """Raised when a function symbol has no extent-preserving representing map."""

    def __init__(self, symbol: str, row: Any = None):
        message = f"No extent-preserving representing map exists for {symbol!r}"
        if row is not None:
            message += f" (no admissible image for {row})"
        super().__init__(message)
        self.symbol = symbol
        self.row = row


class ContextMismatchError(HeytingKitError):
    """Raised when parameters do not match a formula's context."""

    pass


class UnknownParameterError(HeytingKitError):
    """Raised when a parameter is not a carrier element."""

    pass


class WitnessNotClosedError(HeytingKitError):
    """Raised when a representing map leaves the elements of a given extent."""

    pass


class EmptyFactorWithoutConstantError(HeytingKitError):
    """Raised when an ultraproduct has an empty factor and no constant symbol."""

    pass


class InvariantError(HeytingKitError):
    """Raised when an internal cross-check between two computations disagrees."""

    pass


# -- Files and configuration --


class FixtureError(HeytingKitError):
    """Raised when a fixture document cannot be loaded."""

    def __init__(self, message: str, source: str = "<memory>", path: str = "$"):
        super().__init__(f"{source}: {path}: {message}")
        self.source = source
        self.path = path


class ConfigError(HeytingKitError):
    """Raised when settings cannot be read, validated or written."""

    pass


class EmptyUniverseWarning(UserWarning):
    """Warning issued when a generated sheaf has a factor with no elements."""

    pass
