"""Finite frames, frame homomorphisms, filters, quotients and regular elements.

A frame here is a finite distributive lattice, which is automatically a
complete Heyting algebra. Elements are dense ids ``0..n-1`` with display
names; all operations are table lookups.

Example:
    from heytingkit.frame import Frame, filters

    s3 = Frame.from_order(["0", "u", "1"], [[1, 1, 1], [0, 1, 1], [0, 0, 1]])
    s3.implies(s3.index("u"), s3.bottom)  # -> 0
    [f.label for f in filters(s3) if f.is_maximal]  # -> ["up:u"]
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Any

from .exceptions import (
    FrameError,
    ImproperFilterError,
    InvariantError,
    NotAFilterError,
    NotDistributiveError,
    NotFrameHomError,
    NotLatticeError,
    NotPartialOrderError,
    NotTopologyError,
    UnknownElementError,
)

logger = logging.getLogger(__name__)

ElementRef = int | str


class Frame:
    """A finite frame given by its order relation.

    Meet, join and implication tables are derived once at construction and
    the instance is immutable afterwards. ``points_of`` is set for frames
    built from a topology and maps each element to its set of points.
    """

    def __init__(
        self,
        names: Sequence[str],
        leq: Sequence[Sequence[Any]],
        *,
        points_of: Sequence[frozenset[str]] | None = None,
    ) -> None:
        n = len(names)
        if n == 0:
            raise NotLatticeError("A frame needs at least one element")
        self.names: tuple[str, ...] = tuple(str(x) for x in names)
        if len(set(self.names)) != n:
            dupes = sorted({x for x in self.names if self.names.count(x) > 1})
            raise FrameError(f"Duplicate element names: {', '.join(dupes)}", tuple(dupes))
        if len(leq) != n or any(len(row) != n for row in leq):
            raise FrameError(f"Order matrix must be {n}x{n}")

        self._leq = tuple(tuple(bool(x) for x in row) for row in leq)
        self._index = {name: i for i, name in enumerate(self.names)}
        self.points_of = tuple(points_of) if points_of is not None else None

        self._check_partial_order()
        self._meet = self._bound_table(lower=True)
        self._join = self._bound_table(lower=False)
        self.bottom: int = reduce(self.meet, range(n))
        self.top: int = reduce(self.join, range(n))
        self._check_distributive()
        self._implies = tuple(
            tuple(self.join_all(b for b in range(n) if self.le(self._meet[a][b], c)) for c in range(n))
            for a in range(n)
        )
        logger.debug("Built frame with %d elements", n)

    # -- Construction --

    @classmethod
    def from_order(cls, names: Sequence[str], leq: Sequence[Sequence[Any]]) -> Frame:
        """Build a frame from element names and an order matrix ``leq[a][b] = a ≤ b``."""
        return cls(names, leq)

    @classmethod
    def from_topology(cls, points: Sequence[str], opens: Iterable[Iterable[int | str]]) -> Frame:
        """Build the frame of open sets of a finite topology.

        Opens are given as lists of point indices or point names. They are
        canonicalized to a sorted list (by size, then by point order) before
        ids are assigned, so the empty set always gets id 0.

        Raises:
            NotTopologyError: If the family misses ∅ or the full set, or is not
                closed under binary ∩ and ∪.
        """
        points = tuple(str(p) for p in points)
        position = {p: i for i, p in enumerate(points)}

        def resolve(x: int | str) -> str:
            if isinstance(x, int) and not isinstance(x, bool) and 0 <= x < len(points):
                return points[x]
            if isinstance(x, str) and x in position:
                return x
            raise NotTopologyError(f"Unknown point {x!r}", (x,))

        family = {frozenset(resolve(x) for x in o) for o in opens}
        full = frozenset(points)
        if frozenset() not in family:
            raise NotTopologyError("Open sets must contain the empty set", ("{}",))
        if full not in family:
            raise NotTopologyError("Open sets must contain the full set", (_set_name(full, position),))
        for u, v in itertools.combinations(family, 2):
            for op, result in (("∩", u & v), ("∪", u | v)):
                if result not in family:
                    raise NotTopologyError(
                        f"{_set_name(u, position)} {op} {_set_name(v, position)} is not open",
                        (_set_name(u, position), _set_name(v, position), op),
                    )

        ordered = sorted(family, key=lambda s: (len(s), sorted(position[p] for p in s)))
        names = [_set_name(s, position) for s in ordered]
        leq = [[u <= v for v in ordered] for u in ordered]
        return cls(names, leq, points_of=ordered)

    @classmethod
    def powerset(cls, points: Sequence[str]) -> Frame:
        """Discrete topology on ``points``: every subset is open."""
        subsets = itertools.chain.from_iterable(
            itertools.combinations(range(len(points)), r) for r in range(len(points) + 1)
        )
        return cls.from_topology(points, subsets)

    @classmethod
    def chain(cls, names: Sequence[str]) -> Frame:
        """Linear order in the given name order, bottom first."""
        return cls(names, [[i <= j for j in range(len(names))] for i in range(len(names))])

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Frame:
        """Create a Frame from its JSON form (order matrix or topology)."""
        if "elements" in data and "leq" in data:
            return cls.from_order(data["elements"], data["leq"])
        if "points" in data and "opens" in data:
            return cls.from_topology(data["points"], data["opens"])
        raise FrameError("Frame data needs either elements+leq or points+opens")

    def to_dict(self) -> dict[str, Any]:
        """Convert to the order-matrix JSON form."""
        return {"elements": list(self.names), "leq": [list(row) for row in self._leq]}

    # -- Validation helpers --

    def _check_partial_order(self) -> None:
        n = self.size
        leq = self._leq
        for a in range(n):
            if not leq[a][a]:
                raise NotPartialOrderError(
                    f"Order is not reflexive at {self.names[a]}", (self.names[a],)
                )
        for a, b in itertools.combinations(range(n), 2):
            if leq[a][b] and leq[b][a]:
                raise NotPartialOrderError(
                    f"Order is not antisymmetric: {self.names[a]} and {self.names[b]}",
                    (self.names[a], self.names[b]),
                )
        for a, b, c in itertools.product(range(n), repeat=3):
            if leq[a][b] and leq[b][c] and not leq[a][c]:
                raise NotPartialOrderError(
                    f"Order is not transitive: {self.names[a]} ≤ {self.names[b]} ≤ {self.names[c]}",
                    (self.names[a], self.names[b], self.names[c]),
                )

    def _bound_table(self, *, lower: bool) -> tuple[tuple[int, ...], ...]:
        n = self.size
        leq = self._leq

        def below(x: int, y: int) -> bool:
            return leq[x][y] if lower else leq[y][x]

        table = []
        for a in range(n):
            row = []
            for b in range(n):
                bounds = [c for c in range(n) if below(c, a) and below(c, b)]
                best = [c for c in bounds if all(below(d, c) for d in bounds)]
                if not best:
                    what = "meet" if lower else "join"
                    raise NotLatticeError(
                        f"{self.names[a]} and {self.names[b]} have no {what}",
                        (self.names[a], self.names[b], what),
                    )
                row.append(best[0])
            table.append(tuple(row))
        return tuple(table)

    def _check_distributive(self) -> None:
        m, j = self._meet, self._join
        for a, b, c in itertools.product(range(self.size), repeat=3):
            if m[a][j[b][c]] != j[m[a][b]][m[a][c]]:
                raise NotDistributiveError(
                    f"{self.names[a]} ∧ ({self.names[b]} ∨ {self.names[c]}) differs from "
                    f"({self.names[a]} ∧ {self.names[b]}) ∨ ({self.names[a]} ∧ {self.names[c]})",
                    (self.names[a], self.names[b], self.names[c]),
                )

    # -- Element access --

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def elements(self) -> range:
        return range(self.size)

    def index(self, ref: ElementRef) -> int:
        """Resolve an element id or display name to its id.

        Raises:
            UnknownElementError: If the reference is not an element.
        """
        if isinstance(ref, bool):
            raise UnknownElementError(f"Not a frame element: {ref!r}")
        if isinstance(ref, int):
            if 0 <= ref < self.size:
                return ref
            raise UnknownElementError(f"Element id {ref} out of range 0..{self.size - 1}")
        try:
            return self._index[str(ref)]
        except KeyError:
            raise UnknownElementError(
                f"Unknown element {ref!r}; known: {', '.join(self.names)}"
            ) from None

    def name(self, a: int) -> str:
        return self.names[a]

    # -- Lattice and Heyting operations --

    def le(self, a: int, b: int) -> bool:
        return self._leq[a][b]

    def meet(self, a: int, b: int) -> int:
        return self._meet[a][b]

    def join(self, a: int, b: int) -> int:
        return self._join[a][b]

    def implies(self, a: int, b: int) -> int:
        return self._implies[a][b]

    def neg(self, a: int) -> int:
        return self._implies[a][self.bottom]

    def iff(self, a: int, b: int) -> int:
        return self._meet[self._implies[a][b]][self._implies[b][a]]

    def is_regular(self, a: int) -> bool:
        return self.neg(self.neg(a)) == a

    def join_all(self, items: Iterable[int]) -> int:
        """Join of an arbitrary subset; the empty join is bottom."""
        result = self.bottom
        for x in items:
            result = self._join[result][x]
        return result

    def meet_all(self, items: Iterable[int]) -> int:
        """Meet of an arbitrary subset; the empty meet is top."""
        result = self.top
        for x in items:
            result = self._meet[result][x]
        return result

    def up_set(self, a: int) -> frozenset[int]:
        return frozenset(b for b in self.elements if self._leq[a][b])

    def down_set(self, a: int) -> frozenset[int]:
        return frozenset(b for b in self.elements if self._leq[b][a])

    @cached_property
    def atoms(self) -> tuple[int, ...]:
        """Elements covering bottom, ascending by id."""
        return tuple(
            a
            for a in self.elements
            if a != self.bottom
            and not any(c not in (a, self.bottom) and self._leq[c][a] for c in self.elements)
        )

    @cached_property
    def is_boolean(self) -> bool:
        return all(self.join(a, self.neg(a)) == self.top for a in self.elements)

    # -- Dunder --

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self is other or (self.names == other.names and self._leq == other._leq)

    def __hash__(self) -> int:
        return hash((self.names, self._leq))

    def __repr__(self) -> str:
        return f"Frame({', '.join(self.names)})"


def _set_name(s: frozenset[str], position: Mapping[str, int]) -> str:
    return "{" + ",".join(sorted(s, key=position.__getitem__)) + "}"


def build_frame(spec: Mapping[str, Any]) -> Frame:
    """Build and validate a frame from an order matrix or a finite topology.

    Args:
        spec: ``{"elements": [...], "leq": [[...]]}`` or
            ``{"points": [...], "opens": [[...]]}``.

    Returns:
        The validated Frame with all derived tables.

    Raises:
        NotPartialOrderError, NotLatticeError, NotDistributiveError,
        NotTopologyError: Each names the witnessing elements.
    """
    return Frame.from_dict(spec)


@dataclass(frozen=True)
class HeytingOps:
    """Result of :func:`heyting_ops`."""

    implies: int
    neg: int
    is_regular: bool


def heyting_ops(frame: Frame, a: ElementRef, b: ElementRef) -> HeytingOps:
    """Compute ``a ⇒ b``, ``¬a`` and whether ``a`` is regular."""
    x, y = frame.index(a), frame.index(b)
    return HeytingOps(implies=frame.implies(x, y), neg=frame.neg(x), is_regular=frame.is_regular(x))


# -- Frame homomorphisms --


@dataclass(frozen=True)
class FrameHom:
    """A map between frames preserving finite meets and arbitrary joins."""

    source: Frame
    target: Frame
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        src, tgt = self.source, self.target
        if len(self.table) != src.size or any(not 0 <= x < tgt.size for x in self.table):
            raise NotFrameHomError("Table must send every source element to a target element")
        h = self.table
        if h[src.top] != tgt.top:
            raise NotFrameHomError("Top is not preserved", law="top")
        if h[src.bottom] != tgt.bottom:
            raise NotFrameHomError("Bottom is not preserved", law="bottom")
        for a, b in itertools.product(src.elements, repeat=2):
            if h[src.meet(a, b)] != tgt.meet(h[a], h[b]):
                raise NotFrameHomError(
                    f"Meet of {src.name(a)} and {src.name(b)} is not preserved", law="meet"
                )
            if h[src.join(a, b)] != tgt.join(h[a], h[b]):
                raise NotFrameHomError(
                    f"Join of {src.name(a)} and {src.name(b)} is not preserved", law="join"
                )

    @classmethod
    def from_mapping(
        cls, source: Frame, target: Frame, mapping: Mapping[ElementRef, ElementRef]
    ) -> FrameHom:
        """Build from a mapping of source to target element references."""
        table = [0] * source.size
        seen = set()
        for a, b in mapping.items():
            x = source.index(a)
            table[x] = target.index(b)
            seen.add(x)
        if len(seen) != source.size:
            raise NotFrameHomError("Mapping must cover every source element")
        return cls(source, target, tuple(table))

    def __call__(self, a: int) -> int:
        return self.table[a]

    def right_adjoint(self) -> tuple[int, ...]:
        """The right adjoint ``k(b) = ⋁{a : h(a) ≤ b}`` as a table on the target."""
        src, tgt = self.source, self.target
        k = tuple(
            src.join_all(a for a in src.elements if tgt.le(self.table[a], b)) for b in tgt.elements
        )
        for a, b in itertools.product(src.elements, tgt.elements):
            if tgt.le(self.table[a], b) != src.le(a, k[b]):
                raise InvariantError(
                    f"Adjunction fails at {src.name(a)}, {tgt.name(b)}"
                )
        return k


def hom_adjoint(h: FrameHom) -> tuple[int, ...]:
    """Right adjoint of a validated frame homomorphism."""
    return h.right_adjoint()


# -- Filters --


@dataclass(frozen=True)
class Filter:
    """A filter on a finite frame, stored by its principal generator."""

    frame: Frame
    generator: int

    @classmethod
    def principal(cls, frame: Frame, element: ElementRef) -> Filter:
        return cls(frame, frame.index(element))

    @classmethod
    def from_members(cls, frame: Frame, members: Iterable[ElementRef]) -> Filter:
        """Canonicalize an explicit member set to its generator.

        Raises:
            NotAFilterError: If the set is empty, not upward closed or not
                closed under binary meet.
        """
        ids = frozenset(frame.index(m) for m in members)
        if not ids:
            raise NotAFilterError("A filter must be nonempty")
        for a in ids:
            missing = [b for b in frame.up_set(a) if b not in ids]
            if missing:
                raise NotAFilterError(
                    f"Not upward closed: {frame.name(a)} ≤ {frame.name(missing[0])}"
                )
        for a, b in itertools.combinations(ids, 2):
            if frame.meet(a, b) not in ids:
                raise NotAFilterError(
                    f"Not closed under meet: {frame.name(a)} ∧ {frame.name(b)}"
                )
        generator = frame.meet_all(ids)
        if frame.up_set(generator) != ids:
            raise InvariantError("Finite filter is not principal")
        return cls(frame, generator)

    @cached_property
    def members(self) -> frozenset[int]:
        return self.frame.up_set(self.generator)

    def __contains__(self, element: int) -> bool:
        return self.frame.le(self.generator, element)

    @property
    def label(self) -> str:
        return f"up:{self.frame.name(self.generator)}"

    @property
    def is_proper(self) -> bool:
        return self.generator != self.frame.bottom

    @cached_property
    def is_prime(self) -> bool:
        """Proper, and ``U ∨ V ∈ f`` implies ``U ∈ f`` or ``V ∈ f``."""
        if not self.is_proper:
            return False
        frame = self.frame
        return all(
            a in self or b in self
            for a, b in itertools.combinations_with_replacement(frame.elements, 2)
            if frame.join(a, b) in self
        )

    @cached_property
    def is_maximal(self) -> bool:
        """Maximal among proper filters under inclusion."""
        if not self.is_proper:
            return False
        frame = self.frame
        return not any(
            g != frame.bottom and g != self.generator and frame.le(g, self.generator)
            for g in frame.elements
        )

    def __repr__(self) -> str:
        return f"Filter({self.label})"


def filters(frame: Frame) -> list[Filter]:
    """All filters of a finite frame, ordered by generator id.

    Maximality is cross-checked against the atom characterization.
    """
    result = [Filter(frame, g) for g in frame.elements]
    atoms = set(frame.atoms)
    for f in result:
        if f.is_maximal != (f.generator in atoms):
            raise InvariantError(f"Maximal filter {f.label} is not generated by an atom")
    return result


def parse_filter(frame: Frame, text: str) -> Filter:
    """Parse ``up:<element>`` or a comma-separated member list."""
    text = text.strip()
    if text.startswith("up:"):
        return Filter.principal(frame, text[3:].strip())
    return Filter.from_members(frame, [part.strip() for part in text.split(",") if part.strip()])


# -- Quotient Heyting algebras --


class QuotientHA:
    """The quotient of a frame by a proper filter.

    ``U ∼ V`` iff ``(U ↔ V) ∈ f``. Classes are ordered by their least member
    id and named after it.
    """

    def __init__(self, base: Frame, filter: Filter) -> None:
        if not filter.is_proper:
            raise ImproperFilterError()
        self.base = base
        self.filter = filter

        projection = [-1] * base.size
        classes: list[frozenset[int]] = []
        for a in base.elements:
            if projection[a] >= 0:
                continue
            members = frozenset(b for b in base.elements if base.iff(a, b) in filter)
            for b in members:
                projection[b] = len(classes)
            classes.append(members)
        self.classes: tuple[frozenset[int], ...] = tuple(classes)
        self.projection: tuple[int, ...] = tuple(projection)

        reps = [min(c) for c in classes]
        names = [f"[{base.name(r)}]" for r in reps]
        leq = [[base.implies(x, y) in filter for y in reps] for x in reps]
        self.frame = Frame(names, leq)
        self._check_projection()
        logger.debug("Quotient by %s has %d classes", filter.label, len(classes))

    def project(self, a: int) -> int:
        return self.projection[a]

    def _check_projection(self) -> None:
        base, q, p = self.base, self.frame, self.projection
        for a, b in itertools.product(base.elements, repeat=2):
            for op, here, there in (
                ("meet", base.meet, q.meet),
                ("join", base.join, q.join),
                ("implies", base.implies, q.implies),
            ):
                if p[here(a, b)] != there(p[a], p[b]):
                    raise InvariantError(
                        f"Projection does not commute with {op} at {base.name(a)}, {base.name(b)}"
                    )


def quotient_frame(frame: Frame, f: Filter) -> QuotientHA:
    """Quotient Heyting algebra ``frame / f``.

    Raises:
        ImproperFilterError: If ``f`` contains bottom.
    """
    return QuotientHA(frame, f)


# -- Regular elements --


class RegularAlgebra:
    """The Boolean algebra of regular elements ``¬¬U = U`` of a frame.

    ``carrier`` lists the regular elements of ``base`` ascending; ``algebra``
    is the Boolean algebra on them with the inherited order, so its join is
    ``¬¬(U ∨ V)``. ``correspondence`` maps each maximal filter of ``base``
    (by atom generator) to the ultrafilter of ``algebra`` it restricts to.
    """

    def __init__(self, base: Frame) -> None:
        self.base = base
        self.carrier: tuple[int, ...] = tuple(a for a in base.elements if base.is_regular(a))
        self._position = {a: i for i, a in enumerate(self.carrier)}
        self.algebra = Frame(
            [base.name(a) for a in self.carrier],
            [[base.le(a, b) for b in self.carrier] for a in self.carrier],
        )
        self._check_boolean()
        self.correspondence: dict[int, int] = self._match_maximal_filters()

    def to_base(self, r: int) -> int:
        return self.carrier[r]

    def from_base(self, a: int) -> int:
        try:
            return self._position[a]
        except KeyError:
            raise UnknownElementError(f"{self.base.name(a)} is not regular") from None

    def _check_boolean(self) -> None:
        base, alg = self.base, self.algebra
        for r, s in itertools.product(alg.elements, repeat=2):
            a, b = self.carrier[r], self.carrier[s]
            if self.carrier[alg.meet(r, s)] != base.meet(a, b):
                raise InvariantError("Regular elements are not closed under meet")
            if self.carrier[alg.join(r, s)] != base.neg(base.neg(base.join(a, b))):
                raise InvariantError("Join of regular elements is not ¬¬ of the base join")
        for r in alg.elements:
            a = self.carrier[r]
            if base.meet(a, base.neg(a)) != base.bottom:
                raise InvariantError(f"{base.name(a)} ∧ ¬{base.name(a)} is not bottom")
            if base.neg(base.neg(base.join(a, base.neg(a)))) != base.top:
                raise InvariantError(f"¬¬({base.name(a)} ∨ ¬{base.name(a)}) is not top")
        if not alg.is_boolean:
            raise InvariantError("Regular elements do not form a Boolean algebra")

    def _match_maximal_filters(self) -> dict[int, int]:
        base, alg = self.base, self.algebra
        mapping = {p: self.from_base(base.neg(base.neg(p))) for p in base.atoms}
        if sorted(mapping.values()) != sorted(alg.atoms):
            raise InvariantError("Maximal filters do not match ultrafilters of regular elements")
        # the restricted filter must be the principal ultrafilter at the matched atom
        for p, r in mapping.items():
            restricted = {self._position[a] for a in self.carrier if base.le(p, a)}
            if restricted != set(alg.up_set(r)):
                raise InvariantError(f"Restriction of up:{base.name(p)} is not an ultrafilter")
        return mapping

    def basic_open(self, a: int) -> frozenset[int]:
        """``D(U)``: the maximal filters (named by atom) that contain ``U``."""
        return frozenset(p for p in self.base.atoms if self.base.le(p, a))

    def ultrafilters(self) -> list[Filter]:
        return [Filter(self.algebra, r) for r in self.algebra.atoms]


def regular_algebra(frame: Frame) -> RegularAlgebra:
    """Regular-element Boolean algebra of ``frame`` with its ultrafilter correspondence."""
    return RegularAlgebra(frame)
