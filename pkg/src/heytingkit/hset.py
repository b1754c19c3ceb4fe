"""Heyting-valued sets over a finite frame and their finite topos structure.

An ``HSet`` is a carrier with a symmetric, transitive frame-valued
valuation ``alpha``; ``alpha[a][a]`` is the extent of ``a``. Morphisms are
full tables ``dom × cod → frame``; a representing map, when a morphism was
built from one, is kept only as a derived view in ``HMorphism.via``.

Carrier positions are the working identity of elements. Labels are any
hashable display values (strings for loaded fixtures, tuples for products).
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Hashable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

from .config import DEFAULT_SETTINGS
from .exceptions import (
    ArityMismatchError,
    FrameMismatchError,
    HSetLawError,
    InvariantError,
    NotMorphismError,
    NotStrictError,
    ObjectMismatchError,
    SizeGuardError,
    UnknownParameterError,
    Violation,
)
from .frame import Frame

logger = logging.getLogger(__name__)

Table = tuple[tuple[int, ...], ...]


def _guard(what: str, size: int, limit: int | None) -> None:
    bound = DEFAULT_SETTINGS.max_enumeration if limit is None else limit
    if size > bound:
        raise SizeGuardError(what, size, bound)


def _as_table(rows: Sequence[Sequence[int]], n_rows: int, n_cols: int, what: str) -> Table:
    if len(rows) != n_rows or any(len(r) != n_cols for r in rows):
        raise HSetLawError([Violation("Shape", (what, n_rows, n_cols))], what=what)
    return tuple(tuple(int(x) for x in r) for r in rows)


def hset_violations(frame: Frame, carrier: Sequence[Hashable], alpha: Table) -> list[Violation]:
    """Symmetry and transitivity failures of a valuation, with label witnesses."""
    n = len(carrier)
    found: list[Violation] = []
    for a, b in itertools.combinations(range(n), 2):
        if alpha[a][b] != alpha[b][a]:
            found.append(Violation("Symmetry", (carrier[a], carrier[b])))
    for a, b, c in itertools.product(range(n), repeat=3):
        if not frame.le(frame.meet(alpha[a][b], alpha[b][c]), alpha[a][c]):
            found.append(Violation("Transitivity", (carrier[a], carrier[b], carrier[c])))
    return found


class HSet:
    """A Heyting-valued set ``(A, α)`` over a finite frame."""

    def __init__(
        self,
        frame: Frame,
        carrier: Sequence[Hashable],
        alpha: Sequence[Sequence[int]],
        *,
        check: bool = True,
    ) -> None:
        self.frame = frame
        self.carrier: tuple[Hashable, ...] = tuple(carrier)
        n = len(self.carrier)
        self.alpha: Table = _as_table(alpha, n, n, "valuation")
        self._index = {label: i for i, label in enumerate(self.carrier)}
        if len(self._index) != n:
            raise HSetLawError([Violation("DuplicateLabel", (n - len(self._index),))])
        if any(not 0 <= x < frame.size for row in self.alpha for x in row):
            raise HSetLawError([Violation("NotFrameElement", ())])
        if check:
            violations = hset_violations(frame, self.carrier, self.alpha)
            if violations:
                raise HSetLawError(violations)

    @property
    def size(self) -> int:
        return len(self.carrier)

    @property
    def elements(self) -> range:
        return range(len(self.carrier))

    def index(self, label: Hashable) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise UnknownParameterError(f"{label!r} is not a carrier element") from None

    def label(self, a: int) -> Hashable:
        return self.carrier[a]

    def extent(self, a: int) -> int:
        return self.alpha[a][a]

    def value(self, a: int, b: int) -> int:
        return self.alpha[a][b]

    def is_global(self, a: int) -> bool:
        return self.alpha[a][a] == self.frame.top

    def singleton_of(self, a: int) -> tuple[int, ...]:
        """The singleton ``σ_a = α(a, -)``."""
        return self.alpha[a]

    @cached_property
    def separation_witness(self) -> tuple[int, int] | None:
        """A pair ``a ≠ b`` with ``α(a) = α(b) = α(a,b)``, if any."""
        for a, b in itertools.combinations(self.elements, 2):
            if self.alpha[a][a] == self.alpha[b][b] == self.alpha[a][b]:
                return (a, b)
        return None

    @property
    def is_separated(self) -> bool:
        return self.separation_witness is None

    def completeness_witness(self, limit: int | None = None) -> tuple[int, ...] | None:
        """A singleton that is not of the form ``σ_a``, or None when complete.

        Non-separated sets return the row of their separation witness.
        """
        if self.separation_witness is not None:
            return self.alpha[self.separation_witness[0]]
        rows = set(self.alpha)
        for sigma in singletons(self, limit=limit):
            if sigma not in rows:
                return sigma
        return None

    def is_complete(self, limit: int | None = None) -> bool:
        return self.completeness_witness(limit) is None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HSet):
            return NotImplemented
        return self is other or (
            self.frame == other.frame and self.carrier == other.carrier and self.alpha == other.alpha
        )

    def __hash__(self) -> int:
        return hash((self.carrier, self.alpha))

    def __repr__(self) -> str:
        return f"HSet({self.size} elements over {self.frame!r})"


@dataclass(frozen=True)
class HSetReport:
    """Outcome of :func:`validate_hset`."""

    hset: HSet | None
    violations: tuple[Violation, ...]
    separated: bool | None = None
    complete: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_hset(
    frame: Frame,
    carrier: Sequence[Hashable],
    alpha: Sequence[Sequence[int]],
    *,
    limit: int | None = None,
) -> HSetReport:
    """Validate a candidate valuation and report separatedness and completeness.

    Law violations are returned, not raised. Completeness is None when the
    singleton enumeration would exceed the size guard.
    """
    table = _as_table(alpha, len(carrier), len(carrier), "valuation")
    violations = hset_violations(frame, tuple(carrier), table)
    if violations:
        return HSetReport(None, tuple(violations))
    hset = HSet(frame, carrier, table, check=False)
    try:
        complete: bool | None = hset.is_complete(limit)
    except SizeGuardError:
        logger.debug("Skipping completeness scan for %r: size guard", hset)
        complete = None
    return HSetReport(hset, (), hset.is_separated, complete)


# -- Predicates on carriers --


def _predicates(
    hset: HSet,
    *,
    singleton: bool,
    limit: int | None,
    bound: Sequence[int] | None = None,
) -> Iterator[tuple[int, ...]]:
    frame = hset.frame
    n = hset.size
    _guard("predicates", frame.size**n, limit)
    alpha = hset.alpha
    caps = bound if bound is not None else [alpha[a][a] for a in range(n)]
    choices = [[v for v in frame.elements if frame.le(v, caps[a])] for a in range(n)]
    chosen = [0] * n
    le, meet = frame.le, frame.meet

    def fits(a: int, v: int) -> bool:
        for b in range(a):
            w = chosen[b]
            if not le(meet(v, alpha[a][b]), w) or not le(meet(w, alpha[b][a]), v):
                return False
            if singleton and not le(meet(v, w), alpha[a][b]):
                return False
        return True

    def extend(a: int) -> Iterator[tuple[int, ...]]:
        if a == n:
            yield tuple(chosen)
            return
        for v in choices[a]:
            if fits(a, v):
                chosen[a] = v
                yield from extend(a + 1)

    yield from extend(0)


def singletons(hset: HSet, *, limit: int | None = None) -> Iterator[tuple[int, ...]]:
    """Every singleton on ``hset``, in ascending lexicographic order of tables."""
    return _predicates(hset, singleton=True, limit=limit)


def strict_relations(hset: HSet, *, limit: int | None = None) -> Iterator[tuple[int, ...]]:
    """Every strict relation on ``hset``, in ascending lexicographic order of tables."""
    return _predicates(hset, singleton=False, limit=limit)


def strict_violations(hset: HSet, values: Sequence[int]) -> list[Violation]:
    frame, alpha = hset.frame, hset.alpha
    found = []
    for a in hset.elements:
        if not frame.le(values[a], alpha[a][a]):
            found.append(Violation("ExtentBound", (hset.label(a),)))
    for a, b in itertools.product(hset.elements, repeat=2):
        if not frame.le(frame.meet(values[a], alpha[a][b]), values[b]):
            found.append(Violation("NotStrict", (hset.label(a), hset.label(b))))
    return found


@dataclass(frozen=True, eq=False)
class StrictRelation:
    """A strict relation ``σ`` on an HSet: ``σ(a) ∧ α(a,a') ≤ σ(a')`` and ``σ ≤ extent``."""

    base: HSet
    values: tuple[int, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        if len(self.values) != self.base.size:
            raise NotStrictError([Violation("Shape", (len(self.values), self.base.size))])
        if self.check:
            violations = strict_violations(self.base, self.values)
            if violations:
                raise NotStrictError(violations)

    def __call__(self, a: int) -> int:
        return self.values[a]

    @property
    def is_singleton(self) -> bool:
        frame, alpha = self.base.frame, self.base.alpha
        return all(
            frame.le(frame.meet(self.values[a], self.values[b]), alpha[a][b])
            for a, b in itertools.combinations(self.base.elements, 2)
        )

    def le(self, other: StrictRelation) -> bool:
        frame = self.base.frame
        return all(frame.le(x, y) for x, y in zip(self.values, other.values, strict=True))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StrictRelation):
            return NotImplemented
        return self.values == other.values and self.base == other.base

    def __hash__(self) -> int:
        return hash(self.values)


# -- Morphisms --


def morphism_violations(dom: HSet, cod: HSet, table: Table) -> list[Violation]:
    """Failures of the bimodule, single-valuedness and totality laws."""
    frame = dom.frame
    le, meet = frame.le, frame.meet
    alpha, beta = dom.alpha, cod.alpha
    found: list[Violation] = []
    for a in dom.elements:
        row = table[a]
        for b, b2 in itertools.product(cod.elements, repeat=2):
            if not le(meet(row[b], row[b2]), beta[b][b2]):
                found.append(Violation("SingleValued", (dom.label(a), cod.label(b), cod.label(b2))))
            if not le(meet(row[b], beta[b][b2]), row[b2]):
                found.append(Violation("Bimodule", (dom.label(a), cod.label(b), cod.label(b2))))
        if frame.join_all(row) != alpha[a][a]:
            found.append(Violation("Total", (dom.label(a),)))
    for a, a2 in itertools.product(dom.elements, repeat=2):
        for b in cod.elements:
            if not le(meet(alpha[a][a2], table[a][b]), table[a2][b]):
                found.append(Violation("Bimodule", (dom.label(a), dom.label(a2), cod.label(b))))
    return found


class HMorphism:
    """A morphism ``φ : (A, α) → (B, β)`` stored as its full table."""

    def __init__(
        self,
        dom: HSet,
        cod: HSet,
        table: Sequence[Sequence[int]],
        *,
        check: bool = True,
        via: Sequence[int] | None = None,
    ) -> None:
        if dom.frame != cod.frame:
            raise FrameMismatchError("Domain and codomain live over different frames")
        self.dom = dom
        self.cod = cod
        self.table: Table = _as_table(table, dom.size, cod.size, "morphism")
        self.via: tuple[int, ...] | None = tuple(via) if via is not None else None
        if check:
            violations = morphism_violations(dom, cod, self.table)
            if violations:
                raise NotMorphismError(violations)

    @property
    def frame(self) -> Frame:
        return self.dom.frame

    def value(self, a: int, b: int) -> int:
        return self.table[a][b]

    @classmethod
    def represented_by(
        cls, dom: HSet, cod: HSet, h: Sequence[int], *, check: bool = True
    ) -> HMorphism:
        """The morphism ``φ(a,b) = α(a) ∧ β(ha, b)`` represented by the map ``h``.

        Raises:
            NotMorphismError: If ``α(a,a') ≤ β(ha,ha')`` fails for some pair.
        """
        frame = dom.frame
        h = tuple(h)
        if len(h) != dom.size:
            raise NotMorphismError([Violation("Shape", (len(h), dom.size))])
        if check:
            bad = [
                Violation("NotRepresentable", (dom.label(a), dom.label(a2)))
                for a, a2 in itertools.product(dom.elements, repeat=2)
                if not frame.le(dom.alpha[a][a2], cod.alpha[h[a]][h[a2]])
            ]
            if bad:
                raise NotMorphismError(bad)
        table = [
            [frame.meet(dom.alpha[a][a], cod.alpha[h[a]][b]) for b in cod.elements]
            for a in dom.elements
        ]
        return cls(dom, cod, table, check=False, via=h)

    @classmethod
    def identity(cls, hset: HSet) -> HMorphism:
        return cls(hset, hset, hset.alpha, check=False, via=tuple(hset.elements))

    def transpose(self, *, check: bool = True) -> HMorphism:
        rows = [[self.table[a][b] for a in self.dom.elements] for b in self.cod.elements]
        return HMorphism(self.cod, self.dom, rows, check=check)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HMorphism):
            return NotImplemented
        return self.table == other.table and self.dom == other.dom and self.cod == other.cod

    def __hash__(self) -> int:
        return hash(self.table)

    def __repr__(self) -> str:
        return f"HMorphism({self.dom.size} -> {self.cod.size})"


def identity(hset: HSet) -> HMorphism:
    return HMorphism.identity(hset)


def compose(phi: HMorphism, psi: HMorphism, *, check: bool = False) -> HMorphism:
    """The composite ``ψ ∘ φ``: ``(ψφ)(a,c) = ⋁_b φ(a,b) ∧ ψ(b,c)``.

    When both morphisms were built from representing maps the composite is
    built from the composed map, which represents it.

    Raises:
        FrameMismatchError: If the morphisms live over different frames.
        ObjectMismatchError: If ``cod(φ) ≠ dom(ψ)``.
    """
    if phi.frame != psi.frame:
        raise FrameMismatchError("Cannot compose morphisms over different frames")
    if phi.cod is not psi.dom and phi.cod != psi.dom:
        raise ObjectMismatchError("Codomain of the first morphism is not the domain of the second")
    if phi.via is not None and psi.via is not None:
        k = psi.via
        result = HMorphism.represented_by(
            phi.dom, psi.cod, [k[b] for b in phi.via], check=False
        )
        if check:
            compose_tables(phi, psi, check=True)
        return result
    return compose_tables(phi, psi, check=check)


def compose_tables(phi: HMorphism, psi: HMorphism, *, check: bool = False) -> HMorphism:
    """The composite by the join formula, ignoring representing maps."""
    frame = phi.frame
    meet, join_all = frame.meet, frame.join_all
    mid = phi.cod.elements
    table = [
        [join_all(meet(phi.table[a][b], psi.table[b][c]) for b in mid) for c in psi.cod.elements]
        for a in phi.dom.elements
    ]
    return HMorphism(phi.dom, psi.cod, table, check=check)


def is_monic(phi: HMorphism) -> bool:
    frame, alpha = phi.frame, phi.dom.alpha
    return all(
        frame.le(frame.meet(phi.table[a][b], phi.table[a2][b]), alpha[a][a2])
        for a, a2 in itertools.combinations(phi.dom.elements, 2)
        for b in phi.cod.elements
    )


def is_epic(phi: HMorphism) -> bool:
    frame = phi.frame
    return all(
        frame.join_all(phi.table[a][b] for a in phi.dom.elements) == phi.cod.alpha[b][b]
        for b in phi.cod.elements
    )


def representing_maps(phi: HMorphism, *, limit: int | None = None) -> list[tuple[int, ...]]:
    """Every map ``h`` with ``φ(a,b) ≤ β(ha, b)``, in lexicographic order."""
    frame, beta = phi.frame, phi.cod.alpha
    candidates = [
        [
            c
            for c in phi.cod.elements
            if all(frame.le(phi.table[a][b], beta[c][b]) for b in phi.cod.elements)
        ]
        for a in phi.dom.elements
    ]
    _guard("representing maps", math.prod(len(c) for c in candidates), limit)
    return [tuple(h) for h in itertools.product(*candidates)]


def map_iso_failures(dom: HSet, cod: HSet, h: Sequence[int]) -> list[Violation]:
    """Why an extent-preserving map ``h`` fails to represent an isomorphism.

    The map must preserve extents, satisfy ``α(a,a') = β(ha,ha')``, and reach
    every ``b`` in the sense ``β(b) = ⋁_a β(ha,b)``. Empty means iso.
    """
    frame = dom.frame
    found = [
        Violation("ExtentNotPreserved", (dom.label(a),))
        for a in dom.elements
        if dom.extent(a) != cod.extent(h[a])
    ]
    found += [
        Violation("NotIsometric", (dom.label(a), dom.label(a2)))
        for a, a2 in itertools.product(dom.elements, repeat=2)
        if dom.alpha[a][a2] != cod.alpha[h[a]][h[a2]]
    ]
    found += [
        Violation("NotCovering", (cod.label(b),))
        for b in cod.elements
        if frame.join_all(cod.alpha[h[a]][b] for a in dom.elements) != cod.extent(b)
    ]
    return found


@dataclass(frozen=True)
class MorphismClass:
    """Result of :func:`classify_morphism`."""

    mono: bool
    epi: bool
    iso: bool
    inverse: HMorphism | None
    representing_maps: tuple[tuple[int, ...], ...]


def classify_morphism(phi: HMorphism, *, limit: int | None = None) -> MorphismClass:
    """Decide mono/epi/iso and list the representing maps of ``φ``."""
    mono, epi = is_monic(phi), is_epic(phi)
    inverse = None
    if mono and epi:
        inverse = phi.transpose()
        if compose(phi, inverse) != HMorphism.identity(phi.dom):
            raise InvariantError("Transpose of an iso is not its inverse")
    return MorphismClass(mono, epi, mono and epi, inverse, tuple(representing_maps(phi, limit=limit)))


def hom_set(dom: HSet, cod: HSet, *, limit: int | None = None) -> list[HMorphism]:
    """All morphisms ``dom → cod`` by row-wise singleton enumeration.

    Each row ``φ(a, -)`` is a singleton on ``cod`` with join ``α(a)``; rows are
    then combined subject to ``α(a,a') ∧ φ(a,b) ≤ φ(a',b)``.
    """
    if dom.frame != cod.frame:
        raise FrameMismatchError("Cannot enumerate morphisms across frames")
    frame = dom.frame
    rows_by_extent: dict[int, list[tuple[int, ...]]] = {}
    for sigma in singletons(cod, limit=limit):
        rows_by_extent.setdefault(frame.join_all(sigma), []).append(sigma)
    options = [rows_by_extent.get(dom.alpha[a][a], []) for a in dom.elements]
    _guard("morphisms", math.prod(len(o) for o in options), limit)

    le, meet, alpha = frame.le, frame.meet, dom.alpha
    chosen: list[tuple[int, ...]] = []
    found: list[HMorphism] = []

    def compatible(a: int, row: tuple[int, ...]) -> bool:
        for a2, other in enumerate(chosen):
            for b in cod.elements:
                if not le(meet(alpha[a][a2], row[b]), other[b]):
                    return False
                if not le(meet(alpha[a2][a], other[b]), row[b]):
                    return False
        return True

    def extend(a: int) -> None:
        if a == dom.size:
            found.append(HMorphism(dom, cod, chosen, check=False))
            return
        for row in options[a]:
            if compatible(a, row):
                chosen.append(row)
                extend(a + 1)
                chosen.pop()

    extend(0)
    return found


# -- Completion --


@dataclass(frozen=True)
class Completion:
    """The completion ``Ã`` of an HSet with the canonical iso pair."""

    hset: HSet
    unit: HMorphism  # A → Ã, (a, σ) ↦ σ(a)
    counit: HMorphism  # Ã → A, (σ, a) ↦ σ(a)


def completion(hset: HSet, *, limit: int | None = None) -> Completion:
    """Complete ``hset`` by its singletons.

    The carrier of ``Ã`` is every singleton on ``A`` (labelled by its table
    of element names) and ``α̃(σ,τ) = ⋁_a σ(a) ∧ τ(a)``.
    """
    frame = hset.frame
    sigmas = list(singletons(hset, limit=limit))
    labels = [tuple(frame.name(v) for v in s) for s in sigmas]
    alpha = [
        [frame.join_all(frame.meet(x, y) for x, y in zip(s, t, strict=True)) for t in sigmas]
        for s in sigmas
    ]
    completed = HSet(frame, labels, alpha)
    counit = HMorphism(completed, hset, sigmas)
    unit = counit.transpose()
    if not (is_monic(counit) and is_epic(counit)):
        raise InvariantError("Completion map is not an isomorphism")
    logger.debug("Completed %r to %d singletons", hset, len(sigmas))
    return Completion(completed, unit, counit)


# -- Finite limits --


@dataclass(frozen=True)
class Limit:
    """A limit object with its leg morphisms."""

    kind: str
    hset: HSet
    legs: tuple[HMorphism, ...]


def terminal(frame: Frame) -> Limit:
    return Limit("terminal", HSet(frame, ["*"], [[frame.top]], check=False), ())


def product(factors: Sequence[HSet], frame: Frame | None = None) -> Limit:
    """Product with pointwise-meet valuation and canonical projections.

    The carrier lists component index tuples in ``itertools.product`` order;
    labels are tuples of component labels.
    """
    if not factors:
        if frame is None:
            raise ArityMismatchError("An empty product needs an explicit frame")
        return terminal(frame)
    frame = factors[0].frame
    if any(f.frame != frame for f in factors):
        raise FrameMismatchError("Product factors live over different frames")
    tuples = list(itertools.product(*(f.elements for f in factors)))
    labels = [tuple(f.label(i) for f, i in zip(factors, t, strict=True)) for t in tuples]
    meet_all = frame.meet_all
    alpha = [
        [meet_all(f.alpha[x][y] for f, x, y in zip(factors, s, t, strict=True)) for t in tuples]
        for s in tuples
    ]
    obj = HSet(frame, labels, alpha, check=False)
    legs = tuple(
        HMorphism.represented_by(obj, f, [t[i] for t in tuples], check=False)
        for i, f in enumerate(factors)
    )
    return Limit("product", obj, legs)


def power(hset: HSet, n: int) -> Limit:
    """The ``n``-fold product of ``hset`` with itself."""
    return product([hset] * n, hset.frame)


def pairing(target: Limit, morphisms: Sequence[HMorphism]) -> HMorphism:
    """The morphism ``⟨φ_1, …, φ_m⟩`` into a product, ``(a, b) ↦ ⋀_i φ_i(a, b_i)``."""
    if len(morphisms) != len(target.legs):
        raise ArityMismatchError("Pairing needs one morphism per product leg")
    if target.kind == "terminal":
        raise ArityMismatchError("Use terminal_map for pairings into the terminal object")
    dom = morphisms[0].dom
    frame = dom.frame
    tuples = list(itertools.product(*(leg.cod.elements for leg in target.legs)))
    table = [
        [frame.meet_all(phi.table[a][t[i]] for i, phi in enumerate(morphisms)) for t in tuples]
        for a in dom.elements
    ]
    via = None
    if all(phi.via is not None for phi in morphisms):
        position = {t: k for k, t in enumerate(tuples)}
        via = [position[tuple(phi.via[a] for phi in morphisms)] for a in dom.elements]
    return HMorphism(dom, target.hset, table, check=False, via=via)


def terminal_map(hset: HSet, target: Limit | None = None) -> HMorphism:
    """The unique morphism into the terminal object, ``(a, *) ↦ α(a)``."""
    obj = target.hset if target is not None else terminal(hset.frame).hset
    return HMorphism(hset, obj, [[hset.alpha[a][a]] for a in hset.elements], check=False, via=[0] * hset.size)


def equalizer(phi: HMorphism, psi: HMorphism) -> Limit:
    """Equalizer ``(A, δ)`` with ``δ(a,a') = α(a,a') ∧ ⋁_b φ(a,b) ∧ ψ(a,b)``."""
    if phi.frame != psi.frame:
        raise FrameMismatchError("Equalizer of morphisms over different frames")
    if phi.dom != psi.dom or phi.cod != psi.cod:
        raise ObjectMismatchError("Equalizer needs parallel morphisms")
    frame, dom = phi.frame, phi.dom
    agree = [
        frame.join_all(frame.meet(x, y) for x, y in zip(phi.table[a], psi.table[a], strict=True))
        for a in dom.elements
    ]
    alpha = [[frame.meet(dom.alpha[a][a2], agree[a]) for a2 in dom.elements] for a in dom.elements]
    obj = HSet(frame, dom.carrier, alpha, check=False)
    leg = HMorphism.represented_by(obj, dom, tuple(dom.elements), check=False)
    return Limit("equalizer", obj, (leg,))


def pullback(phi: HMorphism, psi: HMorphism) -> Limit:
    """Pullback of ``A --φ--> C <--ψ-- B`` on ``A × B``."""
    if phi.frame != psi.frame:
        raise FrameMismatchError("Pullback of morphisms over different frames")
    if phi.cod != psi.cod:
        raise ObjectMismatchError("Pullback needs a common codomain")
    frame = phi.frame
    a_set, b_set = phi.dom, psi.dom
    pairs = list(itertools.product(a_set.elements, b_set.elements))
    meet, join_all = frame.meet, frame.join_all
    agree = {
        (a, b): join_all(meet(phi.table[a][c], psi.table[b][c]) for c in phi.cod.elements)
        for a, b in pairs
    }
    alpha = [
        [
            frame.meet_all((a_set.alpha[a][a2], b_set.alpha[b][b2], agree[(a, b)]))
            for a2, b2 in pairs
        ]
        for a, b in pairs
    ]
    labels = [(a_set.label(a), b_set.label(b)) for a, b in pairs]
    obj = HSet(frame, labels, alpha, check=False)
    legs = (
        HMorphism.represented_by(obj, a_set, [a for a, _ in pairs], check=False),
        HMorphism.represented_by(obj, b_set, [b for _, b in pairs], check=False),
    )
    return Limit("pullback", obj, legs)


def finite_limit(kind: str, *data: object, frame: Frame | None = None, verify: bool = False) -> Limit:
    """Dispatch to the limit constructions; optionally verify the universal property.

    ``kind`` is one of ``terminal`` (data: nothing, pass ``frame``), ``product``
    (data: factor HSets), ``equalizer`` and ``pullback`` (data: two morphisms).
    """
    if kind == "terminal":
        if frame is None:
            raise ArityMismatchError("terminal needs a frame")
        result = terminal(frame)
    elif kind == "product":
        result = product(list(data), frame)  # type: ignore[arg-type]
    elif kind == "equalizer":
        if len(data) != 2:
            raise ArityMismatchError("equalizer takes two morphisms")
        result = equalizer(*data)  # type: ignore[arg-type]
    elif kind == "pullback":
        if len(data) != 2:
            raise ArityMismatchError("pullback takes two morphisms")
        result = pullback(*data)  # type: ignore[arg-type]
    else:
        raise ArityMismatchError(f"Unknown limit kind {kind!r}")
    if verify:
        failures = verify_limit(result, data)
        if failures:
            raise InvariantError(f"{kind} fails its universal property: {failures[0]}")
    return result


def verify_limit(
    limit: Limit, data: Sequence[object], tests: Sequence[HSet] | None = None, *, max_size: int | None = None
) -> list[str]:
    """Check the universal property against every cone from each test object.

    Test objects default to the terminal object and each object of the
    diagram. Returns human-readable failures (empty when the property holds).
    """
    frame = limit.hset.frame
    if limit.kind == "product":
        diagram = list(data)
    elif limit.kind in ("equalizer", "pullback"):
        diagram = [m.dom for m in data]  # type: ignore[attr-defined]
    else:
        diagram = []
    if tests is None:
        tests = [terminal(frame).hset, *diagram]
    failures: list[str] = []
    for test in tests:
        into_limit = hom_set(test, limit.hset, limit=max_size)
        induced = [tuple(compose(u, leg) for leg in limit.legs) for u in into_limit]
        for cone in _cones(limit, data, test, max_size):
            hits = sum(1 for legs in induced if legs == cone)
            if hits != 1:
                failures.append(f"cone from {test!r} has {hits} mediating morphisms")
        if limit.kind == "terminal" and len(into_limit) != 1:
            failures.append(f"{len(into_limit)} morphisms from {test!r} into the terminal object")
    return failures


def _cones(limit: Limit, data: Sequence[object], test: HSet, max_size: int | None) -> Iterator[tuple[HMorphism, ...]]:
    if limit.kind == "product":
        choices = [hom_set(test, f, limit=max_size) for f in data]  # type: ignore[arg-type]
        yield from itertools.product(*choices)
    elif limit.kind == "equalizer":
        phi, psi = data  # type: ignore[misc]
        for g in hom_set(test, phi.dom, limit=max_size):
            if compose(g, phi) == compose(g, psi):
                yield (g,)
    elif limit.kind == "pullback":
        phi, psi = data  # type: ignore[misc]
        lefts = hom_set(test, phi.dom, limit=max_size)
        rights = hom_set(test, psi.dom, limit=max_size)
        for g, k in itertools.product(lefts, rights):
            if compose(g, phi) == compose(k, psi):
                yield (g, k)


# -- Subobjects --


class SubobjectLattice:
    """The frame ``𝒫(A, α)`` of strict relations on ``A``."""

    def __init__(self, hset: HSet) -> None:
        self.hset = hset
        self.frame = hset.frame

    def relation(self, values: Sequence[int], *, check: bool = True) -> StrictRelation:
        return StrictRelation(self.hset, tuple(values), check)

    @property
    def top(self) -> StrictRelation:
        return StrictRelation(self.hset, tuple(self.hset.extent(a) for a in self.hset.elements), False)

    @property
    def bottom(self) -> StrictRelation:
        return StrictRelation(self.hset, (self.frame.bottom,) * self.hset.size, False)

    def elements(self, *, limit: int | None = None) -> list[StrictRelation]:
        return [StrictRelation(self.hset, s, False) for s in strict_relations(self.hset, limit=limit)]

    def meet(self, s: StrictRelation, t: StrictRelation) -> StrictRelation:
        m = self.frame.meet
        return StrictRelation(self.hset, tuple(m(x, y) for x, y in zip(s.values, t.values, strict=True)), False)

    def join(self, s: StrictRelation, t: StrictRelation) -> StrictRelation:
        j = self.frame.join
        return StrictRelation(self.hset, tuple(j(x, y) for x, y in zip(s.values, t.values, strict=True)), False)

    def implies(self, s: StrictRelation, t: StrictRelation) -> StrictRelation:
        """``(σ ⇒ τ)(a) = α(a) ∧ (σ(a) ⇒ τ(a))``."""
        f, hset = self.frame, self.hset
        return StrictRelation(
            hset,
            tuple(f.meet(hset.extent(a), f.implies(s(a), t(a))) for a in hset.elements),
            False,
        )

    def _restricted(self, sigma: StrictRelation) -> HSet:
        hset, f = self.hset, self.frame
        return HSet(
            self.frame,
            hset.carrier,
            [[f.meet(sigma(a), hset.alpha[a][b]) for b in hset.elements] for a in hset.elements],
            check=False,
        )

    def to_mono(self, sigma: StrictRelation) -> HMorphism:
        """``ι_σ : (A, α_σ) ↣ (A, α)`` represented by the identity map."""
        return HMorphism.represented_by(self._restricted(sigma), self.hset, tuple(self.hset.elements), check=False)

    def restrict(self, sigma: StrictRelation, phi: HMorphism) -> HMorphism:
        """The composite ``φ ∘ ι_σ`` for ``φ`` out of ``A``.

        ``ι_σ`` is represented by the identity, so the composite is
        ``(a, c) ↦ σ(a) ∧ φ(a, c)`` and no join over ``A`` is needed.
        """
        if phi.dom != self.hset:
            raise ObjectMismatchError("Morphism does not start at this object")
        f = self.frame
        table = [[f.meet(sigma(a), x) for x in phi.table[a]] for a in self.hset.elements]
        return HMorphism(self._restricted(sigma), phi.cod, table, check=False)

    def from_mono(self, phi: HMorphism) -> StrictRelation:
        """``ρ_φ(a) = ⋁_b φ(b, a)`` for any morphism into ``A``."""
        if phi.cod != self.hset:
            raise ObjectMismatchError("Morphism does not land in this object")
        f = self.frame
        return StrictRelation(
            self.hset,
            tuple(f.join_all(phi.table[b][a] for b in phi.dom.elements) for a in self.hset.elements),
            False,
        )

    def image(self, phi: HMorphism) -> tuple[HMorphism, HMorphism]:
        """Factor ``φ`` as an epi onto ``(A, α_ρφ)`` followed by ``ι_ρφ``."""
        rho = self.from_mono(phi)
        mono = self.to_mono(rho)
        epi = HMorphism(phi.dom, mono.dom, phi.table, check=False)
        return epi, mono


def subobjects(hset: HSet) -> SubobjectLattice:
    return SubobjectLattice(hset)


# -- Change of base --


class ChangeOfBase:
    """Pullback ``φ*`` and its adjoints ``∃_φ ⊣ φ* ⊣ ∀_φ`` along ``φ : B → A``."""

    def __init__(self, phi: HMorphism) -> None:
        self.phi = phi
        self.source = SubobjectLattice(phi.cod)  # 𝒫(A)
        self.target = SubobjectLattice(phi.dom)  # 𝒫(B)

    def pullback(self, sigma: StrictRelation) -> StrictRelation:
        """``(φ*σ)(b) = ⋁_a φ(b,a) ∧ σ(a)``, checked against the meet form."""
        phi, f = self.phi, self.phi.frame
        cod = phi.cod.elements
        joined = tuple(
            f.join_all(f.meet(phi.table[b][a], sigma(a)) for a in cod) for b in phi.dom.elements
        )
        met = tuple(
            f.meet(phi.dom.extent(b), f.meet_all(f.implies(phi.table[b][a], sigma(a)) for a in cod))
            for b in phi.dom.elements
        )
        if joined != met:
            raise InvariantError("Join and meet forms of the pullback disagree")
        return StrictRelation(phi.dom, joined, False)

    def exists(self, tau: StrictRelation) -> StrictRelation:
        """``(∃_φ τ)(a) = ⋁_b φ(b,a) ∧ τ(b)``."""
        phi, f = self.phi, self.phi.frame
        return StrictRelation(
            phi.cod,
            tuple(
                f.join_all(f.meet(phi.table[b][a], tau(b)) for b in phi.dom.elements)
                for a in phi.cod.elements
            ),
            False,
        )

    def forall(self, tau: StrictRelation) -> StrictRelation:
        """``(∀_φ τ)(a) = α(a) ∧ ⋀_b [φ(b,a) ⇒ τ(b)]``."""
        phi, f = self.phi, self.phi.frame
        return StrictRelation(
            phi.cod,
            tuple(
                f.meet(
                    phi.cod.extent(a),
                    f.meet_all(f.implies(phi.table[b][a], tau(b)) for b in phi.dom.elements),
                )
                for a in phi.cod.elements
            ),
            False,
        )

    def adjunction_failures(self, *, limit: int | None = None) -> list[str]:
        """Check ``∃ ⊣ φ* ⊣ ∀`` on all strict relations of both objects."""
        found = []
        sigmas = self.source.elements(limit=limit)
        taus = self.target.elements(limit=limit)
        for sigma, tau in itertools.product(sigmas, taus):
            if self.exists(tau).le(sigma) != tau.le(self.pullback(sigma)):
                found.append(f"∃ ⊣ φ* fails at σ={sigma.values}, τ={tau.values}")
            if self.pullback(sigma).le(tau) != sigma.le(self.forall(tau)):
                found.append(f"φ* ⊣ ∀ fails at σ={sigma.values}, τ={tau.values}")
        return found


def change_of_base(phi: HMorphism) -> ChangeOfBase:
    return ChangeOfBase(phi)


# -- Classifier and power object --


class HigherOrder:
    """Subobject classifier ``Ω`` and power object ``P(A)`` for one HSet."""

    def __init__(self, hset: HSet, *, limit: int | None = None) -> None:
        self.hset = hset
        frame = hset.frame
        self.frame = frame
        self.omega = HSet(
            frame,
            list(frame.names),
            [[frame.iff(u, v) for v in frame.elements] for u in frame.elements],
            check=False,
        )
        one = terminal(frame).hset
        self.truth = HMorphism(one, self.omega, [list(frame.elements)], check=False)
        self._limit = limit

    def characteristic(self, sigma: StrictRelation) -> HMorphism:
        """``χ_σ(a, U) = α(a) ∧ (U ↔ σ(a))``."""
        f, hset = self.frame, self.hset
        table = [
            [f.meet(hset.extent(a), f.iff(u, sigma(a))) for u in f.elements] for a in hset.elements
        ]
        return HMorphism(hset, self.omega, table, check=False)

    def classified(self, chi: HMorphism) -> StrictRelation:
        """The pullback of ``t`` along ``χ``: ``σ(a) = ⋁_U χ(a,U) ∧ U``."""
        f = self.frame
        return StrictRelation(
            self.hset,
            tuple(f.join_all(f.meet(chi.table[a][u], u) for u in f.elements) for a in self.hset.elements),
            False,
        )

    @cached_property
    def power_object(self) -> HSet:
        """Strict relations on ``A`` with ``ᾱ(σ,τ) = ⋀_a σ(a) ↔ τ(a)``."""
        f = self.frame
        rels = list(strict_relations(self.hset, limit=self._limit))
        labels = [tuple(f.name(v) for v in s) for s in rels]
        alpha = [
            [f.meet_all(f.iff(x, y) for x, y in zip(s, t, strict=True)) for t in rels] for s in rels
        ]
        return HSet(f, labels, alpha, check=False)

    def _relation_of(self, label: Hashable) -> tuple[int, ...]:
        return tuple(self.frame.index(v) for v in label)  # type: ignore[union-attr]

    def transpose_to_relation(self, phi: HMorphism, product_limit: Limit) -> StrictRelation:
        """``Hom(B, P(A)) → 𝒫(B × A)``: ``θ(b,a) = ⋁_τ φ(b,τ) ∧ τ(a)``."""
        f = self.frame
        taus = [self._relation_of(lbl) for lbl in self.power_object.carrier]
        b_set = phi.dom
        values = []
        for b, a in itertools.product(b_set.elements, self.hset.elements):
            values.append(f.join_all(f.meet(phi.table[b][t], tau[a]) for t, tau in enumerate(taus)))
        return StrictRelation(product_limit.hset, tuple(values))

    def transpose_to_morphism(self, theta: StrictRelation, b_set: HSet) -> HMorphism:
        """``𝒫(B × A) → Hom(B, P(A))``: ``φ(b,τ) = β(b) ∧ ⋀_a θ(b,a) ↔ τ(a)``."""
        f = self.frame
        taus = [self._relation_of(lbl) for lbl in self.power_object.carrier]
        n = self.hset.size
        table = [
            [
                f.meet(
                    b_set.extent(b),
                    f.meet_all(f.iff(theta(b * n + a), tau[a]) for a in self.hset.elements),
                )
                for tau in taus
            ]
            for b in b_set.elements
        ]
        return HMorphism(b_set, self.power_object, table)


def higher_order(hset: HSet, *, limit: int | None = None) -> HigherOrder:
    return HigherOrder(hset, limit=limit)


def relabel(hset: HSet, labels: Callable[[int], Hashable]) -> HSet:
    """Copy of ``hset`` with new labels."""
    return HSet(hset.frame, [labels(a) for a in hset.elements], hset.alpha, check=False)
