"""Presheaves and sheaves of structures on a finite frame.

Sections carry globally unique names. Internally each section is a dense
id; ``where[id]`` is the element it lives over and ``at[U]`` lists the ids
of ``P(U)``. Restriction maps are stored for every comparable pair, filled in
from the given ones by composition when a pair is left out.

The bridge to Heyting-valued sets is :func:`theta`, and a sheaf of
structures becomes a Heyting-valued structure through
:func:`lift_structure`.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from .config import DEFAULT_SETTINGS
from .exceptions import (
    ArityMismatchError,
    AssumptionFailedError,
    EmptyUniverseWarning,
    FrameError,
    ImproperFilterError,
    InvariantError,
    NotFunctorialError,
    PresheafError,
    SizeGuardError,
    UnknownParameterError,
    Violation,
)
from .frame import ElementRef, Filter, Frame
from .hmodel import HStructure
from .hset import HMorphism, HSet, StrictRelation, map_iso_failures, power
from .logic import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaInContext,
    Imp,
    Language,
    Or,
    OrdinaryStructure,
    Rel,
    Term,
    Top,
    Var,
    abstract_parameters,
    structures_isomorphic,
)

logger = logging.getLogger(__name__)

__all__ = [
    "NaturalMap",
    "OrdinaryStructure",
    "Presheaf",
    "PresheafReport",
    "SectionBijection",
    "SheafOfStructures",
    "boolean_power",
    "characteristic_value",
    "covers",
    "discrete_family",
    "forces",
    "global_section_bijection",
    "lift_structure",
    "power_presheaf",
    "product_comparison",
    "sections_and_quotient",
    "structures_isomorphic",
    "theta",
    "theta_mor",
    "validate_presheaf",
]


def _bound(limit: int | None) -> int:
    return DEFAULT_SETTINGS.max_enumeration if limit is None else limit


def _restriction_key(key: str | tuple[ElementRef, ElementRef], frame: Frame) -> tuple[int, int]:
    if isinstance(key, str):
        u, sep, w = key.partition(">")
        if not sep:
            raise PresheafError(f"Restriction key {key!r} must look like 'U>W'")
        return frame.index(u.strip()), frame.index(w.strip())
    u, w = key
    return frame.index(u), frame.index(w)


class Presheaf:
    """A presheaf of finite sets on a finite frame.

    Args:
        frame: The base frame.
        sections: Section names per element (every element must be listed).
        restrictions: ``{"U>W": {section: section}}`` maps for pairs
            ``W ≤ U``. Identities are implied; a missing pair is filled by
            composing through an intermediate element, or uniquely when
            ``P(W)`` has one section or ``P(U)`` is empty.
        check: Verify functoriality.

    Raises:
        PresheafError: If names repeat or a restriction cannot be determined.
        NotFunctorialError: If restrictions do not compose.
    """

    def __init__(
        self,
        frame: Frame,
        sections: Mapping[ElementRef, Sequence[str]],
        restrictions: Mapping[Any, Mapping[str, str]] | None = None,
        *,
        check: bool = True,
    ) -> None:
        self.frame = frame
        per_element: dict[int, list[str]] = {}
        for ref, names in sections.items():
            u = frame.index(ref)
            if u in per_element:
                raise PresheafError(f"Sections of {frame.name(u)} are listed twice")
            per_element[u] = [str(s) for s in names]
        missing = [frame.name(u) for u in frame.elements if u not in per_element]
        if missing:
            raise PresheafError(f"No sections listed for {', '.join(missing)}")

        names: list[str] = []
        where: list[int] = []
        for u in frame.elements:
            for s in per_element[u]:
                names.append(s)
                where.append(u)
        if len(set(names)) != len(names):
            dupes = sorted({s for s in names if names.count(s) > 1})
            raise PresheafError(f"Section names must be unique: {', '.join(dupes)}")
        self.names: tuple[str, ...] = tuple(names)
        self.where: tuple[int, ...] = tuple(where)
        self._ids = {s: i for i, s in enumerate(names)}
        self.at: dict[int, tuple[int, ...]] = {
            u: tuple(i for i, w in enumerate(where) if w == u) for u in frame.elements
        }
        self._res = self._fill_restrictions(restrictions or {})
        self._theta: HSet | None = None
        self._report: PresheafReport | None = None
        if check:
            witness = self.functoriality_witness()
            if witness is not None:
                raise NotFunctorialError(
                    f"Restrictions {witness[0]}>{witness[1]}>{witness[2]} do not compose", witness
                )
        logger.debug("Built presheaf with %d sections", len(names))

    # -- Construction helpers --

    def _fill_restrictions(self, given: Mapping[Any, Mapping[str, str]]) -> dict[tuple[int, int], int]:
        frame = self.frame
        known: dict[tuple[int, int], dict[int, int]] = {}
        for u in frame.elements:
            known[(u, u)] = {i: i for i in self.at[u]}
        for key, mapping in given.items():
            u, w = _restriction_key(key, frame)
            if not frame.le(w, u):
                raise PresheafError(f"Restriction {frame.name(u)}>{frame.name(w)} is not along W ≤ U")
            table: dict[int, int] = {}
            for src, dst in mapping.items():
                a, b = self.section(src), self.section(dst)
                if self.where[a] != u or self.where[b] != w:
                    raise PresheafError(f"Restriction {frame.name(u)}>{frame.name(w)} maps {src} to {dst}")
                table[a] = b
            if set(table) != set(self.at[u]):
                raise PresheafError(f"Restriction {frame.name(u)}>{frame.name(w)} is not total")
            if u == w and any(a != b for a, b in table.items()):
                raise NotFunctorialError(f"Restriction {frame.name(u)}>{frame.name(u)} is not the identity")
            known[(u, w)] = table

        pending = [(u, w) for u in frame.elements for w in frame.down_set(u) if (u, w) not in known]
        while pending:
            progress = False
            for u, w in pending:
                for v in frame.elements:
                    if v in (u, w) or (u, v) not in known or (v, w) not in known:
                        continue
                    first, second = known[(u, v)], known[(v, w)]
                    known[(u, w)] = {a: second[first[a]] for a in self.at[u]}
                    progress = True
                    break
            if not progress:
                for u, w in pending:
                    if len(self.at[w]) == 1 or not self.at[u]:
                        target = self.at[w][0] if self.at[w] else -1
                        known[(u, w)] = {a: target for a in self.at[u]}
                        progress = True
            pending = [p for p in pending if p not in known]
            if not progress:
                u, w = pending[0]
                raise PresheafError(f"No restriction given for {frame.name(u)}>{frame.name(w)}")

        return {(a, w): b for (u, w), table in known.items() for a, b in table.items()}

    @classmethod
    def from_dict(cls, frame: Frame, data: Mapping[str, Any], *, check: bool = True) -> Presheaf:
        """Create from ``{"sections": {U: [names]}, "restrictions": {"U>W": map}}``."""
        try:
            return cls(frame, data["sections"], data.get("restrictions", {}), check=check)
        except KeyError as e:
            raise PresheafError(f"Presheaf data is missing {e}") from e

    def to_dict(self) -> dict[str, Any]:
        frame = self.frame
        return {
            "sections": {frame.name(u): [self.names[i] for i in self.at[u]] for u in frame.elements},
            "restrictions": {
                f"{frame.name(u)}>{frame.name(w)}": {self.names[a]: self.names[self._res[(a, w)]] for a in self.at[u]}
                for u in frame.elements
                for w in frame.elements
                if w != u and frame.le(w, u)
            },
        }

    # -- Access --

    @property
    def size(self) -> int:
        return len(self.names)

    def section(self, ref: str | int) -> int:
        if isinstance(ref, int) and not isinstance(ref, bool):
            if 0 <= ref < self.size:
                return ref
        elif ref in self._ids:
            return self._ids[ref]
        raise UnknownParameterError(f"Unknown section {ref!r}")

    def res(self, a: int, w: int) -> int:
        """Restrict section id ``a`` to ``w``."""
        try:
            return self._res[(a, w)]
        except KeyError:
            raise PresheafError(
                f"{self.names[a]} lives over {self.frame.name(self.where[a])}, not above {self.frame.name(w)}"
            ) from None

    def restrict(self, u: ElementRef, w: ElementRef, section: str | int) -> str:
        """``a|_W`` for a section ``a ∈ P(U)``, by name."""
        a = self.section(section)
        if self.where[a] != self.frame.index(u):
            raise PresheafError(f"{self.names[a]} is not a section over {u}")
        return self.names[self.res(a, self.frame.index(w))]

    def functoriality_witness(self) -> tuple[str, str, str] | None:
        frame = self.frame
        for u in frame.elements:
            for v in frame.down_set(u):
                for w in frame.down_set(v):
                    for a in self.at[u]:
                        if self._res[(self._res[(a, v)], w)] != self._res[(a, w)]:
                            return frame.name(u), frame.name(v), frame.name(w)
        return None

    @property
    def report(self) -> PresheafReport:
        if self._report is None:
            self._report = validate_presheaf(self)
        return self._report

    def __repr__(self) -> str:
        return f"Presheaf({self.size} sections over {self.frame!r})"


# -- Covers and the sheaf condition --


def covers(frame: Frame, u: int, *, limit: int | None = None) -> list[tuple[int, ...]]:
    """Antichains of nonzero elements below ``u`` with join ``u``.

    The empty cover of bottom is the empty antichain.
    """
    below = sorted(w for w in frame.down_set(u) if w != frame.bottom)
    bound = _bound(limit)
    if 2 ** len(below) > bound:
        raise SizeGuardError("covers", 2 ** len(below), bound)
    found = []
    for r in range(len(below) + 1):
        for combo in itertools.combinations(below, r):
            if any(frame.le(a, b) or frame.le(b, a) for a, b in itertools.combinations(combo, 2)):
                continue
            if frame.join_all(combo) == u:
                found.append(combo)
    return found


def _compatible_families(p: Presheaf, cover: Sequence[int], bound: int) -> Iterator[tuple[int, ...]]:
    frame = p.frame
    size = math.prod(len(p.at[w]) for w in cover)
    if size > bound:
        raise SizeGuardError("compatible families", size, bound)
    chosen: list[int] = []

    def extend(i: int) -> Iterator[tuple[int, ...]]:
        if i == len(cover):
            yield tuple(chosen)
            return
        for a in p.at[cover[i]]:
            if all(
                p.res(a, frame.meet(cover[i], cover[j])) == p.res(chosen[j], frame.meet(cover[i], cover[j]))
                for j in range(i)
            ):
                chosen.append(a)
                yield from extend(i + 1)
                chosen.pop()

    yield from extend(0)


@dataclass(frozen=True)
class PresheafReport:
    """Outcome of :func:`validate_presheaf`; witnesses are section and element names."""

    functorial: bool
    functoriality_witness: tuple[str, ...] | None
    separated: bool
    separation_witness: tuple[Any, ...] | None
    sheaf: bool
    gluing_witness: tuple[Any, ...] | None


def validate_presheaf(p: Presheaf, *, limit: int | None = None) -> PresheafReport:
    """Check functoriality, then separation and gluing over every cover."""
    frame = p.frame
    f_witness = p.functoriality_witness()
    if f_witness is not None:
        return PresheafReport(False, f_witness, False, None, False, None)
    bound = _bound(limit)
    separation: tuple[Any, ...] | None = None
    gluing: tuple[Any, ...] | None = None
    for u in frame.elements:
        for cover in covers(frame, u, limit=limit):
            cover_names = tuple(frame.name(w) for w in cover)
            for family in _compatible_families(p, cover, bound):
                glued = [
                    a
                    for a in p.at[u]
                    if all(p.res(a, w) == b for w, b in zip(cover, family, strict=True))
                ]
                if len(glued) > 1 and separation is None:
                    separation = (frame.name(u), cover_names, p.names[glued[0]], p.names[glued[1]])
                if not glued and gluing is None:
                    gluing = (frame.name(u), cover_names, tuple(p.names[a] for a in family))
    if separation:
        logger.info("Presheaf is not separated: %s", separation)
    if gluing:
        logger.info("Compatible family without amalgamation: %s", gluing)
    separated = separation is None
    return PresheafReport(True, None, separated, separation, separated and gluing is None, gluing)


# -- Θ --


def theta(p: Presheaf, *, limit: int | None = None) -> HSet:
    """The Heyting-valued set ``Θ(P)``.

    ``δ(a, b)`` is the largest ``W ≤ δ(a) ∧ δ(b)`` on which ``a`` and ``b``
    restrict to the same section. For sheaves the result is checked to be
    complete; the check is skipped when the singleton scan is too large.
    """
    if p._theta is not None:
        return p._theta
    frame = p.frame
    ids = range(p.size)
    alpha = [
        [
            frame.join_all(
                w
                for w in frame.down_set(frame.meet(p.where[a], p.where[b]))
                if p.res(a, w) == p.res(b, w)
            )
            for b in ids
        ]
        for a in ids
    ]
    hset = HSet(frame, p.names, alpha)
    try:
        witness = hset.completeness_witness(limit) if p.report.sheaf else None
    except SizeGuardError:
        logger.debug("Skipping completeness check of Θ(P): size guard")
    else:
        if witness is not None:
            logger.error("Θ of a sheaf is not complete: %s", witness)
            raise InvariantError("Θ of a sheaf is not complete")
    p._theta = hset
    return hset


class NaturalMap:
    """A natural transformation ``ξ : P → Q`` given section by section."""

    def __init__(self, source: Presheaf, target: Presheaf, components: Mapping[str | int, str | int]) -> None:
        if source.frame != target.frame:
            raise PresheafError("Natural maps need presheaves over the same frame")
        self.source = source
        self.target = target
        table = {source.section(a): target.section(b) for a, b in components.items()}
        if set(table) != set(range(source.size)):
            raise PresheafError("A natural map needs a component for every section")
        for a, b in table.items():
            if source.where[a] != target.where[b]:
                raise PresheafError(f"{source.names[a]} and {target.names[b]} live over different elements")
        frame = source.frame
        for a in table:
            for w in frame.down_set(source.where[a]):
                if target.res(table[a], w) != table[source.res(a, w)]:
                    raise PresheafError(f"Not natural at {source.names[a]} restricted to {frame.name(w)}")
        self.table = tuple(table[a] for a in range(source.size))


def theta_mor(xi: NaturalMap) -> HMorphism:
    """``Θ(ξ)``, represented by the induced map of sections."""
    return HMorphism.represented_by(theta(xi.source), theta(xi.target), xi.table)


# -- Sheaves of structures --


class SheafOfStructures:
    """Interpretations of a language section by section.

    ``functions[f][U]`` maps tuples of section ids of ``P(U)`` to a section id;
    ``relations[R][U]`` is a set of such tuples.
    """

    def __init__(
        self,
        presheaf: Presheaf,
        language: Language,
        functions: Mapping[str, Mapping[int, Mapping[tuple[int, ...], int]]],
        relations: Mapping[str, Mapping[int, Iterable[tuple[int, ...]]]],
        *,
        check: bool = True,
    ) -> None:
        self.presheaf = presheaf
        self.frame = presheaf.frame
        self.language = language
        self.functions = {
            f: {u: dict(functions.get(f, {}).get(u, {})) for u in self.frame.elements} for f in language.functions
        }
        self.relations = {
            r: {u: frozenset(tuple(t) for t in relations.get(r, {}).get(u, ())) for u in self.frame.elements}
            for r in language.relations
        }
        if check:
            found = self.violations()
            if found:
                shown = "; ".join(str(v) for v in found[:5])
                raise PresheafError(f"Invalid sheaf of structures: {shown}")

    @classmethod
    def from_dict(
        cls, presheaf: Presheaf, language: Language, data: Mapping[str, Any], *, check: bool = True
    ) -> SheafOfStructures:
        """Read section-name tables.

        Functions: ``{f: {U: [[arg, ..., value], ...]}}``; a constant is
        ``{c: {U: value}}`` or a list of values in element order. Relations:
        ``{R: {U: [[arg, ...], ...]}}``; a 0-ary relation is the list of
        elements where it holds.
        """
        frame, sec = presheaf.frame, presheaf.section
        functions: dict[str, dict[int, dict[tuple[int, ...], int]]] = {}
        for f, arity in language.functions.items():
            raw = data.get("functions", {}).get(f)
            if raw is None:
                raise PresheafError(f"No sections given for function symbol {f}")
            if arity == 0:
                pairs = zip(frame.elements, raw, strict=True) if isinstance(raw, list) else raw.items()
                functions[f] = {frame.index(u): {(): sec(v)} for u, v in pairs}
            else:
                functions[f] = {
                    frame.index(u): {tuple(sec(x) for x in row[:-1]): sec(row[-1]) for row in rows}
                    for u, rows in raw.items()
                }
        relations: dict[str, dict[int, set[tuple[int, ...]]]] = {}
        for r, arity in language.relations.items():
            raw = data.get("relations", {}).get(r, {})
            if arity == 0:
                holds = {frame.index(u) for u in raw}
                relations[r] = {u: {()} if u in holds else set() for u in frame.elements}
            else:
                relations[r] = {
                    frame.index(u): {tuple(sec(x) for x in row) for row in rows} for u, rows in raw.items()
                }
        return cls(presheaf, language, functions, relations, check=check)

    def violations(self, *, limit: int | None = None) -> list[Violation]:
        """Totality, naturality, closure under restriction and local character."""
        p, frame = self.presheaf, self.frame
        names = p.names
        found: list[Violation] = []
        for f, arity in self.language.functions.items():
            for u in frame.elements:
                table = self.functions[f][u]
                for args in itertools.product(p.at[u], repeat=arity):
                    value = table.get(args)
                    if value is None or p.where[value] != u:
                        found.append(Violation("NotTotal", (f, frame.name(u), *(names[a] for a in args))))
                        continue
                    for w in frame.down_set(u):
                        down = tuple(p.res(a, w) for a in args)
                        there = self.functions[f][w].get(down)
                        if there is not None and p.res(value, w) != there:
                            found.append(Violation("NotNatural", (f, frame.name(u), frame.name(w), *(names[a] for a in args))))
        for r, arity in self.language.relations.items():
            for u in frame.elements:
                rel = self.relations[r][u]
                for t in rel:
                    if len(t) != arity or any(p.where[a] != u for a in t):
                        found.append(Violation("NotSubpresheaf", (r, frame.name(u), *(names[a] for a in t))))
                        continue
                    for w in frame.down_set(u):
                        if tuple(p.res(a, w) for a in t) not in self.relations[r][w]:
                            found.append(Violation("NotRestrictionClosed", (r, frame.name(u), frame.name(w))))
                for cover in covers(frame, u, limit=limit):
                    for t in itertools.product(p.at[u], repeat=arity):
                        if t in rel:
                            continue
                        if all(tuple(p.res(a, w) for a in t) in self.relations[r][w] for w in cover):
                            found.append(
                                Violation("NotLocal", (r, frame.name(u), tuple(frame.name(w) for w in cover)))
                            )
        return found

    def section_structure(self, u: ElementRef) -> OrdinaryStructure:
        """The ordinary structure ``P(U)``."""
        u = self.frame.index(u)
        p = self.presheaf
        position = {a: i for i, a in enumerate(p.at[u])}
        functions = {
            f: {tuple(position[a] for a in args): position[v] for args, v in self.functions[f][u].items()}
            for f in self.language.functions
        }
        relations = {
            r: frozenset(tuple(position[a] for a in t) for t in self.relations[r][u]) for r in self.language.relations
        }
        return OrdinaryStructure(self.language, tuple(p.names[a] for a in p.at[u]), functions, relations)

    def __repr__(self) -> str:
        return f"SheafOfStructures({self.presheaf!r})"


def lift_structure(s: SheafOfStructures) -> HStructure:
    """The Heyting-valued structure on ``Θ(P)`` induced by a sheaf of structures.

    A function symbol is represented by ``k(a) = f^P(a|δ(a))`` and a relation
    takes the value ``⋁{W ≤ δ(a) : a|W ∈ R^P(W)}``.
    """
    p, frame = s.presheaf, s.frame
    carrier = theta(p)
    arities = set(s.language.functions.values()) | set(s.language.relations.values())
    powers = {n: power(carrier, n) for n in arities | {0}}

    def extent(args: Sequence[int]) -> int:
        return frame.meet_all(p.where[a] for a in args)

    functions: dict[str, HMorphism] = {}
    witnesses: dict[str, tuple[int, ...]] = {}
    for f, n in s.language.functions.items():
        h = []
        for args in itertools.product(range(p.size), repeat=n):
            w = extent(args)
            h.append(s.functions[f][w][tuple(p.res(a, w) for a in args)])
        witnesses[f] = tuple(h)
        functions[f] = HMorphism.represented_by(powers[n].hset, carrier, h)
    relations: dict[str, StrictRelation] = {}
    for r, n in s.language.relations.items():
        values = [
            frame.join_all(
                w
                for w in frame.down_set(extent(args))
                if tuple(p.res(a, w) for a in args) in s.relations[r][w]
            )
            for args in itertools.product(range(p.size), repeat=n)
        ]
        relations[r] = StrictRelation(powers[n].hset, tuple(values))
    try:
        m = HStructure(carrier, s.language, functions, relations, witnesses=witnesses)
    except AssumptionFailedError as e:
        logger.error("Lifted structure breaks the Assumption: %s", e)
        raise InvariantError("Lifting a sheaf of structures broke the Assumption") from e
    m._powers.update(powers)
    return m


# -- Section structures and filter quotients --


def _quotient_by_colimit(s: SheafOfStructures, f: Filter) -> OrdinaryStructure:
    """``P/𝔣`` as the colimit of ``P(U)`` over ``U ∈ 𝔣``.

    Pairs ``(U, a)`` are identified when they agree on some ``W ∈ 𝔣``;
    each class is named after its member over the generator.
    """
    p, frame = s.presheaf, s.frame
    members = sorted(f.members)
    pairs = [a for u in members for a in p.at[u]]

    def same(a: int, b: int) -> bool:
        meet = frame.meet(p.where[a], p.where[b])
        return any(p.res(a, w) == p.res(b, w) for w in frame.down_set(meet) if w in f)

    classes: list[list[int]] = []
    cls_of: dict[int, int] = {}
    for a in pairs:
        for i, c in enumerate(classes):
            if same(a, c[0]):
                c.append(a)
                cls_of[a] = i
                break
        else:
            cls_of[a] = len(classes)
            classes.append([a])
    g = f.generator
    labels = tuple(p.names[next(a for a in c if p.where[a] == g)] for c in classes)

    functions: dict[str, dict[tuple[int, ...], int]] = {}
    for sym, n in s.language.functions.items():
        table: dict[tuple[int, ...], int] = {}
        for combo in itertools.product(range(len(classes)), repeat=n):
            reps = [classes[i][0] for i in combo]
            w = frame.meet_all(p.where[a] for a in reps)
            table[combo] = cls_of[s.functions[sym][w][tuple(p.res(a, w) for a in reps)]]
        functions[sym] = table
    relations: dict[str, frozenset[tuple[int, ...]]] = {}
    for sym, n in s.language.relations.items():
        holding = set()
        for combo in itertools.product(range(len(classes)), repeat=n):
            reps = [classes[i][0] for i in combo]
            top = frame.meet_all(p.where[a] for a in reps)
            if any(
                tuple(p.res(a, w) for a in reps) in s.relations[sym][w]
                for w in frame.down_set(top)
                if w in f
            ):
                holding.add(combo)
        relations[sym] = frozenset(holding)
    return OrdinaryStructure(s.language, labels, functions, relations)


def sections_and_quotient(
    s: SheafOfStructures,
    at: ElementRef | Filter,
    *,
    general: bool = False,
) -> OrdinaryStructure:
    """``P(U)`` for an element, or ``P/𝔣`` for a filter.

    The quotient is read off at the filter's generator. With ``general`` the
    colimit over the whole filter is built as well, checked isomorphic, and
    returned.

    Raises:
        ImproperFilterError: If the filter contains bottom.
    """
    if not isinstance(at, Filter):
        return s.section_structure(at)
    if not at.is_proper:
        raise ImproperFilterError()
    quick = s.section_structure(at.generator)
    if not general:
        return quick
    colimit = _quotient_by_colimit(s, at)
    if structures_isomorphic(quick, colimit) is None:
        logger.error("Colimit and generator sections disagree for %s", at.label)
        raise InvariantError(f"P/{at.label} is not isomorphic to the sections at its generator")
    return colimit


@dataclass(frozen=True)
class SectionBijection:
    """The map from ``P/𝔣`` to the global elements of ``M/𝔣``.

    ``classes[s]`` lists the carrier elements of ``M`` identified with the
    section ``s`` over the generator.
    """

    filter: str
    classes: dict[str, tuple[str, ...]]
    injective: bool
    surjective: bool

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective


def global_section_bijection(s: SheafOfStructures, f: Filter) -> SectionBijection:
    """Check that ``P/𝔣`` matches the global elements of ``Θ(P)/𝔣``.

    Global elements of the quotient are the ``a`` with ``δ(a) ∈ 𝔣``, two of
    them equal when ``δ(a, b) ∈ 𝔣``.
    """
    if not f.is_proper:
        raise ImproperFilterError()
    p = s.presheaf
    m = theta(p)
    g = f.generator
    reps = p.at[g]
    injective = all(m.alpha[a][b] not in f for a, b in itertools.combinations(reps, 2))
    global_elements = [a for a in m.elements if m.extent(a) in f]
    surjective = all(any(m.alpha[a][r] in f for r in reps) for a in global_elements)
    classes = {
        p.names[r]: tuple(p.names[a] for a in global_elements if m.alpha[a][r] in f) for r in reps
    }
    return SectionBijection(f.label, classes, injective, surjective)


# -- Products of presheaves --


def power_presheaf(p: Presheaf, n: int) -> Presheaf:
    """``Pⁿ`` with sections named ``(a,b,...)`` and componentwise restriction."""
    if n < 1:
        raise ArityMismatchError("Powers of a presheaf need n ≥ 1")
    frame = p.frame

    def name(combo: Sequence[int]) -> str:
        return "(" + ",".join(p.names[a] for a in combo) + ")"

    sections = {u: [name(c) for c in itertools.product(p.at[u], repeat=n)] for u in frame.elements}
    restrictions = {
        (u, w): {name(c): name([p.res(a, w) for a in c]) for c in itertools.product(p.at[u], repeat=n)}
        for u in frame.elements
        for w in frame.down_set(u)
        if w != u
    }
    return Presheaf(frame, sections, restrictions)


def product_comparison(p: Presheaf, n: int) -> list[Violation]:
    """Why the canonical map ``Θ(Pⁿ) → Θ(P)ⁿ`` fails to be an isomorphism; empty if it is one."""
    dom = theta(power_presheaf(p, n))
    cod = power(theta(p), n).hset
    h = [
        sum(a * p.size ** (n - 1 - j) for j, a in enumerate(combo))
        for u in p.frame.elements
        for combo in itertools.product(p.at[u], repeat=n)
    ]
    return map_iso_failures(dom, cod, h)


# -- Generators --


def _family_sheaf(
    frame: Frame,
    points: Sequence[frozenset[str]],
    factors: Mapping[str, OrdinaryStructure],
    language: Language,
) -> SheafOfStructures:
    """Sections over ``U`` are the choices of one element of ``Mₓ`` per ``x ∈ U``."""
    order = list(factors)
    local: dict[int, list[tuple[tuple[str, int], ...]]] = {}
    for u in frame.elements:
        xs = [x for x in order if x in points[u]]
        local[u] = [
            tuple(zip(xs, choice, strict=True))
            for choice in itertools.product(*(range(factors[x].size) for x in xs))
        ]

    def name(section: tuple[tuple[str, int], ...]) -> str:
        if not section:
            return "()"
        return ",".join(f"{x}={factors[x].universe[i]}" for x, i in section)

    sections = {u: [name(sec) for sec in local[u]] for u in frame.elements}
    restrictions = {
        (u, w): {name(sec): name(tuple(pair for pair in sec if pair[0] in points[w])) for sec in local[u]}
        for u in frame.elements
        for w in frame.down_set(u)
        if w != u
    }
    presheaf = Presheaf(frame, sections, restrictions)
    sec = presheaf.section
    functions: dict[str, dict[int, dict[tuple[int, ...], int]]] = {}
    for f, n in language.functions.items():
        functions[f] = {}
        for u in frame.elements:
            table = {}
            for args in itertools.product(local[u], repeat=n):
                xs = [x for x, _ in args[0]] if args else [x for x in order if x in points[u]]
                value = tuple(
                    (x, factors[x].apply(f, [dict(a)[x] for a in args])) for x in xs
                )
                table[tuple(sec(name(a)) for a in args)] = sec(name(value))
            functions[f][u] = table
    relations: dict[str, dict[int, set[tuple[int, ...]]]] = {}
    for r, n in language.relations.items():
        relations[r] = {}
        for u in frame.elements:
            xs = [x for x in order if x in points[u]]
            relations[r][u] = {
                tuple(sec(name(a)) for a in args)
                for args in itertools.product(local[u], repeat=n)
                if all(factors[x].holds(r, [dict(a)[x] for a in args]) for x in xs)
            }
    return SheafOfStructures(presheaf, language, functions, relations)


def discrete_family(
    factors: Mapping[str, OrdinaryStructure],
    language: Language | None = None,
) -> SheafOfStructures:
    """The sheaf on the discrete space of indices with ``P(U) = ∏_{x∈U} Mₓ``.

    An empty factor is reported with :class:`EmptyUniverseWarning`.
    """
    if language is None:
        if not factors:
            raise PresheafError("An empty family needs an explicit language")
        language = next(iter(factors.values())).language
    for x, m in factors.items():
        if m.language != language:
            raise PresheafError(f"Factor {x} interprets a different language")
        if m.size == 0:
            warnings.warn(f"Factor {x} has an empty universe", EmptyUniverseWarning, stacklevel=2)
    frame = Frame.powerset(list(factors))
    if frame.points_of is None:
        raise InvariantError("Powerset frame lost its points")
    return _family_sheaf(frame, frame.points_of, factors, language)


def boolean_power(algebra: Frame, structure: OrdinaryStructure) -> SheafOfStructures:
    """The bounded Boolean power of ``structure`` over a finite Boolean algebra.

    The Stone space is the set of atoms; sections over ``U`` are all maps from
    the atoms below ``U`` to the structure.
    """
    if not algebra.is_boolean:
        raise FrameError("Boolean powers need a Boolean algebra")
    if structure.size == 0:
        warnings.warn("Boolean power of an empty structure", EmptyUniverseWarning, stacklevel=2)
    atoms = [algebra.name(a) for a in algebra.atoms]
    points = [frozenset(algebra.name(a) for a in algebra.atoms if algebra.le(a, u)) for u in algebra.elements]
    return _family_sheaf(algebra, points, {x: structure for x in atoms}, structure.language)


# -- Kripke-Joyal forcing --


class _KripkeJoyal:
    def __init__(self, s: SheafOfStructures) -> None:
        self.s = s
        self.p = s.presheaf
        self.frame = s.frame
        self._cache: dict[tuple[Formula, int, tuple[tuple[str, int], ...]], bool] = {}

    def term(self, t: Term, w: int, env: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, App):
            args = tuple(self.term(a, w, env) for a in t.args)
            return self.s.functions[t.symbol][w][args]
        raise TypeError(f"Unexpected term {t!r}")

    def down(self, env: Mapping[str, int], w: int) -> dict[str, int]:
        return {x: self.p.res(a, w) for x, a in env.items()}

    def holds(self, phi: Formula, w: int, env: dict[str, int]) -> bool:
        key = (phi, w, tuple(sorted(env.items())))
        if key not in self._cache:
            self._cache[key] = self._holds(phi, w, env)
        return self._cache[key]

    def _holds(self, phi: Formula, w: int, env: dict[str, int]) -> bool:
        frame = self.frame
        below = sorted(frame.down_set(w))
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Bot):
            return w == frame.bottom
        if isinstance(phi, Rel):
            return tuple(self.term(t, w, env) for t in phi.args) in self.s.relations[phi.symbol][w]
        if isinstance(phi, Eq):
            return self.term(phi.left, w, env) == self.term(phi.right, w, env)
        if isinstance(phi, And):
            return self.holds(phi.left, w, env) and self.holds(phi.right, w, env)
        if isinstance(phi, Or):
            covered = frame.join_all(
                v
                for v in below
                if self.holds(phi.left, v, self.down(env, v)) or self.holds(phi.right, v, self.down(env, v))
            )
            return covered == w
        if isinstance(phi, Imp):
            return all(
                not self.holds(phi.left, v, self.down(env, v)) or self.holds(phi.right, v, self.down(env, v))
                for v in below
            )
        if isinstance(phi, Exists):
            covered = frame.join_all(
                v
                for v in below
                if any(self.holds(phi.body, v, {**self.down(env, v), phi.var: b}) for b in self.p.at[v])
            )
            return covered == w
        if isinstance(phi, Forall):
            return all(
                self.holds(phi.body, v, {**self.down(env, v), phi.var: b}) for v in below for b in self.p.at[v]
            )
        raise TypeError(f"Not a formula: {phi!r}")


def _bind(s: SheafOfStructures, fic: FormulaInContext, sections: Sequence[str | int]) -> tuple[FormulaInContext, list[int]]:
    if len(sections) != fic.arity:
        raise UnknownParameterError(f"Context has {fic.arity} variable(s) but {len(sections)} section(s) were given")
    closed, extra = abstract_parameters(fic)
    return closed, [s.presheaf.section(a) for a in (*sections, *extra)]


def forces(s: SheafOfStructures, fic: FormulaInContext, u: ElementRef, sections: Sequence[str | int] = ()) -> bool:
    """``U ⊩ φ(a)`` in the sheaf semantics; sections are restricted to ``U`` first."""
    closed, ids = _bind(s, fic, sections)
    w = s.frame.index(u)
    env = {x: s.presheaf.res(a, w) for x, a in zip(closed.context, ids, strict=True)}
    return _KripkeJoyal(s).holds(closed.formula, w, env)


def characteristic_value(s: SheafOfStructures, fic: FormulaInContext, sections: Sequence[str | int] = ()) -> int:
    """``⋁{W ≤ δ(a) : W ⊩ φ(a|W)}``."""
    closed, ids = _bind(s, fic, sections)
    frame, p = s.frame, s.presheaf
    extent = frame.meet_all(p.where[a] for a in ids)
    kj = _KripkeJoyal(s)
    return frame.join_all(
        w
        for w in frame.down_set(extent)
        if kj.holds(closed.formula, w, {x: p.res(a, w) for x, a in zip(closed.context, ids, strict=True)})
    )
