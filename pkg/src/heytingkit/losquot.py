"""Filter quotients, genericity and Łoś-type transfer.

``M/𝔣`` identifies ``a`` and ``b`` when ``(δ(a) ∨ δ(b) ⇒ δ(a, b)) ∈ 𝔣`` and
takes values in the quotient algebra. Its global elements form the ordinary
structure ``Γ(M/𝔣)``, which the Łoś check compares against forcing values of
Gödel translations.
"""

from __future__ import annotations

import itertools
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .config import DEFAULT_SETTINGS
from .exceptions import (
    EmptyFactorWithoutConstantError,
    ImproperFilterError,
    InvariantError,
    NotAFilterError,
)
from .frame import Filter, Frame, QuotientHA, filters, regular_algebra
from .hmodel import (
    HStructure,
    MaxPrincipleReport,
    RecursionSemantics,
    gamma_structure,
    max_principle_check,
)
from .hset import HMorphism, HSet, StrictRelation, power, terminal
from .logic import (
    Exists,
    GodelSemantics,
    Language,
    OrdinaryStructure,
    ProductSemantics,
    TarskiSemantics,
    format_formula,
    is_forall_free,
    semantic_closure,
    structures_isomorphic,
)
from .sheaf import SheafOfStructures, discrete_family, lift_structure, sections_and_quotient

logger = logging.getLogger(__name__)


def _settings(depth: int | None, arity: int | None, term_depth: int | None) -> tuple[int, int, int]:
    return (
        DEFAULT_SETTINGS.depth if depth is None else depth,
        DEFAULT_SETTINGS.scan_arity if arity is None else arity,
        DEFAULT_SETTINGS.term_depth if term_depth is None else term_depth,
    )


# -- Quotients --


class QuotientStructure:
    """``M/𝔣`` with its class map and ``Γ(M/𝔣)``.

    Every table of the quotient is computed from class representatives and
    then checked against every other choice of representatives.

    Raises:
        ImproperFilterError: If the filter contains bottom.
    """

    def __init__(self, base: HStructure, filter: Filter) -> None:
        if filter.frame != base.frame:
            raise NotAFilterError("Filter lives on a different frame")
        self.base = base
        self.filter = filter
        self.algebra = QuotientHA(base.frame, filter)
        q = self.algebra.project
        carrier = base.carrier

        def similar(a: int, b: int) -> bool:
            return q(carrier.extent(a)) == q(carrier.extent(b)) == q(carrier.alpha[a][b])

        classes: list[list[int]] = []
        class_of = [-1] * carrier.size
        for a in carrier.elements:
            for i, c in enumerate(classes):
                if similar(a, c[0]):
                    c.append(a)
                    class_of[a] = i
                    break
            else:
                class_of[a] = len(classes)
                classes.append([a])
        for a, b, c in itertools.product(carrier.elements, repeat=3):
            if similar(a, b) and similar(b, c) and not similar(a, c):
                logger.error("Filter-equivalence is not transitive at %s", (a, b, c))
                raise InvariantError("Filter-equivalence is not transitive")
        self.classes: tuple[tuple[int, ...], ...] = tuple(tuple(c) for c in classes)
        self.class_of: tuple[int, ...] = tuple(class_of)
        self.structure = self._build()
        top = self.algebra.frame.top
        self.global_classes: tuple[int, ...] = tuple(
            i for i in range(len(classes)) if self.structure.carrier.extent(i) == top
        )
        for a in carrier.elements:
            if (class_of[a] in self.global_classes) != (carrier.extent(a) in filter):
                raise InvariantError(f"Globality of [{base.name(a)}] disagrees with δ ∈ {filter.label}")
        self.gamma: OrdinaryStructure = gamma_structure(self.structure, top)
        logger.debug("Quotient by %s has %d classes", filter.label, len(classes))

    def _build(self) -> HStructure:
        base, q = self.base, self.algebra.project
        frame = self.algebra.frame
        carrier = base.carrier
        reps = [c[0] for c in self.classes]
        alpha = [[q(carrier.alpha[a][b]) for b in reps] for a in reps]
        for a, b in itertools.product(carrier.elements, repeat=2):
            if q(carrier.alpha[a][b]) != alpha[self.class_of[a]][self.class_of[b]]:
                raise InvariantError("Quotient valuation depends on representatives")
        labels = [f"[{base.name(a)}]" for a in reps]
        hset = HSet(frame, labels, alpha)
        n_classes = len(reps)

        def class_tuple(args: Sequence[int]) -> int:
            i = 0
            for a in args:
                i = i * n_classes + self.class_of[a]
            return i

        arities = set(base.language.functions.values()) | set(base.language.relations.values())
        powers = {k: power(hset, k) if k else terminal(frame) for k in arities | {0}}
        functions: dict[str, HMorphism] = {}
        witnesses: dict[str, tuple[int, ...]] = {}
        for f, n in base.language.functions.items():
            phi = base.functions[f]
            table: list[list[int] | None] = [None] * n_classes**n
            h: list[int] = [0] * n_classes**n
            for args in itertools.product(base.carrier.elements, repeat=n):
                i = base.index_of(args)
                row = [frame.bottom] * n_classes
                for b in carrier.elements:
                    row[self.class_of[b]] = frame.join(row[self.class_of[b]], q(phi.table[i][b]))
                target = class_tuple(args)
                if table[target] is None:
                    table[target] = row
                    h[target] = self.class_of[base.witnesses[f][i]]
                elif table[target] != row or h[target] != self.class_of[base.witnesses[f][i]]:
                    raise InvariantError(f"Quotient of {f} depends on representatives")
            functions[f] = HMorphism(powers[n].hset, hset, [r or [] for r in table])
            witnesses[f] = tuple(h)
        relations: dict[str, StrictRelation] = {}
        for r, n in base.language.relations.items():
            values: list[int | None] = [None] * n_classes**n
            for args in itertools.product(base.carrier.elements, repeat=n):
                value = q(base.relations[r](base.index_of(args)))
                target = class_tuple(args)
                if values[target] is None:
                    values[target] = value
                elif values[target] != value:
                    raise InvariantError(f"Quotient of {r} depends on representatives")
            relations[r] = StrictRelation(powers[n].hset, tuple(v or 0 for v in values))
        m = HStructure(hset, base.language, functions, relations, witnesses=witnesses)
        m._powers.update(powers)
        return m

    def gamma_position(self, a: int) -> int:
        """Position of ``[a]`` in ``Γ(M/𝔣)``; ``a`` must have ``δ(a) ∈ 𝔣``."""
        return self.global_classes.index(self.class_of[a])

    def __repr__(self) -> str:
        return f"QuotientStructure({len(self.classes)} classes by {self.filter.label})"


def filter_quotient(
    m: HStructure,
    f: Filter,
    *,
    sheaf: SheafOfStructures | None = None,
) -> QuotientStructure:
    """``M/𝔣``; with ``sheaf`` given, ``Γ(M/𝔣) ≅ P/𝔣`` is asserted as well.

    Raises:
        ImproperFilterError: If ``f`` contains bottom.
    """
    if not f.is_proper:
        raise ImproperFilterError()
    quotient = QuotientStructure(m, f)
    if sheaf is not None:
        gamma_is_p_quotient(sheaf, f, quotient)
    return quotient


def gamma_is_p_quotient(s: SheafOfStructures, f: Filter, quotient: QuotientStructure | None = None) -> bool:
    """Check ``Γ(Θ(P)/𝔣) ≅ P/𝔣`` for a sheaf of structures."""
    quotient = quotient or QuotientStructure(lift_structure(s), f)
    if structures_isomorphic(quotient.gamma, sections_and_quotient(s, f)) is None:
        logger.error("Γ of the quotient by %s is not P/%s", f.label, f.label)
        raise InvariantError(f"Γ(M/{f.label}) is not isomorphic to P/{f.label}")
    return True


# -- Genericity --


@dataclass(frozen=True)
class GenericityReport:
    """Bounded genericity verdict for one filter.

    ``generic`` is the dichotomy and witness conditions on Gödel
    translations. The Łoś transfer also needs ``atomic_stable``: an atomic
    ``φ(a)`` with ``δ(a) ∈ 𝔣`` has ``‖φ(a)‖ ∈ 𝔣`` exactly when
    ``‖¬¬φ(a)‖ ∈ 𝔣``.
    """

    filter: str
    depth: int
    arity: int
    dichotomy_witness: dict[str, Any] | None = None
    witness_failure: dict[str, Any] | None = None
    atomic_witness: dict[str, Any] | None = None

    @property
    def generic(self) -> bool:
        return self.dichotomy_witness is None and self.witness_failure is None

    @property
    def atomic_stable(self) -> bool:
        return self.atomic_witness is None

    @property
    def los_applies(self) -> bool:
        return self.generic and self.atomic_stable

    @property
    def label(self) -> str:
        verdict = "generic" if self.generic else "not generic"
        return f"{verdict} up to depth {self.depth}"

    def to_dict(self) -> dict[str, Any]:
        return {
            "filter": self.filter,
            "depth": self.depth,
            "generic": self.generic,
            "atomic_stable": self.atomic_stable,
            "dichotomy_witness": self.dichotomy_witness,
            "witness_failure": self.witness_failure,
            "atomic_witness": self.atomic_witness,
        }


def _row_names(m: HStructure, params: Sequence[int]) -> list[str]:
    return [m.name(a) for a in params]


def is_generic(
    m: HStructure,
    f: Filter,
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    limit: int | None = None,
) -> GenericityReport:
    """Check the genericity conditions on all formulas up to ``depth``.

    Witnesses are searched in ascending carrier order; the first failure of
    each clause is reported.
    """
    depth, arity, term_depth = _settings(depth, arity, term_depth)
    frame, n = m.frame, m.size
    plain = RecursionSemantics(m)
    closure = semantic_closure(
        ProductSemantics(plain, GodelSemantics(plain)), m.language, arity, depth, term_depth, limit=limit
    )
    dichotomy = witness = atomic = None
    for k in range(arity + 1):
        ext = plain.ext(k)
        tuples = m.tuples(k)
        for j, entry in enumerate(closure.entries[k]):
            value, godel = entry.meaning
            text = None
            for i, a in enumerate(tuples):
                if ext[i] not in f:
                    continue
                g = godel[i]
                not_g = frame.meet(ext[i], frame.implies(g, frame.bottom))
                if dichotomy is None and g not in f and not_g not in f:
                    text = text or format_formula(closure.formula(k, j), m.name)
                    dichotomy = {
                        "formula": text,
                        "params": _row_names(m, a),
                        "godel": frame.name(g),
                        "negated": frame.name(not_g),
                    }
                # the Gödel value of an atom is its double negation
                if atomic is None and entry.level == 0 and (value[i] in f) != (g in f):
                    text = text or format_formula(closure.formula(k, j), m.name)
                    atomic = {
                        "formula": text,
                        "params": _row_names(m, a),
                        "value": frame.name(value[i]),
                        "double_negation": frame.name(g),
                    }
        for j, entry in enumerate(closure.entries.get(k + 1, [])):
            if entry.level > depth - 1 or witness is not None:
                continue
            godel = entry.meaning[1]
            for i, a in enumerate(tuples):
                if ext[i] not in f:
                    continue
                values = godel[i * n : (i + 1) * n]
                if frame.join_all(values) in f and not any(v in f for v in values):
                    body = closure.formula(k + 1, j)
                    witness = {
                        "formula": format_formula(Exists(f"v{k + 1}", body), m.name),
                        "params": _row_names(m, a),
                        "exists": frame.name(frame.join_all(values)),
                    }
                    break
    report = GenericityReport(f.label, depth, arity, dichotomy, witness, atomic)
    logger.info("%s is %s", f.label, report.label)
    return report


# -- Łoś --


@dataclass(frozen=True)
class LosRow:
    formula: str
    params: tuple[str, ...]
    gamma_sat: bool
    forcing_value: str
    in_filter: bool
    mode: str = "main"

    @property
    def passed(self) -> bool:
        return self.gamma_sat == self.in_filter

    def to_dict(self) -> dict[str, Any]:
        return {
            "formula": self.formula,
            "params": list(self.params),
            "gamma_sat": self.gamma_sat,
            "forcing_value": self.forcing_value,
            "in_filter": self.in_filter,
            "pass": self.passed,
            "mode": self.mode,
        }


@dataclass(frozen=True)
class LosReport:
    filter: str
    depth: int
    genericity: GenericityReport
    rows: tuple[LosRow, ...] = field(repr=False)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.rows)

    @property
    def failures(self) -> tuple[LosRow, ...]:
        return tuple(r for r in self.rows if not r.passed)


def _los_rows(
    m: HStructure,
    quotient: QuotientStructure,
    *,
    mode: str,
    arity: int,
    depth: int,
    term_depth: int,
    limit: int | None,
) -> list[LosRow]:
    frame, f = m.frame, quotient.filter
    plain = RecursionSemantics(m)
    godel = GodelSemantics(plain)
    semantics = ProductSemantics(plain, godel, TarskiSemantics(quotient.gamma))
    closure = semantic_closure(
        semantics, m.language, arity, depth, term_depth, allow_forall=mode == "main" or frame.is_boolean, limit=limit
    )
    g_size = quotient.gamma.size
    rows = []
    for k in range(arity + 1):
        ext = plain.ext(k)
        for fic, (value, g, truth) in closure.items(k):
            if mode == "corollary" and not (frame.is_boolean or is_forall_free(fic.formula)):
                continue
            text = format_formula(fic.formula, m.name)
            for i, a in enumerate(m.tuples(k)):
                if ext[i] not in f:
                    continue
                position = 0
                for x in a:
                    position = position * g_size + quotient.gamma_position(x)
                forced = g[i] if mode == "main" else value[i]
                rows.append(
                    LosRow(text, tuple(m.name(x) for x in a), truth[position], frame.name(forced), forced in f, mode)
                )
    return rows


def los_check(
    m: HStructure,
    f: Filter,
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    corollary: bool = False,
    limit: int | None = None,
) -> LosReport:
    """Compare ``Γ(M/𝔣) ⊨ φ([a])`` with ``‖φᴳ(a)‖ ∈ 𝔣`` on every formula up to ``depth``.

    With ``corollary`` the rows for ∀-free formulas (all formulas over a
    Boolean frame) are added, comparing with ``‖φ(a)‖ ∈ 𝔣`` instead.
    """
    depth, arity, term_depth = _settings(depth, arity, term_depth)
    quotient = filter_quotient(m, f)
    genericity = is_generic(m, f, depth, arity, term_depth, limit=limit)
    rows = _los_rows(m, quotient, mode="main", arity=arity, depth=depth, term_depth=term_depth, limit=limit)
    if corollary:
        rows += _los_rows(m, quotient, mode="corollary", arity=arity, depth=depth, term_depth=term_depth, limit=limit)
    report = LosReport(f.label, depth, genericity, tuple(rows))
    for row in report.failures:
        logger.info("Łoś fails for %s at %s under %s", row.formula, row.params, f.label)
    return report


# -- Characterization by maximal filters --


@dataclass(frozen=True)
class CoverEvidence:
    """``D(‖∃vφᴳ‖)`` covered by the ``D(¬¬‖φᴳ(bᵢ)‖)`` of a witness list."""

    formula: str
    params: tuple[str, ...]
    target: frozenset[str]
    pieces: tuple[frozenset[str], ...]

    @property
    def covered(self) -> bool:
        return self.target <= frozenset().union(*self.pieces)


@dataclass(frozen=True)
class CharacterizationReport:
    depth: int
    max_principle: MaxPrincipleReport
    genericity: tuple[GenericityReport, ...]
    los: tuple[LosReport, ...]
    ultrafilters: dict[str, str]
    covers: tuple[CoverEvidence, ...]

    @property
    def variant_holds(self) -> bool:
        return self.max_principle.holds

    @property
    def maximal_generic(self) -> bool:
        return all(g.generic for g in self.genericity)

    @property
    def maximal_los(self) -> bool:
        return all(r.ok for r in self.los)

    @property
    def equivalent(self) -> bool:
        return self.variant_holds == self.maximal_generic == self.maximal_los

    @property
    def covers_hold(self) -> bool:
        return all(c.covered for c in self.covers)


def characterization_check(
    m: HStructure,
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    limit: int | None = None,
) -> CharacterizationReport:
    """Check the variant maximum principle, genericity of every maximal filter,
    and Łoś for every maximal filter, all at the same depth."""
    depth, arity, term_depth = _settings(depth, arity, term_depth)
    frame = m.frame
    variant = max_principle_check(m, "variant", depth, arity, term_depth, limit=limit)
    maximal = [f for f in filters(frame) if f.is_maximal]
    genericity = tuple(is_generic(m, f, depth, arity, term_depth, limit=limit) for f in maximal)
    los = tuple(los_check(m, f, depth, arity, term_depth, limit=limit) for f in maximal)

    reg = regular_algebra(frame)
    ultrafilters = {
        f"up:{frame.name(p)}": f"up:{reg.algebra.name(reg.from_base(frame.neg(frame.neg(p))))}" for p in frame.atoms
    }

    def spectrum(u: int) -> frozenset[str]:
        return frozenset(frame.name(p) for p in reg.basic_open(u))

    evidence = tuple(
        CoverEvidence(
            row.formula,
            row.params,
            spectrum(row.value),
            tuple(spectrum(frame.neg(frame.neg(v))) for v in row.witness_values),
        )
        for row in variant.rows
        if row.value != frame.bottom
    )
    report = CharacterizationReport(depth, variant, genericity, los, ultrafilters, evidence)
    logger.info(
        "Characterization at depth %d: variant=%s generic=%s los=%s",
        depth,
        report.variant_holds,
        report.maximal_generic,
        report.maximal_los,
    )
    return report


# -- Classical ultraproducts --


@dataclass(frozen=True)
class UltraproductReport:
    """``∏Mₓ/𝔲`` with its cross-checks against the sheaf-side constructions."""

    structure: OrdinaryStructure
    index: str
    matches_factor: bool
    matches_sections: bool
    matches_gamma: bool
    disagreements: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.matches_factor and self.matches_sections and self.matches_gamma and not self.disagreements


def _ultraproduct(
    factors: Mapping[str, OrdinaryStructure], language: Language, members: Sequence[frozenset[str]]
) -> OrdinaryStructure:
    """The quotient of ``∏Mₓ`` by agreement on a member of the ultrafilter."""
    order = list(factors)
    elements = list(itertools.product(*(range(factors[x].size) for x in order)))

    def agree_on(g: Sequence[int], h: Sequence[int]) -> frozenset[str]:
        return frozenset(x for x, a, b in zip(order, g, h, strict=True) if a == b)

    classes: list[list[int]] = []
    class_of: dict[int, int] = {}
    for i, g in enumerate(elements):
        for j, c in enumerate(classes):
            if agree_on(g, elements[c[0]]) in members:
                c.append(i)
                class_of[i] = j
                break
        else:
            class_of[i] = len(classes)
            classes.append([i])
    position = {g: i for i, g in enumerate(elements)}
    functions = {}
    for sym, n in language.functions.items():
        table = {}
        for combo in itertools.product(range(len(classes)), repeat=n):
            args = [elements[classes[c][0]] for c in combo]
            value = tuple(factors[x].apply(sym, [g[k] for g in args]) for k, x in enumerate(order))
            table[combo] = class_of[position[value]]
        functions[sym] = table
    relations = {}
    for sym, n in language.relations.items():
        holding = set()
        for combo in itertools.product(range(len(classes)), repeat=n):
            args = [elements[classes[c][0]] for c in combo]
            where = frozenset(x for k, x in enumerate(order) if factors[x].holds(sym, [g[k] for g in args]))
            if where in members:
                holding.add(combo)
        relations[sym] = frozenset(holding)
    labels = tuple(
        "(" + ",".join(str(factors[x].universe[a]) for x, a in zip(order, elements[c[0]], strict=True)) + ")"
        for c in classes
    )
    return OrdinaryStructure(language, labels, functions, relations)


def classical_ultraproduct(
    factors: Mapping[str, OrdinaryStructure],
    u: Filter | str,
    depth: int | None = None,
    *,
    language: Language | None = None,
    limit: int | None = None,
) -> UltraproductReport:
    """``∏Mₓ/𝔲`` over a finite index set, checked against ``Mₓ₀``, ``P/𝔲`` and ``Γ(Θ(P)/𝔲)``.

    ``u`` is an ultrafilter on the powerset frame of the indices, or the
    name of the index it is principal at.

    Raises:
        EmptyFactorWithoutConstantError: If a factor is empty.
        NotAFilterError: If ``u`` is not an ultrafilter.
    """
    depth = DEFAULT_SETTINGS.depth if depth is None else depth
    if language is None:
        if not factors:
            raise NotAFilterError("An ultraproduct needs at least one index")
        language = next(iter(factors.values())).language
    empty = [x for x, m in factors.items() if m.size == 0]
    if empty:
        raise EmptyFactorWithoutConstantError(f"Factor {empty[0]} has an empty universe")
    s = discrete_family(factors, language)
    frame = s.frame
    if isinstance(u, str):
        u = Filter.principal(frame, "{" + u + "}") if not u.startswith("up:") else Filter.principal(frame, u[3:])
    if u.frame != frame or not u.is_maximal:
        raise NotAFilterError(f"{u.label} is not an ultrafilter on the index powerset")
    points = _points(frame)
    members = [points[w] for w in sorted(u.members)]
    (index,) = points[u.generator]

    result = _ultraproduct(factors, language, members)
    factor = factors[index]
    matches_factor = structures_isomorphic(result, factor, limit=limit) is not None
    matches_sections = structures_isomorphic(result, sections_and_quotient(s, u, general=True), limit=limit) is not None
    quotient = filter_quotient(lift_structure(s), u, sheaf=s)
    matches_gamma = structures_isomorphic(result, quotient.gamma, limit=limit) is not None

    closure = semantic_closure(
        ProductSemantics(TarskiSemantics(result), TarskiSemantics(factor)), language, 0, depth, limit=limit
    )
    disagreements = tuple(
        format_formula(fic.formula)
        for fic, (here, there) in closure.items(0)
        if here != there
    )
    return UltraproductReport(result, index, matches_factor, matches_sections, matches_gamma, disagreements)


def _points(frame: Frame) -> tuple[frozenset[str], ...]:
    if frame.points_of is None:
        raise InvariantError("Ultraproducts need a powerset frame")
    return frame.points_of


__all__ = [
    "CharacterizationReport",
    "CoverEvidence",
    "GenericityReport",
    "LosReport",
    "LosRow",
    "QuotientStructure",
    "UltraproductReport",
    "characterization_check",
    "classical_ultraproduct",
    "filter_quotient",
    "gamma_is_p_quotient",
    "is_generic",
    "los_check",
]
