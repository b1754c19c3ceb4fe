"""Heyting-valued structures and their forcing values.

An ``HStructure`` interprets a language on an HSet ``(M, δ)``: function
symbols as morphisms ``Mⁿ → M`` and relation symbols as strict relations on
``Mⁿ``. Tuples in ``Mⁿ`` are addressed by their position in
``itertools.product`` order, which is also the carrier order of the power
HSet built by :func:`heytingkit.hset.power`.

Forcing values are computed two ways. The recursion path follows the
inductive clauses over elements; the categorical path builds the subobject
of ``Mᵏ`` defined by the formula out of limits, Heyting operations on strict
relations, images and universal change of base, then reads it off.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .config import DEFAULT_SETTINGS
from .exceptions import (
    ArityMismatchError,
    AssumptionFailedError,
    ContextMismatchError,
    InvariantError,
    LanguageError,
    SizeGuardError,
    UnknownParameterError,
    WitnessNotClosedError,
)
from .frame import Frame
from .hset import (
    HMorphism,
    HSet,
    Limit,
    StrictRelation,
    SubobjectLattice,
    change_of_base,
    compose_tables,
    equalizer,
    pairing,
    power,
    terminal,
    terminal_map,
)
from .logic import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    Forall,
    Formula,
    FormulaInContext,
    GodelSemantics,
    Imp,
    Language,
    Or,
    OrdinaryStructure,
    Param,
    ProductSemantics,
    Rel,
    Term,
    Top,
    Var,
    abstract_parameters,
    format_formula,
    semantic_closure,
    structures_isomorphic,
)

logger = logging.getLogger(__name__)


class HStructure:
    """A Heyting-valued structure satisfying the Assumption.

    ``witnesses[f]`` is the stored representing map of ``f^M``: a tuple giving,
    for each tuple position of ``Mⁿ``, an element with the same extent.
    """

    def __init__(
        self,
        carrier: HSet,
        language: Language,
        functions: Mapping[str, HMorphism],
        relations: Mapping[str, StrictRelation],
        *,
        witnesses: Mapping[str, Sequence[int]] | None = None,
    ) -> None:
        self.carrier = carrier
        self.frame: Frame = carrier.frame
        self.language = language
        self._powers: dict[int, Limit] = {}
        for symbol in language.functions:
            if symbol not in functions:
                raise LanguageError(f"No interpretation for function symbol {symbol}")
        for symbol in language.relations:
            if symbol not in relations:
                raise LanguageError(f"No interpretation for relation symbol {symbol}")
        self.functions = {f: functions[f] for f in language.functions}
        self.relations = {r: relations[r] for r in language.relations}
        for f, arity in language.functions.items():
            phi = self.functions[f]
            if phi.dom.size != carrier.size**arity or phi.cod != carrier:
                raise ArityMismatchError(f"{f} is not a morphism M^{arity} -> M")
        for r, arity in language.relations.items():
            if self.relations[r].base.size != carrier.size**arity:
                raise ArityMismatchError(f"{r} is not a strict relation on M^{arity}")

        self.witnesses: dict[str, tuple[int, ...]] = {}
        for f in language.functions:
            given = witnesses.get(f) if witnesses else None
            if given is None:
                self.witnesses[f] = tuple(c[0] for c in self._witness_candidates(f))
            else:
                self._check_witness(f, tuple(given))
                self.witnesses[f] = tuple(given)
        logger.debug("Built structure on %d elements", carrier.size)

    # -- Tuples and powers --

    @property
    def size(self) -> int:
        return self.carrier.size

    def power(self, k: int) -> Limit:
        if k not in self._powers:
            self._powers[k] = power(self.carrier, k) if k else terminal(self.frame)
        return self._powers[k]

    def tuples(self, k: int) -> list[tuple[int, ...]]:
        return list(itertools.product(range(self.size), repeat=k))

    def index_of(self, elements: Sequence[int]) -> int:
        i = 0
        for e in elements:
            i = i * self.size + e
        return i

    def extent_of(self, elements: Iterable[int]) -> int:
        return self.frame.meet_all(self.carrier.extent(e) for e in elements)

    def extents(self, k: int) -> tuple[int, ...]:
        return tuple(self.extent_of(t) for t in self.tuples(k))

    def labels(self) -> dict[str, int]:
        """Carrier labels usable as parameters in formula text."""
        return {str(label): i for i, label in enumerate(self.carrier.carrier)}

    def name(self, e: int) -> str:
        return str(self.carrier.label(e))

    # -- Assumption --

    def _witness_candidates(self, symbol: str) -> list[list[int]]:
        phi = self.functions[symbol]
        frame, delta = self.frame, self.carrier.alpha
        candidates = []
        for a in phi.dom.elements:
            extent = phi.dom.extent(a)
            row = phi.table[a]
            found = [
                c
                for c in self.carrier.elements
                if delta[c][c] == extent
                and all(frame.le(row[b], delta[c][b]) for b in self.carrier.elements)
            ]
            if not found:
                raise AssumptionFailedError(symbol, phi.dom.label(a))
            candidates.append(found)
        return candidates

    def _check_witness(self, symbol: str, h: tuple[int, ...]) -> None:
        phi = self.functions[symbol]
        if len(h) != phi.dom.size:
            raise AssumptionFailedError(symbol, f"map of length {len(h)}")
        frame, delta = self.frame, self.carrier.alpha
        for a in phi.dom.elements:
            c = h[a]
            if delta[c][c] != phi.dom.extent(a) or not all(
                frame.le(phi.table[a][b], delta[c][b]) for b in self.carrier.elements
            ):
                raise AssumptionFailedError(symbol, phi.dom.label(a))

    def witness_count(self) -> int:
        """How many Assumption witness choices the function tables admit.

        Raises:
            AssumptionFailedError: If some argument has no witness.
        """
        return math.prod(len(c) for f in self.language.functions for c in self._witness_candidates(f))

    def all_witnesses(self, *, limit: int | None = None) -> list[dict[str, tuple[int, ...]]]:
        """Every choice of Assumption witnesses, lowest first."""
        bound = DEFAULT_SETTINGS.max_enumeration if limit is None else limit
        per_symbol = {}
        for f in self.language.functions:
            candidates = self._witness_candidates(f)
            per_symbol[f] = candidates
        count = math.prod(math.prod(len(c) for c in cs) for cs in per_symbol.values())
        if count > bound:
            raise SizeGuardError("witness maps", count, bound)
        symbols = list(per_symbol)
        maps_per_symbol = [list(itertools.product(*per_symbol[f])) for f in symbols]
        return [dict(zip(symbols, choice, strict=True)) for choice in itertools.product(*maps_per_symbol)]

    # -- Terms via witness maps --

    def term_element(self, t: Term, env: Mapping[str, int]) -> int:
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise ContextMismatchError(f"Variable {t.name} is not in the context") from None
        if isinstance(t, Param):
            return t.element
        args = [self.term_element(a, env) for a in t.args]
        return self.witnesses[t.symbol][self.index_of(args)]

    def term_row(self, t: Term, env: Mapping[str, int], ext: int) -> tuple[int, ...]:
        """Row ``t^M(a, -)`` of the term morphism at the assignment, by table composition."""
        frame, delta = self.frame, self.carrier.alpha
        if isinstance(t, Var):
            a = env[t.name]
            return tuple(frame.meet(ext, delta[a][b]) for b in self.carrier.elements)
        if isinstance(t, Param):
            a = t.element
            return tuple(frame.meet(ext, delta[a][b]) for b in self.carrier.elements)
        rows = [self.term_row(a, env, ext) for a in t.args]
        table = self.functions[t.symbol].table
        out = []
        for b in self.carrier.elements:
            acc = frame.bottom
            for position, c in enumerate(itertools.product(range(self.size), repeat=len(rows))):
                weight = frame.meet_all(r[x] for r, x in zip(rows, c, strict=True)) if rows else ext
                acc = frame.join(acc, frame.meet(weight, table[position][b]))
            out.append(acc)
        return tuple(out)

    def __repr__(self) -> str:
        return f"HStructure({self.size} elements over {self.frame!r})"


# -- Validation from raw tables --


def validate_hstructure(
    frame: Frame,
    carrier: Sequence[Hashable],
    delta: Sequence[Sequence[int]],
    functions: Mapping[str, Sequence[Sequence[int]]],
    relations: Mapping[str, Sequence[int]],
    language: Language | None = None,
) -> HStructure:
    """Check tables against the structure laws and find Assumption witnesses.

    When ``language`` is omitted, arities are inferred from table sizes,
    which needs a carrier of at least two elements.

    Raises:
        HSetLawError: If ``delta`` is not a valuation.
        NotMorphismError: If a function table breaks the morphism laws.
        NotStrictError: If a relation vector is not strict.
        AssumptionFailedError: If a function has no extent-preserving
            representing map.
    """
    hset = HSet(frame, carrier, delta)
    if language is None:
        language = Language(
            {f: _infer_arity(len(t), hset.size, f) for f, t in functions.items()},
            {r: _infer_arity(len(v), hset.size, r) for r, v in relations.items()},
        )
    powers: dict[int, Limit] = {}

    def power_of(k: int) -> Limit:
        if k not in powers:
            powers[k] = power(hset, k) if k else terminal(frame)
        return powers[k]

    morphisms = {
        f: HMorphism(power_of(n).hset, hset, functions[f]) for f, n in language.functions.items()
    }
    strict = {
        r: StrictRelation(power_of(n).hset, tuple(relations[r])) for r, n in language.relations.items()
    }
    structure = HStructure(hset, language, morphisms, strict)
    structure._powers.update(powers)
    return structure


def _infer_arity(length: int, size: int, symbol: str) -> int:
    if size < 2:
        raise LanguageError(f"Cannot infer the arity of {symbol} on a carrier of size {size}")
    n = round(math.log(length, size)) if length > 0 else 0
    if size**n != length:
        raise LanguageError(f"Table of {symbol} has {length} rows, not a power of {size}")
    return n


# -- Recursion path --


@dataclass(frozen=True)
class TraceStep:
    formula: str
    assignment: tuple[tuple[str, str], ...]
    value: str


@dataclass(frozen=True)
class ForcingReport:
    """The forcing value of a formula-in-context at parameters."""

    formula: FormulaInContext
    parameters: tuple[int, ...]
    value: int
    path: str
    trace: tuple[TraceStep, ...] = field(default=(), repr=False)


class _Recursion:
    def __init__(self, m: HStructure, *, check_terms: bool = True, trace: list[TraceStep] | None = None):
        self.m = m
        self.check_terms = check_terms
        self.trace = trace

    def _atom_terms(self, terms: Sequence[Term], env: Mapping[str, int], ext: int) -> tuple[int, ...]:
        elements = tuple(self.m.term_element(t, env) for t in terms)
        if self.check_terms:
            for t, e in zip(terms, elements, strict=True):
                row = self.m.term_row(t, env, ext)
                expected = tuple(
                    self.m.frame.meet(ext, self.m.carrier.alpha[e][b]) for b in self.m.carrier.elements
                )
                if row != expected:
                    logger.error("Term tables disagree with witness maps at %r", t)
                    raise InvariantError("Term interpretation by tables and by witness maps disagree")
        return elements

    def value(self, phi: Formula, env: dict[str, int], ext: int) -> int:
        m, frame = self.m, self.m.frame
        if isinstance(phi, Top):
            result = ext
        elif isinstance(phi, Bot):
            result = frame.bottom
        elif isinstance(phi, Rel):
            elements = self._atom_terms(phi.args, env, ext)
            result = frame.meet(ext, m.relations[phi.symbol](m.index_of(elements)))
        elif isinstance(phi, Eq):
            s, t = self._atom_terms((phi.left, phi.right), env, ext)
            result = frame.meet(ext, m.carrier.alpha[s][t])
        elif isinstance(phi, And):
            result = frame.meet(self.value(phi.left, env, ext), self.value(phi.right, env, ext))
        elif isinstance(phi, Or):
            result = frame.join(self.value(phi.left, env, ext), self.value(phi.right, env, ext))
        elif isinstance(phi, Imp):
            x, y = self.value(phi.left, env, ext), self.value(phi.right, env, ext)
            result = frame.meet(ext, frame.implies(x, y))
        elif isinstance(phi, Exists):
            result = frame.join_all(
                self.value(phi.body, {**env, phi.var: b}, frame.meet(ext, m.carrier.extent(b)))
                for b in m.carrier.elements
            )
        elif isinstance(phi, Forall):
            result = frame.meet(
                ext,
                frame.meet_all(
                    frame.implies(
                        m.carrier.extent(b),
                        self.value(phi.body, {**env, phi.var: b}, frame.meet(ext, m.carrier.extent(b))),
                    )
                    for b in m.carrier.elements
                ),
            )
        else:
            raise TypeError(f"Not a formula: {phi!r}")
        if self.trace is not None:
            self.trace.append(
                TraceStep(
                    format_formula(phi, m.name),
                    tuple((v, m.name(e)) for v, e in env.items()),
                    frame.name(result),
                )
            )
        return result


class RecursionSemantics:
    """Forcing values as vectors over ``Mᵏ`` for the scan engine."""

    def __init__(self, m: HStructure) -> None:
        self.m = m
        self._extents: dict[int, tuple[int, ...]] = {}
        self._recursion = _Recursion(m, check_terms=False)

    def ext(self, k: int) -> tuple[int, ...]:
        if k not in self._extents:
            self._extents[k] = self.m.extents(k)
        return self._extents[k]

    def atom(self, k: int, formula: Formula) -> tuple[int, ...]:
        variables = [f"v{i}" for i in range(1, k + 1)]
        ext = self.ext(k)
        return tuple(
            self._recursion.value(formula, dict(zip(variables, t, strict=True)), ext[i])
            for i, t in enumerate(self.m.tuples(k))
        )

    def conj(self, k: int, x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
        meet = self.m.frame.meet
        return tuple(meet(a, b) for a, b in zip(x, y, strict=True))

    def disj(self, k: int, x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
        join = self.m.frame.join
        return tuple(join(a, b) for a, b in zip(x, y, strict=True))

    def impl(self, k: int, x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
        f = self.m.frame
        return tuple(f.meet(e, f.implies(a, b)) for e, a, b in zip(self.ext(k), x, y, strict=True))

    def exists(self, k: int, x: tuple[int, ...]) -> tuple[int, ...]:
        n, f = self.m.size, self.m.frame
        return tuple(f.join_all(x[i * n : (i + 1) * n]) for i in range(n**k))

    def forall(self, k: int, x: tuple[int, ...]) -> tuple[int, ...]:
        n, f, carrier = self.m.size, self.m.frame, self.m.carrier
        ext = self.ext(k)
        return tuple(
            f.meet(
                ext[i],
                f.meet_all(f.implies(carrier.extent(b), x[i * n + b]) for b in carrier.elements),
            )
            for i in range(n**k)
        )


# -- Categorical path --


class CategoricalSemantics:
    """Subobjects ``⟦v1..vk . φ⟧`` of ``Mᵏ`` built from the finite topos structure."""

    def __init__(self, m: HStructure) -> None:
        self.m = m
        self._lattices: dict[int, SubobjectLattice] = {}
        self._projections: dict[int, HMorphism] = {}

    def lattice(self, k: int) -> SubobjectLattice:
        if k not in self._lattices:
            self._lattices[k] = SubobjectLattice(self.m.power(k).hset)
        return self._lattices[k]

    def projection(self, k: int) -> HMorphism:
        """``π : Mᵏ⁺¹ → Mᵏ`` dropping the last coordinate."""
        if k not in self._projections:
            source = self.m.power(k + 1)
            if k == 0:
                self._projections[k] = terminal_map(source.hset, self.m.power(0))
            else:
                self._projections[k] = pairing(self.m.power(k), list(source.legs[:k]))
        return self._projections[k]

    def term(self, t: Term, variables: Sequence[str]) -> HMorphism:
        k = len(variables)
        source = self.m.power(k)
        if isinstance(t, Var):
            if t.name not in variables:
                raise ContextMismatchError(f"Variable {t.name} is not in the context")
            position = len(variables) - 1 - list(reversed(variables)).index(t.name)
            return source.legs[position]
        if isinstance(t, Param):
            raise ContextMismatchError("Abstract parameters before building subobjects")
        f = self.m.functions[t.symbol]
        if not t.args:
            return compose_tables(terminal_map(source.hset, self.m.power(0)), f)
        return compose_tables(self._pair(t.args, variables), f)

    def _pair(self, terms: Sequence[Term], variables: Sequence[str]) -> HMorphism:
        k = len(variables)
        if not terms:
            return terminal_map(self.m.power(k).hset, self.m.power(0))
        return pairing(self.m.power(len(terms)), [self.term(t, variables) for t in terms])

    def subobject(self, phi: Formula, variables: Sequence[str]) -> StrictRelation:
        k = len(variables)
        lattice = self.lattice(k)
        if isinstance(phi, Top):
            return lattice.top
        if isinstance(phi, Bot):
            return lattice.bottom
        if isinstance(phi, Rel):
            mor = self._pair(phi.args, variables)
            return change_of_base(mor).pullback(self.m.relations[phi.symbol])
        if isinstance(phi, Eq):
            eq = equalizer(self.term(phi.left, variables), self.term(phi.right, variables))
            return lattice.from_mono(eq.legs[0])
        if isinstance(phi, And):
            return lattice.meet(self.subobject(phi.left, variables), self.subobject(phi.right, variables))
        if isinstance(phi, Or):
            return lattice.join(self.subobject(phi.left, variables), self.subobject(phi.right, variables))
        if isinstance(phi, Imp):
            return lattice.implies(self.subobject(phi.left, variables), self.subobject(phi.right, variables))
        if isinstance(phi, (Exists, Forall)):
            body = self.subobject(phi.body, (*variables, phi.var))
            return self.exists(k, body) if isinstance(phi, Exists) else self.forall(k, body)
        raise TypeError(f"Not a formula: {phi!r}")

    # Semantics protocol

    def atom(self, k: int, formula: Formula) -> StrictRelation:
        return self.subobject(formula, [f"v{i}" for i in range(1, k + 1)])

    def conj(self, k: int, x: StrictRelation, y: StrictRelation) -> StrictRelation:
        return self.lattice(k).meet(x, y)

    def disj(self, k: int, x: StrictRelation, y: StrictRelation) -> StrictRelation:
        return self.lattice(k).join(x, y)

    def impl(self, k: int, x: StrictRelation, y: StrictRelation) -> StrictRelation:
        return self.lattice(k).implies(x, y)

    def exists(self, k: int, x: StrictRelation) -> StrictRelation:
        """The image of ``π ∘ ι_σ``."""
        _, mono = self.lattice(k).image(self.lattice(k + 1).restrict(x, self.projection(k)))
        return self.lattice(k).from_mono(mono)

    def forall(self, k: int, x: StrictRelation) -> StrictRelation:
        """The right adjoint of pulling back along ``π``."""
        return change_of_base(self.projection(k)).forall(x)


# -- Public evaluation --


def _resolve_parameters(m: HStructure, params: Sequence[int | str]) -> tuple[int, ...]:
    resolved = []
    for p in params:
        if isinstance(p, int) and not isinstance(p, bool):
            if not 0 <= p < m.size:
                raise UnknownParameterError(f"Element id {p} is out of range")
            resolved.append(p)
        else:
            resolved.append(m.carrier.index(p))
    return tuple(resolved)


def forcing_value(
    m: HStructure,
    fic: FormulaInContext,
    params: Sequence[int | str] = (),
    path: str = "recursion",
    *,
    trace: bool = False,
) -> ForcingReport:
    """The forcing value ``‖φ(a)‖`` by the recursion or the categorical path.

    ``params`` match ``fic.context`` positionally; carrier parameters inside
    the formula are abstracted into extra context variables first. The
    recursion path also computes every atomic term both from morphism
    tables and from witness maps and insists they agree.

    Raises:
        ContextMismatchError: If the number of parameters differs from the context.
        UnknownParameterError: If a parameter is not a carrier element.
    """
    resolved = _resolve_parameters(m, params)
    if len(resolved) != fic.arity:
        raise ContextMismatchError(
            f"Context has {fic.arity} variable(s) but {len(resolved)} parameter(s) were given"
        )
    closed, extra = abstract_parameters(fic)
    values = (*resolved, *extra)
    if path == "recursion":
        steps: list[TraceStep] | None = [] if trace else None
        evaluator = _Recursion(m, trace=steps)
        env = dict(zip(closed.context, values, strict=True))
        value = evaluator.value(closed.formula, env, m.extent_of(values))
        return ForcingReport(fic, resolved, value, path, tuple(steps or ()))
    if path == "categorical":
        sigma = CategoricalSemantics(m).subobject(closed.formula, closed.context)
        return ForcingReport(fic, resolved, sigma(m.index_of(values)), path)
    raise ValueError(f"Unknown path {path!r}; expected 'recursion' or 'categorical'")


# -- Sections --


def gamma_structure(
    m: HStructure,
    u: int,
    witnesses: Mapping[str, Sequence[int]] | None = None,
) -> OrdinaryStructure:
    """``Γ(U, M)``: the elements of extent exactly ``U``.

    Functions restrict the witness maps; a constant takes the element of
    extent ``U`` that agrees with its global value on all of ``U``. A relation
    holds at a tuple when its value is at least ``U``.

    Raises:
        WitnessNotClosedError: If a witness map leaves ``Γ(U, M)`` or a
            constant has no restriction to ``U``.
    """
    frame, carrier = m.frame, m.carrier
    maps = dict(witnesses) if witnesses is not None else m.witnesses
    universe = [a for a in carrier.elements if carrier.extent(a) == u]
    position = {a: i for i, a in enumerate(universe)}
    functions: dict[str, dict[tuple[int, ...], int]] = {}
    for f, arity in m.language.functions.items():
        h = maps[f]
        table: dict[tuple[int, ...], int] = {}
        if arity == 0:
            value = h[0]
            found = [b for b in universe if carrier.alpha[b][value] == u]
            if not found:
                raise WitnessNotClosedError(f"Constant {f} has no restriction to {frame.name(u)}")
            table[()] = position[found[0]]
        else:
            for args in itertools.product(universe, repeat=arity):
                image = h[m.index_of(args)]
                if image not in position:
                    raise WitnessNotClosedError(f"Witness of {f} leaves the elements of extent {frame.name(u)}")
                table[tuple(position[a] for a in args)] = position[image]
        functions[f] = table
    relations = {
        r: frozenset(
            tuple(position[a] for a in args)
            for args in itertools.product(universe, repeat=arity)
            if frame.le(u, m.relations[r](m.index_of(args)))
        )
        for r, arity in m.language.relations.items()
    }
    return OrdinaryStructure(m.language, tuple(carrier.label(a) for a in universe), functions, relations)


@dataclass(frozen=True)
class WitnessDependence:
    """Pairs of witness choices giving non-isomorphic ``Γ(U, M)``."""

    element: int
    choices: int
    non_isomorphic: tuple[tuple[dict[str, tuple[int, ...]], dict[str, tuple[int, ...]]], ...]

    @property
    def independent(self) -> bool:
        return not self.non_isomorphic


def witness_dependence(m: HStructure, u: int, *, limit: int | None = None) -> WitnessDependence:
    """Build ``Γ(U, M)`` for every Assumption witness and compare with the stored one."""
    choices = m.all_witnesses(limit=limit)
    base = gamma_structure(m, u)
    bad = []
    for choice in choices:
        other = gamma_structure(m, u, choice)
        if structures_isomorphic(base, other, limit=limit) is None:
            bad.append((dict(m.witnesses), choice))
    if bad:
        logger.info("Γ(%s, M) depends on the witness choice", m.frame.name(u))
    return WitnessDependence(u, len(choices), tuple(bad))


# -- Scans --


@dataclass(frozen=True)
class ScanFailure:
    """One failed check in a scan."""

    check: str
    formula: str
    params: tuple[str, ...]
    detail: dict[str, Any]


@dataclass(frozen=True)
class ScanReport:
    check: str
    depth: int
    arity: int
    meanings: int
    failures: tuple[ScanFailure, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def _fail(check: str, m: HStructure, fic: FormulaInContext, params: Sequence[int], **detail: Any) -> ScanFailure:
    failure = ScanFailure(check, format_formula(fic.formula, m.name), tuple(m.name(p) for p in params), detail)
    logger.info("%s failed for %s at %s", check, failure.formula, failure.params)
    return failure


def verify_paths(
    m: HStructure,
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    limit: int | None = None,
) -> ScanReport:
    """Compare the recursion and categorical paths on every formula up to ``depth``.

    The closure is deduplicated on the recursion meaning alone. The categorical
    subobject is then built once per kept witness, reusing the subobjects of
    its immediate subformulas, so every connective costs one lattice operation.
    """
    depth = DEFAULT_SETTINGS.depth if depth is None else depth
    arity = DEFAULT_SETTINGS.scan_arity if arity is None else arity
    term_depth = DEFAULT_SETTINGS.term_depth if term_depth is None else term_depth
    recursion = RecursionSemantics(m)
    closure = semantic_closure(recursion, m.language, arity, depth, term_depth, limit=limit)
    categorical = CategoricalSemantics(m)
    connectives = {"and": categorical.conj, "or": categorical.disj, "imp": categorical.impl}
    sigmas: dict[tuple[int, int], StrictRelation] = {}

    def sigma_of(k: int, i: int) -> StrictRelation:
        key = (k, i)
        if key not in sigmas:
            e = closure.entries[k][i]
            if e.op == "atom":
                sigmas[key] = categorical.atom(k, e.args[0])
            elif e.op in ("and", "or", "imp"):
                combine = connectives[e.op]
                sigmas[key] = combine(k, sigma_of(k, e.args[0]), sigma_of(k, e.args[1]))
            else:
                quantify = categorical.exists if e.op == "exists" else categorical.forall
                sigmas[key] = quantify(k, sigma_of(k + 1, e.args[0]))
        return sigmas[key]

    failures = []
    for k in closure.entries:
        tuples = m.tuples(k)
        for j, (fic, vector) in enumerate(closure.items(k)):
            sigma = sigma_of(k, j)
            for i, t in enumerate(tuples):
                if vector[i] != sigma(i):
                    failures.append(
                        _fail(
                            "paths",
                            m,
                            fic,
                            t,
                            recursion=m.frame.name(vector[i]),
                            categorical=m.frame.name(sigma(i)),
                        )
                    )
    logger.debug("Path comparison built %d categorical subobjects", len(sigmas))
    return ScanReport("paths", depth, arity, closure.count(), tuple(failures))


def godel_stability_check(
    m: HStructure,
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    limit: int | None = None,
) -> ScanReport:
    """``‖φᴳ‖ = ‖¬¬φᴳ‖`` everywhere, and ``‖φᴳ‖ = ‖φ‖`` on Boolean frames."""
    depth = DEFAULT_SETTINGS.depth if depth is None else depth
    arity = DEFAULT_SETTINGS.scan_arity if arity is None else arity
    term_depth = DEFAULT_SETTINGS.term_depth if term_depth is None else term_depth
    plain = RecursionSemantics(m)
    semantics = ProductSemantics(plain, GodelSemantics(plain))
    closure = semantic_closure(semantics, m.language, arity, depth, term_depth, limit=limit)
    frame = m.frame
    failures = []
    for k in closure.entries:
        ext = plain.ext(k)
        tuples = m.tuples(k)
        for fic, (value, godel) in closure.items(k):
            for i, t in enumerate(tuples):
                g = godel[i]
                nn = frame.meet(ext[i], frame.implies(frame.meet(ext[i], frame.implies(g, frame.bottom)), frame.bottom))
                if g != nn:
                    failures.append(_fail("stability", m, fic, t, godel=frame.name(g), double_negation=frame.name(nn)))
                if frame.is_boolean and g != value[i]:
                    failures.append(_fail("boolean", m, fic, t, godel=frame.name(g), plain=frame.name(value[i])))
    return ScanReport("godel-stability", depth, arity, closure.count(), tuple(failures))


def context_extension_check(
    m: HStructure,
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    limit: int | None = None,
) -> ScanReport:
    """``‖φ(a, b)‖ = ‖φ(a)‖ ∧ δ(b)`` for a fresh trailing variable."""
    depth = DEFAULT_SETTINGS.depth if depth is None else depth
    arity = DEFAULT_SETTINGS.scan_arity if arity is None else arity
    term_depth = DEFAULT_SETTINGS.term_depth if term_depth is None else term_depth
    closure = semantic_closure(RecursionSemantics(m), m.language, arity, depth, term_depth, limit=limit)
    frame = m.frame
    failures = []
    for k in range(arity + 1):
        for fic, vector in closure.items(k):
            fresh = next(f"x{i}" for i in itertools.count() if f"x{i}" not in fic.context)
            extended = FormulaInContext(fic.formula, (*fic.context, fresh))
            for i, t in enumerate(m.tuples(k)):
                for b in m.carrier.elements:
                    got = forcing_value(m, extended, (*t, b)).value
                    want = frame.meet(vector[i], m.carrier.extent(b))
                    if got != want:
                        failures.append(
                            _fail("context", m, fic, (*t, b), extended=frame.name(got), expected=frame.name(want))
                        )
    return ScanReport("context-extension", depth, arity, closure.count(), tuple(failures))


@dataclass(frozen=True)
class Sequent:
    """``premise ⊢ conclusion`` over a shared context."""

    premise: FormulaInContext
    conclusion: FormulaInContext
    name: str = ""


def soundness_check(m: HStructure, sequents: Iterable[Sequent]) -> list[ScanFailure]:
    """``‖premise(a)‖ ≤ ‖conclusion(a)‖`` for every sequent and every tuple."""
    failures = []
    for seq in sequents:
        k = seq.premise.arity
        for t in m.tuples(k):
            lhs = forcing_value(m, seq.premise, t).value
            rhs = forcing_value(m, seq.conclusion, t).value
            if not m.frame.le(lhs, rhs):
                failures.append(
                    _fail("soundness", m, seq.premise, t, sequent=seq.name, premise=m.frame.name(lhs), conclusion=m.frame.name(rhs))
                )
    return failures


def random_hstructure(
    frame: Frame,
    rng: random.Random,
    language: Language,
    size: int | None = None,
) -> HStructure:
    """A seeded random structure for property tests.

    Extents and valuations are random and closed under transitivity;
    relation vectors are closed to strict relations. Constants all name
    element 0, which is made global. Function symbols of positive arity are
    not supported.
    """
    if any(n > 0 for n in language.functions.values()):
        raise LanguageError("Random structures support constants and relations only")
    n = size if size is not None else rng.randint(1, 3)
    extents = [rng.choice(list(frame.elements)) for _ in range(n)]
    if language.constants:
        extents[0] = frame.top
    delta = [[frame.bottom] * n for _ in range(n)]
    for a in range(n):
        delta[a][a] = extents[a]
        for b in range(a):
            cap = frame.meet(extents[a], extents[b])
            value = frame.meet(cap, rng.choice(list(frame.elements)))
            delta[a][b] = delta[b][a] = value
    changed = True
    while changed:
        changed = False
        for a, b, c in itertools.product(range(n), repeat=3):
            through = frame.meet(delta[a][b], delta[b][c])
            if not frame.le(through, delta[a][c]):
                delta[a][c] = frame.join(delta[a][c], through)
                changed = True
    carrier = HSet(frame, [f"m{i}" for i in range(n)], delta)
    structure_powers = {k: power(carrier, k) if k else terminal(frame) for k in set(language.relations.values()) | {0}}
    relations = {}
    for r, arity in language.relations.items():
        obj = structure_powers[arity].hset
        raw = [frame.meet(obj.extent(i), rng.choice(list(frame.elements))) for i in obj.elements]
        closed = tuple(
            frame.join_all(frame.meet(raw[j], obj.alpha[j][i]) for j in obj.elements) for i in obj.elements
        )
        relations[r] = StrictRelation(obj, closed)
    functions = {
        c: HMorphism.represented_by(structure_powers[0].hset, carrier, [0]) for c in language.constants
    }
    m = HStructure(carrier, language, functions, relations, witnesses={c: (0,) for c in language.constants})
    m._powers.update(structure_powers)
    return m


# -- Maximum principle --


@dataclass(frozen=True)
class MaxPrincipleRow:
    formula: str
    params: tuple[str, ...]
    exists_value: str
    witnesses: tuple[str, ...]
    holds: bool
    value: int = 0
    witness_values: tuple[int, ...] = ()


@dataclass(frozen=True)
class MaxPrincipleReport:
    mode: str
    depth: int
    rows: tuple[MaxPrincipleRow, ...]

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows)

    @property
    def failures(self) -> tuple[MaxPrincipleRow, ...]:
        return tuple(r for r in self.rows if not r.holds)


def _nn(frame: Frame, ext: int, x: int) -> int:
    return frame.meet(ext, frame.implies(frame.meet(ext, frame.implies(x, frame.bottom)), frame.bottom))


def max_principle_check(
    m: HStructure,
    mode: str = "full",
    depth: int | None = None,
    arity: int | None = None,
    term_depth: int | None = None,
    *,
    limit: int | None = None,
) -> MaxPrincipleReport:
    """Check the maximum principle, its finite-witness variant, or the mixing property.

    ``full`` looks for one ``b`` with ``‖∃vφ(v,a)‖ ≤ ‖¬¬φ(b,a)‖``. ``variant``
    looks, for Gödel translations, for a smallest list of witnesses whose
    join is dense in the existential value. ``mixing`` glues elements along
    every nonempty pairwise-disjoint family of nonzero opens.
    """
    depth = DEFAULT_SETTINGS.depth if depth is None else depth
    arity = DEFAULT_SETTINGS.scan_arity if arity is None else arity
    term_depth = DEFAULT_SETTINGS.term_depth if term_depth is None else term_depth
    if mode == "mixing":
        return MaxPrincipleReport(mode, depth, tuple(_mixing_rows(m, limit)))
    if mode not in ("full", "variant"):
        raise ValueError(f"Unknown mode {mode!r}")
    plain = RecursionSemantics(m)
    semantics = plain if mode == "full" else GodelSemantics(plain)
    closure = semantic_closure(semantics, m.language, arity, depth, term_depth, limit=limit)
    frame, n = m.frame, m.size
    rows = []
    for k in range(min(arity, closure.arity + closure.depth - 1) + 1):
        body_k = k + 1
        ext_body = plain.ext(body_k)
        for i, entry in enumerate(closure.entries.get(body_k, [])):
            if entry.level > depth - 1:
                continue
            fic = FormulaInContext(closure.formula(body_k, i), tuple(f"v{j}" for j in range(1, body_k + 1)))
            vector = entry.meaning
            for a_index, a in enumerate(m.tuples(k)):
                values = [vector[a_index * n + b] for b in range(n)]
                exists_value = frame.join_all(values)
                if mode == "full":
                    found = [
                        b
                        for b in range(n)
                        if frame.le(exists_value, _nn(frame, ext_body[a_index * n + b], values[b]))
                    ]
                    chosen = found[:1]
                else:
                    chosen = _smallest_dense_family(frame, values, exists_value)
                rows.append(
                    MaxPrincipleRow(
                        format_formula(Exists(f"v{body_k}", fic.formula), m.name),
                        tuple(m.name(x) for x in a),
                        frame.name(exists_value),
                        tuple(m.name(b) for b in chosen),
                        bool(chosen) or exists_value == frame.bottom,
                        exists_value,
                        tuple(values[b] for b in chosen),
                    )
                )
    return MaxPrincipleReport(mode, depth, tuple(rows))


def _smallest_dense_family(frame: Frame, values: Sequence[int], target: int) -> list[int]:
    """Fewest positions whose join has ``target ≤ ¬¬join``; empty if target is 0."""
    if target == frame.bottom:
        return []
    for size in range(1, len(values) + 1):
        for combo in itertools.combinations(range(len(values)), size):
            j = frame.join_all(values[b] for b in combo)
            if frame.le(target, frame.neg(frame.neg(j))):
                return list(combo)
    return []


def _mixing_rows(m: HStructure, limit: int | None) -> list[MaxPrincipleRow]:
    frame, carrier = m.frame, m.carrier
    nonzero = [u for u in frame.elements if u != frame.bottom]
    rows = []
    bound = DEFAULT_SETTINGS.max_enumeration if limit is None else limit
    families = []
    for size in range(1, len(nonzero) + 1):
        for family in itertools.combinations(nonzero, size):
            if all(frame.meet(u, w) == frame.bottom for u, w in itertools.combinations(family, 2)):
                families.append(family)
    for family in families:
        options = [[a for a in carrier.elements if frame.le(u, carrier.extent(a))] for u in family]
        count = math.prod(len(o) for o in options)
        if count > bound:
            raise SizeGuardError("mixing families", count, bound)
        for chosen in itertools.product(*options):
            glued = [
                a
                for a in carrier.elements
                if all(frame.le(u, carrier.alpha[a][ai]) for u, ai in zip(family, chosen, strict=True))
            ]
            rows.append(
                MaxPrincipleRow(
                    "mixing",
                    tuple(f"{frame.name(u)}:{m.name(a)}" for u, a in zip(family, chosen, strict=True)),
                    frame.name(frame.join_all(family)),
                    tuple(m.name(a) for a in glued[:1]),
                    bool(glued),
                )
            )
    return rows
