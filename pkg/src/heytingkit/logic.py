"""First-order syntax, the formula text format, and classical evaluation.

Formulas are immutable ASTs. Negation is not a node of its own: ``~φ`` is
stored as ``Imp(φ, Bot())``. Carrier parameters are ``Param`` nodes holding an
element id, never a name, so enumerations cannot alias two elements.

Text format (ASCII)::

    formula := quant | impl
    quant   := ("forall" | "exists") var "." formula
    impl    := or ("->" impl)?
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "~" unary | quant | atom
    atom    := "true" | "false" | rel ["(" terms ")"] | term "=" term | "(" formula ")"

A quantifier extends as far right as possible, so ``R(v) & forall w. S(w) | T``
reads the disjunction as part of the quantifier body.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
import re
from collections.abc import Callable, Hashable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, Generic, NoReturn, Protocol, TypeVar

from .config import DEFAULT_SETTINGS
from .exceptions import (
    ArityError,
    DuplicateContextVariableError,
    FormulaSyntaxError,
    LanguageError,
    SizeGuardError,
    UnassignedVariableError,
    UnknownSymbolError,
)

logger = logging.getLogger(__name__)

KEYWORDS = frozenset({"forall", "exists", "true", "false"})
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


# -- Languages --


class Language:
    """Function and relation symbols with arities, in declaration order.

    Arity-0 functions are constants and arity-0 relations are propositions.
    """

    def __init__(
        self,
        functions: Mapping[str, int] | None = None,
        relations: Mapping[str, int] | None = None,
    ) -> None:
        self.functions: dict[str, int] = dict(functions or {})
        self.relations: dict[str, int] = dict(relations or {})
        clash = sorted(set(self.functions) & set(self.relations))
        if clash:
            raise LanguageError(f"Symbol declared as both function and relation: {clash[0]}")
        for name, arity in itertools.chain(self.functions.items(), self.relations.items()):
            if not _IDENT.match(name) or name in KEYWORDS:
                raise LanguageError(f"Invalid symbol name {name!r}")
            if not isinstance(arity, int) or isinstance(arity, bool) or arity < 0:
                raise LanguageError(f"Arity of {name} must be a non-negative integer")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Language:
        return cls(data.get("functions", {}), data.get("relations", {}))

    def to_dict(self) -> dict[str, Any]:
        return {"functions": dict(self.functions), "relations": dict(self.relations)}

    @property
    def constants(self) -> list[str]:
        return [f for f, n in self.functions.items() if n == 0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Language):
            return NotImplemented
        return self.functions == other.functions and self.relations == other.relations

    def __hash__(self) -> int:
        return hash((tuple(self.functions.items()), tuple(self.relations.items())))

    def __repr__(self) -> str:
        return f"Language(functions={self.functions}, relations={self.relations})"


# -- Terms and formulas --


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Param:
    """A carrier element used as a constant of the expanded language."""

    element: int


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple[Term, ...] = ()


Term = Var | Param | App


@dataclass(frozen=True)
class Rel:
    symbol: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall:
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists:
    var: str
    body: Formula


Formula = Rel | Eq | Top | Bot | And | Or | Imp | Forall | Exists
ATOMIC = (Rel, Eq, Top, Bot)


def neg(phi: Formula) -> Formula:
    return Imp(phi, Bot())


def is_neg(phi: Formula) -> bool:
    return isinstance(phi, Imp) and isinstance(phi.right, Bot)


@dataclass(frozen=True)
class FormulaInContext:
    """A formula with an ordered list of distinct variables covering its free ones."""

    formula: Formula
    context: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "context", tuple(self.context))
        seen: set[str] = set()
        for v in self.context:
            if v in seen:
                raise DuplicateContextVariableError(f"Variable {v} appears twice in the context")
            seen.add(v)
        missing = [v for v in free_variables(self.formula) if v not in seen]
        if missing:
            raise UnknownSymbolError(f"Free variable {missing[0]} is not in the context")

    @property
    def arity(self) -> int:
        return len(self.context)


# -- Syntactic helpers --


def term_variables(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, App):
        for a in t.args:
            yield from term_variables(a)


def free_variables(phi: Formula) -> tuple[str, ...]:
    """Free variables in order of first appearance."""
    found: dict[str, None] = {}

    def walk(f: Formula, bound: frozenset[str]) -> None:
        if isinstance(f, (Rel, Eq)):
            terms = f.args if isinstance(f, Rel) else (f.left, f.right)
            for t in terms:
                for v in term_variables(t):
                    if v not in bound:
                        found.setdefault(v)
        elif isinstance(f, (And, Or, Imp)):
            walk(f.left, bound)
            walk(f.right, bound)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body, bound | {f.var})

    walk(phi, frozenset())
    return tuple(found)


def parameters(phi: Formula) -> tuple[int, ...]:
    """Carrier parameters in order of first appearance."""
    found: dict[int, None] = {}

    def term(t: Term) -> None:
        if isinstance(t, Param):
            found.setdefault(t.element)
        elif isinstance(t, App):
            for a in t.args:
                term(a)

    def walk(f: Formula) -> None:
        if isinstance(f, Rel):
            for t in f.args:
                term(t)
        elif isinstance(f, Eq):
            term(f.left)
            term(f.right)
        elif isinstance(f, (And, Or, Imp)):
            walk(f.left)
            walk(f.right)
        elif isinstance(f, (Forall, Exists)):
            walk(f.body)

    walk(phi)
    return tuple(found)


def is_forall_free(phi: Formula) -> bool:
    if isinstance(phi, Forall):
        return False
    if isinstance(phi, (And, Or, Imp)):
        return is_forall_free(phi.left) and is_forall_free(phi.right)
    if isinstance(phi, Exists):
        return is_forall_free(phi.body)
    return True


def depth(phi: Formula) -> int:
    """Connective and quantifier nesting; atoms have depth 0."""
    if isinstance(phi, (And, Or, Imp)):
        return 1 + max(depth(phi.left), depth(phi.right))
    if isinstance(phi, (Forall, Exists)):
        return 1 + depth(phi.body)
    return 0


def term_depth(t: Term) -> int:
    if isinstance(t, App) and t.args:
        return 1 + max(term_depth(a) for a in t.args)
    return 0


def substitute_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, App):
        return App(t.symbol, tuple(substitute_term(a, mapping) for a in t.args))
    return t


def substitute(phi: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free variables; bound variables must not occur in the substituted terms."""
    if isinstance(phi, Rel):
        return Rel(phi.symbol, tuple(substitute_term(t, mapping) for t in phi.args))
    if isinstance(phi, Eq):
        return Eq(substitute_term(phi.left, mapping), substitute_term(phi.right, mapping))
    if isinstance(phi, (And, Or, Imp)):
        return type(phi)(substitute(phi.left, mapping), substitute(phi.right, mapping))
    if isinstance(phi, (Forall, Exists)):
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        return type(phi)(phi.var, substitute(phi.body, inner))
    return phi


def alpha_normalize(phi: Formula, avoid: Iterable[str] = ()) -> Formula:
    """Rename bound variables to ``w1, w2, ...`` by binding order.

    Names in ``avoid`` and the free variables of ``phi`` are skipped.
    """
    taken = set(avoid) | set(free_variables(phi))
    counter = itertools.count(1)

    def fresh() -> str:
        while True:
            name = f"w{next(counter)}"
            if name not in taken:
                return name

    def walk(f: Formula, renames: Mapping[str, Term]) -> Formula:
        if isinstance(f, (Rel, Eq)):
            return substitute(f, renames)
        if isinstance(f, (And, Or, Imp)):
            return type(f)(walk(f.left, renames), walk(f.right, renames))
        if isinstance(f, (Forall, Exists)):
            name = fresh()
            return type(f)(name, walk(f.body, {**renames, f.var: Var(name)}))
        return f

    return walk(phi, {})


def abstract_parameters(fic: FormulaInContext) -> tuple[FormulaInContext, tuple[int, ...]]:
    """Replace carrier parameters by fresh trailing context variables.

    Returns the new formula-in-context and the parameters in the order of
    the added variables.
    """
    params = parameters(fic.formula)
    if not params:
        return fic, ()
    taken = set(fic.context) | set(_all_variables(fic.formula))
    names: list[str] = []
    n = 1
    while len(names) < len(params):
        name = f"p{n}"
        n += 1
        if name not in taken:
            names.append(name)
    mapping = {e: Var(v) for e, v in zip(params, names, strict=True)}

    def term(t: Term) -> Term:
        if isinstance(t, Param):
            return mapping[t.element]
        if isinstance(t, App):
            return App(t.symbol, tuple(term(a) for a in t.args))
        return t

    def walk(f: Formula) -> Formula:
        if isinstance(f, Rel):
            return Rel(f.symbol, tuple(term(t) for t in f.args))
        if isinstance(f, Eq):
            return Eq(term(f.left), term(f.right))
        if isinstance(f, (And, Or, Imp)):
            return type(f)(walk(f.left), walk(f.right))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, walk(f.body))
        return f

    return FormulaInContext(walk(fic.formula), (*fic.context, *names)), params


def _all_variables(phi: Formula) -> set[str]:
    names = set(free_variables(phi))
    if isinstance(phi, (And, Or, Imp)):
        names |= _all_variables(phi.left) | _all_variables(phi.right)
    elif isinstance(phi, (Forall, Exists)):
        names |= {phi.var} | _all_variables(phi.body)
    return names


# -- Gödel translation --


def godel_translate(phi: Formula) -> Formula:
    """Double-negation translation.

    Atoms other than ⊥ become ``~~φ``; ∧, → and ∀ are kept; ``φ | ψ`` becomes
    ``~(~φ & ~ψ)`` and ``exists v. φ`` becomes ``~forall v. ~φ``.
    """
    if isinstance(phi, Bot):
        return phi
    if isinstance(phi, ATOMIC):
        return neg(neg(phi))
    if isinstance(phi, And):
        return And(godel_translate(phi.left), godel_translate(phi.right))
    if isinstance(phi, Or):
        return neg(And(neg(godel_translate(phi.left)), neg(godel_translate(phi.right))))
    if isinstance(phi, Imp):
        return Imp(godel_translate(phi.left), godel_translate(phi.right))
    if isinstance(phi, Forall):
        return Forall(phi.var, godel_translate(phi.body))
    if isinstance(phi, Exists):
        return neg(Forall(phi.var, neg(godel_translate(phi.body))))
    raise TypeError(f"Not a formula: {phi!r}")


# -- Tokenizer and parser --


@dataclass(frozen=True)
class Token:
    kind: str  # ident, param, op, end
    value: str
    column: int


_TOKEN = re.compile(r"(?P<op>->|[&|~().,=])|(?P<param>#\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)")


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"Unexpected character {text[pos]!r}", text, pos + 1)
        kind = m.lastgroup or "op"
        tokens.append(Token(kind, m.group(), pos + 1))
        pos = m.end()
    tokens.append(Token("end", "", len(text) + 1))
    return tokens


class Parser:
    """Recursive-descent parser over one formula or term string.

    Identifiers in term position resolve as: bound or context variable,
    then function symbol, then carrier parameter, then (only when no
    context was given) a new free variable.
    """

    def __init__(
        self,
        text: str,
        language: Language,
        context: Sequence[str] | None = None,
        parameters: Mapping[str, int] | None = None,
    ) -> None:
        self.text = text
        self.language = language
        self.tokens = tokenize(text)
        self.pos = 0
        self.bound: list[str] = []
        self.context = tuple(context) if context is not None else None
        if self.context is not None and len(set(self.context)) != len(self.context):
            dupes = [v for v in self.context if self.context.count(v) > 1]
            raise DuplicateContextVariableError(f"Variable {dupes[0]} appears twice in the context")
        self.free: list[str] = []
        self.parameters = dict(parameters or {})

    # -- token helpers --

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.peek()
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "ident") and tok.value == value

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"Expected {value!r}")
        return self.advance()

    def fail(self, message: str, tok: Token | None = None) -> NoReturn:
        tok = tok or self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.value)
        raise FormulaSyntaxError(f"{message}, found {found}", self.text, tok.column)

    # -- grammar --

    def parse_formula(self) -> FormulaInContext:
        phi = self.formula()
        if self.peek().kind != "end":
            self.fail("Unexpected token")
        context = self.context if self.context is not None else tuple(self.free)
        return FormulaInContext(phi, context)

    def parse_term(self) -> Term:
        t = self.term()
        if self.peek().kind != "end":
            self.fail("Unexpected token")
        return t

    def formula(self) -> Formula:
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.impl()

    def quant(self) -> Formula:
        kind = self.advance().value
        tok = self.advance()
        if tok.kind != "ident" or tok.value in KEYWORDS:
            self.fail("Expected a variable", tok)
        self.expect(".")
        self.bound.append(tok.value)
        try:
            body = self.formula()
        finally:
            self.bound.pop()
        return Forall(tok.value, body) if kind == "forall" else Exists(tok.value, body)

    def impl(self) -> Formula:
        left = self.disj()
        if self.at("->"):
            self.advance()
            return Imp(left, self.impl())
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.at("|"):
            self.advance()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.at("&"):
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.at("~"):
            self.advance()
            return neg(self.unary())
        if self.at("forall") or self.at("exists"):
            return self.quant()
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if self.at("("):
            self.advance()
            phi = self.formula()
            self.expect(")")
            return phi
        if self.at("true"):
            self.advance()
            return Top()
        if self.at("false"):
            self.advance()
            return Bot()
        if tok.kind == "ident" and tok.value in self.language.relations and not self._is_variable(tok.value):
            self.advance()
            arity = self.language.relations[tok.value]
            args = self.arguments() if self.at("(") else ()
            if len(args) != arity:
                raise ArityError(f"{tok.value} takes {arity} argument(s), got {len(args)}")
            return Rel(tok.value, args)
        left = self.term()
        self.expect("=")
        return Eq(left, self.term())

    def arguments(self) -> tuple[Term, ...]:
        self.expect("(")
        args: list[Term] = []
        if self.at(")"):
            self.advance()
            return ()
        args.append(self.term())
        while self.at(","):
            self.advance()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    def _is_variable(self, name: str) -> bool:
        return name in self.bound or (self.context is not None and name in self.context)

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "param":
            self.advance()
            return Param(int(tok.value[1:]))
        if tok.kind != "ident" or tok.value in KEYWORDS:
            self.fail("Expected a term")
        name = tok.value
        self.advance()
        if self._is_variable(name):
            return Var(name)
        if name in self.language.functions:
            arity = self.language.functions[name]
            args = self.arguments() if self.at("(") else ()
            if len(args) != arity:
                raise ArityError(f"{name} takes {arity} argument(s), got {len(args)}")
            return App(name, args)
        if name in self.language.relations:
            raise UnknownSymbolError(f"Relation symbol {name} used as a term")
        if name in self.parameters:
            return Param(self.parameters[name])
        if self.at("("):
            raise UnknownSymbolError(f"Unknown function symbol {name}")
        if self.context is not None:
            raise UnknownSymbolError(f"Variable {name} is not in the context")
        if name not in self.free:
            self.free.append(name)
        return Var(name)


def parse(
    text: str,
    language: Language,
    context: Sequence[str] | None = None,
    parameters: Mapping[str, int] | None = None,
) -> FormulaInContext:
    """Parse formula text into a formula-in-context.

    Args:
        text: Formula in the ASCII grammar of this module.
        language: Declared symbols.
        context: Explicit context. When omitted, the free variables in
            order of first appearance form the context.
        parameters: Carrier labels usable as constants, mapped to element ids.

    Raises:
        FormulaSyntaxError: With the 1-based column of the offending token.
        ArityError: If a symbol gets the wrong number of arguments.
        UnknownSymbolError: For undeclared function symbols or variables
            outside an explicit context.
        DuplicateContextVariableError: If ``context`` repeats a name.
    """
    return Parser(text, language, context, parameters).parse_formula()


def parse_term(
    text: str,
    language: Language,
    context: Sequence[str] | None = None,
    parameters: Mapping[str, int] | None = None,
) -> Term:
    return Parser(text, language, context, parameters).parse_term()


# -- Printer --

ParamNames = Callable[[int], str] | Mapping[int, str] | None


def _param_namer(names: ParamNames) -> Callable[[int], str]:
    if names is None:
        return lambda e: f"#{e}"
    if callable(names):
        return names
    return lambda e: names.get(e, f"#{e}")  # type: ignore[union-attr]


def format_term(t: Term, names: ParamNames = None) -> str:
    namer = _param_namer(names)

    def fmt(u: Term) -> str:
        if isinstance(u, Var):
            return u.name
        if isinstance(u, Param):
            return namer(u.element)
        if not u.args:
            return u.symbol
        return f"{u.symbol}({', '.join(fmt(a) for a in u.args)})"

    return fmt(t)


def format_formula(phi: Formula, names: ParamNames = None) -> str:
    """Print a formula so that :func:`parse` reads it back unchanged."""
    namer = _param_namer(names)

    def term(t: Term) -> str:
        return format_term(t, namer)

    def prec(f: Formula) -> int:
        if isinstance(f, (Forall, Exists)):
            return 0
        if is_neg(f):
            return 4
        if isinstance(f, Imp):
            return 1
        if isinstance(f, Or):
            return 2
        if isinstance(f, And):
            return 3
        return 5

    def fmt(f: Formula, minimum: int, rightmost: bool) -> str:
        if isinstance(f, (Forall, Exists)):
            kw = "forall" if isinstance(f, Forall) else "exists"
            text = f"{kw} {f.var}. {fmt(f.body, 0, True)}"
            return text if rightmost else f"({text})"
        if prec(f) < minimum:
            return f"({fmt(f, 0, True)})"
        if is_neg(f):
            return "~" + fmt(f.left, 4, rightmost)  # type: ignore[union-attr]
        if isinstance(f, Imp):
            return f"{fmt(f.left, 2, False)} -> {fmt(f.right, 1, rightmost)}"
        if isinstance(f, Or):
            return f"{fmt(f.left, 2, False)} | {fmt(f.right, 3, rightmost)}"
        if isinstance(f, And):
            return f"{fmt(f.left, 3, False)} & {fmt(f.right, 4, rightmost)}"
        if isinstance(f, Top):
            return "true"
        if isinstance(f, Bot):
            return "false"
        if isinstance(f, Eq):
            return f"{term(f.left)} = {term(f.right)}"
        if isinstance(f, Rel):
            if not f.args:
                return f.symbol
            return f"{f.symbol}({', '.join(term(a) for a in f.args)})"
        raise TypeError(f"Not a formula: {f!r}")

    return fmt(phi, 0, True)


# -- Enumeration --


def context_variables(k: int) -> tuple[str, ...]:
    """The canonical context ``v1, ..., vk`` used by scans."""
    return tuple(f"v{i}" for i in range(1, k + 1))


def terms(language: Language, variables: Sequence[str], max_depth: int) -> list[Term]:
    """All terms over ``variables`` up to ``max_depth``, by depth then symbol order."""
    layers: list[list[Term]] = [
        [Var(v) for v in variables] + [App(c) for c in language.constants]
    ]
    everything = list(layers[0])
    for _ in range(max_depth):
        layer: list[Term] = []
        previous = set(layers[-1])
        for symbol, arity in language.functions.items():
            if arity == 0:
                continue
            for args in itertools.product(everything, repeat=arity):
                if any(a in previous for a in args):
                    layer.append(App(symbol, args))
        layers.append(layer)
        everything.extend(layer)
    return everything


def atoms(language: Language, variables: Sequence[str], max_term_depth: int) -> list[Formula]:
    """⊤, ⊥, relation atoms and equations over the terms of ``variables``."""
    ts = terms(language, variables, max_term_depth)
    found: list[Formula] = [Top(), Bot()]
    for symbol, arity in language.relations.items():
        found.extend(Rel(symbol, args) for args in itertools.product(ts, repeat=arity))
    found.extend(Eq(s, t) for s, t in itertools.product(ts, repeat=2))
    return found


def _fresh(taken: Iterable[str]) -> str:
    used = set(taken)
    return next(f"v{i}" for i in itertools.count(1) if f"v{i}" not in used)


def enumerate_formulas(
    language: Language,
    context: Sequence[str],
    max_depth: int,
    max_term_depth: int = 0,
) -> Iterator[Formula]:
    """Every formula over ``context`` up to ``max_depth``, in depth order.

    Quantifiers bind a fresh variable named ``v<i>`` outside the context.
    Intended for small depths; the count grows doubly exponentially.
    """
    cache: dict[tuple[tuple[str, ...], int], list[Formula]] = {}

    def exactly(ctx: tuple[str, ...], d: int) -> list[Formula]:
        key = (ctx, d)
        if key in cache:
            return cache[key]
        if d == 0:
            result = atoms(language, ctx, max_term_depth)
        else:
            lower = [f for j in range(d) for f in exactly(ctx, j)]
            top = set(exactly(ctx, d - 1))
            result = []
            for node in (And, Or, Imp):
                for x, y in itertools.product(lower, repeat=2):
                    if x in top or y in top:
                        result.append(node(x, y))
            v = _fresh(ctx)
            for body in exactly((*ctx, v), d - 1):
                result.append(Forall(v, body))
                result.append(Exists(v, body))
        cache[key] = result
        return result

    ctx = tuple(context)
    for d in range(max_depth + 1):
        yield from exactly(ctx, d)


def random_term(rng: random.Random, language: Language, variables: Sequence[str], max_depth: int) -> Term:
    leaves: list[Term] = [Var(v) for v in variables] + [App(c) for c in language.constants]
    compound = [(f, n) for f, n in language.functions.items() if n > 0]
    if not leaves or (max_depth > 0 and compound and rng.random() < 0.3):
        if not compound or max_depth == 0:
            raise ArityError("No terms exist over this language and context")
        symbol, arity = rng.choice(compound)
        return App(symbol, tuple(random_term(rng, language, variables, max_depth - 1) for _ in range(arity)))
    return rng.choice(leaves)


def random_formula(
    rng: random.Random,
    language: Language,
    variables: Sequence[str] = (),
    max_depth: int = 3,
    max_term_depth: int = 1,
) -> Formula:
    """A seeded random formula over ``variables`` for round-trip corpora."""
    variables = tuple(variables)
    has_terms = bool(variables or language.constants)
    if max_depth == 0 or rng.random() < 0.25:
        choices: list[str] = ["top", "bot"]
        if has_terms:
            choices += ["eq"] + ["rel"] * (2 if language.relations else 0)
        elif any(n == 0 for n in language.relations.values()):
            choices += ["rel"]
        kind = rng.choice(choices)
        if kind == "top":
            return Top()
        if kind == "bot":
            return Bot()
        if kind == "eq":
            return Eq(
                random_term(rng, language, variables, max_term_depth),
                random_term(rng, language, variables, max_term_depth),
            )
        rels = [(r, n) for r, n in language.relations.items() if has_terms or n == 0]
        symbol, arity = rng.choice(rels)
        return Rel(symbol, tuple(random_term(rng, language, variables, max_term_depth) for _ in range(arity)))
    kind = rng.choice(["and", "or", "imp", "neg", "forall", "exists"])
    if kind == "neg":
        return neg(random_formula(rng, language, variables, max_depth - 1, max_term_depth))
    if kind in ("forall", "exists"):
        v = _fresh(variables)
        body = random_formula(rng, language, (*variables, v), max_depth - 1, max_term_depth)
        return Forall(v, body) if kind == "forall" else Exists(v, body)
    node = {"and": And, "or": Or, "imp": Imp}[kind]
    return node(
        random_formula(rng, language, variables, max_depth - 1, max_term_depth),
        random_formula(rng, language, variables, max_depth - 1, max_term_depth),
    )


# -- Semantic closure --

M = TypeVar("M", bound=Hashable)


class Semantics(Protocol[M]):
    """A compositional interpretation of formulas in context ``v1..vk``.

    ``exists``/``forall`` take the meaning of a body in context ``k + 1``
    whose last variable is the bound one and return a meaning in context ``k``.
    """

    def atom(self, k: int, formula: Formula) -> M: ...

    def conj(self, k: int, x: M, y: M) -> M: ...

    def disj(self, k: int, x: M, y: M) -> M: ...

    def impl(self, k: int, x: M, y: M) -> M: ...

    def exists(self, k: int, x: M) -> M: ...

    def forall(self, k: int, x: M) -> M: ...


class GodelSemantics(Generic[M]):
    """Interpret each formula by the meaning of its Gödel translation under ``base``."""

    def __init__(self, base: Semantics[M]) -> None:
        self.base = base

    def _neg(self, k: int, x: M) -> M:
        return self.base.impl(k, x, self.base.atom(k, Bot()))

    def atom(self, k: int, formula: Formula) -> M:
        x = self.base.atom(k, formula)
        if isinstance(formula, Bot):
            return x
        return self._neg(k, self._neg(k, x))

    def conj(self, k: int, x: M, y: M) -> M:
        return self.base.conj(k, x, y)

    def disj(self, k: int, x: M, y: M) -> M:
        return self._neg(k, self.base.conj(k, self._neg(k, x), self._neg(k, y)))

    def impl(self, k: int, x: M, y: M) -> M:
        return self.base.impl(k, x, y)

    def exists(self, k: int, x: M) -> M:
        return self._neg(k, self.base.forall(k, self._neg(k + 1, x)))

    def forall(self, k: int, x: M) -> M:
        return self.base.forall(k, x)


class ProductSemantics:
    """Evaluate several semantics side by side; meanings are tuples."""

    def __init__(self, *parts: Semantics[Any]) -> None:
        self.parts = parts

    def atom(self, k: int, formula: Formula) -> tuple[Any, ...]:
        return tuple(p.atom(k, formula) for p in self.parts)

    def conj(self, k: int, x: tuple[Any, ...], y: tuple[Any, ...]) -> tuple[Any, ...]:
        return tuple(p.conj(k, a, b) for p, a, b in zip(self.parts, x, y, strict=True))

    def disj(self, k: int, x: tuple[Any, ...], y: tuple[Any, ...]) -> tuple[Any, ...]:
        return tuple(p.disj(k, a, b) for p, a, b in zip(self.parts, x, y, strict=True))

    def impl(self, k: int, x: tuple[Any, ...], y: tuple[Any, ...]) -> tuple[Any, ...]:
        return tuple(p.impl(k, a, b) for p, a, b in zip(self.parts, x, y, strict=True))

    def exists(self, k: int, x: tuple[Any, ...]) -> tuple[Any, ...]:
        return tuple(p.exists(k, a) for p, a in zip(self.parts, x, strict=True))

    def forall(self, k: int, x: tuple[Any, ...]) -> tuple[Any, ...]:
        return tuple(p.forall(k, a) for p, a in zip(self.parts, x, strict=True))


@dataclass
class ClosureEntry(Generic[M]):
    meaning: M
    level: int
    op: str
    args: tuple[Any, ...]


@dataclass
class SemanticClosure(Generic[M]):
    """Distinct meanings of all formulas up to a depth, with one witness each.

    ``entries[k]`` lists the meanings in context ``v1..vk``. Every formula of
    depth ``≤ max_level(k)`` in that context has the meaning of some entry
    whose level does not exceed the formula's depth.
    """

    arity: int
    depth: int
    entries: dict[int, list[ClosureEntry[M]]]
    _formulas: dict[tuple[int, int], Formula] = field(default_factory=dict, repr=False)

    def max_level(self, k: int) -> int:
        return self.depth if k <= self.arity else self.depth - (k - self.arity)

    def formula(self, k: int, i: int) -> Formula:
        key = (k, i)
        if key not in self._formulas:
            e = self.entries[k][i]
            if e.op == "atom":
                phi = e.args[0]
            elif e.op in ("and", "or", "imp"):
                node = {"and": And, "or": Or, "imp": Imp}[e.op]
                phi = node(self.formula(k, e.args[0]), self.formula(k, e.args[1]))
            else:
                node = Exists if e.op == "exists" else Forall
                phi = node(f"v{k + 1}", self.formula(k + 1, e.args[0]))
            self._formulas[key] = phi
        return self._formulas[key]

    def items(self, k: int) -> Iterator[tuple[FormulaInContext, M]]:
        ctx = context_variables(k)
        for i, e in enumerate(self.entries.get(k, [])):
            yield FormulaInContext(self.formula(k, i), ctx), e.meaning

    def count(self) -> int:
        return sum(len(v) for v in self.entries.values())


def semantic_closure(
    semantics: Semantics[M],
    language: Language,
    arity: int,
    depth: int,
    term_depth: int = 0,
    *,
    allow_forall: bool = True,
    limit: int | None = None,
) -> SemanticClosure[M]:
    """Enumerate formulas level by level, keeping one witness per meaning.

    Contexts range over ``v1..vk`` for ``k ≤ arity + depth``; a context longer
    than ``arity`` only needs the levels its quantifier prefix leaves room
    for. Compositionality of ``semantics`` makes the kept witnesses
    representative of every formula up to ``depth``.

    Raises:
        SizeGuardError: If more than ``limit`` distinct meanings accumulate.
    """
    bound = DEFAULT_SETTINGS.max_enumeration if limit is None else limit
    top_k = arity + depth
    closure: SemanticClosure[M] = SemanticClosure(arity, depth, {k: [] for k in range(top_k + 1)})
    seen: dict[int, set[M]] = {k: set() for k in range(top_k + 1)}
    total = 0

    def add(k: int, meaning: M, level: int, op: str, args: tuple[Any, ...]) -> None:
        nonlocal total
        if meaning in seen[k]:
            return
        seen[k].add(meaning)
        closure.entries[k].append(ClosureEntry(meaning, level, op, args))
        total += 1
        if total > bound:
            raise SizeGuardError("formula meanings", total, bound)

    for level in range(depth + 1):
        for k in range(top_k + 1):
            if closure.max_level(k) < level:
                continue
            if level == 0:
                for phi in atoms(language, context_variables(k), term_depth):
                    add(k, semantics.atom(k, phi), 0, "atom", (phi,))
            else:
                current = closure.entries[k]
                snapshot = len(current)
                pool = [(i, current[i]) for i in range(snapshot) if current[i].level < level]
                for op, combine in (("and", semantics.conj), ("or", semantics.disj), ("imp", semantics.impl)):
                    for (i, x), (j, y) in itertools.product(pool, repeat=2):
                        if x.level == level - 1 or y.level == level - 1:
                            add(k, combine(k, x.meaning, y.meaning), level, op, (i, j))
                bodies = [(i, e) for i, e in enumerate(closure.entries[k + 1]) if e.level == level - 1]
                for i, e in bodies:
                    add(k, semantics.exists(k, e.meaning), level, "exists", (i,))
                    if allow_forall:
                        add(k, semantics.forall(k, e.meaning), level, "forall", (i,))
            logger.debug(
                "Closure context %d level %d: %d meanings", k, level, len(closure.entries[k])
            )
    return closure


# -- Ordinary structures and classical satisfaction --


@dataclass(frozen=True, eq=False)
class OrdinaryStructure:
    """A finite classical structure.

    Elements are positions in ``universe``; ``functions[f]`` maps argument
    tuples of positions to a position and ``relations[R]`` is the set of
    tuples where ``R`` holds.
    """

    language: Language
    universe: tuple[Hashable, ...]
    functions: Mapping[str, Mapping[tuple[int, ...], int]]
    relations: Mapping[str, frozenset[tuple[int, ...]]]

    def __post_init__(self) -> None:
        n = len(self.universe)
        for symbol, arity in self.language.functions.items():
            table = self.functions.get(symbol)
            if table is None:
                raise UnknownSymbolError(f"No table for function symbol {symbol}")
            for args in itertools.product(range(n), repeat=arity):
                if args not in table or not 0 <= table[args] < n:
                    raise ArityError(f"Table of {symbol} is not total at {args}")
        for symbol, arity in self.language.relations.items():
            rows = self.relations.get(symbol, frozenset())
            if any(len(r) != arity or any(not 0 <= x < n for x in r) for r in rows):
                raise ArityError(f"Relation {symbol} has a tuple of the wrong shape")

    @classmethod
    def from_labels(
        cls,
        language: Language,
        universe: Sequence[Hashable],
        functions: Mapping[str, Any],
        relations: Mapping[str, Iterable[Sequence[Hashable]]],
    ) -> OrdinaryStructure:
        """Build from label-based tables.

        ``functions[f]`` is a label for constants, or a list of
        ``[[arg labels...], value label]`` pairs.
        """
        position = {label: i for i, label in enumerate(universe)}

        def at(label: Hashable) -> int:
            try:
                return position[label]
            except (KeyError, TypeError):
                raise UnknownSymbolError(f"{label!r} is not in the universe") from None

        tables: dict[str, dict[tuple[int, ...], int]] = {}
        for symbol, arity in language.functions.items():
            if symbol not in functions:
                raise UnknownSymbolError(f"No table for function symbol {symbol}")
            raw = functions[symbol]
            if arity == 0:
                tables[symbol] = {(): at(raw)}
            else:
                tables[symbol] = {tuple(at(a) for a in args): at(value) for args, value in raw}
        rels = {
            symbol: frozenset(tuple(at(x) for x in row) for row in relations.get(symbol, ()))
            for symbol in language.relations
        }
        return cls(language, tuple(universe), tables, rels)

    @property
    def size(self) -> int:
        return len(self.universe)

    def holds(self, symbol: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relations.get(symbol, frozenset())

    def apply(self, symbol: str, args: Sequence[int]) -> int:
        return self.functions[symbol][tuple(args)]

    def __repr__(self) -> str:
        return f"OrdinaryStructure({self.size} elements)"


def evaluate_term(m: OrdinaryStructure, t: Term, assignment: Mapping[str, int]) -> int:
    if isinstance(t, Var):
        if t.name not in assignment:
            raise UnassignedVariableError(f"Variable {t.name} has no value")
        return assignment[t.name]
    if isinstance(t, Param):
        return t.element
    return m.apply(t.symbol, [evaluate_term(m, a, assignment) for a in t.args])


def tarski_eval(m: OrdinaryStructure, phi: Formula, assignment: Mapping[str, int] | None = None) -> bool:
    """Classical satisfaction ``m ⊨ φ[assignment]``; quantifiers range over the universe.

    Raises:
        UnassignedVariableError: If a free variable has no value.
    """
    env = dict(assignment or {})

    def sat(f: Formula, env: dict[str, int]) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Bot):
            return False
        if isinstance(f, Rel):
            return m.holds(f.symbol, [evaluate_term(m, t, env) for t in f.args])
        if isinstance(f, Eq):
            return evaluate_term(m, f.left, env) == evaluate_term(m, f.right, env)
        if isinstance(f, And):
            return sat(f.left, env) and sat(f.right, env)
        if isinstance(f, Or):
            return sat(f.left, env) or sat(f.right, env)
        if isinstance(f, Imp):
            return not sat(f.left, env) or sat(f.right, env)
        if isinstance(f, Forall):
            return all(sat(f.body, {**env, f.var: b}) for b in range(m.size))
        if isinstance(f, Exists):
            return any(sat(f.body, {**env, f.var: b}) for b in range(m.size))
        raise TypeError(f"Not a formula: {f!r}")

    return sat(phi, env)


class TarskiSemantics:
    """Classical truth vectors over ``mᵏ`` in ``itertools.product`` order."""

    def __init__(self, m: OrdinaryStructure) -> None:
        self.m = m

    def atom(self, k: int, formula: Formula) -> tuple[bool, ...]:
        variables = context_variables(k)
        return tuple(
            tarski_eval(self.m, formula, dict(zip(variables, t, strict=True)))
            for t in itertools.product(range(self.m.size), repeat=k)
        )

    def conj(self, k: int, x: tuple[bool, ...], y: tuple[bool, ...]) -> tuple[bool, ...]:
        return tuple(a and b for a, b in zip(x, y, strict=True))

    def disj(self, k: int, x: tuple[bool, ...], y: tuple[bool, ...]) -> tuple[bool, ...]:
        return tuple(a or b for a, b in zip(x, y, strict=True))

    def impl(self, k: int, x: tuple[bool, ...], y: tuple[bool, ...]) -> tuple[bool, ...]:
        return tuple(not a or b for a, b in zip(x, y, strict=True))

    def exists(self, k: int, x: tuple[bool, ...]) -> tuple[bool, ...]:
        n = self.m.size
        return tuple(any(x[i * n : (i + 1) * n]) for i in range(n**k))

    def forall(self, k: int, x: tuple[bool, ...]) -> tuple[bool, ...]:
        n = self.m.size
        return tuple(all(x[i * n : (i + 1) * n]) for i in range(n**k))


def structures_isomorphic(
    m: OrdinaryStructure, n: OrdinaryStructure, *, limit: int | None = None
) -> tuple[int, ...] | None:
    """An isomorphism ``m → n`` as a position map, or None.

    Constants are matched first; the remaining elements are searched by
    backtracking with partial checks of every function and relation table.
    """
    if m.language != n.language or m.size != n.size:
        return None
    size = m.size
    bound = DEFAULT_SETTINGS.max_enumeration if limit is None else limit
    if math.factorial(size) > bound:
        raise SizeGuardError("bijections", math.factorial(size), bound)
    mapping: list[int | None] = [None] * size
    used = [False] * size
    for c in m.language.constants:
        a, b = m.apply(c, ()), n.apply(c, ())
        if mapping[a] is not None and mapping[a] != b:
            return None
        if mapping[a] is None:
            if used[b]:
                return None
            mapping[a] = b
            used[b] = True

    def consistent() -> bool:
        for symbol, arity in m.language.functions.items():
            for args, value in m.functions[symbol].items():
                image = [mapping[a] for a in args]
                if None in image or mapping[value] is None:
                    continue
                if n.functions[symbol][tuple(image)] != mapping[value]:  # type: ignore[index]
                    return False
        for symbol, arity in m.language.relations.items():
            for args in itertools.product(range(size), repeat=arity):
                image = [mapping[a] for a in args]
                if None in image:
                    continue
                if m.holds(symbol, args) != n.holds(symbol, image):  # type: ignore[arg-type]
                    return False
        return True

    if not consistent():
        return None
    free = [a for a in range(size) if mapping[a] is None]

    def extend(i: int) -> bool:
        if i == len(free):
            return True
        a = free[i]
        for b in range(size):
            if used[b]:
                continue
            mapping[a], used[b] = b, True
            if consistent() and extend(i + 1):
                return True
            mapping[a], used[b] = None, False
        return False

    if extend(0):
        return tuple(x for x in mapping if x is not None)
    return None
