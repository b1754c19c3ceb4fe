"""Tests for heytingkit.logic module."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heytingkit.exceptions import (
    ArityError,
    DuplicateContextVariableError,
    FormulaSyntaxError,
    LanguageError,
    SizeGuardError,
    UnassignedVariableError,
    UnknownSymbolError,
)
from heytingkit.logic import (
    And,
    App,
    Bot,
    Eq,
    Exists,
    Forall,
    FormulaInContext,
    GodelSemantics,
    Imp,
    Language,
    Or,
    OrdinaryStructure,
    Param,
    ProductSemantics,
    Rel,
    TarskiSemantics,
    Top,
    Var,
    abstract_parameters,
    alpha_normalize,
    atoms,
    context_variables,
    depth,
    enumerate_formulas,
    format_formula,
    free_variables,
    godel_translate,
    is_forall_free,
    neg,
    parse,
    parse_term,
    random_formula,
    semantic_closure,
    structures_isomorphic,
    substitute,
    tarski_eval,
    terms,
)

# -- Helpers --


def _make_language() -> Language:
    return Language({"c": 0}, {"R": 1, "S": 1})


def _make_rich_language() -> Language:
    return Language({"c": 0, "f": 1}, {"R": 1, "S": 1})


def _make_structure(universe=("p", "q"), c="p", r=(("p",),)) -> OrdinaryStructure:
    return OrdinaryStructure.from_labels(_make_language(), list(universe), {"c": c}, {"R": r})


def _formula(text: str, **kwargs):
    return parse(text, _make_language(), **kwargs).formula


def _truth_vector(m: OrdinaryStructure, fic: FormulaInContext) -> tuple[bool, ...]:
    return tuple(
        tarski_eval(m, fic.formula, dict(zip(fic.context, t, strict=True)))
        for t in itertools.product(range(m.size), repeat=fic.arity)
    )


# -- TestLanguage --


class TestLanguage:
    def test_constants(self):
        assert _make_rich_language().constants == ["c"]

    def test_clash_rejected(self):
        with pytest.raises(LanguageError):
            Language({"R": 0}, {"R": 1})

    def test_keyword_rejected(self):
        with pytest.raises(LanguageError):
            Language({}, {"forall": 1})

    def test_negative_arity_rejected(self):
        with pytest.raises(LanguageError):
            Language({"f": -1})

    def test_dict_round_trip(self):
        lang = _make_rich_language()
        assert Language.from_dict(lang.to_dict()) == lang


# -- TestParser --


class TestParser:
    def test_free_variables_form_context(self):
        fic = parse("R(c) & S(x)", _make_language())
        assert fic.context == ("x",)
        assert fic.formula.right == Rel("S", (Var("x"),))

    def test_precedence(self):
        phi = _formula("~R(x) | S(x) -> R(x)")
        x = (Var("x"),)
        assert phi == Imp(Or(neg(Rel("R", x)), Rel("S", x)), Rel("R", x))

    def test_quantifier_extends_right(self):
        phi = _formula("R(c) & forall y. S(y) | R(y)")
        y = (Var("y"),)
        assert phi.right == Forall("y", Or(Rel("S", y), Rel("R", y)))

    def test_parameters_by_label_and_number(self):
        assert _formula("R(c1)", parameters={"c1": 2}) == Rel("R", (Param(2),))
        assert _formula("R(#3)") == Rel("R", (Param(3),))

    def test_equation_and_constants(self):
        assert _formula("c = x") == Eq(App("c"), Var("x"))
        assert _formula("true -> false") == Imp(Top(), Bot())

    def test_unclosed_parenthesis_column(self):
        with pytest.raises(FormulaSyntaxError) as exc:
            parse("R(c1", _make_language(), parameters={"c1": 0})
        assert exc.value.column == 5
        assert str(exc.value).startswith("SyntaxError at column 5: ")

    def test_unexpected_character_column(self):
        with pytest.raises(FormulaSyntaxError) as exc:
            parse("R(x) $", _make_language())
        assert exc.value.column == 6

    def test_trailing_tokens(self):
        with pytest.raises(FormulaSyntaxError):
            parse("R(x) R(x)", _make_language())

    def test_arity_error(self):
        with pytest.raises(ArityError):
            parse("R(c, c)", _make_language())

    def test_variable_outside_context(self):
        with pytest.raises(UnknownSymbolError):
            parse("R(y)", _make_language(), context=["x"])

    def test_duplicate_context(self):
        with pytest.raises(DuplicateContextVariableError):
            parse("R(x)", _make_language(), context=["x", "x"])

    def test_unknown_function(self):
        with pytest.raises(UnknownSymbolError):
            parse("g(x) = x", _make_language())

    def test_relation_as_term(self):
        with pytest.raises(UnknownSymbolError):
            parse("c = R", _make_language())

    def test_parse_term(self):
        assert parse_term("f(f(c))", _make_rich_language()) == App("f", (App("f", (App("c"),)),))


# -- TestPrinter --


class TestPrinter:
    @pytest.mark.parametrize(
        "text",
        [
            "~~R(c)",
            "R(c) -> S(c) -> R(c)",
            "(R(c) -> S(c)) -> R(c)",
            "R(c) | S(c) & R(c)",
            "~(R(c) & S(c))",
            "(forall x. R(x)) & S(c)",
            "exists x. R(x) & ~S(x)",
            "c = c | false",
        ],
    )
    def test_canonical_text_is_fixed(self, text):
        assert format_formula(_formula(text)) == text

    def test_parameter_names(self):
        phi = Rel("R", (Param(1),))
        assert format_formula(phi) == "R(#1)"
        assert format_formula(phi, {1: "c1"}) == "R(c1)"

    @given(st.integers(min_value=0, max_value=100_000))
    @settings(max_examples=200)
    def test_round_trip_random_formulas(self, seed):
        lang = _make_rich_language()
        rng = random.Random(seed)
        phi = random_formula(rng, lang, ("x",), max_depth=4, max_term_depth=2)
        fic = parse(format_formula(phi), lang, context=["x"])
        assert fic.formula == phi

    @pytest.mark.slow
    def test_seeded_corpus_round_trips(self):
        lang = _make_rich_language()
        rng = random.Random(0)
        for _ in range(1000):
            phi = random_formula(rng, lang, ("x",), max_depth=4, max_term_depth=2)
            assert parse(format_formula(phi), lang, context=["x"]).formula == phi


# -- TestSyntax --


class TestSyntax:
    def test_formula_in_context_checks_free_variables(self):
        with pytest.raises(UnknownSymbolError):
            FormulaInContext(Rel("R", (Var("x"),)), ())

    def test_depth(self):
        assert depth(_formula("R(c)")) == 0
        assert depth(_formula("~~R(c)")) == 2
        assert depth(_formula("forall x. R(x) & S(x)")) == 2

    def test_free_variables_skip_bound(self):
        assert free_variables(_formula("R(x) & exists y. S(y) & R(z)")) == ("x", "z")

    def test_substitute_respects_binding(self):
        phi = _formula("R(x) & forall x. S(x)")
        result = substitute(phi, {"x": App("c")})
        assert result == _formula("R(c) & forall x. S(x)")

    def test_alpha_normalize(self):
        phi = _formula("forall y. exists z. R(y) & S(z)")
        w1, w2 = (Var("w1"),), (Var("w2"),)
        assert alpha_normalize(phi) == Forall("w1", Exists("w2", And(Rel("R", w1), Rel("S", w2))))

    def test_abstract_parameters(self):
        fic, params = abstract_parameters(FormulaInContext(Rel("R", (Param(3),))))
        assert params == (3,)
        assert fic == FormulaInContext(Rel("R", (Var("p1"),)), ("p1",))

    def test_forall_free(self):
        assert is_forall_free(_formula("exists x. ~R(x)"))
        assert not is_forall_free(_formula("R(c) -> forall x. R(x)"))

    def test_godel_translation(self):
        assert godel_translate(_formula("R(c) | S(c)")) == _formula("~(~~~R(c) & ~~~S(c))")
        assert godel_translate(_formula("exists y. R(y)")) == _formula("~forall y. ~~~R(y)")
        assert godel_translate(Bot()) == Bot()


# -- TestEnumeration --


class TestEnumeration:
    def test_terms_by_depth(self):
        found = terms(_make_rich_language(), ["v1"], 1)
        assert found == [Var("v1"), App("c"), App("f", (Var("v1"),)), App("f", (App("c"),))]

    def test_atoms_closed_context(self):
        c = App("c")
        assert atoms(_make_language(), (), 0) == [
            Top(),
            Bot(),
            Rel("R", (c,)),
            Rel("S", (c,)),
            Eq(c, c),
        ]

    def test_formula_count_depth_one(self):
        lang = Language({"c": 0}, {"R": 1})
        # 4 atoms, 3 * 16 binary combinations, 2 * 8 quantified atoms over (v1,)
        assert len(list(enumerate_formulas(lang, (), 1))) == 4 + 48 + 16

    def test_context_variables(self):
        assert context_variables(3) == ("v1", "v2", "v3")


# -- TestSemanticClosure --


class TestSemanticClosure:
    def test_witnesses_have_their_meaning(self):
        m = _make_structure()
        closure = semantic_closure(TarskiSemantics(m), _make_language(), 1, 2)
        for k in range(closure.arity + closure.depth + 1):
            for fic, meaning in closure.items(k):
                assert _truth_vector(m, fic) == meaning

    def test_covers_every_formula(self):
        m = _make_structure()
        lang = _make_language()
        closure = semantic_closure(TarskiSemantics(m), lang, 1, 1)
        meanings = {e.meaning for e in closure.entries[1]}
        for phi in enumerate_formulas(lang, ("v1",), 1):
            assert _truth_vector(m, FormulaInContext(phi, ("v1",))) in meanings

    def test_godel_agrees_classically(self):
        m = _make_structure()
        tarski = TarskiSemantics(m)
        closure = semantic_closure(
            ProductSemantics(tarski, GodelSemantics(tarski)), _make_language(), 1, 2
        )
        for entries in closure.entries.values():
            for e in entries:
                assert e.meaning[0] == e.meaning[1]

    def test_without_forall(self):
        closure = semantic_closure(
            TarskiSemantics(_make_structure()), _make_language(), 0, 2, allow_forall=False
        )
        assert all(e.op != "forall" for entries in closure.entries.values() for e in entries)

    def test_size_guard(self):
        with pytest.raises(SizeGuardError):
            semantic_closure(TarskiSemantics(_make_structure()), _make_language(), 1, 2, limit=1)


# -- TestTarski --


class TestTarski:
    def test_quantifiers(self):
        m = _make_structure()
        assert tarski_eval(m, _formula("exists x. ~R(x)"))
        assert not tarski_eval(m, _formula("forall x. R(x)"))
        assert tarski_eval(m, _formula("R(c)"))

    def test_assignment(self):
        m = _make_structure()
        phi = _formula("R(x)")
        assert tarski_eval(m, phi, {"x": 0})
        assert not tarski_eval(m, phi, {"x": 1})

    def test_unassigned_variable(self):
        with pytest.raises(UnassignedVariableError):
            tarski_eval(_make_structure(), _formula("R(x)"))

    def test_missing_constant_table(self):
        with pytest.raises(UnknownSymbolError):
            OrdinaryStructure.from_labels(_make_language(), ["p"], {}, {})


# -- TestIsomorphism --


class TestIsomorphism:
    def test_swapped_labels(self):
        m = _make_structure()
        n = _make_structure(universe=("a", "b"), c="b", r=(("b",),))
        assert structures_isomorphic(m, n) == (1, 0)

    def test_different_relation(self):
        m = _make_structure()
        n = _make_structure(r=())
        assert structures_isomorphic(m, n) is None

    def test_different_sizes(self):
        m = _make_structure()
        n = _make_structure(universe=("p",), r=())
        assert structures_isomorphic(m, n) is None
