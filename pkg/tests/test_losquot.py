"""Tests for heytingkit.losquot module."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heytingkit.exceptions import EmptyFactorWithoutConstantError, ImproperFilterError, NotAFilterError
from heytingkit.frame import Filter, Frame, filters
from heytingkit.hmodel import forcing_value, random_hstructure
from heytingkit.logic import (
    FormulaInContext,
    Language,
    OrdinaryStructure,
    godel_translate,
    parse,
    tarski_eval,
)
from heytingkit.losquot import (
    characterization_check,
    classical_ultraproduct,
    filter_quotient,
    gamma_is_p_quotient,
    is_generic,
    los_check,
)
from heytingkit.workspace import load_document, load_model

# -- Helpers --


def _make_b4() -> Frame:
    return Frame.from_order(
        ["0", "a", "b", "1"],
        [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]],
    )


def _up(m, name: str) -> Filter:
    return Filter.principal(m.frame, name)


@pytest.fixture(scope="module")
def fix_rc():
    return load_model("fix_rc")


@pytest.fixture(scope="module")
def fix_neg():
    return load_model("fix_neg")


@pytest.fixture(scope="module")
def fix_fam():
    return load_document("fix_fam")


# -- TestQuotient --


class TestQuotient:
    def test_classes_over_up_u(self, fix_rc):
        quotient = filter_quotient(fix_rc, _up(fix_rc, "u"))
        assert len(quotient.classes) == 2
        assert quotient.gamma.universe == ("[cu]",)
        assert quotient.gamma.holds("R", (0,))
        assert quotient.gamma_position(fix_rc.carrier.index("c1")) == 0

    def test_top_filter_keeps_every_element(self, fix_rc):
        quotient = filter_quotient(fix_rc, _up(fix_rc, "1"))
        assert len(quotient.classes) == 3
        assert quotient.gamma.universe == ("[c1]",)
        assert not quotient.gamma.holds("R", (0,))

    def test_improper_filter(self, fix_rc):
        with pytest.raises(ImproperFilterError):
            filter_quotient(fix_rc, _up(fix_rc, "0"))

    def test_gamma_matches_sheaf_quotient(self):
        fixture = load_document("fix_rc")
        assert gamma_is_p_quotient(fixture.sheaf, Filter.principal(fixture.frame, "u"))


# -- TestGenericity --


class TestGenericity:
    def test_prime_filter_on_chain(self, fix_rc):
        report = is_generic(fix_rc, _up(fix_rc, "u"), depth=2)
        assert report.generic
        assert report.los_applies
        assert report.label == "generic up to depth 2"

    def test_top_filter_is_not_atomically_stable(self, fix_rc):
        # R(c1) has value u while its double negation is 1
        report = is_generic(fix_rc, _up(fix_rc, "1"), depth=2)
        assert report.generic
        assert not report.atomic_stable
        assert not report.los_applies

    def test_dichotomy_failure(self, fix_neg):
        report = is_generic(fix_neg, _up(fix_neg, "1"), depth=2)
        assert not report.generic
        assert report.dichotomy_witness == {
            "formula": "R(c)",
            "params": [],
            "godel": "a",
            "negated": "b",
        }
        assert report.to_dict()["generic"] is False


# -- TestLos --


class TestLos:
    def test_holds_for_generic_filter(self, fix_rc):
        report = los_check(fix_rc, _up(fix_rc, "u"), depth=2)
        assert report.ok
        assert report.rows

    def test_fails_without_atomic_stability(self, fix_rc):
        report = los_check(fix_rc, _up(fix_rc, "1"), depth=2)
        assert not report.ok
        assert any(r.params == ("c1",) for r in report.failures)

    def test_fails_for_non_generic_filter(self, fix_neg):
        report = los_check(fix_neg, _up(fix_neg, "1"), depth=2)
        assert not report.ok
        # the negation of R(c) is true in Γ but not forced
        assert any(r.gamma_sat and not r.in_filter for r in report.failures)

    @pytest.mark.parametrize("depth", [2, pytest.param(3, marks=pytest.mark.slow)])
    def test_negation_row_for_non_generic_filter(self, fix_neg, depth):
        up1 = _up(fix_neg, "1")
        negation = parse("~R(c)", fix_neg.language)
        godel = forcing_value(fix_neg, FormulaInContext(godel_translate(negation.formula)))
        assert fix_neg.frame.name(godel.value) == "b"
        assert tarski_eval(filter_quotient(fix_neg, up1).gamma, negation.formula)
        report = los_check(fix_neg, up1, depth=depth)
        assert report.genericity.dichotomy_witness is not None
        assert any(
            r.params == () and r.forcing_value == "b" and r.gamma_sat and not r.in_filter
            for r in report.failures
        )

    def test_corollary_rows_on_boolean_frame(self, fix_neg):
        report = los_check(fix_neg, _up(fix_neg, "a"), depth=2, corollary=True)
        assert report.ok
        assert {r.mode for r in report.rows} == {"main", "corollary"}
        assert report.rows[0].to_dict()["pass"] is True

    @pytest.mark.slow
    def test_default_depth(self, fix_rc):
        report = los_check(fix_rc, _up(fix_rc, "u"))
        assert report.depth == 3
        assert report.ok

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["fix_rc", "fix_neg", "fix_fam"])
    def test_every_applicable_filter_at_depth_three(self, name):
        m = load_model(name)
        applied = []
        for f in filters(m.frame):
            if not f.is_proper:
                continue
            report = los_check(m, f, depth=3)
            if report.genericity.los_applies:
                assert report.ok, f.label
                applied.append(f.label)
        assert applied

    @pytest.mark.slow
    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=10, deadline=None)
    def test_ultrafilters_on_boolean_frames(self, seed):
        b4 = _make_b4()
        m = random_hstructure(b4, random.Random(seed), Language({"c": 0}, {"R": 1}))
        for f in filters(b4):
            if f.is_maximal:
                assert los_check(m, f, depth=1).ok


# -- TestCharacterization --


class TestCharacterization:
    def test_maximal_filters_of_b4(self):
        assert [f.label for f in filters(_make_b4()) if f.is_maximal] == ["up:a", "up:b"]

    def test_chain(self, fix_rc):
        report = characterization_check(fix_rc, depth=2)
        assert report.variant_holds
        assert report.maximal_generic
        assert report.maximal_los
        assert report.equivalent
        assert report.ultrafilters == {"up:u": "up:1"}

    def test_boolean_frame(self, fix_neg):
        report = characterization_check(fix_neg, depth=2)
        assert report.equivalent
        assert report.covers_hold
        assert report.ultrafilters == {"up:a": "up:a", "up:b": "up:b"}
        assert len(report.los) == 2

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["fix_rc", "fix_neg", "fix_fam"])
    def test_every_fixture_at_depth_three(self, name):
        report = characterization_check(load_model(name), depth=3)
        assert report.depth == 3
        assert report.variant_holds
        assert report.maximal_generic
        assert report.maximal_los
        assert report.equivalent

    @pytest.mark.slow
    def test_family_covers(self):
        report = characterization_check(load_model("fix_fam"), depth=3)
        assert report.covers_hold
        assert set(report.ultrafilters) == {"up:{x}", "up:{y}"}


# -- TestUltraproduct --


class TestUltraproduct:
    @pytest.mark.parametrize("index", ["x", "y"])
    def test_principal_ultraproduct_is_the_factor(self, fix_fam, index):
        report = classical_ultraproduct(fix_fam.factors, index, depth=2)
        assert report.index == index
        assert report.structure.size == fix_fam.factors[index].size
        assert report.ok

    def test_filter_given_by_generator(self, fix_fam):
        assert classical_ultraproduct(fix_fam.factors, "up:{y}", depth=1).index == "y"

    def test_non_maximal_filter_rejected(self, fix_fam):
        with pytest.raises(NotAFilterError):
            classical_ultraproduct(fix_fam.factors, "up:{x,y}")

    def test_empty_factor_rejected(self):
        lang = Language({}, {"R": 1})
        full = OrdinaryStructure.from_labels(lang, ["p"], {}, {"R": [["p"]]})
        empty = OrdinaryStructure.from_labels(lang, [], {}, {})
        with pytest.raises(EmptyFactorWithoutConstantError):
            classical_ultraproduct({"x": full, "e": empty}, "x")
