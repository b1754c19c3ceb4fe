"""Tests for heytingkit.sheaf module."""

import pytest

from heytingkit.exceptions import (
    ArityMismatchError,
    EmptyUniverseWarning,
    FrameError,
    ImproperFilterError,
    NotFunctorialError,
    PresheafError,
)
from heytingkit.frame import Filter, Frame
from heytingkit.hmodel import forcing_value
from heytingkit.hset import HMorphism
from heytingkit.logic import Language, OrdinaryStructure, parse, structures_isomorphic
from heytingkit.sheaf import (
    NaturalMap,
    Presheaf,
    SheafOfStructures,
    boolean_power,
    characteristic_value,
    covers,
    discrete_family,
    forces,
    global_section_bijection,
    lift_structure,
    power_presheaf,
    product_comparison,
    sections_and_quotient,
    theta,
    theta_mor,
    validate_presheaf,
)
from heytingkit.workspace import load_document

# -- Helpers --


def _make_s3() -> Frame:
    return Frame.chain(["0", "u", "1"])


def _make_b4() -> Frame:
    return Frame.from_order(
        ["0", "a", "b", "1"],
        [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]],
    )


def _make_point() -> OrdinaryStructure:
    lang = Language({"c": 0}, {"R": 1})
    return OrdinaryStructure.from_labels(lang, ["p", "q"], {"c": "p"}, {"R": [["p"]]})


@pytest.fixture(scope="module")
def fix_rc() -> SheafOfStructures:
    return load_document("fix_rc").sheaf


@pytest.fixture(scope="module")
def fix_fam():
    return load_document("fix_fam")


# -- TestPresheaf --


class TestPresheaf:
    def test_fix_rc_is_a_sheaf(self, fix_rc):
        report = validate_presheaf(fix_rc.presheaf)
        assert report.functorial
        assert report.separated
        assert report.sheaf

    def test_restriction_by_composition(self, fix_rc):
        assert fix_rc.presheaf.restrict("1", "0", "c1") == "c0"

    def test_two_sections_over_bottom_not_separated(self):
        p = Presheaf(
            _make_s3(),
            {"0": ["x", "y"], "u": ["a"], "1": ["b"]},
            {"1>u": {"b": "a"}, "u>0": {"a": "x"}},
        )
        report = validate_presheaf(p)
        assert not report.separated
        assert report.separation_witness == ("0", (), "x", "y")

    def test_missing_amalgamation(self):
        p = Presheaf(
            _make_b4(),
            {"0": ["z"], "a": ["pa"], "b": ["pb"], "1": []},
            {"a>0": {"pa": "z"}, "b>0": {"pb": "z"}},
        )
        report = validate_presheaf(p)
        assert report.separated
        assert not report.sheaf
        assert report.gluing_witness == ("1", ("a", "b"), ("pa", "pb"))

    def test_restrictions_must_compose(self):
        with pytest.raises(NotFunctorialError):
            Presheaf(
                _make_s3(),
                {"0": ["x", "y"], "u": ["a"], "1": ["b"]},
                {"1>u": {"b": "a"}, "u>0": {"a": "x"}, "1>0": {"b": "y"}},
            )

    def test_restriction_must_be_total(self):
        with pytest.raises(PresheafError):
            Presheaf(
                _make_s3(),
                {"0": ["x"], "u": ["a", "a2"], "1": ["b"]},
                {"u>0": {"a": "x"}, "1>u": {"b": "a"}},
            )

    def test_dict_round_trip(self, fix_rc):
        p = fix_rc.presheaf
        again = Presheaf.from_dict(p.frame, p.to_dict())
        assert again.names == p.names

    def test_covers(self):
        s3, b4 = _make_s3(), _make_b4()
        assert covers(s3, s3.top) == [(s3.top,)]
        assert set(covers(b4, b4.top)) == {(b4.top,), (b4.index("a"), b4.index("b"))}
        assert covers(s3, s3.bottom) == [()]


# -- TestTheta --


class TestTheta:
    def test_valuation(self, fix_rc):
        h = theta(fix_rc.presheaf)
        frame = h.frame
        c0, cu, c1 = (h.index(x) for x in ("c0", "cu", "c1"))
        assert frame.name(h.value(c1, cu)) == "u"
        assert frame.name(h.value(c1, c0)) == "0"
        assert [frame.name(h.extent(a)) for a in (c0, cu, c1)] == ["0", "u", "1"]

    def test_identity_natural_map(self, fix_rc):
        p = fix_rc.presheaf
        xi = NaturalMap(p, p, {name: name for name in p.names})
        assert theta_mor(xi) == HMorphism.identity(theta(p))

    def test_products_commute(self, fix_rc):
        assert product_comparison(fix_rc.presheaf, 2) == []

    def test_power_needs_positive_exponent(self, fix_rc):
        with pytest.raises(ArityMismatchError):
            power_presheaf(fix_rc.presheaf, 0)


# -- TestSheafOfStructures --


class TestSheafOfStructures:
    def test_fix_rc_valid(self, fix_rc):
        assert fix_rc.violations() == []

    def test_relation_not_closed_under_restriction(self, fix_rc):
        data = {
            "functions": {"c": {"0": "c0", "u": "cu", "1": "c1"}},
            "relations": {"R": {"0": [["c0"]], "u": [], "1": [["c1"]]}},
        }
        with pytest.raises(PresheafError, match="NotRestrictionClosed"):
            SheafOfStructures.from_dict(fix_rc.presheaf, fix_rc.language, data)

    def test_section_structure(self, fix_rc):
        at_u = fix_rc.section_structure("u")
        assert at_u.universe == ("cu",)
        assert at_u.holds("R", (0,))
        assert not fix_rc.section_structure("1").holds("R", (0,))

    def test_quotient_by_colimit(self, fix_rc):
        up_u = Filter.principal(fix_rc.frame, "u")
        quotient = sections_and_quotient(fix_rc, up_u, general=True)
        assert quotient.universe == ("cu",)
        assert quotient.holds("R", (0,))

    def test_improper_filter(self, fix_rc):
        with pytest.raises(ImproperFilterError):
            sections_and_quotient(fix_rc, Filter.principal(fix_rc.frame, "0"))

    def test_global_sections_of_quotient(self, fix_rc):
        report = global_section_bijection(fix_rc, Filter.principal(fix_rc.frame, "u"))
        assert report.bijective
        assert report.classes == {"cu": ("cu", "c1")}


# -- TestKripkeJoyal --


class TestKripkeJoyal:
    @pytest.mark.parametrize(
        "text",
        [
            "R(c)",
            "R(c1)",
            "~R(c1)",
            "~~R(c1)",
            "c1 = cu",
            "R(c1) | ~R(c1)",
            "exists x. R(x)",
            "forall x. R(x)",
            "forall x. ~~R(x)",
        ],
    )
    def test_matches_forcing_value(self, fix_rc, text):
        m = lift_structure(fix_rc)
        fic = parse(text, m.language, parameters=m.labels())
        assert characteristic_value(fix_rc, fic) == forcing_value(m, fic).value

    def test_forcing_at_an_element(self, fix_rc):
        fic = parse("R(x)", fix_rc.language, context=["x"])
        assert forces(fix_rc, fic, "u", ["c1"])
        assert not forces(fix_rc, fic, "1", ["c1"])


# -- TestGenerators --


class TestGenerators:
    def test_family_sections(self, fix_fam):
        s = fix_fam.sheaf
        assert s.section_structure("{x,y}").size == 2
        assert s.section_structure("{}").size == 1

    def test_principal_quotient_is_the_factor(self, fix_fam):
        s = fix_fam.sheaf
        at_x = sections_and_quotient(s, Filter.principal(s.frame, "{x}"), general=True)
        assert structures_isomorphic(at_x, fix_fam.factors["x"]) is not None

    def test_empty_factor_warns(self):
        lang = Language({}, {"R": 1})
        full = OrdinaryStructure.from_labels(lang, ["p"], {}, {"R": [["p"]]})
        empty = OrdinaryStructure.from_labels(lang, [], {}, {})
        with pytest.warns(EmptyUniverseWarning):
            discrete_family({"x": full, "e": empty})

    def test_boolean_power(self):
        b4 = _make_b4()
        s = boolean_power(b4, _make_point())
        assert s.frame == b4
        assert s.section_structure("1").size == 4
        assert s.section_structure("a").size == 2

    def test_boolean_power_needs_boolean_algebra(self):
        with pytest.raises(FrameError):
            boolean_power(_make_s3(), _make_point())
