"""Tests for heytingkit.hset module."""

import itertools

import pytest

from heytingkit.exceptions import (
    HSetLawError,
    NotMorphismError,
    NotStrictError,
    ObjectMismatchError,
    SizeGuardError,
    UnknownParameterError,
)
from heytingkit.frame import Frame
from heytingkit.hset import (
    HMorphism,
    HSet,
    StrictRelation,
    change_of_base,
    classify_morphism,
    completion,
    compose,
    compose_tables,
    equalizer,
    finite_limit,
    higher_order,
    hom_set,
    is_epic,
    is_monic,
    morphism_violations,
    pairing,
    product,
    pullback,
    relabel,
    representing_maps,
    singletons,
    strict_relations,
    subobjects,
    terminal,
    terminal_map,
    validate_hset,
    verify_limit,
)
from heytingkit.hset import (
    identity as identity_of,
)

# -- Helpers --


def _make_s3() -> Frame:
    return Frame.chain(["0", "u", "1"])


def _v(frame: Frame, *names: str) -> tuple[int, ...]:
    return tuple(frame.index(n) for n in names)


def _make_pair(frame: Frame | None = None) -> HSet:
    """Two global elements that agree to degree ``u``."""
    s3 = frame or _make_s3()
    one, u = s3.index("1"), s3.index("u")
    return HSet(s3, ["a", "b"], [[one, u], [u, one]])


def _make_discrete(frame: Frame) -> HSet:
    one, zero = frame.top, frame.bottom
    return HSet(frame, ["p", "q"], [[one, zero], [zero, one]])


def _make_collapse(pair: HSet) -> HMorphism:
    return HMorphism.represented_by(pair, _make_discrete(pair.frame), [0, 0])


# -- TestHSet --


class TestHSet:
    def test_separated_but_incomplete(self):
        pair = _make_pair()
        s3 = pair.frame
        assert pair.is_separated
        assert not pair.is_complete()
        # the empty singleton is the first missing one
        assert pair.completeness_witness() == _v(s3, "0", "0")

    def test_non_separated(self):
        s3 = _make_s3()
        one = s3.top
        hset = HSet(s3, ["a", "b"], [[one, one], [one, one]])
        assert hset.separation_witness == (0, 1)
        assert not hset.is_separated
        assert not hset.is_complete()

    def test_transitivity_failure_raises(self):
        s3 = _make_s3()
        one, zero = s3.top, s3.bottom
        alpha = [[one, one, zero], [one, one, one], [zero, one, one]]
        with pytest.raises(HSetLawError) as exc:
            HSet(s3, ["a", "b", "c"], alpha)
        assert any(v.law == "Transitivity" for v in exc.value.violations)

    def test_duplicate_labels_rejected(self):
        s3 = _make_s3()
        with pytest.raises(HSetLawError):
            HSet(s3, ["a", "a"], [[s3.top, s3.top], [s3.top, s3.top]])

    def test_unknown_label(self):
        with pytest.raises(UnknownParameterError):
            _make_pair().index("z")

    def test_global_elements(self):
        pair = _make_pair()
        assert pair.is_global(0)
        assert pair.singleton_of(1) == _v(pair.frame, "u", "1")

    def test_relabel_keeps_valuation(self):
        pair = _make_pair()
        renamed = relabel(pair, lambda a: f"x{a}")
        assert renamed.carrier == ("x0", "x1")
        assert renamed.alpha == pair.alpha


# -- TestValidate --


class TestValidate:
    def test_symmetry_violation_reported(self):
        s3 = _make_s3()
        one, u, zero = s3.top, s3.index("u"), s3.bottom
        report = validate_hset(s3, ["a", "b"], [[one, u], [zero, one]])
        assert not report.ok
        assert report.hset is None
        assert report.violations[0].law == "Symmetry"
        assert report.violations[0].witness == ("a", "b")

    def test_valid_report(self):
        pair = _make_pair()
        report = validate_hset(pair.frame, pair.carrier, pair.alpha)
        assert report.ok
        assert report.separated is True
        assert report.complete is False

    def test_completeness_skipped_over_guard(self):
        pair = _make_pair()
        report = validate_hset(pair.frame, pair.carrier, pair.alpha, limit=2)
        assert report.ok
        assert report.complete is None


# -- TestStrictRelations --


class TestStrictRelations:
    def test_enumeration_order(self):
        pair = _make_pair()
        s3 = pair.frame
        expected = [
            _v(s3, "0", "0"),
            _v(s3, "u", "u"),
            _v(s3, "u", "1"),
            _v(s3, "1", "u"),
            _v(s3, "1", "1"),
        ]
        assert list(strict_relations(pair)) == expected
        assert list(singletons(pair)) == expected[:4]

    def test_not_strict(self):
        pair = _make_pair()
        with pytest.raises(NotStrictError):
            StrictRelation(pair, _v(pair.frame, "1", "0"))

    def test_is_singleton(self):
        pair = _make_pair()
        s3 = pair.frame
        assert StrictRelation(pair, _v(s3, "u", "u")).is_singleton
        assert not StrictRelation(pair, _v(s3, "1", "1")).is_singleton

    def test_size_guard(self):
        with pytest.raises(SizeGuardError) as exc:
            list(strict_relations(_make_pair(), limit=2))
        assert exc.value.size == 9


# -- TestMorphisms --


class TestMorphisms:
    def test_identity_composes(self):
        pair = _make_pair()
        ident = identity_of(pair)
        assert compose(ident, ident) == ident
        assert morphism_violations(pair, pair, ident.table) == []

    def test_not_representable(self):
        pair = _make_pair()
        with pytest.raises(NotMorphismError):
            HMorphism.represented_by(pair, _make_discrete(pair.frame), [0, 1])

    def test_collapse_is_neither_mono_nor_epi(self):
        phi = _make_collapse(_make_pair())
        assert not is_monic(phi)
        assert not is_epic(phi)

    def test_onto_a_point_is_epic(self):
        pair = _make_pair()
        phi = terminal_map(pair)
        assert is_epic(phi)
        assert not is_monic(phi)

    def test_identity_is_iso(self):
        pair = _make_pair()
        cls = classify_morphism(identity_of(pair))
        assert cls.iso
        assert cls.inverse == identity_of(pair)
        assert cls.representing_maps == ((0, 1),)

    def test_representing_maps_of_collapse(self):
        phi = _make_collapse(_make_pair())
        assert representing_maps(phi) == [(0, 0)]

    def test_global_points(self):
        pair = _make_pair()
        one = terminal(pair.frame).hset
        # rows are the singletons with join ⊤
        assert len(hom_set(one, pair)) == 2

    def test_unique_map_to_terminal(self):
        pair = _make_pair()
        maps = hom_set(pair, terminal(pair.frame).hset)
        assert maps == [terminal_map(pair)]

    def test_hom_set_members_are_morphisms(self):
        pair = _make_pair()
        target = _make_discrete(pair.frame)
        for phi in hom_set(pair, target):
            assert morphism_violations(pair, target, phi.table) == []


# -- TestCompletion --


class TestCompletion:
    def test_completion_adds_missing_singletons(self):
        pair = _make_pair()
        done = completion(pair)
        assert done.hset.size == 4
        assert done.hset.is_complete()
        assert compose(done.unit, done.counit, check=True) == identity_of(pair)


# -- TestLimits --


class TestLimits:
    def test_product_pairing(self):
        pair = _make_pair()
        square = product([pair, pair])
        assert square.hset.size == 4
        paired = pairing(square, [identity_of(pair), identity_of(pair)])
        assert compose(paired, square.legs[0]) == identity_of(pair)
        assert compose(paired, square.legs[1]) == identity_of(pair)

    def test_product_universal_property(self):
        pair = _make_pair()
        square = finite_limit("product", pair, pair, verify=True)
        assert verify_limit(square, [pair, pair]) == []

    def test_empty_product_is_terminal(self):
        s3 = _make_s3()
        assert product([], s3).hset.size == 1

    def test_equalizer_of_disagreeing_maps(self):
        pair = _make_pair()
        target = _make_discrete(pair.frame)
        phi = HMorphism.represented_by(pair, target, [0, 0])
        psi = HMorphism.represented_by(pair, target, [1, 1])
        eq = equalizer(phi, psi)
        assert all(eq.hset.extent(a) == pair.frame.bottom for a in eq.hset.elements)

    def test_equalizer_of_equal_maps(self):
        phi = _make_collapse(_make_pair())
        eq = equalizer(phi, phi)
        assert eq.hset.alpha == phi.dom.alpha

    def test_pullback_shape(self):
        phi = _make_collapse(_make_pair())
        pb = pullback(phi, phi)
        assert pb.hset.size == 4
        assert len(pb.legs) == 2


# -- TestSubobjects --


class TestSubobjects:
    def test_top_and_bottom(self):
        lattice = subobjects(_make_pair())
        s3 = lattice.frame
        assert lattice.top.values == _v(s3, "1", "1")
        assert lattice.bottom.values == _v(s3, "0", "0")
        assert len(lattice.elements()) == 5

    def test_heyting_adjunction(self):
        lattice = subobjects(_make_pair())
        rels = lattice.elements()
        for s, t, r in itertools.product(rels, repeat=3):
            assert lattice.meet(s, t).le(r) == s.le(lattice.implies(t, r))

    def test_mono_round_trip(self):
        lattice = subobjects(_make_pair())
        for sigma in lattice.elements():
            assert lattice.from_mono(lattice.to_mono(sigma)) == sigma

    def test_restrict_matches_composite(self):
        pair = _make_pair()
        lattice = subobjects(pair)
        phi = _make_collapse(pair)
        for sigma in lattice.elements():
            composed = compose_tables(lattice.to_mono(sigma), phi)
            restricted = lattice.restrict(sigma, phi)
            assert restricted.table == composed.table
            assert restricted.dom.alpha == composed.dom.alpha

    def test_restrict_needs_matching_domain(self):
        pair = _make_pair()
        phi = _make_collapse(pair)
        with pytest.raises(ObjectMismatchError):
            subobjects(phi.cod).restrict(subobjects(phi.cod).top, phi)

    def test_image_factorisation(self):
        pair = _make_pair()
        phi = _make_collapse(pair)
        epi, mono = subobjects(phi.cod).image(phi)
        assert is_epic(epi)
        assert is_monic(mono)


# -- TestChangeOfBase --


class TestChangeOfBase:
    def test_adjunctions_hold(self):
        assert change_of_base(_make_collapse(_make_pair())).adjunction_failures() == []

    def test_pullback_of_top_is_top(self):
        pair = _make_pair()
        phi = _make_collapse(pair)
        base = change_of_base(phi)
        assert base.pullback(base.source.top) == subobjects(pair).top


# -- TestHigherOrder --


class TestHigherOrder:
    def test_classifier_round_trip(self):
        pair = _make_pair()
        ho = higher_order(pair)
        for sigma in subobjects(pair).elements():
            assert ho.classified(ho.characteristic(sigma)) == sigma

    def test_power_object_size(self):
        assert higher_order(_make_pair()).power_object.size == 5

    def test_singleton_valuations(self):
        # on singletons the completion valuation is below the power-object one
        pair = _make_pair()
        frame = pair.frame
        done = completion(pair).hset
        power = higher_order(pair).power_object
        for s, t in itertools.product(done.elements, repeat=2):
            i, j = power.index(done.carrier[s]), power.index(done.carrier[t])
            assert frame.le(done.alpha[s][t], power.alpha[i][j])

    def test_transpose_round_trip(self):
        pair = _make_pair()
        ho = higher_order(pair)
        one = terminal(pair.frame).hset
        prod = product([one, pair])
        for values in strict_relations(prod.hset):
            theta = StrictRelation(prod.hset, values)
            phi = ho.transpose_to_morphism(theta, one)
            assert ho.transpose_to_relation(phi, prod) == theta
