"""Tests for heytingkit.frame module."""

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from heytingkit.exceptions import (
    ImproperFilterError,
    NotAFilterError,
    NotDistributiveError,
    NotFrameHomError,
    NotLatticeError,
    NotPartialOrderError,
    NotTopologyError,
    UnknownElementError,
)
from heytingkit.frame import (
    Filter,
    Frame,
    FrameHom,
    QuotientHA,
    build_frame,
    filters,
    heyting_ops,
    parse_filter,
    regular_algebra,
)

# -- Helpers --


def _make_s3() -> Frame:
    return Frame.chain(["0", "u", "1"])


def _make_b4() -> Frame:
    return Frame.from_order(
        ["0", "a", "b", "1"],
        [[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1], [0, 0, 0, 1]],
    )


def _make_chain4() -> Frame:
    return Frame.chain(["0", "a", "b", "1"])


def _all_topologies(points: list[str]) -> list[list[frozenset[int]]]:
    """Every topology on ``points``, by brute force over families of subsets."""
    n = len(points)
    subsets = [frozenset(s) for r in range(n + 1) for s in itertools.combinations(range(n), r)]
    middle = [s for s in subsets if 0 < len(s) < n]
    found = []
    for r in range(len(middle) + 1):
        for extra in itertools.combinations(middle, r):
            family = {frozenset(), frozenset(range(n)), *extra}
            if all(u & v in family and u | v in family for u in family for v in family):
                found.append(sorted(family, key=sorted))
    return found


FIXTURE_FRAMES = [_make_s3(), _make_b4(), _make_chain4()] + [
    Frame.from_topology(pts, opens)
    for pts in (["p"], ["p", "q"], ["p", "q", "r"])
    for opens in _all_topologies(pts)
]


# -- TestConstruction --


class TestConstruction:
    def test_chain_operations(self):
        s3 = _make_s3()
        u = s3.index("u")
        assert s3.bottom == s3.index("0")
        assert s3.top == s3.index("1")
        assert s3.implies(u, s3.bottom) == s3.bottom
        assert s3.implies(s3.bottom, u) == s3.top
        assert s3.implies(s3.top, u) == u

    def test_from_topology_orders_empty_set_first(self):
        frame = Frame.from_topology(["x", "y"], [[], [0], [0, 1]])
        assert frame.names == ("{}", "{x}", "{x,y}")
        assert frame.bottom == 0
        assert frame.points_of == (frozenset(), frozenset({"x"}), frozenset({"x", "y"}))

    def test_powerset_names(self):
        frame = Frame.powerset(["x", "y"])
        assert set(frame.names) == {"{}", "{x}", "{y}", "{x,y}"}
        assert frame.is_boolean

    def test_from_dict_accepts_both_forms(self):
        by_order = build_frame({"elements": ["0", "1"], "leq": [[True, True], [False, True]]})
        by_topology = build_frame({"points": ["p"], "opens": [[], [0]]})
        assert by_order.size == by_topology.size == 2

    def test_to_dict_round_trip(self):
        b4 = _make_b4()
        assert Frame.from_dict(b4.to_dict()) == b4

    def test_rejects_non_reflexive(self):
        with pytest.raises(NotPartialOrderError) as exc:
            Frame.from_order(["a", "b"], [[0, 1], [0, 1]])
        assert exc.value.witness == ("a",)

    def test_rejects_missing_join(self):
        # two incomparable maximal elements
        with pytest.raises(NotLatticeError):
            Frame.from_order(["0", "a", "b"], [[1, 1, 1], [0, 1, 0], [0, 0, 1]])

    def test_rejects_non_distributive_diamond(self):
        names = ["0", "a", "b", "c", "1"]
        leq = [[1, 1, 1, 1, 1], [0, 1, 0, 0, 1], [0, 0, 1, 0, 1], [0, 0, 0, 1, 1], [0, 0, 0, 0, 1]]
        with pytest.raises(NotDistributiveError):
            Frame.from_order(names, leq)

    def test_rejects_non_topology(self):
        with pytest.raises(NotTopologyError):
            Frame.from_topology(["x", "y"], [[], [0], [1]])

    def test_unknown_element(self):
        with pytest.raises(UnknownElementError):
            _make_s3().index("v")


# -- TestHeytingLaws --


class TestHeytingLaws:
    @pytest.mark.parametrize("frame", FIXTURE_FRAMES, ids=lambda f: f"{f.size}:{','.join(f.names)}")
    def test_adjunction_exhaustive(self, frame):
        for a, b, c in itertools.product(frame.elements, repeat=3):
            assert frame.le(frame.meet(a, b), c) == frame.le(b, frame.implies(a, c))

    @given(st.data())
    def test_implication_is_largest(self, data):
        frame = data.draw(st.sampled_from(FIXTURE_FRAMES))
        a = data.draw(st.sampled_from(list(frame.elements)))
        c = data.draw(st.sampled_from(list(frame.elements)))
        expected = frame.join_all(b for b in frame.elements if frame.le(frame.meet(a, b), c))
        assert frame.implies(a, c) == expected

    def test_empty_join_and_meet(self):
        s3 = _make_s3()
        assert s3.join_all([]) == s3.bottom
        assert s3.meet_all([]) == s3.top

    def test_heyting_ops(self):
        ops = heyting_ops(_make_s3(), "u", "0")
        assert ops.implies == 0
        assert ops.neg == 0
        assert ops.is_regular is False

    def test_atoms_and_boolean(self):
        b4 = _make_b4()
        assert [b4.name(a) for a in b4.atoms] == ["a", "b"]
        assert b4.is_boolean
        assert not _make_s3().is_boolean


# -- TestFrameHom --


class TestFrameHom:
    def test_identity_adjoint(self):
        s3 = _make_s3()
        h = FrameHom(s3, s3, tuple(s3.elements))
        assert h.right_adjoint() == tuple(s3.elements)

    def test_f2_into_s3(self):
        f2 = Frame.chain(["0", "1"])
        s3 = _make_s3()
        h = FrameHom.from_mapping(f2, s3, {"0": "0", "1": "1"})
        k = h.right_adjoint()
        assert [f2.name(x) for x in k] == ["0", "0", "1"]

    def test_bottom_not_preserved(self):
        f2 = Frame.chain(["0", "1"])
        s3 = _make_s3()
        with pytest.raises(NotFrameHomError) as exc:
            FrameHom.from_mapping(f2, s3, {"0": "u", "1": "1"})
        assert exc.value.law == "bottom"


# -- TestFilters --


class TestFilters:
    def test_s3_classification(self):
        s3 = _make_s3()
        fs = {f.label: f for f in filters(s3)}
        assert [label for label, f in fs.items() if f.is_proper] == ["up:u", "up:1"]
        assert [label for label, f in fs.items() if f.is_maximal] == ["up:u"]
        assert sorted(label for label, f in fs.items() if f.is_prime) == ["up:1", "up:u"]

    def test_b4_classification(self):
        b4 = _make_b4()
        fs = {f.label: f for f in filters(b4)}
        assert sorted(label for label, f in fs.items() if f.is_maximal) == ["up:a", "up:b"]
        assert fs["up:1"].is_proper
        assert not fs["up:1"].is_prime

    def test_from_members_canonicalizes(self):
        b4 = _make_b4()
        assert Filter.from_members(b4, ["a", "1"]) == Filter.principal(b4, "a")

    def test_from_members_rejects_non_filter(self):
        b4 = _make_b4()
        with pytest.raises(NotAFilterError):
            Filter.from_members(b4, ["a"])
        with pytest.raises(NotAFilterError):
            Filter.from_members(b4, ["a", "b", "1"])

    def test_parse_filter(self):
        b4 = _make_b4()
        assert parse_filter(b4, "up:b").label == "up:b"
        assert parse_filter(b4, "b, 1").label == "up:b"


# -- TestQuotient --


class TestQuotient:
    def test_s3_by_up_u(self):
        s3 = _make_s3()
        q = QuotientHA(s3, Filter.principal(s3, "u"))
        assert q.frame.size == 2
        assert q.project(s3.index("u")) == q.project(s3.top)
        assert q.frame.names == ("[0]", "[u]")

    def test_up_top_is_identity(self):
        b4 = _make_b4()
        q = QuotientHA(b4, Filter.principal(b4, "1"))
        assert q.frame.size == b4.size

    def test_improper_filter(self):
        s3 = _make_s3()
        with pytest.raises(ImproperFilterError):
            QuotientHA(s3, Filter.principal(s3, "0"))


# -- TestRegularAlgebra --


class TestRegularAlgebra:
    def test_s3_regular_elements(self):
        reg = regular_algebra(_make_s3())
        assert reg.algebra.names == ("0", "1")

    def test_b4_is_all_regular(self):
        reg = regular_algebra(_make_b4())
        assert reg.algebra.size == 4

    def test_chain4_regular_elements(self):
        reg = regular_algebra(_make_chain4())
        assert reg.algebra.names == ("0", "1")

    def test_correspondence_and_basic_open(self):
        b4 = _make_b4()
        reg = regular_algebra(b4)
        assert len(reg.ultrafilters()) == 2
        assert reg.basic_open(b4.top) == frozenset(b4.atoms)
        assert reg.basic_open(b4.index("a")) == frozenset({b4.index("a")})
