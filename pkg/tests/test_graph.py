from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamlower.errors import MissingCoordinates, UnknownVertex
from hamlower.graph import (
    SparsityLimits,
    audit_geometry,
    build_graph,
    find_crossings,
    pauli_degrees,
    segment_intersection,
)
from hamlower.pauli import Hamiltonian


def H(n, *items):
    return Hamiltonian.from_labels(n, items)


def test_build_graph_classifies_terms():
    Hm = H(5, (0.5, ""), (1.0, "X0"), (0.3, "Z0 Y1"), (0.2, "X1 X2 X3"), (0.1, "Z1 Z2"), (0.4, "Y2 Y3 Y4"))
    G = build_graph(Hm)
    assert G.offset == 0.5
    assert {(e.a, e.b, e.pa, e.pb) for e in G.pauli_edges} == {(1, 2, "Z", "Z"), (0, 1, "Z", "Y")}
    assert {v for v in G.vertex_terms} == {0}
    assert sorted(h.vertices for h in G.hyper_edges) == [(1, 2, 3), (2, 3, 4)]
    assert G.to_hamiltonian().allclose(Hm)


def test_hyperedge_grouping_by_maximal_support():
    Hm = H(4, (1.0, "Z0 Z1 Z2 Z3"), (0.5, "X0 X1 X2"), (0.2, "Y1 Y2 Y3"))
    G = build_graph(Hm)
    assert len(G.hyper_edges) == 1
    assert len(G.hyper_edges[0].terms) == 3


def test_pauli_degrees():
    G = build_graph(H(4, (1, "Z0 X1"), (1, "Z0 X2"), (1, "X0 Y3")))
    assert pauli_degrees(G, 0) == (1, 0, 2, 3)
    assert pauli_degrees(G, 3) == (0, 1, 0, 1)
    with pytest.raises(UnknownVertex):
        pauli_degrees(G, 4)


@pytest.mark.parametrize(
    "segs, expected",
    [
        (((0, 0), (2, 2), (0, 2), (2, 0)), (1.0, 1.0)),
        (((0, 0), (1, 0), (0, 1), (1, 1)), None),
        (((0, 0), (2, 0), (1, 0), (1, 1)), (1.0, 0.0)),
        (((0, 0), (2, 0), (1, 0), (3, 0)), (1.5, 0.0)),
        (((0, 0), (1, 0), (2, 0), (3, 0)), None),
        (((0, 0), (1, 1), (1, 1), (2, 0)), (1.0, 1.0)),
    ],
)
def test_segment_intersection_cases(segs, expected):
    assert segment_intersection(*segs) == expected


def test_segment_intersection_exact_near_miss():
    # floats differing in the last place are still decided exactly
    eps = 2.0**-52
    assert segment_intersection((0, 0), (1, 1), (1 + eps, 0), (1 + eps, 2)) is None


def test_find_crossings_ignores_shared_endpoints():
    Hm = H(4, (1, "Z0 Z1"), (1, "Z2 Z3"), (1, "Z0 Z2"))
    coords = {0: (0, 0), 1: (2, 2), 2: (0, 2), 3: (2, 0)}
    cr = find_crossings(build_graph(Hm, coords))
    assert len(cr) == 1
    assert cr[0].edge1 == (0, 1) and cr[0].edge2 == (2, 3) and cr[0].point == (1.0, 1.0)


def test_find_crossings_needs_coords():
    with pytest.raises(MissingCoordinates):
        find_crossings(build_graph(H(2, (1, "Z0 Z1")), {0: (0, 0)}))


def test_audit_geometry_reports_violations():
    Hm = H(4, (1, "Z0 Z1 Z2"), (1, "X1 X2 X3"))
    coords = {0: (0, 0), 1: (10, 0), 2: (0, 10), 3: (10, 10)}
    rep, cr = audit_geometry(build_graph(Hm, coords), SparsityLimits(max_hyperedge_area=10.0))
    assert rep.max_hyperedge_area == pytest.approx(50.0)
    assert rep.max_overlaps_per_hyperedge == 1
    assert not rep.ok and "area" in rep.violations[0]
    assert cr == []
    assert rep.to_dict()["limits"]["max_hyperedge_area"] == 10.0


def test_audit_geometry_missing_coords():
    with pytest.raises(MissingCoordinates):
        audit_geometry(build_graph(H(2, (1, "Z0 Z1"), (1, "X0")), {0: (0, 0)}))


_pt = st.tuples(st.integers(-6, 6), st.integers(-6, 6))


@settings(max_examples=200, deadline=None)
@given(a=_pt, b=_pt, c=_pt, d=_pt)
def test_segment_intersection_symmetric_and_on_both(a, b, c, d):
    p = segment_intersection(a, b, c, d)
    q = segment_intersection(c, d, a, b)
    assert (p is None) == (q is None)
    if p is not None:
        for s, t in ((a, b), (c, d)):
            # the reported point lies on both segments (within rounding)
            cross = (t[0] - s[0]) * (p[1] - s[1]) - (t[1] - s[1]) * (p[0] - s[0])
            assert abs(cross) < 1e-9
            assert min(s[0], t[0]) - 1e-9 <= p[0] <= max(s[0], t[0]) + 1e-9
            assert min(s[1], t[1]) - 1e-9 <= p[1] <= max(s[1], t[1]) + 1e-9
