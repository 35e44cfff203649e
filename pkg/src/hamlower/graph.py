"""Interaction (hyper)graphs of Hamiltonians and their plane drawings."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping

import shapely
from shapely.geometry import MultiPoint

from .errors import MissingCoordinates, UnknownVertex
from .pauli import Hamiltonian, PauliString

__all__ = [
    "PauliEdge",
    "HyperEdge",
    "InteractionGraph",
    "SparsityLimits",
    "SparsityReport",
    "Crossing",
    "build_graph",
    "pauli_degrees",
    "audit_geometry",
    "find_crossings",
    "segment_intersection",
]

Point = tuple[float, float]


@dataclass(frozen=True)
class PauliEdge:
    """A 2-local term ``alpha * P_a (x) P_b`` with ``a < b``."""

    a: int
    b: int
    pa: str
    pb: str
    alpha: float

    @property
    def string(self) -> PauliString:
        return PauliString.from_axes({self.a: self.pa, self.b: self.pb})

    def axis_at(self, v: int) -> str:
        return self.pa if v == self.a else self.pb

    def other(self, v: int) -> int:
        return self.b if v == self.a else self.a


@dataclass(frozen=True)
class HyperEdge:
    """Terms of weight >= 3 sharing one maximal support."""

    vertices: tuple[int, ...]
    terms: tuple[tuple[PauliString, float], ...]


@dataclass
class InteractionGraph:
    num_qubits: int
    pauli_edges: list[PauliEdge] = field(default_factory=list)
    hyper_edges: list[HyperEdge] = field(default_factory=list)
    vertex_terms: dict[int, list[tuple[PauliString, float]]] = field(default_factory=dict)
    offset: float = 0.0
    coords: dict[int, Point] = field(default_factory=dict)

    @property
    def vertices(self) -> list[int]:
        return list(range(self.num_qubits))

    def active_vertices(self) -> list[int]:
        vs = set(self.vertex_terms)
        for e in self.pauli_edges:
            vs.update((e.a, e.b))
        for h in self.hyper_edges:
            vs.update(h.vertices)
        return sorted(vs)

    def edges_at(self, v: int) -> list[PauliEdge]:
        return [e for e in self.pauli_edges if v in (e.a, e.b)]

    def neighbours(self, v: int) -> set[int]:
        return {e.other(v) for e in self.edges_at(v)}

    def hyperedges_at(self, v: int) -> int:
        return sum(1 for h in self.hyper_edges if v in h.vertices)

    def to_hamiltonian(self) -> Hamiltonian:
        """Re-sum edges, hyperedges, vertex terms and offset."""
        terms = [(PauliString(), self.offset)]
        terms += [(e.string, e.alpha) for e in self.pauli_edges]
        terms += [t for h in self.hyper_edges for t in h.terms]
        terms += [t for ts in self.vertex_terms.values() for t in ts]
        return Hamiltonian(self.num_qubits, terms)

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "offset": self.offset,
            "pauli_edges": [[e.a, e.b, e.pa, e.pb, e.alpha] for e in self.pauli_edges],
            "hyper_edges": [
                {"vertices": list(h.vertices), "terms": [[c, [[q, a] for q, a in s.axes]] for s, c in h.terms]}
                for h in self.hyper_edges
            ],
            "vertex_terms": {str(v): [[c, [[q, a] for q, a in s.axes]] for s, c in ts] for v, ts in self.vertex_terms.items()},
            "coords": {str(v): list(p) for v, p in sorted(self.coords.items())},
        }


def build_graph(H: Hamiltonian, coords: Mapping[int, Point] | None = None) -> InteractionGraph:
    """Interaction graph of ``H``.

    Weight-2 terms become Pauli edges and weight-1 terms vertex terms. Terms
    of weight >= 3 are grouped into hyperedges by maximal support: a term
    whose support lies inside another weight >= 3 support belongs to that
    hyperedge.
    """
    G = InteractionGraph(H.num_qubits, coords=dict(coords or {}))
    big = []
    for s, c in H.items():
        w = s.weight
        if w == 0:
            G.offset += c
        elif w == 1:
            G.vertex_terms.setdefault(s.support[0], []).append((s, c))
        elif w == 2:
            a, b = s.support
            G.pauli_edges.append(PauliEdge(a, b, s.axis(a), s.axis(b), c))
        else:
            big.append((s, c))
    masks = sorted({s.support_mask for s, _ in big}, key=lambda m: (-bin(m).count("1"), m))
    maximal: list[int] = []
    for m in masks:
        if not any(m & M == m for M in maximal):
            maximal.append(m)
    groups: dict[int, list] = {M: [] for M in maximal}
    for s, c in big:
        owner = next(M for M in maximal if s.support_mask & M == s.support_mask)
        groups[owner].append((s, c))
    for M in sorted(maximal, key=lambda m: PauliString(m, 0).support):
        G.hyper_edges.append(HyperEdge(PauliString(M, 0).support, tuple(groups[M])))
    return G


def pauli_degrees(G: InteractionGraph, v: int) -> tuple[int, int, int, int]:
    """``(d_x, d_y, d_z, d_x + d_y + d_z)`` over Pauli edges at ``v``."""
    if not 0 <= v < G.num_qubits:
        raise UnknownVertex(f"vertex {v} not in graph")
    d = {"X": 0, "Y": 0, "Z": 0}
    for e in G.edges_at(v):
        d[e.axis_at(v)] += 1
    return d["X"], d["Y"], d["Z"], d["X"] + d["Y"] + d["Z"]


# exact segment geometry

def _frac(p) -> tuple[Fraction, Fraction]:
    return Fraction(p[0]), Fraction(p[1])


def _orient(p, q, r) -> int:
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def _on_segment(p, q, r) -> bool:
    """``r`` collinear with ``pq`` lies within its bounding box."""
    return min(p[0], q[0]) <= r[0] <= max(p[0], q[0]) and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])


def segment_intersection(p1, p2, p3, p4) -> Point | None:
    """A common point of segments ``p1p2`` and ``p3p4``, or ``None``.

    Decided exactly in rational arithmetic. Collinear overlaps return the
    midpoint of the overlap.
    """
    a, b, c, d = (_frac(p) for p in (p1, p2, p3, p4))
    o1, o2, o3, o4 = _orient(a, b, c), _orient(a, b, d), _orient(c, d, a), _orient(c, d, b)
    if o1 == o2 == o3 == o4 == 0:
        pts = [p for p in (a, b) if _on_segment(c, d, p)] + [p for p in (c, d) if _on_segment(a, b, p)]
        if not pts:
            return None
        lo, hi = min(pts), max(pts)
        return (float((lo[0] + hi[0]) / 2), float((lo[1] + hi[1]) / 2))
    if o1 * o2 <= 0 and o3 * o4 <= 0:
        if o1 == 0 and _on_segment(a, b, c):
            return (float(c[0]), float(c[1]))
        if o2 == 0 and _on_segment(a, b, d):
            return (float(d[0]), float(d[1]))
        if o3 == 0 and _on_segment(c, d, a):
            return (float(a[0]), float(a[1]))
        if o4 == 0 and _on_segment(c, d, b):
            return (float(b[0]), float(b[1]))
        if 0 in (o1, o2, o3, o4):
            return None
        den = (b[0] - a[0]) * (d[1] - c[1]) - (b[1] - a[1]) * (d[0] - c[0])
        t = ((c[0] - a[0]) * (d[1] - c[1]) - (c[1] - a[1]) * (d[0] - c[0])) / den
        return (float(a[0] + t * (b[0] - a[0])), float(a[1] + t * (b[1] - a[1])))
    return None


@dataclass(frozen=True)
class Crossing:
    edge1: tuple[int, int]
    edge2: tuple[int, int]
    point: Point


def find_crossings(G: InteractionGraph) -> list[Crossing]:
    """All intersecting pairs of edge segments that share no endpoint."""
    pairs = sorted({(e.a, e.b) for e in G.pauli_edges})
    for a, b in pairs:
        for v in (a, b):
            if v not in G.coords:
                raise MissingCoordinates(f"vertex {v} has no coordinates")
    box = {}
    for a, b in pairs:
        (x1, y1), (x2, y2) = G.coords[a], G.coords[b]
        box[a, b] = (min(x1, x2), max(x1, x2), min(y1, y2), max(y1, y2))
    out = []
    for (a, b), (c, d) in combinations(pairs, 2):
        if len({a, b, c, d}) < 4:
            continue
        # disjoint bounding boxes rule out a common point; float comparisons are exact
        p, q = box[a, b], box[c, d]
        if p[1] < q[0] or q[1] < p[0] or p[3] < q[2] or q[3] < p[2]:
            continue
        pt = segment_intersection(G.coords[a], G.coords[b], G.coords[c], G.coords[d])
        if pt is not None:
            out.append(Crossing((a, b), (c, d), pt))
    return out


@dataclass(frozen=True)
class SparsityLimits:
    max_hyperedges_per_vertex: int = 9
    max_overlaps_per_hyperedge: int = 16
    max_hyperedge_area: float = 25.0


@dataclass
class SparsityReport:
    max_hyperedges_per_vertex: int
    max_overlaps_per_hyperedge: int
    max_hyperedge_area: float
    limits: SparsityLimits
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "max_hyperedges_per_vertex": self.max_hyperedges_per_vertex,
            "max_overlaps_per_hyperedge": self.max_overlaps_per_hyperedge,
            "max_hyperedge_area": self.max_hyperedge_area,
            "limits": self.limits.__dict__,
            "violations": list(self.violations),
        }


def audit_geometry(G: InteractionGraph, limits: SparsityLimits = SparsityLimits()):
    """Spatial-sparsity report and crossing list for a drawn graph."""
    for v in G.active_vertices():
        if v not in G.coords:
            raise MissingCoordinates(f"vertex {v} has no coordinates")
    crossings = find_crossings(G)
    hulls = [MultiPoint([G.coords[v] for v in h.vertices]).convex_hull for h in G.hyper_edges]
    if hulls:
        shapely.prepare(hulls)
    overlaps = [0] * len(hulls)
    for i, j in combinations(range(len(hulls)), 2):
        if hulls[i].intersects(hulls[j]):
            overlaps[i] += 1
            overlaps[j] += 1
    per_vertex = max((G.hyperedges_at(v) for v in G.active_vertices()), default=0)
    max_area = max((h.area for h in hulls), default=0.0)
    rep = SparsityReport(per_vertex, max(overlaps, default=0), float(max_area), limits)
    if per_vertex > limits.max_hyperedges_per_vertex:
        rep.violations.append(f"{per_vertex} hyperedges at one vertex > {limits.max_hyperedges_per_vertex}")
    if rep.max_overlaps_per_hyperedge > limits.max_overlaps_per_hyperedge:
        rep.violations.append(f"{rep.max_overlaps_per_hyperedge} overlaps > {limits.max_overlaps_per_hyperedge}")
    if max_area > limits.max_hyperedge_area:
        rep.violations.append(f"hyperedge area {max_area:.3g} > {limits.max_hyperedge_area}")
    return rep, crossings
