"""Planarization of drawn 2-local Hamiltonians and square-lattice embedding.

``planarize`` turns a drawn 2-local Hamiltonian into one whose interaction
graph is drawn without crossings and has Pauli degree at most three.
``snap_and_route`` maps such a drawing onto the square grid and
``match_path_lengths`` stretches every edge along its lattice path with
subdivision mediators.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from shapely.geometry import LineString, Point as SPoint, Polygon

from .errors import AuditFailed, InvalidParameter, MissingCoordinates, PlanInfeasible, RoutingFailed
from .gadgets import (
    Coupling,
    GadgetApplication,
    ReductionPlan,
    _subdivision_coupling,
    cross_coupling,
    fork_coupling,
    mediator_gadget,
    minimal_delta,
)
from .graph import (
    InteractionGraph,
    PauliEdge,
    SparsityLimits,
    audit_geometry,
    build_graph,
    find_crossings,
    pauli_degrees,
    segment_intersection,
)
from .pauli import Hamiltonian, PauliString, norm

__all__ = [
    "PlanarizeConfig",
    "RouteConfig",
    "LatticeEmbedding",
    "planarize",
    "planarity_report",
    "snap_and_route",
    "match_path_lengths",
    "lattice_positions",
    "lattice_violations",
]

Point = tuple[float, float]
GridPoint = tuple[int, int]
DIRECTIONS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # E, N, W, S


@dataclass
class PlanarizeConfig:
    """Options for :func:`planarize`.

    Attributes:
        delta_factor: each round uses ``delta_factor`` times the smallest gap
            with ``||V|| <= delta / 2`` (coefficient 1-norm).
        deltas: explicit gaps consumed one per round; overrides
            ``delta_factor`` while entries remain.
        degree_reduction: ``"triangle"`` subdivides two edges and forks the
            stubs; ``"merge_fork"`` forks two edges whose far endpoints are
            already adjacent, so the new edge merges into the existing one.
        localize_fraction: where vertex-localization mediators sit along
            their edge, measured from the high-degree vertex.
        stub_fraction: where triangle stubs sit along their edge.
        crossing_margin: crossing localization radius as a fraction of the
            distance from the crossing to the nearest other feature.
        max_rounds: cap on serial rounds.
    """

    delta_factor: float = 4.0
    deltas: Sequence[float] | None = None
    degree_reduction: str = "triangle"
    localize_fraction: float = 0.3
    stub_fraction: float = 0.2
    crossing_margin: float = 0.25
    max_rounds: int = 64
    limits: SparsityLimits = field(default_factory=SparsityLimits)


def _lerp(p, q, t: float) -> Point:
    return (float(p[0] + t * (q[0] - p[0])), float(p[1] + t * (q[1] - p[1])))


def _centroid(*ps) -> Point:
    return (float(np.mean([p[0] for p in ps])), float(np.mean([p[1] for p in ps])))


def _edge_key(e: PauliEdge) -> PauliString:
    return e.string


class _Planarizer:
    def __init__(self, H: Hamiltonian, coords: Mapping[int, Point], cfg: PlanarizeConfig):
        self.H = H
        self.coords = {int(k): (float(v[0]), float(v[1])) for k, v in coords.items()}
        self.cfg = cfg
        self.n_original = H.num_qubits
        self.rounds: list[GadgetApplication] = []
        self._deltas = list(cfg.deltas or [])

    @property
    def graph(self) -> InteractionGraph:
        return build_graph(self.H, self.coords)

    def _delta_for(self, couplings: Sequence[Coupling], kind: str) -> float:
        if self._deltas:
            return float(self._deltas.pop(0))
        probe = mediator_gadget(self.H, couplings, 1.0, kind)
        # the identity part of V shifts every level equally
        h = norm(probe.h_else.without([PauliString()]), "upper_bound")
        o = sum(norm(cp.operator, "upper_bound") for cp in couplings)
        return self.cfg.delta_factor * minimal_delta(h, o)

    def apply(self, couplings: Sequence[Coupling], kind: str) -> GadgetApplication:
        if not couplings:
            raise PlanInfeasible(f"empty {kind} round")
        if len(self.rounds) >= self.cfg.max_rounds:
            raise PlanInfeasible(f"more than {self.cfg.max_rounds} rounds required")
        delta = self._delta_for(couplings, kind)
        app = mediator_gadget(self.H, couplings, delta, kind, self.coords)
        self.rounds.append(app)
        self.H = app.total
        self.coords.update(app.positions)
        return app

    def term_between(self, p: int, q: int) -> PauliString:
        edges = [e for e in self.graph.edges_at(p) if e.other(p) == q]
        if len(edges) != 1:
            raise PlanInfeasible(f"expected one edge between {p} and {q}, found {len(edges)}")
        return edges[0].string

    def subdivision(self, term: PauliString, near: int, pos: Point) -> Coupling:
        cp = _subdivision_coupling(self.H, term, [near])
        cp.position = pos
        return cp

    # (1) vertex localization

    def localize_vertices(self) -> None:
        G = self.graph
        high = {v for v in G.active_vertices() if pauli_degrees(G, v)[3] > 3}
        if not high:
            return
        jobs = []
        for e in G.pauli_edges:
            ends = [v for v in (e.a, e.b) if v in high]
            if not ends:
                continue
            near = ends[0]
            t = 0.5 if len(ends) == 2 else self.cfg.localize_fraction
            jobs.append(self.subdivision(e.string, near, _lerp(self.coords[near], self.coords[e.other(near)], t)))
        self.apply(jobs, "localize_vertices")

    # (2) and (6) degree reduction

    def _needs_reduction(self, G: InteractionGraph, v: int, per_axis: bool) -> bool:
        dx, dy, dz, d = pauli_degrees(G, v)
        if d > 3:
            return True
        return per_axis and v < self.n_original and max(dx, dy, dz) > 1

    def _angle(self, v: int, u: int) -> float:
        p, q = self.coords[v], self.coords[u]
        return math.atan2(q[1] - p[1], q[0] - p[0])

    def _triangle_pairs(self, G: InteractionGraph, vertices: list[int], adjacent: bool):
        """Choose edge pairs, one per vertex and axis, with no edge used twice."""
        used: set[PauliString] = set()
        pairs = []
        for v in vertices:
            by_axis: dict[str, list[PauliEdge]] = {}
            for e in G.edges_at(v):
                by_axis.setdefault(e.axis_at(v), []).append(e)
            for axis in "XYZ":
                es = sorted(by_axis.get(axis, []), key=lambda e: (e.other(v), e.string.sort_key()))
                if len(es) < 2:
                    continue
                if adjacent:
                    # angularly consecutive edges so the stub chord stays inside a free wedge
                    ring = sorted(G.edges_at(v), key=lambda e: self._angle(v, e.other(v)))
                    cands = [(ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))]
                    cands = [(e1, e2) for e1, e2 in cands if e1.axis_at(v) == e2.axis_at(v) == axis]
                else:
                    cands = [(es[i], es[i + 1]) for i in range(0, len(es) - 1, 2)]
                for e1, e2 in cands:
                    k1, k2 = _edge_key(e1), _edge_key(e2)
                    if k1 in used or k2 in used or k1 == k2:
                        continue
                    used.update((k1, k2))
                    pairs.append((v, e1, e2))
                    if adjacent:
                        break
        return pairs

    def _stub_positions(self, G: InteractionGraph, v: int, e1: PauliEdge, e2: PauliEdge) -> tuple[Point, Point]:
        """Stub points for a triangle pair, turned slightly into the wedge between the two edges.

        Turning keeps the stub chord off ``v`` even when the paired edges
        are collinear through ``v``.
        """
        t = self.cfg.stub_fraction
        a1, a2 = self._angle(v, e1.other(v)), self._angle(v, e2.other(v))
        sweep = (a2 - a1) % (2 * math.pi)
        # turn e1 counterclockwise and e2 clockwise when the wedge runs e1 -> e2
        sign = 1.0 if sweep <= math.pi + 1e-12 else -1.0
        wedge = sweep if sign > 0 else 2 * math.pi - sweep
        others = [self._angle(v, e.other(v)) for e in G.edges_at(v)]
        out = []
        for a, turn in ((a1, sign), (a2, -sign)):
            gaps = [abs((b - a + math.pi) % (2 * math.pi) - math.pi) for b in others]
            gaps = [g for g in gaps if g > 1e-12]
            d = min([0.2, wedge / 4] + [g / 3 for g in gaps])
            e = e1 if a == a1 else e2
            length = math.dist(self.coords[v], self.coords[e.other(v)])
            ang = a + turn * d
            out.append((self.coords[v][0] + t * length * math.cos(ang), self.coords[v][1] + t * length * math.sin(ang)))
        return out[0], out[1]

    def _fork_position(self, G: InteractionGraph, v: int, s1: int, s2: int) -> Point:
        """A point inside triangle ``v s1 s2`` kept clear of the other drawn edges."""
        pv, p1, p2 = (np.asarray(self.coords[q]) for q in (v, s1, s2))
        tol = 0.05 * min(np.linalg.norm(p1 - pv), np.linalg.norm(p2 - pv))
        segs = [seg for e, seg in self._segments(G) if not ({e.a, e.b} <= {v, s1, s2})]
        best, best_d = None, -1.0
        for w in (0.5, 0.35, 0.65, 0.2, 0.8):
            f = pv / 3 + (2 / 3) * (w * p1 + (1 - w) * p2)
            d = min((SPoint(f).distance(seg) for seg in segs), default=math.inf)
            if d > tol:
                return (float(f[0]), float(f[1]))
            if d > best_d:
                best, best_d = f, d
        return (float(best[0]), float(best[1]))

    def triangle_round(self, per_axis: bool, adjacent: bool) -> bool:
        G = self.graph
        todo = [v for v in G.active_vertices() if self._needs_reduction(G, v, per_axis)]
        pairs = self._triangle_pairs(G, todo, adjacent)
        if not pairs:
            return False
        jobs = []
        for v, e1, e2 in pairs:
            for e, pos in zip((e1, e2), self._stub_positions(G, v, e1, e2)):
                jobs.append(self.subdivision(e.string, v, pos))
        app = self.apply(jobs, "triangle_subdivision")
        stubs = iter(app.mediators)
        G = self.graph
        forks = []
        for v, e1, e2 in pairs:
            s1, s2 = next(stubs), next(stubs)
            t1 = PauliString.from_axes({v: e1.axis_at(v), s1: "X"})
            t2 = PauliString.from_axes({v: e2.axis_at(v), s2: "X"})
            cp = fork_coupling(self.H, v, t1, t2, balanced=True)
            cp.position = self._fork_position(G, v, s1, s2)
            forks.append(cp)
        self.apply(forks, "triangle_fork")
        return True

    def _segments(self, G: InteractionGraph, skip: Iterable[PauliString] = ()) -> list[tuple[PauliEdge, LineString]]:
        skip = set(skip)
        return [(e, LineString([self.coords[e.a], self.coords[e.b]])) for e in G.pauli_edges if e.string not in skip]

    def _fork_is_planar(self, G: InteractionGraph, v: int, p: int, q: int, f: Point, drop) -> bool:
        tri = Polygon([self.coords[v], self.coords[p], self.coords[q]])
        if tri.area <= 0:
            return False
        for u in G.active_vertices():
            if u not in (v, p, q) and tri.intersects(SPoint(self.coords[u])):
                return False
        new = [LineString([f, self.coords[u]]) for u in (v, p, q)]
        for e, seg in self._segments(G, drop):
            ends = {e.a, e.b}
            for u, ln in zip((v, p, q), new):
                if u in ends:
                    continue
                if ln.intersects(seg):
                    return False
        return True

    def merge_fork_round(self) -> bool:
        G = self.graph
        todo = [v for v in G.active_vertices() if pauli_degrees(G, v)[3] > 3]
        busy: set[int] = set()
        forks = []
        for v in todo:
            if v in busy:
                continue
            edges = sorted(G.edges_at(v), key=lambda e: (e.other(v), e.string.sort_key()))
            done = False
            for i, e1 in enumerate(edges):
                for e2 in edges[i + 1:]:
                    p, q = e1.other(v), e2.other(v)
                    if e1.axis_at(v) != e2.axis_at(v) or p == q or busy & {v, p, q}:
                        continue
                    merged = PauliString.from_axes({p: e1.axis_at(p), q: e2.axis_at(q)})
                    if self.H.coeff(merged) == 0.0:
                        continue
                    f = _centroid(self.coords[v], self.coords[p], self.coords[q])
                    if not self._fork_is_planar(G, v, p, q, f, (e1.string, e2.string)):
                        continue
                    cp = fork_coupling(self.H, v, e1.string, e2.string, balanced=True)
                    cp.position = f
                    forks.append(cp)
                    busy.update((v, p, q))
                    done = True
                    break
                if done:
                    break
        if not forks:
            return False
        self.apply(forks, "merge_fork")
        return True

    def reduce_degrees(self, per_axis: bool, mode: str) -> None:
        while True:
            G = self.graph
            if not any(self._needs_reduction(G, v, per_axis) for v in G.active_vertices()):
                return
            if mode == "merge_fork" and self.merge_fork_round():
                continue
            if not self.triangle_round(per_axis, adjacent=(mode != "pairs")):
                raise PlanInfeasible("degree reduction made no progress")

    # (3) crossing splitting

    def _crossings_by_edge(self):
        G = self.graph
        crossings = find_crossings(G)
        by_pair: dict[tuple[int, int], list] = {}
        for c in crossings:
            by_pair.setdefault(c.edge1, []).append(c)
            by_pair.setdefault(c.edge2, []).append(c)
        return G, crossings, by_pair

    def split_crossing_edges(self) -> None:
        while True:
            G, _, by_pair = self._crossings_by_edge()
            jobs = []
            for (a, b), cs in sorted(by_pair.items()):
                if len(cs) < 2:
                    continue
                pa, pb = np.asarray(self.coords[a]), np.asarray(self.coords[b])
                ts = sorted(float(np.dot(np.asarray(c.point) - pa, pb - pa) / np.dot(pb - pa, pb - pa)) for c in cs)
                k = len(ts) // 2
                t = (ts[k - 1] + ts[k]) / 2
                jobs.append(self.subdivision(self.term_between(a, b), a, _lerp(pa, pb, t)))
            if not jobs:
                return
            self.apply(jobs, "split_crossing_edges")

    # (4) crossing localization and (5) cross gadgets

    def _clearance(self, G: InteractionGraph, x: Point, pairs) -> float:
        ends = {v for pr in pairs for v in pr}
        px = SPoint(x)
        d = min(px.distance(SPoint(self.coords[v])) for v in ends)
        for u in G.active_vertices():
            if u not in ends:
                d = min(d, px.distance(SPoint(self.coords[u])))
        for e, seg in self._segments(G):
            if (e.a, e.b) not in pairs:
                d = min(d, px.distance(seg))
        return d

    def _quadrilateral_ok(self, G: InteractionGraph, corners: list[int], inner: set[tuple[int, int]]) -> bool:
        quad = Polygon([self.coords[v] for v in corners])
        if not quad.is_valid or quad.area <= 0:
            return False
        for u in G.active_vertices():
            if u not in corners and quad.intersects(SPoint(self.coords[u])):
                return False
        for e, seg in self._segments(G):
            if (e.a, e.b) in inner:
                continue
            hit = quad.intersection(seg)
            if hit.is_empty:
                continue
            if hit.geom_type == "Point" and ({e.a, e.b} & set(corners)):
                continue
            return False
        return True

    def localize_and_cross(self) -> None:
        G, crossings, by_pair = self._crossings_by_edge()
        if not crossings:
            return
        for c in crossings:
            if len(by_pair[c.edge1]) != 1 or len(by_pair[c.edge2]) != 1:
                raise PlanInfeasible("crossing splitting left an edge with several crossings")
            if c.point in (self.coords[v] for v in (*c.edge1, *c.edge2)):
                raise PlanInfeasible(f"edges {c.edge1} and {c.edge2} touch at an endpoint")
        plans = []
        for c in crossings:
            r = self.cfg.crossing_margin * self._clearance(G, c.point, {c.edge1, c.edge2})
            plans.append((c, r))
        # first subdivision: mediator just beyond the crossing towards the far endpoint
        jobs, far = [], []
        for c, r in plans:
            for p, q in (c.edge1, c.edge2):
                x = np.asarray(c.point)
                u = np.asarray(self.coords[q]) - x
                pos = tuple(map(float, x + r * u / np.linalg.norm(u)))
                jobs.append(self.subdivision(self.term_between(p, q), p, pos))
                far.append(p)
        app = self.apply(jobs, "localize_crossings")
        m1 = list(app.mediators)
        # second subdivision: mediator just before the crossing on the near part
        jobs = []
        for i, (c, r) in enumerate(plans):
            for j in range(2):
                p = far[2 * i + j]
                x = np.asarray(c.point)
                u = np.asarray(self.coords[p]) - x
                pos = tuple(map(float, x + r * u / np.linalg.norm(u)))
                jobs.append(self.subdivision(self.term_between(p, m1[2 * i + j]), p, pos))
        app = self.apply(jobs, "localize_crossings")
        m2 = list(app.mediators)
        G = self.graph
        cross_jobs = []
        for i, (c, _) in enumerate(plans):
            s1 = tuple(sorted((m2[2 * i], m1[2 * i])))
            s2 = tuple(sorted((m2[2 * i + 1], m1[2 * i + 1])))
            corners = [m2[2 * i], m2[2 * i + 1], m1[2 * i], m1[2 * i + 1]]
            if not self._quadrilateral_ok(G, corners, {s1, s2}):
                raise PlanInfeasible(f"crossing at {c.point} could not be isolated")
            cross_jobs.append(cross_coupling(self.H, self.term_between(*s1), self.term_between(*s2), self.coords,
                                             balanced=True))
        self.apply(cross_jobs, "cross")

    def run(self) -> None:
        mode = self.cfg.degree_reduction
        self.localize_vertices()
        self.reduce_degrees(per_axis=True, mode="pairs")
        self.split_crossing_edges()
        self.localize_and_cross()
        self.reduce_degrees(per_axis=True, mode=mode)
        if find_crossings(self.graph):
            raise PlanInfeasible("degree reduction introduced crossings")


def planarize(H: Hamiltonian, coords: Mapping[int, Point], config: PlanarizeConfig | None = None):
    """Planar, degree-three reduction of a drawn 2-local Hamiltonian.

    Steps, each a round of parallel gadgets: localize vertices of Pauli
    degree above three; pair same-axis edges with triangle gadgets until
    every degree is at most three and original qubits carry each axis at
    most once; subdivide edges with several crossings until each crosses at
    most one other; isolate every crossing between four nearby mediators;
    replace each crossing by a cross gadget; reduce the resulting degree-four
    mediators.

    Returns:
        ``(H_out, plan, coords_out)`` with a drawing for every qubit.

    Raises:
        AuditFailed: input is not 2-local or fails the sparsity audit.
        PlanInfeasible: a step cannot be completed on this drawing.
    """
    cfg = config or PlanarizeConfig()
    if cfg.degree_reduction not in ("triangle", "merge_fork"):
        raise InvalidParameter(f"unknown degree reduction {cfg.degree_reduction!r}")
    if H.locality() > 2:
        raise AuditFailed("planarize expects a 2-local Hamiltonian")
    try:
        rep, _ = audit_geometry(build_graph(H, coords), cfg.limits)
    except MissingCoordinates as exc:
        raise AuditFailed(str(exc)) from exc
    if not rep.ok:
        raise AuditFailed("; ".join(rep.violations))
    worker = _Planarizer(H, coords, cfg)
    worker.run()
    return worker.H, ReductionPlan(H, worker.rounds), worker.coords


def planarity_report(H: Hamiltonian, coords: Mapping[int, Point], num_original: int) -> dict:
    """Crossings and degree profile of a drawn Hamiltonian."""
    G = build_graph(H, coords)
    degs = {v: pauli_degrees(G, v) for v in G.active_vertices()}
    med = {v: d for v, d in degs.items() if v >= num_original}
    orig = {v: d for v, d in degs.items() if v < num_original}
    return {
        "num_qubits": H.num_qubits,
        "crossings": len(find_crossings(G)),
        "max_pauli_degree": max((d[3] for d in degs.values()), default=0),
        "original_max_axis_degree": max((max(d[:3]) for d in orig.values()), default=0),
        "mediator_x_degrees": sorted({d[0] for d in med.values()}),
        "mediator_yz_degree": max((d[1] + d[2] for d in med.values()), default=0),
    }


# square lattice


@dataclass
class RouteConfig:
    """Options for :func:`snap_and_route`.

    Attributes:
        grid_spacing: initial spacing; halved on each refinement.
        corridor: half-width of the routing corridor around each segment,
            in grid steps.
        vertex_box: half-size of the square around each endpoint in which
            paths may leave the corridor.
        min_angle_deg: smallest allowed angle between edges at a vertex.
        max_refinements: retries with a halved spacing.
        max_path_length: cap on lattice path length in grid steps.
    """

    grid_spacing: float = 1.0
    corridor: float = 1.0
    vertex_box: int = 2
    min_angle_deg: float = 15.0
    max_refinements: int = 6
    max_path_length: int = 256


@dataclass
class LatticeEmbedding:
    """Grid positions for vertices and lattice paths for Pauli edges.

    Edges are keyed by their Pauli string; each path runs from the lower to
    the higher endpoint.
    """

    phi_vertex: dict[int, GridPoint]
    phi_edge: dict[PauliString, list[GridPoint]]
    grid_spacing: float

    def path_length(self, key: PauliString) -> int:
        return len(self.phi_edge[key]) - 1

    def to_dict(self) -> dict:
        return {
            "grid_spacing": self.grid_spacing,
            "phi_vertex": {str(v): list(p) for v, p in sorted(self.phi_vertex.items())},
            "phi_edge": [{"edge": str(k), "path": [list(p) for p in path]}
                         for k, path in sorted(self.phi_edge.items(), key=lambda kv: kv[0].sort_key())],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeEmbedding":
        return cls(
            {int(v): (int(p[0]), int(p[1])) for v, p in d["phi_vertex"].items()},
            {PauliString.parse(e["edge"]): [(int(p[0]), int(p[1])) for p in e["path"]] for e in d["phi_edge"]},
            float(d["grid_spacing"]),
        )


def _check_angles(G: InteractionGraph, min_angle: float) -> None:
    for v in G.active_vertices():
        others = sorted({e.other(v) for e in G.edges_at(v)})
        if len(others) < 2:
            continue
        p = np.asarray(G.coords[v])
        angs = sorted(math.atan2(*(np.asarray(G.coords[u]) - p)[::-1]) for u in others)
        gaps = [b - a for a, b in zip(angs, angs[1:])] + [angs[0] + 2 * math.pi - angs[-1]]
        if min(gaps) < math.radians(min_angle) - 1e-12:
            raise AuditFailed(f"edges at vertex {v} meet at {math.degrees(min(gaps)):.1f} degrees")


def _dist_to_segment(p, a, b) -> float:
    p, a, b = (np.asarray(x, float) for x in (p, a, b))
    ab = b - a
    den = float(ab @ ab)
    t = 0.0 if den == 0 else min(1.0, max(0.0, float((p - a) @ ab) / den))
    return float(np.linalg.norm(p - a - t * ab))


def _bfs(start: GridPoint, goal: GridPoint, allowed, blocked: set[GridPoint]) -> list[GridPoint] | None:
    parent: dict[GridPoint, GridPoint | None] = {start: None}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        if cur == goal:
            path = [cur]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for dx, dy in DIRECTIONS:
            nxt = (cur[0] + dx, cur[1] + dy)
            if nxt in parent or not allowed(nxt):
                continue
            if nxt in blocked and nxt != goal:
                continue
            parent[nxt] = cur
            queue.append(nxt)
    return None


def _route_once(G: InteractionGraph, edges: list[PauliEdge], h: float, cfg: RouteConfig):
    phi = {v: (int(round(G.coords[v][0] / h)), int(round(G.coords[v][1] / h))) for v in G.active_vertices()}
    if len(set(phi.values())) < len(phi):
        return None, "vertices collide on the grid"
    blocked = set(phi.values())
    owner: dict[GridPoint, PauliString] = {}
    paths: dict[PauliString, list[GridPoint]] = {}
    for e in edges:
        ga, gb = phi[e.a], phi[e.b]

        def allowed(p, ga=ga, gb=gb):
            if max(abs(p[0] - ga[0]), abs(p[1] - ga[1])) <= cfg.vertex_box:
                return True
            if max(abs(p[0] - gb[0]), abs(p[1] - gb[1])) <= cfg.vertex_box:
                return True
            return _dist_to_segment(p, ga, gb) <= cfg.corridor + 1e-12

        path = _bfs(ga, gb, allowed, blocked - {ga})
        if path is None:
            nearby = sorted({str(owner[p]) for p in owner if allowed(p)})
            return None, f"edge {e.string} blocked by {', '.join(nearby) or 'vertices'}"
        if len(path) - 1 > cfg.max_path_length:
            return None, f"edge {e.string} needs {len(path) - 1} steps"
        for p in path[1:-1]:
            blocked.add(p)
            owner[p] = e.string
        paths[e.string] = path
    return (phi, paths), ""


def snap_and_route(G: InteractionGraph, config: RouteConfig | None = None) -> LatticeEmbedding:
    """Vertex-disjoint lattice paths for a planar drawing of degree at most three.

    Vertices snap to the nearest grid point. Edges are routed in order of
    length by breadth-first search over free grid points inside a corridor
    around the segment, widened to a square box near each endpoint. On a
    collision the spacing is halved and everything is rerouted.

    Raises:
        AuditFailed: degree above three or edges meeting at too small an angle.
        RoutingFailed: no routing after ``max_refinements`` halvings.
    """
    cfg = config or RouteConfig()
    for v in G.active_vertices():
        if v not in G.coords:
            raise MissingCoordinates(f"vertex {v} has no coordinates")
        if pauli_degrees(G, v)[3] > 3:
            raise AuditFailed(f"vertex {v} has Pauli degree above three")
    _check_angles(G, cfg.min_angle_deg)
    if G.hyper_edges:
        raise AuditFailed("lattice routing expects a 2-local Hamiltonian")

    def length(e: PauliEdge) -> float:
        return float(np.hypot(*(np.asarray(G.coords[e.b]) - np.asarray(G.coords[e.a]))))

    edges = sorted(G.pauli_edges, key=lambda e: (length(e), e.a, e.b, e.string.sort_key()))
    reason = ""
    for r in range(cfg.max_refinements + 1):
        h = cfg.grid_spacing / 2**r
        res, reason = _route_once(G, edges, h, cfg)
        if res is not None:
            phi, paths = res
            return LatticeEmbedding(phi, paths, h)
    raise RoutingFailed(f"routing failed after {cfg.max_refinements} refinements: {reason}")


def match_path_lengths(H: Hamiltonian, emb: LatticeEmbedding, delta: float | Sequence[float]):
    """Stretch every Pauli edge along its lattice path with subdivision mediators.

    Each round subdivides every chain segment spanning two or more grid
    steps at its middle grid point, so an edge of path length ``L`` ends up
    with ``L - 1`` mediators after ``ceil(log2 L)`` rounds.

    Args:
        delta: one gap for every round, or a sequence with one per round.

    Returns:
        ``(H_out, plan)``; mediator positions in the plan are grid points
        scaled by the spacing.
    """
    G = build_graph(H)
    for e in G.pauli_edges:
        if e.string not in emb.phi_edge:
            raise InvalidParameter(f"edge {e.string} has no lattice path")
        path = emb.phi_edge[e.string]
        if path[0] != emb.phi_vertex[e.a] or path[-1] != emb.phi_vertex[e.b]:
            raise InvalidParameter(f"path of {e.string} does not join its endpoints")
    # chain segments: (path key, i, j, qubit at i, qubit at j, term)
    segs = [(e.string, 0, len(emb.phi_edge[e.string]) - 1, e.a, e.b, e.string) for e in G.pauli_edges]
    deltas = None if np.isscalar(delta) else list(delta)
    rounds: list[GadgetApplication] = []
    cur = H
    h = emb.grid_spacing
    while any(j - i >= 2 for _, i, j, *_ in segs):
        k = len(rounds)
        d = float(delta) if deltas is None else float(deltas[k])
        jobs, keep, split = [], [], []
        for seg in segs:
            key, i, j, qa, qb, term = seg
            if j - i < 2:
                keep.append(seg)
                continue
            mid = (i + j) // 2
            gp = emb.phi_edge[key][mid]
            cp = _subdivision_coupling(cur, term, [qa])
            cp.position = (gp[0] * h, gp[1] * h)
            jobs.append(cp)
            split.append((seg, mid))
        app = mediator_gadget(cur, jobs, d, "lattice_subdivision")
        rounds.append(app)
        cur = app.total
        for ((key, i, j, qa, qb, term), mid), m in zip(split, app.mediators):
            ta = PauliString.from_axes({qa: term.axis(qa), m: "X"})
            tb = PauliString.from_axes({m: "X", qb: term.axis(qb)})
            keep += [(key, i, mid, qa, m, ta), (key, mid, j, m, qb, tb)]
        segs = keep
    return cur, ReductionPlan(H, rounds)


def lattice_positions(emb: LatticeEmbedding, plan: ReductionPlan) -> dict[int, GridPoint]:
    """Grid point of every qubit after :func:`match_path_lengths`."""
    pos = dict(emb.phi_vertex)
    for app in plan.rounds:
        for w, p in app.positions.items():
            pos[w] = (int(round(p[0] / emb.grid_spacing)), int(round(p[1] / emb.grid_spacing)))
    return pos


def lattice_violations(H: Hamiltonian, positions: Mapping[int, GridPoint]) -> list[str]:
    """2-local terms whose qubits are not grid neighbours, and collisions."""
    out = []
    if len(set(positions.values())) < len(positions):
        out.append("two qubits share a grid point")
    for s, _ in H.items():
        if s.weight > 2:
            out.append(f"{s} is not 2-local")
        elif s.weight == 2:
            a, b = s.support
            pa, pb = positions[a], positions[b]
            if abs(pa[0] - pb[0]) + abs(pa[1] - pb[1]) != 1:
                out.append(f"{s} couples grid points {pa} and {pb}")
    return out
