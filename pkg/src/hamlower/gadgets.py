"""Mediator-qubit perturbation gadgets as Hamiltonian rewrites.

Every second-order gadget has the same shape. A list of couplings ``O_i``
is chosen so that the target equals ``H_else - sum_i O_i**2 / 2``; one
mediator ``w_i`` is allocated per coupling and

    H0 = delta * sum_i |1><1|_{w_i},
    V  = H_else + sqrt(delta / 2) * sum_i O_i (x) X_{w_i}.

The third-order 3-to-2 gadget adds a ``C (x) |1><1|_w`` term and a
compensating ``V_extra``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    InvalidParameter,
    InvalidTerm,
    MismatchedAxis,
    NotCrossing,
    NotFactorable,
    OverlappingJobs,
    PlanInfeasible,
    SharedSupport,
)
from .pauli import Hamiltonian, PauliString, anticommutator, norm, product, square_half_difference

__all__ = [
    "Coupling",
    "GadgetApplication",
    "ReductionPlan",
    "choose_delta",
    "implied_epsilon",
    "minimal_delta",
    "mediator_gadget",
    "subdivide",
    "subdivide_parallel",
    "three_to_two",
    "three_to_two_parallel",
    "cross_gadget",
    "cross_coupling",
    "fork_coupling",
    "fork_gadget",
    "triangle_gadget",
    "reduce_k_to_2",
    "projector_one",
    "with_x",
    "term_factors",
    "three_local_factors",
    "balanced_split",
]

SQRT2 = math.sqrt(2.0)

Point = tuple[float, float]


def choose_delta(norm_h_else_prime: float, r: float, epsilon: float, c2: float = SQRT2) -> float:
    """Gap ``(||H_else'|| + c2 r)**6 / epsilon**2`` that makes a subdivision ``epsilon``-accurate."""
    if epsilon <= 0 or r <= 0 or c2 < SQRT2 - 1e-15 or norm_h_else_prime < 0:
        raise InvalidParameter("need epsilon > 0, r > 0, c2 >= sqrt(2), norm >= 0")
    return (norm_h_else_prime + c2 * r) ** 6 / epsilon**2


def implied_epsilon(norm_h_else_prime: float, r: float, delta: float, c2: float = SQRT2) -> float:
    """Inverse of :func:`choose_delta`: the accuracy a given gap buys."""
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    return (norm_h_else_prime + c2 * r) ** 3 / math.sqrt(delta)


def minimal_delta(norm_h_else: float, coupling_norm: float) -> float:
    """Smallest gap with ``norm_h_else + sqrt(delta / 2) * coupling_norm <= delta / 2``."""
    u = (coupling_norm + math.sqrt(coupling_norm**2 + 4 * norm_h_else)) / 2
    return 2 * u * u


def single(num_qubits: int, s: PauliString, c: float = 1.0) -> Hamiltonian:
    return Hamiltonian(num_qubits, [(s, c)])


def with_x(O: Hamiltonian, w: int, num_qubits: int) -> Hamiltonian:
    """``O (x) X_w`` for a mediator ``w`` outside the support of ``O``."""
    bit = 1 << w
    return Hamiltonian(num_qubits, [(PauliString(s.x | bit, s.z), c) for s, c in O.items()])


def projector_one(w: int, num_qubits: int, scale: float = 1.0) -> Hamiltonian:
    """``scale * |1><1|_w = scale * (I - Z_w) / 2``."""
    return Hamiltonian(num_qubits, [(PauliString(), scale / 2), (PauliString(0, 1 << w), -scale / 2)])


def projector_zero(w: int, num_qubits: int) -> Hamiltonian:
    return Hamiltonian(num_qubits, [(PauliString(), 0.5), (PauliString(0, 1 << w), 0.5)])


def term_factors(c: float, s: PauliString, side_a: Iterable[int], num_qubits: int):
    """Split ``c * s`` as ``A (x) B`` with ``||A|| = ||B|| = sqrt|c|``."""
    side_a = set(side_a)
    supp = set(s.support)
    if not side_a or not side_a < supp:
        raise NotFactorable(f"split {sorted(side_a)} is not a proper nonempty part of {sorted(supp)}")
    pa = s.restrict(side_a)
    pb = s.restrict(supp - side_a)
    root = math.sqrt(abs(c))
    return single(num_qubits, pa, root), single(num_qubits, pb, math.copysign(root, c))


@dataclass
class Coupling:
    """One mediator job: coupling operator and the target terms it replaces."""

    kind: str
    operator: Hamiltonian
    removed: tuple[PauliString, ...]
    mediator: int = -1
    position: Point | None = None
    meta: dict = field(default_factory=dict)


@dataclass
class GadgetApplication:
    """An ``H0 + V`` decomposition emitted by one gadget round.

    Attributes:
        kind: gadget name.
        mediators: freshly allocated mediator qubit ids.
        delta: gap of the unperturbed part.
        unperturbed: ``delta * sum |1><1|`` on the mediators.
        perturbation: ``V``.
        compensation: terms added to cancel unwanted products.
        target: Hamiltonian reproduced on the mediator-free low space.
        jobs: per-mediator couplings.
        positions: plane coordinates of mediators when the input had a drawing.
    """

    kind: str
    mediators: list[int]
    delta: float
    unperturbed: Hamiltonian
    perturbation: Hamiltonian
    compensation: Hamiltonian
    target: Hamiltonian
    jobs: list[Coupling] = field(default_factory=list)
    positions: dict[int, Point] = field(default_factory=dict)
    epsilon_target: float | None = None
    warnings: list[str] = field(default_factory=list)
    h_else: Hamiltonian | None = None

    @property
    def num_qubits(self) -> int:
        return self.perturbation.num_qubits

    @property
    def total(self) -> Hamiltonian:
        n = self.num_qubits
        return self.unperturbed.with_qubits(n) + self.perturbation

    @property
    def lambda_star(self) -> float:
        return self.delta / 2

    @property
    def norm_v_upper(self) -> float:
        return norm(self.perturbation, "upper_bound")

    @property
    def norm_condition(self) -> bool:
        """``||V|| <= delta / 2`` using the coefficient 1-norm."""
        return self.norm_v_upper <= self.delta / 2

    def split(self, dense_cap: int = 12):
        from .spectral import PerturbedSplit

        return PerturbedSplit(self.unperturbed.with_qubits(self.num_qubits), self.perturbation, self.lambda_star, dense_cap)

    def effective(self) -> Hamiltonian:
        """``target (x) |0...0><0...0|`` on the mediators."""
        n = self.num_qubits
        out = self.target.with_qubits(n)
        for w in self.mediators:
            out = product(out, projector_zero(w, n))
        return out

    def summary(self) -> dict:
        return {
            "kind": self.kind,
            "mediators": list(self.mediators),
            "delta": self.delta,
            "norm_v_upper": self.norm_v_upper,
            "norm_condition": self.norm_condition,
            "jobs": [
                {"kind": j.kind, "mediator": j.mediator, "removed": [str(s) for s in j.removed]} for j in self.jobs
            ],
            "compensation": self.compensation.to_dict(),
            "warnings": list(self.warnings),
        }


def _next_id(H: Hamiltonian, reserved: Iterable[int] = ()) -> int:
    return max([H.num_qubits - 1, *reserved], default=-1) + 1


def mediator_gadget(
    H_target: Hamiltonian,
    couplings: Sequence[Coupling],
    delta: float,
    kind: str,
    coords: Mapping[int, Point] | None = None,
    epsilon_target: float | None = None,
) -> GadgetApplication:
    """Shared second-order core used by subdivision, cross and fork."""
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    seen: set[PauliString] = set()
    for cp in couplings:
        for s in cp.removed:
            if s in seen:
                raise OverlappingJobs(f"term {s} appears in two jobs")
            if H_target.coeff(s) == 0.0:
                raise InvalidTerm(f"term {s} not present in the Hamiltonian")
            seen.add(s)
    n0 = H_target.num_qubits
    n = n0 + len(couplings)
    notes: list[str] = []
    squares = Hamiltonian(n)
    for cp in couplings:
        squares = squares + square_half_difference(Hamiltonian(n), cp.operator.with_qubits(n))
    # H_else = H_target + sum O^2/2; removed terms cancel symbolically
    H_else_full = H_target.with_qubits(n) + squares
    scale = max(1.0, norm(H_target, "upper_bound"))
    for s in seen:
        if abs(H_else_full.coeff(s)) > 1e-9 * scale:
            raise InvalidTerm(f"coupling does not regenerate term {s}")
    H_else = H_else_full.without(seen)
    compensation = (H_else - H_target.with_qubits(n).without(seen))
    H0 = Hamiltonian(n)
    V = H_else
    root = math.sqrt(delta / 2)
    jobs = []
    positions = {}
    for i, cp in enumerate(couplings):
        w = n0 + i
        if len(cp.operator) == 0:
            notes.append(f"{cp.kind} job {i} has a vanishing coupling; passes through")
            warnings.warn(notes[-1], RuntimeWarning, stacklevel=3)
        H0 = H0 + projector_one(w, n, delta)
        V = V + with_x(cp.operator.with_qubits(n), w, n).scale(root)
        pos = cp.position
        if pos is None and coords is not None:
            pts = [coords[q] for q in cp.operator.support() if q in coords]
            if pts:
                pos = (float(np.mean([p[0] for p in pts])), float(np.mean([p[1] for p in pts])))
        if pos is not None:
            positions[w] = pos
        jobs.append(Coupling(cp.kind, cp.operator, cp.removed, w, pos, dict(cp.meta)))
    return GadgetApplication(kind, list(range(n0, n)), delta, H0, V, compensation, H_target, jobs, positions,
                             epsilon_target, notes, H_else)


def _subdivision_coupling(H: Hamiltonian, term: PauliString, side_a: Iterable[int], coords=None) -> Coupling:
    c = H.coeff(term)
    if c == 0.0:
        raise InvalidTerm(f"term {term} not present")
    A, B = term_factors(c, term, side_a, H.num_qubits)
    pos = None
    if coords is not None:
        ca = [coords[q] for q in A.support() if q in coords]
        cb = [coords[q] for q in B.support() if q in coords]
        if ca and cb:
            pa = np.mean(ca, axis=0)
            pb = np.mean(cb, axis=0)
            pos = (float((pa[0] + pb[0]) / 2), float((pa[1] + pb[1]) / 2))
    return Coupling("subdivision", B - A, (term.unphased(),), position=pos,
                    meta={"A": A.to_dict(), "B": B.to_dict(), "side_a": sorted(set(side_a))})


def subdivide(H_target: Hamiltonian, term: PauliString, split: Iterable[int], delta: float,
              coords=None) -> GadgetApplication:
    """Replace ``c * A (x) B`` by a mediator coupled to ``-A + B``.

    ``split`` lists the qubits of the ``A`` side.
    """
    return mediator_gadget(H_target, [_subdivision_coupling(H_target, term, split, coords)], delta,
                           "subdivision", coords)


def subdivide_parallel(H_target: Hamiltonian, jobs: Sequence[tuple[PauliString, Iterable[int]]], delta: float,
                       coords=None) -> GadgetApplication:
    """One mediator per job, all sharing a single gap."""
    terms = [t.unphased() for t, _ in jobs]
    if len(set(terms)) != len(terms):
        raise OverlappingJobs("parallel subdivision jobs must act on distinct terms")
    cps = [_subdivision_coupling(H_target, t, sp, coords) for t, sp in jobs]
    return mediator_gadget(H_target, cps, delta, "parallel_subdivision", coords)


def _pauli_edge(H: Hamiltonian, term: PauliString):
    c = H.coeff(term)
    if c == 0.0 or term.weight != 2:
        raise InvalidTerm(f"{term} is not a 2-local term of the Hamiltonian")
    return c, term.support


def _single_axis(n: int, q: int, axis: str, c: float = 1.0) -> Hamiltonian:
    return single(n, PauliString.from_axes({q: axis}), c)


def cross_coupling(H: Hamiltonian, term_ad: PauliString, term_bc: PauliString, coords=None,
                   balanced: bool = False) -> Coupling:
    """Coupling ``-a_ad P_a - a_bc P_b + P_c + P_d`` for two crossing edges.

    With ``balanced`` the weights become ``sqrt|a|`` on both ends of each
    edge, which leaves the generated ``ad`` and ``bc`` terms unchanged and
    keeps ``||O||`` small when the coefficients are large.
    """
    n = H.num_qubits
    a_ad, (a, d) = _pauli_edge(H, term_ad)
    a_bc, (b, c) = _pauli_edge(H, term_bc)
    if len({a, b, c, d}) != 4:
        raise NotCrossing("crossing edges must have four distinct endpoints")
    pos = None
    if coords is not None:
        from .graph import segment_intersection

        pt = segment_intersection(coords[a], coords[d], coords[b], coords[c])
        if pt is None:
            raise NotCrossing(f"edges {a}-{d} and {b}-{c} do not cross in the drawing")
        pos = (float(pt[0]), float(pt[1]))
    wa, wb, wc, wd = -a_ad, -a_bc, 1.0, 1.0
    if balanced:
        r_ad, r_bc = math.sqrt(abs(a_ad)), math.sqrt(abs(a_bc))
        wa, wd = -math.copysign(r_ad, a_ad), r_ad
        wb, wc = -math.copysign(r_bc, a_bc), r_bc
    O = (
        _single_axis(n, a, term_ad.axis(a), wa)
        + _single_axis(n, b, term_bc.axis(b), wb)
        + _single_axis(n, c, term_bc.axis(c), wc)
        + _single_axis(n, d, term_ad.axis(d), wd)
    )
    return Coupling("cross", O, (term_ad.unphased(), term_bc.unphased()), position=pos,
                    meta={"a": a, "b": b, "c": c, "d": d, "balanced": balanced})


def cross_gadget(H: Hamiltonian, crossing: tuple[PauliString, PauliString], delta: float,
                 coords=None) -> GadgetApplication:
    """Remove a crossing between edges ``ad`` and ``bc`` with a mediator at the crossing point."""
    return mediator_gadget(H, [cross_coupling(H, *crossing, coords=coords)], delta, "cross", coords)


def fork_coupling(H: Hamiltonian, a: int, term_ab: PauliString, term_ac: PauliString, coords=None,
                  balanced: bool = False) -> Coupling:
    """Coupling ``P_a - a_ab P_b - a_ac P_c`` merging two same-axis edges at ``a``.

    With ``balanced`` the operator is rescaled to ``s P_a - (a_ab/s) P_b -
    (a_ac/s) P_c`` with ``s = sqrt(max|a|)``; the ``ab`` and ``ac`` terms it
    generates are unchanged.
    """
    n = H.num_qubits
    a_ab, sab = _pauli_edge(H, term_ab)
    a_ac, sac = _pauli_edge(H, term_ac)
    if a not in sab or a not in sac:
        raise InvalidTerm(f"edges {sab} and {sac} do not share vertex {a}")
    b = sab[0] if sab[1] == a else sab[1]
    c = sac[0] if sac[1] == a else sac[1]
    if b == c:
        raise InvalidTerm("fork edges must lead to distinct neighbours")
    pa = term_ab.axis(a)
    if term_ac.axis(a) != pa:
        raise MismatchedAxis(f"axes {pa} and {term_ac.axis(a)} differ at vertex {a}")
    sc = math.sqrt(max(abs(a_ab), abs(a_ac))) if balanced else 1.0
    O = (_single_axis(n, a, pa, sc) + _single_axis(n, b, term_ab.axis(b), -a_ab / sc)
         + _single_axis(n, c, term_ac.axis(c), -a_ac / sc))
    pos = None
    if coords is not None and all(q in coords for q in (a, b, c)):
        # place the fork mediator a third of the way from a towards the midpoint of b and c
        pa_, pb_, pc_ = (np.asarray(coords[q], float) for q in (a, b, c))
        m = (pb_ + pc_) / 2
        p = pa_ + (m - pa_) / 3
        pos = (float(p[0]), float(p[1]))
    return Coupling("fork", O, (term_ab.unphased(), term_ac.unphased()), position=pos,
                    meta={"a": a, "b": b, "c": c, "axis": pa, "balanced": balanced})


def fork_gadget(H: Hamiltonian, a: int, term_ab: PauliString, term_ac: PauliString, delta: float,
                coords=None) -> GadgetApplication:
    """Merge two edges carrying the same Pauli at ``a``; creates an edge ``bc``."""
    return mediator_gadget(H, [fork_coupling(H, a, term_ab, term_ac, coords)], delta, "fork", coords)


# third-order gadget

def _three_to_two_parts(A: Hamiltonian, B: Hamiltonian, C: Hamiltonian, delta: float, w: int, n: int):
    A, B, C = (h.with_qubits(n) for h in (A, B, C))
    d13, d23 = delta ** (1 / 3), delta ** (2 / 3)
    AB = B - A
    V_extra = square_half_difference(A, B).scale(d13) + product(product(A, A) + product(B, B), C).scale(0.5)
    diag = product(C, projector_one(w, n)).scale(-d23)
    flip = with_x(AB, w, n).scale(d23 / SQRT2)
    return V_extra, diag + flip, product(product(A, B), C)


def three_to_two_parallel(H_else: Hamiltonian, triples: Sequence[tuple[Hamiltonian, Hamiltonian, Hamiltonian]],
                          delta: float, removed: Sequence[Sequence[PauliString]] | None = None,
                          coords=None) -> GadgetApplication:
    """Third-order gadgets generating ``A (x) B (x) C`` for each triple, one mediator each."""
    if delta <= 0:
        raise InvalidParameter("delta must be positive")
    n0 = max([H_else.num_qubits] + [h.num_qubits for t in triples for h in t])
    n = n0 + len(triples)
    notes = []
    V = H_else.with_qubits(n)
    comp = Hamiltonian(n)
    H0 = Hamiltonian(n)
    target = H_else.with_qubits(n0)
    jobs, positions = [], {}
    for i, (A, B, C) in enumerate(triples):
        w = n0 + i
        degenerate = len(B - A) == 0
        if degenerate:
            notes.append(f"3-to-2 job {i}: -A+B vanishes; mediator coupling is absent")
        elif len(C) == 0:
            notes.append(f"3-to-2 job {i}: C vanishes; gadget acts at second order only")
        else:
            sa, sb, sc = (set(h.support()) for h in (A, B, C))
            if sa & sb or sa & sc or sb & sc:
                raise SharedSupport("A, B and C must act on distinct qubits")
        if notes and notes[-1].startswith(f"3-to-2 job {i}"):
            warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
        V_extra, coupling, abc = _three_to_two_parts(A, B, C, delta, w, n)
        V = V + V_extra + coupling
        comp = comp + V_extra
        H0 = H0 + projector_one(w, n, delta)
        target = target + abc.with_qubits(n0)
        pos = None
        if coords is not None:
            pts = [coords[q] for h in (A, B, C) for q in h.support() if q in coords]
            if pts:
                pos = (float(np.mean([p[0] for p in pts])), float(np.mean([p[1] for p in pts])))
                positions[w] = pos
        rem = tuple(removed[i]) if removed is not None else ()
        jobs.append(Coupling("three_to_two", B - A, rem, w, pos, {"A": A.to_dict(), "B": B.to_dict(), "C": C.to_dict()}))
    h_else = H_else.with_qubits(n) + comp
    return GadgetApplication("three_to_two", list(range(n0, n)), delta, H0, V, comp, target, jobs, positions, None,
                             notes, h_else)


def three_to_two(H_else: Hamiltonian, A: Hamiltonian, B: Hamiltonian, C: Hamiltonian, delta: float,
                 coords=None) -> GadgetApplication:
    """Generate ``H_else + A (x) B (x) C`` with 2-local couplings to one mediator."""
    return three_to_two_parallel(H_else, [(A, B, C)], delta, coords=coords)


def three_local_factors(c: float, s: PauliString, n: int):
    """Factor ``c * P1 P2 P3`` as single-qubit ``A, B, C`` with equal norms ``|c|**(1/3)``."""
    q1, q2, q3 = s.support
    root = abs(c) ** (1 / 3)
    A = single(n, s.restrict([q1]), math.copysign(root, c))
    B = single(n, s.restrict([q2]), root)
    C = single(n, s.restrict([q3]), root)
    return A, B, C


# composite plans

@dataclass
class ReductionPlan:
    """Serial rounds of gadget applications.

    ``rounds[k].target`` is the output of round ``k - 1`` (or the input).
    """

    input: Hamiltonian
    rounds: list[GadgetApplication] = field(default_factory=list)

    @property
    def output(self) -> Hamiltonian:
        return self.rounds[-1].total if self.rounds else self.input

    def ledger(self) -> list[dict]:
        rows = []
        for k, app in enumerate(self.rounds):
            nv = app.norm_v_upper
            rows.append({
                "round": k,
                "kind": app.kind,
                "delta": app.delta,
                "mediators": len(app.mediators),
                "norm_v_upper": nv,
                "norm_condition": app.norm_condition,
                "epsilon_estimate": nv**3 / app.delta**2,
                "num_qubits": app.num_qubits,
                "locality": app.total.locality(),
            })
        return rows

    def to_dict(self) -> dict:
        return {"input": self.input.to_dict(), "rounds": [a.summary() for a in self.rounds], "ledger": self.ledger()}

    def extend(self, other: "ReductionPlan") -> "ReductionPlan":
        return ReductionPlan(self.input, self.rounds + other.rounds)


def triangle_gadget(H: Hamiltonian, a: int, term_ab: PauliString, term_ac: PauliString,
                    deltas: tuple[float, float], coords=None) -> ReductionPlan:
    """Subdivide ``ab`` and ``ac``, then fork the two stubs at ``a``."""
    _, sab = _pauli_edge(H, term_ab)
    _, sac = _pauli_edge(H, term_ac)
    if term_ab.axis(a) != term_ac.axis(a):
        raise MismatchedAxis("triangle edges must share the axis at a")
    r1 = subdivide_parallel(H, [(term_ab, [a]), (term_ac, [a])], deltas[0], coords)
    H1 = r1.total
    w1, w2 = r1.mediators
    coords1 = None if coords is None else {**coords, **r1.positions}
    stub1 = PauliString.from_axes({a: term_ab.axis(a), w1: "X"})
    stub2 = PauliString.from_axes({a: term_ac.axis(a), w2: "X"})
    r2 = fork_gadget(H1, a, stub1, stub2, deltas[1], coords1)
    return ReductionPlan(H, [r1, r2])


def balanced_split(s: PauliString) -> list[int]:
    """Lower half of the support (rounded up); the ``A`` side of a subdivision."""
    supp = list(s.support)
    return supp[: (len(supp) + 1) // 2]


def reduce_k_to_2(
    H: Hamiltonian,
    deltas: Sequence[float] | None = None,
    epsilon: float | None = None,
    c2: float = SQRT2,
    coords=None,
) -> ReductionPlan:
    """Parallel subdivision rounds down to 3-local terms, then one parallel 3-to-2 round.

    Args:
        H: input Hamiltonian.
        deltas: gap per round. When absent the gap comes from
            :func:`choose_delta` with ``epsilon`` and ``c2``.
    """
    plan = ReductionPlan(H)
    cur = H
    cur_coords = dict(coords) if coords is not None else None
    k = 0

    def gap(app_else: Hamiltonian, r: float) -> float:
        if deltas is not None:
            if k >= len(deltas):
                raise PlanInfeasible(f"no gap supplied for round {k}")
            return float(deltas[k])
        if epsilon is None:
            raise PlanInfeasible("need either deltas or epsilon")
        return choose_delta(norm(app_else, "upper_bound"), max(r, 1e-300), epsilon, c2)

    while cur.locality() > 3:
        big = [(s, c) for s, c in cur.items() if s.weight > 3]
        jobs = [(s, balanced_split(s)) for s, _ in big]
        r = max(math.sqrt(abs(c)) for _, c in big)
        rest = cur.without([s for s, _ in big])
        d = gap(rest + Hamiltonian(cur.num_qubits, [(PauliString(), sum(abs(c) for _, c in big))]), r)
        app = subdivide_parallel(cur, jobs, d, cur_coords)
        plan.rounds.append(app)
        cur = app.total
        if cur_coords is not None:
            cur_coords.update(app.positions)
        k += 1
        if k > 16:
            raise PlanInfeasible("subdivision did not converge")
    three = [(s, c) for s, c in cur.items() if s.weight == 3]
    if three:
        n = cur.num_qubits
        triples = [three_local_factors(c, s, n) for s, c in three]
        rest = cur.without([s for s, _ in three])
        r = max(abs(c) ** (1 / 3) for _, c in three)
        d = gap(rest, r)
        app = three_to_two_parallel(rest, triples, d, removed=[(s,) for s, _ in three], coords=cur_coords)
        plan.rounds.append(app)
    return plan
