"""Polynomial Hamiltonian paths ``H(s) = sum_i s**i H_i`` and their gaps.

Gadget rounds act on a path symbolically: the s-dependent coefficient of a
gadgetized term is carried entirely by one factor ``A(s) = c(s) P_a`` while
the other factors stay fixed unit Paulis, so every product of a degree-``i``
and a degree-``j`` piece lands in component ``i + j``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidParameter, InvalidTerm, OutOfRange
from .gadgets import projector_one, single
from .pauli import Hamiltonian, PauliString, anticommutator, matrix_to_hamiltonian, norm, product
from .spectral import eigensolve

__all__ = [
    "PolyPath",
    "PathJob",
    "PathRound",
    "GapScan",
    "eval_path",
    "gadgetize_path",
    "gap_scan",
    "toy_path",
    "QUDIT_ENCODING",
    "FORBIDDEN_STATES",
    "qudit_penalty",
]

Poly = list[Hamiltonian]  # component k multiplies s**k


@dataclass
class PolyPath:
    """``H(s) = sum_i s**i components[i]`` on a shared register.

    ``history`` records ``(p_in, p_out)`` for every gadget round applied.
    """

    components: list[Hamiltonian]
    history: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.components:
            raise InvalidParameter("a path needs at least one component")
        n = max(h.num_qubits for h in self.components)
        self.components = [h.with_qubits(n) for h in self.components]
        # trailing zero components do not count towards the degree
        while len(self.components) > 1 and len(self.components[-1]) == 0:
            self.components.pop()

    @property
    def num_qubits(self) -> int:
        return self.components[0].num_qubits

    @property
    def degree(self) -> int:
        return len(self.components) - 1

    @property
    def norm_ledger(self) -> list[float]:
        return [norm(h, "upper_bound") for h in self.components]

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "components": [{"degree": i, "hamiltonian": h.to_dict()} for i, h in enumerate(self.components)],
            "history": [list(r) for r in self.history],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "PolyPath":
        comps = sorted(d["components"], key=lambda c: c["degree"])
        n = int(d["num_qubits"])
        out = [Hamiltonian(n) for _ in range(comps[-1]["degree"] + 1)]
        for c in comps:
            out[c["degree"]] = Hamiltonian.from_dict(c["hamiltonian"]).with_qubits(n)
        return cls(out, [tuple(r) for r in d.get("history", [])])


def eval_path(path: PolyPath, s: float) -> Hamiltonian:
    """Canonical ``sum_i s**i H_i`` for ``s`` in ``[0, 1]``."""
    if not 0.0 <= s <= 1.0:
        raise OutOfRange(f"s = {s} outside [0, 1]")
    out = Hamiltonian(path.num_qubits)
    for i, h in enumerate(path.components):
        out = out + h.scale(s**i)
    return out


def toy_path() -> PolyPath:
    """``(1 - s)(I - X)/2 + s(I - Z)/2`` on one qubit."""
    H0 = Hamiltonian.from_labels(1, [(0.5, ""), (-0.5, "X0")])
    H1 = Hamiltonian.from_labels(1, [(0.5, "X0"), (-0.5, "Z0")])
    return PolyPath([H0, H1])


# polynomial operator arithmetic


def _padd(a: Poly, b: Poly, n: int) -> Poly:
    m = max(len(a), len(b))
    z = Hamiltonian(n)
    return [(a[i] if i < len(a) else z).with_qubits(n) + (b[i] if i < len(b) else z).with_qubits(n) for i in range(m)]


def _pscale(a: Poly, c: float) -> Poly:
    return [h.scale(c) for h in a]


def _psym(a: Poly, b: Poly, n: int) -> Poly:
    """``(A B + B A) / 2`` for polynomial ``A, B`` with Hermitian components."""
    if not a or not b:
        return []
    out = [Hamiltonian(n) for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + anticommutator(ai.with_qubits(n), bj.with_qubits(n)).scale(0.5)
    return out


def _pmul_commuting(a: Poly, b: Poly, n: int) -> Poly:
    """``A B`` for polynomial operators on disjoint qubits."""
    if not a or not b:
        return []
    out = [Hamiltonian(n) for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + product(ai.with_qubits(n), bj.with_qubits(n))
    return out


def _with_x(a: Poly, w: int, n: int) -> Poly:
    bit = 1 << w
    return [Hamiltonian(n, [(PauliString(s.x | bit, s.z), c) for s, c in h.items()]) for h in a]


def _coefficient(path: PolyPath, term: PauliString) -> list[float]:
    return [h.coeff(term) for h in path.components]


@dataclass(frozen=True)
class PathJob:
    """One gadget job: ``term`` factored with ``side_a`` carrying ``c(s)``.

    For ``"three_to_two"`` jobs ``side_a`` names one qubit and ``side_b``
    a second; the remaining qubit forms ``C``.
    """

    term: PauliString
    side_a: tuple[int, ...]
    side_b: tuple[int, ...] = ()


@dataclass(frozen=True)
class PathRound:
    kind: str
    jobs: tuple[PathJob, ...]
    delta: float


def _factors(path: PolyPath, job: PathJob, n: int):
    coeff = _coefficient(path, job.term)
    if not any(coeff):
        raise InvalidTerm(f"term {job.term} is absent from every component")
    supp = set(job.term.support)
    sa = set(job.side_a)
    if not sa or not sa < supp:
        raise InvalidTerm(f"side {sorted(sa)} is not a proper part of {sorted(supp)}")
    pa = job.term.restrict(sa)
    A = [single(n, pa, c) for c in coeff]
    return coeff, A, supp - sa


def gadgetize_path(path: PolyPath, rnd: PathRound) -> PolyPath:
    """Apply one parallel gadget round to every component of a path.

    Subdivision jobs use ``A(s) = c(s) P_a`` and ``B = P_b``; the mediator
    couples to ``B - A(s)`` and ``H_else`` gains ``(c(s)**2 + 1)/2``.
    Three-to-two jobs use ``A(s) = c(s) P_1``, ``B = P_2``, ``C = P_3``.
    The output degree is at most twice the input degree.
    """
    if rnd.delta <= 0:
        raise InvalidParameter("delta must be positive")
    if rnd.kind not in ("subdivision", "three_to_two"):
        raise InvalidParameter(f"unknown path gadget {rnd.kind!r}")
    terms = [j.term.unphased() for j in rnd.jobs]
    if len(set(terms)) != len(terms):
        raise InvalidParameter("jobs must act on distinct terms")
    n0 = path.num_qubits
    n = n0 + len(rnd.jobs)
    delta = rnd.delta
    out: Poly = [h.with_qubits(n).without(terms) for h in path.components]
    for k, job in enumerate(rnd.jobs):
        w = n0 + k
        coeff, A, rest = _factors(path, job, n)
        if rnd.kind == "subdivision":
            B = [single(n, job.term.restrict(rest))]
            O = _padd(B, _pscale(A, -1.0), n)
            # H_else = H - c P + O**2 / 2 with the cross term cancelling c P
            out = _padd(out, _pscale(_padd(_psym(A, A, n), _psym(B, B, n), n), 0.5), n)
            out = _padd(out, [projector_one(w, n, delta)], n)
            out = _padd(out, _pscale(_with_x(O, w, n), math.sqrt(delta / 2)), n)
        else:
            if len(job.side_a) != 1 or len(job.side_b) != 1 or job.term.weight != 3:
                raise InvalidTerm("three_to_two jobs factor a weight-3 term into single qubits")
            qc = list(rest - set(job.side_b))
            B = [single(n, job.term.restrict(job.side_b))]
            C = [single(n, job.term.restrict(qc))]
            AB = _padd(B, _pscale(A, -1.0), n)
            d13, d23 = delta ** (1 / 3), delta ** (2 / 3)
            sq = _pscale(_psym(AB, AB, n), 0.5 * d13)
            aabb = _padd(_psym(A, A, n), _psym(B, B, n), n)
            v_extra = _padd(sq, _pscale(_pmul_commuting(aabb, C, n), 0.5), n)
            out = _padd(out, v_extra, n)
            out = _padd(out, _pscale(_pmul_commuting(C, [projector_one(w, n)], n), -d23), n)
            out = _padd(out, _pscale(_with_x(AB, w, n), d23 / math.sqrt(2)), n)
            out = _padd(out, [projector_one(w, n, delta)], n)
    res = PolyPath(out, list(path.history))
    res.history.append((path.degree, res.degree))
    return res


# gap sweeps


@dataclass
class GapScan:
    s: np.ndarray
    e0: np.ndarray
    e1: np.ndarray
    gap: np.ndarray
    degenerate: np.ndarray
    min_gap: float
    argmin: float
    lipschitz_violations: list[int]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["s", "lambda0", "lambda1", "gap"])
        for row in zip(self.s, self.e0, self.e1, self.gap):
            wr.writerow([repr(float(x)) for x in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "min_gap": self.min_gap,
            "argmin": self.argmin,
            "points": len(self.s),
            "degenerate_points": int(self.degenerate.sum()),
            "lipschitz_violations": list(self.lipschitz_violations),
        }


def _levels(path: PolyPath, s: float, dense_cap: int) -> tuple[float, float]:
    vals = eigensolve(eval_path(path, s), 2, dense_cap=dense_cap)
    return float(vals[0]), float(vals[1])


def gap_scan(path: PolyPath, grid: Sequence[float] | None = None, tol: float = 1e-9, refine: bool = True,
             min_step: float = 1e-4, dense_cap: int = 12) -> GapScan:
    """Gap ``lambda_1 - lambda_0`` of ``H(s)`` over a grid of ``s`` values.

    The grid defaults to 101 uniform points. With ``refine`` a golden-section
    search around the smallest sampled gap narrows the minimum down to
    ``min_step``. Gaps below ``tol`` are reported as 0 and flagged
    degenerate.
    """
    if path.num_qubits < 1:
        raise DimensionMismatch("gap needs at least two levels")
    s = np.linspace(0.0, 1.0, 101) if grid is None else np.asarray(sorted(grid), float)
    if s.size == 0 or s[0] < 0 or s[-1] > 1:
        raise OutOfRange("grid must lie inside [0, 1]")
    levels = [_levels(path, float(x), dense_cap) for x in s]
    e0 = np.array([a for a, _ in levels])
    e1 = np.array([b for _, b in levels])
    gap = e1 - e0

    def g(x: float) -> float:
        a, b = _levels(path, x, dense_cap)
        return b - a

    i = int(np.argmin(gap))
    best_s, best = float(s[i]), float(gap[i])
    if refine and s.size > 2:
        lo, hi = float(s[max(i - 1, 0)]), float(s[min(i + 1, s.size - 1)])
        phi = (math.sqrt(5) - 1) / 2
        x1, x2 = hi - phi * (hi - lo), lo + phi * (hi - lo)
        f1, f2 = g(x1), g(x2)
        while hi - lo > min_step:
            if f1 < f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - phi * (hi - lo)
                f1 = g(x1)
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + phi * (hi - lo)
                f2 = g(x2)
        for x, f in ((x1, f1), (x2, f2)):
            if f < best:
                best_s, best = x, f
    degenerate = gap < tol
    gap = np.where(degenerate, 0.0, gap)
    if best < tol:
        best = 0.0
    # |d gap / ds| <= 2 sum_i i ||H_i||, bounded coarsely by the full ledger
    lip = 2 * sum(path.norm_ledger) if path.degree else 0.0
    viol = [k for k in range(1, s.size) if abs(gap[k] - gap[k - 1]) > lip * (s[k] - s[k - 1]) + 1e-12]
    return GapScan(s, e0, e1, gap, degenerate, best, best_s, viol)


# three-qubit encoding of six-level particles

QUDIT_ENCODING: dict[str, tuple[int, int, int]] = {
    "unborn": (0, 0, 0),
    "first_0": (0, 1, 0),
    "first_1": (0, 1, 1),
    "second_0": (1, 0, 0),
    "second_1": (1, 0, 1),
    "dead": (1, 1, 0),
}
"""Basis states as bits ``(b0, b1, b2)``: two phase bits and one data bit."""

FORBIDDEN_STATES: tuple[tuple[int, int, int], ...] = ((0, 0, 1), (1, 1, 1))


def qudit_penalty(qubits: Sequence[int], num_qubits: int, weight: float = 1.0) -> Hamiltonian:
    """``weight`` times the projector onto the two unused three-qubit states.

    ``qubits[j]`` holds bit ``b_j`` of the encoding.
    """
    if len(qubits) != 3 or len(set(qubits)) != 3:
        raise InvalidParameter("a particle occupies three distinct qubits")
    M = np.zeros((8, 8))
    for b in FORBIDDEN_STATES:
        idx = sum(bit << j for j, bit in enumerate(b))
        M[idx, idx] = weight
    return matrix_to_hamiltonian(M, list(qubits), num_qubits)
