"""Clock Hamiltonians for circuits laid out on a snaking grid.

Computational qubit ``(r, j)`` (row ``r``, column ``j``) has id ``r * N + j``
and sits at ``(j, 2r)``. Clock qubit ``c_t`` has id ``M + t - 1`` and sits on
the cursor path next to the operation it times. Gate rounds sweep rows left
to right; swap rounds move row ``r`` into row ``r + 1`` right to left.

Local gate matrices are little-endian in their qubit list: bit ``k`` of a
row index is ``gate_qubits[k]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse.linalg

from .errors import DenseDimensionExceeded, MalformedCircuit
from .pauli import DEFAULT_DENSE_CAP, Hamiltonian, matrix_to_hamiltonian, restricted_matrix, to_sparse
from .spectral import eigensolve

__all__ = [
    "Gate",
    "CircuitIR",
    "Step",
    "ClockLayout",
    "ClockHamiltonian",
    "layout_and_schedule",
    "build_h5",
    "legal_basis",
    "history_state",
    "history_state_legal",
    "lemma1_check",
    "SWAP",
]

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """A unitary on one or two columns of the active row."""

    qubits: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        k = len(self.qubits)
        if k not in (1, 2) or len(set(self.qubits)) != k:
            raise MalformedCircuit(f"gate must act on 1 or 2 distinct columns, got {self.qubits}")
        if m.shape != (1 << k, 1 << k):
            raise MalformedCircuit(f"gate matrix shape {m.shape} does not fit {k} qubits")
        if not np.allclose(m.conj().T @ m, np.eye(1 << k), atol=1e-10):
            raise MalformedCircuit("gate matrix is not unitary")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))

    @property
    def trivial(self) -> bool:
        return np.allclose(self.matrix, np.eye(self.matrix.shape[0]), atol=1e-12)


@dataclass
class CircuitIR:
    """Circuit with ``N`` columns and one (possibly trivial) gate per round."""

    n_inputs: int
    N: int
    rounds: list[Gate | None]

    def __post_init__(self):
        if self.N < 1 or not self.rounds:
            raise MalformedCircuit("need N >= 1 and at least one round")
        if not 0 <= self.n_inputs <= self.N:
            raise MalformedCircuit("inputs must fit in the first row")
        for g in self.rounds:
            if g is not None and any(not 0 <= q < self.N for q in g.qubits):
                raise MalformedCircuit(f"gate columns {g.qubits} outside 0..{self.N - 1}")

    @property
    def R(self) -> int:
        return len(self.rounds)

    @classmethod
    def from_round_lists(cls, n_inputs: int, N: int, rounds: Sequence[Sequence[Gate]]) -> "CircuitIR":
        """Build from per-round gate lists, rejecting rounds with several non-trivial gates."""
        out = []
        for k, gs in enumerate(rounds):
            real = [g for g in gs if not g.trivial]
            if len(real) > 1:
                raise MalformedCircuit(f"round {k} has {len(real)} non-trivial gates")
            out.append(real[0] if real else None)
        return cls(n_inputs, N, out)

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitIR":
        rounds = []
        try:
            for rd in d["rounds"]:
                # a round is a gate dict, a {"gates": [...]} dict or a bare gate list
                if isinstance(rd, list):
                    gates = rd
                else:
                    gates = rd.get("gates", [rd] if "gate_qubits" in rd else [])
                gl = []
                for g in gates:
                    re = np.asarray(g["matrix_re"], float)
                    m = re + 1j * np.asarray(g.get("matrix_im", np.zeros_like(re)), float)
                    gl.append(Gate(tuple(g["gate_qubits"]), m))
                rounds.append(gl)
            n_inputs, N = int(d["n_inputs"]), int(d["N"])
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise MalformedCircuit(f"bad circuit record: {exc!r}") from exc
        return cls.from_round_lists(n_inputs, N, rounds)

    @classmethod
    def from_json(cls, text: str) -> "CircuitIR":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        rounds = []
        for g in self.rounds:
            if g is None:
                rounds.append({"gates": []})
            else:
                rounds.append({"gate_qubits": list(g.qubits), "matrix_re": g.matrix.real.tolist(),
                               "matrix_im": g.matrix.imag.tolist()})
        return {"n_inputs": self.n_inputs, "N": self.N, "rounds": rounds}


@dataclass(frozen=True)
class Step:
    """Operation ``U_t``: a unitary on computational qubits (possibly none)."""

    t: int
    kind: str  # "gate", "identity", "idle" (clock only) or "swap"
    qubits: tuple[int, ...]
    matrix: np.ndarray
    position: tuple[float, float]


@dataclass
class ClockLayout:
    circuit: CircuitIR
    M: int
    T: int
    steps: list[Step]
    coords: dict[int, tuple[float, float]]
    t_q: dict[int, int]
    q_out: int
    q_in: tuple[int, ...]

    @property
    def num_qubits(self) -> int:
        return self.M + self.T

    def clock(self, t: int) -> int:
        """Qubit id of ``c_t`` (``1 <= t <= T``)."""
        return self.M + t - 1

    def ops_per_qubit(self) -> dict[int, int]:
        cnt = {q: 0 for q in range(self.M)}
        for s in self.steps:
            for q in s.qubits:
                cnt[q] += 1
        return cnt

    def sidecar(self) -> dict:
        return {
            "M": self.M,
            "T": self.T,
            "q_out": self.q_out,
            "q_in": list(self.q_in),
            "t_q": {str(q): t for q, t in sorted(self.t_q.items())},
            "coords": {str(q): list(p) for q, p in sorted(self.coords.items())},
            "schedule": [{"t": s.t, "kind": s.kind, "qubits": list(s.qubits)} for s in self.steps],
        }


def layout_and_schedule(c: CircuitIR) -> ClockLayout:
    """Grid layout, snake schedule and first-action times ``t_q``."""
    N, R = c.N, c.R
    M, T = R * N, (2 * R - 1) * N
    coords = {r * N + j: (float(j), float(2 * r)) for r in range(R) for j in range(N)}
    steps: list[Step] = []
    eye2 = np.eye(2, dtype=complex)
    for r in range(R):
        g = c.rounds[r]
        lead = min(g.qubits) if g is not None else None
        for j in range(N):
            pos = (float(j), 2 * r + 0.5)
            t = len(steps) + 1
            if g is not None and j == lead:
                qs = tuple(r * N + q for q in g.qubits)
                steps.append(Step(t, "gate", qs, g.matrix, pos))
            elif g is not None and j in g.qubits:
                steps.append(Step(t, "idle", (), np.eye(1, dtype=complex), pos))
            else:
                steps.append(Step(t, "identity", (r * N + j,), eye2, pos))
        if r == R - 1:
            break
        for j in reversed(range(N)):
            t = len(steps) + 1
            steps.append(Step(t, "swap", (r * N + j, (r + 1) * N + j), SWAP, (float(j), 2 * r + 1.0)))
    assert len(steps) == T
    for s in steps:
        coords[M + s.t - 1] = s.position
    t_q: dict[int, int] = {}
    for s in steps:
        for q in s.qubits:
            t_q.setdefault(q, s.t)
    return ClockLayout(c, M, T, steps, coords, t_q, (R - 1) * N + N - 1, tuple(range(c.n_inputs)))


@dataclass
class ClockHamiltonian:
    H_in: Hamiltonian
    H_out: Hamiltonian
    H_clock: Hamiltonian
    H_evolv: list[Hamiltonian]
    boundary_notes: list[str] = field(default_factory=list)

    @property
    def total(self) -> Hamiltonian:
        out = self.H_in + self.H_out + self.H_clock
        for h in self.H_evolv:
            out = out + h.scale(0.5)
        return out


def _ket(bits: Sequence[int]) -> int:
    return sum(b << k for k, b in enumerate(bits))


def _outer(nbits: int, row_bits, col_bits) -> np.ndarray:
    P = np.zeros((1 << nbits, 1 << nbits), dtype=complex)
    P[_ket(row_bits), _ket(col_bits)] = 1.0
    return P


def _clock_window(L: ClockLayout, t: int) -> tuple[list[int], tuple, tuple]:
    """Clock qubits and the (before, after) patterns that mark the step ``t-1 -> t``."""
    T = L.T
    if T == 1:
        return [L.clock(1)], (0,), (1,)
    if t == 1:
        return [L.clock(1), L.clock(2)], (0, 0), (1, 0)
    if t == T:
        return [L.clock(T - 1), L.clock(T)], (1, 0), (1, 1)
    return [L.clock(t - 1), L.clock(t), L.clock(t + 1)], (1, 0, 0), (1, 1, 0)


def build_h5(L: ClockLayout) -> ClockHamiltonian:
    """Input, output, clock and propagation terms, expanded into Pauli strings."""
    n = L.num_qubits
    T = L.T
    notes = []
    H_in = Hamiltonian(n)
    for q in range(L.M):
        if q in L.q_in:
            continue
        tq = L.t_q[q]
        cl, before, _ = _clock_window(L, tq)
        if len(cl) < 3:
            notes.append(f"H_in for qubit {q} uses {len(cl)}-clock-qubit boundary form at t_q={tq}")
        k = len(cl)
        proj = np.kron(_outer(k, before, before), np.diag([0.0, 1.0]))
        H_in = H_in + matrix_to_hamiltonian(proj, [q] + cl, n)
    H_out = matrix_to_hamiltonian(np.kron(np.diag([0.0, 1.0]), np.diag([1.0, 0.0])), [L.q_out, L.clock(T)], n)
    H_clock = Hamiltonian(n)
    for t in range(1, T):
        H_clock = H_clock + matrix_to_hamiltonian(_outer(2, (0, 1), (0, 1)), [L.clock(t), L.clock(t + 1)], n)
    H_evolv = []
    for s in L.steps:
        cl, before, after = _clock_window(L, s.t)
        k = len(cl)
        U = s.matrix
        Id = np.eye(U.shape[0])
        loc = (
            np.kron(_outer(k, before, before), Id)
            + np.kron(_outer(k, after, after), Id)
            - np.kron(_outer(k, after, before), U)
            - np.kron(_outer(k, before, after), U.conj().T)
        )
        H_evolv.append(matrix_to_hamiltonian(loc, list(s.qubits) + cl, n))
    return ClockHamiltonian(H_in, H_out, H_clock, H_evolv, notes)


def legal_basis(L: ClockLayout) -> np.ndarray:
    """Basis indices with a unary clock pattern ``1^t 0^(T-t)``, ordered by ``(t, computational index)``."""
    comp = np.arange(1 << L.M, dtype=np.int64)
    out = [comp | (((1 << t) - 1) << L.M) for t in range(L.T + 1)]
    return np.concatenate(out)


def _evolve_history(L: ClockLayout, witness: np.ndarray) -> list[np.ndarray]:
    M = L.M
    witness = np.asarray(witness, dtype=complex).ravel()
    nin = len(L.q_in)
    if witness.size != 1 << nin:
        raise ValueError(f"witness must have dimension {1 << nin}")
    if abs(np.linalg.norm(witness) - 1) > 1e-12:
        raise ValueError("witness must be normalized")
    xi = np.zeros(1 << M, dtype=complex)
    xi[: 1 << nin] = witness  # input qubits are the lowest ids
    states = [xi]
    for s in L.steps:
        xi = _apply_local(xi, s.matrix, s.qubits, M)
        states.append(xi)
    return states


def _apply_local(psi: np.ndarray, U: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    if not qubits:
        return psi.copy()
    k = len(qubits)
    t = psi.reshape([2] * n)  # axis n-1-q is qubit q
    axes = [n - 1 - q for q in qubits]
    # local little-endian index: qubits[0] is the least significant
    Ut = U.reshape([2] * (2 * k))
    # reorder so tensor axis i of U (big-endian) maps to qubits[k-1-i]
    in_axes = list(range(k, 2 * k))
    src = [axes[k - 1 - i] for i in range(k)]
    out = np.tensordot(Ut, t, axes=(in_axes, src))
    out = np.moveaxis(out, list(range(k)), src)
    return out.reshape(-1)


def history_state_legal(L: ClockLayout, witness: np.ndarray) -> np.ndarray:
    """History state in the :func:`legal_basis` ordering."""
    states = _evolve_history(L, witness)
    return np.concatenate(states) / np.sqrt(L.T + 1)


def history_state(L: ClockLayout, witness: np.ndarray, dense_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Full state vector ``(T+1)^{-1/2} sum_t |xi_t>|1^t 0^(T-t)>``."""
    if L.num_qubits > dense_cap:
        raise DenseDimensionExceeded(f"{L.num_qubits} qubits exceeds dense cap {dense_cap}")
    psi = np.zeros(1 << L.num_qubits, dtype=complex)
    psi[legal_basis(L)] = history_state_legal(L, witness)
    return psi


def lemma1_check(L: ClockLayout, witness: np.ndarray | None = None, dense_cap_dim: int = 1024,
                 illegal_cap_dim: int = 1024, sparse_cap: int = 20) -> dict:
    """Ground energy on the legal clock space, history-state energy and the illegal-sector minimum.

    Sectors up to ``dense_cap_dim`` / ``illegal_cap_dim`` are diagonalized
    densely. A larger illegal sector falls back to Lanczos on the sparse
    restriction when the register has at most ``sparse_cap`` qubits.
    """
    ch = build_h5(L)
    H = ch.total
    basis = legal_basis(L)
    if basis.size > dense_cap_dim:
        raise DenseDimensionExceeded(f"legal space dimension {basis.size} exceeds {dense_cap_dim}")
    HS, leak = restricted_matrix(H, basis)
    w = np.linalg.eigvalsh(HS)
    rep = {
        "M": L.M,
        "T": L.T,
        "num_qubits": L.num_qubits,
        "legal_dim": int(basis.size),
        "legal_leakage": leak,
        "lambda": float(w[0]),
        "lambda_T3": float(w[0]) * L.T**3,
        "max_locality": H.locality(),
        "boundary_notes": ch.boundary_notes,
    }
    if witness is not None:
        psi = history_state_legal(L, witness)
        rep["history_energy"] = float(np.real(np.vdot(psi, HS @ psi)))
        partial = ch.H_in + ch.H_clock
        for h in ch.H_evolv:
            partial = partial + h.scale(0.5)
        Hp, _ = restricted_matrix(partial, basis)
        rep["history_energy_without_out"] = float(np.real(np.vdot(psi, Hp @ psi)))
    n = L.num_qubits
    illegal_dim = (1 << n) - basis.size
    if illegal_dim == 0:
        rep["illegal_min"] = None
        rep["illegal_note"] = "no illegal clock patterns"
    elif illegal_dim <= illegal_cap_dim:
        legal_set = np.zeros(1 << n, dtype=bool)
        legal_set[basis] = True
        ill = np.flatnonzero(~legal_set)
        HI, leak2 = restricted_matrix(H, ill)
        rep["illegal_min"] = float(np.linalg.eigvalsh(HI)[0])
        rep["illegal_leakage"] = leak2
    elif n <= sparse_cap:
        S = to_sparse(H, sparse_cap).tocsc()
        legal_set = np.zeros(1 << n, dtype=bool)
        legal_set[basis] = True
        ill = np.flatnonzero(~legal_set)
        HI = S[ill][:, ill]
        rep["illegal_min"] = float(eigensolve(HI, k=1, mode="iterative")[0])
        rep["illegal_leakage"] = float(scipy.sparse.linalg.norm(S[basis][:, ill]))
        rep["illegal_method"] = "lanczos"
    else:
        rep["illegal_min"] = None
        rep["illegal_note"] = f"illegal sector dimension {illegal_dim} above cap"
    return rep
