"""Real-weighted sums of Pauli strings.

Strings use the symplectic encoding: bit ``q`` of ``x`` marks an X or Y on
qubit ``q`` and bit ``q`` of ``z`` marks a Z or Y. The stored string always
denotes the Hermitian Pauli operator (Y, not XZ), and an integer ``phase``
carries a power of ``i`` left over from products.

Basis states are little-endian: bit ``q`` of a basis index is qubit ``q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import DenseDimensionExceeded, DimensionMismatch, NonHermitianResult

__all__ = [
    "PauliString",
    "Hamiltonian",
    "multiply",
    "canonicalize",
    "square_half_difference",
    "anticommutator",
    "product",
    "to_matrix",
    "to_sparse",
    "apply",
    "norm",
    "matrix_to_hamiltonian",
    "restricted_matrix",
    "DEFAULT_THRESHOLD",
    "DEFAULT_DENSE_CAP",
]

DEFAULT_THRESHOLD = 1e-12
DEFAULT_DENSE_CAP = 14

_AXIS_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_AXIS = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_PHASES = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=False)
class PauliString:
    """A Pauli string with an optional transient phase ``i**phase``."""

    x: int = 0
    z: int = 0
    phase: int = 0

    @classmethod
    def from_axes(cls, axes: Mapping[int, str] | Iterable[tuple[int, str]]) -> "PauliString":
        """Build a string from ``{qubit: axis}`` or ``[(qubit, axis), ...]``."""
        items = axes.items() if isinstance(axes, Mapping) else axes
        x = z = 0
        for q, a in items:
            if q < 0:
                raise ValueError(f"negative qubit index {q}")
            bx, bz = _AXIS_BITS[a.upper()]
            if (x | z) >> q & 1:
                raise ValueError(f"qubit {q} listed twice")
            x |= bx << q
            z |= bz << q
        return cls(x, z)

    @classmethod
    def parse(cls, label: str) -> "PauliString":
        """Parse a label such as ``"X0 Z3"`` or ``"I"``."""
        label = label.strip()
        if label in ("", "I"):
            return cls()
        return cls.from_axes([(int(tok[1:]), tok[0]) for tok in label.split()])

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    @property
    def support(self) -> tuple[int, ...]:
        m = self.x | self.z
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length() - 1)
            m ^= low
        return tuple(out)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def axes(self) -> tuple[tuple[int, str], ...]:
        return tuple((q, self.axis(q)) for q in self.support)

    def axis(self, q: int) -> str:
        """Axis letter on qubit ``q`` (``"I"`` off support)."""
        bits = ((self.x >> q) & 1, (self.z >> q) & 1)
        return _BITS_AXIS.get(bits, "I")

    @property
    def scalar(self) -> complex:
        return _PHASES[self.phase % 4]

    def unphased(self) -> "PauliString":
        return PauliString(self.x, self.z) if self.phase else self

    def restrict(self, qubits: Iterable[int]) -> "PauliString":
        """Factor of this string on the given qubits (phase dropped)."""
        m = 0
        for q in qubits:
            m |= 1 << q
        return PauliString(self.x & m, self.z & m)

    def commutes(self, other: "PauliString") -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def sort_key(self) -> tuple:
        return (len(self.support), self.axes)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __str__(self) -> str:
        body = " ".join(f"{a}{q}" for q, a in self.axes) or "I"
        pre = {0: "", 1: "i*", 2: "-", 3: "-i*"}[self.phase % 4]
        return pre + body

    __repr__ = __str__


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Product ``p @ q`` with its unit phase."""
    # sigma(x,z) = i^{|x&z|} X^x Z^z, and Z^a X^b = (-1)^{|a&b|} X^b Z^a
    x = p.x ^ q.x
    z = p.z ^ q.z
    e = (
        _popcount(p.x & p.z)
        + _popcount(q.x & q.z)
        + 2 * _popcount(p.z & q.x)
        - _popcount(x & z)
        + p.phase
        + q.phase
    )
    return PauliString(x, z, e % 4)


class Hamiltonian:
    """A real-weighted sum of Hermitian Pauli strings on ``num_qubits`` qubits.

    Instances are treated as immutable. Construction always canonicalizes.
    """

    __slots__ = ("num_qubits", "_terms", "threshold")

    def __init__(
        self,
        num_qubits: int,
        terms: Mapping[PauliString, float] | Iterable[tuple[PauliString, float]] = (),
        threshold: float = DEFAULT_THRESHOLD,
    ):
        if num_qubits < 0:
            raise ValueError("num_qubits must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[PauliString, float] = {}
        limit = 1 << num_qubits
        for s, c in items:
            if s.phase % 2:
                raise NonHermitianResult(f"string {s} carries an imaginary phase")
            if (s.x | s.z) >= limit:
                raise ValueError(f"term {s} acts outside {num_qubits} qubits")
            c = float(c) * (-1.0 if s.phase % 4 == 2 else 1.0)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient on {s}")
            key = s.unphased()
            acc[key] = acc.get(key, 0.0) + c
        kept = [(s, c) for s, c in acc.items() if abs(c) > threshold]
        kept.sort(key=lambda t: t[0].sort_key())
        self.num_qubits = num_qubits
        self._terms = dict(kept)
        self.threshold = threshold

    # construction helpers
    @classmethod
    def from_labels(cls, num_qubits: int, items: Iterable[tuple[float, str]]) -> "Hamiltonian":
        """Build from ``[(coeff, "X0 Z1"), ...]``."""
        return cls(num_qubits, [(PauliString.parse(lbl), c) for c, lbl in items])

    @classmethod
    def identity(cls, num_qubits: int, coeff: float = 1.0) -> "Hamiltonian":
        return cls(num_qubits, [(PauliString(), coeff)])

    @classmethod
    def zero(cls, num_qubits: int) -> "Hamiltonian":
        return cls(num_qubits)

    # container protocol
    @property
    def terms(self) -> dict[PauliString, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def coeff(self, s: PauliString) -> float:
        return self._terms.get(s.unphased(), 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hamiltonian):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self._terms == other._terms

    def allclose(self, other: "Hamiltonian", atol: float = 1e-9) -> bool:
        """Coefficient-wise comparison up to ``atol``."""
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coeff(k) - other.coeff(k)) <= atol for k in keys)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:.6g}*{s}" for s, c in self._terms.items()) or "0"
        return f"Hamiltonian(n={self.num_qubits}: {body})"

    # arithmetic
    def with_qubits(self, num_qubits: int) -> "Hamiltonian":
        """Same operator embedded in a register of ``num_qubits`` qubits."""
        return Hamiltonian(num_qubits, self._terms, self.threshold)

    def __add__(self, other: "Hamiltonian") -> "Hamiltonian":
        n = max(self.num_qubits, other.num_qubits)
        return Hamiltonian(n, list(self._terms.items()) + list(other._terms.items()), self.threshold)

    def __neg__(self) -> "Hamiltonian":
        return self.scale(-1.0)

    def __sub__(self, other: "Hamiltonian") -> "Hamiltonian":
        return self + other.scale(-1.0)

    def scale(self, a: float) -> "Hamiltonian":
        return Hamiltonian(self.num_qubits, [(s, a * c) for s, c in self._terms.items()], self.threshold)

    def __mul__(self, a: float) -> "Hamiltonian":
        return self.scale(a)

    __rmul__ = __mul__

    def __matmul__(self, other: "Hamiltonian") -> "Hamiltonian":
        return product(self, other)

    def support(self) -> tuple[int, ...]:
        m = 0
        for s in self._terms:
            m |= s.x | s.z
        return PauliString(m, 0).support

    def locality(self) -> int:
        return max((s.weight for s in self._terms), default=0)

    def identity_coeff(self) -> float:
        return self._terms.get(PauliString(), 0.0)

    def without(self, strings: Iterable[PauliString]) -> "Hamiltonian":
        drop = {s.unphased() for s in strings}
        return Hamiltonian(self.num_qubits, [(s, c) for s, c in self._terms.items() if s not in drop], self.threshold)

    # serialization
    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "terms": [{"coeff": c, "paulis": [[q, a] for q, a in s.axes]} for s, c in self._terms.items()],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Hamiltonian":
        n = int(d["num_qubits"])
        terms = [(PauliString.from_axes([(int(q), str(a)) for q, a in t["paulis"]]), float(t["coeff"])) for t in d["terms"]]
        return cls(n, terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Hamiltonian":
        return cls.from_dict(json.loads(text))


def canonicalize(H: Hamiltonian, threshold: float = DEFAULT_THRESHOLD) -> Hamiltonian:
    """Merge like strings, drop ``|coeff| <= threshold``, sort terms."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return Hamiltonian(H.num_qubits, H.items(), threshold)


def _complex_product(A: Hamiltonian, B: Hamiltonian) -> dict[PauliString, complex]:
    acc: dict[PauliString, complex] = {}
    for sa, ca in A.items():
        for sb, cb in B.items():
            p = multiply(sa, sb)
            k = p.unphased()
            acc[k] = acc.get(k, 0.0) + ca * cb * p.scalar
    return acc


def product(A: Hamiltonian, B: Hamiltonian, tol: float = 1e-12) -> Hamiltonian:
    """Operator product ``A @ B``; raises if the result is not Hermitian."""
    acc = _complex_product(A, B)
    scale = max((abs(v) for v in acc.values()), default=0.0)
    for s, v in acc.items():
        if abs(v.imag) > tol * max(1.0, scale):
            raise NonHermitianResult(f"product has imaginary coefficient {v} on {s}")
    return Hamiltonian(max(A.num_qubits, B.num_qubits), [(s, v.real) for s, v in acc.items()])


def anticommutator(A: Hamiltonian, B: Hamiltonian) -> Hamiltonian:
    """``A B + B A``, always Hermitian for Hermitian inputs."""
    acc: dict[PauliString, float] = {}
    for sa, ca in A.items():
        for sb, cb in B.items():
            if not sa.commutes(sb):
                continue
            p = multiply(sa, sb)
            # commuting Hermitian strings multiply to a real phase
            k = p.unphased()
            acc[k] = acc.get(k, 0.0) + 2.0 * ca * cb * p.scalar.real
    return Hamiltonian(max(A.num_qubits, B.num_qubits), acc)


def square_half_difference(A: Hamiltonian, B: Hamiltonian) -> Hamiltonian:
    """Symbolic expansion of ``(-A + B)**2 / 2 = (A^2 + B^2 - AB - BA) / 2``."""
    return (anticommutator(A, A) + anticommutator(B, B) - anticommutator(A, B).scale(2.0)).scale(0.25)


# numerics

def _check_cap(n: int, dense_cap: int) -> None:
    if n > dense_cap:
        raise DenseDimensionExceeded(f"{n} qubits exceeds dense cap {dense_cap}")


def _term_arrays(s: PauliString, c: float, idx: np.ndarray) -> np.ndarray:
    """Values of ``c * s`` at entries ``(i ^ x, i)`` for basis indices ``idx``."""
    sign = 1.0 - 2.0 * (np.bitwise_count(idx & s.z) & 1)
    ph = _PHASES[_popcount(s.x & s.z) % 4]
    return (c * ph) * sign


def _is_real(H: Hamiltonian) -> bool:
    return all(_popcount(s.x & s.z) % 2 == 0 for s in H._terms)


def to_matrix(H: Hamiltonian, dense_cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    """Dense matrix of ``H`` (real dtype when every string has an even Y count)."""
    n = H.num_qubits
    _check_cap(n, dense_cap)
    dim = 1 << n
    real = _is_real(H)
    M = np.zeros((dim, dim), dtype=float if real else complex)
    idx = np.arange(dim, dtype=np.int64)
    for s, c in H.items():
        vals = _term_arrays(s, c, idx)
        M[idx ^ s.x, idx] += vals.real if real else vals
    return M


def to_sparse(H: Hamiltonian, max_qubits: int = 22) -> scipy.sparse.csr_matrix:
    """Sparse CSR matrix of ``H``."""
    n = H.num_qubits
    if n > max_qubits:
        raise DenseDimensionExceeded(f"{n} qubits exceeds sparse cap {max_qubits}")
    dim = 1 << n
    real = _is_real(H)
    idx = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for s, c in H.items():
        v = _term_arrays(s, c, idx)
        rows.append(idx ^ s.x)
        cols.append(idx)
        vals.append(v.real if real else v)
    if not rows:
        return scipy.sparse.csr_matrix((dim, dim), dtype=float)
    M = scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    )
    return M.tocsr()


def apply(H: Hamiltonian, v: np.ndarray) -> np.ndarray:
    """Matrix-free product ``H v`` computed term by term."""
    v = np.asarray(v)
    dim = 1 << H.num_qubits
    if v.shape[0] != dim:
        raise DimensionMismatch(f"state has length {v.shape[0]}, expected {dim}")
    real = _is_real(H) and not np.iscomplexobj(v)
    out = np.zeros(v.shape, dtype=float if real else complex)
    idx = np.arange(dim, dtype=np.int64)
    for s, c in H.items():
        vals = _term_arrays(s, c, idx)
        if real:
            vals = vals.real
        contrib = vals.reshape((-1,) + (1,) * (v.ndim - 1)) * v
        out[idx ^ s.x] += contrib
    return out


def norm(H: Hamiltonian, mode: str = "upper_bound", dense_cap: int = DEFAULT_DENSE_CAP) -> float:
    """Operator norm: ``"upper_bound"`` is the coefficient 1-norm, ``"exact"`` diagonalizes."""
    if mode == "upper_bound":
        return float(sum(abs(c) for _, c in H.items()))
    if mode == "exact":
        if len(H) == 0:
            return 0.0
        w = np.linalg.eigvalsh(to_matrix(H, dense_cap))
        return float(max(abs(w[0]), abs(w[-1])))
    raise ValueError(f"unknown norm mode {mode!r}")


def matrix_to_hamiltonian(
    M: np.ndarray, qubits: Iterable[int], num_qubits: int, tol: float = 1e-12
) -> Hamiltonian:
    """Pauli expansion of a Hermitian matrix acting on ``qubits``.

    Local bit ``j`` of the row/column index refers to ``qubits[j]``.
    """
    qubits = list(qubits)
    k = len(qubits)
    M = np.asarray(M)
    dim = 1 << k
    if M.shape != (dim, dim):
        raise DimensionMismatch(f"matrix shape {M.shape} does not match {k} qubits")
    if not np.allclose(M, M.conj().T, atol=tol * max(1.0, np.abs(M).max(initial=0.0))):
        raise NonHermitianResult("local matrix is not Hermitian")
    Hd = scipy.linalg.hadamard(dim) if dim > 1 else np.ones((1, 1))
    idx = np.arange(dim)
    terms = []
    for xl in range(dim):
        # trace against sigma(x, z) for every z at once via Walsh-Hadamard
        coeffs = Hd @ M[idx ^ xl, idx] / dim
        for zl in range(dim):
            val = coeffs[zl] * (-1j) ** _popcount(xl & zl)
            if abs(val) <= tol:
                continue
            gx = gz = 0
            for j, q in enumerate(qubits):
                gx |= ((xl >> j) & 1) << q
                gz |= ((zl >> j) & 1) << q
            terms.append((PauliString(gx, gz), complex(val).real))
    return Hamiltonian(num_qubits, terms)


def restricted_matrix(H: Hamiltonian, basis: np.ndarray) -> tuple[np.ndarray, float]:
    """Matrix of ``H`` on the span of computational basis states ``basis``.

    Returns the compressed matrix and the largest norm of the component of
    ``H|b>`` outside the span over basis states ``b`` (zero when the span is
    invariant under ``H``).
    """
    basis = np.asarray(basis, dtype=np.int64)
    m = basis.size
    real = _is_real(H)
    M = np.zeros((m, m), dtype=float if real else complex)
    order = np.argsort(basis)
    sorted_basis = basis[order]
    cols = np.arange(m, dtype=np.int64)
    out_keys, out_vals = [], []
    for s, c in H.items():
        vals = _term_arrays(s, c, basis)
        if real:
            vals = vals.real
        tgt = basis ^ s.x
        k = np.minimum(np.searchsorted(sorted_basis, tgt), m - 1)
        inside = sorted_basis[k] == tgt
        np.add.at(M, (order[k[inside]], cols[inside]), vals[inside])
        out_keys.append(cols[~inside] * (1 << H.num_qubits) + tgt[~inside])
        out_vals.append(vals[~inside])
    leak = 0.0
    if out_keys:
        keys = np.concatenate(out_keys)
        if keys.size:
            vals = np.concatenate(out_vals)
            uk, inv = np.unique(keys, return_inverse=True)
            amp = np.zeros(uk.size, dtype=vals.dtype)
            np.add.at(amp, inv, vals)
            col_of = uk >> H.num_qubits
            per_col = np.zeros(m)
            np.add.at(per_col, col_of, np.abs(amp) ** 2)
            leak = float(np.sqrt(per_col.max()))
    return M, leak
