"""Eigensolvers, self-energies and perturbative bound checkers.

A perturbed Hamiltonian is handled as a :class:`PerturbedSplit` ``(H0, V)``
together with a cut ``lambda_star`` that separates the low eigenspace of
``H0`` from the high one. All block quantities are expressed in the
eigenbasis of ``H0`` (the computational basis when ``H0`` is diagonal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import (
    DegeneracyMismatch,
    DenseDimensionExceeded,
    DimensionMismatch,
    DivergentExpansion,
    NoConvergence,
    SingularResolvent,
)
from .pauli import DEFAULT_DENSE_CAP, Hamiltonian, apply, norm, to_matrix, to_sparse

__all__ = [
    "PerturbedSplit",
    "SelfEnergyEval",
    "BoundCheck",
    "eigensolve",
    "operator_distance",
    "self_energy_exact",
    "self_energy_series",
    "evaluate_self_energy",
    "sigma_deviation",
    "disk_samples",
    "check_theorem4",
    "check_theorem5",
    "check_lemma3",
    "conserved_axes",
    "sector_hamiltonians",
    "ground_energy",
]

COND_CAP = 1e12
DEGENERACY_TOL = 1e-8
PASS_SLACK = 1e-9


def _as_matrix(A, dense_cap: int) -> np.ndarray:
    if isinstance(A, Hamiltonian):
        return to_matrix(A, dense_cap)
    return np.asarray(A)


def eigensolve(
    H,
    k: int | None = None,
    mode: str = "dense",
    vectors: bool = False,
    dense_cap: int = DEFAULT_DENSE_CAP,
    sparse_cap: int = 22,
    tol: float = 1e-8,
    seed: int = 0,
):
    """Lowest eigenvalues of ``H`` in ascending order.

    Args:
        H: Hamiltonian or Hermitian matrix.
        k: number of eigenpairs; ``None`` means all (dense only).
        mode: ``"dense"`` for a full decomposition, ``"iterative"`` for
            implicitly restarted Lanczos on a sparse operator.
        vectors: also return eigenvectors as columns.
        tol: relative residual target for the iterative mode.

    Returns:
        ``values`` or ``(values, vectors)``.
    """
    if mode == "dense":
        M = _as_matrix(H, dense_cap)
        if vectors:
            w, U = np.linalg.eigh(M)
            return (w, U) if k is None else (w[:k], U[:, :k])
        w = np.linalg.eigvalsh(M)
        return w if k is None else w[:k]
    if mode != "iterative":
        raise ValueError(f"unknown mode {mode!r}")
    if k is None:
        raise ValueError("iterative mode needs an explicit k")
    if isinstance(H, Hamiltonian):
        op = to_sparse(H, sparse_cap)
        scale = max(norm(H, "upper_bound"), 1e-300)
    else:
        op = H
        scale = max(float(np.abs(np.asarray(H)).sum(axis=0).max()), 1e-300)
    dim = op.shape[0]
    if k >= dim - 1:
        raise ValueError(f"k={k} too large for iterative mode on dimension {dim}")
    v0 = np.random.default_rng(seed).normal(size=dim)
    w, U = scipy.sparse.linalg.eigsh(op, k=k, which="SA", v0=v0, tol=tol * 1e-3, ncv=min(dim, max(2 * k + 1, 40)))
    order = np.argsort(w)
    w, U = w[order], U[:, order]
    res = np.linalg.norm(op @ U - U * w, axis=0)
    if res.max(initial=0.0) > tol * scale:
        raise NoConvergence(f"max residual {res.max():.3e} above {tol * scale:.3e}")
    return (w, U) if vectors else w


def operator_distance(A, B, dense_cap: int = DEFAULT_DENSE_CAP) -> float:
    """Spectral norm of ``A - B`` for Hamiltonians or matrices."""
    if isinstance(A, Hamiltonian) and isinstance(B, Hamiltonian):
        n = max(A.num_qubits, B.num_qubits)
        return norm(A.with_qubits(n) - B.with_qubits(n), "exact", dense_cap)
    MA, MB = _as_matrix(A, dense_cap), _as_matrix(B, dense_cap)
    if MA.shape != MB.shape:
        raise DimensionMismatch(f"shapes {MA.shape} and {MB.shape} differ")
    D = MA - MB
    if D.size == 0:
        return 0.0
    if np.allclose(D, D.conj().T, atol=1e-14 * max(1.0, np.abs(D).max())):
        w = np.linalg.eigvalsh((D + D.conj().T) / 2)
        return float(max(abs(w[0]), abs(w[-1])))
    return float(np.linalg.norm(D, 2))


@dataclass(frozen=True)
class _Frame:
    h0_vals: np.ndarray  # H0 eigenvalues in basis order
    U: np.ndarray | None  # basis change (None: computational basis)
    lo: np.ndarray
    hi: np.ndarray
    Ht: np.ndarray  # H0 + V in the basis
    Vb: np.ndarray  # V in the basis


@dataclass(frozen=True)
class PerturbedSplit:
    """Unperturbed ``H0`` plus perturbation ``V`` with a spectral cut ``lambda_star``."""

    H0: Hamiltonian
    V: Hamiltonian
    lambda_star: float
    dense_cap: int = 12

    @property
    def num_qubits(self) -> int:
        return max(self.H0.num_qubits, self.V.num_qubits)

    @property
    def total(self) -> Hamiltonian:
        n = self.num_qubits
        return self.H0.with_qubits(n) + self.V.with_qubits(n)

    @cached_property
    def frame(self) -> _Frame:
        n = self.num_qubits
        if n > self.dense_cap:
            raise DenseDimensionExceeded(f"{n} qubits exceeds dense cap {self.dense_cap}")
        H0 = self.H0.with_qubits(n)
        Vm = to_matrix(self.V.with_qubits(n), self.dense_cap)
        if all(s.x == 0 for s, _ in H0.items()):
            vals = np.real(np.diag(to_matrix(H0, self.dense_cap))).copy()
            U = None
            Vb = Vm
        else:
            vals, U = np.linalg.eigh(to_matrix(H0, self.dense_cap))
            Vb = U.conj().T @ Vm @ U
        lo = np.flatnonzero(vals < self.lambda_star)
        hi = np.flatnonzero(vals >= self.lambda_star)
        if lo.size == 0 or hi.size == 0:
            raise ValueError("lambda_star does not split the spectrum of H0")
        Ht = Vb + np.diag(vals)
        return _Frame(vals, U, lo, hi, Ht, Vb)

    @property
    def low_dim(self) -> int:
        return int(self.frame.lo.size)

    @cached_property
    def lambda_minus(self) -> float:
        half = self.half_gap
        return self.lambda_star - half

    @cached_property
    def lambda_plus(self) -> float:
        return self.lambda_star + self.half_gap

    @cached_property
    def half_gap(self) -> float:
        f = self.frame
        return float(min(self.lambda_star - f.h0_vals[f.lo].max(), f.h0_vals[f.hi].min() - self.lambda_star))

    @cached_property
    def norm_V(self) -> float:
        if len(self.V) == 0:
            return 0.0
        w = np.linalg.eigvalsh(self.frame.Vb)
        return float(max(abs(w[0]), abs(w[-1])))

    @cached_property
    def full_eigh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.frame.Ht)

    @cached_property
    def _high_block_eigh(self):
        f = self.frame
        mu, Uc = np.linalg.eigh(f.Ht[np.ix_(f.hi, f.hi)])
        BU = f.Ht[np.ix_(f.lo, f.hi)] @ Uc
        return mu, BU

    def to_basis(self, op) -> np.ndarray:
        """Full operator (Hamiltonian or computational-basis matrix) in the split basis."""
        if isinstance(op, Hamiltonian):
            op = to_matrix(op.with_qubits(self.num_qubits), self.dense_cap)
        M = np.asarray(op)
        U = self.frame.U
        return M if U is None else U.conj().T @ M @ U

    def project_low(self, op) -> np.ndarray:
        """Low-low block of ``op``."""
        lo = self.frame.lo
        return self.to_basis(op)[np.ix_(lo, lo)]

    def leakage(self, op) -> float:
        """Norm of ``op - Pi_- op Pi_-``."""
        M = self.to_basis(op).astype(complex)
        lo = self.frame.lo
        M[np.ix_(lo, lo)] = 0.0
        return float(np.linalg.norm(M, 2)) if M.size else 0.0


def _check_condition(dist: np.ndarray, cond_cap: float) -> float:
    dmin = float(np.min(dist))
    cond = math.inf if dmin == 0.0 else float(np.max(dist)) / dmin
    if cond > cond_cap:
        raise SingularResolvent(f"resolvent condition number {cond:.3e} exceeds {cond_cap:.1e}")
    return cond


def self_energy_exact(
    split: PerturbedSplit, z: complex, method: str = "schur", cond_cap: float = COND_CAP
) -> np.ndarray:
    """Exact self-energy on the low space.

    ``method="resolvent"`` inverts the low block of the full resolvent,
    ``z - G_{--}(z)^{-1}``. ``method="schur"`` evaluates the algebraically
    identical Schur complement ``H_{--} + H_{-+} (z - H_{++})^{-1} H_{+-}``,
    which stays well conditioned when the gap is huge.
    """
    f = split.frame
    lo = f.lo
    if method == "schur":
        mu, BU = split._high_block_eigh
        _check_condition(np.abs(z - mu), cond_cap)
        g = 1.0 / (z - mu)
        S = f.Ht[np.ix_(lo, lo)] + (BU * g) @ BU.conj().T
        return S
    if method == "resolvent":
        lam, W = split.full_eigh
        _check_condition(np.abs(z - lam), cond_cap)
        Wl = W[lo, :]
        Gmm = (Wl * (1.0 / (z - lam))) @ Wl.conj().T
        return z * np.eye(lo.size) - np.linalg.inv(Gmm)
    raise ValueError(f"unknown method {method!r}")


def self_energy_series(split: PerturbedSplit, z: complex, order: int = 2) -> np.ndarray:
    """Perturbative self-energy truncated at second or third order in ``V``."""
    if order not in (2, 3):
        raise ValueError("order must be 2 or 3")
    f = split.frame
    lo, hi = f.lo, f.hi
    dist = np.abs(z - f.h0_vals[hi])
    if split.norm_V >= dist.min():
        raise DivergentExpansion(f"||V||={split.norm_V:.4g} not below dist(z, spec H+)={dist.min():.4g}")
    g = 1.0 / (z - f.h0_vals[hi])
    Vmp = f.Vb[np.ix_(lo, hi)]
    Vpm = f.Vb[np.ix_(hi, lo)]
    S = np.diag(f.h0_vals[lo]).astype(complex) + f.Vb[np.ix_(lo, lo)] + (Vmp * g) @ Vpm
    if order == 3:
        Vpp = f.Vb[np.ix_(hi, hi)]
        S = S + (Vmp * g) @ ((Vpp * g) @ Vpm)
    return S


@dataclass
class SelfEnergyEval:
    """Exact and series self-energy at one point ``z``."""

    z: complex
    lambda_star: float
    delta: float
    lambda_plus: float
    lambda_minus: float
    exact: np.ndarray
    series: np.ndarray
    order: int
    discrepancy_norm: float


def evaluate_self_energy(split: PerturbedSplit, z: complex, order: int = 2) -> SelfEnergyEval:
    ex = self_energy_exact(split, z)
    se = self_energy_series(split, z, order)
    return SelfEnergyEval(
        z=z,
        lambda_star=split.lambda_star,
        delta=2 * split.half_gap,
        lambda_plus=split.lambda_plus,
        lambda_minus=split.lambda_minus,
        exact=ex,
        series=se,
        order=order,
        discrepancy_norm=float(np.linalg.norm(ex - se, 2)),
    )


def sigma_deviation(split: PerturbedSplit, Heff_low: np.ndarray, zs: Sequence[complex]) -> float:
    """``max_z ||Sigma_-(z) - H_eff||`` over the sample points."""
    worst = 0.0
    for z in zs:
        D = self_energy_exact(split, z) - Heff_low
        worst = max(worst, float(np.linalg.norm(D, 2)))
    return worst


def disk_samples(z0: float, r: float, boundary: int = 32, interior: int = 9) -> np.ndarray:
    """Points on the circle ``|z - z0| = r`` plus points on its real diameter."""
    theta = 2 * np.pi * np.arange(boundary) / boundary
    t = np.linspace(-1.0, 1.0, interior + 2)[1:-1]
    return np.concatenate([z0 + r * np.exp(1j * theta), z0 + r * t])


@dataclass
class BoundCheck:
    """Outcome of a perturbative bound check with every parameter echoed."""

    name: str
    lhs: float
    rhs: float
    params: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.lhs <= self.rhs + PASS_SLACK)

    @property
    def hypothesis_violated(self) -> bool:
        return bool(self.violations)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "passed": self.passed,
            "hypothesis_violated": self.hypothesis_violated,
            "violations": list(self.violations),
            "params": {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.params.items()},
        }


def _resolve_epsilon(split, Heff_low, zs_of_eps, epsilon):
    """Return ``(epsilon, sup)``; a ``None`` epsilon is replaced by the measured sup."""
    if epsilon is not None:
        return float(epsilon), sigma_deviation(split, Heff_low, zs_of_eps(float(epsilon)))
    eps = 0.0
    for _ in range(6):
        sup = sigma_deviation(split, Heff_low, zs_of_eps(eps))
        if sup <= eps:
            return eps, sup
        eps = sup * (1 + 1e-6) + 1e-14
    return eps, sigma_deviation(split, Heff_low, zs_of_eps(eps))


def _common(split: PerturbedSplit, H_eff, violations: list):
    Heff_low = split.project_low(H_eff)
    Heff_low = (Heff_low + Heff_low.conj().T) / 2
    leak = split.leakage(H_eff)
    if leak > 1e-9:
        violations.append(f"H_eff has support outside the low space (norm {leak:.3e})")
    if split.norm_V > split.half_gap:
        violations.append(f"||V||={split.norm_V:.6g} exceeds half gap {split.half_gap:.6g}")
    w = np.linalg.eigvalsh(Heff_low)
    return Heff_low, w, leak


def check_theorem4(split: PerturbedSplit, H_eff, epsilon: float | None = None, z_samples: int = 33) -> BoundCheck:
    """Eigenvalue closeness of the low spectrum of ``H0 + V`` and ``H_eff``.

    Checks ``max_j |lambda_j(H~ below lambda_star) - lambda_j(H_eff)| <= epsilon``
    where ``epsilon`` bounds ``||Sigma_-(z) - H_eff||`` on ``[a - eps, b + eps]``.
    """
    violations: list[str] = []
    Heff_low, w, leak = _common(split, H_eff, violations)
    a, b = float(w[0]), float(w[-1])

    def zs(eps):
        return np.linspace(a - eps, b + eps, z_samples)

    eps, sup = _resolve_epsilon(split, Heff_low, zs, epsilon)
    if sup > eps:
        violations.append(f"sup ||Sigma-H_eff||={sup:.3e} exceeds epsilon={eps:.3e}")
    if not b < split.lambda_star - eps:
        violations.append("spectrum of H_eff reaches lambda_star - epsilon")
    lam = split.full_eigh[0]
    low = lam[lam < split.lambda_star]
    if low.size != w.size:
        violations.append(f"{low.size} eigenvalues below lambda_star, low space has dimension {w.size}")
    m = min(low.size, w.size)
    lhs = float(np.max(np.abs(low[:m] - w[:m]))) if m else 0.0
    params = dict(epsilon=eps, sup_sigma_dev=sup, a=a, b=b, norm_V=split.norm_V, lambda_star=split.lambda_star,
                  lambda_plus=split.lambda_plus, delta=2 * split.half_gap, leakage=leak, z_samples=z_samples)
    return BoundCheck("theorem4", lhs, eps, params, violations)


def _subspace_norm(cols: list[np.ndarray], op_builder) -> float:
    """Norm of an operator supported on the span of ``cols``."""
    Q, _ = np.linalg.qr(np.hstack(cols))
    D = op_builder(Q)
    D = (D + D.conj().T) / 2
    w = np.linalg.eigvalsh(D)
    return float(max(abs(w[0]), abs(w[-1])))


def check_theorem5(
    split: PerturbedSplit,
    H_eff,
    r: float,
    epsilon: float | None = None,
    boundary: int = 32,
    interior: int = 9,
) -> BoundCheck:
    """Operator closeness of ``H~`` restricted below ``lambda_star`` and ``H_eff``.

    The disk is centred at ``z0 = (a + b) / 2``. ``|z0|`` replaces ``z0`` in
    the contour factor so the bound stays valid for negative centres.
    """
    violations: list[str] = []
    Heff_low, w, leak = _common(split, H_eff, violations)
    a, b = float(w[0]), float(w[-1])
    z0, w_eff = (a + b) / 2, (b - a) / 2
    norm_eff = float(max(abs(a), abs(b)))

    def zs(eps):
        return disk_samples(z0, r, boundary, interior)

    eps, sup = _resolve_epsilon(split, Heff_low, zs, epsilon)
    if sup > eps:
        violations.append(f"sup ||Sigma-H_eff||={sup:.3e} exceeds epsilon={eps:.3e}")
    if not (b + eps < z0 + r < split.lambda_star):
        violations.append("disk condition b + eps < z0 + r < lambda_star fails")
    if not r - w_eff - eps > 0:
        violations.append("r <= w_eff + epsilon")
    f = split.frame
    lam, W = split.full_eigh
    sel = lam < split.lambda_star
    Wl, laml = W[:, sel], lam[sel]
    dim = f.Ht.shape[0]
    E = np.zeros((dim, f.lo.size))
    E[f.lo, np.arange(f.lo.size)] = 1.0

    def build(Q):
        A = Q.conj().T @ Wl
        B = Q.conj().T @ E
        return (A * laml) @ A.conj().T - B @ Heff_low @ B.conj().T

    lhs = _subspace_norm([Wl, E], build)
    lp, nv = split.lambda_plus, split.norm_V
    den1 = lp - norm_eff - eps
    den2 = (r - w_eff) * (r - w_eff - eps)
    rhs = (3 * (norm_eff + eps) * nv / den1 if den1 > 0 else math.inf) + (
        r * (r + abs(z0)) * eps / den2 if den2 > 0 else math.inf
    )
    params = dict(epsilon=eps, sup_sigma_dev=sup, r=r, z0=z0, w_eff=w_eff, a=a, b=b, norm_H_eff=norm_eff,
                  norm_V=nv, lambda_plus=lp, lambda_star=split.lambda_star, leakage=leak,
                  z_boundary=boundary, z_interior=interior)
    return BoundCheck("theorem5", lhs, rhs, params, violations)


def check_lemma3(
    split: PerturbedSplit,
    H_eff,
    d: int,
    r: float | None = None,
    epsilon: float | None = None,
    boundary: int = 32,
    interior: int = 9,
    degeneracy_tol: float = DEGENERACY_TOL,
) -> BoundCheck:
    """Closeness of the ``d`` lowest eigenvectors of ``H~`` to the ground space of ``H_eff``.

    ``r`` defaults to half the effective gap. ``|lambda_0|`` replaces
    ``lambda_0`` so the bound stays valid for negative ground energies.
    """
    violations: list[str] = []
    Heff_low, _, leak = _common(split, H_eff, violations)
    w, Ve = np.linalg.eigh(Heff_low)
    if d < 1 or d >= w.size:
        raise DegeneracyMismatch(f"d={d} outside 1..{w.size - 1}")
    scale = max(1.0, float(np.max(np.abs(w))))
    if (w[d] - w[d - 1]) / scale < degeneracy_tol:
        raise DegeneracyMismatch(f"no gap between level {d - 1} and {d} of H_eff")
    if (w[d - 1] - w[0]) / scale > degeneracy_tol:
        raise DegeneracyMismatch(f"the {d} lowest levels of H_eff are not degenerate")
    lam0, lam1 = float(w[0]), float(w[d])
    gap_eff = lam1 - lam0
    r = gap_eff / 2 if r is None else float(r)

    def zs(eps):
        return disk_samples(lam0, r, boundary, interior)

    eps, sup = _resolve_epsilon(split, Heff_low, zs, epsilon)
    if sup > eps:
        violations.append(f"sup ||Sigma-H_eff||={sup:.3e} exceeds epsilon={eps:.3e}")
    if not (eps < r < gap_eff - eps):
        violations.append("radius condition eps < r < gap_eff - eps fails")
    if not 0 < eps < 2 * split.half_gap:
        violations.append("epsilon outside (0, Delta)")
    f = split.frame
    lam, W = split.full_eigh
    Wd = W[:, :d]
    dim = f.Ht.shape[0]
    P0 = np.zeros((dim, d), dtype=Ve.dtype)
    P0[f.lo, :] = Ve[:, :d]

    def build(Q):
        A = Q.conj().T @ Wd
        B = Q.conj().T @ P0
        return A @ A.conj().T - B @ B.conj().T

    lhs = _subspace_norm([Wd, P0], build)
    lp, nv = split.lambda_plus, split.norm_V
    den1 = lp - (abs(lam0) + eps)
    den2 = r * (r - eps)
    rhs = (3 * nv / den1 if den1 > 0 else math.inf) + (eps * (abs(lam0) + r) / den2 if den2 > 0 else math.inf)
    params = dict(epsilon=eps, sup_sigma_dev=sup, r=r, z0=lam0, d=d, lambda0_eff=lam0, lambda1_eff=lam1,
                  delta_eff=gap_eff, norm_V=nv, lambda_plus=lp, lambda_star=split.lambda_star, leakage=leak,
                  z_boundary=boundary, z_interior=interior)
    return BoundCheck("lemma3", lhs, rhs, params, violations)


# block diagonalization by conserved single-qubit Paulis

def conserved_axes(H: Hamiltonian) -> dict[int, str]:
    """Qubits on which every term acts with one fixed axis (or trivially).

    Such a single-qubit Pauli commutes with ``H``, so its eigenvalue labels
    invariant sectors.
    """
    seen: dict[int, set[str]] = {}
    for s, _ in H.items():
        for q, a in s.axes:
            seen.setdefault(q, set()).add(a)
    return {q: next(iter(a)) for q, a in sorted(seen.items()) if len(a) == 1}


def sector_hamiltonians(H: Hamiltonian, axes: dict[int, str] | None = None):
    """Yield ``(signs, H_sector)`` over all sign assignments of conserved qubits.

    ``H_sector`` acts on the remaining qubits, relabelled in increasing order.
    """
    from .pauli import PauliString

    axes = conserved_axes(H) if axes is None else axes
    fixed = sorted(axes)
    free = [q for q in range(H.num_qubits) if q not in axes]
    relabel = {q: i for i, q in enumerate(free)}
    items = []
    for s, c in H.items():
        mask = 0
        for q, _ in s.axes:
            if q in axes:
                mask |= 1 << fixed.index(q)
        rest = PauliString.from_axes({relabel[q]: a for q, a in s.axes if q not in axes})
        items.append((rest, c, mask))
    for bits in range(1 << len(fixed)):
        signs = {q: -1 if bits >> i & 1 else 1 for i, q in enumerate(fixed)}
        terms = [(r, -c if bin(bits & m).count("1") % 2 else c) for r, c, m in items]
        yield signs, Hamiltonian(len(free), terms)


def ground_energy(H: Hamiltonian, dense_cap: int = DEFAULT_DENSE_CAP, use_symmetry: bool = True) -> float:
    """Lowest eigenvalue, block-diagonalizing over conserved single-qubit Paulis."""
    if not use_symmetry:
        return float(eigensolve(H, 1, dense_cap=dense_cap)[0])
    best = math.inf
    for _, Hs in sector_hamiltonians(H):
        if Hs.num_qubits == 0:
            e = Hs.identity_coeff()
        else:
            e = float(scipy.linalg.eigvalsh(to_matrix(Hs, dense_cap), subset_by_index=[0, 0])[0])
        best = min(best, e)
    return best
