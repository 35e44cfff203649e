from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_hamiltonian, kron_string, random_hamiltonian
from hamlower.errors import DenseDimensionExceeded, DimensionMismatch, NonHermitianResult
from hamlower.pauli import (
    Hamiltonian,
    PauliString,
    anticommutator,
    apply,
    canonicalize,
    matrix_to_hamiltonian,
    multiply,
    norm,
    product,
    square_half_difference,
    to_matrix,
)

P = PauliString.parse


def H(n, *items):
    return Hamiltonian.from_labels(n, items)


def test_multiply_examples():
    xz = multiply(P("X0"), P("Z0"))
    assert xz.unphased() == P("Y0") and xz.scalar == -1j
    zz = multiply(P("Z0"), P("Z0"))
    assert zz.unphased() == PauliString() and zz.scalar == 1
    d = multiply(P("X0"), P("Z1"))
    assert d == P("X0 Z1") and d.scalar == 1


def test_cyclic_products():
    assert multiply(P("X0"), P("Y0")) == PauliString(0, 1, 1)
    assert multiply(P("Y0"), P("Z0")) == PauliString(1, 0, 1)
    assert multiply(P("Z0"), P("X0")) == PauliString(1, 1, 1)


def _all_strings(n):
    for axes in itertools.product("IXYZ", repeat=n):
        yield PauliString.from_axes({q: a for q, a in enumerate(axes) if a != "I"})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_multiply_matches_matrices_exhaustive(n):
    strings = list(_all_strings(n))
    mats = {s: kron_string(s, n) for s in strings}
    for p in strings:
        for q in strings:
            r = multiply(p, q)
            assert np.array_equal(kron_string(r, n), mats[p] @ mats[q])


@given(st.integers(0, 63), st.integers(0, 63), st.integers(0, 63), st.integers(0, 63), st.integers(0, 63), st.integers(0, 63))
def test_multiply_associative(a, b, c, d, e, f):
    p, q, r = PauliString(a, b), PauliString(c, d), PauliString(e, f)
    assert multiply(multiply(p, q), r) == multiply(p, multiply(q, r))


def test_canonicalize_examples():
    zz = P("Z0 Z1")
    assert canonicalize(Hamiltonian(2, [(zz, 0.5), (zz, 0.5)])) == H(2, (1.0, "Z0 Z1"))
    assert len(canonicalize(Hamiltonian(1, [(P("X0"), 1e-15)]), 1e-12)) == 0
    assert len(Hamiltonian(1, [(P("Z0"), 1.0), (P("Z0"), -1.0)])) == 0


def test_canonical_order_is_deterministic():
    a = H(3, (1, "Z2"), (2, "X0 X1"), (3, "I"), (4, "X0"))
    b = H(3, (4, "X0"), (3, "I"), (2, "X0 X1"), (1, "Z2"))
    assert list(a.terms) == list(b.terms)
    assert list(a.terms)[0] == PauliString()


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_canonicalize_idempotent(seed):
    h = random_hamiltonian(np.random.default_rng(seed), 3, 8)
    once = canonicalize(h)
    assert canonicalize(once) == once
    assert np.allclose(to_matrix(once), kron_hamiltonian(h), atol=1e-12 * (len(h) + 1))


def test_square_half_difference_examples():
    assert square_half_difference(H(2, (1, "Z0")), H(2, (1, "Z1"))) == H(2, (1, "I"), (-1, "Z0 Z1"))
    assert len(square_half_difference(H(1, (1, "X0")), H(1, (1, "X0")))) == 0
    assert square_half_difference(H(1, (1, "X0")), H(1, (1, "Y0"))) == H(1, (1, "I"))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_square_half_difference_matches_matrices(seed):
    rng = np.random.default_rng(seed)
    A = random_hamiltonian(rng, 4, 4)
    B = random_hamiltonian(rng, 4, 4)
    MA, MB = kron_hamiltonian(A), kron_hamiltonian(B)
    expect = (MB - MA) @ (MB - MA) / 2
    assert np.allclose(to_matrix(square_half_difference(A, B)), expect, atol=1e-12)


def test_product_and_anticommutator(rng):
    A = random_hamiltonian(rng, 3, 5)
    MA = kron_hamiltonian(A)
    assert np.allclose(to_matrix(product(A, A)), MA @ MA, atol=1e-12)
    B = random_hamiltonian(rng, 3, 5)
    MB = kron_hamiltonian(B)
    assert np.allclose(to_matrix(anticommutator(A, B)), MA @ MB + MB @ MA, atol=1e-12)
    with pytest.raises(NonHermitianResult):
        product(H(1, (1, "X0")), H(1, (1, "Z0")))


def test_to_matrix_examples():
    assert np.array_equal(to_matrix(H(1, (1, "Z0"))), np.diag([1.0, -1.0]))
    assert np.array_equal(to_matrix(H(2, (1, "X0 X1"))), np.fliplr(np.eye(4)))
    assert np.array_equal(to_matrix(Hamiltonian(2)), np.zeros((4, 4)))
    with pytest.raises(DenseDimensionExceeded):
        to_matrix(Hamiltonian(15))


def test_to_matrix_hermitian_and_matches_oracle(rng):
    h = random_hamiltonian(rng, 4, 12)
    M = to_matrix(h)
    assert np.allclose(M, M.conj().T)
    assert np.allclose(M, kron_hamiltonian(h), atol=1e-12)


def test_apply_examples():
    assert np.array_equal(apply(H(1, (1, "X0")), np.array([1.0, 0.0])), [0.0, 1.0])
    assert np.array_equal(apply(H(1, (1, "Z0")), np.array([0.0, 1.0])), [0.0, -1.0])
    with pytest.raises(DimensionMismatch):
        apply(H(2, (1, "Z0")), np.ones(2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_apply_matches_dense(seed):
    rng = np.random.default_rng(seed)
    h = random_hamiltonian(rng, 3, 6)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    ref = to_matrix(h) @ v
    assert np.linalg.norm(apply(h, v) - ref) <= 1e-12 * max(1.0, np.linalg.norm(ref))


def test_norm_examples():
    assert norm(H(2, (1, "Z0 Z1")), "exact") == pytest.approx(1.0)
    h = H(1, (1, "X0"), (1, "Z0"))
    assert norm(h, "upper_bound") == 2.0
    assert norm(h, "exact") == pytest.approx(np.sqrt(2))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_norm_upper_bound_dominates(seed):
    h = random_hamiltonian(np.random.default_rng(seed), 4, 8)
    assert norm(h, "upper_bound") >= norm(h, "exact") - 1e-12


def test_json_round_trip(rng):
    h = random_hamiltonian(rng, 4, 10)
    text = h.to_json()
    assert text.endswith("\n")
    assert Hamiltonian.from_json(text) == h
    ident = Hamiltonian.from_dict({"num_qubits": 1, "terms": [{"coeff": 2.0, "paulis": []}]})
    assert ident == Hamiltonian.identity(1, 2.0)


def test_matrix_to_hamiltonian_round_trip(rng):
    h = random_hamiltonian(rng, 3, 10)
    back = matrix_to_hamiltonian(to_matrix(h), [0, 1, 2], 3)
    assert back.allclose(h, 1e-12)
    # relabelled qubits
    proj = np.diag([0.0, 0.0, 0.0, 1.0])
    got = matrix_to_hamiltonian(proj, [4, 1], 5)
    assert got.allclose(H(5, (0.25, "I"), (-0.25, "Z4"), (-0.25, "Z1"), (0.25, "Z1 Z4")))


def test_rejects_bad_terms():
    with pytest.raises(ValueError):
        Hamiltonian(1, [(P("X1"), 1.0)])
    with pytest.raises(NonHermitianResult):
        Hamiltonian(1, [(PauliString(1, 0, 1), 1.0)])
