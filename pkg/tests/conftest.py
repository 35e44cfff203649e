from __future__ import annotations

import numpy as np
import pytest

from hamlower.pauli import Hamiltonian, PauliString

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_string(s: PauliString, n: int) -> np.ndarray:
    """Independent Kronecker-product oracle (qubit 0 is the least significant factor)."""
    M = np.ones((1, 1), dtype=complex)
    for q in range(n):
        M = np.kron(_SINGLE[s.axis(q)], M)
    return s.scalar * M


def kron_hamiltonian(H: Hamiltonian) -> np.ndarray:
    dim = 1 << H.num_qubits
    M = np.zeros((dim, dim), dtype=complex)
    for s, c in H.items():
        M += c * kron_string(s, H.num_qubits)
    return M


def random_hamiltonian(rng: np.random.Generator, n: int, k: int, max_weight: int | None = None) -> Hamiltonian:
    max_weight = n if max_weight is None else max_weight
    terms = []
    for _ in range(k):
        w = int(rng.integers(0, max_weight + 1))
        qs = rng.choice(n, size=w, replace=False)
        axes = {int(q): "XYZ"[int(rng.integers(3))] for q in qs}
        terms.append((PauliString.from_axes(axes), float(rng.normal())))
    return Hamiltonian(n, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one summary line per acceptance criterion, shown after the test run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
