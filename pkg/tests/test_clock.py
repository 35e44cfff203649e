from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import kron_hamiltonian
from hamlower.clock import (
    CircuitIR,
    Gate,
    build_h5,
    history_state,
    layout_and_schedule,
    legal_basis,
    lemma1_check,
)
from hamlower.errors import DenseDimensionExceeded, MalformedCircuit

X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
# control column 1, target column 0 (little-endian local index b0 + 2 b1)
CNOT10 = np.eye(4, dtype=complex)[[0, 3, 2, 1]]


def accept_x():
    return CircuitIR(0, 1, [Gate((0,), X)])


def cnot_circuit():
    return CircuitIR(0, 2, [Gate((1,), X), Gate((0, 1), CNOT10)])


def test_gate_validation():
    with pytest.raises(MalformedCircuit):
        Gate((0, 0), np.eye(4))
    with pytest.raises(MalformedCircuit):
        Gate((0,), np.eye(4))
    with pytest.raises(MalformedCircuit):
        Gate((0,), np.array([[1, 1], [0, 1]]))


def test_circuit_validation():
    with pytest.raises(MalformedCircuit):
        CircuitIR(0, 1, [Gate((1,), X)])
    with pytest.raises(MalformedCircuit):
        CircuitIR(2, 1, [None])
    with pytest.raises(MalformedCircuit):
        CircuitIR.from_round_lists(0, 2, [[Gate((0,), X), Gate((1,), X)]])


def test_circuit_json_round_trip():
    c = cnot_circuit()
    back = CircuitIR.from_json(json.dumps(c.to_dict()))
    assert back.N == 2 and back.R == 2
    assert np.allclose(back.rounds[1].matrix, CNOT10)


@pytest.mark.parametrize("bad", [{"N": 1}, {"N": 1, "n_inputs": 0, "rounds": [{"gates": [{"matrix_re": 1}]}]}])
def test_circuit_from_dict_rejects(bad):
    with pytest.raises(MalformedCircuit):
        CircuitIR.from_dict(bad)


def test_layout_counts_and_schedule():
    L = layout_and_schedule(cnot_circuit())
    assert (L.M, L.T) == (4, 6)
    assert [s.kind for s in L.steps] == ["identity", "gate", "swap", "swap", "gate", "idle"]
    assert L.q_out == 3
    # every computational qubit is acted on at most twice
    assert max(L.ops_per_qubit().values()) <= 2
    assert L.t_q == {0: 1, 1: 2, 3: 3, 2: 4}
    side = L.sidecar()
    assert side["T"] == 6 and len(side["schedule"]) == 6


def test_h5_is_five_local_and_positive():
    ch = build_h5(layout_and_schedule(cnot_circuit()))
    H = ch.total
    assert H.locality() <= 5
    assert ch.H_clock.locality() == 2


def test_legal_basis_size():
    L = layout_and_schedule(cnot_circuit())
    assert legal_basis(L).size == (L.T + 1) << L.M


def test_history_state_zero_energy_kron_oracle():
    L = layout_and_schedule(accept_x())
    H = kron_hamiltonian(build_h5(L).total)
    # independent history state: (|0>|c=0> + |1>|c=1>) / sqrt 2, qubit 0 least significant
    psi = np.zeros(4, dtype=complex)
    psi[0b00] = psi[0b11] = 1 / np.sqrt(2)
    assert abs(np.vdot(psi, H @ psi)) < 1e-12
    assert np.allclose(history_state(L, np.array([1.0])), psi)


def test_history_state_respects_dense_cap():
    with pytest.raises(DenseDimensionExceeded):
        history_state(layout_and_schedule(cnot_circuit()), np.array([1.0]), dense_cap=4)


def test_history_witness_validation():
    L = layout_and_schedule(CircuitIR(1, 1, [Gate((0,), I2)]))
    with pytest.raises(ValueError):
        lemma1_check(L, np.array([1.0]))
    with pytest.raises(ValueError):
        lemma1_check(L, np.array([1.0, 1.0]))


def test_lemma1_accepting():
    rep = lemma1_check(layout_and_schedule(cnot_circuit()), np.array([1.0]))
    assert rep["lambda"] <= 1e-10
    assert rep["history_energy"] <= 1e-12
    assert rep["illegal_min"] >= 1 - 1e-10


def test_lemma1_rejecting_positive():
    rep = lemma1_check(layout_and_schedule(CircuitIR(0, 2, [None, None])), np.array([1.0]))
    assert rep["lambda"] > 1e-6


def test_lemma1_legal_restriction_matches_full_spectrum():
    L = layout_and_schedule(accept_x())
    rep = lemma1_check(L, np.array([1.0]))
    full = np.linalg.eigvalsh(kron_hamiltonian(build_h5(L).total))
    assert rep["lambda"] == pytest.approx(full[0], abs=1e-12)


def test_illegal_sector_lanczos_matches_dense():
    L = layout_and_schedule(CircuitIR(0, 2, [None, None]))
    dense = lemma1_check(L)
    sparse = lemma1_check(L, illegal_cap_dim=0)
    assert sparse["illegal_method"] == "lanczos"
    assert sparse["illegal_min"] == pytest.approx(dense["illegal_min"], abs=1e-9)
    assert sparse["illegal_leakage"] == 0.0
