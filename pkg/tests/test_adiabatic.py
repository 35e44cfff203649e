from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_hamiltonian
from hamlower.adiabatic import (
    FORBIDDEN_STATES,
    QUDIT_ENCODING,
    PathJob,
    PathRound,
    PolyPath,
    eval_path,
    gadgetize_path,
    gap_scan,
    qudit_penalty,
    toy_path,
)
from hamlower.errors import InvalidParameter, InvalidTerm, OutOfRange
from hamlower.gadgets import Coupling, mediator_gadget, three_to_two
from hamlower.pauli import Hamiltonian, PauliString

P = PauliString.parse


def H(n, *items):
    return Hamiltonian.from_labels(n, items)


def two_qubit_path():
    return PolyPath([H(2, (-1, "X0"), (-1, "X1")), H(2, (1, "X0"), (1, "X1"), (-1, "Z0 Z1"), (-0.5, "Z0"))])


def three_qubit_path():
    return PolyPath([H(3, (-1, "X0"), (-1, "X1"), (-1, "X2")),
                     H(3, (1, "X0"), (1, "X1"), (1, "X2"), (-1, "Z0 Z1 Z2"))])


def test_eval_path_and_range():
    p = toy_path()
    assert eval_path(p, 0.0).allclose(H(1, (0.5, ""), (-0.5, "X0")))
    assert eval_path(p, 1.0).allclose(H(1, (0.5, ""), (-0.5, "Z0")))
    with pytest.raises(OutOfRange):
        eval_path(p, 1.5)


def test_polypath_trims_and_round_trips():
    p = PolyPath([H(1, (1, "Z0")), H(1, (1, "X0")), Hamiltonian(1)])
    assert p.degree == 1
    q = PolyPath.from_dict(json.loads(p.to_json()))
    assert q.degree == 1 and all(a.allclose(b) for a, b in zip(p.components, q.components))
    with pytest.raises(InvalidParameter):
        PolyPath([])


def test_toy_gap_closed_form():
    scan = gap_scan(toy_path())
    assert scan.min_gap == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert scan.argmin == pytest.approx(0.5, abs=1e-4)
    assert np.allclose(scan.gap, np.sqrt((1 - scan.s) ** 2 + scan.s**2), atol=1e-12)
    assert scan.lipschitz_violations == []


def test_gap_scan_csv_and_dict():
    scan = gap_scan(toy_path(), grid=[0.0, 0.5, 1.0], refine=False)
    lines = scan.to_csv().splitlines()
    assert lines[0] == "s,lambda0,lambda1,gap" and len(lines) == 4
    assert scan.to_dict()["points"] == 3


def test_gap_scan_flags_degeneracy():
    scan = gap_scan(PolyPath([H(2, (1, "Z0"))]), grid=[0.0, 1.0])
    assert scan.degenerate.all() and scan.min_gap == 0.0


def test_gap_scan_rejects_bad_grid():
    with pytest.raises(OutOfRange):
        gap_scan(toy_path(), grid=[-0.1, 0.5])


def test_subdivision_round_degree_ledger():
    p = two_qubit_path()
    q = gadgetize_path(p, PathRound("subdivision", (PathJob(P("Z0 Z1"), (0,)),), 1e4))
    assert q.num_qubits == 3
    assert q.history == [(1, 2)]
    assert q.degree <= 2 * p.degree
    assert q.components[0].locality() <= 2


def test_three_to_two_round_degree():
    p = three_qubit_path()
    q = gadgetize_path(p, PathRound("three_to_two", (PathJob(P("Z0 Z1 Z2"), (0,), (1,)),), 1e6))
    assert q.degree == 2 and max(h.locality() for h in q.components) == 2


def test_gadgetize_path_rejects():
    p = two_qubit_path()
    job = PathJob(P("Z0 Z1"), (0,))
    with pytest.raises(InvalidParameter):
        gadgetize_path(p, PathRound("subdivision", (job,), 0.0))
    with pytest.raises(InvalidParameter):
        gadgetize_path(p, PathRound("fork", (job,), 1e3))
    with pytest.raises(InvalidParameter):
        gadgetize_path(p, PathRound("subdivision", (job, job), 1e3))
    with pytest.raises(InvalidTerm):
        gadgetize_path(p, PathRound("subdivision", (PathJob(P("Y0 Y1"), (0,)),), 1e3))
    with pytest.raises(InvalidTerm):
        gadgetize_path(p, PathRound("subdivision", (PathJob(P("Z0 Z1"), (0, 1)),), 1e3))


@settings(max_examples=20, deadline=None)
@given(s=st.floats(0.05, 1.0), delta=st.floats(1e2, 1e6))
def test_subdivided_path_matches_engine_at_fixed_s(s, delta):
    """Evaluating then gadgetizing agrees with gadgetizing then evaluating."""
    p = two_qubit_path()
    q = gadgetize_path(p, PathRound("subdivision", (PathJob(P("Z0 Z1"), (0,)),), delta))
    Hs = eval_path(p, s)
    c = Hs.coeff(P("Z0 Z1"))
    O = H(2, (1.0, "Z1")) - H(2, (c, "Z0"))
    ref = mediator_gadget(Hs, [Coupling("subdivision", O, (P("Z0 Z1"),))], delta, "subdivision").total
    assert eval_path(q, s).allclose(ref, atol=1e-9 * delta)


@settings(max_examples=10, deadline=None)
@given(s=st.floats(0.05, 1.0))
def test_three_to_two_path_matches_engine_at_fixed_s(s):
    p = three_qubit_path()
    delta = 1e6
    q = gadgetize_path(p, PathRound("three_to_two", (PathJob(P("Z0 Z1 Z2"), (0,), (1,)),), delta))
    Hs = eval_path(p, s)
    c = Hs.coeff(P("Z0 Z1 Z2"))
    ref = three_to_two(Hs.without([P("Z0 Z1 Z2")]), H(3, (c, "Z0")), H(3, (1, "Z1")), H(3, (1, "Z2")), delta).total
    assert eval_path(q, s).allclose(ref, atol=1e-9 * delta)


def test_two_round_pipeline_ledger():
    p = two_qubit_path()
    q = gadgetize_path(p, PathRound("subdivision", (PathJob(P("Z0 Z1"), (0,)),), 1e4))
    stub = next(t for t, _ in q.components[1].items() if t.weight == 2 and 2 in t.support)
    r = gadgetize_path(q, PathRound("subdivision", (PathJob(stub, (stub.support[0],)),), 1e8))
    assert len(r.history) == 2
    assert all(out <= 2 * inp for inp, out in r.history)


def test_qudit_encoding_and_penalty():
    codes = set(QUDIT_ENCODING.values())
    assert len(codes) == 6 and not codes & set(FORBIDDEN_STATES)
    assert len(codes | set(FORBIDDEN_STATES)) == 8
    pen = qudit_penalty([0, 1, 2], 3)
    assert pen.allclose(H(3, (0.25, ""), (-0.25, "Z2"), (0.25, "Z0 Z1"), (-0.25, "Z0 Z1 Z2")))
    M = kron_hamiltonian(pen)
    for b in FORBIDDEN_STATES:
        idx = b[0] + 2 * b[1] + 4 * b[2]
        assert M[idx, idx] == pytest.approx(1.0)
    for b in codes:
        idx = b[0] + 2 * b[1] + 4 * b[2]
        assert M[idx, idx] == pytest.approx(0.0)
    with pytest.raises(InvalidParameter):
        qudit_penalty([0, 0, 1], 3)
