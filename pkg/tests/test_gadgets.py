from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import kron_hamiltonian
from hamlower.errors import (
    InvalidParameter,
    InvalidTerm,
    MismatchedAxis,
    NotCrossing,
    NotFactorable,
    OverlappingJobs,
    PlanInfeasible,
    SharedSupport,
)
from hamlower.gadgets import (
    balanced_split,
    choose_delta,
    cross_coupling,
    cross_gadget,
    fork_coupling,
    fork_gadget,
    implied_epsilon,
    mediator_gadget,
    minimal_delta,
    reduce_k_to_2,
    subdivide,
    subdivide_parallel,
    term_factors,
    three_local_factors,
    three_to_two,
    triangle_gadget,
)
from hamlower.pauli import Hamiltonian, PauliString, norm, to_matrix
from hamlower.spectral import self_energy_series

P = PauliString.parse
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


def H(n, *items):
    return Hamiltonian.from_labels(n, items)


def test_choose_delta_inverts_implied_epsilon():
    d = choose_delta(1.5, 0.7, 1e-2)
    assert implied_epsilon(1.5, 0.7, d) == pytest.approx(1e-2)
    assert d == pytest.approx((1.5 + math.sqrt(2) * 0.7) ** 6 / 1e-4)


@pytest.mark.parametrize("args", [(1.0, 1.0, 0.0), (1.0, 0.0, 0.1), (-1.0, 1.0, 0.1)])
def test_choose_delta_rejects(args):
    with pytest.raises(InvalidParameter):
        choose_delta(*args)


def test_choose_delta_rejects_small_c2():
    with pytest.raises(InvalidParameter):
        choose_delta(1.0, 1.0, 0.1, c2=1.0)


def test_minimal_delta_is_tight():
    h, o = 2.0, 3.0
    d = minimal_delta(h, o)
    assert h + math.sqrt(d / 2) * o == pytest.approx(d / 2)


def test_term_factors_norms_and_sign():
    A, B = term_factors(-4.0, P("X0 Y1 Z2"), [0], 3)
    assert norm(A) == pytest.approx(2.0) and norm(B) == pytest.approx(2.0)
    prod = kron_hamiltonian(A) @ kron_hamiltonian(B)
    assert np.allclose(prod, kron_hamiltonian(H(3, (-4.0, "X0 Y1 Z2"))))


@pytest.mark.parametrize("side", [[], [0, 1], [3]])
def test_term_factors_rejects_bad_split(side):
    with pytest.raises(NotFactorable):
        term_factors(1.0, P("Z0 Z1"), side, 2)


def test_subdivision_matches_hand_built_matrix():
    """H0 + V assembled from Kronecker products of the defining operators."""
    delta, c = 50.0, 0.8
    app = subdivide(H(2, (c, "Z0 Z1"), (0.3, "X0")), P("Z0 Z1"), [0], delta)
    assert app.mediators == [2]

    def k(a, b, w):  # qubit 0 least significant
        return np.kron(w, np.kron(b, a))

    root = math.sqrt(c)
    O = -root * k(Z, I2, I2) + root * k(I2, Z, I2)
    O_only = -root * np.kron(I2, Z) + root * np.kron(Z, I2)
    O2 = O_only @ O_only
    H_else = 0.3 * k(X, I2, I2) + np.kron(I2, c * np.kron(Z, Z) + O2 / 2)
    proj1 = k(I2, I2, (I2 - Z) / 2)
    Xw = k(I2, I2, X)
    ref = delta * proj1 + H_else + math.sqrt(delta / 2) * (O @ Xw)
    assert np.allclose(to_matrix(app.total), ref, atol=1e-12)


def test_subdivision_preserves_locality_and_removes_term():
    Ht = H(4, (1.0, "Z0 Z1 Z2 Z3"))
    app = subdivide(Ht, P("Z0 Z1 Z2 Z3"), [0, 1], 1e3)
    assert app.total.coeff(P("Z0 Z1 Z2 Z3")) == 0.0
    assert app.total.locality() == 3
    assert app.norm_condition


def test_parallel_rejects_duplicate_jobs():
    Ht = H(2, (1.0, "Z0 Z1"))
    with pytest.raises(OverlappingJobs):
        subdivide_parallel(Ht, [(P("Z0 Z1"), [0]), (P("Z0 Z1"), [1])], 100.0)


def test_subdivide_missing_term():
    with pytest.raises(InvalidTerm):
        subdivide(H(2, (1.0, "X0 X1")), P("Z0 Z1"), [0], 100.0)


def test_mediator_gadget_rejects_nonpositive_delta():
    with pytest.raises(InvalidParameter):
        subdivide(H(2, (1.0, "Z0 Z1")), P("Z0 Z1"), [0], 0.0)


def test_parallel_gadget_has_no_cross_terms():
    Ht = H(4, (1.0, "Z0 Z1"), (0.8, "X2 X3"), (0.3, "X1 X2"))
    app = subdivide_parallel(Ht, [(P("Z0 Z1"), [0]), (P("X2 X3"), [2])], 1e4)
    sp = app.split()
    S = self_energy_series(sp, 0.0, 2)
    assert np.abs(S - sp.project_low(app.effective())).max() < 1e-10


@pytest.mark.parametrize("balanced", [False, True])
def test_cross_coupling_regenerates_terms(balanced):
    Ht = H(4, (0.7, "X0 Z3"), (-1.3, "Y1 X2"))
    cp = cross_coupling(Ht, P("X0 Z3"), P("Y1 X2"), balanced=balanced)
    app = mediator_gadget(Ht, [cp], 1e5, "cross")
    sp = app.split()
    S = self_energy_series(sp, 0.0, 2)
    assert np.abs(S - sp.project_low(app.effective())).max() < 1e-10


def test_balanced_cross_has_smaller_coupling():
    Ht = H(4, (9.0, "X0 Z3"), (4.0, "Y1 X2"))
    plain = cross_coupling(Ht, P("X0 Z3"), P("Y1 X2"))
    bal = cross_coupling(Ht, P("X0 Z3"), P("Y1 X2"), balanced=True)
    assert norm(bal.operator) < norm(plain.operator)


def test_cross_gadget_needs_geometric_crossing():
    Ht = H(4, (1.0, "Z0 Z3"), (1.0, "Z1 Z2"))
    crossing = {0: (0, 0), 3: (1, 1), 1: (0, 1), 2: (1, 0)}
    app = cross_gadget(Ht, (P("Z0 Z3"), P("Z1 Z2")), 1e3, crossing)
    assert app.positions[4] == (0.5, 0.5)
    apart = {0: (0, 0), 3: (1, 0), 1: (0, 1), 2: (1, 1)}
    with pytest.raises(NotCrossing):
        cross_gadget(Ht, (P("Z0 Z3"), P("Z1 Z2")), 1e3, apart)


def test_cross_rejects_shared_endpoint():
    Ht = H(3, (1.0, "Z0 Z1"), (1.0, "Z1 Z2"))
    with pytest.raises(NotCrossing):
        cross_coupling(Ht, P("Z0 Z1"), P("Z1 Z2"))


@pytest.mark.parametrize("balanced", [False, True])
def test_fork_generates_new_edge(balanced):
    Ht = H(3, (0.6, "Z0 X1"), (-0.9, "Z0 Y2"))
    cp = fork_coupling(Ht, 0, P("Z0 X1"), P("Z0 Y2"), balanced=balanced)
    app = mediator_gadget(Ht, [cp], 1e5, "fork")
    assert app.total.coeff(P("X1 Y2")) != 0.0
    degrees = [s for s, _ in app.total.items() if s.weight == 2 and 0 in s.support]
    assert {s.axis(0) for s in degrees} <= {"Z"}
    sp = app.split()
    assert np.abs(self_energy_series(sp, 0.0) - sp.project_low(app.effective())).max() < 1e-10


def test_fork_rejects_mismatched_axes():
    Ht = H(3, (1.0, "Z0 X1"), (1.0, "X0 X2"))
    with pytest.raises(MismatchedAxis):
        fork_gadget(Ht, 0, P("Z0 X1"), P("X0 X2"), 1e3)


def test_fork_rejects_disjoint_edges():
    Ht = H(4, (1.0, "Z0 X1"), (1.0, "Z2 X3"))
    with pytest.raises(InvalidTerm):
        fork_gadget(Ht, 0, P("Z0 X1"), P("Z2 X3"), 1e3)


def test_three_local_factors_product():
    A, B, C = three_local_factors(-8.0, P("X0 Y1 Z2"), 3)
    M = kron_hamiltonian(A) @ kron_hamiltonian(B) @ kron_hamiltonian(C)
    assert np.allclose(M, kron_hamiltonian(H(3, (-8.0, "X0 Y1 Z2"))))
    assert all(norm(h) == pytest.approx(2.0) for h in (A, B, C))


def test_three_to_two_is_two_local_and_converges():
    A, B, C = three_local_factors(1.0, P("Z0 Z1 Z2"), 3)
    errs = []
    for d in (1e6, 1e8):
        app = three_to_two(Hamiltonian(3), A, B, C, d)
        assert app.total.locality() == 2
        lam = np.linalg.eigvalsh(to_matrix(app.total))
        low = lam[lam < d / 2]
        target = np.linalg.eigvalsh(app.split().project_low(app.effective()))
        errs.append(np.abs(low - target).max())
    assert errs[1] < errs[0] < 0.1


def test_three_to_two_shared_support():
    A = H(3, (1.0, "Z0"))
    with pytest.raises(SharedSupport):
        three_to_two(Hamiltonian(3), A, H(3, (1.0, "Z1")), H(3, (1.0, "X0")), 1e6)


def test_three_to_two_degenerate_warns():
    A = H(3, (1.0, "Z0"))
    with pytest.warns(RuntimeWarning):
        app = three_to_two(Hamiltonian(3), A, A, H(3, (1.0, "Z2")), 1e6)
    assert app.warnings


def test_triangle_gadget_plan():
    Ht = H(3, (1.0, "Z0 X1"), (0.5, "Z0 X2"))
    plan = triangle_gadget(Ht, 0, P("Z0 X1"), P("Z0 X2"), (1e3, 1e6))
    assert [a.kind for a in plan.rounds] == ["parallel_subdivision", "fork"]
    out = plan.output
    at0 = [s for s, _ in out.items() if s.weight == 2 and 0 in s.support]
    assert len(at0) == 1


def test_reduce_k_to_2_output_is_two_local():
    Ht = H(5, (1.0, "Z0 Z1 Z2 Z3 Z4"), (0.5, "X0"))
    plan = reduce_k_to_2(Ht, deltas=[1e3, 1e4, 1e8])
    assert plan.output.locality() == 2
    rows = plan.ledger()
    assert [r["round"] for r in rows] == list(range(len(plan.rounds)))
    assert rows[-1]["locality"] == 2
    assert all(r["epsilon_estimate"] > 0 for r in rows)


def test_reduce_k_to_2_formula_mode():
    plan = reduce_k_to_2(H(4, (1.0, "Z0 Z1 Z2 Z3")), epsilon=0.1)
    assert plan.output.locality() == 2
    assert all(a.delta > 1.0 for a in plan.rounds)


def test_reduce_k_to_2_needs_gap_source():
    with pytest.raises(PlanInfeasible):
        reduce_k_to_2(H(4, (1.0, "Z0 Z1 Z2 Z3")))
    with pytest.raises(PlanInfeasible):
        reduce_k_to_2(H(4, (1.0, "Z0 Z1 Z2 Z3")), deltas=[1e3])


def test_balanced_split():
    assert balanced_split(P("X0 X2 X5")) == [0, 2]
    assert balanced_split(P("X1 X3 X4 X6")) == [1, 3]


_AXES = st.sampled_from("XYZ")


@settings(max_examples=30, deadline=None)
@given(a=_AXES, b=_AXES, c=st.floats(0.2, 3.0), sign=st.sampled_from([-1.0, 1.0]), field=st.floats(-1, 1))
def test_subdivision_series_reproduces_target(a, b, c, sign, field):
    Ht = Hamiltonian(2, [(PauliString.from_axes({0: a, 1: b}), sign * c), (P("X0"), field)])
    app = subdivide(Ht, PauliString.from_axes({0: a, 1: b}), [0], 1e4)
    sp = app.split()
    S = self_energy_series(sp, 0.0, 2)
    assert np.abs(S - sp.project_low(app.effective())).max() < 1e-9
    # the mediator couples through one 2-local operator per side
    assert app.total.locality() == 2
