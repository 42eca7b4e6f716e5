import numpy as np
import pytest

from chancomp.channel import (
    KrausSet,
    choi_from_kraus,
    random_channel,
    stinespring_isometry,
)
from chancomp.circuit import CNOT, MEASURE, TRACE, cnot_count
from chancomp.compiler import (
    ConvexMixture,
    compile_measured,
    compile_qcm,
    compile_random_qcm,
    mixture_choi,
    plan_measured,
    predict_upper_bound,
    reconstruct_dilation,
    verify_circuit,
)
from chancomp.simulator import circuit_to_kraus
from chancomp.synth import builtin_cost_model, n_iso

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def dephasing_like(p=0.25):
    return KrausSet(1, 1, [np.sqrt(1 - p) * I2, np.sqrt(p) * np.diag([1.0, -1.0])])


def count_measures(circ):
    return sum(1 for g in circ.gates if g.kind == MEASURE)


def test_plan_unitary_channel():
    plan = plan_measured(KrausSet(1, 1, [I2]))
    assert plan.k == 0 and plan.k_tilde == 0
    assert plan.stages == () and set(plan.finals) == {""}
    assert plan.final_measure_count == 0


def test_plan_rank2_square_channel():
    plan = plan_measured(dephasing_like())
    assert (plan.m, plan.n, plan.k) == (1, 1, 1)
    assert plan.k_tilde == 0 and plan.l == 1
    assert plan.finals[""].shape == (4, 2)
    assert plan.final_measure_count == 1


def test_plan_one_to_two_rank2():
    ks = random_channel(1, 2, 2, seed=3)
    plan = plan_measured(ks)
    assert (plan.k, plan.k_tilde, plan.l) == (1, 1, 1)
    assert len(plan.stages) == 1 and set(plan.stages[0]) == {""}
    assert plan.stages[0][""].shape == (4, 2)
    assert set(plan.finals) == {"0", "1"}
    assert all(v.shape == (4, 2) for v in plan.finals.values())
    assert plan.final_measure_count == 0


@pytest.mark.parametrize(
    "m,n,kr,seed",
    [(1, 1, 2, 0), (1, 2, 2, 1), (1, 2, 4, 2), (2, 1, 4, 3), (2, 2, 3, 4),
     (1, 3, 8, 5), (2, 2, 8, 6), (3, 2, 4, 7)],
)
def test_plan_reconstruction_identity(m, n, kr, seed):
    ks = random_channel(m, n, kr, seed)
    plan = plan_measured(ks)
    v = stinespring_isometry(ks).v
    assert np.linalg.norm(reconstruct_dilation(plan) - v) < 1e-8


def test_compile_measured_dephasing():
    ks = dephasing_like()
    circ = compile_measured(ks)
    assert circ.num_qubits == 2
    assert count_measures(circ) == 1
    assert verify_circuit(circ, ks) < 1e-8


def test_compile_measured_identity():
    ks = KrausSet(1, 1, [I2])
    circ = compile_measured(ks)
    assert count_measures(circ) == 0
    assert cnot_count(circ)[0] == 0
    assert verify_circuit(circ, ks) < 1e-10


def test_compile_measured_two_to_one():
    ks = random_channel(2, 1, 4, seed=11)
    circ = compile_measured(ks)
    assert circ.num_qubits == 3  # m + 1
    assert count_measures(circ) == 2
    assert verify_circuit(circ, ks) < 1e-8


def test_compile_measured_trace_edge_case():
    # n + k = m: V is a plain unitary, then k discarding measurements
    ks = random_channel(2, 1, 2, seed=13)
    circ = compile_measured(ks)
    assert circ.num_qubits == 3
    assert count_measures(circ) == 1
    assert cnot_count(circ)[0] == n_iso(2, 2)
    assert verify_circuit(circ, ks) < 1e-8


def test_compile_measured_state_preparation():
    ks = random_channel(0, 1, 2, seed=17)
    circ = compile_measured(ks)
    assert circ.num_qubits == 1
    assert circ.input_qubits == ()
    assert count_measures(circ) == 1
    assert verify_circuit(circ, ks) < 1e-8


def test_compile_measured_discard_all_outputs():
    ks = random_channel(1, 0, 2, seed=19)
    circ = compile_measured(ks)
    assert circ.output_qubits == ()
    assert count_measures(circ) == 1
    assert verify_circuit(circ, ks) < 1e-8


GRID = [
    (1, 1, 1, 21), (1, 1, 2, 22), (1, 1, 3, 23), (1, 1, 4, 24),
    (1, 2, 1, 25), (1, 2, 2, 26), (1, 2, 5, 27),
    (2, 1, 2, 28), (2, 1, 4, 29), (2, 1, 6, 30),
    (2, 2, 1, 31), (2, 2, 2, 32), (2, 2, 4, 33), (2, 2, 6, 34),
    (1, 3, 3, 35), (3, 1, 4, 36), (3, 2, 2, 37), (2, 3, 7, 38),
]


@pytest.mark.parametrize("m,n,kr,seed", GRID)
def test_compile_measured_grid(m, n, kr, seed):
    ks = random_channel(m, n, kr, seed)
    circ = compile_measured(ks)
    k = stinespring_isometry(ks).k
    # resource budgets
    assert circ.num_qubits == (n if m < n else m + 1)
    assert count_measures(circ) == k
    # CNOT count: uniform across branches and exactly the predicted value
    worst, uniform = cnot_count(circ)
    assert uniform
    assert worst == predict_upper_bound(m, n, k, builtin_cost_model())
    # channel oracle
    assert verify_circuit(circ, ks) < 1e-8


def test_compile_measured_force_k():
    ks = dephasing_like()
    circ = compile_measured(ks, force_k=2)
    assert count_measures(circ) == 2
    assert verify_circuit(circ, ks) < 1e-8


def test_predict_upper_bound_cases():
    cost = builtin_cost_model()
    assert predict_upper_bound(1, 2, 1, cost) == 2 * n_iso(1, 2)
    assert predict_upper_bound(2, 2, 0, cost) == n_iso(2, 2)
    assert predict_upper_bound(2, 1, 2, cost) == n_iso(2, 3)
    assert predict_upper_bound(2, 1, 1, cost) == n_iso(2, 2)  # n+k = m
    assert predict_upper_bound(1, 2, 2, cost) == 2 * n_iso(1, 2) + n_iso(1, 2)


def test_compile_qcm_unitary_channel():
    ks = KrausSet(1, 1, [X])
    circ = compile_qcm(ks)
    assert circ.num_qubits == 1
    assert not any(g.kind == TRACE for g in circ.gates)
    assert verify_circuit(circ, ks) < 1e-10


def test_compile_qcm_rank2():
    ks = dephasing_like()
    circ = compile_qcm(ks)
    assert circ.num_qubits == 2
    assert sum(1 for g in circ.gates if g.kind == TRACE) == 1
    assert verify_circuit(circ, ks) < 1e-8


def test_compile_qcm_rank4():
    ks = random_channel(1, 1, 4, seed=41)
    circ = compile_qcm(ks)
    assert circ.num_qubits == 3
    assert sum(1 for g in circ.gates if g.kind == TRACE) == 2
    assert verify_circuit(circ, ks) < 1e-8


@pytest.mark.parametrize("m,n,kr,seed", [(1, 2, 2, 42), (2, 1, 3, 43), (2, 2, 4, 44)])
def test_compile_qcm_grid(m, n, kr, seed):
    ks = random_channel(m, n, kr, seed)
    assert verify_circuit(compile_qcm(ks), ks) < 1e-8


def test_convex_mixture_validation():
    ks = KrausSet(1, 1, [I2])
    with pytest.raises(ValueError, match="sum to one"):
        ConvexMixture([(0.5, ks)])
    with pytest.raises(ValueError, match="positive"):
        ConvexMixture([(1.5, ks), (-0.5, ks)])


def test_compile_random_single_unitary():
    mix = ConvexMixture([(1.0, KrausSet(1, 1, [X]))])
    out = compile_random_qcm(mix)
    assert len(out) == 1 and out[0][0] == 1.0
    assert cnot_count(out[0][1])[0] == 0


def test_compile_random_mixture_matches_weighted_choi():
    mix = ConvexMixture([(0.5, KrausSet(1, 1, [I2])), (0.5, KrausSet(1, 1, [X]))])
    compiled = compile_random_qcm(mix)
    j = sum(p * choi_from_kraus(circuit_to_kraus(c)).j for p, c in compiled)
    assert np.linalg.norm(j - mixture_choi(mix).j) < 1e-8
    # the mixture is the fully dephased bit-flip channel; check explicitly
    expect = choi_from_kraus(KrausSet(1, 1, [I2 / np.sqrt(2), X / np.sqrt(2)])).j
    assert np.linalg.norm(j - expect) < 1e-8


def test_compile_random_rejects_high_rank_component():
    bad = random_channel(1, 1, 3, seed=45)  # rank 3 > 2^m = 2
    mix = ConvexMixture([(1.0, bad)])
    with pytest.raises(ValueError, match="not implementable"):
        compile_random_qcm(mix)
