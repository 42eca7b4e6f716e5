import numpy as np
import pytest

from chancomp.circuit import (
    CNOT,
    MEASURE,
    RESET,
    RX,
    RY,
    RZ,
    TRACE,
    U,
    X,
    Circuit,
    CircuitParseError,
    Gate,
    cnot_count,
    parse,
    ry_matrix,
    rz_matrix,
    serialize,
    u_matrix,
    zyz_decompose,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def random_unitary(rng):
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_zyz_identity():
    assert zyz_decompose(np.eye(2)) == (0.0, 0.0, 0.0, 0.0)


@pytest.mark.parametrize("theta", [0.3, 1.0, 2.9])
def test_zyz_pure_y_rotation(theta):
    a, b, c, d = zyz_decompose(ry_matrix(theta))
    assert abs(a) < 1e-12 and abs(b) < 1e-12 and abs(d) < 1e-12
    assert abs(c - theta) < 1e-12


def test_zyz_hadamard():
    a, b, c, d = zyz_decompose(H)
    assert np.allclose([a, b, c, d], [np.pi / 2, 0.0, np.pi / 2, np.pi])
    assert np.linalg.norm(u_matrix(a, b, c, d) - H) < 1e-12


@pytest.mark.parametrize("seed", range(40))
def test_zyz_reconstructs_random_unitaries(seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(rng)
    a, b, c, d = zyz_decompose(u)
    assert np.linalg.norm(u_matrix(a, b, c, d) - u) < 1e-10
    assert 0.0 <= c <= np.pi
    for ang in (a, b, d):
        assert -np.pi < ang <= np.pi + 1e-15


def test_zyz_degenerate_sets_delta_zero():
    for u in (np.diag([1j, -1j]), rz_matrix(1.1), np.array([[0, 1], [1, 0]], dtype=complex)):
        a, b, c, d = zyz_decompose(u)
        assert d == 0.0
        assert np.linalg.norm(u_matrix(a, b, c, d) - u) < 1e-10


@pytest.mark.parametrize("seed", range(10))
def test_zyz_idempotent(seed):
    rng = np.random.default_rng(100 + seed)
    u = random_unitary(rng)
    params1 = zyz_decompose(u)
    params2 = zyz_decompose(u_matrix(*params1))
    assert np.allclose(params1, params2, atol=1e-8)


def test_zyz_rejects_non_unitary():
    with pytest.raises(ValueError, match="unitary"):
        zyz_decompose(np.ones((2, 2)))


def test_gate_validation():
    with pytest.raises(ValueError, match="control equals target"):
        Gate(CNOT, (1, 1))
    with pytest.raises(ValueError, match="angle"):
        Gate(RY, (0,), (float("nan"),))
    with pytest.raises(ValueError, match="register"):
        Gate(MEASURE, (0,))
    with pytest.raises(ValueError, match="own register"):
        Gate(MEASURE, (0,), creg=0, condition=((0, 1),))


def test_circuit_validation():
    with pytest.raises(ValueError, match="traced"):
        Circuit(2, (1,), (0,), (Gate(TRACE, (0,)), Gate(X, (0,))), 0)
    with pytest.raises(ValueError, match="duplicate"):
        Circuit(2, (1, 1), (0,), (), 0)
    with pytest.raises(ValueError, match="out of range"):
        Circuit(1, (0,), (0,), (Gate(X, (3,)),), 0)


def test_cnot_count_empty_and_single():
    empty = Circuit(1, (0,), (0,), (), 0)
    assert cnot_count(empty) == (0, True)
    one = Circuit(2, (0, 1), (0, 1), (Gate(CNOT, (0, 1)),), 0)
    assert cnot_count(one) == (1, True)


def test_cnot_count_complementary_conditions():
    gates = (
        Gate(CNOT, (0, 1), condition=((0, 0),)),
        Gate(CNOT, (0, 1), condition=((0, 1),)),
    )
    c = Circuit(2, (0, 1), (0, 1), gates, 1)
    assert cnot_count(c) == (1, True)


def test_cnot_count_nonuniform():
    gates = (Gate(CNOT, (0, 1)), Gate(CNOT, (0, 1), condition=((0, 1),)))
    c = Circuit(2, (0, 1), (0, 1), gates, 1)
    assert cnot_count(c) == (2, False)


def test_cnot_count_concatenation_disjoint_registers():
    a = tuple(Gate(CNOT, (0, 1), condition=((0, b),)) for b in (0, 1))
    b = tuple(Gate(CNOT, (1, 2), condition=((1, b),)) for b in (0, 1))
    ca = Circuit(3, (0,), (0,), a, 2)
    cb = Circuit(3, (0,), (0,), b, 2)
    cab = Circuit(3, (0,), (0,), a + b, 2)
    assert cnot_count(cab)[0] == cnot_count(ca)[0] + cnot_count(cb)[0]
    assert cnot_count(cab)[1]


def sample_circuit():
    gates = (
        Gate(U, (0,), (0.1, -0.2, 0.3, 3.0)),
        Gate(RX, (1,), (0.5,)),
        Gate(RY, (1,), (-1.5,)),
        Gate(RZ, (0,), (2.25,)),
        Gate(CNOT, (0, 1)),
        Gate(MEASURE, (0,), creg=0),
        Gate(RESET, (0,)),
        Gate(X, (1,), condition=((0, 1),)),
        Gate(U, (2,), (0.0, 1.0, 2.0, -3.0), condition=((0, 0), (1, 1))),
        Gate(MEASURE, (1,), creg=1),
        Gate(TRACE, (0,)),
    )
    return Circuit(3, (1, 2), (2,), gates, 2)


def test_serialize_empty_circuit():
    c = Circuit(1, (0,), (0,), (), 0)
    text = serialize(c)
    assert text.splitlines() == ["QUBITS 1", "CREGS 0", "INPUTS q0", "OUTPUTS q0"]
    assert parse(text) == c


def test_round_trip_each_gate_kind():
    c = sample_circuit()
    assert parse(serialize(c)) == c


def test_parse_ignores_comments_and_blank_lines():
    text = serialize(sample_circuit())
    text = "# generated\n\n" + text.replace("CNOT q0 q1", "CNOT q0 q1  # entangle")
    assert parse(text) == sample_circuit()


@pytest.mark.parametrize("seed", range(20))
def test_round_trip_fuzzed_circuits(seed):
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, 5))
    nregs = int(rng.integers(1, 4))
    gates = []
    measured_regs = []
    for _ in range(int(rng.integers(0, 25))):
        kind = rng.choice([RX, RY, RZ, U, X, CNOT, MEASURE])
        cond = None
        if measured_regs and rng.random() < 0.3:
            cond = ((int(rng.choice(measured_regs)), int(rng.integers(0, 2))),)
        q = int(rng.integers(0, p))
        if kind == CNOT:
            if p < 2:
                continue
            q2 = int(rng.integers(0, p))
            if q2 == q:
                q2 = (q + 1) % p
            gates.append(Gate(CNOT, (q, q2), condition=cond))
        elif kind == MEASURE:
            reg = len(measured_regs)
            if reg >= nregs:
                continue
            gates.append(Gate(MEASURE, (q,), creg=reg, condition=None))
            measured_regs.append(reg)
        elif kind == U:
            gates.append(Gate(U, (q,), tuple(rng.uniform(-7, 7, 4)), condition=cond))
        elif kind == X:
            gates.append(Gate(X, (q,), condition=cond))
        else:
            gates.append(Gate(kind, (q,), (float(rng.uniform(-7, 7)),), condition=cond))
    c = Circuit(p, tuple(range(p)), tuple(range(p)), tuple(gates), nregs)
    assert parse(serialize(c)) == c


@pytest.mark.parametrize(
    "text,frag",
    [
        ("QUBITS x", "bad QUBITS"),
        ("QUBITS 1\nCREGS 0\nINPUTS\nOUTPUTS\nFOO q0", "unknown instruction"),
        ("QUBITS 1\nCREGS 0\nINPUTS\nOUTPUTS\nRY q0", "expected 1 angle"),
        ("QUBITS 1\nCREGS 0\nINPUTS\nOUTPUTS\nRY w0 1.0", "expected qubit"),
        ("QUBITS 1\nCREGS 1\nINPUTS\nOUTPUTS\nIF c0=2 X q0", "must be 0 or 1"),
        ("QUBITS 1\nCREGS 0\nINPUTS\nOUTPUTS\nMEASURE q0", "needs qubit and register"),
        ("CREGS 0\nINPUTS\nOUTPUTS\n", "missing QUBITS"),
    ],
)
def test_parse_errors_carry_line_and_reason(text, frag):
    with pytest.raises(CircuitParseError, match=frag):
        parse(text)


def test_parse_error_reports_line_number():
    text = "QUBITS 1\nCREGS 0\nINPUTS\nOUTPUTS\nX q0\nBAD q0\n"
    with pytest.raises(CircuitParseError, match="line 6"):
        parse(text)


def test_angles_survive_17_digit_round_trip():
    angle = 0.1 + 0.2  # classic non-representable decimal
    c = Circuit(1, (0,), (0,), (Gate(RZ, (0,), (angle,)),), 0)
    assert parse(serialize(c)).gates[0].params[0] == angle
