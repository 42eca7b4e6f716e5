import numpy as np
import pytest

from chancomp.channel import (
    ChoiMatrix,
    KrausSet,
    channel_from_json,
    channel_to_json,
    choi_distance,
    choi_from_kraus,
    is_extreme,
    kraus_equivalent,
    kraus_from_choi,
    kraus_rank,
    random_channel,
    stinespring_isometry,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0, -1.0]).astype(complex)


def identity_channel():
    return KrausSet(1, 1, [I2])


def depolarizing_channel():
    return KrausSet(1, 1, [I2 / 2, X / 2, Y / 2, Z / 2])


def amplitude_damping(gamma):
    a1 = np.diag([1.0, np.sqrt(1.0 - gamma)]).astype(complex)
    a2 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=complex)
    return KrausSet(1, 1, [a1, a2])


def test_kraus_set_validates_tp():
    with pytest.raises(ValueError, match="trace preserving"):
        KrausSet(1, 1, [I2 * 0.5])


def test_choi_of_identity_channel():
    j = choi_from_kraus(identity_channel()).j
    expected = np.zeros((4, 4), dtype=complex)
    for a, b in [(0, 0), (0, 3), (3, 0), (3, 3)]:
        expected[a, b] = 1.0
    assert np.allclose(j, expected)


def test_choi_of_depolarizing_is_maximally_mixed():
    j = choi_from_kraus(depolarizing_channel()).j
    assert np.allclose(j, np.eye(4) / 2)


@pytest.mark.parametrize("seed", range(5))
def test_choi_trace_is_input_dimension(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 3))
    n = int(rng.integers(1, 3))
    ks = random_channel(m, n, 2, seed)
    j = choi_from_kraus(ks).j
    assert np.isclose(np.trace(j), 2**m)


def test_choi_invariant_under_kraus_mixing():
    ks = amplitude_damping(0.4)
    rng = np.random.default_rng(0)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    u, _ = np.linalg.qr(g)
    mixed = KrausSet(1, 1, [u[0, 0] * ks.ops[0] + u[0, 1] * ks.ops[1],
                            u[1, 0] * ks.ops[0] + u[1, 1] * ks.ops[1]])
    d = choi_distance(choi_from_kraus(ks), choi_from_kraus(mixed))
    assert d < 1e-10


def test_kraus_from_choi_counts():
    assert kraus_from_choi(choi_from_kraus(identity_channel())).K == 1
    assert kraus_from_choi(ChoiMatrix(1, 1, np.eye(4) / 2)).K == 4


@pytest.mark.parametrize("seed,m,n,kr", [(0, 1, 1, 2), (1, 1, 2, 3), (2, 2, 1, 4), (3, 2, 2, 4)])
def test_choi_kraus_round_trip(seed, m, n, kr):
    ks = random_channel(m, n, kr, seed)
    c1 = choi_from_kraus(ks)
    ks2 = kraus_from_choi(c1)
    c2 = choi_from_kraus(ks2)
    assert choi_distance(c1, c2) < 1e-8
    assert ks2.K == kr


def test_kraus_from_choi_rejects_non_psd():
    j = np.diag([1.5, 0.5, 0.5, -0.5]).astype(complex)
    with pytest.raises(ValueError, match="invalid Choi"):
        kraus_from_choi(ChoiMatrix(1, 1, j, check=False))


def test_kraus_rank_examples():
    assert kraus_rank(identity_channel()) == 1
    assert kraus_rank(amplitude_damping(0.5)) == 2
    assert kraus_rank(depolarizing_channel()) == 4


def test_is_extreme_examples():
    assert is_extreme(identity_channel())
    assert not is_extreme(depolarizing_channel())
    assert is_extreme(amplitude_damping(0.3))


@pytest.mark.parametrize("seed", range(4))
def test_rank_above_2m_is_never_extreme(seed):
    ks = random_channel(1, 2, 3, seed)
    assert kraus_rank(ks) == 3 > 2
    assert not is_extreme(ks)


def test_kraus_equivalent():
    ks = amplitude_damping(0.5)
    assert kraus_equivalent(ks, ks, 1e-10)
    a1, a2 = ks.ops
    mixed = KrausSet(1, 1, [(a1 + a2) / np.sqrt(2), (a1 - a2) / np.sqrt(2)])
    assert kraus_equivalent(ks, mixed, 1e-10)
    assert not kraus_equivalent(identity_channel(), depolarizing_channel(), 1e-10)


def test_stinespring_unitary_channel():
    d = stinespring_isometry(identity_channel())
    assert d.k == 0
    # minimal form may differ from I by a global phase only
    assert d.v.shape == (2, 2)
    assert np.linalg.norm(np.abs(d.v) - np.eye(2)) < 1e-10


def test_stinespring_amplitude_damping():
    ks = amplitude_damping(0.3)
    d = stinespring_isometry(ks, minimize=False)
    assert d.k == 1
    assert np.allclose(d.v, np.vstack(ks.ops))
    assert np.linalg.norm(d.v.conj().T @ d.v - np.eye(2)) < 1e-9


def test_stinespring_rank3_pads_zero_block():
    ks = random_channel(1, 1, 3, seed=5)
    d = stinespring_isometry(ks)
    assert d.k == 2
    assert d.v.shape == (8, 2)
    assert np.allclose(d.v[6:, :], 0)
    assert np.linalg.norm(d.v.conj().T @ d.v - np.eye(2)) < 1e-9


def test_stinespring_force_k():
    ks = amplitude_damping(0.2)
    d = stinespring_isometry(ks, force_k=2)
    assert d.k == 2 and d.v.shape == (8, 2)
    with pytest.raises(ValueError, match="below minimal"):
        stinespring_isometry(ks, force_k=0)


def test_random_channel_unitary_case():
    ks = random_channel(1, 1, 1, seed=0)
    u = ks.ops[0]
    assert np.linalg.norm(u.conj().T @ u - np.eye(2)) < 1e-12
    assert kraus_rank(ks) == 1


def test_random_channel_rank():
    assert kraus_rank(random_channel(1, 1, 2, seed=1)) == 2


def test_random_channel_deterministic():
    a = random_channel(2, 1, 3, seed=42)
    b = random_channel(2, 1, 3, seed=42)
    assert all(np.array_equal(x, y) for x, y in zip(a.ops, b.ops))


def test_random_channel_infeasible():
    with pytest.raises(ValueError, match="Kraus rank"):
        random_channel(2, 0, 2, seed=0)
    with pytest.raises(ValueError, match="Kraus rank"):
        random_channel(1, 1, 5, seed=0)
    # rank 3 from 3 to 1 qubits: 3 * 2 < 8, no such channel
    with pytest.raises(ValueError, match="Kraus rank"):
        random_channel(3, 1, 3, seed=0)


@pytest.mark.parametrize("seed", range(3))
def test_generated_channels_tp_on_choi(seed):
    ks = random_channel(2, 2, 5, seed)
    choi_from_kraus(ks)  # constructor checks tr_out J = I at 1e-8


def test_channel_json_round_trip():
    ks = random_channel(1, 2, 2, seed=9)
    text = channel_to_json(ks, include_choi=True)
    back = channel_from_json(text)
    assert back.m == ks.m and back.n == ks.n
    assert all(np.array_equal(a, b) for a, b in zip(ks.ops, back.ops))


def test_channel_json_malformed():
    with pytest.raises(ValueError, match="malformed"):
        channel_from_json('{"m": 1}')
