"""Channel representations: Kraus sets, Choi matrices, Stinespring dilations.

Conventions (fixed once, used everywhere):
  * A channel maps m qubits to n qubits; Kraus operators are 2^n x 2^m.
  * The Choi matrix is J = sum_{ij} |i><j|_in (x) E(|i><j|), unnormalized,
    so tr J = 2^m and trace preservation reads tr_out J = I_in.
  * The input factor is the most significant block of J's index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .linalg import partial_trace, qr_rectangular

TP_ATOL = 1e-9
RANK_RTOL = 1e-9
GRAM_RTOL = 1e-8


@dataclass(frozen=True)
class KrausSet:
    """A channel from m to n qubits as a list of 2^n x 2^m Kraus operators."""

    m: int
    n: int
    ops: tuple = field(repr=False)

    def __init__(self, m: int, n: int, ops, atol: float = TP_ATOL):
        if m < 0 or n < 0:
            raise ValueError("qubit counts must be nonnegative")
        mats = tuple(np.asarray(a, dtype=np.complex128) for a in ops)
        if len(mats) < 1:
            raise ValueError("need at least one Kraus operator")
        dn, dm = 2**n, 2**m
        for a in mats:
            if a.shape != (dn, dm):
                raise ValueError(f"Kraus operator shape {a.shape} != ({dn}, {dm})")
        s = sum(a.conj().T @ a for a in mats)
        if np.linalg.norm(s - np.eye(dm)) >= atol:
            raise ValueError("Kraus operators are not trace preserving")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "ops", mats)

    @property
    def K(self) -> int:
        return len(self.ops)

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=np.complex128)
        return sum(a @ rho @ a.conj().T for a in self.ops)


@dataclass(frozen=True)
class ChoiMatrix:
    m: int
    n: int
    j: np.ndarray = field(repr=False)

    def __init__(self, m: int, n: int, j, check: bool = True):
        j = np.asarray(j, dtype=np.complex128)
        d = 2 ** (m + n)
        if j.shape != (d, d):
            raise ValueError("Choi matrix has wrong dimension")
        if check:
            if np.linalg.norm(j - j.conj().T) >= 1e-10:
                raise ValueError("Choi matrix is not Hermitian")
            tr_out = partial_trace(j, range(m))
            if np.linalg.norm(tr_out - np.eye(2**m)) >= 1e-8:
                raise ValueError("Choi matrix is not trace preserving")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "j", j)


@dataclass(frozen=True)
class DilationIsometry:
    """Stacked-Kraus isometry V from m qubits to n+k qubits."""

    m: int
    n: int
    k: int
    v: np.ndarray = field(repr=False)


def choi_from_kraus(ks: KrausSet) -> ChoiMatrix:
    """J = sum over Kraus operators of |vec(A)><vec(A)|."""
    d = 2 ** (ks.m + ks.n)
    j = np.zeros((d, d), dtype=np.complex128)
    for a in ks.ops:
        w = a.T.reshape(-1)  # w[i*2^n + r] = A[r, i]
        j += np.outer(w, w.conj())
    return ChoiMatrix(ks.m, ks.n, j)


def kraus_from_choi(c: ChoiMatrix, tol: float = RANK_RTOL) -> KrausSet:
    """Minimal Kraus form via eigendecomposition of the Choi matrix.

    Keeps eigenvalues above tol * tr(J), largest first.
    """
    evals, evecs = np.linalg.eigh(c.j)
    tr = float(np.trace(c.j).real)
    if evals.min() < -tol * max(tr, 1.0):
        raise ValueError("invalid Choi matrix")
    order = np.argsort(evals)[::-1]
    ops = []
    for idx in order:
        lam = evals[idx]
        if lam <= tol * tr:
            break
        w = evecs[:, idx]
        ops.append(np.sqrt(lam) * w.reshape(2**c.m, 2**c.n).T)
    return KrausSet(c.m, c.n, ops)


def kraus_rank(ks: KrausSet, tol: float = RANK_RTOL) -> int:
    c = choi_from_kraus(ks)
    evals = np.linalg.eigvalsh(c.j)
    tr = float(np.trace(c.j).real)
    return int(np.sum(evals > tol * tr))


def is_extreme(ks: KrausSet) -> bool:
    """Choi's criterion: {A_i^dag A_j} linearly independent, on minimal form."""
    mini = kraus_from_choi(choi_from_kraus(ks))
    k = mini.K
    if k * k > 4**mini.m:
        return False
    rows = np.array(
        [(a.conj().T @ b).reshape(-1) for a in mini.ops for b in mini.ops]
    )
    gram = rows @ rows.conj().T
    sv = np.linalg.eigvalsh(gram)
    rank = int(np.sum(sv > GRAM_RTOL * sv.max()))
    return rank == k * k


def kraus_equivalent(a: KrausSet, b: KrausSet, tol: float = 1e-8) -> bool:
    if (a.m, a.n) != (b.m, b.n):
        raise ValueError("channel dimensions differ")
    return choi_distance(choi_from_kraus(a), choi_from_kraus(b)) < tol


def choi_distance(a: ChoiMatrix, b: ChoiMatrix) -> float:
    return float(np.linalg.norm(a.j - b.j))


def stinespring_isometry(ks: KrausSet, minimize: bool = True, force_k: int | None = None) -> DilationIsometry:
    """Stack the Kraus operators into an isometry from m to n+k qubits.

    By default the set is first reduced to minimal Kraus form, so
    k = ceil(log2 K') is as small as possible.  The stack is padded
    with zero blocks up to 2^k operators.  `force_k` allows a larger
    environment than the minimal one.
    """
    base = kraus_from_choi(choi_from_kraus(ks)) if minimize else ks
    kk = base.K
    k = max(kk - 1, 0).bit_length()  # ceil(log2 kk)
    if force_k is not None:
        if force_k < k:
            raise ValueError(f"forced k={force_k} below minimal {k}")
        k = force_k
    ops = list(base.ops) + [
        np.zeros((2**base.n, 2**base.m), dtype=np.complex128)
        for _ in range(2**k - kk)
    ]
    v = np.vstack(ops)
    return DilationIsometry(base.m, base.n, k, v)


def random_channel(m: int, n: int, kr: int, seed: int) -> KrausSet:
    """Seeded random channel of Kraus rank `kr` (with probability one).

    Samples a complex Gaussian matrix, orthonormalizes it into an
    isometry and unstacks the blocks.  Feasibility requires
    kr * 2^n >= 2^m (a rank-kr channel from m to n qubits exists iff
    this holds).
    """
    if kr < 1 or kr > 2 ** (m + n):
        raise ValueError("Kraus rank out of range")
    if kr * 2**n < 2**m:
        raise ValueError(f"no channel from {m} to {n} qubits has Kraus rank {kr}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((kr * 2**n, 2**m)) + 1j * rng.standard_normal(
        (kr * 2**n, 2**m)
    )
    q, _ = qr_rectangular(g)
    v = q[:, : 2**m]
    ops = [v[i * 2**n : (i + 1) * 2**n, :] for i in range(kr)]
    return KrausSet(m, n, ops)


# --- JSON wire format ---------------------------------------------------


def _matrix_to_json(a: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in a]


def _matrix_from_json(rows) -> np.ndarray:
    return np.array(
        [[complex(e[0], e[1]) for e in row] for row in rows], dtype=np.complex128
    )


def channel_to_json(ks: KrausSet, include_choi: bool = False) -> str:
    doc = {
        "m": ks.m,
        "n": ks.n,
        "kraus": [_matrix_to_json(a) for a in ks.ops],
    }
    if include_choi:
        doc["choi"] = _matrix_to_json(choi_from_kraus(ks).j)
    return json.dumps(doc, indent=1)


def channel_from_json(text: str) -> KrausSet:
    doc = json.loads(text)
    try:
        m, n = int(doc["m"]), int(doc["n"])
        ops = [_matrix_from_json(a) for a in doc["kraus"]]
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed channel JSON: {exc}") from exc
    return KrausSet(m, n, ops)
