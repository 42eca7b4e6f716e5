"""Exact circuit simulation: unitaries, branch operators, channels.

Measured circuits are evaluated once per measurement-outcome string
(2^#measures branches).  Qubits that end the circuit traced out, or
simply undeclared as outputs, are summed out by treating their final
basis value as an extra branch index.  This recovers the implemented
Kraus operators directly, which is what the compiler's verification
needs.  Intended for small systems (at most ~8 qubits).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import MEASURE, RESET, TRACE, UNITARY_KINDS, X, Circuit, Gate, apply_unitary_gate
from .channel import KrausSet

_PRUNE_NORM = 1e-12


@dataclass(frozen=True)
class BranchOperator:
    """Linear map applied when the measurements gave `outcome` (a bit string).

    Disposal of non-output qubits can split one outcome into several
    operators, so outcomes may repeat; together all operators satisfy
    sum op^dag op = I.
    """

    outcome: str
    op: np.ndarray = field(repr=False)


def input_embedding(c: Circuit) -> np.ndarray:
    """2^p x 2^m matrix sending input basis states into the full register.

    input_qubits[0] carries the most significant input bit; every other
    qubit starts in |0>.
    """
    p, m = c.num_qubits, len(c.input_qubits)
    e = np.zeros((2**p, 2**m), dtype=np.complex128)
    for j in range(2**m):
        pos = 0
        for t, q in enumerate(c.input_qubits):
            bit = (j >> (m - 1 - t)) & 1
            pos |= bit << (p - 1 - q)
        e[pos, j] = 1.0
    return e


def simulate_unitary(c: Circuit) -> np.ndarray:
    """Total matrix of a measurement-free circuit, restricted to input columns."""
    mat = input_embedding(c)
    for g in c.gates:
        if g.kind not in UNITARY_KINDS or g.condition:
            raise ValueError("simulate_unitary needs a purely unitary circuit")
        mat = apply_unitary_gate(mat, g, c.num_qubits)
    return mat


def _project(mat: np.ndarray, p: int, qubit: int, outcome: int) -> np.ndarray:
    t = mat.reshape((2,) * p + (mat.shape[1],)).copy()
    idx = [slice(None)] * (p + 1)
    idx[qubit] = 1 - outcome
    t[tuple(idx)] = 0.0
    return t.reshape(mat.shape)


@dataclass
class _Branch:
    mat: np.ndarray
    outcome: tuple[int, ...] = ()
    regs: dict = field(default_factory=dict)
    fresh_meas: dict = field(default_factory=dict)  # qubit -> outcome, cleared on touch


def _fires(g: Gate, regs: dict) -> bool:
    if not g.condition:
        return True
    for r, b in g.condition:
        if r not in regs:
            raise ValueError(f"condition references register c{r} before it is written")
        if regs[r] != b:
            return False
    return True


def _walk_branches(c: Circuit) -> list[_Branch]:
    p = c.num_qubits
    branches = [_Branch(mat=input_embedding(c))]
    written = set()
    for g in c.gates:
        if g.kind == MEASURE:
            if g.creg in written:
                raise ValueError(f"register c{g.creg} written twice")
            written.add(g.creg)
            q = g.qubits[0]
            split = []
            for br in branches:
                for outcome in (0, 1):
                    mat = _project(br.mat, p, q, outcome)
                    regs = dict(br.regs)
                    regs[g.creg] = outcome
                    fresh = dict(br.fresh_meas)
                    fresh[q] = outcome
                    split.append(_Branch(mat, br.outcome + (outcome,), regs, fresh))
            branches = split
        elif g.kind == RESET:
            q = g.qubits[0]
            for br in branches:
                if q not in br.fresh_meas:
                    raise ValueError("RESET without an immediately preceding MEASURE")
                if br.fresh_meas[q] == 1:
                    br.mat = apply_unitary_gate(br.mat, Gate(X, (q,)), p)
                del br.fresh_meas[q]
        elif g.kind == TRACE:
            for br in branches:
                br.fresh_meas.pop(g.qubits[0], None)
        else:
            for br in branches:
                if _fires(g, br.regs):
                    br.mat = apply_unitary_gate(br.mat, g, p)
                    for q in g.qubits:
                        br.fresh_meas.pop(q, None)
    branches.sort(key=lambda br: br.outcome)
    return branches


def _dispose(mat: np.ndarray, c: Circuit) -> list[np.ndarray]:
    """Split a full-register matrix into per-disposal-value output operators."""
    p = c.num_qubits
    cols = mat.shape[1]
    disposal = [q for q in range(p) if q not in c.output_qubits]
    t = mat.reshape((2,) * p + (cols,))
    order = disposal + list(c.output_qubits) + [p]
    t = np.transpose(t, order)
    t = t.reshape(2 ** len(disposal), 2 ** len(c.output_qubits), cols)
    return [t[y] for y in range(t.shape[0])]


def circuit_to_branches(c: Circuit) -> list[BranchOperator]:
    out = []
    for br in _walk_branches(c):
        label = "".join(str(b) for b in br.outcome)
        for op in _dispose(br.mat, c):
            out.append(BranchOperator(label, op))
    return out


def circuit_to_kraus(c: Circuit, prune: bool = True) -> KrausSet:
    """The channel implemented by the circuit, from inputs to outputs."""
    ops = [b.op for b in circuit_to_branches(c)]
    if prune:
        kept = [a for a in ops if np.linalg.norm(a) > _PRUNE_NORM]
        ops = kept or ops[:1]
    return KrausSet(len(c.input_qubits), len(c.output_qubits), ops, atol=1e-8)


def outcome_distribution(c: Circuit, state) -> dict[str, float]:
    """Probability of each measurement-outcome string for a pure input state."""
    psi = np.asarray(state, dtype=np.complex128).reshape(-1)
    if psi.shape != (2 ** len(c.input_qubits),):
        raise ValueError("input state has wrong dimension")
    dist: dict[str, float] = {}
    for b in circuit_to_branches(c):
        dist[b.outcome] = dist.get(b.outcome, 0.0) + float(np.linalg.norm(b.op @ psi) ** 2)
    return dict(sorted(dist.items()))
