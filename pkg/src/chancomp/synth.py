"""Decompose isometries into CNOT + single-qubit gates.

The synthesizer reduces an isometry column by column: for column j it
walks the target qubits from least to most significant, each step using
a multiplexed Rz (phase alignment) followed by a multiplexed Ry (mass
concentration) over the remaining qubits, with rotation angles forced to
zero on control patterns that would disturb already-reduced columns.  A
final diagonal cascade cancels the per-column phases, so the emitted
circuit reproduces the isometry exactly, global phase included.

Rotations whose angle happens to be zero are kept, and the set of
emitted gates depends only on the matrix dimensions, never on its
entries.  That makes CNOT counts input-independent, which the channel
compiler relies on for uniform per-branch costs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .circuit import CNOT, RY, RZ, U, Circuit, Gate, apply_unitary_gate
from .linalg import is_isometry

_ZERO_AMP = 1e-12


@dataclass(frozen=True)
class IsoCostModel:
    """Predicted CNOT count for an m-to-n isometry, as a callable field."""

    n_iso: Callable[[int, int], int]


def multiplexed_rotation(axis: str, controls, target: int, angles) -> list[Gate]:
    """Gate list realizing the block-diagonal rotation family.

    For every control pattern s (controls[0] is the most significant
    bit) the target qubit sees R_axis(angles[s]).  Uses the Gray-code
    construction: exactly 2^c rotations and 2^c CNOTs for c >= 1
    controls, a bare rotation for c = 0.
    """
    if axis not in (RY, RZ, "Y", "Z"):
        raise ValueError("axis must be Y or Z")
    kind = RY if axis in (RY, "Y") else RZ
    controls = list(controls)
    c = len(controls)
    if target in controls:
        raise ValueError("target cannot be a control")
    angles = [float(a) for a in angles]
    if len(angles) != 2**c:
        raise ValueError(f"need {2**c} angles, got {len(angles)}")
    if c == 0:
        return [Gate(kind, (target,), (angles[0],))]
    n = 2**c
    phis = []
    for i in range(n):
        g = i ^ (i >> 1)
        acc = 0.0
        for s in range(n):
            sign = -1.0 if bin(g & s).count("1") % 2 else 1.0
            acc += sign * angles[s]
        phis.append(acc / n)
    gates = []
    for i in range(n):
        gates.append(Gate(kind, (target,), (phis[i],)))
        if i < n - 1:
            bit = ((i + 1) & -(i + 1)).bit_length() - 1  # trailing zeros of i+1
        else:
            bit = c - 1
        gates.append(Gate(CNOT, (controls[c - 1 - bit], target)))
    return gates


def _mux_cnot_first(kind: str, controls, target: int, angles) -> list[Gate]:
    """Same block-diagonal rotation, with each CNOT ahead of its rotation.

    The reduction applies these; after the final adjoint-and-reverse the
    emitted circuit's multiplexes then end in a bare CNOT, which is what
    lets the classicalization rewrite fire on compiled circuits.
    """
    gates = multiplexed_rotation(kind, controls, target, [-a for a in angles])
    return [_adjoint(g) for g in reversed(gates)]


def _expand(s: int, b: int, t: int) -> int:
    """Insert bit value t at significance b into pattern s."""
    low = s & ((1 << b) - 1)
    high = s >> b
    return (high << (b + 1)) | (t << b) | low


def _active_patterns(j: int, b: int, p: int) -> list[int]:
    """Control patterns that may need a rotation when reducing column j.

    A pattern is active when the pair member on the wrong side of target
    bit b can carry mass: it must agree with j below bit b and both pair
    members must sit at or above row j (rows below j belong to columns
    already reduced to basis vectors and must not be touched).
    """
    jb = (j >> b) & 1
    low_j = j & ((1 << b) - 1)
    out = []
    for s in range(1 << (p - 1)):
        if s & ((1 << b) - 1) != low_j:
            continue
        w = _expand(s, b, 1 - jb)
        r = _expand(s, b, jb)
        if w >= j and r >= j:
            out.append(s)
    return out


def _diag_gates(lams, qubits) -> list[Gate]:
    """Exact diagonal phase gate diag(e^{i lam_x}) as a cascade of
    multiplexed Rz, terminated by a phased Rz that carries the mean."""
    if len(qubits) == 1:
        lo, hi = lams[0], lams[1]
        return [Gate(U, (qubits[0],), ((lo + hi) / 2.0, hi - lo, 0.0, 0.0))]
    half = len(lams) // 2
    thetas = [lams[2 * s + 1] - lams[2 * s] for s in range(half)]
    means = [(lams[2 * s + 1] + lams[2 * s]) / 2.0 for s in range(half)]
    gates = multiplexed_rotation(RZ, qubits[:-1], qubits[-1], thetas)
    return gates + _diag_gates(means, qubits[:-1])


def _adjoint(g: Gate) -> Gate:
    if g.kind == CNOT:
        return g
    if g.kind in (RY, RZ):
        return Gate(g.kind, g.qubits, (-g.params[0],))
    if g.kind == U:
        a, b, gam, d = g.params
        if gam == 0.0 and d == 0.0:
            return Gate(U, g.qubits, (-a, -b, 0.0, 0.0))
    raise ValueError(f"cannot invert {g}")


def _reduction_segments(v: np.ndarray):
    """Per-column reduction gate lists plus the final diagonal segment.

    Applying all segments in order to v yields [I; 0] exactly.
    """
    rows, cols = v.shape
    p = rows.bit_length() - 1
    work = v.astype(np.complex128).copy()
    segments = []
    for j in range(cols):
        seg = []
        for b in range(p):
            target = p - 1 - b
            controls = [q for q in range(p) if q != target]
            active = _active_patterns(j, b, p)
            if not active:
                continue
            npat = 1 << (p - 1)
            # phase alignment within each active pair
            rz = [0.0] * npat
            for s in active:
                a0 = work[_expand(s, b, 0), j]
                a1 = work[_expand(s, b, 1), j]
                if min(abs(a0), abs(a1)) >= _ZERO_AMP:
                    rz[s] = cmath.phase(a0) - cmath.phase(a1)
            for g in _mux_cnot_first(RZ, controls, target, rz):
                seg.append(g)
                work = apply_unitary_gate(work, g, p)
            # rotate mass onto the component matching bit b of j
            jb = (j >> b) & 1
            ry = [0.0] * npat
            for s in active:
                a0 = abs(work[_expand(s, b, 0), j])
                a1 = abs(work[_expand(s, b, 1), j])
                if max(a0, a1) < _ZERO_AMP:
                    continue
                ry[s] = 2.0 * math.atan2(a0, a1) if jb else -2.0 * math.atan2(a1, a0)
            for g in _mux_cnot_first(RY, controls, target, ry):
                seg.append(g)
                work = apply_unitary_gate(work, g, p)
        segments.append(seg)
    diag_seg = []
    if cols >= 2:
        lams = [0.0] * (2**p)
        for x in range(cols):
            lams[x] = -cmath.phase(work[x, x])
        for g in _diag_gates(lams, list(range(p))):
            diag_seg.append(g)
            work = apply_unitary_gate(work, g, p)
    return segments, diag_seg, work


def decompose_isometry(v) -> Circuit:
    """Circuit on p qubits reproducing the 2^p x 2^c isometry v.

    The first p - log2(c) qubits start in |0>; the inputs feed the
    trailing qubits.  The emitted gates and their CNOT count depend only
    on the shape of v.
    """
    v = np.asarray(v, dtype=np.complex128)
    rows, cols = v.shape
    p = rows.bit_length() - 1
    mc = max(cols - 1, 0).bit_length()
    if 2**p != rows or 2**mc != cols or rows < cols:
        raise ValueError("shape must be 2^n x 2^m with n >= m")
    if not is_isometry(v):
        raise ValueError("not an isometry")
    segments, diag_seg, _ = _reduction_segments(v)
    reduction = [g for seg in segments for g in seg] + diag_seg
    gates = tuple(_adjoint(g) for g in reversed(reduction))
    return Circuit(p, tuple(range(p - mc, p)), tuple(range(p)), gates, 0)


@lru_cache(maxsize=None)
def n_iso(m: int, n: int) -> int:
    """CNOT count this synthesizer emits for any m-to-n isometry."""
    if m < 0 or n < m:
        raise ValueError("need 0 <= m <= n")
    p = n
    per_multiplex = 2 ** (p - 1) if p >= 2 else 0
    count = 0
    for j in range(2**m):
        for b in range(p):
            if _active_patterns(j, b, p):
                count += 2 * per_multiplex
    if m >= 1 and p >= 2:
        count += 2**p - 2
    return count


def builtin_cost_model() -> IsoCostModel:
    return IsoCostModel(n_iso=n_iso)
