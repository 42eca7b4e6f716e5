"""Gate-level circuit IR with classical registers, plus rotation algebra.

Gate kinds: RX, RY, RZ (one angle), U (ZYZ with global phase: four
angles alpha, beta, gamma, delta), X, CNOT, MEASURE, RESET, TRACE.
A gate may carry a condition: a tuple of (register, bit) pairs that must
all match for the gate to fire.  RESET means: apply X if the immediately
preceding MEASURE on the same qubit gave outcome 1.

Qubit 0 is the most significant bit of a basis index.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

RX, RY, RZ, U, X, CNOT, MEASURE, RESET, TRACE = (
    "RX", "RY", "RZ", "U", "X", "CNOT", "MEASURE", "RESET", "TRACE",
)
UNITARY_KINDS = frozenset({RX, RY, RZ, U, X, CNOT})
_N_PARAMS = {RX: 1, RY: 1, RZ: 1, U: 4, X: 0, CNOT: 0, MEASURE: 0, RESET: 0, TRACE: 0}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    creg: int | None = None
    condition: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in _N_PARAMS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        nq = 2 if self.kind == CNOT else 1
        if len(self.qubits) != nq:
            raise ValueError(f"{self.kind} expects {nq} qubit(s)")
        if self.kind == CNOT and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT control equals target")
        if len(self.params) != _N_PARAMS[self.kind]:
            raise ValueError(f"{self.kind} expects {_N_PARAMS[self.kind]} angle(s)")
        if not all(math.isfinite(p) for p in self.params):
            raise ValueError("gate angles must be finite")
        if self.kind == MEASURE and self.creg is None:
            raise ValueError("MEASURE needs a classical register")
        if self.kind in (MEASURE, RESET, TRACE) and self.condition:
            if self.kind == MEASURE and any(r == self.creg for r, _ in self.condition):
                raise ValueError("MEASURE conditioned on its own register")

    def conditioned(self, extra: tuple[tuple[int, int], ...]) -> "Gate":
        cond = tuple(self.condition or ()) + tuple(extra)
        return Gate(self.kind, self.qubits, self.params, self.creg, cond or None)

    def shifted(self, mapping) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits),
                    self.params, self.creg, self.condition)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    input_qubits: tuple[int, ...]
    output_qubits: tuple[int, ...]
    gates: tuple[Gate, ...]
    num_cregs: int = 0

    def __post_init__(self):
        object.__setattr__(self, "input_qubits", tuple(self.input_qubits))
        object.__setattr__(self, "output_qubits", tuple(self.output_qubits))
        object.__setattr__(self, "gates", tuple(self.gates))
        p = self.num_qubits
        for name in ("input_qubits", "output_qubits"):
            qs = getattr(self, name)
            if len(set(qs)) != len(qs):
                raise ValueError(f"duplicate entries in {name}")
            if any(q < 0 or q >= p for q in qs):
                raise ValueError(f"{name} index out of range")
        traced = set()
        for g in self.gates:
            if any(q < 0 or q >= p for q in g.qubits):
                raise ValueError("gate qubit index out of range")
            if traced & set(g.qubits):
                raise ValueError("gate acts on a traced-out qubit")
            if g.kind == TRACE:
                traced.add(g.qubits[0])
            if g.kind == MEASURE and not (0 <= g.creg < self.num_cregs):
                raise ValueError("measure register out of range")
            if g.condition and any(
                r < 0 or r >= self.num_cregs for r, _ in g.condition
            ):
                raise ValueError("condition register out of range")
        if traced & set(self.output_qubits):
            raise ValueError("traced-out qubit declared as output")


# --- rotation algebra -----------------------------------------------------


def rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[cmath.exp(-0.5j * theta), 0], [0, cmath.exp(0.5j * theta)]])


def u_matrix(alpha: float, beta: float, gamma: float, delta: float) -> np.ndarray:
    return cmath.exp(1j * alpha) * (rz_matrix(beta) @ ry_matrix(gamma) @ rz_matrix(delta))


X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)


def gate1_matrix(g: Gate) -> np.ndarray:
    if g.kind == RX:
        return rx_matrix(*g.params)
    if g.kind == RY:
        return ry_matrix(*g.params)
    if g.kind == RZ:
        return rz_matrix(*g.params)
    if g.kind == U:
        return u_matrix(*g.params)
    if g.kind == X:
        return X_MATRIX
    raise ValueError(f"{g.kind} has no single-qubit matrix")


def _wrap_angle(t: float) -> float:
    """Map to (-pi, pi]."""
    t = math.fmod(t, 2 * math.pi)
    if t <= -math.pi:
        t += 2 * math.pi
    elif t > math.pi:
        t -= 2 * math.pi
    return t


def zyz_decompose(u) -> tuple[float, float, float, float]:
    """Angles (alpha, beta, gamma, delta) with u = e^{ia} Rz(b) Ry(c) Rz(d).

    Canonical branch: gamma in [0, pi]; beta, delta, alpha in (-pi, pi];
    at the gamma = 0 or pi degeneracy delta is set to 0 and all z-rotation
    folds into beta.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or np.linalg.norm(u.conj().T @ u - np.eye(2)) >= 1e-10:
        raise ValueError("not a 2x2 unitary")
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    alpha = 0.5 * cmath.phase(det)
    v = cmath.exp(-1j * alpha) * u  # special unitary now
    gamma = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[1, 0]) < 1e-12:      # gamma ~ 0: diagonal
        beta = _wrap_angle(2.0 * cmath.phase(v[1, 1]))
        delta = 0.0
    elif abs(v[0, 0]) < 1e-12:    # gamma ~ pi: antidiagonal
        beta = _wrap_angle(2.0 * cmath.phase(v[1, 0]))
        delta = 0.0
    else:
        pa = cmath.phase(v[0, 0])   # -(beta+delta)/2
        pb = cmath.phase(v[1, 0])   # (beta-delta)/2
        beta = _wrap_angle(pb - pa)
        delta = _wrap_angle(-pb - pa)
    # wrapping may have flipped the sign of the SU(2) part; fix alpha
    rec = rz_matrix(beta) @ ry_matrix(gamma) @ rz_matrix(delta)
    idx = np.unravel_index(np.argmax(np.abs(rec)), rec.shape)
    alpha = _wrap_angle(cmath.phase(u[idx] / rec[idx]))
    return alpha, beta, gamma, delta


def apply_unitary_gate(mat: np.ndarray, g: Gate, p: int) -> np.ndarray:
    """Left-multiply the 2^p x C matrix `mat` by the gate's embedding.

    Only unitary kinds are valid here; conditions are ignored (callers
    decide whether the gate fires).
    """
    cols = mat.shape[1]
    t = mat.reshape((2,) * p + (cols,))
    if g.kind == CNOT:
        ctrl, tgt = g.qubits
        tgt_pos = tgt if tgt > ctrl else tgt + 1
        t = np.moveaxis(np.moveaxis(t, ctrl, 0), tgt_pos, 1).copy()
        tmp = t[1, 0].copy()
        t[1, 0] = t[1, 1]
        t[1, 1] = tmp
        t = np.moveaxis(np.moveaxis(t, 1, tgt_pos), 0, ctrl)
        return t.reshape(2**p, cols)
    q = g.qubits[0]
    u = gate1_matrix(g)
    t = np.tensordot(u, t, axes=([1], [q]))      # new axis 0 is the qubit
    t = np.moveaxis(t, 0, q)
    return t.reshape(2**p, cols)


# --- CNOT accounting ------------------------------------------------------


def cnot_count(c: Circuit) -> tuple[int, bool]:
    """(worst-case CNOT count over classical assignments, uniform flag).

    Enumerates all assignments of the registers referenced by CNOT
    conditions; unconditioned CNOTs always count.
    """
    base = 0
    conditioned = []
    regs = set()
    for g in c.gates:
        if g.kind != CNOT:
            continue
        if not g.condition:
            base += 1
        else:
            conditioned.append(g.condition)
            regs.update(r for r, _ in g.condition)
    if not conditioned:
        return base, True
    regs = sorted(regs)
    counts = set()
    worst = 0
    for bits in range(2 ** len(regs)):
        value = {r: (bits >> i) & 1 for i, r in enumerate(regs)}
        total = base + sum(
            1 for cond in conditioned if all(value[r] == b for r, b in cond)
        )
        counts.add(total)
        worst = max(worst, total)
    return worst, len(counts) == 1


# --- text serialization ---------------------------------------------------


class CircuitParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


def _fmt_angle(x: float) -> str:
    return format(float(x), ".17g")


def serialize(c: Circuit) -> str:
    lines = [
        f"QUBITS {c.num_qubits}",
        f"CREGS {c.num_cregs}",
        "INPUTS " + " ".join(f"q{q}" for q in c.input_qubits),
        "OUTPUTS " + " ".join(f"q{q}" for q in c.output_qubits),
    ]
    for g in c.gates:
        if g.kind == CNOT:
            body = f"CNOT q{g.qubits[0]} q{g.qubits[1]}"
        elif g.kind == MEASURE:
            body = f"MEASURE q{g.qubits[0]} c{g.creg}"
        elif g.kind in (RESET, TRACE, X):
            body = f"{g.kind} q{g.qubits[0]}"
        else:
            angles = " ".join(_fmt_angle(p) for p in g.params)
            body = f"{g.kind} q{g.qubits[0]} {angles}"
        if g.condition:
            cond = ",".join(f"c{r}={b}" for r, b in g.condition)
            body = f"IF {cond} {body}"
        lines.append(body)
    return "\n".join(lines) + "\n"


def _parse_qubit(tok: str, line_no: int) -> int:
    if not tok.startswith("q") or not tok[1:].isdigit():
        raise CircuitParseError(line_no, f"expected qubit token, got {tok!r}")
    return int(tok[1:])


def _parse_creg(tok: str, line_no: int) -> int:
    if not tok.startswith("c") or not tok[1:].isdigit():
        raise CircuitParseError(line_no, f"expected register token, got {tok!r}")
    return int(tok[1:])


def _parse_angles(toks, want, line_no) -> tuple[float, ...]:
    if len(toks) != want:
        raise CircuitParseError(line_no, f"expected {want} angle(s), got {len(toks)}")
    try:
        return tuple(float(t) for t in toks)
    except ValueError:
        raise CircuitParseError(line_no, f"bad angle in {toks}") from None


def parse(text: str) -> Circuit:
    header = {"QUBITS": None, "CREGS": None, "INPUTS": None, "OUTPUTS": None}
    gates = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        key = toks[0]
        if key in ("QUBITS", "CREGS"):
            if len(toks) != 2 or not toks[1].isdigit():
                raise CircuitParseError(line_no, f"bad {key} header")
            header[key] = int(toks[1])
            continue
        if key in ("INPUTS", "OUTPUTS"):
            header[key] = tuple(_parse_qubit(t, line_no) for t in toks[1:])
            continue
        condition = None
        if key == "IF":
            if len(toks) < 3:
                raise CircuitParseError(line_no, "IF needs a condition and an instruction")
            pairs = []
            for part in toks[1].split(","):
                if "=" not in part:
                    raise CircuitParseError(line_no, f"bad condition {part!r}")
                reg, val = part.split("=", 1)
                if val not in ("0", "1"):
                    raise CircuitParseError(line_no, f"condition bit must be 0 or 1, got {val!r}")
                pairs.append((_parse_creg(reg, line_no), int(val)))
            condition = tuple(pairs)
            toks = toks[2:]
            key = toks[0]
        try:
            if key == "CNOT":
                if len(toks) != 3:
                    raise CircuitParseError(line_no, "CNOT needs control and target")
                g = Gate(CNOT, (_parse_qubit(toks[1], line_no), _parse_qubit(toks[2], line_no)),
                         condition=condition)
            elif key == "MEASURE":
                if len(toks) != 3:
                    raise CircuitParseError(line_no, "MEASURE needs qubit and register")
                g = Gate(MEASURE, (_parse_qubit(toks[1], line_no),),
                         creg=_parse_creg(toks[2], line_no), condition=condition)
            elif key in (RESET, TRACE, X):
                if len(toks) != 2:
                    raise CircuitParseError(line_no, f"{key} needs one qubit")
                g = Gate(key, (_parse_qubit(toks[1], line_no),), condition=condition)
            elif key in (RX, RY, RZ, U):
                want = 4 if key == U else 1
                g = Gate(key, (_parse_qubit(toks[1], line_no),),
                         _parse_angles(toks[2:], want, line_no), condition=condition)
            else:
                raise CircuitParseError(line_no, f"unknown instruction {key!r}")
        except CircuitParseError:
            raise
        except ValueError as exc:
            raise CircuitParseError(line_no, str(exc)) from None
        gates.append(g)
    for key in ("QUBITS", "CREGS", "INPUTS", "OUTPUTS"):
        if header[key] is None:
            raise CircuitParseError(0, f"missing {key} header")
    try:
        return Circuit(header["QUBITS"], header["INPUTS"], header["OUTPUTS"],
                       tuple(gates), header["CREGS"])
    except ValueError as exc:
        raise CircuitParseError(0, str(exc)) from None
