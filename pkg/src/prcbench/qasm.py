"""OpenQASM 2.0 export: analytic decomposition of every two-qubit gate into
the fixed native set {rz, ry, cx} plus post-decomposition gate counts.

Synthesis works in "slot" space for a gate pair (slot 0 = low qubit, the
less significant bit; slot 1 = high qubit): a gate is classified by how many
CNOTs it needs (0/1/2/3, from the spectrum of the magic-basis invariant
gamma(U) = M M^T), the matching fixed-shape template is instantiated, and
the single-qubit prefactors are recovered by simultaneous diagonalization
of the templates' invariants.  Every decomposition is verified against the
gate matrix before being emitted; if a specialized template falls short
numerically the next more general one is used, so synthesis never fails,
it only spends extra CNOTs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .errors import DecompositionError
from .gates import (
    MAGIC,
    MAGIC_DAG,
    GateParams,
    ry_matrix,
    rz_matrix,
    split_product_gate,
    unitarity_defect,
    zyz_angles,
)

QASM_SCHEMA_HEADER = "OPENQASM 2.0;"

LOW, HIGH = 0, 1

# Slot-space constants (first kron factor = high slot).
CNOT_HL = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # control high, target low
CNOT_LH = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)  # control low, target high
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)

# kron(S, SX): the interior of the adjacent-CNOT special case.
_S_SX = np.array(
    [
        [0.5 + 0.5j, 0.5 - 0.5j, 0, 0],
        [0.5 - 0.5j, 0.5 + 0.5j, 0, 0],
        [0, 0, -0.5 + 0.5j, 0.5 + 0.5j],
        [0, 0, 0.5 + 0.5j, -0.5 + 0.5j],
    ],
    dtype=complex,
)
_S_2 = np.array([[1, 0], [0, 1j]], dtype=complex)
_SX_2 = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)

# Fixed invariant data of the single-CNOT template V = e^{i pi/4} SWAP @ CNOT_HL.
_V_ONE_CNOT = np.array(
    [
        [0.5, 0.5j, 0.5j, -0.5],
        [-0.5j, 0.5, -0.5, -0.5j],
        [-0.5j, -0.5, 0.5, -0.5j],
        [0.5, -0.5j, -0.5j, -0.5],
    ],
    dtype=complex,
)
_Q_ONE_CNOT = (1 / np.sqrt(2)) * np.array(
    [[-1, 0, -1, 0], [0, 1, 0, 1], [0, 1, 0, -1], [1, 0, -1, 0]], dtype=float
)


def _rx_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


@dataclass(frozen=True)
class NativeOp:
    """One native gate: rz/ry carry (slot, angle), cx carries (control, target)."""

    name: str
    q0: int
    q1: int = -1
    angle: float = 0.0


def _to_su4(u: np.ndarray) -> np.ndarray:
    det = complex(np.linalg.det(u))
    return u * det ** (-0.25)


def _gamma(u_su: np.ndarray) -> np.ndarray:
    m = MAGIC_DAG @ u_su @ MAGIC
    return m @ m.T


def num_cnots_required(u: np.ndarray, atol: float = 1e-10) -> int:
    """Minimum CNOTs for a two-qubit unitary, from trace and spectrum of
    gamma(U) in the magic basis."""
    g = _gamma(_to_su4(np.asarray(u, dtype=complex)))
    trace = complex(np.trace(g))
    if abs(trace - 4) < atol or abs(trace + 4) < atol:
        return 0
    evs = np.linalg.eigvals(g)
    if abs(trace) < atol and np.allclose(np.sort(evs.imag), [-1, -1, 1, 1], atol=1e-8):
        return 1
    if abs(trace.imag) < atol:
        return 2
    return 3


def _fix_det(p: np.ndarray) -> np.ndarray:
    if np.linalg.det(p) < 0:
        p = p.copy()
        p[:, -1] = -p[:, -1]
    return p


def _extract_prefactors(u: np.ndarray, v: np.ndarray):
    """A, B, C, D in SU(2) with (A kron B) @ v @ (C kron D) ~ u (up to phase),
    for u, v in the same local-equivalence class.

    Diagonalizes gamma(u) and gamma(v) over SO(4) with a shared random mix of
    real and imaginary parts (they share a spectrum, so matching eigh order
    aligns the eigenbases), then converts the SO(4) conjugators back to
    tensor products through the magic basis.  Retries with fresh mixes until
    the candidate verifies.
    """
    ug = MAGIC_DAG @ u @ MAGIC
    vg = MAGIC_DAG @ v @ MAGIC
    uu = ug @ ug.T
    vv = vg @ vg.T
    rng = np.random.default_rng(1234)
    for attempt in range(48):
        if attempt == 0:
            wr, wi = 1.0, 1.0
        elif attempt == 1:
            wr, wi = 1.0, 0.0
        elif attempt == 2:
            wr, wi = 0.0, 1.0
        else:
            wr, wi = rng.normal(), rng.normal()
        p_mix = wr * uu.real + wi * uu.imag
        q_mix = wr * vv.real + wi * vv.imag
        _, p = np.linalg.eigh((p_mix + p_mix.T) / 2)
        _, q = np.linalg.eigh((q_mix + q_mix.T) / 2)
        p = _fix_det(p)
        q = _fix_det(q)
        g = p @ q.T
        h = vg.conj().T @ g.T @ ug
        if np.max(np.abs(h.imag)) > 1e-8:
            continue
        if np.max(np.abs(g @ vg @ h - ug)) > 1e-9:
            continue
        ab = MAGIC @ g @ MAGIC_DAG
        cd = MAGIC @ h.real @ MAGIC_DAG
        try:
            a, b, _ = split_product_gate(ab)
            c, d, _ = split_product_gate(cd)
        except DecompositionError:
            continue
        return a, b, c, d
    raise DecompositionError("failed to extract single-qubit prefactors")


def _steps_0(su: np.ndarray):
    left, right, _ = split_product_gate(su)
    return [("local", HIGH, left), ("local", LOW, right)]


def _steps_1(su: np.ndarray):
    swap_u = np.exp(1j * np.pi / 4) * (SWAP @ su)
    ug = MAGIC_DAG @ swap_u @ MAGIC
    uu = ug @ ug.T
    _, p = np.linalg.eigh(uu.real)
    p = _fix_det(p)
    g = p @ _Q_ONE_CNOT.T
    h = _V_ONE_CNOT.conj().T @ g.T @ ug
    ab = MAGIC @ g @ MAGIC_DAG
    cd = MAGIC @ h @ MAGIC_DAG
    a, b, _ = split_product_gate(ab)
    c, d, _ = split_product_gate(cd)
    # The SWAP folded into the template exchanges which slot gets A and B.
    return [
        ("local", HIGH, c),
        ("local", LOW, d),
        ("cx", HIGH, LOW),
        ("local", LOW, a),
        ("local", HIGH, b),
    ]


def _steps_2(su: np.ndarray):
    evs = np.linalg.eigvals(_gamma(su))
    if np.allclose(np.sort(evs.real), [-1, -1, 1, 1], atol=1e-8) and np.max(np.abs(evs.imag)) < 1e-8:
        inner = _S_SX
        interior = [
            ("cx", LOW, HIGH),
            ("local", HIGH, _S_2),
            ("local", LOW, _SX_2),
            ("cx", LOW, HIGH),
        ]
    else:
        x = float(np.angle(evs[0]))
        y = float(np.angle(evs[1]))
        if abs(x + y) < 1e-9:
            y = float(np.angle(evs[2]))
        delta = (x + y) / 2
        phi = (x - y) / 2
        # Nudge delta off exact special points so the invariant spectra of
        # the template and the target remain simultaneously separable.
        delta += 5 * np.finfo(float).eps
        inner = np.kron(rz_matrix(delta), _rx_matrix(phi))
        interior = [
            ("cx", LOW, HIGH),
            ("local", HIGH, rz_matrix(delta)),
            ("local", LOW, _rx_matrix(phi)),
            ("cx", LOW, HIGH),
        ]
    v = CNOT_LH @ inner @ CNOT_LH
    a, b, c, d = _extract_prefactors(su, v)
    return [("local", HIGH, c), ("local", LOW, d), *interior, ("local", HIGH, a), ("local", LOW, b)]


def _steps_3(su: np.ndarray):
    swap_u = np.exp(1j * np.pi / 4) * (SWAP @ su)
    evs = np.linalg.eigvals(_gamma(swap_u))
    angles = np.sort(np.angle(evs))
    x, y, z = float(angles[0]), float(angles[1]), float(angles[2])
    alpha = (x + y) / 2
    beta = (x + z) / 2
    delta = (z + y) / 2
    interior = [
        ("cx", LOW, HIGH),
        ("local", HIGH, rz_matrix(delta)),
        ("local", LOW, ry_matrix(beta)),
        ("cx", HIGH, LOW),
        ("local", LOW, ry_matrix(alpha)),
        ("cx", LOW, HIGH),
    ]
    v = np.eye(4, dtype=complex)
    for kind, *rest in interior:
        if kind == "cx":
            v = (CNOT_LH if rest == [LOW, HIGH] else CNOT_HL) @ v
        else:
            slot, mat = rest
            v = (np.kron(mat, np.eye(2)) if slot == HIGH else np.kron(np.eye(2), mat)) @ v
    v = SWAP @ v
    a, b, c, d = _extract_prefactors(swap_u, v)
    # The SWAP absorbed into v swaps A and B across slots.
    return [("local", HIGH, c), ("local", LOW, d), *interior, ("local", LOW, a), ("local", HIGH, b)]


def _steps_matrix(steps) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    for kind, *rest in steps:
        if kind == "cx":
            m = (CNOT_LH if rest == [LOW, HIGH] else CNOT_HL) @ m
        else:
            slot, mat = rest
            m = (np.kron(mat, np.eye(2)) if slot == HIGH else np.kron(np.eye(2), mat)) @ m
    return m


def _phase_aligned_error(m: np.ndarray, u: np.ndarray) -> float:
    tr = complex(np.trace(u.conj().T @ m))
    if abs(tr) < 1e-12:
        return float("inf")
    return float(np.max(np.abs(m * (tr.conjugate() / abs(tr)) - u)))


def _merge_locals(steps):
    """Fuse consecutive single-qubit steps per slot between CNOTs."""
    merged = []
    pending = {LOW: None, HIGH: None}

    def flush():
        for slot in (HIGH, LOW):
            if pending[slot] is not None:
                merged.append(("local", slot, pending[slot]))
                pending[slot] = None

    for kind, *rest in steps:
        if kind == "cx":
            flush()
            merged.append(("cx", *rest))
        else:
            slot, mat = rest
            pending[slot] = mat if pending[slot] is None else mat @ pending[slot]
    flush()
    return merged


def _emit_local(slot: int, mat: np.ndarray) -> list[NativeOp]:
    a0, a1, a2, _ = zyz_angles(mat)
    ops = []
    if abs(a0) > 1e-12:
        ops.append(NativeOp("rz", slot, angle=a0))
    if abs(a1) > 1e-12:
        ops.append(NativeOp("ry", slot, angle=a1))
    if abs(a2) > 1e-12:
        ops.append(NativeOp("rz", slot, angle=a2))
    return ops


def decompose_gate(params: GateParams, atol: float = 1e-10) -> list[NativeOp]:
    """Native-gate sequence (rz/ry/cx over two slots) whose product equals
    the gate unitary up to global phase within atol.

    Non-canonical parameters are fine: the gate matrix is rebuilt and
    re-classified from scratch, so inputs are canonicalized implicitly.
    """
    u = params.matrix()
    if unitarity_defect(u) > 1e-9:
        raise DecompositionError("gate parameters do not form a unitary")
    su = _to_su4(u)
    builders = {0: _steps_0, 1: _steps_1, 2: _steps_2, 3: _steps_3}
    first = num_cnots_required(su)
    last_error = None
    for k in range(first, 4):
        try:
            steps = builders[k](su)
        except DecompositionError as exc:
            last_error = exc
            continue
        if _phase_aligned_error(_steps_matrix(steps), su) <= atol:
            steps = _merge_locals(steps)
            ops: list[NativeOp] = []
            for kind, *rest in steps:
                if kind == "cx":
                    ops.append(NativeOp("cx", rest[0], rest[1]))
                else:
                    ops.extend(_emit_local(rest[0], rest[1]))
            return ops
    raise DecompositionError(f"gate synthesis failed to verify: {last_error}")


def circuit_native_ops(circuit: Circuit) -> list[tuple]:
    """Whole-circuit native stream in global qubit indices: ("rz"/"ry",
    qubit, angle) and ("cx", control, target), layer order."""
    stream: list[tuple] = []
    for g in circuit.placements():
        lo = g.qubit_low
        for op in decompose_gate(g.params):
            if op.name == "cx":
                stream.append(("cx", lo + op.q0, lo + op.q1))
            else:
                stream.append((op.name, lo + op.q0, op.angle))
    for q in circuit.final_x:
        # X up to phase in the native set.
        stream.append(("rz", q, math.pi))
        stream.append(("ry", q, math.pi))
    return stream


def gate_count(circuit: Circuit) -> dict[str, int]:
    """Counts over the decomposed native stream; two_qubit counts CNOTs."""
    two = single = 0
    for op in circuit_native_ops(circuit):
        if op[0] == "cx":
            two += 1
        else:
            single += 1
    return {"two_qubit": two, "single_qubit": single}


def emit_qasm(circuit: Circuit) -> str:
    """Well-formed OpenQASM 2.0 with one quantum and one classical register,
    the decomposed gate stream in layer order, and a terminal full-register
    measurement.  Byte-stable for a fixed circuit."""
    n = circuit.n
    lines = [
        QASM_SCHEMA_HEADER,
        'include "qelib1.inc";',
        f"qreg q[{n}];",
        f"creg c[{n}];",
    ]
    for op in circuit_native_ops(circuit):
        if op[0] == "cx":
            lines.append(f"cx q[{op[1]}], q[{op[2]}];")
        else:
            lines.append(f"{op[0]}({op[2]:.17g}) q[{op[1]}];")
    lines.append("measure q -> c;")
    return "\n".join(lines) + "\n"


def qasm_filename(n: int, d: int, seed_hash: str) -> str:
    return f"prc_n{n}_d{d}_s{seed_hash}.qasm"
