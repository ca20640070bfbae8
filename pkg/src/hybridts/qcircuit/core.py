"""Dense statevector simulation with a fast basis-state trace path.

Wire convention: wire 0 is the most significant bit of the basis index, so a
basis state reads left-to-right as wires 0..W-1. Gates carry optional control
lists of (wire, required-bit) pairs; negative controls are (wire, 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import config

SQRT1_2 = 1.0 / math.sqrt(2.0)

X_KIND = "x"
H_KIND = "h"
UNITARY_KIND = "unitary"
INC_KIND = "inc"
REFLECT0_KIND = "reflect0"

_CLASSICAL_KINDS = {X_KIND, INC_KIND, REFLECT0_KIND}


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, int], ...] = ()
    block: np.ndarray | None = field(default=None)
    step: int = 1          # increment direction for INC gates

    def inverse(self) -> "Gate":
        if self.kind == INC_KIND:
            return Gate(INC_KIND, self.targets, self.controls, step=-self.step)
        if self.kind == UNITARY_KIND:
            return Gate(UNITARY_KIND, self.targets, self.controls,
                        block=self.block.conj().T)
        return self  # x, h, reflect0 are self-inverse


class Circuit:
    def __init__(self, num_wires: int):
        if num_wires < 1:
            raise ValueError("a circuit needs at least one wire")
        self.num_wires = num_wires
        self.gates: list[Gate] = []

    # -- construction helpers ------------------------------------------------

    def _check(self, wires, controls):
        used = set()
        for w in list(wires) + [c[0] for c in controls]:
            if not 0 <= w < self.num_wires:
                raise ValueError(f"wire {w} out of range")
            if w in used:
                raise ValueError(f"wire {w} used twice in one gate")
            used.add(w)

    def x(self, target: int, controls=()):
        controls = tuple(controls)
        self._check([target], controls)
        self.gates.append(Gate(X_KIND, (target,), controls))
        return self

    def mcx(self, controls, target: int):
        return self.x(target, controls)

    def h(self, target: int, controls=()):
        controls = tuple(controls)
        self._check([target], controls)
        self.gates.append(Gate(H_KIND, (target,), controls))
        return self

    def unitary(self, targets, block: np.ndarray, controls=()):
        targets = tuple(targets)
        controls = tuple(controls)
        self._check(targets, controls)
        dim = 2 ** len(targets)
        block = np.asarray(block, dtype=complex)
        if block.shape != (dim, dim):
            raise ValueError("block shape does not match the target count")
        if np.abs(block @ block.conj().T - np.eye(dim)).max() > 1e-12:
            raise ValueError("controlled-unitary block is not unitary")
        self.gates.append(Gate(UNITARY_KIND, targets, controls, block=block))
        return self

    def inc(self, register, controls=(), step: int = 1):
        register = tuple(register)
        controls = tuple(controls)
        self._check(register, controls)
        self.gates.append(Gate(INC_KIND, register, controls, step=step))
        return self

    def reflect0(self, targets, controls=()):
        targets = tuple(targets)
        controls = tuple(controls)
        self._check(targets, controls)
        self.gates.append(Gate(REFLECT0_KIND, targets, controls))
        return self

    def extend(self, other: "Circuit"):
        if other.num_wires > self.num_wires:
            raise ValueError("cannot extend with a wider circuit")
        self.gates.extend(other.gates)
        return self

    def inverse(self) -> "Circuit":
        inv = Circuit(self.num_wires)
        inv.gates = [g.inverse() for g in reversed(self.gates)]
        return inv

    def gate_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for g in self.gates:
            counts[g.kind] = counts.get(g.kind, 0) + 1
        return counts


def is_classical(circuit: Circuit) -> bool:
    """True when every gate maps basis states to (phased) basis states."""
    return all(g.kind in _CLASSICAL_KINDS for g in circuit.gates)


def _wire_bit(circuit_width: int, wire: int) -> int:
    return 1 << (circuit_width - 1 - wire)


def _control_masks(width: int, controls) -> tuple[int, int]:
    cmask = cwant = 0
    for wire, want in controls:
        bit = _wire_bit(width, wire)
        cmask |= bit
        if want:
            cwant |= bit
    return cmask, cwant


@dataclass
class TraceResult:
    """Basis-state trajectory through a classical-reversible circuit."""

    input_index: int
    output_index: int
    phase: complex
    states: list[int] | None = None


def trace_basis(circuit: Circuit, basis_input: int, record: bool = False) -> TraceResult:
    width = circuit.num_wires
    if not 0 <= basis_input < 2 ** width:
        raise ValueError("basis input out of range")
    idx = basis_input
    phase = 1.0 + 0.0j
    states = [idx] if record else None
    for gate in circuit.gates:
        cmask, cwant = _control_masks(width, gate.controls)
        if gate.kind not in _CLASSICAL_KINDS:
            # A quantum gate whose controls fail acts as the identity.
            if (idx & cmask) == cwant or not gate.controls:
                raise ValueError(f"gate kind {gate.kind!r} breaks the classical trace")
            if record:
                states.append(idx)
            continue
        if (idx & cmask) == cwant:
            if gate.kind == X_KIND:
                idx ^= _wire_bit(width, gate.targets[0])
            elif gate.kind == INC_KIND:
                k = len(gate.targets)
                value = 0
                for pos, wire in enumerate(gate.targets):
                    value |= ((idx >> (width - 1 - wire)) & 1) << (k - 1 - pos)
                value = (value + gate.step) % (2 ** k)
                for pos, wire in enumerate(gate.targets):
                    bit = _wire_bit(width, wire)
                    if (value >> (k - 1 - pos)) & 1:
                        idx |= bit
                    else:
                        idx &= ~bit
            else:  # reflect0: diagonal phase
                tmask = 0
                for wire in gate.targets:
                    tmask |= _wire_bit(width, wire)
                if idx & tmask == 0:
                    phase = -phase
        if record:
            states.append(idx)
    return TraceResult(basis_input, idx, phase, states)


def simulate(circuit: Circuit, basis_input: int | None = None,
             state: np.ndarray | None = None) -> np.ndarray:
    """Exact amplitude evolution; basis inputs through classical gates take
    the trace fast path."""
    width = circuit.num_wires
    dim = 2 ** width
    if dim > config.circuit_dim_cap():
        raise ValueError(f"statevector dimension 2^{width} exceeds the cap")
    if state is not None and basis_input is not None:
        raise ValueError("give either a basis input or a state, not both")
    if state is None:
        start = basis_input or 0
        if is_classical(circuit):
            trace = trace_basis(circuit, start)
            out = np.zeros(dim, dtype=complex)
            out[trace.output_index] = trace.phase
            return out
        state = np.zeros(dim, dtype=complex)
        state[start] = 1.0
    else:
        state = np.asarray(state, dtype=complex).copy()
        if state.shape != (dim,):
            raise ValueError("initial state has the wrong dimension")
        norm = np.linalg.norm(state)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError("initial state is not normalized")

    idx = np.arange(dim, dtype=np.int64)
    for gate in circuit.gates:
        state = _apply_gate(state, gate, width, idx)
    if abs(np.linalg.norm(state) - 1.0) > 1e-9:
        raise AssertionError("statevector norm drifted")
    return state


def _apply_gate(state: np.ndarray, gate: Gate, width: int, idx: np.ndarray) -> np.ndarray:
    cmask, cwant = _control_masks(width, gate.controls)
    sel = (idx & cmask) == cwant if cmask else None

    if gate.kind == X_KIND:
        bit = _wire_bit(width, gate.targets[0])
        flipped = idx ^ bit
        if sel is None:
            return state[flipped]
        out = state.copy()
        out[sel] = state[flipped[sel]]
        return out

    if gate.kind == H_KIND:
        bit = _wire_bit(width, gate.targets[0])
        low = (idx & bit) == 0
        base = low if sel is None else (low & sel)
        i0 = idx[base]
        i1 = i0 | bit
        out = state.copy()
        a, b = state[i0], state[i1]
        out[i0] = (a + b) * SQRT1_2
        out[i1] = (a - b) * SQRT1_2
        return out

    if gate.kind == REFLECT0_KIND:
        tmask = 0
        for wire in gate.targets:
            tmask |= _wire_bit(width, wire)
        zero = (idx & tmask) == 0
        if sel is not None:
            zero &= sel
        out = state.copy()
        out[zero] = -out[zero]
        return out

    if gate.kind == INC_KIND:
        k = len(gate.targets)
        shifts = [width - 1 - w for w in gate.targets]
        value = np.zeros_like(idx)
        for pos, sh in enumerate(shifts):
            value |= ((idx >> sh) & 1) << (k - 1 - pos)
        new_value = (value + gate.step) % (2 ** k)
        new_idx = idx.copy()
        for pos, sh in enumerate(shifts):
            bit = 1 << sh
            on = ((new_value >> (k - 1 - pos)) & 1).astype(bool)
            new_idx = np.where(on, new_idx | bit, new_idx & ~bit)
        out = state.copy() if sel is not None else np.empty_like(state)
        src = idx if sel is None else idx[sel]
        dst = new_idx if sel is None else new_idx[sel]
        out[dst] = state[src]
        return out

    if gate.kind == UNITARY_KIND:
        k = len(gate.targets)
        tbits = [_wire_bit(width, w) for w in gate.targets]
        tmask = 0
        for b in tbits:
            tmask |= b
        base_sel = (idx & tmask) == 0
        if sel is not None:
            base_sel &= sel
        bases = idx[base_sel]
        if bases.size == 0:
            return state
        pattern_bits = []
        for j in range(2 ** k):
            bits = 0
            for pos, b in enumerate(tbits):
                if (j >> (k - 1 - pos)) & 1:
                    bits |= b
            pattern_bits.append(bits)
        sub = np.stack([state[bases | pb] for pb in pattern_bits])
        new_sub = gate.block @ sub
        out = state.copy()
        for j, pb in enumerate(pattern_bits):
            out[bases | pb] = new_sub[j]
        return out

    raise ValueError(f"unknown gate kind {gate.kind!r}")


def append_increment(circuit: Circuit, register, controls=(), step: int = 1):
    """Ripple increment of a register (wires MSB first) as a multi-controlled-X
    cascade; step=-1 appends the inverse cascade."""
    register = tuple(register)
    controls = tuple(controls)
    k = len(register)
    gates = []
    for pos in range(k):
        # Flip bit `pos` (MSB first) when all less-significant bits are 1.
        lower = [(w, 1) for w in register[pos + 1:]]
        gates.append((register[pos], tuple(lower) + controls))
    if step == -1:
        gates.reverse()
    elif step != 1:
        raise ValueError("step must be +1 or -1")
    for target, ctrls in gates:
        circuit.x(target, ctrls)
    return circuit


def ancilla_audit(circuit: Circuit, inputs, wires) -> bool:
    """Check that the given wires return to their input values on every
    listed basis input (restoration contract for oracle ancillas)."""
    width = circuit.num_wires
    mask = 0
    for w in wires:
        mask |= _wire_bit(width, w)
    for basis in inputs:
        trace = trace_basis(circuit, basis)
        if (trace.output_index & mask) != (basis & mask):
            return False
    return True


def export_text(circuit: Circuit) -> str:
    """Line-oriented audit format: gate name, wires, controls, block refs."""
    lines = [f"wires {circuit.num_wires}"]
    blocks = 0
    for gate in circuit.gates:
        parts = [gate.kind, " ".join(str(t) for t in gate.targets)]
        if gate.controls:
            parts.append("ctrl " + " ".join(f"{w}{'+' if b else '-'}"
                                            for w, b in gate.controls))
        if gate.kind == INC_KIND:
            parts.append(f"step {gate.step:+d}")
        if gate.block is not None:
            parts.append(f"block b{blocks}")
            blocks += 1
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
