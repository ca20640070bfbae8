import random

import numpy as np
import pytest

from hybridts.qcircuit.core import (
    Circuit,
    ancilla_audit,
    append_increment,
    export_text,
    is_classical,
    simulate,
    trace_basis,
)


def test_x_and_h_basics():
    c = Circuit(1)
    c.x(0)
    assert abs(simulate(c)[1] - 1) < 1e-12

    c = Circuit(1)
    c.h(0)
    c.h(0)
    assert abs(simulate(c)[0] - 1) < 1e-12


def test_controls_and_polarity():
    c = Circuit(2)
    c.x(1, ((0, 1),))          # cnot
    assert trace_basis(c, 0b10).output_index == 0b11
    assert trace_basis(c, 0b00).output_index == 0b00

    c = Circuit(2)
    c.x(1, ((0, 0),))          # negative control
    assert trace_basis(c, 0b00).output_index == 0b01


def test_toffoli_multi_control():
    c = Circuit(4)
    c.x(3, ((0, 1), (1, 1), (2, 0)))
    assert trace_basis(c, 0b1100).output_index == 0b1101
    assert trace_basis(c, 0b1110).output_index == 0b1110


def test_reflect0_phase():
    c = Circuit(2)
    c.reflect0((0, 1))
    assert trace_basis(c, 0).phase == -1
    assert trace_basis(c, 1).phase == 1
    state = simulate(c, basis_input=0)
    assert state[0] == -1


def test_random_circuit_inverse_is_identity():
    rng = random.Random(41)
    gen = np.random.default_rng(41)
    for trial in range(12):
        w = rng.randint(2, 5)
        circ = Circuit(w)
        for _ in range(10):
            kind = rng.choice(["x", "h", "mcx", "inc", "reflect0", "unitary"])
            t = rng.randrange(w)
            if kind == "x":
                circ.x(t)
            elif kind == "h":
                circ.h(t)
            elif kind == "mcx":
                pool = [i for i in range(w) if i != t]
                ctrls = tuple((u, rng.randint(0, 1))
                              for u in rng.sample(pool, k=min(2, len(pool))))
                circ.x(t, ctrls)
            elif kind == "inc":
                circ.inc(tuple(rng.sample(range(w), k=rng.randint(1, w))))
            elif kind == "reflect0":
                circ.reflect0((t,))
            else:
                z = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
                q, _ = np.linalg.qr(z)
                circ.unitary((t,), q)
        full = Circuit(w)
        full.extend(circ)
        full.extend(circ.inverse())
        init = gen.normal(size=2 ** w) + 1j * gen.normal(size=2 ** w)
        init /= np.linalg.norm(init)
        out = simulate(full, state=init)
        assert np.abs(out - init).max() < 1e-9


def test_ripple_incrementer_matches_primitive():
    for w in (1, 2, 3, 4):
        prim = Circuit(w)
        prim.inc(tuple(range(w)))
        ripple = Circuit(w)
        append_increment(ripple, tuple(range(w)))
        dec = Circuit(w)
        append_increment(dec, tuple(range(w)), step=-1)
        for basis in range(2 ** w):
            assert trace_basis(prim, basis).output_index == (basis + 1) % 2 ** w
            assert trace_basis(ripple, basis).output_index == (basis + 1) % 2 ** w
            assert trace_basis(dec, basis).output_index == (basis - 1) % 2 ** w


def test_controlled_increment():
    c = Circuit(3)
    append_increment(c, (1, 2), controls=((0, 1),))
    assert trace_basis(c, 0b100).output_index == 0b101
    assert trace_basis(c, 0b000).output_index == 0b000


def test_trace_fast_path_matches_dense():
    rng = random.Random(42)
    for _ in range(10):
        w = rng.randint(2, 5)
        circ = Circuit(w)
        for _ in range(8):
            t = rng.randrange(w)
            choice = rng.random()
            if choice < 0.5:
                circ.x(t)
            elif choice < 0.8:
                circ.inc(tuple(rng.sample(range(w), k=2)) if w >= 2 else (t,))
            else:
                circ.reflect0((t,))
        assert is_classical(circ)
        basis = rng.randrange(2 ** w)
        tr = trace_basis(circ, basis)
        dense = simulate(circ, basis_input=basis)
        assert dense[tr.output_index] == tr.phase


def test_trace_rejects_live_quantum_gates():
    c = Circuit(2)
    c.h(0)
    with pytest.raises(ValueError):
        trace_basis(c, 0)
    # A controlled quantum gate whose controls fail is the identity.
    c = Circuit(2)
    c.h(1, ((0, 1),))
    assert trace_basis(c, 0b00).output_index == 0


def test_ancilla_audit():
    c = Circuit(3)
    c.x(2, ((0, 1),))
    c.x(1, ((2, 1),))
    c.x(2, ((0, 1),))       # uncompute
    assert ancilla_audit(c, range(4), wires=(2,))
    broken = Circuit(3)
    broken.x(2, ((0, 1),))
    assert not ancilla_audit(broken, [0b100], wires=(2,))


def test_export_text():
    c = Circuit(3)
    c.x(0)
    c.h(1)
    c.x(2, ((0, 1), (1, 0)))
    c.inc((1, 2), step=-1)
    c.unitary((0,), np.eye(2))
    text = export_text(c)
    lines = text.strip().splitlines()
    assert lines[0] == "wires 3"
    assert lines[3] == "x 2 ctrl 0+ 1-"
    assert "step -1" in lines[4]
    assert "block b0" in lines[5]


def test_norm_validation():
    c = Circuit(2)
    with pytest.raises(ValueError):
        simulate(c, state=np.array([1.0, 1.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        c.unitary((0,), np.array([[1, 1], [0, 1]], dtype=complex))
