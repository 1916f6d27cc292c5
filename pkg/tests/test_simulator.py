from __future__ import annotations

import math

import numpy as np
import pytest

from pqk.circuit import LabelContext, QUBIT, BIT
from pqk.errors import SimulationError, UnsupportedGate
from pqk.parser import parse_circuit_text
from pqk.simulator import (
    QuantumState,
    branch_distribution,
    fidelity,
    parse_init_spec,
    simulate,
)
from pqk.trees import Assignment


def a(**kw):
    return Assignment.of(**kw)


HADAMARD = parse_circuit_text("input(q:Qubit); H(q) -> q2;")

MEAS_LIFT = parse_circuit_text("""
input(q:Qubit);
H(q) -> q2;
Meas(q2) -> x;
lift(x) => u;
""")

# teleportation core prefixed with the Bell-pair preamble entangling a and b
TELEPORT = parse_circuit_text("""
input(q0:Qubit);
Init0() -> b';
Init0() -> a';
H(b') -> b'';
CNOT(b'', a') -> (b0, a0);
CNOT(q0, a0) -> (q1, a1);
H(q1) -> q2;
Meas2(q2, a1) -> (x, y);
lift(x) => u;
lift(y) => s;
(u = 1; s = 0) ? Z(b0) -> b1;
(u = 0; s = 1) ? X(b0) -> b2;
(u = 1; s = 1) ? X(b0) -> b3;
(u = 1; s = 1) ? Z(b3) -> b4;
""")


class TestBasics:
    def test_hadamard_amplitudes(self):
        trace = simulate(HADAMARD, seed=1)
        amps = trace.state.vector()
        assert np.allclose(amps, np.array([1, 1]) / math.sqrt(2))
        assert trace.path == a()

    def test_no_lift_circuit_single_branch(self):
        counts = branch_distribution(HADAMARD, shots=50, seed=3)
        assert counts == {a(): 50}

    def test_meas2_on_00(self):
        c = parse_circuit_text(
            "input(q:Qubit, r:Qubit); Meas2(q, r) -> (x, y);"
        )
        trace = simulate(c, seed=5)
        assert trace.state.classical == {"x": 0, "y": 0}

    def test_seed_determinism(self):
        t1 = simulate(MEAS_LIFT, seed=42)
        t2 = simulate(MEAS_LIFT, seed=42)
        assert t1.path == t2.path
        assert np.array_equal(t1.state.amplitudes, t2.state.amplitudes)

    def test_sampled_path_is_a_path(self):
        for seed in range(20):
            trace = simulate(MEAS_LIFT, seed=seed)
            assert trace.path in (a(u=0), a(u=1))
            assert trace.outputs == LabelContext()

    def test_unsupported_gate(self):
        from pqk.circuit import Gate, GateSet, M_QUBIT, DEFAULT_GATES

        exotic = GateSet([Gate("Sqrt", M_QUBIT, M_QUBIT)] + [
            DEFAULT_GATES.get(n) for n in DEFAULT_GATES.names()
        ])
        c = parse_circuit_text("input(q:Qubit); Sqrt(q) -> q2;")
        with pytest.raises(UnsupportedGate):
            simulate(c, gateset=exotic)

    def test_init_spec_parsing(self):
        assert parse_init_spec("q=0, a=+") == {"q": "0", "a": "+"}
        with pytest.raises(SimulationError):
            parse_init_spec("nonsense")

    def test_bad_initial_state(self):
        with pytest.raises(SimulationError):
            simulate(HADAMARD, QuantumState.product(LabelContext.of({"z": QUBIT})))

    def test_conditional_skipped_on_other_branch(self):
        c = parse_circuit_text("""
        input(q:Qubit, r:Qubit);
        Meas(q) -> x;
        lift(x) => u;
        (u = 1) ? X(r) -> r1;
        (u = 0) ? Z(r) -> r2;
        """)
        trace = simulate(c, seed=0)
        live = trace.outputs.domain()
        assert live == {"r1"} if trace.path == a(u=1) else live == {"r2"}


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=2) + 1j * rng.normal(size=2)
    return vec / np.linalg.norm(vec)


class TestTeleportation:
    def test_fidelity_every_seed(self):
        rng = np.random.default_rng(7)
        for trial in range(10):
            psi = random_qubit(rng)
            init = QuantumState.product(TELEPORT.input, {"q0": psi})
            reference = QuantumState(("out",), np.asarray(psi, dtype=complex))
            for seed in range(5):
                trace = simulate(TELEPORT, init, seed=seed)
                got = QuantumState(("out",), trace.state.amplitudes)
                assert fidelity(reference, got) >= 1 - 1e-9

    def test_branches_uniform(self):
        rng = np.random.default_rng(11)
        psi = random_qubit(rng)
        init = QuantumState.product(TELEPORT.input, {"q0": psi})
        shots = 2000
        counts = branch_distribution(TELEPORT, init, shots=shots, seed=13)
        sigma = math.sqrt(shots * 0.25 * 0.75)
        for path, count in counts.items():
            assert abs(count - shots * 0.25) <= 5 * sigma, (path, count)


class TestConditionalMeasurement:
    def test_one_way_balanced(self):
        shots = 2000
        counts = branch_distribution(MEAS_LIFT, shots=shots, seed=17)
        sigma = math.sqrt(shots * 0.25)
        assert abs(counts[a(u=0)] - shots / 2) <= 5 * sigma
        assert abs(counts[a(u=1)] - shots / 2) <= 5 * sigma


class TestStateHelpers:
    def test_product_with_bits(self):
        ctx = LabelContext.of({"q": QUBIT, "b": BIT})
        state = QuantumState.product(ctx, {"q": "+", "b": 1})
        assert state.classical == {"b": 1}
        assert np.allclose(state.vector(), np.array([1, 1]) / math.sqrt(2))

    def test_fidelity_ignores_global_phase(self):
        s1 = QuantumState(("q",), np.array([1, 0], dtype=complex))
        s2 = QuantumState(("q",), np.exp(1j * 0.7) * np.array([1, 0], dtype=complex))
        assert fidelity(s1, s2) == pytest.approx(1.0)

    def test_fidelity_aligns_wire_order(self):
        bell = np.zeros((2, 2), dtype=complex)
        bell[0, 1] = 1.0
        s1 = QuantumState(("a", "b"), bell)
        s2 = QuantumState(("b", "a"), bell.T)
        assert fidelity(s1, s2) == pytest.approx(1.0)
