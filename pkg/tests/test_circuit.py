import math

import pytest

from uccc.circuit import Circuit, Gate


def sample_circuit():
    gates = [
        Gate.h(0),
        Gate.rz(1, symbol="t0"),
        Gate.rz(2, symbol="t1", coeff=-0.25),
        Gate.rx(3, angle=math.pi / 2),
        Gate.cx(0, 2),
        Gate.measure(5, 0),
        Gate.reset(5),
        Gate.xc(5, 0),
    ]
    return Circuit(6, gates, ["t0", "t1"], n_bits=1)


class TestGate:
    def test_operand_arity_enforced(self):
        with pytest.raises(ValueError):
            Gate("CX", (1, 1))
        with pytest.raises(ValueError):
            Gate("H", (0, 1))
        with pytest.raises(ValueError):
            Gate("Rz", (0,))  # no angle and no symbol
        with pytest.raises(ValueError):
            Gate("Rz", (0,), angle=0.1, symbol="t0")
        with pytest.raises(ValueError):
            Gate("MEASURE", (0,))  # needs a bit

    def test_bound_angle(self):
        g = Gate.rz(0, symbol="t3", coeff=-2.0)
        assert g.bound_angle({"t3": 0.5}) == -1.0
        with pytest.raises(KeyError):
            g.bound_angle({})
        assert Gate.rx(0, angle=0.7).bound_angle(None) == 0.7

    def test_serialize_shapes(self):
        assert Gate.cx(0, 2).serialize() == "CX q0 q2"
        assert Gate.rz(1, symbol="t3").serialize() == "Rz(t3) q1"
        assert Gate.measure(5, 0).serialize() == "MEASURE q5 -> c0"
        assert Gate.xc(5, 0).serialize() == "XC c0 q5"
        assert Gate.rz(2, symbol="t1", coeff=-0.25).serialize() == "Rz(-0.25*t1) q2"


class TestCircuit:
    def test_validation(self):
        with pytest.raises(ValueError):
            Circuit(2, [Gate.h(2)])
        with pytest.raises(ValueError):
            Circuit(2, [Gate.measure(0, 0)], n_bits=0)
        with pytest.raises(ValueError):
            Circuit(2, [Gate.rz(0, symbol="t0")], parameters=["t1"])

    def test_immutable(self):
        c = sample_circuit()
        with pytest.raises(AttributeError):
            c.n_qubits = 3

    def test_two_qubit_gate_count(self):
        assert Circuit(2).two_qubit_gate_count() == 0
        assert sample_circuit().two_qubit_gate_count() == 1

    def test_bind_resolves_all_symbols(self):
        c = sample_circuit()
        b = c.bind({"t0": 1.0, "t1": 2.0})
        assert b.parameters == ()
        angles = [g.angle for g in b.gates if g.is_rotation]
        assert angles == [1.0, -0.5, math.pi / 2]
        assert [g.kind for g in b.gates] == [g.kind for g in c.gates]

    def test_bind_idempotent(self):
        c = sample_circuit()
        values = {"t0": 1.0, "t1": 2.0}
        assert c.bind(values).bind(values) == c.bind(values)

    def test_bind_missing_symbol(self):
        with pytest.raises(KeyError):
            sample_circuit().bind({"t0": 1.0})

    def test_bind_commutes_with_concatenation(self):
        a = Circuit(2, [Gate.rz(0, symbol="t0")], ["t0"])
        b = Circuit(2, [Gate.rx(1, symbol="t1", coeff=2.0)], ["t1"])
        values = {"t0": 0.3, "t1": -0.2}
        assert (a + b).bind(values) == a.bind(values) + b.bind(values)

    def test_concatenation_merges_parameters(self):
        a = Circuit(2, [Gate.rz(0, symbol="t0")], ["t0"])
        b = Circuit(2, [Gate.rz(1, symbol="t0"), Gate.rz(1, symbol="t1")], ["t0", "t1"])
        assert (a + b).parameters == ("t0", "t1")


class TestPrune:
    def test_tol_zero_unchanged(self):
        c = Circuit(1, [Gate.h(0), Gate.h(0)])  # adjacent pair must survive
        reduced, values = c.prune({}, 0)
        assert reduced == c

    def test_small_rotation_removed_and_cx_cancelled(self):
        gates = [Gate.cx(0, 1), Gate.rz(1, symbol="t0"), Gate.cx(0, 1)]
        c = Circuit(2, gates, ["t0"])
        reduced, values = c.prune({"t0": 1e-6}, 1e-4)
        assert len(reduced) == 0
        assert values == {}

    def test_surviving_rotation_keeps_structure(self):
        gates = [Gate.cx(0, 1), Gate.rz(1, symbol="t0"), Gate.cx(0, 1)]
        c = Circuit(2, gates, ["t0"])
        reduced, values = c.prune({"t0": 0.3}, 1e-4)
        assert reduced == c
        assert values == {"t0": 0.3}

    def test_nested_cancellation_reaches_fixed_point(self):
        # removing the inner rotation exposes nested CX and H pairs
        gates = [
            Gate.h(0),
            Gate.cx(0, 1),
            Gate.cx(1, 2),
            Gate.rz(2, angle=1e-9),
            Gate.cx(1, 2),
            Gate.cx(0, 1),
            Gate.h(0),
        ]
        reduced, _ = Circuit(3, gates).prune({}, 1e-4)
        assert len(reduced) == 0

    def test_rotation_merge(self):
        gates = [
            Gate.rz(0, angle=0.5),
            Gate.rz(0, angle=-0.5),
            Gate.rx(1, angle=1e-7),
            Gate.rz(1, angle=0.25),
            Gate.rz(1, angle=0.25),
        ]
        reduced, _ = Circuit(2, gates).prune({}, 1e-6)
        # the q0 pair merges to a zero rotation and vanishes with it
        assert [g.serialize() for g in reduced] == ["Rz(0.5) q1"]

    def test_never_increases_cx_count(self):
        c = sample_circuit()
        reduced, _ = c.prune({"t0": 1e-9, "t1": 1.0}, 1e-4)
        assert reduced.two_qubit_gate_count() <= c.two_qubit_gate_count()

    def test_measure_blocks_merging(self):
        gates = [Gate.rz(0, angle=0.5), Gate.measure(0, 0), Gate.rz(0, angle=-0.5),
                 Gate.rx(1, angle=1e-9)]
        reduced, _ = Circuit(2, gates, n_bits=1).prune({}, 1e-6)
        assert len(reduced) == 3


class TestSerialization:
    def test_text_round_trip(self):
        c = sample_circuit()
        assert Circuit.parse(c.serialize()) == c

    def test_json_round_trip(self):
        c = sample_circuit()
        assert Circuit.from_json(c.to_json()) == c

    def test_text_shape(self):
        text = sample_circuit().serialize()
        lines = text.strip().splitlines()
        assert lines[0] == "# qubits: 6"
        assert lines[1] == "# bits: 1"
        assert lines[2] == "# params: t0 t1"
        assert "CX q0 q2" in lines
        assert "MEASURE q5 -> c0" in lines

    def test_parse_scientific_notation_angle(self):
        c = Circuit(1, [Gate.rz(0, angle=1.5e-07)])
        assert Circuit.parse(c.serialize()) == c

    def test_parse_negative_coeff_symbol(self):
        c = Circuit(1, [Gate.rz(0, symbol="t0", coeff=-0.125)], ["t0"])
        assert Circuit.parse(c.serialize()) == c
