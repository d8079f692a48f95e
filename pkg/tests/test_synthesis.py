import math

import numpy as np
import pytest
from scipy.linalg import expm

from oracle import symmetrized_two_body
from uccc.circuit import Circuit, Gate
from uccc.fermion import (
    Excitation,
    MolecularModel,
    generate_uccsd_pool,
    hardcore_boson_image,
    jordan_wigner,
)
from uccc.pauli import PauliTerm
from uccc.simulator import run_statevector
from uccc.synthesis import (
    _commuting_set_gates,
    _pauli_rotation_gates,
    conjugate_term,
    diagonalize_commuting_terms,
    paired_double_gadget,
    retained_excitations,
    synth_chemically_aware,
    synth_commuting_sets,
    synth_individual,
    synthesize,
)


def make_model(m, occupation, irreps, group, seed=0):
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(m, m))
    h = (h + h.T) / 2
    g = symmetrized_two_body(rng, m)
    return MolecularModel(
        2 * m, occupation, h, g, orbital_irreps=irreps, point_group=group
    )


def circuit_unitary(circuit):
    dim = 2**circuit.n_qubits
    cols = [run_statevector(circuit, initial=k).amplitudes for k in range(dim)]
    return np.array(cols).T


def gate_unitary(gates, n_qubits):
    return circuit_unitary(Circuit(n_qubits, list(gates)))


def ordered_exponential(pool, values, n_qubits, hf_index):
    dim = 2**n_qubits
    state = np.zeros(dim, dtype=complex)
    state[hf_index] = 1.0
    for exc in pool:
        gen = jordan_wigner(exc.generator()).to_dense(n_qubits)
        state = expm(values[exc.parameter_id] * gen) @ state
    return state


class TestConjugation:
    def test_cx_conjugation_matches_dense(self):
        cx = gate_unitary([Gate.cx(0, 1)], 2)
        for a in "IXYZ":
            for b in "IXYZ":
                letters = [(q, L) for q, L in ((0, a), (1, b)) if L != "I"]
                term = PauliTerm(letters, 1.0)
                got = conjugate_term(term, [Gate.cx(0, 1)]).to_dense(2)
                want = cx @ term.to_dense(2) @ cx.conj().T
                assert np.allclose(got, want, atol=1e-12)

    def test_h_and_s_conjugation_match_dense(self):
        for g in (Gate.h(0), Gate.rz(0, angle=math.pi / 2), Gate.rz(0, angle=-math.pi / 2)):
            u = gate_unitary([g], 1)
            for L in "XYZ":
                term = PauliTerm([(0, L)], 1.0)
                got = conjugate_term(term, [g]).to_dense(1)
                want = u @ term.to_dense(1) @ u.conj().T
                assert np.allclose(got, want, atol=1e-12)


class TestDiagonalizer:
    def test_double_block_becomes_z_strings(self):
        exc = Excitation("generic-double", (2, 0, 3, 1), "t0")
        terms = jordan_wigner(exc.generator()).terms
        gates, conj, _ = diagonalize_commuting_terms(terms)
        v = gate_unitary(gates, 4)
        for before, after in zip(terms, conj):
            assert all(L == "Z" for _, L in after.letters)
            sign = (after.coeff / before.coeff).real
            assert abs(abs(sign) - 1) < 1e-12
            lhs = v @ PauliTerm(before.letters, 1.0).to_dense(4) @ v.conj().T
            rhs = PauliTerm(after.letters, sign).to_dense(4)
            assert np.allclose(lhs, rhs, atol=1e-12)

    def test_verifier_rows_stay_diagonal(self):
        exc = Excitation("generic-double", (2, 0, 3, 1), "t0")
        terms = jordan_wigner(exc.generator()).terms
        parity = PauliTerm([(q, "Z") for q in range(4)], 1.0)
        gates, _, extras = diagonalize_commuting_terms(terms, extra=[parity])
        assert len(extras) == 1
        assert all(L == "Z" for _, L in extras[0].letters)
        v = gate_unitary(gates, 4)
        lhs = v @ parity.to_dense(4) @ v.conj().T
        assert np.allclose(lhs, extras[0].to_dense(4), atol=1e-12)

    def test_rejects_anticommuting_rows(self):
        rows = [PauliTerm([(0, "X")], 1.0), PauliTerm([(0, "Z")], 1.0)]
        with pytest.raises(RuntimeError):
            diagonalize_commuting_terms(rows)


class TestPrimitive:
    def test_y0x1z2_shape_and_unitary(self):
        term = PauliTerm([(0, "Y"), (1, "X"), (2, "Z")], 1.0)
        gates = _pauli_rotation_gates(term, "t0", 1.0)
        kinds = [g.kind for g in gates]
        assert kinds.count("CX") == 4
        assert kinds.count("Rz") == 1
        theta = 0.731
        circ = Circuit(3, gates).bind({"t0": theta})
        want = expm(-0.5j * theta * term.to_dense(3))
        assert np.allclose(circuit_unitary(circ), want, atol=1e-12)


class TestPairedGadget:
    @pytest.mark.parametrize("theta", [0.0, 0.7, -0.3, 1.9, math.pi])
    def test_matches_hcb_exponential_exactly(self, theta):
        exc = Excitation("paired-double", (2, 0, 3, 1), "t0", spatial_pair=(0, 1))
        gates = paired_double_gadget(exc)
        circ = Circuit(4, gates).bind({"t0": theta})
        want = expm(theta * hardcore_boson_image(exc).to_dense(4))
        assert np.allclose(circuit_unitary(circ), want, atol=1e-12)

    def test_exactly_two_cx(self):
        exc = Excitation("paired-double", (2, 0, 3, 1), "t0", spatial_pair=(0, 1))
        gates = paired_double_gadget(exc)
        assert sum(g.kind == "CX" for g in gates) == 2

    def test_nonadjacent_pair_acts_on_even_qubits(self):
        exc = Excitation("paired-double", (4, 0, 5, 1), "t0", spatial_pair=(0, 2))
        gates = paired_double_gadget(exc)
        assert {q for g in gates for q in g.qubits} == {0, 4}


class TestGateCounts:
    def count(self, exc):
        return sum(g.kind == "CX" for g in _commuting_set_gates(exc))

    def test_zero_string_double_is_14(self):
        assert self.count(Excitation("generic-double", (2, 0, 3, 1), "t0")) == 14

    def test_single_ladders(self):
        # no JW string / one interior qubit / three interior qubits
        assert self.count(Excitation("single", (1, 0), "t0")) == 4
        assert self.count(Excitation("single", (2, 0), "t0")) == 6
        assert self.count(Excitation("single", (4, 0), "t0")) == 10

    def test_individual_paired_double_is_48(self):
        exc = Excitation("paired-double", (2, 0, 3, 1), "t0", spatial_pair=(0, 1))
        circ = synth_individual([exc], 4)
        assert circ.two_qubit_gate_count() == 48
        assert sum(g.symbol is not None for g in circ.gates) == 8

    def test_empty_pool_is_preparation_only(self):
        circ = synth_individual([], 4, occupied=(0, 1))
        assert circ.two_qubit_gate_count() == 0
        assert [g.kind for g in circ.gates] == ["Ry", "Ry"]
        assert circ.parameters == ()


class TestStrategyExactness:
    @pytest.mark.parametrize("occupation", ["110000", "110100"])
    def test_individual_matches_ordered_exponentials(self, occupation):
        model = make_model(3, occupation, ["a", "a", "a"], "C1")
        pool = generate_uccsd_pool(model)
        circ = synth_individual(pool, 6, model.occupied_spin_orbitals())
        rng = np.random.default_rng(7)
        for _ in range(5):
            values = {e.parameter_id: rng.uniform(-1.5, 1.5) for e in pool}
            got = run_statevector(circ.bind(values)).amplitudes
            want = ordered_exponential(pool, values, 6, model.hf_state_index())
            assert np.allclose(got, want, atol=1e-10)

    def test_commuting_matches_individual_statevector(self):
        model = make_model(3, "110000", ["a", "a", "a"], "C1")
        pool = generate_uccsd_pool(model)
        occ = model.occupied_spin_orbitals()
        a = synth_individual(pool, 6, occ)
        b = synth_commuting_sets(pool, 6, occ)
        rng = np.random.default_rng(11)
        for _ in range(5):
            values = {e.parameter_id: rng.uniform(-1.5, 1.5) for e in pool}
            sa = run_statevector(a.bind(values)).amplitudes
            sb = run_statevector(b.bind(values)).amplitudes
            assert np.allclose(sa, sb, atol=1e-10)

    def test_commuting_matches_ordered_exponentials(self):
        model = make_model(3, "110000", ["a", "a", "a"], "C1")
        pool = generate_uccsd_pool(model)
        circ = synth_commuting_sets(pool, 6, model.occupied_spin_orbitals())
        rng = np.random.default_rng(13)
        for _ in range(5):
            values = {e.parameter_id: rng.uniform(-1.5, 1.5) for e in pool}
            got = run_statevector(circ.bind(values)).amplitudes
            want = ordered_exponential(pool, values, 6, model.hf_state_index())
            assert np.allclose(got, want, atol=1e-10)

    @pytest.mark.parametrize(
        "m,occupation,irreps,group",
        [
            (3, "110000", ["b3", "b1", "b2"], "D2"),
            (3, "111000", ["a'", "a''", "a'"], "Cs"),
            (2, "1100", ["a", "b"], "C2"),
        ],
    )
    def test_chemaware_matches_ordered_exponentials(self, m, occupation, irreps, group):
        model = make_model(m, occupation, irreps, group)
        circ = synth_chemically_aware(model)
        order = retained_excitations(model)
        assert [e.parameter_id for e in order] == list(circ.parameters)
        rng = np.random.default_rng(17)
        for _ in range(5):
            values = {e.parameter_id: rng.uniform(-1.0, 1.0) for e in order}
            got = run_statevector(circ.bind(values)).amplitudes
            want = ordered_exponential(
                order, values, model.n_spin_orbitals, model.hf_state_index()
            )
            assert np.allclose(got, want, atol=1e-10)


class TestChemawareStructure:
    def test_d2_closed_shell_costs_seven_cx(self):
        model = make_model(3, "110000", ["b3", "b1", "b2"], "D2")
        circ = synth_chemically_aware(model)
        assert circ.two_qubit_gate_count() == 7
        assert len(circ.parameters) == 2

    def test_open_shell_emits_gadget_then_expansion_then_rest(self):
        model = make_model(3, "111000", ["a'", "a''", "a'"], "Cs")
        circ = synth_chemically_aware(model)
        order = retained_excitations(model)
        assert order[0].category == "paired-double"
        kinds = [g.kind for g in circ.gates]
        # preparation flips come first
        assert kinds[0] == "Ry" and kinds[1] == "Ry"

    def test_dominance_across_models(self):
        cases = [
            (3, "110000", ["b3", "b1", "b2"], "D2"),
            (3, "111000", ["a'", "a''", "a'"], "Cs"),
            (2, "1100", ["a", "b"], "C2"),
            (3, "110000", ["a", "a", "a"], "C1"),
        ]
        for m, occupation, irreps, group in cases:
            model = make_model(m, occupation, irreps, group)
            counts = [
                synthesize(model, s).two_qubit_gate_count()
                for s in ("chemaware", "commuting", "individual")
            ]
            assert counts[0] <= counts[1] <= counts[2], (group, counts)

    def test_synthesize_rejects_unknown_strategy(self):
        model = make_model(2, "1100", ["a", "b"], "C2")
        with pytest.raises(ValueError):
            synthesize(model, "fancy")

    def test_deterministic_output(self):
        model = make_model(3, "111000", ["a'", "a''", "a'"], "Cs")
        assert synth_chemically_aware(model).serialize() == synth_chemically_aware(
            model
        ).serialize()
