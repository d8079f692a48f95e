"""Measurement grouping, averaging, mitigation, and JSD diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import jensenshannon

from uccc.circuit import Circuit
from uccc.estimation import (
    MeasurementSet,
    attach_verifiers,
    estimate_energy,
    exact_distribution,
    jsd,
    mmsv_accept_bit,
    mmsv_instrument,
    mmsv_postselect,
    partition_terms,
    pmsv_postselect,
)
from uccc.fermion import hamiltonian_from_model
from uccc.fixtures import load_fixture
from uccc.pauli import PauliTerm, QubitOperator, expectation
from uccc.simulator import NoiseSpec, ShotTable, sample, simulate_trajectory
from uccc.symmetry import (
    SymmetryOperator,
    number_parity_symmetries,
    point_group_z2_symmetries,
)
from uccc.synthesis import synth_chemically_aware

CH4_THETA = {"t4": -0.0431238761, "t7": -0.0431640301}


def ch4_setup():
    model = load_fixture("ch4_d2_6q")
    prep = synth_chemically_aware(model).bind(CH4_THETA)
    return model, prep, hamiltonian_from_model(model)


def pmsv2_symmetries(model):
    return number_parity_symmetries(model)[:2] + point_group_z2_symmetries(model)


# -- partitioning -------------------------------------------------------------


def test_partition_separates_anticommuting_terms():
    op = QubitOperator(
        [
            PauliTerm([(0, "Z")], 1.0),
            PauliTerm([(0, "Z"), (1, "Z")], 0.5),
            PauliTerm([(0, "X")], 0.25),
        ]
    )
    sets = partition_terms(op)
    assert sorted(len(s) for s in sets) == [1, 2]


def test_partition_all_z_is_one_set():
    op = QubitOperator(
        [PauliTerm([(q, "Z")], 1.0 / (q + 1)) for q in range(5)]
        + [PauliTerm([(0, "Z"), (3, "Z")], 0.3)]
    )
    sets = partition_terms(op)
    assert len(sets) == 1 and len(sets[0]) == 6


def test_partition_covers_terms_once_and_is_deterministic():
    model, _, op = ch4_setup()
    sets = partition_terms(op)
    again = partition_terms(op)
    assert [s.terms for s in sets] == [t.terms for t in again]
    seen = []
    for s in sets:
        for t in s.terms:
            assert all(t.commutes(u) for u in s.terms)
            seen.append(t.letters)
    expected = [t.letters for t in op.terms if not t.is_identity()]
    assert sorted(seen) == sorted(expected)


def test_partition_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        partition_terms(QubitOperator([PauliTerm([(0, "Z")], 1j)]))


def test_ch4_hamiltonian_partitions_into_four_sets():
    _, _, op = ch4_setup()
    sets = partition_terms(op)
    assert len(sets) == 4
    assert sorted(len(s) for s in sets) == [4, 4, 4, 21]


# -- verifier attachment -------------------------------------------------------


def test_z_symmetry_attaches_to_all_z_set():
    op = QubitOperator([PauliTerm([(0, "Z")], 1.0), PauliTerm([(1, "Z")], 0.5)])
    sym = SymmetryOperator(PauliTerm([(0, "Z"), (1, "Z")]), 1, "parity")
    (mset,) = attach_verifiers(partition_terms(op), [sym])
    assert mset.verifiers == (sym,)


def test_anticommuting_symmetry_not_attached():
    op = QubitOperator([PauliTerm([(0, "X")], 1.0)])
    sym = SymmetryOperator(PauliTerm([(0, "Z")]), 1, "z0")
    (mset,) = attach_verifiers(partition_terms(op), [sym])
    assert mset.verifiers == ()


def test_unreadable_commuting_symmetry_not_attached():
    # X1 commutes with Z0 but stays off-diagonal under the set's basis change
    op = QubitOperator([PauliTerm([(0, "Z")], 1.0)])
    sym = SymmetryOperator(PauliTerm([(1, "X")]), 1, "x1")
    (mset,) = attach_verifiers(partition_terms(op), [sym])
    assert mset.verifiers == ()


def test_ch4_pmsv2_verifies_every_set():
    model, _, op = ch4_setup()
    syms = pmsv2_symmetries(model)
    assert len(syms) == 4
    for mset in attach_verifiers(partition_terms(op), syms):
        assert set(mset.verifiers) == set(syms)


def test_measurement_set_rejects_bad_verifier():
    sym = SymmetryOperator(PauliTerm([(0, "Z")]), 1, "z0")
    with pytest.raises(ValueError, match="z0"):
        MeasurementSet([PauliTerm([(0, "X")], 1.0)], verifiers=(sym,))


# -- post-selection ------------------------------------------------------------


def test_noiseless_postselection_keeps_every_shot():
    model, prep, op = ch4_setup()
    sets = attach_verifiers(partition_terms(op), pmsv2_symmetries(model))
    for mset in sets:
        table = sample(mset.measurement_circuit(prep), 2000, noise=NoiseSpec(seed=5))
        assert pmsv_postselect(table, mset) == table


def test_single_bit_flip_on_support_is_discarded():
    model, prep, op = ch4_setup()
    mset = attach_verifiers(partition_terms(op), pmsv2_symmetries(model))[0]
    table = sample(mset.measurement_circuit(prep), 100, noise=NoiseSpec(seed=5))
    key = next(iter(table.counts))
    flip = max(bits for _, bits, _ in mset.verifier_checks if bits)[0]
    bad = key[:flip] + ("1" if key[flip] == "0" else "0") + key[flip + 1 :]
    poisoned = ShotTable({**table.counts, bad: 7}, table.n_bits)
    cleaned = pmsv_postselect(poisoned, mset)
    assert bad not in cleaned.counts
    assert cleaned.counts == table.counts


def test_postselect_requires_support_coverage():
    model, prep, op = ch4_setup()
    mset = attach_verifiers(partition_terms(op), pmsv2_symmetries(model))[0]
    narrow = ShotTable({"000": 5}, 3)
    with pytest.raises(ValueError, match="reads bit"):
        pmsv_postselect(narrow, mset)


# -- energy assembly -----------------------------------------------------------


def test_identity_operator_estimates_exactly():
    op = QubitOperator.identity(3.75)
    energy, err = estimate_energy([], [], op)
    assert energy == 3.75 and err == 0.0


def test_exact_probabilities_reproduce_dense_expectation():
    model, prep, op = ch4_setup()
    sets = partition_terms(op)
    tables = [exact_distribution(s.measurement_circuit(prep)) for s in sets]
    energy, err = estimate_energy(sets, tables, op)
    from uccc.simulator import run_statevector

    reference = expectation(op, run_statevector(prep).amplitudes).real
    assert abs(energy - reference) < 1e-10
    assert err == 0.0


def test_sampled_estimate_tracks_reference_with_sane_stderr():
    model, prep, op = ch4_setup()
    sets = attach_verifiers(partition_terms(op), pmsv2_symmetries(model))
    tables = [
        sample(s.measurement_circuit(prep), 20000, noise=NoiseSpec(seed=3))
        for s in sets
    ]
    energy, err = estimate_energy(sets, tables, op)
    assert abs(energy - (-39.73)) < 0.01
    assert 0.0 < err < 0.01


def test_empty_table_is_an_error():
    model, prep, op = ch4_setup()
    sets = partition_terms(op)
    tables = [exact_distribution(s.measurement_circuit(prep)) for s in sets]
    tables[1] = ShotTable({}, 6)
    with pytest.raises(ValueError, match="discarded"):
        estimate_energy(sets, tables, op)


def test_mismatched_sets_are_rejected():
    op = QubitOperator([PauliTerm([(0, "Z")], 1.0), PauliTerm([(1, "Z")], 0.5)])
    other = QubitOperator([PauliTerm([(0, "Z")], 1.0)])
    sets = partition_terms(other)
    with pytest.raises(ValueError, match="match the operator"):
        estimate_energy(sets, [{"00": 1.0}], op)


def test_noisy_postselection_beats_raw_on_energy_error():
    model, prep, op = ch4_setup()
    sets = attach_verifiers(partition_terms(op), pmsv2_symmetries(model))
    reference = -39.73
    raw_tables, clean_tables = [], []
    for index, mset in enumerate(sets):
        circ = mset.measurement_circuit(prep)
        table = sample(
            circ, 12000, noise=NoiseSpec(two_qubit_depolarizing_p=0.01, seed=40 + index)
        )
        raw_tables.append(table)
        clean_tables.append(pmsv_postselect(table, mset))
    raw_energy, _ = estimate_energy(sets, raw_tables, op)
    clean_energy, _ = estimate_energy(sets, clean_tables, op)
    assert sum(t.shots for t in clean_tables) < sum(t.shots for t in raw_tables)
    assert abs(clean_energy - reference) < abs(raw_energy - reference)


# -- MMSV ----------------------------------------------------------------------


def test_mmsv_total_parity_costs_ten_cx_on_six_qubits():
    model, prep, op = ch4_setup()
    total = number_parity_symmetries(model)[2]
    before = prep.two_qubit_gate_count()
    instrumented = mmsv_instrument(prep, total)
    assert instrumented.two_qubit_gate_count() - before == 10
    assert instrumented.has_midcircuit_ops()
    assert instrumented.n_bits == prep.n_qubits + 1


def test_mmsv_rejects_non_z_symmetry():
    sym = SymmetryOperator(PauliTerm([(0, "X"), (1, "X")]), 1, "flip")
    prep = synth_chemically_aware(load_fixture("ch4_d2_6q")).bind(CH4_THETA)
    with pytest.raises(ValueError, match="Z-string"):
        mmsv_instrument(prep, sym)


def test_mmsv_eigenstate_accepts_every_shot():
    model, prep, op = ch4_setup()
    total = number_parity_symmetries(model)[2]
    instrumented = mmsv_instrument(prep, total)
    bit, accept = mmsv_accept_bit(prep, total)
    rng = np.random.default_rng(9)
    for _ in range(20):
        bits, _ = simulate_trajectory(instrumented, rng=rng)
        assert bits[bit] == accept


@pytest.mark.parametrize("branch", [0, 1])
def test_mmsv_branch_states_match_dense_projector(branch):
    model = load_fixture("ch4_d2_6q")
    total = number_parity_symmetries(model)[2]
    n = model.n_spin_orbitals
    instrumented = mmsv_instrument(Circuit(n), total)
    dense_sym = QubitOperator.from_term(total.pauli).to_dense(n)
    rng = np.random.default_rng(17)
    for _ in range(25):
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        projected = 0.5 * (psi + (-1) ** branch * dense_sym @ psi)
        norm = np.linalg.norm(projected)
        bits, state = simulate_trajectory(
            instrumented, forced_outcomes=[branch, branch], initial=psi
        )
        assert bits[n] == branch
        assert np.linalg.norm(state.amplitudes - projected / norm) < 1e-10


def test_mmsv_postselect_keeps_accepted_branch():
    table = ShotTable({"0000001": 3, "0000000": 5}, 7)
    kept = mmsv_postselect(table, 6, 0)
    assert kept.counts == {"0000000": 5}


# -- JSD ------------------------------------------------------------------------


def test_jsd_identity_and_disjoint_extremes():
    assert jsd({"00": 0.5, "11": 0.5}, {"00": 0.5, "11": 0.5}) == 0.0
    assert abs(jsd({"00": 1.0}, {"11": 1.0}) - 1.0) < 1e-12
    table = ShotTable({"01": 3, "10": 1}, 2)
    assert jsd(table, table) == 0.0


def test_jsd_rejects_empty_distributions():
    with pytest.raises(ValueError, match="empty"):
        jsd(ShotTable({}, 2), ShotTable({}, 2))


@given(
    st.lists(st.integers(min_value=0, max_value=50), min_size=4, max_size=4),
    st.lists(st.integers(min_value=0, max_value=50), min_size=4, max_size=4),
)
@settings(max_examples=60, deadline=None)
def test_jsd_bounded_and_symmetric(a, b):
    keys = ["00", "01", "10", "11"]
    p = {k: v for k, v in zip(keys, a) if v}
    q = {k: v for k, v in zip(keys, b) if v}
    if not p or not q:
        return
    forward = jsd(p, q)
    assert 0.0 <= forward <= 1.0
    assert abs(forward - jsd(q, p)) < 1e-12


def test_jsd_agrees_with_scipy():
    rng = np.random.default_rng(4)
    p = rng.random(8)
    q = rng.random(8)
    keys = [format(i, "03b") for i in range(8)]
    ours = jsd(dict(zip(keys, p)), dict(zip(keys, q)))
    theirs = jensenshannon(p / p.sum(), q / q.sum(), base=2) ** 2
    assert abs(ours - theirs) < 1e-12


def test_noiseless_sampling_jsd_converges():
    model, prep, op = ch4_setup()
    mset = partition_terms(op)[0]
    circ = mset.measurement_circuit(prep)
    table = sample(circ, 100000, noise=NoiseSpec(seed=21))
    assert jsd(table, exact_distribution(circ)) < 5e-3


def test_postselection_never_increases_jsd_majority():
    model, prep, op = ch4_setup()
    mset = attach_verifiers(partition_terms(op), pmsv2_symmetries(model))[1]
    circ = mset.measurement_circuit(prep)
    ideal = exact_distribution(circ)
    wins = 0
    for seed in range(5):
        noisy = sample(
            circ, 6000, noise=NoiseSpec(two_qubit_depolarizing_p=0.01, seed=seed)
        )
        cleaned = pmsv_postselect(noisy, mset)
        if jsd(cleaned, ideal) <= jsd(noisy, ideal):
            wins += 1
    assert wins >= 3
