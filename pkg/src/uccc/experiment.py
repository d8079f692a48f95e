"""Experiment orchestration: a config dict in, a reproducible report out.

A config names a model, a synthesis strategy, and a task; ``run_experiment``
synthesizes the circuit, runs the task, and returns a JSON-ready report
carrying gate counts, energies with statistical error, sampling diagnostics,
paths of any files written next to the report, the master seed, and an echo
of the resolved config. Two runs with the same config and seed produce the
same report except for the timestamp.
"""

from __future__ import annotations

import datetime
import json
from pathlib import Path

import numpy as np

from .circuit import Circuit, Gate
from .estimation import (
    attach_verifiers,
    estimate_energy,
    exact_distribution,
    jsd,
    partition_terms,
    pmsv_postselect,
)
from .fermion import FermionOperator, hamiltonian_from_model
from .fixtures import resolve_model
from .simulator import NoiseSpec, sample
from .spectra import (
    broaden,
    default_expansion,
    full_expansion,
    merge_degenerate,
    oscillator_strengths,
    qse_solve,
    transition_dipoles,
    vqe_optimize,
)
from .symmetry import number_parity_symmetries, point_group_z2_symmetries
from .synthesis import synthesize

TASKS = ("synth", "compare-strategies", "vqe", "estimate", "qse", "spectrum", "run")
STRATEGIES = ("individual", "commuting", "chemaware")

DEFAULTS = {
    "task": "vqe",
    "model": "",
    "point_group": None,
    "strategy": "chemaware",
    "seed": 0,
    "shots": 0,
    "noise_p2": 0.0,
    "noise_flip": 0.0,
    "mitigation": "none",
    "expansion": "default",
    "estimator": "exact",
    "gamma": 0.01,
}

UNITS = {
    "energy": "hartree",
    "energies": "hartree",
    "stderr": "hartree",
    "gaps": "hartree",
    "excitation_energies": "hartree",
    "oscillator_strength": "dimensionless",
    "jsd": "bits",
    "gate_counts": "count",
    "shots": "count",
    "gamma": "hartree",
    "parameters": "radians",
}

REPORT_KEYS = ("schema", "task", "config", "model", "gates", "results", "units", "seed", "timestamp")


def _resolved(config: dict) -> dict:
    unknown = set(config) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    merged = {**DEFAULTS, **{k: v for k, v in config.items() if v is not None}}
    if merged["task"] not in TASKS:
        raise ValueError(f"unknown task {merged['task']!r} (need one of {TASKS})")
    if merged["strategy"] not in STRATEGIES:
        raise ValueError(f"unknown strategy {merged['strategy']!r}")
    if not merged["model"]:
        raise ValueError("config needs a model reference")
    return merged


def _verifiers(model, mitigation: str):
    if mitigation == "none":
        return []
    parities = number_parity_symmetries(model)[:2]
    if mitigation == "pmsv1":
        return parities
    if mitigation == "pmsv2":
        return parities + point_group_z2_symmetries(model)
    raise ValueError(f"unknown mitigation {mitigation!r} (none, pmsv1, pmsv2)")


def _split_shots(total: int, n_sets: int) -> list:
    base, extra = divmod(total, n_sets)
    counts = [base + (1 if i < extra else 0) for i in range(n_sets)]
    if any(c <= 0 for c in counts):
        raise ValueError(f"{total} shots cannot cover {n_sets} measurement sets")
    return counts


def _expansion_ops(model, choice):
    if choice == "default":
        return default_expansion(model)
    if choice == "full":
        return full_expansion(model)
    path = Path(choice)
    if not path.exists():
        raise ValueError(f"expansion {choice!r} is not 'default', 'full', or a file")
    data = json.loads(path.read_text())
    ops = []
    for op_terms in data:
        terms = [
            (tuple((int(i), bool(d)) for i, d in term_ops), complex(coeff).real)
            for coeff, term_ops in op_terms
        ]
        ops.append(FermionOperator(terms))
    return ops


def _gate_block(circuit) -> dict:
    return {
        "two_qubit_gates": circuit.two_qubit_gate_count(),
        "rotations": circuit.rotation_count(),
        "total_gates": len(circuit.gates),
        "parameters": len(circuit.parameters),
        "qubits": circuit.n_qubits,
    }


def _estimate_task(model, prep, config) -> dict:
    op = hamiltonian_from_model(model)
    sets = partition_terms(op)
    verifiers = _verifiers(model, config["mitigation"])
    if verifiers:
        sets = attach_verifiers(sets, verifiers)
    shots = config["shots"]
    if shots <= 0:
        raise ValueError("estimate task needs shots > 0")
    per_set = _split_shots(shots, len(sets))
    tables = []
    divergences = []
    kept = 0
    for index, (mset, n) in enumerate(zip(sets, per_set)):
        circuit = mset.measurement_circuit(prep)
        noise = NoiseSpec(
            two_qubit_depolarizing_p=config["noise_p2"],
            measurement_flip_p=config["noise_flip"],
            seed=config["seed"] * 100 + index,
        )
        table = sample(circuit, n, noise=noise)
        if mset.verifiers:
            table = pmsv_postselect(table, mset)
        kept += table.shots
        divergences.append(jsd(table, exact_distribution(circuit)))
        tables.append(table)
    energy, stderr = estimate_energy(sets, tables, op)
    return {
        "energy": energy,
        "stderr": stderr,
        "shots_requested": shots,
        "shots_kept": kept,
        "measurement_sets": len(sets),
        "set_sizes": [len(s.terms) for s in sets],
        "verifiers_per_set": [len(s.verifiers) for s in sets],
        "jsd_per_set": divergences,
        "jsd_median": float(np.median(divergences)),
    }


def _qse_results(model, prep_pair, config) -> tuple:
    ops = _expansion_ops(model, config["expansion"])
    estimator = config["estimator"]
    if estimator == "shots":
        estimator = "sampled"
    kwargs = {}
    if estimator == "sampled":
        kwargs = {
            "shots": config["shots"] if config["shots"] > 0 else 4096,
            "noise": NoiseSpec(
                two_qubit_depolarizing_p=config["noise_p2"],
                measurement_flip_p=config["noise_flip"],
                seed=config["seed"],
            ),
            "verifiers": _verifiers(model, config["mitigation"]) or None,
        }
    result = qse_solve(model, prep_pair, expansion=ops, estimator=estimator, **kwargs)
    block = {
        "energies": [float(v) for v in result.eigenvalues],
        "gaps": [float(v - result.eigenvalues[0]) for v in result.eigenvalues],
        "degenerate": [bool(b) for b in result.degenerate_flags],
        "expansion_size": len(ops),
        "retained_states": len(result.eigenvalues),
    }
    return result, block


def _spectrum_files(model, prep_pair, result, config, out_dir, stem) -> dict:
    dipoles = transition_dipoles(result, prep_pair, model)
    excitations = result.eigenvalues[1:] - result.eigenvalues[0]
    points = oscillator_strengths(dipoles[1:], excitations)
    sticks = merge_degenerate([p for p in points if p.oscillator_strength > 1e-12])
    grid, curve = broaden(sticks, config["gamma"])

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sticks_path = out_dir / f"{stem}_sticks.csv"
    curve_path = out_dir / f"{stem}_curve.csv"
    figure_path = out_dir / f"{stem}_spectrum.png"

    lines = ["energy_hartree,oscillator_strength"]
    lines += [f"{p.energy!r},{p.oscillator_strength!r}" for p in sticks]
    sticks_path.write_text("\n".join(lines) + "\n")
    lines = ["energy_hartree,intensity"]
    lines += [f"{float(e)!r},{float(v)!r}" for e, v in zip(grid, curve)]
    curve_path.write_text("\n".join(lines) + "\n")

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(grid, curve, lw=1.2)
    for p in sticks:
        ax.axvline(p.energy, color="tab:red", lw=0.8, ls="--", alpha=0.6)
    ax.set_xlabel("excitation energy (hartree)")
    ax.set_ylabel("intensity")
    fig.tight_layout()
    fig.savefig(figure_path, dpi=150)
    plt.close(fig)

    return {
        "gamma": config["gamma"],
        "sticks": [
            {"energy": p.energy, "oscillator_strength": p.oscillator_strength}
            for p in sticks
        ],
        "sticks_csv": sticks_path.name,
        "curve_csv": curve_path.name,
        "figure_png": figure_path.name,
    }


def run_experiment(config: dict, out_dir=".", stem: str = "uccc") -> dict:
    """Execute one configured task and return the report dict."""
    config = _resolved(config)
    model = resolve_model(config["model"], point_group=config["point_group"])
    task = config["task"]

    circuit = synthesize(model, config["strategy"])
    results: dict = {}

    if task == "synth":
        pass
    elif task == "compare-strategies":
        counts = {}
        for strategy in STRATEGIES:
            counts[strategy] = _gate_block(synthesize(model, strategy))
        ordered = (
            counts["chemaware"]["two_qubit_gates"]
            <= counts["commuting"]["two_qubit_gates"]
            <= counts["individual"]["two_qubit_gates"]
        )
        results = {"strategies": counts, "ordering_ok": bool(ordered)}
    else:
        params, energy = vqe_optimize(model, circuit)
        prep = circuit.bind(params)
        if task == "vqe":
            results = {
                "energy": energy,
                "parameters": {k: float(v) for k, v in sorted(params.items())},
            }
        elif task == "estimate":
            results = _estimate_task(model, prep, config)
            results["reference_energy"] = energy
        elif task == "qse":
            _, results = _qse_results(model, (circuit, params), config)
            results["ground_energy"] = energy
        elif task == "spectrum":
            result, block = _qse_results(model, (circuit, params), config)
            block["spectrum"] = _spectrum_files(
                model, (circuit, params), result, config, out_dir, stem
            )
            results = block
        elif task == "run":
            shots = config["shots"] if config["shots"] > 0 else 1024
            noise = NoiseSpec(
                two_qubit_depolarizing_p=config["noise_p2"],
                measurement_flip_p=config["noise_flip"],
                seed=config["seed"],
            )
            measured = Circuit(
                circuit.n_qubits,
                list(prep.gates)
                + [Gate.measure(q, q) for q in range(circuit.n_qubits)],
                n_bits=circuit.n_qubits,
            )
            table = sample(measured, shots, noise=noise)
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            table_path = out / f"{stem}_shots.csv"
            table_path.write_text(table.to_csv())
            results = {
                "shots": table.shots,
                "distinct_bitstrings": len(table.counts),
                "jsd_vs_exact": jsd(table, exact_distribution(measured)),
                "table_csv": table_path.name,
            }

    report = {
        "schema": "uccc-report/1",
        "task": task,
        "config": config,
        "model": {
            "source": str(config["model"]),
            "qubits": model.n_spin_orbitals,
            "point_group": model.point_group,
            "core_energy": model.core_energy,
        },
        "gates": _gate_block(circuit),
        "results": results,
        "units": UNITS,
        "seed": config["seed"],
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    validate_report(report)
    return report


def validate_report(report: dict) -> None:
    """Structural check: required keys, typed gate counts, units coverage."""
    missing = [k for k in REPORT_KEYS if k not in report]
    if missing:
        raise ValueError(f"report is missing keys {missing}")
    gates = report["gates"]
    if not all(isinstance(gates[k], int) for k in ("two_qubit_gates", "rotations")):
        raise ValueError("gate counts must be integers")
    units = report["units"]
    if not units or not all(isinstance(v, str) and v for v in units.values()):
        raise ValueError("units must be a map of non-empty strings")
    json.dumps(report)  # must be serializable as-is


def report_json(report: dict) -> str:
    """Canonical serialization: sorted keys so identical runs are comparable."""
    return json.dumps(report, indent=1, sort_keys=True) + "\n"


def reaction_energy(entries) -> float:
    """Signed sum of stoichiometry * energy over reaction participants."""
    entries = list(entries)
    if len(entries) < 2:
        raise ValueError("a reaction needs at least two participants")
    return float(sum(stoich * energy for _, energy, stoich in entries))


def run_reaction(config: dict) -> dict:
    """Reaction-energy difference over configured species.

    Each species entry carries ``label``, ``stoichiometry``, and either a
    fixed ``energy`` or a ``model`` reference whose ground state is solved
    with the configured strategy.
    """
    species = config.get("species", [])
    strategy = config.get("strategy", "chemaware")
    rows = []
    for entry in species:
        label = entry.get("label", entry.get("model", "?"))
        if "energy" in entry:
            energy = float(entry["energy"])
        elif "model" in entry:
            model = resolve_model(entry["model"], point_group=entry.get("point_group"))
            circuit = synthesize(model, strategy)
            _, energy = vqe_optimize(model, circuit)
        else:
            raise ValueError(f"species {label!r} needs an energy or a model")
        rows.append((label, energy, float(entry["stoichiometry"])))
    total = reaction_energy(rows)
    return {
        "schema": "uccc-reaction/1",
        "name": config.get("name", "reaction"),
        "species": [
            {"label": l, "energy": e, "stoichiometry": s} for l, e, s in rows
        ],
        "reaction_energy": total,
        "units": {"energy": "hartree", "reaction_energy": "hartree"},
    }
