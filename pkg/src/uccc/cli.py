"""Umbrella command-line interface.

Every subcommand resolves a model (bundled fixture via ``fixture:NAME``, a
JSON model file, or an FCIDUMP), runs one task, writes a JSON report to
``--output``, and prints a short human summary. Spectrum runs put the stick
and curve CSV tables and the rendered PNG next to the report. A TOML file
passed with ``--config`` supplies defaults under an ``[experiment]`` table;
explicit flags win. On failure the process exits nonzero with a single
machine-readable JSON object on stderr.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # 3.10 and older
    import tomli as tomllib

from .experiment import STRATEGIES, report_json, run_experiment, run_reaction


def _read_toml(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _fail(err, context):
    payload = {"error": str(err), "kind": type(err).__name__, "context": context}
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


def _execute(task, model, output, config_path, **flags):
    try:
        config = _read_toml(config_path).get("experiment", {}) if config_path else {}
        config["task"] = task
        if model:
            config["model"] = model
        for key, value in flags.items():
            if value is not None:
                config[key] = value
        out_path = Path(output or f"{task.replace('-', '_')}_report.json")
        report = run_experiment(
            config, out_dir=out_path.parent or Path("."), stem=out_path.stem
        )
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(report_json(report))
        return report, out_path
    except Exception as err:  # surfaced as machine-readable JSON
        _fail(err, task)


def _model_argument(fn):
    return click.argument("model", required=False, default=None)(fn)


def _common(fn):
    for option in (
        click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="TOML with an [experiment] table of defaults."),
        click.option("--output", "-o", default=None, help="Report JSON path."),
        click.option("--strategy", type=click.Choice(STRATEGIES), default=None, help="Synthesis strategy."),
        click.option("--point-group", "point_group", default=None, help="Point group for FCIDUMP input."),
        click.option("--seed", type=int, default=None, help="Master seed."),
    ):
        fn = option(fn)
    return fn


def _noise_options(fn):
    for option in (
        click.option("--shots", type=int, default=None, help="Total shots, split across measurement sets."),
        click.option("--noise-p2", "noise_p2", type=float, default=None, help="Two-qubit depolarizing probability."),
        click.option("--noise-flip", "noise_flip", type=float, default=None, help="Readout flip probability."),
        click.option("--mitigation", type=click.Choice(["none", "pmsv1", "pmsv2"]), default=None, help="Symmetry verification: parities only (pmsv1) or parities plus point-group strings (pmsv2)."),
    ):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Compile, simulate, and estimate chemistry circuits on fixtures or model files."""


@main.command()
@_model_argument
@_common
def synth(model, output, config_path, **flags):
    """Synthesize the ansatz and report gate counts."""
    report, out_path = _execute("synth", model, output, config_path, **flags)
    g = report["gates"]
    click.echo(
        f"{report['config']['strategy']}: {g['two_qubit_gates']} two-qubit gates, "
        f"{g['rotations']} rotations, {g['parameters']} parameters "
        f"on {g['qubits']} qubits -> {out_path}"
    )


@main.command("compare-strategies")
@_model_argument
@_common
def compare_strategies(model, output, config_path, **flags):
    """Gate counts for every synthesis strategy, with the dominance check."""
    report, out_path = _execute("compare-strategies", model, output, config_path, **flags)
    rows = report["results"]["strategies"]
    for name in ("chemaware", "commuting", "individual"):
        click.echo(f"{name:<11} {rows[name]['two_qubit_gates']:>5} two-qubit gates")
    verdict = "ok" if report["results"]["ordering_ok"] else "VIOLATED"
    click.echo(f"chemaware <= commuting <= individual: {verdict} -> {out_path}")


@main.command()
@_model_argument
@_common
def vqe(model, output, config_path, **flags):
    """Optimize the ansatz exactly and report the ground energy."""
    report, out_path = _execute("vqe", model, output, config_path, **flags)
    click.echo(f"ground energy: {report['results']['energy']:.10f} hartree -> {out_path}")


@main.command()
@_model_argument
@_common
@_noise_options
def estimate(model, output, config_path, **flags):
    """Shot-based energy at the optimized point, with optional verification."""
    report, out_path = _execute("estimate", model, output, config_path, **flags)
    r = report["results"]
    click.echo(
        f"energy: {r['energy']:.6f} +- {r['stderr']:.6f} hartree "
        f"(kept {r['shots_kept']}/{r['shots_requested']} shots over "
        f"{r['measurement_sets']} sets, median JSD {r['jsd_median']:.2e}) -> {out_path}"
    )


@main.command()
@_model_argument
@_common
@_noise_options
@click.option("--expansion", default=None, help="'default', 'full', or a JSON operator file.")
@click.option("--estimator", type=click.Choice(["exact", "shots"]), default=None)
@click.option("--spectrum-out", "spectrum_out", type=click.Path(), default=None, help="Also write the broadened curve CSV here.")
@click.option("--gamma", type=float, default=None, help="Lorentzian half-width (hartree).")
def qse(model, output, config_path, spectrum_out, **flags):
    """Excited states by subspace expansion around the optimized ground state."""
    task = "spectrum" if spectrum_out else "qse"
    report, out_path = _execute(task, model, output, config_path, **flags)
    r = report["results"]
    marks = ["*" if d else " " for d in r["degenerate"]]
    for energy, mark in zip(r["energies"], marks):
        click.echo(f"  {energy:.10f}{mark}")
    click.echo(f"({r['retained_states']} states from {r['expansion_size']} operators; * = degenerate)")
    if spectrum_out:
        produced = out_path.parent / r["spectrum"]["curve_csv"]
        target = Path(spectrum_out)
        if target.resolve() != produced.resolve():
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(produced.read_text())
        click.echo(f"curve -> {target}")
    click.echo(f"report -> {out_path}")


@main.command()
@_model_argument
@_common
@_noise_options
@click.option("--expansion", default=None, help="'default', 'full', or a JSON operator file.")
@click.option("--estimator", type=click.Choice(["exact", "shots"]), default=None)
@click.option("--gamma", type=float, default=None, help="Lorentzian half-width (hartree).")
def spectrum(model, output, config_path, **flags):
    """Optical spectrum: QSE states, strengths, CSV tables, and a figure."""
    report, out_path = _execute("spectrum", model, output, config_path, **flags)
    block = report["results"]["spectrum"]
    for stick in block["sticks"]:
        click.echo(
            f"peak: {stick['energy']:.6f} hartree, f = {stick['oscillator_strength']:.6f}"
        )
    click.echo(
        f"files: {block['sticks_csv']}, {block['curve_csv']}, {block['figure_png']} "
        f"(next to {out_path})"
    )


@main.command()
@_model_argument
@_common
@click.option("--shots", type=int, default=None, help="Shots to sample.")
@click.option("--noise-p2", "noise_p2", type=float, default=None)
@click.option("--noise-flip", "noise_flip", type=float, default=None)
def run(model, output, config_path, **flags):
    """Sample the optimized circuit and write the shot table CSV."""
    report, out_path = _execute("run", model, output, config_path, **flags)
    r = report["results"]
    click.echo(
        f"{r['shots']} shots, {r['distinct_bitstrings']} distinct outcomes, "
        f"JSD vs exact {r['jsd_vs_exact']:.2e}; table {r['table_csv']} -> {out_path}"
    )


@main.command()
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--output", "-o", default=None, help="Report JSON path.")
def react(config_path, output):
    """Reaction-energy difference over the species in a TOML [reaction] table."""
    try:
        data = _read_toml(config_path)
        if "reaction" not in data:
            raise ValueError(f"{config_path} has no [reaction] table")
        report = run_reaction(data["reaction"])
        out_path = Path(output or f"{report['name']}_report.json")
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    except Exception as err:
        _fail(err, "react")
    for row in report["species"]:
        click.echo(
            f"  {row['label']:<10} {row['stoichiometry']:+.1f} x {row['energy']:.6f}"
        )
    click.echo(f"reaction energy: {report['reaction_energy']:+.6f} hartree -> {out_path}")


if __name__ == "__main__":
    main()
