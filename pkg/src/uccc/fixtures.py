"""Bundled molecular models and model-reference resolution.

Six small models ship with the package: five species of a hydrogen-abstraction
reaction (CH4 + OH -> TS -> CH3 + H2O analogues at 4 to 8 qubits) and a real
minimal-basis H2. The reaction models are synthetic stand-ins built so that
dense diagonalization, the compact ansatz, and the display energies agree
exactly; H2 carries genuine STO-3G integrals at 0.7414 angstrom.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .fermion import MolecularModel

FIXTURE_NAMES = (
    "ch4_d2_6q",
    "ch3_cs_6q",
    "h2_4q",
    "oh_c2v_4q",
    "h2o_c2v_8q",
    "ts_c1_8q",
)


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled model file."""
    if name not in FIXTURE_NAMES:
        known = ", ".join(FIXTURE_NAMES)
        raise KeyError(f"unknown fixture {name!r}; bundled models: {known}")
    return Path(str(resources.files("uccc").joinpath("fixtures", f"{name}.json")))


def load_fixture(name: str) -> MolecularModel:
    return MolecularModel.load(fixture_path(name))


def resolve_model(ref, point_group: str | None = None) -> MolecularModel:
    """Turn a model reference into a MolecularModel.

    Accepts a MolecularModel (returned as is), a ``fixture:NAME`` string, a
    path to a native JSON model, or a path to an FCIDUMP file. ``point_group``
    only applies to FCIDUMP input, whose ORBSYM indices need a group to name
    their irreps; native models carry the group themselves.
    """
    if isinstance(ref, MolecularModel):
        return ref
    text = str(ref)
    if text.startswith("fixture:"):
        return load_fixture(text.split(":", 1)[1])
    path = Path(text)
    if not path.exists():
        raise FileNotFoundError(f"model file not found: {text}")
    if path.suffix.lower() == ".fcidump" or path.name.upper() == "FCIDUMP":
        from .fcidump import parse_fcidump

        return parse_fcidump(path.read_text(), point_group=point_group or "C1")
    return MolecularModel.load(path)
