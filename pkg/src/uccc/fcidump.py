"""FCIDUMP interchange: Fortran namelist header plus index-value records.

The reader accepts the common electronic-structure dump layout

    &FCIDUMP NORB=2,NELEC=2,MS2=0,
     ORBSYM=1,2,
     ISYM=1,
    &END
     6.74493166000E-01   1   1   1   1
    ...

with chemist-notation two-body values (ij|kl), one-body values keyed
``i j 0 0``, and the core energy keyed ``0 0 0 0``. Orbital symmetry labels
are decoded from ORBSYM using the Molpro numbering of each point group's
irreps. Occupation comes from NELEC and MS2 by aufbau filling.
"""

from __future__ import annotations

import re

import numpy as np

from .fermion import MolecularModel
from .symmetry import MOLPRO_ORBSYM, normalize_group

_ASSIGN = re.compile(r"([A-Za-z][A-Za-z0-9_]*)\s*=\s*")


def _header_fields(header: str):
    fields = {}
    matches = list(_ASSIGN.finditer(header))
    for k, m in enumerate(matches):
        end = matches[k + 1].start() if k + 1 < len(matches) else len(header)
        value = header[m.end() : end].strip().strip(",").strip()
        key = m.group(1).upper()
        if key in fields:
            raise ValueError(f"malformed header: {key} given twice")
        fields[key] = value
    return fields


def _int_field(fields, key):
    if key not in fields:
        raise ValueError(f"malformed header: missing {key}")
    try:
        return int(fields[key])
    except ValueError:
        raise ValueError(f"malformed header: {key}={fields[key]!r} is not an integer")


def parse_fcidump(text: str, point_group: str = "C1") -> MolecularModel:
    """Parse an FCIDUMP document into a model, decoding ORBSYM per the group."""
    group = normalize_group(point_group)
    lines = text.splitlines()

    start = end = None
    for i, line in enumerate(lines):
        if start is None and "&FCIDUMP" in line.upper():
            start = i
        if start is not None and ("&END" in line.upper() or line.strip() == "/"):
            end = i
            break
    if start is None or end is None:
        raise ValueError("malformed header: need '&FCIDUMP ... &END' namelist")

    header = "\n".join(lines[start : end + 1])
    header = header[header.upper().index("&FCIDUMP") + len("&FCIDUMP") :]
    stop = header.upper().find("&END")
    if stop < 0:
        stop = header.rfind("/")
    fields = _header_fields(header[:stop])

    norb = _int_field(fields, "NORB")
    nelec = _int_field(fields, "NELEC")
    ms2 = _int_field(fields, "MS2") if "MS2" in fields else 0
    if norb <= 0:
        raise ValueError(f"malformed header: NORB={norb} must be positive")
    if "ORBSYM" not in fields:
        raise ValueError("malformed header: missing ORBSYM")
    try:
        orbsym = [int(v) for v in re.split(r"[,\s]+", fields["ORBSYM"]) if v]
    except ValueError:
        raise ValueError(f"malformed header: ORBSYM={fields['ORBSYM']!r}")
    if len(orbsym) != norb:
        raise ValueError(
            f"inconsistent symmetry labels: ORBSYM lists {len(orbsym)} "
            f"orbitals but NORB={norb}"
        )
    labels = MOLPRO_ORBSYM[group]
    for value in orbsym:
        if not 1 <= value <= len(labels):
            raise ValueError(
                f"inconsistent symmetry labels: ORBSYM value {value} has no "
                f"irrep in {group} (expected 1..{len(labels)})"
            )
    irreps = [labels[v - 1] for v in orbsym]

    n_alpha = (nelec + ms2) // 2
    n_beta = (nelec - ms2) // 2
    if n_alpha + n_beta != nelec or n_beta < 0 or n_alpha > norb:
        raise ValueError(f"malformed header: NELEC={nelec}, MS2={ms2} are inconsistent")
    occ = "".join(
        ("1" if p < n_alpha else "0") + ("1" if p < n_beta else "0")
        for p in range(norb)
    )

    core = 0.0
    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    for n, raw in enumerate(lines[end + 1 :], start=end + 2):
        line = raw.strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise ValueError(f"line {n}: expected 'value i j k l', got {line!r}")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError:
            raise ValueError(f"line {n}: expected 'value i j k l', got {line!r}")
        for index in (i, j, k, l):
            if index < 0 or index > norb:
                raise ValueError(
                    f"line {n}: orbital index {index} out of range for NORB={norb}"
                )
        if i == j == k == l == 0:
            core = value
        elif k == 0 and l == 0 and i > 0 and j > 0:
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        elif i > 0 and j > 0 and k > 0 and l > 0:
            p, q, r, s = i - 1, j - 1, k - 1, l - 1
            for a, b, c, d in (
                (p, q, r, s),
                (q, p, r, s),
                (p, q, s, r),
                (q, p, s, r),
                (r, s, p, q),
                (s, r, p, q),
                (r, s, q, p),
                (s, r, q, p),
            ):
                g[a, b, c, d] = value
        else:
            raise ValueError(f"line {n}: unsupported index pattern {(i, j, k, l)}")

    return MolecularModel(
        2 * norb,
        occ,
        h,
        g,
        core_energy=core,
        orbital_irreps=irreps,
        point_group=group,
    )


def write_fcidump(model: MolecularModel) -> str:
    """Render a model as an FCIDUMP document; floats keep full precision."""
    group = normalize_group(model.point_group)
    labels = MOLPRO_ORBSYM[group]
    try:
        orbsym = [labels.index(s) + 1 for s in model.orbital_irreps]
    except ValueError:
        missing = [s for s in model.orbital_irreps if s not in labels]
        raise ValueError(f"irreps {missing} have no Molpro number in {group}")

    occ = model.hf_occupation
    n_alpha = sum(occ[::2])
    n_beta = sum(occ[1::2])
    norb = model.n_spatial
    out = [
        f"&FCIDUMP NORB={norb},NELEC={model.n_electrons},MS2={n_alpha - n_beta},",
        " ORBSYM=" + ",".join(str(v) for v in orbsym) + ",",
        " ISYM=1,",
        "&END",
    ]

    def record(value, i, j, k, l):
        out.append(f" {value:.17E}  {i:3d} {j:3d} {k:3d} {l:3d}")

    # p >= q, r >= s, (p,q) >= (r,s) picks one representative per 8-fold orbit
    for p in range(norb):
        for q in range(p + 1):
            for r in range(norb):
                for s in range(r + 1):
                    if (p, q) < (r, s) or model.g[p, q, r, s] == 0.0:
                        continue
                    record(model.g[p, q, r, s], p + 1, q + 1, r + 1, s + 1)
    for p in range(norb):
        for q in range(p + 1):
            if model.h[p, q] != 0.0:
                record(model.h[p, q], p + 1, q + 1, 0, 0)
    record(model.core_energy, 0, 0, 0, 0)
    return "\n".join(out) + "\n"
