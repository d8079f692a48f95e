"""Z2/U1 Pauli symmetries of the encoded Hamiltonian and pool filtering.

Every supported point group is Abelian with real one-dimensional irreps, so
each irrep is a vector of +-1 characters over the group's listed elements,
and each element induces a Z-string over the spin orbitals of the spatial
orbitals that are antisymmetric (character -1) under it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fermion import jordan_wigner
from .pauli import PauliTerm

# element order fixes the emission order of the Z-strings
GROUPS = {
    "C1": {"elements": (), "irreps": {"a": ()}},
    "C2": {"elements": ("C2",), "irreps": {"a": (1,), "b": (-1,)}},
    "Cs": {"elements": ("sh",), "irreps": {"a'": (1,), "a''": (-1,)}},
    "C2v": {
        "elements": ("C2", "sv_xz", "sv_yz"),
        "irreps": {
            "a1": (1, 1, 1),
            "a2": (1, -1, -1),
            "b1": (-1, 1, -1),
            "b2": (-1, -1, 1),
        },
    },
    "C2h": {
        "elements": ("C2", "i", "sh"),
        "irreps": {
            "ag": (1, 1, 1),
            "bg": (-1, 1, -1),
            "au": (1, -1, -1),
            "bu": (-1, -1, 1),
        },
    },
    "D2": {
        "elements": ("C2z", "C2y", "C2x"),
        "irreps": {
            "a": (1, 1, 1),
            "b1": (1, -1, -1),
            "b2": (-1, 1, -1),
            "b3": (-1, -1, 1),
        },
    },
    "D2h": {
        "elements": ("C2z", "C2y", "C2x", "i", "s_xy", "s_xz", "s_yz"),
        "irreps": {
            "ag": (1, 1, 1, 1, 1, 1, 1),
            "b1g": (1, -1, -1, 1, 1, -1, -1),
            "b2g": (-1, 1, -1, 1, -1, 1, -1),
            "b3g": (-1, -1, 1, 1, -1, -1, 1),
            "au": (1, 1, 1, -1, -1, -1, -1),
            "b1u": (1, -1, -1, -1, -1, 1, 1),
            "b2u": (-1, 1, -1, -1, 1, -1, 1),
            "b3u": (-1, -1, 1, -1, 1, 1, -1),
        },
    },
}

# Molpro ORBSYM numbering per group, used by the FCIDUMP reader/writer
MOLPRO_ORBSYM = {
    "C1": ("a",),
    "Cs": ("a'", "a''"),
    "C2": ("a", "b"),
    "C2v": ("a1", "b1", "b2", "a2"),
    "C2h": ("ag", "au", "bu", "bg"),
    "D2": ("a", "b3", "b2", "b1"),
    "D2h": ("ag", "b3u", "b2u", "b1g", "b1u", "b2g", "b3g", "au"),
}


def normalize_group(label: str) -> str:
    for name in GROUPS:
        if name.lower() == str(label).lower():
            return name
    raise ValueError(f"unsupported point group {label!r} (need one of {list(GROUPS)})")


def irrep_characters(group: str, irrep: str) -> tuple:
    table = GROUPS[normalize_group(group)]["irreps"]
    key = str(irrep).lower()
    if key not in table:
        raise ValueError(f"irrep {irrep!r} not in {group}")
    return table[key]


@dataclass(frozen=True)
class SymmetryOperator:
    """A Pauli symmetry of the Hamiltonian with the reference-state sector."""

    pauli: PauliTerm
    sector: int
    label: str

    def __post_init__(self):
        if self.pauli.coeff != 1.0:
            raise ValueError("symmetry Pauli must have unit coefficient")
        if self.sector not in (-1, 1):
            raise ValueError("sector must be +1 or -1")

    def support(self):
        return self.pauli.qubits()

    def describe(self):
        return f"{self.label}: [{self.pauli.label}] sector {self.sector:+d}"


def _z_string_sector(support, occupation):
    """Eigenvalue of a Z-string on the reference computational-basis state."""
    return -1 if sum(occupation[q] for q in support) % 2 else 1


def _z_string(support, occupation, label):
    pauli = PauliTerm([(q, "Z") for q in support])
    return SymmetryOperator(pauli, _z_string_sector(support, occupation), label)


def number_parity_symmetries(model) -> list:
    """Alpha, beta, and total electron-number parities as Z-strings."""
    n = model.n_spin_orbitals
    occ = model.hf_occupation
    return [
        _z_string(tuple(range(0, n, 2)), occ, "alpha-parity"),
        _z_string(tuple(range(1, n, 2)), occ, "beta-parity"),
        _z_string(tuple(range(n)), occ, "total-parity"),
    ]


def point_group_z2_symmetries(model) -> list:
    """One Z-string per group element, over the antisymmetric orbitals.

    Strings that are trivial or GF(2)-products of earlier ones are dropped,
    so the result is an independent generating set in element order.
    """
    group = normalize_group(model.point_group)
    elements = GROUPS[group]["elements"]
    chars = [irrep_characters(group, s) for s in model.orbital_irreps]
    out = []
    pivots = {}  # GF(2) elimination: leading bit -> reduced row mask
    for k, element in enumerate(elements):
        support = []
        for p, vec in enumerate(chars):
            if vec[k] == -1:
                support += [2 * p, 2 * p + 1]
        mask = sum(1 << q for q in support)
        while mask:
            top = mask.bit_length() - 1
            if top not in pivots:
                pivots[top] = mask
                break
            mask ^= pivots[top]
        if mask == 0:
            continue  # trivial or a product of earlier strings
        out.append(_z_string(tuple(support), model.hf_occupation, f"point-group-{element}"))
    return out


def _irrep_product(group, irreps, spatials):
    prod = None
    for p in spatials:
        vec = irrep_characters(group, irreps[p])
        prod = vec if prod is None else tuple(a * b for a, b in zip(prod, vec))
    return prod if prod is not None else ()


def filter_excitations(pool, syms, model) -> list:
    """Step-I screening: term-wise Z2 commutation and irrep balance.

    An excitation survives iff every Pauli term of its JW image commutes
    with every symmetry and the irrep product of its created orbitals equals
    that of its annihilated orbitals. Order is preserved.
    """
    group = normalize_group(model.point_group)
    irreps = model.orbital_irreps
    kept = []
    for exc in pool:
        idx = exc.spin_orbital_indices
        created = [c // 2 for c in idx[::2]]
        annihilated = [a // 2 for a in idx[1::2]]
        if _irrep_product(group, irreps, created) != _irrep_product(
            group, irreps, annihilated
        ):
            continue
        image = jordan_wigner(exc.generator())
        if all(term.commutes(s.pauli) for term in image.terms for s in syms):
            kept.append(exc)
    return kept
