"""Fermionic operators, Jordan-Wigner encoding, and the UCCSD pool.

Spin orbitals use alpha-beta interleaved ordering: spatial orbital p maps to
spin orbitals 2p (alpha) and 2p+1 (beta), and spin orbital j maps to qubit j.
A doubly occupied spatial orbital therefore occupies an adjacent even-odd
qubit pair, which is what the hard-core-boson compaction of paired double
excitations exploits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .pauli import PauliTerm, QubitOperator

INTEGRAL_CUTOFF = 1e-12  # integrals below this are not expanded into terms

CATEGORIES = ("single", "generic-double", "paired-double")


class FermionOperator:
    """Weighted sum of ladder-operator products; order inside each product
    is operator order (leftmost acts last on kets)."""

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        merged = {}
        if isinstance(terms, dict):
            terms = terms.items()
        for ops, coeff in terms:
            ops = tuple((int(i), bool(d)) for i, d in ops)
            if any(i < 0 for i, _ in ops):
                raise ValueError("negative spin-orbital index")
            c = merged.get(ops, 0j) + complex(coeff)
            if c == 0:
                merged.pop(ops, None)
            else:
                merged[ops] = c
        object.__setattr__(self, "_terms", merged)

    def __setattr__(self, name, value):
        raise AttributeError("FermionOperator is immutable")

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def identity(cls, coeff=1.0):
        return cls([((), coeff)])

    @classmethod
    def creation(cls, i):
        return cls([(((i, True),), 1.0)])

    @classmethod
    def annihilation(cls, i):
        return cls([(((i, False),), 1.0)])

    @property
    def terms(self):
        return sorted(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def max_index(self):
        return max((i for ops in self._terms for i, _ in ops), default=-1)

    def __add__(self, other):
        if isinstance(other, FermionOperator):
            return FermionOperator(list(self._terms.items()) + list(other._terms.items()))
        return NotImplemented

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return FermionOperator({ops: -c for ops, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, FermionOperator):
            out = []
            for ops_a, ca in self._terms.items():
                for ops_b, cb in other._terms.items():
                    out.append((ops_a + ops_b, ca * cb))
            return FermionOperator(out)
        if isinstance(other, (int, float, complex)):
            return FermionOperator({ops: c * other for ops, c in self._terms.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        return NotImplemented

    def hermitian_conjugate(self):
        out = {}
        for ops, c in self._terms.items():
            flipped = tuple((i, not d) for i, d in reversed(ops))
            out[flipped] = c.conjugate()
        return FermionOperator(out)

    def is_antihermitian(self):
        return (self + self.hermitian_conjugate())._terms == {}

    def __eq__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        return self._terms == other._terms

    def __repr__(self):
        def fmt(ops, c):
            body = " ".join(f"a{'+' if d else '-'}{i}" for i, d in ops) or "1"
            return f"({c}) {body}"

        return "FermionOperator[" + " + ".join(fmt(o, c) for o, c in self.terms) + "]"


def _jw_ladder(j, dagger):
    """JW image of a single ladder operator: Z-string below j, (X -+ iY)/2 at j."""
    zs = [(k, "Z") for k in range(j)]
    sign = -0.5j if dagger else 0.5j
    return QubitOperator(
        [PauliTerm(zs + [(j, "X")], 0.5), PauliTerm(zs + [(j, "Y")], sign)]
    )


def jordan_wigner(op: FermionOperator) -> QubitOperator:
    """Map a fermionic operator to qubits; spin orbital j lands on qubit j."""
    total = QubitOperator.zero()
    for ops, coeff in op._terms.items():
        image = QubitOperator.identity(coeff)
        for i, dagger in ops:
            image = image * _jw_ladder(i, dagger)
        total = total + image
    return total


@dataclass(frozen=True)
class Excitation:
    """One pool member: creation indices precede the annihilation index they
    pair with, so a double reads (c1, a1, c2, a2)."""

    category: str
    spin_orbital_indices: tuple
    parameter_id: str
    spatial_pair: tuple | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "spin_orbital_indices", tuple(int(i) for i in self.spin_orbital_indices)
        )
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        n = len(self.spin_orbital_indices)
        if self.category == "single" and n != 2:
            raise ValueError("single takes 2 indices")
        if self.category.endswith("double") and n != 4:
            raise ValueError("double takes 4 indices")
        if self.category == "paired-double":
            if self.spatial_pair is None:
                raise ValueError("paired-double needs spatial_pair")
            q, p = self.spatial_pair
            if self.spin_orbital_indices != (2 * p, 2 * q, 2 * p + 1, 2 * q + 1):
                raise ValueError("paired-double index pattern violated")

    def excitation_operator(self) -> FermionOperator:
        """The de-excitation-free part: product of a+_c a_a pairs."""
        idx = self.spin_orbital_indices
        out = FermionOperator.identity()
        for c, a in zip(idx[::2], idx[1::2]):
            out = out * FermionOperator.creation(c) * FermionOperator.annihilation(a)
        return out

    def generator(self) -> FermionOperator:
        """Anti-Hermitian G = A - A+ whose exponential is the unitary block."""
        a = self.excitation_operator()
        return a - a.hermitian_conjugate()


def generate_uccsd_pool(model) -> list:
    """All spin-conserving occupied->virtual singles and doubles.

    Deterministic: singles (sorted by annihilated then created index), then
    doubles (sorted by the index quadruple); parameter ids t0, t1, ... follow
    that order.
    """
    occ = [i for i, b in enumerate(model.hf_occupation) if b]
    vir = [i for i, b in enumerate(model.hf_occupation) if not b]
    specs = []
    for a in occ:
        for c in vir:
            if (c - a) % 2 == 0:
                specs.append(("single", (c, a)))
    doubles = []
    for ia, a1 in enumerate(occ):
        for a2 in occ[ia + 1 :]:
            for c1 in vir:
                if (c1 - a1) % 2:
                    continue
                for c2 in vir:
                    if (c2 - a2) % 2 or c1 == c2:
                        continue
                    if (a1 - a2) % 2 == 0 and c1 > c2:
                        continue  # same-spin pair counted once
                    doubles.append((a1, a2, c1, c2))
    for a1, a2, c1, c2 in sorted(doubles):
        specs.append(("double", (c1, a1, c2, a2)))
    pool = []
    for k, (kind, idx) in enumerate(specs):
        pid = f"t{k}"
        if kind == "single":
            pool.append(Excitation("single", idx, pid))
            continue
        c1, a1, c2, a2 = idx
        paired = a1 % 2 == 0 and a2 == a1 + 1 and c1 % 2 == 0 and c2 == c1 + 1
        if paired:
            pool.append(Excitation("paired-double", idx, pid, (a1 // 2, c1 // 2)))
        else:
            pool.append(Excitation("generic-double", idx, pid))
    return pool


def hardcore_boson_image(exc: Excitation) -> QubitOperator:
    """Two-qubit image of a paired double on the alpha qubits 2q and 2p."""
    if exc.category != "paired-double":
        raise ValueError("hardcore_boson_image needs a paired-double")
    q, p = exc.spatial_pair
    return QubitOperator(
        [
            PauliTerm([(2 * q, "Y"), (2 * p, "X")], 0.5j),
            PauliTerm([(2 * q, "X"), (2 * p, "Y")], -0.5j),
        ]
    )


def _check_eightfold(g, tol=1e-10):
    ok = (
        np.allclose(g, g.transpose(1, 0, 2, 3), atol=tol)
        and np.allclose(g, g.transpose(0, 1, 3, 2), atol=tol)
        and np.allclose(g, g.transpose(2, 3, 0, 1), atol=tol)
    )
    if not ok:
        raise ValueError("g_pqrs lacks real-orbital 8-fold symmetry")


class MolecularModel:
    """Integrals, reference occupation, and symmetry labels for one system.

    Two-electron integrals are stored in chemist ordering (pq|rs); physicist
    input is transposed on load.
    """

    __slots__ = (
        "n_spin_orbitals",
        "hf_occupation",
        "orbital_irreps",
        "point_group",
        "core_energy",
        "h",
        "g",
        "dipole",
    )

    def __init__(
        self,
        n_spin_orbitals,
        hf_occupation,
        h,
        g,
        core_energy=0.0,
        orbital_irreps=None,
        point_group="C1",
        dipole=None,
        convention="chemist",
    ):
        n = int(n_spin_orbitals)
        if n % 2:
            raise ValueError("n_spin_orbitals must be even")
        if isinstance(hf_occupation, str):
            hf_occupation = [int(ch) for ch in hf_occupation]
        occ = tuple(int(b) for b in hf_occupation)
        if len(occ) != n or any(b not in (0, 1) for b in occ):
            raise ValueError("hf_occupation must be n_spin_orbitals bits")
        m = n // 2
        h = np.asarray(h, dtype=float)
        g = np.asarray(g, dtype=float)
        if h.shape != (m, m):
            raise ValueError(f"h_pq must be {m}x{m}")
        if g.shape != (m, m, m, m):
            raise ValueError(f"g_pqrs must be {m}^4")
        if convention == "physicist":
            g = np.ascontiguousarray(g.transpose(0, 2, 1, 3))
        elif convention != "chemist":
            raise ValueError(f"unknown integral convention {convention!r}")
        if not np.allclose(h, h.T, atol=1e-10):
            raise ValueError("h_pq must be symmetric")
        _check_eightfold(g)
        if orbital_irreps is None:
            orbital_irreps = ["a"] * m
        if len(orbital_irreps) != m:
            raise ValueError("need one irrep label per spatial orbital")
        if dipole is not None:
            dipole = {
                ax: np.asarray(mat, dtype=float) for ax, mat in dipole.items() if mat is not None
            }
            for ax, mat in dipole.items():
                if mat.shape != (m, m) or not np.allclose(mat, mat.T, atol=1e-10):
                    raise ValueError(f"dipole_{ax} must be a symmetric {m}x{m} matrix")
        object.__setattr__(self, "n_spin_orbitals", n)
        object.__setattr__(self, "hf_occupation", occ)
        object.__setattr__(self, "orbital_irreps", tuple(str(s) for s in orbital_irreps))
        object.__setattr__(self, "point_group", str(point_group))
        object.__setattr__(self, "core_energy", float(core_energy))
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "dipole", dipole or {})

    def __setattr__(self, name, value):
        raise AttributeError("MolecularModel is immutable")

    # -- derived views -----------------------------------------------------

    @property
    def n_spatial(self):
        return self.n_spin_orbitals // 2

    @property
    def n_electrons(self):
        return sum(self.hf_occupation)

    def occupied_spin_orbitals(self):
        return tuple(i for i, b in enumerate(self.hf_occupation) if b)

    def doubly_occupied_spatials(self):
        occ = self.hf_occupation
        return tuple(p for p in range(self.n_spatial) if occ[2 * p] and occ[2 * p + 1])

    def singly_occupied_spatials(self):
        occ = self.hf_occupation
        return tuple(p for p in range(self.n_spatial) if occ[2 * p] != occ[2 * p + 1])

    def hf_state_index(self):
        """Basis-state index of the reference determinant (qubit j = bit j)."""
        return sum(1 << i for i in self.occupied_spin_orbitals())

    # -- serialization -----------------------------------------------------

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        dipole = {}
        for ax in ("x", "y", "z"):
            if data.get(f"dipole_{ax}") is not None:
                dipole[ax] = data[f"dipole_{ax}"]
        return cls(
            data["n_spin_orbitals"],
            data["hf_occupation"],
            data["h_pq"],
            data["g_pqrs"],
            core_energy=data.get("core_energy", 0.0),
            orbital_irreps=data.get("irreps"),
            point_group=data.get("point_group", "C1"),
            dipole=dipole or None,
            convention=data.get("integral_convention", "chemist"),
        )

    def to_json(self):
        data = {
            "n_spin_orbitals": self.n_spin_orbitals,
            "hf_occupation": "".join(str(b) for b in self.hf_occupation),
            "irreps": list(self.orbital_irreps),
            "point_group": self.point_group,
            "core_energy": self.core_energy,
            "integral_convention": "chemist",
            "h_pq": self.h.tolist(),
            "g_pqrs": self.g.tolist(),
        }
        for ax in ("x", "y", "z"):
            if ax in self.dipole:
                data[f"dipole_{ax}"] = self.dipole[ax].tolist()
        return json.dumps(data, indent=1)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(fh.read())

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())


def _one_body_fermion(mat, cutoff=INTEGRAL_CUTOFF):
    """Spin-summed one-body operator from a spatial-orbital matrix."""
    m = mat.shape[0]
    terms = []
    for p in range(m):
        for q in range(m):
            if abs(mat[p, q]) < cutoff:
                continue
            for s in (0, 1):
                terms.append((((2 * p + s, True), (2 * q + s, False)), mat[p, q]))
    return FermionOperator(terms)


def hamiltonian_from_model(model: MolecularModel) -> QubitOperator:
    """Second-quantized electronic Hamiltonian mapped to qubits.

    H = sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q + core,
    with spatial indices expanded over both spins.
    """
    ferm = _one_body_fermion(model.h)
    m = model.n_spatial
    two = []
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    val = model.g[p, q, r, s]
                    if abs(val) < INTEGRAL_CUTOFF:
                        continue
                    for sig in (0, 1):
                        for tau in (0, 1):
                            ops = (
                                (2 * p + sig, True),
                                (2 * r + tau, True),
                                (2 * s + tau, False),
                                (2 * q + sig, False),
                            )
                            two.append((ops, 0.5 * val))
    ferm = ferm + FermionOperator(two)
    return jordan_wigner(ferm) + model.core_energy


def dipole_operator(model: MolecularModel, axis: str) -> QubitOperator:
    """JW image of the one-body dipole component along x, y, or z."""
    if axis not in model.dipole:
        raise ValueError(f"model has no dipole_{axis} integrals")
    return jordan_wigner(_one_body_fermion(model.dipole[axis]))
