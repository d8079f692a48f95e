"""Exact Pauli-string algebra.

A PauliTerm is a complex coefficient times a tensor product of single-qubit
Pauli letters; a QubitOperator is a canonically merged weighted sum of terms.
All arithmetic is exact in the group-phase sense: products fold the +-1, +-i
phases into the coefficient, so dense cross-checks hold to machine precision.

Qubit order is little-endian throughout: qubit 0 is the least significant bit
of a basis-state index, and dense matrices from ``to_dense`` follow the same
convention.
"""

from __future__ import annotations

import math
import re

import numpy as np

COEFF_CUTOFF = 1e-14  # merged terms below this magnitude are dropped
DENSE_QUBIT_CAP = 14  # dense realization is an oracle tool, not a simulator

_LETTERS = ("X", "Y", "Z")

# single-qubit products: (a, b) -> (phase, letter or "" for identity)
_PRODUCT = {
    ("X", "X"): (1.0, ""),
    ("Y", "Y"): (1.0, ""),
    ("Z", "Z"): (1.0, ""),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_DENSE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_TERM_RE = re.compile(r"^\(([^()]*)\)\s*\[([^\[\]]*)\]$")


def _canonical_letters(letters) -> tuple:
    """Normalize letters to a sorted ((qubit, letter), ...) tuple."""
    if isinstance(letters, dict):
        items = letters.items()
    else:
        items = letters
    out = []
    for q, letter in items:
        q = int(q)
        if q < 0:
            raise ValueError(f"negative qubit index {q}")
        if letter not in _LETTERS:
            raise ValueError(f"invalid Pauli letter {letter!r}")
        out.append((q, letter))
    out.sort()
    for (qa, _), (qb, _) in zip(out, out[1:]):
        if qa == qb:
            raise ValueError(f"duplicate qubit index {qa}")
    return tuple(out)


class PauliTerm:
    """A complex coefficient times a product of Pauli letters.

    ``letters`` maps qubit index to one of X, Y, Z; absent indices act as
    identity. Instances are immutable and hashable on (letters, coeff).
    """

    __slots__ = ("coeff", "letters")

    def __init__(self, letters=(), coeff: complex = 1.0 + 0j):
        object.__setattr__(self, "letters", _canonical_letters(letters))
        object.__setattr__(self, "coeff", complex(coeff))

    def __setattr__(self, *_):
        raise AttributeError("PauliTerm is immutable")

    @classmethod
    def identity(cls, coeff: complex = 1.0 + 0j) -> "PauliTerm":
        return cls((), coeff)

    @classmethod
    def from_label(cls, label: str, coeff: complex = 1.0 + 0j) -> "PauliTerm":
        """Build from a label like ``"Y0 X2"`` (empty string = identity)."""
        letters = []
        for token in label.split():
            letters.append((int(token[1:]), token[0]))
        return cls(letters, coeff)

    @property
    def label(self) -> str:
        return " ".join(f"{letter}{q}" for q, letter in self.letters)

    def qubits(self) -> tuple:
        return tuple(q for q, _ in self.letters)

    def weight(self) -> int:
        return len(self.letters)

    def is_identity(self) -> bool:
        return not self.letters

    def with_coeff(self, coeff: complex) -> "PauliTerm":
        return PauliTerm(self.letters, coeff)

    def letter_on(self, q: int) -> str:
        for qi, letter in self.letters:
            if qi == q:
                return letter
        return "I"

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PauliTerm(self.letters, self.coeff * other)
        if not isinstance(other, PauliTerm):
            return NotImplemented
        a = dict(self.letters)
        coeff = self.coeff * other.coeff
        for q, letter in other.letters:
            mine = a.pop(q, None)
            if mine is None:
                a[q] = letter
                continue
            phase, prod = _PRODUCT[(mine, letter)]
            coeff *= phase
            if prod:
                a[q] = prod
        return PauliTerm(a, coeff)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return PauliTerm(self.letters, self.coeff * other)
        return NotImplemented

    def __neg__(self):
        return PauliTerm(self.letters, -self.coeff)

    def conjugate(self) -> "PauliTerm":
        """Hermitian conjugate (letters are self-adjoint)."""
        return PauliTerm(self.letters, self.coeff.conjugate())

    def commutes(self, other: "PauliTerm") -> bool:
        """True iff the operators commute.

        Two Pauli strings commute exactly when the number of qubits where
        both act with different non-identity letters is even.
        """
        mine = dict(self.letters)
        clashes = 0
        for q, letter in other.letters:
            a = mine.get(q)
            if a is not None and a != letter:
                clashes += 1
        return clashes % 2 == 0

    def to_dense(self, n_qubits: int) -> np.ndarray:
        """Kronecker realization on ``n_qubits`` qubits (little-endian)."""
        if n_qubits > DENSE_QUBIT_CAP:
            raise ValueError(f"dense realization capped at {DENSE_QUBIT_CAP} qubits")
        if self.letters and self.letters[-1][0] >= n_qubits:
            raise ValueError("qubit index out of range for dense realization")
        mat = np.array([[self.coeff]], dtype=complex)
        pos = dict(self.letters)
        for q in range(n_qubits):
            mat = np.kron(_DENSE[pos.get(q, "I")], mat)
        return mat

    def serialize(self) -> str:
        """Text form, e.g. ``(-0.5j) [Y0 X2]``; round-trips bit-exactly."""
        c = complex(self.coeff)
        # + 0.0 flushes signed zeros so repr(-0.5j) stays "-0.5j", not "(-0-0.5j)"
        body = repr(complex(c.real + 0.0, c.imag + 0.0))
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        return f"({body}) [{self.label}]"

    @classmethod
    def parse(cls, text: str) -> "PauliTerm":
        m = _TERM_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a PauliTerm: {text!r}")
        return cls.from_label(m.group(2), coeff=complex(m.group(1)))

    def __eq__(self, other):
        return (
            isinstance(other, PauliTerm)
            and self.letters == other.letters
            and self.coeff == other.coeff
        )

    def __hash__(self):
        return hash((self.letters, self.coeff))

    def __repr__(self):
        return f"PauliTerm.parse({self.serialize()!r})"


class QubitOperator:
    """Canonically merged weighted sum of PauliTerms.

    Terms are keyed by their letter map; duplicate letter maps are merged on
    construction and coefficients below ``COEFF_CUTOFF`` are dropped, so the
    representation is unique for a given operator.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        merged: dict = {}
        for term in terms:
            if isinstance(term, PauliTerm):
                key, coeff = term.letters, term.coeff
            else:
                key, coeff = _canonical_letters(term[0]), complex(term[1])
            merged[key] = merged.get(key, 0j) + coeff
        self._terms = {
            key: coeff for key, coeff in merged.items() if abs(coeff) > COEFF_CUTOFF
        }

    @classmethod
    def zero(cls) -> "QubitOperator":
        return cls()

    @classmethod
    def identity(cls, coeff: complex = 1.0 + 0j) -> "QubitOperator":
        return cls([PauliTerm((), coeff)])

    @classmethod
    def from_term(cls, term: PauliTerm) -> "QubitOperator":
        return cls([term])

    @property
    def terms(self) -> list:
        """Terms in canonical order (lexicographic by letter map)."""
        return [
            PauliTerm(key, coeff) for key, coeff in sorted(self._terms.items())
        ]

    def coefficient(self, letters) -> complex:
        return self._terms.get(_canonical_letters(letters), 0j)

    @property
    def identity_coefficient(self) -> complex:
        return self._terms.get((), 0j)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self.terms)

    def n_qubits(self) -> int:
        """1 + highest qubit index acted on (0 for pure-identity operators)."""
        hi = -1
        for key in self._terms:
            if key:
                hi = max(hi, key[-1][0])
        return hi + 1

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = QubitOperator.identity(other)
        if isinstance(other, PauliTerm):
            other = QubitOperator([other])
        if not isinstance(other, QubitOperator):
            return NotImplemented
        out = QubitOperator()
        merged = dict(self._terms)
        for key, coeff in other._terms.items():
            merged[key] = merged.get(key, 0j) + coeff
        out._terms = {k: c for k, c in merged.items() if abs(c) > COEFF_CUTOFF}
        return out

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1) * other

    def __rsub__(self, other):
        return (-1) * self + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            out = QubitOperator()
            out._terms = {
                k: c * other for k, c in self._terms.items() if abs(c * other) > COEFF_CUTOFF
            }
            return out
        if isinstance(other, PauliTerm):
            other = QubitOperator([other])
        if not isinstance(other, QubitOperator):
            return NotImplemented
        products = []
        for ka, ca in self._terms.items():
            ta = PauliTerm(ka, ca)
            for kb, cb in other._terms.items():
                products.append(ta * PauliTerm(kb, cb))
        return QubitOperator(products)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return self * other
        if isinstance(other, PauliTerm):
            return QubitOperator([other]) * self
        return NotImplemented

    def __neg__(self):
        return self * -1

    def hermitian_conjugate(self) -> "QubitOperator":
        out = QubitOperator()
        out._terms = {k: c.conjugate() for k, c in self._terms.items()}
        return out

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def hermitian_part(self) -> "QubitOperator":
        return (self + self.hermitian_conjugate()) * 0.5

    def to_dense(self, n_qubits: int) -> np.ndarray:
        if n_qubits > DENSE_QUBIT_CAP:
            raise ValueError(f"dense realization capped at {DENSE_QUBIT_CAP} qubits")
        dim = 2**n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for key, coeff in self._terms.items():
            mat += PauliTerm(key, coeff).to_dense(n_qubits)
        return mat

    def serialize(self) -> str:
        """Newline-separated canonical terms; round-trips bit-exactly."""
        return "\n".join(term.serialize() for term in self.terms)

    @classmethod
    def parse(cls, text: str) -> "QubitOperator":
        terms = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            terms.append(PauliTerm.parse(line))
        return cls(terms)

    def __eq__(self, other):
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self._terms == other._terms

    def isclose(self, other: "QubitOperator", tol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0j) - other._terms.get(k, 0j)) <= tol for k in keys
        )

    def __repr__(self):
        if not self._terms:
            return "QubitOperator.zero()"
        return f"QubitOperator.parse({self.serialize()!r})"


def pauli_apply(term: PauliTerm, state: np.ndarray) -> np.ndarray:
    """Apply a PauliTerm to a little-endian statevector without densifying."""
    n = int(math.log2(state.size))
    psi = state.reshape([2] * n)
    coeff = term.coeff
    for q, letter in term.letters:
        axis = n - 1 - q
        psi = np.moveaxis(psi, axis, 0)
        if letter == "X":
            psi = psi[::-1]
        elif letter == "Y":
            psi = psi[::-1] * np.array([-1j, 1j]).reshape((2,) + (1,) * (n - 1))
        else:
            psi = psi * np.array([1, -1]).reshape((2,) + (1,) * (n - 1))
        psi = np.moveaxis(psi, 0, axis)
    return coeff * psi.reshape(-1)


def operator_apply(op: QubitOperator, state: np.ndarray) -> np.ndarray:
    out = np.zeros_like(state)
    for term in op:
        out += pauli_apply(term, state)
    return out


def expectation(op: QubitOperator, state: np.ndarray) -> complex:
    return complex(np.vdot(state, operator_apply(op, state)))
