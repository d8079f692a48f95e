"""Three state-preparation compilers for UCC excitation products.

All strategies emit, per excitation m, a subcircuit realizing the exact
exponential exp(theta_m G_m) of its anti-Hermitian JW generator, so the bound
circuit equals the ordered product of dense matrix exponentials applied to
the reference state:

* individual: one basis-change/CX-ladder/Rz primitive per Pauli term;
* commuting-sets: per excitation, a Clifford V diagonalizing all its terms at
  once, a gray-code-ordered Rz phase polynomial, then V undone;
* chemically aware: symmetry filtering, paired doubles emitted first as
  two-CX gadgets on the even (hard-core boson) qubits, an expansion CX per
  active orbital copying even-qubit occupancy to the odd partner, and the
  surviving rest compiled as commuting sets.

Reference preparation uses Ry(pi), which maps |0> to +|1> with no phase, so
statevector comparisons against dense oracles hold to 1e-10 globally.
"""

from __future__ import annotations

import math

from .circuit import Circuit, Gate
from .fermion import jordan_wigner
from .pauli import PauliTerm, QubitOperator
from .symmetry import (
    filter_excitations,
    number_parity_symmetries,
    point_group_z2_symmetries,
)

_IMAG_TOL = 1e-12


# -- exact Pauli conjugation through Clifford gates -------------------------


def _gate_as_operator(gate):
    """The gate's unitary as a QubitOperator (for H, Rz(+-pi/2), CX)."""
    q = gate.qubits[0]
    if gate.kind == "H":
        r = math.sqrt(0.5)
        return QubitOperator([PauliTerm([(q, "X")], r), PauliTerm([(q, "Z")], r)])
    if gate.kind == "Rz":
        # conjugation-equivalent to S (angle +pi/2) or S-dagger (-pi/2)
        half = 0.5 * gate.angle
        a = complex(math.cos(half), -math.sin(half))
        b = complex(math.cos(half), math.sin(half))
        return QubitOperator(
            [PauliTerm.identity((a + b) / 2), PauliTerm([(q, "Z")], (a - b) / 2)]
        )
    if gate.kind == "CX":
        c, t = gate.qubits
        return QubitOperator(
            [
                PauliTerm.identity(0.5),
                PauliTerm([(c, "Z")], 0.5),
                PauliTerm([(t, "X")], 0.5),
                PauliTerm([(c, "Z"), (t, "X")], -0.5),
            ]
        )
    raise ValueError(f"not a Clifford tableau gate: {gate.kind}")


def conjugate_term(term: PauliTerm, gates) -> PauliTerm:
    """V term V† for the Clifford V given as a gate list in application order."""
    for g in gates:
        u = _gate_as_operator(g)
        udag = u.hermitian_conjugate()
        out = u * QubitOperator.from_term(term) * udag
        terms = out.terms
        if len(terms) != 1:
            raise RuntimeError("conjugation by a Clifford must preserve Pauli rank")
        term = terms[0]
    return term


# -- simultaneous diagonalization -------------------------------------------


def _bits(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def diagonalize_commuting_terms(terms, extra=()):
    """Clifford gate list mapping every term (and extra row) to a Z-string.

    Works on the block structure molecular JW sets exhibit: rows sharing an
    X-support form blocks, and distinct blocks in one commuting set have
    disjoint X-supports. Anything else raises, which for valid inputs can
    only happen if the rows do not actually commute.

    Returns (gates, conjugated_terms, conjugated_extras); conjugated rows
    are pure Z-strings whose coefficients carry the conjugation sign.
    """
    rows = list(terms) + list(extra)
    xs, zs = [], []
    for t in rows:
        x = z = 0
        for q, letter in t.letters:
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
        xs.append(x)
        zs.append(z)
    gates = []
    while any(xs):
        weights = {}
        for x in xs:
            for q in _bits(x):
                weights[q] = weights.get(q, 0) + 1
        pivot = max(weights, key=lambda q: (weights[q], -q))
        block = [i for i, x in enumerate(xs) if (x >> pivot) & 1]
        support = xs[block[0]]
        if any(xs[i] != support for i in block) or any(
            xs[i] & support for i in range(len(xs)) if i not in block
        ):
            raise RuntimeError("commuting-set structure not diagonalizable blockwise")
        for q in _bits(support):
            if q == pivot:
                continue
            gates.append(Gate.cx(pivot, q))
            for i in range(len(xs)):
                if (xs[i] >> pivot) & 1:
                    xs[i] ^= 1 << q
                if (zs[i] >> q) & 1:
                    zs[i] ^= 1 << pivot
        pivot_z = {(zs[i] >> pivot) & 1 for i in block}
        if len(pivot_z) != 1:
            raise RuntimeError("rows in one block disagree at the pivot; set not commuting")
        if pivot_z.pop():
            gates.append(Gate.rz(pivot, angle=math.pi / 2))
            for i in block:
                zs[i] ^= 1 << pivot
        for i in range(len(xs)):
            if i not in block and ((xs[i] | zs[i]) >> pivot) & 1:
                raise RuntimeError("non-block row touches the pivot; set not commuting")
        gates.append(Gate.h(pivot))
        for i in block:
            xs[i] ^= 1 << pivot
            zs[i] ^= 1 << pivot
    conj = [conjugate_term(t, gates) for t in rows]
    for t, z in zip(conj, zs):
        if any(letter != "Z" for _, letter in t.letters):
            raise RuntimeError("diagonalization failed to produce Z-strings")
        if sum(1 << q for q, _ in t.letters) != z:
            raise RuntimeError("tableau and conjugation disagree")
    return gates, conj[: len(terms)], conj[len(terms) :]


def _adjoint_gates(gates):
    out = []
    for g in reversed(gates):
        if g.is_rotation:
            out.append(Gate(g.kind, g.qubits, angle=-g.angle))
        else:
            out.append(g)
    return out


# -- phase polynomial --------------------------------------------------------


def _brgc_rank(mask_bits, others):
    m = 0
    for i, q in enumerate(others):
        if q in mask_bits:
            m |= 1 << i
    r = 0
    while m:
        r ^= m
        m >>= 1
    return r


def _phase_polynomial(rotations, pivot, symbol):
    """Rz ladder for a set of Z-masks sharing a pivot qubit.

    rotations: list of (qubit tuple, rz coefficient); masks containing the
    pivot are visited in binary-reflected-gray-code order so consecutive
    folds differ by one CX.
    """
    with_pivot = [(set(m), c) for m, c in rotations if pivot in m]
    without = [(sorted(m), c) for m, c in rotations if pivot not in m]
    others = sorted({q for m, _ in with_pivot for q in m if q != pivot})
    with_pivot.sort(key=lambda mc: _brgc_rank(mc[0], others))
    gates = []
    fold = set()
    for mask, coeff in with_pivot:
        want = mask - {pivot}
        for q in sorted(want ^ fold):
            gates.append(Gate.cx(q, pivot))
        fold = want
        gates.append(Gate.rz(pivot, symbol=symbol, coeff=coeff))
    for q in sorted(fold):
        gates.append(Gate.cx(q, pivot))
    for qs, coeff in without:
        if len(qs) == 1:
            gates.append(Gate.rz(qs[0], symbol=symbol, coeff=coeff))
            continue
        for q in qs[:-1]:
            gates.append(Gate.cx(q, qs[-1]))
        gates.append(Gate.rz(qs[-1], symbol=symbol, coeff=coeff))
        for q in reversed(qs[:-1]):
            gates.append(Gate.cx(q, qs[-1]))
    return gates


def _generator_rz_coefficients(image: QubitOperator):
    """(term, rz coefficient) pairs: exp(i b P) needs an Rz angle of -2b."""
    out = []
    for term in image.terms:
        if abs(term.coeff.real) > _IMAG_TOL:
            raise ValueError("UCC generator image must have imaginary coefficients")
        out.append((term, -2.0 * term.coeff.imag))
    return out


# -- per-excitation subcircuits ----------------------------------------------


def _pauli_rotation_gates(term: PauliTerm, symbol, rz_coeff):
    """exp(-i (rz_coeff * theta) P / 2): basis change, CX ladder, Rz, mirror."""
    basis, undo = [], []
    for q, letter in term.letters:
        if letter == "X":
            basis.append(Gate.h(q))
            undo.append(Gate.h(q))
        elif letter == "Y":
            basis.append(Gate.rx(q, angle=math.pi / 2))
            undo.append(Gate.rx(q, angle=-math.pi / 2))
    qs = [q for q, _ in term.letters]
    ladder = [Gate.cx(qs[i], qs[i + 1]) for i in range(len(qs) - 1)]
    gates = basis + ladder
    gates.append(Gate.rz(qs[-1], symbol=symbol, coeff=rz_coeff))
    gates += list(reversed(ladder)) + list(reversed(undo))
    return gates


def _individual_gates(exc):
    gates = []
    for term, rz_coeff in _generator_rz_coefficients(jordan_wigner(exc.generator())):
        gates += _pauli_rotation_gates(term, exc.parameter_id, rz_coeff)
    return gates


def _commuting_set_gates(exc):
    pairs = _generator_rz_coefficients(jordan_wigner(exc.generator()))
    clifford, conj, _ = diagonalize_commuting_terms([t for t, _ in pairs])
    pivot_counts = {}
    rotations = []
    for diag, (term, rz_coeff) in zip(conj, pairs):
        ratio = diag.coeff / term.coeff
        if abs(ratio.imag) > _IMAG_TOL or abs(abs(ratio.real) - 1) > _IMAG_TOL:
            raise RuntimeError("conjugated term must be a signed Z-string")
        mask = diag.qubits()
        rotations.append((mask, rz_coeff * (1 if ratio.real > 0 else -1)))
        for q in mask:
            pivot_counts[q] = pivot_counts.get(q, 0) + 1
    pivot = max(pivot_counts, key=lambda q: (pivot_counts[q], -q))
    middle = _phase_polynomial(rotations, pivot, exc.parameter_id)
    return clifford + middle + _adjoint_gates(clifford)


def paired_double_gadget(exc) -> list:
    """exp(theta G) for a paired double, on qubits a = 2q, b = 2p, 2 CX.

    The inner CX pair conjugates Rx(theta)_a Rz(theta)_b into the XX + ZZ
    rotation; the single-qubit wrappers rotate that onto the hard-core-boson
    generator (i/2)(Y_a X_b - X_a Y_b) exactly, global phase included.
    """
    q, p = exc.spatial_pair
    a, b = 2 * q, 2 * p
    t = exc.parameter_id
    return [
        Gate.rz(a, angle=math.pi / 4),
        Gate.rz(b, angle=-math.pi / 4),
        Gate.rx(a, angle=-math.pi / 2),
        Gate.rx(b, angle=-math.pi / 2),
        Gate.cx(a, b),
        Gate.rx(a, symbol=t),
        Gate.rz(b, symbol=t),
        Gate.cx(a, b),
        Gate.rx(a, angle=math.pi / 2),
        Gate.rx(b, angle=math.pi / 2),
        Gate.rz(a, angle=-math.pi / 4),
        Gate.rz(b, angle=math.pi / 4),
    ]


def hf_preparation_gates(occupied, compact_orbitals=()):
    """Ry(pi) bit flips preparing the reference determinant.

    Spatial orbitals in ``compact_orbitals`` are represented on their even
    qubit only; the odd partner is populated later by the expansion CX.
    """
    skip = {2 * p + 1 for p in compact_orbitals}
    return [Gate.ry(q, angle=math.pi) for q in sorted(occupied) if q not in skip]


# -- strategies ---------------------------------------------------------------


def _pool_parameters(pool):
    return [exc.parameter_id for exc in pool]


def synth_individual(pool, n_qubits, occupied=()) -> Circuit:
    """One primitive per JW Pauli term of each excitation, in pool order."""
    gates = hf_preparation_gates(occupied)
    for exc in pool:
        gates += _individual_gates(exc)
    return Circuit(n_qubits, gates, _pool_parameters(pool))


def synth_commuting_sets(pool, n_qubits, occupied=()) -> Circuit:
    """Diagonalize each excitation's commuting terms jointly, in pool order."""
    gates = hf_preparation_gates(occupied)
    for exc in pool:
        gates += _commuting_set_gates(exc)
    return Circuit(n_qubits, gates, _pool_parameters(pool))


def synth_chemically_aware(model, pool=None) -> Circuit:
    """Symmetry filter, paired-double gadgets first, expansion, then the rest."""
    from .fermion import generate_uccsd_pool

    if pool is None:
        pool = generate_uccsd_pool(model)
    syms = number_parity_symmetries(model) + point_group_z2_symmetries(model)
    survivors = filter_excitations(pool, syms, model)
    paired = [e for e in survivors if e.category == "paired-double"]
    rest = [e for e in survivors if e.category != "paired-double"]
    compact = sorted({p for e in paired for p in e.spatial_pair})
    gates = hf_preparation_gates(model.occupied_spin_orbitals(), compact)
    for exc in paired:
        gates += paired_double_gadget(exc)
    for p in compact:
        gates.append(Gate.cx(2 * p, 2 * p + 1))
    for exc in rest:
        gates += _commuting_set_gates(exc)
    params = _pool_parameters(paired) + _pool_parameters(rest)
    return Circuit(model.n_spin_orbitals, gates, params)


def retained_excitations(model, pool=None):
    """The chemically aware circuit's excitations in emission order."""
    from .fermion import generate_uccsd_pool

    if pool is None:
        pool = generate_uccsd_pool(model)
    syms = number_parity_symmetries(model) + point_group_z2_symmetries(model)
    survivors = filter_excitations(pool, syms, model)
    paired = [e for e in survivors if e.category == "paired-double"]
    rest = [e for e in survivors if e.category != "paired-double"]
    return paired + rest


STRATEGIES = ("individual", "commuting", "chemaware")


def synthesize(model, strategy, pool=None) -> Circuit:
    """Dispatch by strategy name; pool defaults to the full UCCSD pool."""
    from .fermion import generate_uccsd_pool

    if pool is None:
        pool = generate_uccsd_pool(model)
    if strategy == "individual":
        return synth_individual(pool, model.n_spin_orbitals, model.occupied_spin_orbitals())
    if strategy == "commuting":
        return synth_commuting_sets(
            pool, model.n_spin_orbitals, model.occupied_spin_orbitals()
        )
    if strategy == "chemaware":
        return synth_chemically_aware(model, pool)
    raise ValueError(f"unknown strategy {strategy!r} (expected one of {STRATEGIES})")
