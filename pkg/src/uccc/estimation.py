"""Shot-based operator averaging with symmetry-verification mitigation.

A Hermitian operator is measured by grouping its Pauli terms into
simultaneously diagonalizable sets, appending one Clifford basis change per
set, and reading every term of the set off the same computational-basis
shots. Z2 symmetries of the operator ride along for free: any symmetry that
commutes with each term of a set and turns into a Z-string under the set's
basis change is checked per shot by an XOR over its readout support, and
shots in the wrong sector are discarded (PMSV). MMSV instead verifies a
symmetry mid-circuit with a CX cascade onto one register qubit, a
measurement, and a classically conditioned restore.

Distribution quality is scored with the Jensen-Shannon divergence in bits.
"""

from __future__ import annotations

import math

from .circuit import Circuit, Gate
from .simulator import ShotTable, run_statevector
from .synthesis import conjugate_term, diagonalize_commuting_terms

_SIGN_TOL = 1e-9


def _unit_sign(value: complex, what: str) -> int:
    """Collapse a conjugation coefficient to an exact +-1."""
    if abs(value.imag) > _SIGN_TOL or abs(abs(value.real) - 1.0) > _SIGN_TOL:
        raise RuntimeError(f"{what} must carry a +-1 coefficient, got {value!r}")
    return 1 if value.real > 0 else -1


def _conjugated_z_support(pauli, gates):
    """(support, sign) of a Pauli pushed through the basis change, or None.

    None means the conjugate is not a Z-string, so the operator cannot be
    read from this set's shots.
    """
    conj = conjugate_term(pauli, gates)
    if any(letter != "Z" for _, letter in conj.letters):
        return None
    return conj.qubits(), _unit_sign(conj.coeff / pauli.coeff, "basis change")


class MeasurementSet:
    """Mutually commuting terms measured through one Clifford basis change.

    ``readout_map`` gives, per term, the classical bits whose XOR carries
    the term's eigenvalue and the +-1 sign the basis change introduced.
    Attached verifiers are symmetries readable from the same shots; their
    checks compare the XOR over the verifier's support against its sector.
    """

    __slots__ = ("terms", "verifiers", "_gates", "_readout", "_checks")

    def __init__(self, terms, verifiers=()):
        terms = tuple(terms)
        if not terms:
            raise ValueError("a measurement set needs at least one term")
        gates, conj_terms, _ = diagonalize_commuting_terms(terms)
        readout = []
        for t, zt in zip(terms, conj_terms):
            sign = _unit_sign(zt.coeff / t.coeff, "basis change")
            readout.append((t, zt.qubits(), sign))
        checks = []
        for v in verifiers:
            got = _conjugated_z_support(v.pauli, gates)
            if got is None:
                raise ValueError(
                    f"verifier {v.label!r} is not readable from this set's shots"
                )
            if not all(v.pauli.commutes(t) for t in terms):
                raise ValueError(f"verifier {v.label!r} anticommutes with a term")
            checks.append((v, got[0], got[1]))
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "verifiers", tuple(verifiers))
        object.__setattr__(self, "_gates", tuple(gates))
        object.__setattr__(self, "_readout", tuple(readout))
        object.__setattr__(self, "_checks", tuple(checks))

    def __setattr__(self, *_):
        raise AttributeError("MeasurementSet is immutable")

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return (
            f"MeasurementSet(terms=<{len(self.terms)}>, "
            f"verifiers={[v.label for v in self.verifiers]})"
        )

    @property
    def readout_map(self) -> dict:
        return {t: (bits, sign) for t, bits, sign in self._readout}

    @property
    def verifier_checks(self) -> tuple:
        """(verifier, readout bits, sign) triples; parity*sign must equal sector."""
        return self._checks

    def _width(self):
        hi = -1
        for g in self._gates:
            hi = max(hi, *g.qubits)
        for t in self.terms:
            if t.letters:
                hi = max(hi, t.letters[-1][0])
        for _, bits, _ in self._checks:
            hi = max(hi, *bits) if bits else hi
        return hi + 1

    @property
    def diagonalizer(self) -> Circuit:
        return Circuit(self._width(), self._gates)

    def measurement_circuit(self, prep: Circuit) -> Circuit:
        """State preparation, basis change, then a full register readout.

        Classical bit q mirrors qubit q; bits the preparation already uses
        (mid-circuit instruments) stay above the register range.
        """
        if prep.n_qubits < self._width():
            raise ValueError("preparation circuit has too few qubits for this set")
        n = prep.n_qubits
        n_bits = max(prep.n_bits, n)
        gates = tuple(prep.gates) + self._gates
        gates += tuple(Gate.measure(q, q) for q in range(n))
        return Circuit(n, gates, prep.parameters, n_bits=n_bits)


def _x_support(term) -> frozenset:
    return frozenset(q for q, letter in term.letters if letter != "Z")


def partition_terms(op) -> list:
    """Greedy first-fit grouping of a Hermitian operator's non-identity terms.

    Candidates are visited in descending coefficient magnitude (canonical
    term order breaking ties) and join the first set where they commute with
    every member and their X/Y support is equal to or disjoint from every
    member's, which is what the blockwise basis change can diagonalize.
    """
    if not op.is_hermitian(_SIGN_TOL):
        raise ValueError("can only measure a Hermitian operator")
    items = [t for t in op.terms if not t.is_identity()]
    items.sort(key=lambda t: (-abs(t.coeff), t.letters))
    groups: list = []
    supports: list = []
    for t in items:
        xs = _x_support(t)
        for group, group_xs in zip(groups, supports):
            if all(xs == other or not (xs & other) for other in group_xs) and all(
                t.commutes(u) for u in group
            ):
                group.append(t)
                group_xs.add(xs)
                break
        else:
            groups.append([t])
            supports.append({xs})
    return [MeasurementSet(g) for g in groups]


def attach_verifiers(sets, symmetries) -> list:
    """Attach each symmetry to every set able to read it from its own shots.

    A symmetry qualifies for a set when it commutes with each term
    individually and its image under the set's basis change is a Z-string;
    sets gaining no symmetry stay unverified.
    """
    out = []
    for s in sets:
        attached = []
        for sym in symmetries:
            if not all(sym.pauli.commutes(t) for t in s.terms):
                continue
            if _conjugated_z_support(sym.pauli, s._gates) is None:
                continue
            attached.append(sym)
        out.append(MeasurementSet(s.terms, verifiers=tuple(attached)))
    return out


def pmsv_postselect(table: ShotTable, mset: MeasurementSet) -> ShotTable:
    """Drop shots whose verifier parities disagree with their sectors."""
    for v, bits, _ in mset.verifier_checks:
        if bits and max(bits) >= table.n_bits:
            raise ValueError(
                f"verifier {v.label!r} reads bit {max(bits)}, "
                f"table has {table.n_bits}"
            )
    kept = {}
    for key, count in table.counts.items():
        ok = True
        for v, bits, sign in mset.verifier_checks:
            parity = -1 if sum(int(key[b]) for b in bits) % 2 else 1
            if sign * parity != v.sector:
                ok = False
                break
        if ok:
            kept[key] = count
    return ShotTable(kept, table.n_bits)


def _table_estimate(mset: MeasurementSet, table) -> tuple:
    """(mean, squared standard error) of the set's energy contribution.

    ``table`` is a ShotTable or a mapping bitstring -> probability (the
    infinite-shot limit, which carries no sampling variance).
    """
    if isinstance(table, ShotTable):
        counts = table.counts
        width = table.n_bits
        shots = table.shots
        if shots == 0:
            raise ValueError("no shots left to average (all discarded?)")
    else:
        counts = dict(table)
        width = min(len(k) for k in counts) if counts else 0
        shots = None
        total = sum(counts.values())
        if not counts or total <= 0:
            raise ValueError("empty probability table")
        counts = {k: v / total for k, v in counts.items()}
    for t, bits, _ in mset._readout:
        if bits and max(bits) >= width:
            raise ValueError(f"term [{t.label}] reads beyond the measured bits")
    mean = 0.0
    second = 0.0
    for key, weight in counts.items():
        value = 0.0
        for t, bits, sign in mset._readout:
            parity = -1 if sum(int(key[b]) for b in bits) % 2 else 1
            value += t.coeff.real * sign * parity
        mean += weight * value
        second += weight * value * value
    if shots is None:
        return mean, 0.0
    mean /= shots
    second /= shots
    variance = max(second - mean * mean, 0.0)
    return mean, variance / shots


def estimate_energy(sets, tables, op) -> tuple:
    """Assemble (expectation, standard error) from per-set shot tables.

    ``sets`` must jointly cover the operator's non-identity terms exactly
    once; the identity contributes its coefficient with zero variance.
    """
    sets = list(sets)
    tables = list(tables)
    if len(sets) != len(tables):
        raise ValueError("need exactly one table per measurement set")
    expected = {t.letters: t.coeff for t in op.terms if not t.is_identity()}
    got: dict = {}
    for s in sets:
        for t in s.terms:
            got[t.letters] = got.get(t.letters, 0j) + t.coeff
    if set(got) != set(expected) or any(
        abs(got[k] - expected[k]) > _SIGN_TOL for k in expected
    ):
        raise ValueError("measurement sets do not match the operator's terms")
    energy = op.identity_coefficient.real
    variance = 0.0
    for s, table in zip(sets, tables):
        mean, se2 = _table_estimate(s, table)
        energy += mean
        variance += se2
    return energy, math.sqrt(variance)


def exact_distribution(circuit: Circuit, cutoff: float = 1e-16) -> dict:
    """Infinite-shot limit of sampling a terminal-measurement circuit.

    Assumes classical bit q mirrors qubit q, the layout measurement_circuit
    emits; bits beyond the register (instrument bits) read 0.
    """
    probs = run_statevector(circuit).probabilities()
    n = circuit.n_qubits
    width = max(circuit.n_bits, n)
    out: dict = {}
    for index, p in enumerate(probs):
        if p > cutoff:
            key = "".join(str((index >> q) & 1) for q in range(n))
            out[key.ljust(width, "0")] = float(p)
    return out


# -- mid-circuit measurement symmetry verification ---------------------------


def mmsv_instrument(circuit: Circuit, sym) -> Circuit:
    """Insert a mid-circuit parity check of a Z-string symmetry.

    A CX cascade folds the symmetry's support onto its last qubit, which is
    measured into a fresh classical bit, reset, re-excited conditioned on
    that bit, and the cascade undone; the register is left in the measured
    symmetry branch at a cost of 2*(support-1) CX gates. Accepted shots are
    those whose new bit equals 0 for sector +1 and 1 for sector -1 (see
    ``mmsv_accept_bit``).
    """
    letters = dict(sym.pauli.letters)
    if any(letter != "Z" for letter in letters.values()):
        raise ValueError("mid-circuit verification needs a Z-string; diagonalize first")
    support = sym.support()
    if not support:
        raise ValueError("symmetry acts on no qubits")
    if max(support) >= circuit.n_qubits:
        raise ValueError("symmetry support exceeds the register")
    target = support[-1]
    bit = max(circuit.n_bits, circuit.n_qubits)
    cascade = [Gate.cx(q, target) for q in support[:-1]]
    instrument = (
        cascade
        + [Gate.measure(target, bit), Gate.reset(target), Gate.xc(target, bit)]
        + list(reversed(cascade))
    )
    return Circuit(
        circuit.n_qubits,
        tuple(circuit.gates) + tuple(instrument),
        circuit.parameters,
        n_bits=bit + 1,
    )


def mmsv_accept_bit(circuit: Circuit, sym) -> tuple:
    """(bit index, accepted value) for the instrument appended to ``circuit``."""
    bit = max(circuit.n_bits, circuit.n_qubits)
    return bit, 0 if sym.sector == 1 else 1


def mmsv_postselect(table: ShotTable, bit: int, accept: int) -> ShotTable:
    """Keep shots whose instrument bit landed in the accepted branch."""
    if bit >= table.n_bits:
        raise ValueError(f"bit {bit} not present in table of width {table.n_bits}")
    kept = {k: c for k, c in table.counts.items() if int(k[bit]) == accept}
    return ShotTable(kept, table.n_bits)


# -- distribution diagnostics -------------------------------------------------


def _as_distribution(x) -> dict:
    if isinstance(x, ShotTable):
        return x.probabilities() if x.shots else {}
    d = {k: float(v) for k, v in dict(x).items() if v > 0}
    total = sum(d.values())
    return {k: v / total for k, v in d.items()} if total > 0 else {}


def jsd(p, q) -> float:
    """Jensen-Shannon divergence in bits; 0 iff equal, at most 1."""
    dp = _as_distribution(p)
    dq = _as_distribution(q)
    if not dp or not dq:
        raise ValueError("cannot score an empty distribution")
    out = 0.0
    for key in set(dp) | set(dq):
        a = dp.get(key, 0.0)
        b = dq.get(key, 0.0)
        mid = 0.5 * (a + b)
        if a > 0:
            out += 0.5 * a * math.log2(a / mid)
        if b > 0:
            out += 0.5 * b * math.log2(b / mid)
    return min(max(out, 0.0), 1.0)
