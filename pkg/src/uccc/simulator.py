"""Dense statevector simulator with shots, mid-circuit ops, and Pauli noise.

Little-endian: qubit q is bit q of a basis-state index, and the leftmost
character of a ShotTable bitstring is classical bit 0.

Noise is a trajectory model: after each CX, with probability
``two_qubit_depolarizing_p``, one of the 15 non-identity two-qubit Paulis is
inserted (uniformly); measured bits flip with ``measurement_flip_p``. Every
shot owns a Philox4x64 counter generator keyed by
``master_seed * 2**64 + shot_index``, so results are reproducible no matter
how shots are scheduled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

DENSE_SIM_CAP = 20

_SQ = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _rotation(kind, angle):
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if kind == "Rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "Ry":
        return np.array([[c, -s], [s, c]])
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])  # Rz


def _apply_1q(state, mat, q, n):
    psi = state.reshape([2] * n)
    ax = n - 1 - q
    psi = np.moveaxis(np.tensordot(mat, np.moveaxis(psi, ax, 0), axes=(1, 0)), 0, ax)
    return np.ascontiguousarray(psi).reshape(-1)


def _apply_cx(state, control, target, n):
    psi = state.reshape([2] * n).copy()
    view = np.moveaxis(psi, (n - 1 - control, n - 1 - target), (0, 1))
    view[1] = view[1, ::-1].copy()
    return psi.reshape(-1)


@dataclass(frozen=True)
class NoiseSpec:
    two_qubit_depolarizing_p: float = 0.0
    measurement_flip_p: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for p in (self.two_qubit_depolarizing_p, self.measurement_flip_p):
            if not 0.0 <= p <= 1.0:
                raise ValueError("noise probabilities must lie in [0, 1]")

    @property
    def is_noiseless(self):
        return self.two_qubit_depolarizing_p == 0 and self.measurement_flip_p == 0


class StateVector:
    """2^n complex amplitudes, qubit q = bit q of the index."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes, n_qubits=None):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if n_qubits is None:
            n_qubits = int(round(math.log2(amplitudes.size)))
        if amplitudes.shape != (1 << n_qubits,):
            raise ValueError("amplitude length must be a power of two")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "n_qubits", n_qubits)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @classmethod
    def computational_basis(cls, n_qubits, index=0):
        amp = np.zeros(1 << n_qubits, dtype=complex)
        amp[index] = 1.0
        return cls(amp, n_qubits)

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def fidelity(self, other):
        return abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2

    def probabilities(self):
        return np.abs(self.amplitudes) ** 2


class ShotTable:
    """Counts per classical bitstring; leftmost character is bit 0."""

    __slots__ = ("counts", "n_bits")

    def __init__(self, counts, n_bits):
        counts = {str(k): int(v) for k, v in counts.items() if int(v) != 0}
        for key, v in counts.items():
            if len(key) != n_bits or any(ch not in "01" for ch in key):
                raise ValueError(f"bad bitstring {key!r} for n_bits={n_bits}")
            if v < 0:
                raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "n_bits", int(n_bits))

    def __setattr__(self, name, value):
        raise AttributeError("ShotTable is immutable")

    @property
    def shots(self):
        return sum(self.counts.values())

    def __eq__(self, other):
        if not isinstance(other, ShotTable):
            return NotImplemented
        return self.n_bits == other.n_bits and self.counts == other.counts

    def __repr__(self):
        return f"ShotTable(shots={self.shots}, n_bits={self.n_bits})"

    def probabilities(self):
        total = self.shots
        return {k: v / total for k, v in sorted(self.counts.items())}

    def to_csv(self):
        lines = ["# leftmost bitstring character is classical bit 0", "bitstring,count"]
        lines += [f"{k},{v}" for k, v in sorted(self.counts.items())]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text):
        counts = {}
        n_bits = 0
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line == "bitstring,count":
                continue
            key, value = line.split(",")
            counts[key] = counts.get(key, 0) + int(value)
            n_bits = max(n_bits, len(key))
        return cls(counts, n_bits)

    def to_json(self):
        return json.dumps(
            {
                "bit_order": "leftmost bitstring character is classical bit 0",
                "n_bits": self.n_bits,
                "shots": self.shots,
                "counts": dict(sorted(self.counts.items())),
            },
            indent=1,
        )

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(data["counts"], data["n_bits"])


def _shot_rng(seed, shot_index):
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) + shot_index))


def _require_bound(circuit):
    for g in circuit.gates:
        if g.symbol is not None:
            raise ValueError(f"unbound symbol {g.symbol!r}; bind the circuit first")
    if circuit.n_qubits > DENSE_SIM_CAP:
        raise ValueError(f"dense simulation capped at {DENSE_SIM_CAP} qubits")


def _split_terminal_measurements(circuit):
    """Unitary prefix plus trailing MEASURE list; rejects mid-circuit ops."""
    gates = circuit.gates
    first_meas = next((i for i, g in enumerate(gates) if g.kind == "MEASURE"), len(gates))
    for i, g in enumerate(gates):
        if g.kind in ("RESET", "XC") or (g.kind == "MEASURE") != (i >= first_meas):
            raise ValueError(
                "circuit has mid-circuit operations; use run_with_midcircuit"
            )
    prefix = gates[:first_meas]
    measures = [(g.qubits[0], g.bit) for g in gates[first_meas:]]
    return prefix, measures


def _apply_gates(state, gates, n, noise_events=None):
    for i, g in enumerate(gates):
        if g.kind == "CX":
            state = _apply_cx(state, g.qubits[0], g.qubits[1], n)
            if noise_events and i in noise_events:
                p1, p2 = noise_events[i]
                for letter, q in zip((p1, p2), g.qubits):
                    if letter != "I":
                        state = _apply_1q(state, _SQ[letter], q, n)
        elif g.kind == "H":
            state = _apply_1q(state, _SQ["H"], g.qubits[0], n)
        else:
            state = _apply_1q(state, _rotation(g.kind, g.angle), g.qubits[0], n)
    return state


def _initial_array(circuit, initial):
    n = circuit.n_qubits
    if initial is None:
        return StateVector.computational_basis(n).amplitudes.copy()
    if isinstance(initial, StateVector):
        return initial.amplitudes.astype(complex).copy()
    if isinstance(initial, (int, np.integer)):
        return StateVector.computational_basis(n, int(initial)).amplitudes.copy()
    arr = np.asarray(initial, dtype=complex).copy()
    if arr.shape != (1 << n,):
        raise ValueError("initial state has wrong dimension")
    return arr


def run_statevector(circuit, initial=None) -> StateVector:
    """Exact final state of a bound circuit (terminal MEASUREs ignored)."""
    _require_bound(circuit)
    prefix, _ = _split_terminal_measurements(circuit)
    state = _apply_gates(_initial_array(circuit, initial), prefix, circuit.n_qubits)
    return StateVector(state, circuit.n_qubits)


def _measured_distribution(state, measured_qubits, n):
    """Joint outcome probabilities; index bit j <-> measured_qubits[j]."""
    p = (np.abs(state) ** 2).reshape([2] * n)
    m = len(measured_qubits)
    axes = [n - 1 - q for q in measured_qubits]
    p = np.moveaxis(p, axes, range(m))
    p = p.reshape((1 << m, -1)).sum(axis=1)
    # row-major flatten put measured_qubits[0] at the top bit; flip to bit 0
    out = np.empty_like(p)
    for k in range(1 << m):
        rev = int(format(k, f"0{m}b")[::-1], 2) if m else 0
        out[rev] = p[k]
    return out


def _bits_to_string(bits, n_bits):
    return "".join(str(int(bits.get(i, 0))) for i in range(n_bits))


_PAULI_PAIRS = [(a, b) for a in "IXYZ" for b in "IXYZ"][1:]  # 15 non-identity


def sample(circuit, shots, noise: NoiseSpec | None = None) -> ShotTable:
    """Sample a bound circuit that ends in MEASURE gates."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    _require_bound(circuit)
    prefix, measures = _split_terminal_measurements(circuit)
    if not measures:
        raise ValueError("circuit must end with MEASURE gates")
    n = circuit.n_qubits
    seed = noise.seed if noise is not None else 0
    mq = [q for q, _ in measures]
    mbits = [b for _, b in measures]
    init = _initial_array(circuit, None)

    clean = _apply_gates(init, prefix, n)
    clean_dist = _measured_distribution(clean, mq, n)

    if noise is None or noise.is_noiseless:
        rng = _shot_rng(seed, 0)
        draws = rng.multinomial(shots, clean_dist / clean_dist.sum())
        counts = {}
        for k, c in enumerate(draws):
            if c:
                bits = {mbits[j]: (k >> j) & 1 for j in range(len(mq))}
                key = _bits_to_string(bits, circuit.n_bits)
                counts[key] = counts.get(key, 0) + int(c)
        return ShotTable(counts, circuit.n_bits)

    p2 = noise.two_qubit_depolarizing_p
    flip = noise.measurement_flip_p
    cx_positions = [i for i, g in enumerate(prefix) if g.kind == "CX"]
    clean_cum = np.cumsum(clean_dist)
    dist_cache = {}
    counts = {}
    for shot in range(shots):
        rng = _shot_rng(seed, shot + 1)
        events = {}
        if p2 > 0 and cx_positions:
            hits = rng.random(len(cx_positions)) < p2
            for pos, hit in zip(cx_positions, hits):
                if hit:
                    events[pos] = _PAULI_PAIRS[rng.integers(0, 15)]
        if events:
            key = tuple(sorted(events.items()))
            cum = dist_cache.get(key)
            if cum is None:
                noisy = _apply_gates(init.copy(), prefix, n, noise_events=events)
                d = _measured_distribution(noisy, mq, n)
                cum = np.cumsum(d)
                dist_cache[key] = cum
        else:
            cum = clean_cum
        k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        k = min(k, len(cum) - 1)
        bits = {mbits[j]: (k >> j) & 1 for j in range(len(mq))}
        if flip > 0:
            flips = rng.random(len(mbits)) < flip
            for b, f in zip(mbits, flips):
                if f:
                    bits[b] ^= 1
        key_s = _bits_to_string(bits, circuit.n_bits)
        counts[key_s] = counts.get(key_s, 0) + 1
    return ShotTable(counts, circuit.n_bits)


def simulate_trajectory(
    circuit, rng=None, forced_outcomes=None, noise: NoiseSpec | None = None, initial=None
):
    """One shot with mid-circuit collapse; returns (bits dict, StateVector).

    ``forced_outcomes`` replaces random collapse outcomes in order of
    occurrence (MEASURE and RESET both consume one entry).
    """
    _require_bound(circuit)
    n = circuit.n_qubits
    state = _initial_array(circuit, initial)
    bits = {}
    forced = list(forced_outcomes) if forced_outcomes is not None else None
    p2 = noise.two_qubit_depolarizing_p if noise else 0.0
    flip = noise.measurement_flip_p if noise else 0.0

    def collapse(q):
        psi = state.reshape([2] * n)
        ax = n - 1 - q
        pick = np.moveaxis(psi, ax, 0)
        p1 = float(np.sum(np.abs(pick[1]) ** 2))
        if forced is not None and forced:
            outcome = int(forced.pop(0))
        elif rng is not None:
            outcome = int(rng.random() < p1)
        else:
            raise ValueError("mid-circuit measurement needs an rng or forced outcomes")
        prob = p1 if outcome else 1.0 - p1
        if prob <= 0:
            raise ValueError("forced outcome has zero probability")
        pick[1 - outcome] = 0
        return outcome, state / math.sqrt(prob)

    for g in circuit.gates:
        if g.kind == "MEASURE":
            outcome, state = collapse(g.qubits[0])
            if flip > 0 and rng is not None and rng.random() < flip:
                outcome ^= 1
            bits[g.bit] = outcome
        elif g.kind == "RESET":
            outcome, state = collapse(g.qubits[0])
            if outcome:
                state = _apply_1q(state, _SQ["X"], g.qubits[0], n)
        elif g.kind == "XC":
            if g.bit not in bits:
                raise ValueError(f"XC reads classical bit c{g.bit} before it is written")
            if bits[g.bit]:
                state = _apply_1q(state, _SQ["X"], g.qubits[0], n)
        elif g.kind == "CX":
            state = _apply_cx(state, g.qubits[0], g.qubits[1], n)
            if p2 > 0 and rng is not None and rng.random() < p2:
                pair = _PAULI_PAIRS[rng.integers(0, 15)]
                for letter, q in zip(pair, g.qubits):
                    if letter != "I":
                        state = _apply_1q(state, _SQ[letter], q, n)
        elif g.kind == "H":
            state = _apply_1q(state, _SQ["H"], g.qubits[0], n)
        else:
            state = _apply_1q(state, _rotation(g.kind, g.angle), g.qubits[0], n)
    return bits, StateVector(state, n)


def run_with_midcircuit(circuit, shots, noise: NoiseSpec | None = None) -> ShotTable:
    """Per-shot trajectories for circuits with mid-circuit operations."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    _require_bound(circuit)
    seed = noise.seed if noise is not None else 0
    counts = {}
    for shot in range(shots):
        rng = _shot_rng(seed, shot + 1)
        bits, _ = simulate_trajectory(circuit, rng=rng, noise=noise)
        key = _bits_to_string(bits, circuit.n_bits)
        counts[key] = counts.get(key, 0) + 1
    return ShotTable(counts, circuit.n_bits)
