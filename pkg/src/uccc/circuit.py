"""Gate-level circuit IR with symbolic parameters.

Gate set: H, Rx, Ry, Rz, CX, MEASURE, RESET, XC (classically conditioned X).
Rotation angles are either literal radians or ``coeff * symbol`` references
into the circuit's ordered parameter table.

Angle convention: Rz(theta) = exp(-i theta Z / 2), and likewise for Rx/Ry, so
a Pauli gadget realizing exp(-i theta P / 2) is synthesized at angle theta.

Circuits are immutable; transformations return new circuits. Qubit 0 is the
least significant bit of a basis-state index.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

ROTATIONS = ("Rx", "Ry", "Rz")
KINDS = ("H", "Rx", "Ry", "Rz", "CX", "MEASURE", "RESET", "XC")

_MERGE_CUTOFF = 1e-12  # merged rotations whose net angle is below this vanish


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    angle: float | None = None
    symbol: str | None = None
    coeff: float = 1.0
    bit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_expected = 2 if self.kind == "CX" else 1
        if len(self.qubits) != n_expected:
            raise ValueError(f"{self.kind} takes {n_expected} operand(s)")
        if self.kind == "CX" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CX operands must be distinct")
        if self.kind in ROTATIONS:
            if (self.angle is None) == (self.symbol is None):
                raise ValueError("rotation needs exactly one of angle, symbol")
        elif self.angle is not None or self.symbol is not None:
            raise ValueError(f"{self.kind} takes no angle")
        if self.kind in ("MEASURE", "XC"):
            if self.bit is None or self.bit < 0:
                raise ValueError(f"{self.kind} needs a classical bit")
        elif self.bit is not None:
            raise ValueError(f"{self.kind} takes no classical bit")

    # -- constructors ------------------------------------------------------

    @classmethod
    def h(cls, q):
        return cls("H", (q,))

    @classmethod
    def rx(cls, q, angle=None, symbol=None, coeff=1.0):
        return cls("Rx", (q,), angle=angle, symbol=symbol, coeff=coeff)

    @classmethod
    def ry(cls, q, angle=None, symbol=None, coeff=1.0):
        return cls("Ry", (q,), angle=angle, symbol=symbol, coeff=coeff)

    @classmethod
    def rz(cls, q, angle=None, symbol=None, coeff=1.0):
        return cls("Rz", (q,), angle=angle, symbol=symbol, coeff=coeff)

    @classmethod
    def cx(cls, control, target):
        return cls("CX", (control, target))

    @classmethod
    def measure(cls, q, bit):
        return cls("MEASURE", (q,), bit=bit)

    @classmethod
    def reset(cls, q):
        return cls("RESET", (q,))

    @classmethod
    def xc(cls, q, bit):
        return cls("XC", (q,), bit=bit)

    # -- queries -----------------------------------------------------------

    @property
    def is_rotation(self):
        return self.kind in ROTATIONS

    def bound_angle(self, values):
        """Literal angle of a rotation under the given parameter values."""
        if not self.is_rotation:
            raise ValueError(f"{self.kind} has no angle")
        if self.symbol is None:
            return self.angle
        if values is None or self.symbol not in values:
            raise KeyError(f"unbound symbol {self.symbol!r}")
        return self.coeff * values[self.symbol]

    def _angle_text(self):
        if self.symbol is None:
            return repr(self.angle)
        if self.coeff == 1.0:
            return self.symbol
        return f"{self.coeff!r}*{self.symbol}"

    def serialize(self):
        if self.kind == "CX":
            return f"CX q{self.qubits[0]} q{self.qubits[1]}"
        if self.kind == "MEASURE":
            return f"MEASURE q{self.qubits[0]} -> c{self.bit}"
        if self.kind == "XC":
            return f"XC c{self.bit} q{self.qubits[0]}"
        if self.kind in ROTATIONS:
            return f"{self.kind}({self._angle_text()}) q{self.qubits[0]}"
        return f"{self.kind} q{self.qubits[0]}"


_ROT_RE = re.compile(r"^(Rx|Ry|Rz)\((.+)\)\s+q(\d+)$")
_SYMBOLIC_RE = re.compile(r"^(?:(.+)\*)?([A-Za-z_][A-Za-z_0-9]*)$")


def _parse_gate(line):
    m = _ROT_RE.match(line)
    if m:
        kind, arg, q = m.group(1), m.group(2).strip(), int(m.group(3))
        sym = _SYMBOLIC_RE.match(arg)
        if sym:
            coeff = 1.0 if sym.group(1) is None else float(sym.group(1))
            return Gate(kind, (q,), symbol=sym.group(2), coeff=coeff)
        return Gate(kind, (q,), angle=float(arg))
    parts = line.split()
    if parts[0] == "CX" and len(parts) == 3:
        return Gate.cx(int(parts[1][1:]), int(parts[2][1:]))
    if parts[0] == "MEASURE" and len(parts) == 4 and parts[2] == "->":
        return Gate.measure(int(parts[1][1:]), int(parts[3][1:]))
    if parts[0] == "XC" and len(parts) == 3:
        return Gate.xc(int(parts[2][1:]), int(parts[1][1:]))
    if parts[0] in ("H", "RESET") and len(parts) == 2:
        return Gate(parts[0], (int(parts[1][1:]),))
    raise ValueError(f"cannot parse gate line {line!r}")


class Circuit:
    """Ordered gate list over n_qubits wires and n_bits classical bits."""

    __slots__ = ("n_qubits", "n_bits", "gates", "parameters")

    def __init__(self, n_qubits, gates=(), parameters=None, n_bits=0):
        gates = tuple(gates)
        referenced = []
        for g in gates:
            if not isinstance(g, Gate):
                raise TypeError(f"not a Gate: {g!r}")
            if any(q >= n_qubits for q in g.qubits):
                raise ValueError(f"qubit out of range in {g.serialize()}")
            if g.bit is not None and g.bit >= n_bits:
                raise ValueError(f"bit out of range in {g.serialize()}")
            if g.symbol is not None and g.symbol not in referenced:
                referenced.append(g.symbol)
        if parameters is None:
            parameters = referenced
        else:
            missing = [s for s in referenced if s not in parameters]
            if missing:
                raise ValueError(f"symbols missing from table: {missing}")
        object.__setattr__(self, "n_qubits", int(n_qubits))
        object.__setattr__(self, "n_bits", int(n_bits))
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "parameters", tuple(parameters))

    def __setattr__(self, name, value):
        raise AttributeError("Circuit is immutable")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.n_bits == other.n_bits
            and self.gates == other.gates
            and self.parameters == other.parameters
        )

    def __repr__(self):
        return (
            f"Circuit(n_qubits={self.n_qubits}, n_bits={self.n_bits}, "
            f"gates=<{len(self.gates)}>, parameters={list(self.parameters)})"
        )

    def __add__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        if self.n_qubits != other.n_qubits or self.n_bits != other.n_bits:
            raise ValueError("circuit shapes differ")
        params = list(self.parameters)
        params += [s for s in other.parameters if s not in params]
        return Circuit(self.n_qubits, self.gates + other.gates, params, self.n_bits)

    # -- metrics -----------------------------------------------------------

    def two_qubit_gate_count(self):
        return sum(1 for g in self.gates if g.kind == "CX")

    def rotation_count(self):
        return sum(1 for g in self.gates if g.is_rotation)

    def has_midcircuit_ops(self):
        return any(g.kind in ("MEASURE", "RESET", "XC") for g in self.gates)

    # -- transformations ---------------------------------------------------

    def bind(self, values):
        """Replace every symbolic angle with coeff * values[symbol]."""
        bound = []
        for g in self.gates:
            if g.symbol is not None:
                bound.append(Gate(g.kind, g.qubits, angle=g.bound_angle(values)))
            else:
                bound.append(g)
        return Circuit(self.n_qubits, bound, (), self.n_bits)

    def prune(self, values, tol):
        """Drop rotations with bound |angle| < tol, then cancel leftovers.

        Returns (reduced circuit, values restricted to surviving symbols).
        The peephole pass is adjacent-pair only: CX.CX and H.H cancellation
        plus same-axis rotation merging, iterated to a fixed point.
        """
        if tol < 0:
            raise ValueError("tol must be >= 0")
        if tol == 0:
            return self, dict(values or {})
        kept = [g for g in self.gates if not (g.is_rotation and abs(g.bound_angle(values)) < tol)]
        if len(kept) < len(self.gates):
            kept = _peephole(kept)
        survivors = []
        for g in kept:
            if g.symbol is not None and g.symbol not in survivors:
                survivors.append(g.symbol)
        params = tuple(s for s in self.parameters if s in survivors)
        reduced = Circuit(self.n_qubits, kept, params, self.n_bits)
        values = values or {}
        return reduced, {s: values[s] for s in params}

    # -- serialization -----------------------------------------------------

    def serialize(self):
        lines = [
            f"# qubits: {self.n_qubits}",
            f"# bits: {self.n_bits}",
            f"# params: {' '.join(self.parameters)}",
            "# qubit 0 is the least significant bit of a basis-state index",
        ]
        lines += [g.serialize() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text):
        n_qubits = n_bits = 0
        parameters = []
        gates = []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("qubits:"):
                    n_qubits = int(body.split(":", 1)[1])
                elif body.startswith("bits:"):
                    n_bits = int(body.split(":", 1)[1])
                elif body.startswith("params:"):
                    parameters = body.split(":", 1)[1].split()
                continue
            gates.append(_parse_gate(line))
        return cls(n_qubits, gates, parameters, n_bits)

    def to_json(self):
        out = {
            "n_qubits": self.n_qubits,
            "n_bits": self.n_bits,
            "parameters": list(self.parameters),
            "gates": [],
        }
        for g in self.gates:
            entry = {"kind": g.kind, "qubits": list(g.qubits)}
            if g.is_rotation:
                if g.symbol is not None:
                    entry["symbol"] = g.symbol
                    entry["coeff"] = g.coeff
                else:
                    entry["angle"] = g.angle
            if g.bit is not None:
                entry["bit"] = g.bit
            out["gates"].append(entry)
        return json.dumps(out, indent=2)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        gates = [
            Gate(
                e["kind"],
                tuple(e["qubits"]),
                angle=e.get("angle"),
                symbol=e.get("symbol"),
                coeff=e.get("coeff", 1.0),
                bit=e.get("bit"),
            )
            for e in data["gates"]
        ]
        return cls(data["n_qubits"], gates, data["parameters"], data["n_bits"])


def _next_on_wires(gates, i):
    """Index of the first gate after i sharing a qubit with gates[i], or None."""
    wires = set(gates[i].qubits)
    for j in range(i + 1, len(gates)):
        if wires & set(gates[j].qubits):
            return j
    return None


def _try_merge(a, b):
    """Merge or cancel an adjacent pair; returns (changed, replacement list)."""
    if a.kind == "H" and b.kind == "H" and a.qubits == b.qubits:
        return True, []
    if a.kind == "CX" and b.kind == "CX" and a.qubits == b.qubits:
        return True, []
    if a.is_rotation and b.kind == a.kind and a.qubits == b.qubits:
        if a.symbol is None and b.symbol is None:
            total = a.angle + b.angle
            if abs(total) < _MERGE_CUTOFF:
                return True, []
            return True, [Gate(a.kind, a.qubits, angle=total)]
        if a.symbol is not None and a.symbol == b.symbol:
            coeff = a.coeff + b.coeff
            if abs(coeff) < _MERGE_CUTOFF:
                return True, []
            return True, [Gate(a.kind, a.qubits, symbol=a.symbol, coeff=coeff)]
    return False, None


def _peephole(gates):
    """Adjacent-pair cancellation to a fixed point."""
    gates = list(gates)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(gates):
            j = _next_on_wires(gates, i)
            if j is not None:
                merged, repl = _try_merge(gates[i], gates[j])
                if merged:
                    gates[i : j + 1] = repl + gates[i + 1 : j]
                    changed = True
                    i = max(i - 1, 0)
                    continue
            i += 1
    return gates
