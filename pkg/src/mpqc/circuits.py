"""Circuit IR shared by the quantum and boolean paths, plus its JSON format.

A file is a JSON object with a ``"kind"`` header (``"quantum"`` or
``"boolean"``).  Quantum circuits carry ``qubits``; boolean circuits carry
``wires``.  Both carry ``inputs`` (per-party wire/qubit lists), ``gates``
(``{"id", "kind", "targets"}``) and ``outputs``.  For boolean gates the
``targets`` list is ``[*inputs, output]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .qsim import CLIFFORD_GATES, GATE_ARITY


class CircuitError(ValueError):
    pass


class FanOutViolation(CircuitError):
    def __init__(self, wire: int, uses: int):
        super().__init__(f"wire {wire} feeds {uses} gates (fan-out must be 1)")
        self.wire = wire


# ------------------------------------------------------------------ quantum


@dataclass(frozen=True)
class QGate:
    kind: str
    targets: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))


@dataclass
class QuantumCircuit:
    num_qubits: int
    gates: list[QGate] = field(default_factory=list)
    inputs: dict[int, list[int]] | None = None
    outputs: list[int] | None = None

    def __post_init__(self):
        self.gates = [g if isinstance(g, QGate) else QGate(*g) for g in self.gates]
        for g in self.gates:
            if g.kind not in GATE_ARITY:
                raise CircuitError(f"unknown gate kind {g.kind!r}")
            if len(g.targets) != GATE_ARITY[g.kind]:
                raise CircuitError(f"{g.kind} needs {GATE_ARITY[g.kind]} targets")
            if len(set(g.targets)) != len(g.targets):
                raise CircuitError(f"repeated target in {g}")
            if any(not 0 <= t < self.num_qubits for t in g.targets):
                raise CircuitError(f"target out of range in {g}")
        if self.outputs is None:
            self.outputs = list(range(self.num_qubits))

    def pairs(self) -> list[tuple[str, tuple[int, ...]]]:
        return [(g.kind, g.targets) for g in self.gates]

    @property
    def is_clifford(self) -> bool:
        return all(g.kind in CLIFFORD_GATES for g in self.gates)

    @property
    def t_count(self) -> int:
        return sum(g.kind == "T" for g in self.gates)

    def layers(self) -> list[list[int]]:
        """ASAP layering; each layer is a list of gate indices."""
        ready = [0] * self.num_qubits
        layers: list[list[int]] = []
        for i, g in enumerate(self.gates):
            lvl = max(ready[t] for t in g.targets)
            if lvl == len(layers):
                layers.append([])
            layers[lvl].append(i)
            for t in g.targets:
                ready[t] = lvl + 1
        return layers

    @property
    def depth(self) -> int:
        return len(self.layers())


# ------------------------------------------------------------------ boolean


@dataclass(frozen=True)
class BoolGate:
    kind: str  # "AND", "XOR" or "NOT"
    inputs: tuple[int, ...]
    output: int

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(w) for w in self.inputs))
        object.__setattr__(self, "output", int(self.output))


@dataclass
class BoolCircuit:
    """Topologically ordered AND/XOR/NOT circuit; XOR has unbounded arity."""

    num_wires: int
    inputs: dict[int, list[int]]
    gates: list[BoolGate]
    outputs: list[int]

    def __post_init__(self):
        self.inputs = {int(p): [int(w) for w in ws] for p, ws in self.inputs.items()}
        self.gates = [g if isinstance(g, BoolGate) else BoolGate(*g) for g in self.gates]
        self.outputs = [int(w) for w in self.outputs]
        self.validate()

    def validate(self) -> None:
        written = set()
        for ws in self.inputs.values():
            for w in ws:
                if w in written:
                    raise CircuitError(f"input wire {w} declared twice")
                written.add(w)
        for g in self.gates:
            if g.kind == "AND" and len(g.inputs) != 2:
                raise CircuitError("AND gates take exactly 2 inputs")
            if g.kind == "NOT" and len(g.inputs) != 1:
                raise CircuitError("NOT gates take exactly 1 input")
            if g.kind == "XOR" and len(g.inputs) < 1:
                raise CircuitError("XOR needs at least one input")
            if g.kind not in ("AND", "XOR", "NOT"):
                raise CircuitError(f"unknown boolean gate {g.kind!r}")
            for w in g.inputs:
                if w not in written:
                    raise CircuitError(f"wire {w} read before it is written")
            if g.output in written:
                raise CircuitError(f"wire {g.output} written twice")
            written.add(g.output)
        for w in self.outputs:
            if w not in written:
                raise CircuitError(f"output wire {w} never written")
        if written and max(written) >= self.num_wires:
            raise CircuitError("wire id exceeds num_wires")

    @property
    def input_wires(self) -> list[int]:
        return [w for p in sorted(self.inputs) for w in self.inputs[p]]

    def owner(self) -> dict[int, int]:
        return {w: p for p, ws in self.inputs.items() for w in ws}

    def evaluate(self, inputs: dict[int, list[int]]) -> list[int]:
        """Plaintext evaluation; ``inputs[p]`` lists party p's bits in wire order."""
        val: dict[int, int] = {}
        for p, ws in self.inputs.items():
            bits = list(inputs.get(p, []))
            if len(bits) != len(ws):
                raise CircuitError(f"party {p} needs {len(ws)} input bits")
            for w, b in zip(ws, bits):
                val[w] = int(b) & 1
        for g in self.gates:
            xs = [val[w] for w in g.inputs]
            if g.kind == "AND":
                val[g.output] = xs[0] & xs[1]
            elif g.kind == "NOT":
                val[g.output] = 1 - xs[0]
            else:
                val[g.output] = int(np.bitwise_xor.reduce(xs))
        return [val[w] for w in self.outputs]

    def fanout(self) -> dict[int, int]:
        uses: dict[int, int] = {}
        for g in self.gates:
            for w in g.inputs:
                uses[w] = uses.get(w, 0) + 1
        return uses

    def levels(self, count=("AND", "XOR")) -> dict[int, int]:
        """Per-wire depth counting only gate kinds listed in ``count``."""
        lvl = {w: 0 for w in self.input_wires}
        for g in self.gates:
            base = max((lvl[w] for w in g.inputs), default=0)
            lvl[g.output] = base + (1 if g.kind in count else 0)
        return lvl

    def depth(self, count=("AND", "XOR")) -> int:
        """Longest path counting AND and XOR layers; NOT is a free local flip."""
        if not self.gates:
            return 0
        lvl = self.levels(count)
        return max(lvl[g.output] for g in self.gates)

    @property
    def and_depth(self) -> int:
        return self.depth(count=("AND",))


class CircuitBuilder:
    """Incremental BoolCircuit construction with automatic wire numbering."""

    def __init__(self):
        self.num_wires = 0
        self.inputs: dict[int, list[int]] = {}
        self.gates: list[BoolGate] = []

    def input(self, party: int) -> int:
        w = self.num_wires
        self.num_wires += 1
        self.inputs.setdefault(int(party), []).append(w)
        return w

    def _gate(self, kind: str, ins) -> int:
        w = self.num_wires
        self.num_wires += 1
        self.gates.append(BoolGate(kind, tuple(ins), w))
        return w

    def xor(self, *ins) -> int:
        return self._gate("XOR", ins)

    def and_(self, x: int, y: int) -> int:
        return self._gate("AND", (x, y))

    def not_(self, x: int) -> int:
        return self._gate("NOT", (x,))

    def build(self, outputs, outputs_last: bool = False) -> BoolCircuit:
        circ = BoolCircuit(self.num_wires, self.inputs, self.gates, list(outputs))
        return renumber_outputs_last(circ) if outputs_last else circ


def renumber_outputs_last(circ: BoolCircuit) -> BoolCircuit:
    """Relabel wires so inputs come first and the outputs are the last l ids."""
    outs = list(circ.outputs)
    if len(set(outs)) != len(outs):
        raise CircuitError("output wires must be distinct")
    inputs = set(circ.input_wires)
    if inputs & set(outs):
        raise CircuitError("an output wire cannot be an input wire")
    order = circ.input_wires
    order += [g.output for g in circ.gates if g.output not in outs]
    order += outs
    remap = {old: new for new, old in enumerate(order)}
    return BoolCircuit(
        len(order),
        {p: [remap[w] for w in ws] for p, ws in circ.inputs.items()},
        [BoolGate(g.kind, tuple(remap[w] for w in g.inputs), remap[g.output]) for g in circ.gates],
        [remap[w] for w in outs],
    )


# ------------------------------------------------------------------ JSON IO


def circuit_to_dict(circ) -> dict:
    if isinstance(circ, QuantumCircuit):
        return {
            "kind": "quantum",
            "qubits": circ.num_qubits,
            "inputs": {str(p): ws for p, ws in (circ.inputs or {}).items()},
            "gates": [
                {"id": i, "kind": g.kind, "targets": list(g.targets)}
                for i, g in enumerate(circ.gates)
            ],
            "outputs": list(circ.outputs),
        }
    if isinstance(circ, BoolCircuit):
        return {
            "kind": "boolean",
            "wires": circ.num_wires,
            "inputs": {str(p): ws for p, ws in circ.inputs.items()},
            "gates": [
                {"id": i, "kind": g.kind, "targets": [*g.inputs, g.output]}
                for i, g in enumerate(circ.gates)
            ],
            "outputs": list(circ.outputs),
        }
    raise TypeError(f"not a circuit: {type(circ).__name__}")


def circuit_from_dict(data: dict):
    kind = data.get("kind")
    gates = sorted(data["gates"], key=lambda g: g["id"])
    inputs = {int(p): list(ws) for p, ws in data.get("inputs", {}).items()}
    if kind == "quantum":
        return QuantumCircuit(
            int(data["qubits"]),
            [QGate(g["kind"], g["targets"]) for g in gates],
            inputs or None,
            data.get("outputs"),
        )
    if kind == "boolean":
        return BoolCircuit(
            int(data["wires"]),
            inputs,
            [BoolGate(g["kind"], g["targets"][:-1], g["targets"][-1]) for g in gates],
            data["outputs"],
        )
    raise CircuitError(f"unknown circuit kind {kind!r}")


def dumps(circ) -> str:
    return json.dumps(circuit_to_dict(circ), indent=2)


def loads(text: str):
    return circuit_from_dict(json.loads(text))


def load(path) -> object:
    return loads(Path(path).read_text())


def save(circ, path) -> None:
    Path(path).write_text(dumps(circ))


# ---------------------------------------------------------------- generators


def random_quantum_circuit(
    num_qubits: int,
    num_gates: int,
    rng: np.random.Generator,
    min_t: int = 0,
    clifford_only: bool = False,
) -> QuantumCircuit:
    kinds = ["X", "Z", "H", "P"] + ([] if clifford_only else ["T"])
    if num_qubits >= 2:
        kinds.append("CNOT")
    gates = []
    for _ in range(num_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "CNOT":
            c, t = rng.choice(num_qubits, size=2, replace=False)
            gates.append(QGate("CNOT", (int(c), int(t))))
        else:
            gates.append(QGate(kind, (int(rng.integers(num_qubits)),)))
    if not clifford_only:
        singles = [i for i, g in enumerate(gates) if g.kind != "CNOT"]
        need = max(0, min_t - sum(g.kind == "T" for g in gates))
        for i in rng.permutation([i for i in singles if gates[i].kind != "T"])[:need]:
            gates[i] = QGate("T", gates[i].targets)
    return QuantumCircuit(num_qubits, gates)


def quantum_corpus(
    count: int = 30, seed: int = 2024, clifford_only: bool = False
) -> list[QuantumCircuit]:
    """Deterministic corpus: <= 4 qubits, <= 8 gates, >= 2 T gates unless Clifford."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        nq = 1 + i % 4
        ng = 2 + int(rng.integers(7))
        out.append(
            random_quantum_circuit(
                nq, ng, rng, min_t=0 if clifford_only else 2, clifford_only=clifford_only
            )
        )
    return out


def depth_sweep_circuit(depth: int, num_qubits: int = 2, clifford_only: bool = False) -> QuantumCircuit:
    """A circuit of exactly ``depth`` layers; gate count grows with depth."""
    pattern = ["CNOT", "H", "T", "P"] if not clifford_only else ["CNOT", "H", "P", "X"]
    gates = []
    for layer in range(depth):
        kind = pattern[layer % len(pattern)]
        if kind == "CNOT" and num_qubits >= 2:
            gates.append(QGate("CNOT", (0, 1)))
            for q in range(2, num_qubits):
                gates.append(QGate("H", (q,)))
        else:
            kind = "H" if kind == "CNOT" else kind
            for q in range(num_qubits):
                gates.append(QGate(kind, (q,)))
    return QuantumCircuit(num_qubits, gates)


def and_chain_circuit(and_depth: int, extra_xors: int = 0) -> BoolCircuit:
    """Two-party chain of ``and_depth`` sequential ANDs (negative control for GMW)."""
    b = CircuitBuilder()
    acc = b.input(0)
    for i in range(and_depth):
        acc = b.and_(acc, b.input(1 if i % 2 == 0 else 0))
    for _ in range(extra_xors):
        acc = b.xor(acc, b.input(1))
    return b.build([acc])


def random_bool_circuit(
    n_parties: int,
    num_gates: int,
    rng: np.random.Generator,
    max_inputs: int = 8,
    fanout_one: bool = True,
) -> BoolCircuit:
    """Random 2-input AND/XOR + NOT circuit with outputs numbered last.

    With ``fanout_one`` every wire feeds at most one gate; fresh input wires
    are created when the pool of unused wires runs dry.
    """
    b = CircuitBuilder()
    pool: list[int] = []
    n_inputs = 0

    def fresh() -> int:
        nonlocal n_inputs
        n_inputs += 1
        return b.input(int(rng.integers(n_parties)))

    for _ in range(min(2, max_inputs)):
        pool.append(fresh())
    produced: list[int] = []
    for _ in range(num_gates):
        kind = ["AND", "XOR", "NOT"][rng.choice(3, p=[0.45, 0.4, 0.15])]
        arity = 1 if kind == "NOT" else 2
        while len(pool) < arity and n_inputs < max_inputs:
            pool.append(fresh())
        if len(pool) < arity:
            if not pool:
                break
            kind, arity = "NOT", 1
        picks = [pool.pop(int(rng.integers(len(pool)))) for _ in range(arity)]
        if not fanout_one:
            pool.extend(picks)
        if kind == "AND":
            w = b.and_(*picks)
        elif kind == "XOR":
            w = b.xor(*picks)
        else:
            w = b.not_(*picks)
        pool.append(w)
        produced.append(w)
    outs = [w for w in pool if w in set(produced)]
    if not outs:
        outs = [produced[-1]]
    return b.build(outs, outputs_last=True)


def bool_corpus(count: int = 20, seed: int = 7) -> list[BoolCircuit]:
    """Deterministic fan-out-one boolean circuits with at most 8 input bits."""
    rng = np.random.default_rng(seed)
    out = []
    for b_kind in ("AND", "XOR"):
        b = CircuitBuilder()
        x, y = b.input(0), b.input(1)
        out.append(b.build([b.and_(x, y) if b_kind == "AND" else b.xor(x, y)], outputs_last=True))
    out.append(renumber_outputs_last(and_chain_circuit(3)))
    while len(out) < count:
        n = 2 + int(rng.integers(2))
        out.append(random_bool_circuit(n, 2 + int(rng.integers(9)), rng, max_inputs=8))
    return out


def merge_circuits(*circs: BoolCircuit) -> tuple[BoolCircuit, list[dict[int, int]]]:
    """Place circuits side by side; returns the union and per-circuit wire maps.

    Each party's input list is the concatenation of its inputs in argument
    order, so input vectors can simply be concatenated too.
    """
    offset = 0
    inputs: dict[int, list[int]] = {}
    gates: list[BoolGate] = []
    outputs: list[int] = []
    maps = []
    for c in circs:
        m = {w: w + offset for w in range(c.num_wires)}
        for p in sorted(c.inputs):
            inputs.setdefault(p, []).extend(m[w] for w in c.inputs[p])
        gates += [BoolGate(g.kind, tuple(m[w] for w in g.inputs), m[g.output]) for g in c.gates]
        outputs += [m[w] for w in c.outputs]
        maps.append(m)
        offset += c.num_wires
    return BoolCircuit(offset, inputs, gates, outputs), maps
