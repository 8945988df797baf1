"""Decomposable quantum random encoding by gate teleportation.

Every gate becomes a gadget.  Each of its input qubits arrives through an EPR
pair teleported from the previous gadget (or from the virtual input gadget
G_0), picks up a twirl ``Z^s`` and optional flip Paulis, has the gate applied
and is then hidden by a PX randomizer R.  The decoder undoes each gadget with
``E = C R^dagger`` where C = (P^dagger)^p removes the pending phase left by a
T gate, and finally applies the Pauli correction ``X^a_fin Z^b_fin``.

All Pauli frame bits are XOR-linear in the random variables (input keys,
teleport outcomes, flips, twirls).  :func:`frame_functionals` tracks them
symbolically so the same description serves the standalone decoder and the
protocols, which compute the decode tables jointly.

The simulator materializes the encoding lazily: encoder and decoder steps
of a gadget are applied back to back on one register, with teleport outcomes
drawn up front and enforced by postselection (outcomes are uniform, so this
is distributionally exact).  This keeps the register at n + 2 qubits instead of
one qubit per EPR half.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qsim
from .circuits import CircuitError, QuantumCircuit
from .pauliframe import (
    PauliMask,
    PXElement,
    conjugate_through_clifford,
    conjugate_through_T,
    correction_element,
    px_elements,
    px_matrix,
    remove_pending_p,
)
from .qsim import StateVector

IDENTITY_KIND = "ID"
G0 = 0


class MissingLabelError(KeyError):
    """A gadget needs a correction label that its input wires do not carry."""


# ---------------------------------------------------------------- program


@dataclass(frozen=True)
class Teleport:
    """One EPR connection carrying ``qubit`` from gadget ``src`` to ``dst``."""

    id: int
    qubit: int
    src: int
    dst: int | None  # None: the circuit output


@dataclass(frozen=True)
class Gadget:
    index: int
    kind: str
    qubits: tuple[int, ...]
    inputs: tuple[int, ...] = ()  # teleport ids, aligned with ``qubits``


@dataclass
class DqreProgram:
    num_qubits: int
    gadgets: list[Gadget]
    teleports: list[Teleport]
    outputs: list[int]  # teleport id per qubit

    @property
    def num_epr(self) -> int:
        return len(self.teleports)

    @property
    def internal_epr(self) -> int:
        return sum(1 for t in self.teleports if t.dst is not None)

    @property
    def depth(self) -> int:
        """Encoding depth in gadget layers: all gadgets are prepared at once."""
        return 1

    def gadget_qubits(self) -> list[tuple[int, int]]:
        return [(g.index, q) for g in self.gadgets for q in g.qubits]

    def t_slots(self) -> list[tuple[int, int]]:
        return [(g.index, g.qubits[0]) for g in self.gadgets if g.kind == "T"]

    def topology(self) -> "Topology":
        return Topology(self.num_qubits, [(len(g.qubits), g.qubits) for g in self.gadgets[1:]])


@dataclass(frozen=True)
class Topology:
    """Wiring of a program with gate identities erased."""

    num_qubits: int
    slots: list[tuple[int, tuple[int, ...]]]


def compile(circuit: QuantumCircuit) -> DqreProgram:  # noqa: A001 - mirrors the operation name
    """One EPR pair per gate-to-gate connection plus one per output wire."""
    n = circuit.num_qubits
    gadgets = [Gadget(G0, "G0", tuple(range(n)))]
    teleports: list[Teleport] = []
    last = [G0] * n
    for kind, targets in circuit.pairs():
        if len(set(targets)) != len(targets):
            raise CircuitError(f"gate {kind} reuses a qubit: {targets}")
        gi = len(gadgets)
        ins = []
        for q in targets:
            t = Teleport(len(teleports), q, last[q], gi)
            teleports.append(t)
            ins.append(t.id)
            last[q] = gi
        gadgets.append(Gadget(gi, kind, tuple(targets), tuple(ins)))
    outputs = []
    for q in range(n):
        t = Teleport(len(teleports), q, last[q], None)
        teleports.append(t)
        outputs.append(t.id)
    return DqreProgram(n, gadgets, teleports, outputs)


def program_from_topology(topology: Topology) -> DqreProgram:
    gates = [(IDENTITY_KIND, targets) for _, targets in topology.slots]
    n = topology.num_qubits
    gadgets = [Gadget(G0, "G0", tuple(range(n)))]
    teleports: list[Teleport] = []
    last = [G0] * n
    for kind, targets in gates:
        gi = len(gadgets)
        ins = []
        for q in targets:
            teleports.append(Teleport(len(teleports), q, last[q], gi))
            ins.append(len(teleports) - 1)
            last[q] = gi
        gadgets.append(Gadget(gi, kind, tuple(targets), tuple(ins)))
    outputs = []
    for q in range(n):
        teleports.append(Teleport(len(teleports), q, last[q], None))
        outputs.append(len(teleports) - 1)
    return DqreProgram(n, gadgets, teleports, outputs)


# ------------------------------------------------------ symbolic frames

Lin = frozenset  # XOR of the named random variables


def _push_linear(kind: str, targets, frame: dict[int, list[Lin]]) -> None:
    """Push a symbolic frame through a Clifford gate, using the numeric rule
    on unit vectors so that there is a single source of truth."""
    targets = list(targets)
    m = len(targets)
    size = max(targets) + 1
    images = []
    for bit in range(2 * m):
        mask = PauliMask.zeros(size)
        q = targets[bit // 2]
        if bit % 2 == 0:
            mask.a[q] = 1
        else:
            mask.b[q] = 1
        out = conjugate_through_clifford(kind, targets, mask)
        images.append([(int(out.a[t]), int(out.b[t])) for t in targets])
    old = [frame[q][i] for q in targets for i in (0, 1)]
    new = [[Lin(), Lin()] for _ in targets]
    for bit, image in enumerate(images):
        for j, (ia, ib) in enumerate(image):
            if ia:
                new[j][0] = new[j][0] ^ old[bit]
            if ib:
                new[j][1] = new[j][1] ^ old[bit]
    for j, q in enumerate(targets):
        frame[q] = new[j]


def _push_T(frame: dict[int, list[Lin]], q: int) -> Lin:
    """Push through T followed by the (P^dagger)^p correction; returns p."""
    old = frame[q]
    new = [Lin(), Lin()]
    p = Lin()
    for bit in (0, 1):
        a1, b1, p1 = conjugate_through_T(1 - bit, bit)
        a2, b2 = remove_pending_p(a1, b1, p1)
        if a2:
            new[0] = new[0] ^ old[bit]
        if b2:
            new[1] = new[1] ^ old[bit]
        if p1:
            p = p ^ old[bit]
    frame[q] = new
    return p


@dataclass
class FrameFunctionals:
    """p bit per T slot and the final (a, b) per output qubit, as XOR sets."""

    p: dict[tuple[int, int], Lin]
    final: list[tuple[Lin, Lin]]


def frame_functionals(program: DqreProgram) -> FrameFunctionals:
    """Variables: ("key", q, i), ("out", t, i), ("flip", t, i), ("twirl", t)."""
    frame = {q: [Lin({("key", q, 0)}), Lin({("key", q, 1)})] for q in range(program.num_qubits)}
    p_of: dict[tuple[int, int], Lin] = {}
    for g in program.gadgets[1:]:
        for q, t in zip(g.qubits, g.inputs):
            frame[q][0] = frame[q][0] ^ {("out", t, 0), ("flip", t, 0)}
            frame[q][1] = frame[q][1] ^ {("out", t, 1), ("flip", t, 1), ("twirl", t)}
        if g.kind == "T":
            (q,) = g.qubits
            p_of[(g.index, q)] = _push_T(frame, q)
        elif g.kind != IDENTITY_KIND:
            _push_linear(g.kind, g.qubits, frame)
    final = []
    for q, t in enumerate(program.outputs):
        final.append(
            (frame[q][0] ^ {("out", t, 0)}, frame[q][1] ^ {("out", t, 1)})
        )
    return FrameFunctionals(p_of, final)


def evaluate_lin(lin: Lin, values: dict) -> int:
    bit = 0
    for var in lin:
        bit ^= int(values.get(var, 0))
    return bit & 1


def decode_element(p: int, randomizer: PXElement) -> PXElement:
    """E = C R^dagger with C = (P^dagger)^p."""
    return correction_element(p, randomizer)


# ------------------------------------------------------------ randomness


@dataclass
class EncodingRandomness:
    randomizers: dict[tuple[int, int], PXElement]
    outcomes: dict[int, tuple[int, int]]
    twirls: dict[int, int]
    flips: dict[int, tuple[int, int]] = field(default_factory=dict)

    @classmethod
    def sample(cls, program: DqreProgram, rng: np.random.Generator) -> "EncodingRandomness":
        return cls(
            {gq: PXElement.random(rng) for gq in program.gadget_qubits()},
            {t.id: (int(rng.integers(2)), int(rng.integers(2))) for t in program.teleports},
            {t.id: int(rng.integers(2)) for t in program.teleports if t.dst is not None},
        )

    @classmethod
    def trivial(cls, program: DqreProgram, outcomes=None) -> "EncodingRandomness":
        """Identity randomizers, no twirl; outcomes default to (0, 0)."""
        return cls(
            {gq: PXElement() for gq in program.gadget_qubits()},
            dict(outcomes) if outcomes else {t.id: (0, 0) for t in program.teleports},
            {t.id: 0 for t in program.teleports if t.dst is not None},
        )

    def valuation(self, input_frame=None) -> dict:
        vals: dict = {}
        for q, (a, b) in (input_frame or {}).items():
            vals[("key", q, 0)] = a
            vals[("key", q, 1)] = b
        for t, (a, b) in self.outcomes.items():
            vals[("out", t, 0)] = a
            vals[("out", t, 1)] = b
        for t, (f, g) in self.flips.items():
            vals[("flip", t, 0)] = f
            vals[("flip", t, 1)] = g
        for t, s in self.twirls.items():
            vals[("twirl", t)] = s
        return vals


# ------------------------------------------------------------- encoding


@dataclass
class AffineBit:
    """XOR of carried labels plus a constant folded in by the encoder."""

    labels: frozenset  # of (teleport id, component)
    const: int


@dataclass
class EncodedState:
    program: DqreProgram
    register: StateVector  # inputs before the G_0 randomizer
    randomness: EncodingRandomness  # encoder-side data, materialized lazily
    labels: dict[int, tuple[int, int]]  # teleport id -> correction label (a, b)
    carried: dict[int, list[int]]  # gadget / ("out", q) -> label ids on its wires
    tables: dict[tuple[int, int], tuple[PXElement, PXElement]]  # E for p = 0, 1
    p_bits: dict[tuple[int, int], AffineBit]
    final_bits: list[tuple[AffineBit, AffineBit]]
    input_frame: dict[int, tuple[int, int]] = field(default_factory=dict)

    def label_count(self) -> int:
        return sum(len(v) for v in self.carried.values())


def _carried_labels(program: DqreProgram) -> dict:
    """Append-only label lists: each wire forwards everything upstream of it."""
    carried: dict = {G0: []}
    for g in program.gadgets[1:]:
        lst: list[int] = []
        for t in g.inputs:
            src = program.teleports[t].src
            for lab in carried[src] + [t]:
                if lab not in lst:
                    lst.append(lab)
        carried[g.index] = lst
    for q, t in enumerate(program.outputs):
        src = program.teleports[t].src
        carried[("out", q)] = carried[src] + [t]
    return carried


def _split(lin: Lin, values: dict) -> AffineBit:
    labels = frozenset((v[1], v[2]) for v in lin if v[0] == "out")
    const = evaluate_lin(Lin(v for v in lin if v[0] != "out"), values)
    return AffineBit(labels, const)


def encode(
    program: DqreProgram,
    state: StateVector,
    rng: np.random.Generator,
    randomness: EncodingRandomness | None = None,
    input_frame: dict[int, tuple[int, int]] | None = None,
) -> EncodedState:
    """Encode ``state``; ``input_frame`` declares a Pauli mask already on it."""
    if state.num_qubits != program.num_qubits:
        raise qsim.QuantumError(
            f"input has {state.num_qubits} qubits, program expects {program.num_qubits}"
        )
    rnd = randomness or EncodingRandomness.sample(program, rng)
    frame_in = dict(input_frame or {})
    values = rnd.valuation(frame_in)
    funcs = frame_functionals(program)
    tables = {}
    for gq, r in rnd.randomizers.items():
        tables[gq] = (decode_element(0, r), decode_element(1, r))
    p_bits = {gq: _split(lin, values) for gq, lin in funcs.p.items()}
    final_bits = [(_split(a, values), _split(b, values)) for a, b in funcs.final]
    return EncodedState(
        program,
        state,
        rnd,
        dict(rnd.outcomes),
        _carried_labels(program),
        tables,
        p_bits,
        final_bits,
        frame_in,
    )


def _resolve(bit: AffineBit, labels: dict, available: list[int], where) -> int:
    have = set(available)
    out = bit.const
    for t, comp in bit.labels:
        if t not in have or t not in labels:
            raise MissingLabelError(f"{where} needs the label of teleport {t}")
        out ^= int(labels[t][comp])
    return out & 1


def decode_tables(encoded: EncodedState) -> tuple[dict, list[tuple[int, int]]]:
    """Resolve the classical decode description against the carried labels."""
    e = {}
    for gq, (e0, e1) in encoded.tables.items():
        if gq in encoded.p_bits:
            p = _resolve(encoded.p_bits[gq], encoded.labels, encoded.carried[gq[0]], f"gadget {gq[0]}")
            e[gq] = e1 if p else e0
        else:
            e[gq] = e0
    final = []
    for q, (fa, fb) in enumerate(encoded.final_bits):
        avail = encoded.carried[("out", q)]
        final.append(
            (
                _resolve(fa, encoded.labels, avail, f"output {q}"),
                _resolve(fb, encoded.labels, avail, f"output {q}"),
            )
        )
    return e, final


def _teleport_in_place(state: StateVector, q: int, outcome, rng) -> StateVector:
    n = state.num_qubits
    state = qsim.tensor(state, qsim.make_epr())
    state, _, _ = qsim.teleport(state, q, (n, n + 1), rng, forced=outcome)
    state = qsim.drop_qubits(state, [q, n])
    return qsim.move_qubit(state, n - 1, q)


@dataclass
class Trace:
    """Optional capture of masked wire states during materialization."""

    masked: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    pre_randomizer: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)


def apply_decode(
    encoded: EncodedState,
    e_tables: dict[tuple[int, int], PXElement],
    final: list[tuple[int, int]],
    rng: np.random.Generator | None = None,
    trace: Trace | None = None,
) -> StateVector:
    """Materialize the encoding and run the sequential decoder."""
    rng = rng or np.random.default_rng(0)
    prog = encoded.program
    rnd = encoded.randomness
    state = encoded.register

    def randomize_and_decode(gi: int, q: int) -> None:
        nonlocal state
        if trace is not None:
            trace.pre_randomizer[(gi, q)] = qsim.reduced_density_matrix(state, [q])
        state = qsim.apply_matrix(state, px_matrix(rnd.randomizers[(gi, q)]), [q])
        if trace is not None:
            trace.masked[(gi, q)] = qsim.reduced_density_matrix(state, [q])
        state = qsim.apply_matrix(state, px_matrix(e_tables[(gi, q)]), [q])

    for q in range(prog.num_qubits):
        randomize_and_decode(G0, q)
    for g in prog.gadgets[1:]:
        for q, t in zip(g.qubits, g.inputs):
            state = _teleport_in_place(state, q, rnd.outcomes[t], rng)
            f, z = rnd.flips.get(t, (0, 0))
            state = qsim.apply_pauli(state, q, f, z ^ rnd.twirls.get(t, 0))
        if g.kind != IDENTITY_KIND:
            state = qsim.apply_gate(state, g.kind, list(g.qubits))
        for q in g.qubits:
            randomize_and_decode(g.index, q)
    for q, t in enumerate(prog.outputs):
        state = _teleport_in_place(state, q, rnd.outcomes[t], rng)
    for q, (a, b) in enumerate(final):
        state = qsim.apply_pauli(state, q, a, b)
    return state


def decode(encoded: EncodedState, rng: np.random.Generator | None = None) -> StateVector:
    e, final = decode_tables(encoded)
    return apply_decode(encoded, e, final, rng)


def tamper_label(encoded: EncodedState, teleport_id: int, component: int = 0) -> EncodedState:
    labels = dict(encoded.labels)
    a, b = labels[teleport_id]
    labels[teleport_id] = (a ^ (component == 0), b ^ (component == 1))
    return EncodedState(**{**encoded.__dict__, "labels": labels})


def simulate_encoding(
    output_state: StateVector, topology: Topology, rng: np.random.Generator
) -> EncodedState:
    """Encoding built from F(x) and the wiring alone: every gadget is an identity."""
    return encode(program_from_topology(topology), output_state, rng)


def encode_op_counts(program: DqreProgram) -> dict[tuple, int]:
    """Quantum operations the encoder applies to each physical qubit.

    Input qubits: randomizer, then Bell measurement as a teleport source
    (CNOT, H, measure).  First EPR halves: preparation, CNOT, measure.
    Second halves into a gate: preparation, flip, twirl, gate, randomizer,
    then their own Bell measurement.  Output halves: preparation only.
    """
    counts: dict[tuple, int] = {("in", q): 1 + 3 for q in range(program.num_qubits)}
    for t in program.teleports:
        counts[("epr", t.id, 0)] = 3
        counts[("epr", t.id, 1)] = 1 if t.dst is None else 5 + 3
    return counts


def masked_marginal_average(
    program: DqreProgram, state: StateVector, draws: int, rng: np.random.Generator
) -> dict[tuple[int, int], np.ndarray]:
    """Per-wire masked density matrices averaged over fresh randomness.

    Each draw samples outcomes, twirls and flips, and averages exactly over
    the 32 randomizers of every wire; the result is the mean over draws.
    """
    group = [px_matrix(e) for e in px_elements()]
    acc: dict[tuple[int, int], np.ndarray] = {}
    for _ in range(draws):
        enc = encode(program, state, rng)
        e, final = decode_tables(enc)
        tr = Trace()
        apply_decode(enc, e, final, rng, trace=tr)
        for gq, rho in tr.pre_randomizer.items():
            twirled = sum(m @ rho @ m.conj().T for m in group) / len(group)
            acc[gq] = acc.get(gq, 0) + twirled
    return {gq: v / draws for gq, v in acc.items()}


__all__ = [
    "DqreProgram",
    "EncodedState",
    "EncodingRandomness",
    "Gadget",
    "MissingLabelError",
    "Teleport",
    "Topology",
    "apply_decode",
    "compile",
    "decode",
    "decode_tables",
    "encode",
    "encode_op_counts",
    "frame_functionals",
    "masked_marginal_average",
    "simulate_encoding",
    "tamper_label",
]
