"""Two-party and multi-party quantum computation in a constant number of rounds.

All protocols run over :class:`~mpqc.network.Network`.  Classical data
(OT keys and ciphertexts, GMW shares, garbled tables) travels as bytes and is
what the transcript records.  Quantum registers are handed over in-process;
each hand-over is announced by a ``"quantum"`` message so that it occupies a
round in the transcript just as a physical transmission would.

Party 0 is Alice in the two-party protocol
and the holder of the quantum registers in the multi-party protocols.  The
inner quantum engine of the multi-party protocol (the part that combines the
parties' randomizer, twirl and flip shares on the registers) is simulated in
process; its classical side is a real GMW run whose depth does not depend on
the circuit being evaluated.
"""

from __future__ import annotations

import functools
import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from . import bmr, dqre, qsim
from .bmr import Emitter, Wire
from .circuits import BoolCircuit, CircuitBuilder, CircuitError, QuantumCircuit, merge_circuits
from .crypto import OTRequest, ot_batch
from .gmw import evaluate_shared, open_shares
from .network import Network, Transcript, pack, unpack
from .pauliframe import NonCliffordError, PauliMask, PXElement, defer_pauli
from .qsim import StateVector

ALICE, BOB = 0, 1
HOLDER = 0
DEFAULT_K = 4


class ProtocolError(RuntimeError):
    pass


@dataclass
class PartyState:
    """Private data of one party; other parties only see what it sends."""

    pid: int
    role: str
    inputs: StateVector
    qubits: list[int]
    rng: np.random.Generator
    key: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class ProtocolResult:
    outputs: list[StateVector]
    transcript: Transcript

    @property
    def rounds(self) -> int:
        return self.transcript.num_rounds


def _rngs(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _announce(net: Network, sender: int, receiver: int, what: str, num_qubits: int) -> None:
    net.send(sender, receiver, pack(what.encode(), struct.pack("<I", num_qubits)), "quantum")


def _parties(inputs: list[StateVector], rngs, roles) -> list[PartyState]:
    out = []
    offset = 0
    for pid, (state, rng, role) in enumerate(zip(inputs, rngs, roles)):
        qs = list(range(offset, offset + state.num_qubits))
        offset += state.num_qubits
        out.append(PartyState(pid, role, state, qs, rng))
    return out


def _digest(signal: np.ndarray) -> str:
    return hashlib.sha256(np.packbits(signal, bitorder="little").tobytes()).hexdigest()[:16]


# ------------------------------------------------------- decode tables


class _IntOps:
    """Plain-bit counterpart of :class:`Emitter` for evaluating formulas."""

    @staticmethod
    def xor(*vals):
        return int(np.bitwise_xor.reduce([int(v) for v in vals])) & 1

    @staticmethod
    def and_(x, y):
        return int(x) & int(y)

    @staticmethod
    def not_(x):
        return 1 - int(x)


def e_table_formula(ops, a, b0, b1, c0, c1, p):
    """Bits (a, b0, b1, c0, c1) of E = (P^dagger)^p R^dagger for R = (a, b, c).

    Written with only XOR, AND and NOT so the same expression can be
    evaluated on bits or emitted as a GMW circuit of AND-depth 2.
    """
    m0 = ops.xor(b0, p)
    m1 = ops.xor(b1, ops.and_(b0, p))
    e_b1 = ops.xor(m1, ops.and_(ops.not_(a), m0))
    t0 = ops.and_(a, m0)
    t1 = ops.and_(a, m1)
    s0 = ops.xor(c0, t0)
    s1 = ops.xor(c1, t1, ops.and_(c0, t0))
    return a, m0, e_b1, s0, ops.xor(s1, s0)


def e_table_bits(randomizer: PXElement, p: int) -> tuple[int, ...]:
    return tuple(int(v) for v in e_table_formula(_IntOps, *randomizer.bits(), p))


# ------------------------------------------------------- two-party


def _xor_tree(spec: list[tuple[list, int]]) -> tuple[BoolCircuit, list]:
    """Fan-out-one circuit whose outputs are XORs of fresh input copies plus constants."""
    b = CircuitBuilder()
    leaves: list = []
    outs = []
    for variables, const in spec:
        wires = []
        for var in variables:
            wires.append(b.input(ALICE))
            leaves.append(var)
        acc = wires[0]
        for w in wires[1:]:
            acc = b.xor(acc, w)
        if len(wires) == 1:
            acc = b.not_(acc)
            const ^= 1
        if const:
            acc = b.not_(acc)
        outs.append(acc)
    return b.build(outs, outputs_last=True), leaves


def _split_private(lin, values: dict, private) -> tuple[list, int]:
    mine = sorted(v for v in lin if private(v))
    rest = frozenset(v for v in lin if not private(v))
    return mine, dqre.evaluate_lin(rest, values)


def run_two_party(
    F: QuantumCircuit, x: StateVector, y: StateVector, seed: int = 0, k: int = DEFAULT_K
) -> ProtocolResult:
    """Alice (party 0) holds ``x`` on the low qubits, Bob (party 1) holds ``y``.

    Rounds: encrypted input to Bob; encoding, garbled tables and output map
    to Alice; one batched OT layer (two rounds) for Alice's key bits; result
    to Bob.  Five rounds whatever the depth of F.
    """
    nx, ny = x.num_qubits, y.num_qubits
    if F.num_qubits != nx + ny:
        raise CircuitError(f"circuit acts on {F.num_qubits} qubits, inputs have {nx + ny}")
    r_alice, r_bob, r_ot = _rngs(seed, 3)
    alice, bob = _parties([x, y], [r_alice, r_bob], ["alice", "bob"])
    net = Network([ALICE, BOB])

    # 1. Alice one-time pads her qubits and sends them to Bob.
    alice.key = qsim.random_qotp_key(nx, alice.rng)
    enc_x = qsim.qotp_encrypt(alice.inputs, alice.key)
    _announce(net, ALICE, BOB, "encrypted-input", nx)
    net.route_round()

    # 2. Bob encodes F on Enc(x) (x) y and garbles the key-dependent tables.
    program = dqre.compile(F)
    rnd = dqre.EncodingRandomness.sample(program, bob.rng)
    encoded = dqre.encode(program, qsim.tensor(enc_x, bob.inputs), bob.rng, randomness=rnd)
    funcs = dqre.frame_functionals(program)
    values = rnd.valuation()
    is_alice = lambda v: v[0] == "key" and v[1] < nx  # noqa: E731
    clear: list[list] = []
    spec: list[tuple[list, int]] = []
    spec_keys: list[list] = []
    for (g, q), r in rnd.randomizers.items():
        lin = funcs.p.get((g, q), frozenset())
        mine, pconst = _split_private(lin, values, is_alice)
        e0, e1 = e_table_bits(r, 0), e_table_bits(r, 1)
        for i in range(5):
            if not mine:
                clear.append(["E", g, q, i, (e1 if pconst else e0)[i]])
            elif e0[i] == e1[i]:
                clear.append(["E", g, q, i, e0[i]])
            else:
                spec.append((mine, pconst ^ e0[i]))
                spec_keys.append(["E", g, q, i])
    for q, pair in enumerate(funcs.final):
        for i, lin in enumerate(pair):
            mine, const = _split_private(lin, values, is_alice)
            if mine:
                spec.append((mine, const))
                spec_keys.append(["F", q, i])
            else:
                clear.append(["F", q, i, const])
    if not spec:
        # Keep the message flow fixed: one dummy wire whose OT choice is 0.
        spec.append(([("pad",)], 0))
        spec_keys.append(["pad"])
    circuit, leaf_vars = _xor_tree(spec)
    W, l = circuit.num_wires, len(circuit.outputs)
    rands = [bmr.PartyRandomness.random(W, l, k, bob.rng) for _ in range(2)]
    garbled = bmr.garble_dealer(circuit, rands, {ALICE: [0] * len(leaf_vars)})
    garbled.input_signals = {}
    out_map = {
        str(w): [_digest(bmr.input_signal(rands, circuit, w, v)) for v in (0, 1)]
        for w in circuit.outputs
    }
    public = json.dumps(
        {"clear": clear, "spec": spec_keys, "leaves": [list(v) for v in leaf_vars], "map": out_map}
    ).encode()
    net.send(BOB, ALICE, pack(garbled.to_bytes(), public), "garbled")
    _announce(net, BOB, ALICE, "encoding", encoded.register.num_qubits)
    net.route_round()

    # 3. One OT per garbled input wire, all in one layer.  Bob offers both
    # signals of the wire, Alice selects with her key bit.
    blob, public = unpack(net.receive_one(ALICE, "garbled", BOB))
    meta = json.loads(public)
    bits: dict[tuple, int] = {tuple(e[:-1]): int(e[-1]) for e in meta["clear"]}
    requests = []
    for wire, var in enumerate(meta["leaves"]):
        choice = 0 if var[0] == "pad" else alice.key[var[1]][var[2]]
        pair = np.stack([bmr.input_signal(rands, circuit, wire, v) for v in (0, 1)])
        requests.append(OTRequest(BOB, ALICE, pair, choice))
    got = ot_batch(net, requests, r_ot)
    program_a = bmr.GarbledProgram.from_bytes(blob)
    program_a.input_signals = dict(enumerate(got))
    signals = bmr.evaluate_signals(program_a, circuit)
    for key, w in zip(meta["spec"], circuit.outputs):
        digests = meta["map"][str(w)]
        d = _digest(signals[w])
        if d not in digests:
            raise ProtocolError(f"output wire {w} decoded to an unknown label")
        bits[tuple(key)] = digests.index(d)

    # Alice decodes locally.
    e_tables = {
        (g, q): PXElement.from_bits([bits[("E", g, q, i)] for i in range(5)])
        for (g, q) in program.gadget_qubits()
    }
    final = [(bits[("F", q, 0)], bits[("F", q, 1)]) for q in range(F.num_qubits)]
    result = dqre.apply_decode(encoded, e_tables, final, r_ot)

    # 4. Alice returns the result to Bob.
    _announce(net, ALICE, BOB, "result", result.num_qubits)
    net.route_round()
    return ProtocolResult([result, result.copy()], net.transcript)


# ------------------------------------------------------- multi-party


def _xor_chain_circuit(num_bits: int, n: int) -> BoolCircuit:
    """Output i is the XOR of one input bit from each of the n parties."""
    b = CircuitBuilder()
    outs = []
    for _ in range(num_bits):
        acc = b.input(0)
        for j in range(1, n):
            acc = b.xor(acc, b.input(j))
        outs.append(acc)
    return b.build(outs, outputs_last=True)


@functools.lru_cache(maxsize=64)
def _final_garbling(num_bits: int, n: int, k: int):
    """The final-correction circuit and its garbling circuits (pure in their arguments)."""
    circ = _xor_chain_circuit(num_bits, n)
    return circ, bmr.build_garbling_circuits(circ, n, k)


def _e_table_circuit(slots, t_slots: set, n: int):
    """GMW circuit for every decode element from XOR-shared randomizers and p."""
    em = Emitter()
    outs = []
    for i, slot in enumerate(slots):
        r = [em.xor(*[Wire(em.inp(j, ("R", i, c))) for j in range(n)]) for c in range(5)]
        p = em.xor(*[Wire(em.inp(j, ("p", i))) for j in range(n)]) if slot in t_slots else 0
        outs.extend(e_table_formula(em, *r, p))
    if any(not isinstance(o, Wire) for o in outs):
        raise CircuitError("decode element folded to a constant")
    return em.b.build([int(o) for o in outs]), em.key_of


def run_multi_party(
    F: QuantumCircuit,
    inputs: list[StateVector],
    n: int | None = None,
    seed: int = 0,
    k: int = DEFAULT_K,
) -> ProtocolResult:
    """n parties, party j holding ``inputs[j]``; eight rounds for every F.

    Rounds: masked inputs (one copy to every other party); GMW input
    sharing; two OT layers of two rounds each; opening of the decode tables
    and garbled final-correction program; the holder's result to all.
    """
    n = len(inputs) if n is None else n
    if n < 2 or len(inputs) != n:
        raise ValueError("need one input register per party and n >= 2")
    total = sum(s.num_qubits for s in inputs)
    if F.num_qubits != total:
        raise CircuitError(f"circuit acts on {F.num_qubits} qubits, inputs have {total}")
    rngs = _rngs(seed, n + 1)
    proto_rng = rngs[n]
    parties = _parties(inputs, rngs[:n], ["holder"] + ["party"] * (n - 1))
    owner = {q: p.pid for p in parties for q in p.qubits}
    net = Network(range(n))

    # 1. QOTP-masked inputs, one copy to every other party.
    masked = []
    for p in parties:
        p.key = qsim.random_qotp_key(p.inputs.num_qubits, p.rng)
        masked.append(qsim.qotp_encrypt(p.inputs, p.key))
        for other in range(n):
            if other != p.pid:
                _announce(net, p.pid, other, "masked-input", p.inputs.num_qubits)
    net.route_round()
    register = qsim.tensor(*masked)

    # Local randomness: randomizer, flip and twirl shares; Bell outcomes at the holder.
    program = dqre.compile(F)
    slots = program.gadget_qubits()
    internal = [t.id for t in program.teleports if t.dst is not None]
    t_index = {t: i for i, t in enumerate(internal)}
    r_sh = [p.rng.integers(0, 2, (len(slots), 5), dtype=np.uint8) for p in parties]
    f_sh = [p.rng.integers(0, 2, (len(internal), 2), dtype=np.uint8) for p in parties]
    s_sh = [p.rng.integers(0, 2, len(internal), dtype=np.uint8) for p in parties]
    holder = parties[HOLDER]
    outcomes = {
        t.id: (int(holder.rng.integers(2)), int(holder.rng.integers(2))) for t in program.teleports
    }

    # Inner quantum engine: combine shares on the registers.
    xor_all = lambda arrs: np.bitwise_xor.reduce(np.stack(arrs), axis=0)  # noqa: E731
    r_tot, f_tot, s_tot = xor_all(r_sh), xor_all(f_sh), xor_all(s_sh)
    rnd = dqre.EncodingRandomness(
        {slot: PXElement.from_bits(r_tot[i]) for i, slot in enumerate(slots)},
        outcomes,
        {t: int(s_tot[i]) for i, t in enumerate(internal)},
        {t: (int(f_tot[i, 0]), int(f_tot[i, 1])) for i, t in enumerate(internal)},
    )
    encoded = dqre.encode(program, register, proto_rng, randomness=rnd)

    # Each party's XOR contribution to every frame functional.
    funcs = dqre.frame_functionals(program)

    def share(j: int, var) -> int:
        kind = var[0]
        if kind == "key":
            q, c = var[1], var[2]
            if owner[q] != j:
                return 0
            p = parties[j]
            return p.key[q - p.qubits[0]][c]
        if kind == "out":
            return outcomes[var[1]][var[2]] if j == HOLDER else 0
        if kind == "flip":
            return int(f_sh[j][t_index[var[1]], var[2]])
        if kind == "twirl":
            return int(s_sh[j][t_index[var[1]]])
        raise ProtocolError(f"unknown frame variable {var}")

    def contribution(j: int, lin) -> int:
        return int(np.bitwise_xor.reduce([share(j, v) for v in lin] or [0]))

    t_slots = set(funcs.p)
    e_circ, e_keys = _e_table_circuit(slots, t_slots, n)
    fin_lins = [lin for pair in funcs.final for lin in pair]
    fin_circ, gc = _final_garbling(len(fin_lins), n, k)
    W, l = fin_circ.num_wires, len(fin_circ.outputs)
    rands = [bmr.PartyRandomness.random(W, l, k, p.rng) for p in parties]
    merged, _ = merge_circuits(e_circ, gc.combined)

    gmw_inputs = {}
    for j in range(n):
        mine = []
        for w in e_circ.inputs.get(j, []):
            _, kind, i, *rest = e_keys[w]
            if kind == "R":
                mine.append(int(r_sh[j][i, rest[0]]))
            else:
                mine.append(contribution(j, funcs.p[slots[i]]))
        fin_in = [contribution(j, lin) for lin in fin_lins]
        mine += bmr.party_inputs(gc, fin_circ, j, rands[j], fin_in)
        gmw_inputs[j] = mine

    # 2. Garbling: one GMW run of constant depth, then one opening round.
    shares = evaluate_shared(merged, gmw_inputs, n, net, proto_rng)
    opened = open_shares(net, [shares[w] for w in merged.outputs], tag="garbled-tables")
    n_e = len(e_circ.outputs)
    e_bits, g_bits = opened[:n_e], opened[n_e:]

    # 3. Local evaluation; the holder decodes the quantum registers.
    garbled = bmr.assemble_program(gc, fin_circ, g_bits)
    fin = bmr.bmr_evaluate(garbled, fin_circ)
    final = [(fin[2 * q], fin[2 * q + 1]) for q in range(F.num_qubits)]
    e_tables = {
        slot: PXElement.from_bits(e_bits[5 * i : 5 * i + 5]) for i, slot in enumerate(slots)
    }
    result = dqre.apply_decode(encoded, e_tables, final, proto_rng)
    for other in range(1, n):
        _announce(net, HOLDER, other, "result", result.num_qubits)
    net.route_round()
    return ProtocolResult([result] + [result.copy() for _ in range(n - 1)], net.transcript)


# --------------------------------------------------- Clifford fast path


@dataclass
class FlipShares:
    """Per-party flip bits ``a[j, w], b[j, w]`` for every wire w."""

    a: np.ndarray
    b: np.ndarray
    intermediate: np.ndarray | None = None  # bool per wire; outputs stay unflipped

    @classmethod
    def random(cls, n: int, num_wires: int, rng, intermediate=None) -> "FlipShares":
        return cls(
            rng.integers(0, 2, (n, num_wires), dtype=np.uint8),
            rng.integers(0, 2, (n, num_wires), dtype=np.uint8),
            None if intermediate is None else np.asarray(intermediate, bool),
        )


def apply_qubit_flipping(masks: PauliMask, flips: FlipShares) -> PauliMask:
    """XOR every party's flip share into the mask of each intermediate wire."""
    a = np.bitwise_xor.reduce(np.asarray(flips.a, np.uint8), axis=0)
    b = np.bitwise_xor.reduce(np.asarray(flips.b, np.uint8), axis=0)
    if a.shape != masks.a.shape:
        raise ValueError("flip shares must cover every wire of the mask")
    if flips.intermediate is not None:
        a = np.where(flips.intermediate, a, 0)
        b = np.where(flips.intermediate, b, 0)
    return PauliMask(masks.a ^ a, masks.b ^ b)


def _layered(F: QuantumCircuit) -> tuple[QuantumCircuit, list[int]]:
    """Gates reordered by layer, plus the gate index where each layer starts."""
    gates, starts = [], []
    for layer in F.layers():
        starts.append(len(gates))
        gates.extend(F.gates[i] for i in layer)
    return QuantumCircuit(F.num_qubits, gates), starts


def run_clifford_fast_path(
    F: QuantumCircuit,
    inputs: list[StateVector],
    n: int | None = None,
    seed: int = 0,
    flipping: bool = True,
) -> ProtocolResult:
    """Masked inputs go to party 0, which evaluates F directly on them.

    Between layers the parties' flip shares are applied to every qubit.  The
    output correction is XOR-linear in keys and flips, so GMW needs only its
    input-sharing round; the shares are then opened to party 0, which
    corrects and sends the result out.  Four rounds.
    """
    if not F.is_clifford:
        raise NonCliffordError("the fast path needs a Clifford-only circuit")
    n = len(inputs) if n is None else n
    if n < 2 or len(inputs) != n:
        raise ValueError("need one input register per party and n >= 2")
    rngs = _rngs(seed, n + 1)
    proto_rng = rngs[n]
    parties = _parties(inputs, rngs[:n], ["holder"] + ["party"] * (n - 1))
    net = Network(range(n))
    nq = F.num_qubits

    masked = []
    for p in parties:
        p.key = qsim.random_qotp_key(p.inputs.num_qubits, p.rng)
        masked.append(qsim.qotp_encrypt(p.inputs, p.key))
        if p.pid != HOLDER:
            _announce(net, p.pid, HOLDER, "masked-input", p.inputs.num_qubits)
    net.route_round()

    layered, starts = _layered(F)
    boundaries = starts[1:]
    # Flip shares for the wires between consecutive layers; party j draws row j.
    flips = [
        FlipShares(np.zeros((n, nq), np.uint8), np.zeros((n, nq), np.uint8)) for _ in boundaries
    ]
    if flipping:
        for j, p in enumerate(parties):
            for fs in flips:
                fs.a[j] = p.rng.integers(0, 2, nq, dtype=np.uint8)
                fs.b[j] = p.rng.integers(0, 2, nq, dtype=np.uint8)

    # Holder evaluates F layer by layer on the masked register.
    state = qsim.tensor(*masked)
    gates = layered.pairs()
    cuts = starts + [len(gates)]
    for li in range(len(starts)):
        if li > 0:
            combined = apply_qubit_flipping(PauliMask.zeros(nq), flips[li - 1])
            for q in range(nq):
                state = qsim.apply_pauli(state, q, int(combined.a[q]), int(combined.b[q]))
        state = qsim.run_circuit(state, gates[cuts[li] : cuts[li + 1]])

    # Each party's contribution to (a_o, b_o) by pushing its own masks through F.
    contribs = []
    for j, p in enumerate(parties):
        masks: list = [None] * (len(gates) + 1)
        m0 = PauliMask.zeros(nq)
        for q, (a, b) in zip(p.qubits, p.key):
            m0.a[q], m0.b[q] = a, b
        masks[0] = m0
        for fs, start in zip(flips, boundaries):
            mine = PauliMask(fs.a[j].copy(), fs.b[j].copy())
            masks[start] = mine if masks[start] is None else masks[start] ^ mine
        frame, _ = defer_pauli(layered, masks)
        contribs.append([int(v) for pair in zip(frame.a, frame.b) for v in pair])

    circ = _xor_chain_circuit(2 * nq, n)
    gmw_inputs = {j: contribs[j] for j in range(n)}
    shares = evaluate_shared(circ, gmw_inputs, n, net, proto_rng)
    ab = open_shares(net, [shares[w] for w in circ.outputs], recipients=[HOLDER], tag="correction")
    for q in range(nq):
        state = qsim.apply_pauli(state, q, ab[2 * q], ab[2 * q + 1])
    for other in range(1, n):
        _announce(net, HOLDER, other, "result", nq)
    net.route_round()
    return ProtocolResult([state] + [state.copy() for _ in range(n - 1)], net.transcript)


# ----------------------------------------------------------- probes


FLIP_DEMO = QuantumCircuit(
    3,
    [("CNOT", (0, 1)), ("X", (2,)), ("CNOT", (1, 2)), ("H", (0,))],
)


def flipping_experiment(
    trials: int, rng: np.random.Generator, flipping: bool = True, n: int = 3
) -> np.ndarray:
    """Reconstruction fidelity of an intermediate wire from a revealed frame.

    The depth-2 Clifford circuit acts on basis inputs, so the wire after the
    first layer (qubit 1) is a basis state, and its orthogonal partner is
    the probe.  An evaluator who learns the frame (a, b) of that wire undoes
    it on the physical state.  With qubit flipping the physical state also
    carries the XOR of n parties' flip shares, which the frame does not.
    """
    first_layer = QuantumCircuit(3, FLIP_DEMO.gates[:2])
    fids = np.empty(trials)
    for t in range(trials):
        bits = rng.integers(0, 2, 3)
        key = qsim.random_qotp_key(3, rng)
        plain = qsim.run_circuit(qsim.basis_state(bits), first_layer.pairs())
        physical = qsim.run_circuit(qsim.qotp_encrypt(qsim.basis_state(bits), key), first_layer.pairs())
        m0 = PauliMask([k[0] for k in key], [k[1] for k in key])
        frame, _ = defer_pauli(first_layer, [m0])
        if flipping:
            fs = FlipShares.random(n, 3, rng)
            combined = apply_qubit_flipping(PauliMask.zeros(3), fs)
            physical = qsim.apply_pauli(physical, 1, int(combined.a[1]), int(combined.b[1]))
        guess = qsim.apply_pauli(physical, 1, int(frame.a[1]), int(frame.b[1]))
        rho = qsim.reduced_density_matrix(guess, [1])
        target = qsim.reduced_density_matrix(plain, [1])
        fids[t] = float(np.real(np.trace(rho @ target)))
    return fids


def collusion_probe(
    trials: int, rng: np.random.Generator, n: int = 3, sabotage: bool = False
) -> np.ndarray:
    """Fidelity of the coalition's best reconstruction of party 0's input.

    Party 0's input is |0> or |1> at random.  Parties 1..n-1 receive its
    masked copy and hold none of its key bits, so their candidate is the
    masked state itself.  With ``sabotage`` the key is fixed to (0, 0).
    """
    fids = np.empty(trials)
    for t in range(trials):
        bit = int(rng.integers(2))
        truth = qsim.basis_state([bit])
        key = [(0, 0)] if sabotage else qsim.random_qotp_key(1, rng)
        candidate = qsim.qotp_encrypt(truth, key)
        fids[t] = qsim.fidelity(candidate, truth)
    return fids
