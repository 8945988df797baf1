"""Constant-round BMR garbling.

Wires are numbered so the circuit inputs come first and the ``l`` output
wires are the last ``l`` ids.  Every party contributes two k-bit seeds per wire
and a mask share per non-output wire; output wires carry a zero mask so the
trailing selector bit of their signal is the plaintext value.

The garbled program can be produced two ways that must agree bit for bit: a
trusted dealer that sees everyone's randomness (:func:`garble_dealer`), or the
joint computation of the label formulas as GMW circuits of constant depth
(:func:`build_garbling_circuits` and :func:`garble_with_gmw`).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .circuits import BoolCircuit, CircuitBuilder, CircuitError, FanOutViolation
from .crypto import prg_expand
from .gmw import evaluate_shared, open_shares
from .network import Network

GATE_FNS = {
    "AND": lambda x, y: x & y,
    "XOR": lambda x, y: x ^ y,
}


# ------------------------------------------------------------ randomness


@dataclass
class PartyRandomness:
    """One party's seeds ``s0[w], s1[w]`` (k bits each) and mask shares ``lam``."""

    seeds0: np.ndarray  # (W, k)
    seeds1: np.ndarray  # (W, k)
    lam: np.ndarray  # (W - l,)

    @property
    def k(self) -> int:
        return self.seeds0.shape[1]

    @classmethod
    def random(cls, num_wires: int, num_outputs: int, k: int, rng) -> "PartyRandomness":
        return cls(
            rng.integers(0, 2, (num_wires, k), dtype=np.uint8),
            rng.integers(0, 2, (num_wires, k), dtype=np.uint8),
            rng.integers(0, 2, num_wires - num_outputs, dtype=np.uint8),
        )

    def to_bits(self) -> np.ndarray:
        """Layout s^1_0 s^1_1 ... s^W_0 s^W_1 lam^1 ... lam^(W-l)."""
        seeds = np.stack([self.seeds0, self.seeds1], axis=1).reshape(-1)
        return np.concatenate([seeds, self.lam]).astype(np.uint8)

    @classmethod
    def from_bits(cls, bits, num_wires: int, num_outputs: int, k: int) -> "PartyRandomness":
        bits = np.asarray(bits, dtype=np.uint8)
        expect = 2 * k * num_wires + num_wires - num_outputs
        if len(bits) != expect:
            raise ValueError(f"expected {expect} random bits, got {len(bits)}")
        seeds = bits[: 2 * k * num_wires].reshape(num_wires, 2, k)
        return cls(seeds[:, 0].copy(), seeds[:, 1].copy(), bits[2 * k * num_wires :].copy())


def compute_lambda(shares, wire: int, num_wires: int, num_outputs: int) -> int:
    """Wire mask: XOR of the parties' shares, and 0 on output wires."""
    if not 0 <= wire < num_wires:
        raise ValueError(f"wire {wire} out of range")
    if wire >= num_wires - num_outputs:
        return 0
    return int(np.bitwise_xor.reduce(np.asarray(shares, dtype=np.uint8))) & 1


def _lambda_of(rands: list[PartyRandomness], wire: int, W: int, l: int) -> int:
    if wire >= W - l:
        return 0
    return compute_lambda([r.lam[wire] for r in rands], wire, W, l)


# --------------------------------------------------------------- signals


def build_signal(s0, s1, b: int) -> np.ndarray:
    """Concatenate each party's seed for value ``b`` and append ``b``."""
    s0 = [np.asarray(s, dtype=np.uint8) for s in s0]
    s1 = [np.asarray(s, dtype=np.uint8) for s in s1]
    if len(s0) != len(s1) or len({len(s) for s in s0 + s1}) != 1:
        raise ValueError("seed length mismatch")
    chosen = s1 if b else s0
    return np.concatenate(chosen + [np.array([int(b) & 1], np.uint8)])


def signal_part(signal: np.ndarray, party: int, k: int) -> np.ndarray:
    """Party ``party``'s k-bit block of a signal (0-based party index)."""
    return signal[party * k : (party + 1) * k]


def _prg_sum(seeds, selector: int, n: int) -> np.ndarray:
    out = np.zeros(n * len(seeds[0]) + 1, dtype=np.uint8)
    for s in seeds:
        out ^= prg_expand(s, selector, n)
    return out


def compute_gate_label(
    a: int,
    b: int,
    alpha_seeds,
    beta_seeds,
    gamma_seeds,
    lam_alpha: int,
    lam_beta: int,
    lam_gamma: int,
    gate_fn,
) -> np.ndarray:
    """Label A_ab of one garbled gate.

    ``*_seeds`` are pairs ``(s0, s1)`` of per-party seed lists.  For a
    one-input gate pass ``beta_seeds=None``; ``gate_fn`` then takes one
    argument and the row index ``b`` is ignored.
    """
    s0a, s1a = alpha_seeds
    n = len(s0a)
    a_seeds = s1a if a else s0a
    if beta_seeds is None:
        label = _prg_sum(a_seeds, 0, n)
        c = gate_fn(lam_alpha ^ a) ^ lam_gamma
    else:
        s0b, s1b = beta_seeds
        b_seeds = s1b if b else s0b
        label = _prg_sum(a_seeds, b, n) ^ _prg_sum(b_seeds, a, n)
        c = gate_fn(lam_alpha ^ a, lam_beta ^ b) ^ lam_gamma
    return label ^ build_signal(gamma_seeds[0], gamma_seeds[1], c & 1)


# --------------------------------------------------------------- program


@dataclass
class GarbledProgram:
    n: int
    k: int
    num_wires: int
    num_outputs: int
    labels: np.ndarray  # (num_gates, 4, n*k+1), row index 2a+b
    input_signals: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def signal_len(self) -> int:
        return self.n * self.k + 1

    def to_bytes(self) -> bytes:
        head = struct.pack("<5I", self.n, self.k, self.num_wires, self.num_outputs, len(self.labels))
        body = np.packbits(self.labels.reshape(-1), bitorder="little").tobytes()
        parts = [head, struct.pack("<I", len(body)), body, struct.pack("<I", len(self.input_signals))]
        for w in sorted(self.input_signals):
            bits = np.packbits(self.input_signals[w], bitorder="little").tobytes()
            parts.append(struct.pack("<I", w) + bits)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "GarbledProgram":
        n, k, W, l, g = struct.unpack_from("<5I", blob, 0)
        pos = 20
        (blen,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        L = n * k + 1
        bits = np.unpackbits(np.frombuffer(blob[pos : pos + blen], np.uint8), bitorder="little")
        labels = bits[: g * 4 * L].reshape(g, 4, L).copy()
        pos += blen
        (count,) = struct.unpack_from("<I", blob, pos)
        pos += 4
        sig_bytes = (L + 7) // 8
        signals = {}
        for _ in range(count):
            (w,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            raw = np.frombuffer(blob[pos : pos + sig_bytes], np.uint8)
            signals[w] = np.unpackbits(raw, bitorder="little")[:L].copy()
            pos += sig_bytes
        return cls(n, k, W, l, labels, signals)


def enforce_fanout_one(circuit: BoolCircuit) -> BoolCircuit:
    """Reject circuits in which any wire feeds more than one gate."""
    for w, uses in sorted(circuit.fanout().items()):
        if uses > 1:
            raise FanOutViolation(w, uses)
    return circuit


def _check_garblable(circuit: BoolCircuit) -> tuple[int, int]:
    enforce_fanout_one(circuit)
    W = circuit.num_wires
    l = len(circuit.outputs)
    if circuit.outputs != list(range(W - l, W)):
        raise CircuitError("output wires must be the last l wire ids")
    for g in circuit.gates:
        if g.kind == "XOR" and len(g.inputs) != 2:
            raise CircuitError("garbled XOR gates take exactly two inputs")
    return W, l


def _gate_fn(kind: str):
    if kind == "NOT":
        return lambda x: 1 - x
    return GATE_FNS[kind]


def garble_dealer(
    circuit: BoolCircuit, rands: list[PartyRandomness], inputs: dict[int, list[int]]
) -> GarbledProgram:
    """Garbled program computed directly from everyone's randomness."""
    W, l = _check_garblable(circuit)
    n = len(rands)
    k = rands[0].k
    seeds = lambda w: ([r.seeds0[w] for r in rands], [r.seeds1[w] for r in rands])  # noqa: E731
    labels = np.zeros((len(circuit.gates), 4, n * k + 1), dtype=np.uint8)
    for gi, g in enumerate(circuit.gates):
        alpha = g.inputs[0]
        beta = g.inputs[1] if len(g.inputs) == 2 else None
        for a in (0, 1):
            for b in (0, 1):
                labels[gi, 2 * a + b] = compute_gate_label(
                    a,
                    b,
                    seeds(alpha),
                    seeds(beta) if beta is not None else None,
                    seeds(g.output),
                    _lambda_of(rands, alpha, W, l),
                    _lambda_of(rands, beta, W, l) if beta is not None else 0,
                    _lambda_of(rands, g.output, W, l),
                    _gate_fn(g.kind),
                )
    signals = {}
    for p, ws in circuit.inputs.items():
        for w, bit in zip(ws, inputs[p]):
            signals[w] = input_signal(rands, circuit, w, bit)
    return GarbledProgram(n, k, W, l, labels, signals)


def input_signal(rands: list[PartyRandomness], circuit: BoolCircuit, wire: int, bit: int) -> np.ndarray:
    """Active signal of ``wire`` when it carries ``bit``."""
    W, l = circuit.num_wires, len(circuit.outputs)
    sel = (int(bit) ^ _lambda_of(rands, wire, W, l)) & 1
    return build_signal([r.seeds0[wire] for r in rands], [r.seeds1[wire] for r in rands], sel)


def evaluate_signals(program: GarbledProgram, circuit: BoolCircuit) -> dict[int, np.ndarray]:
    """Local topological sweep computing the active signal of every wire."""
    _check_garblable(circuit)
    n, k = program.n, program.k
    sig: dict[int, np.ndarray] = {}
    for w in circuit.input_wires:
        if w not in program.input_signals:
            raise CircuitError(f"missing input signal for wire {w}")
        sig[w] = program.input_signals[w]
    for gi, g in enumerate(circuit.gates):
        sa = sig[g.inputs[0]]
        a = int(sa[-1])
        if len(g.inputs) == 1:
            out = program.labels[gi, 2 * a].copy()
            out ^= _prg_sum([signal_part(sa, i, k) for i in range(n)], 0, n)
        else:
            sb = sig[g.inputs[1]]
            b = int(sb[-1])
            out = program.labels[gi, 2 * a + b].copy()
            out ^= _prg_sum([signal_part(sa, i, k) for i in range(n)], b, n)
            out ^= _prg_sum([signal_part(sb, i, k) for i in range(n)], a, n)
        sig[g.output] = out
    return sig


def bmr_evaluate(program: GarbledProgram, circuit: BoolCircuit) -> list[int]:
    """Evaluate without communication; outputs are the trailing signal bits."""
    sig = evaluate_signals(program, circuit)
    return [int(sig[w][-1]) for w in circuit.outputs]


# ----------------------------------------------- garbling as GMW circuits


class Emitter:
    """Circuit builder over values that are either wire ids or constant bits."""

    def __init__(self):
        self.b = CircuitBuilder()
        self.keys: dict[tuple, int] = {}
        self.key_of: dict[int, tuple] = {}

    def inp(self, party: int, key: tuple) -> int:
        full = (party,) + key
        if full not in self.keys:
            w = self.b.input(party)
            self.keys[full] = w
            self.key_of[w] = full
        return self.keys[full]

    def xor(self, *vals):
        wires = [v for v in vals if isinstance(v, Wire)]
        parity = sum(int(v) for v in vals if not isinstance(v, Wire)) & 1
        if not wires:
            return parity
        w = wires[0] if len(wires) == 1 else Wire(self.b.xor(*wires))
        return self.not_(w) if parity else w

    def not_(self, v):
        if not isinstance(v, Wire):
            return 1 - int(v)
        return Wire(self.b.not_(v))

    def and_(self, x, y):
        if not isinstance(x, Wire):
            return y if x else 0
        if not isinstance(y, Wire):
            return x if y else 0
        return Wire(self.b.and_(x, y))


class Wire(int):
    """Marks an emitted wire id as distinct from a folded constant."""


@dataclass
class GarblingCircuits:
    """Joint-computation circuits plus the maps needed to feed and read them."""

    lam: BoolCircuit
    sigma: BoolCircuit
    labels: BoolCircuit
    combined: BoolCircuit
    combined_keys: dict[int, tuple]  # GMW input wire -> (party, kind, ...)
    output_keys: list[tuple]  # per combined output: ("sigma", w, j) / ("A", g, row, j)
    depths: dict[str, int]
    n: int
    k: int


def _lam_value(em: Emitter, wire: int, n: int, W: int, l: int):
    if wire >= W - l:
        return 0
    return em.xor(*[Wire(em.inp(i, ("lam", wire))) for i in range(n)])


def _emit_lambda(em: Emitter, circuit: BoolCircuit, n: int, W: int, l: int, outs: list):
    for w in range(W - l):
        outs.append((("lam", w), _lam_value(em, w, n, W, l)))


def _select(em: Emitter, c, party: int, wire: int, j: int, extra=()):
    """Bit j of s^wire_c: (1 - c) & s0 ^ c & s1, folded with ``extra`` terms."""
    s0 = Wire(em.inp(party, ("s", 0, wire, j)))
    s1 = Wire(em.inp(party, ("s", 1, wire, j)))
    return em.xor(em.and_(em.not_(c), s0), em.and_(c, s1), *extra)


def _emit_sigma(em: Emitter, circuit: BoolCircuit, n: int, k: int, W: int, l: int, outs: list):
    owner = circuit.owner()
    for w in circuit.input_wires:
        x = Wire(em.inp(owner[w], ("x", w)))
        lam_shares = [] if w >= W - l else [Wire(em.inp(i, ("lam", w))) for i in range(n)]
        sel = em.xor(x, *lam_shares)
        for j in range(n * k):
            outs.append((("sigma", w, j), _select(em, sel, j // k, w, j % k)))
        outs.append((("sigma", w, n * k), sel))


def _emit_labels(em: Emitter, circuit: BoolCircuit, n: int, k: int, W: int, l: int, outs: list):
    for gi, g in enumerate(circuit.gates):
        alpha = g.inputs[0]
        beta = g.inputs[1] if len(g.inputs) == 2 else None
        u = _lam_value(em, alpha, n, W, l)
        v = _lam_value(em, beta, n, W, l) if beta is not None else 0
        gam_shares = [] if g.output >= W - l else [
            Wire(em.inp(i, ("lam", g.output))) for i in range(n)
        ]
        for a in (0, 1):
            for b in (0, 1):
                row = 2 * a + b
                ua = em.xor(u, a)
                if g.kind == "NOT":
                    t = em.not_(ua)
                elif g.kind == "AND":
                    t = em.and_(ua, em.xor(v, b))
                else:
                    t = em.xor(ua, em.xor(v, b))
                c = em.xor(t, *gam_shares)
                for j in range(n * k + 1):
                    blocks = [Wire(em.inp(i, ("G", gi, row, j))) for i in range(n)]
                    if j < n * k:
                        bit = _select(em, c, j // k, g.output, j % k, blocks)
                    else:
                        bit = em.xor(c, *blocks)
                    outs.append((("A", gi, row, j), bit))


def _finish(em: Emitter, outs: list) -> tuple[BoolCircuit, list[tuple]]:
    wires = []
    for key, val in outs:
        if not isinstance(val, Wire):
            raise CircuitError(f"garbling output {key} folded to a constant")
        wires.append(int(val))
    return em.b.build(wires), [key for key, _ in outs]


def build_garbling_circuits(circuit: BoolCircuit, n: int, k: int) -> GarblingCircuits:
    """Emit the lambda, sigma and label circuits for joint garbling.

    Party i's private GMW inputs are its mask shares, seed bits, its circuit
    input bits and the locally precomputed PRG blocks
    ``G_b(s^alpha_{a,i}) ^ G_a(s^beta_{b,i})`` for every gate row.
    """
    W, l = _check_garblable(circuit)
    parts = {}
    for name, emitters in (
        ("lam", (_emit_lambda,)),
        ("sigma", (_emit_sigma,)),
        ("labels", (_emit_labels,)),
        ("combined", (_emit_sigma, _emit_labels)),
    ):
        em = Emitter()
        outs: list = []
        for fn in emitters:
            if fn is _emit_lambda:
                fn(em, circuit, n, W, l, outs)
            else:
                fn(em, circuit, n, k, W, l, outs)
        circ, keys = _finish(em, outs)
        parts[name] = (circ, keys, em)
    depths = {name: parts[name][0].depth() for name in ("lam", "sigma", "labels")}
    comb, comb_keys, comb_em = parts["combined"]
    return GarblingCircuits(
        parts["lam"][0],
        parts["sigma"][0],
        parts["labels"][0],
        comb,
        dict(comb_em.key_of),
        comb_keys,
        depths,
        n,
        k,
    )


def party_inputs(
    gc: GarblingCircuits,
    circuit: BoolCircuit,
    party: int,
    rand: PartyRandomness,
    own_inputs: list[int],
) -> list[int]:
    """Party-local values for its GMW input wires, PRG blocks included."""
    n = gc.n
    x_of = dict(zip(circuit.inputs.get(party, []), own_inputs))
    prg_cache: dict[tuple, np.ndarray] = {}

    def block(gi: int, row: int) -> np.ndarray:
        if (gi, row) not in prg_cache:
            g = circuit.gates[gi]
            a, b = row >> 1, row & 1
            sa = rand.seeds1[g.inputs[0]] if a else rand.seeds0[g.inputs[0]]
            if len(g.inputs) == 1:
                prg_cache[(gi, row)] = prg_expand(sa, 0, n)
            else:
                sb = rand.seeds1[g.inputs[1]] if b else rand.seeds0[g.inputs[1]]
                prg_cache[(gi, row)] = prg_expand(sa, b, n) ^ prg_expand(sb, a, n)
        return prg_cache[(gi, row)]

    values = []
    for w in gc.combined.inputs.get(party, []):
        key = gc.combined_keys[w][1:]
        kind = key[0]
        if kind == "lam":
            values.append(int(rand.lam[key[1]]))
        elif kind == "s":
            seeds = rand.seeds1 if key[1] else rand.seeds0
            values.append(int(seeds[key[2], key[3]]))
        elif kind == "x":
            values.append(int(x_of[key[1]]))
        elif kind == "G":
            values.append(int(block(key[1], key[2])[key[3]]))
        else:
            raise CircuitError(f"unknown garbling input {key}")
    return values


def assemble_program(
    gc: GarblingCircuits, circuit: BoolCircuit, bits: list[int]
) -> GarbledProgram:
    W, l = circuit.num_wires, len(circuit.outputs)
    L = gc.n * gc.k + 1
    labels = np.zeros((len(circuit.gates), 4, L), dtype=np.uint8)
    signals = {w: np.zeros(L, dtype=np.uint8) for w in circuit.input_wires}
    for key, bit in zip(gc.output_keys, bits):
        if key[0] == "sigma":
            signals[key[1]][key[2]] = bit
        else:
            labels[key[1], key[2], key[3]] = bit
    return GarbledProgram(gc.n, gc.k, W, l, labels, signals)


def garble_with_gmw(
    circuit: BoolCircuit,
    rands: list[PartyRandomness],
    inputs: dict[int, list[int]],
    net: Network,
    rng: np.random.Generator,
    gc: GarblingCircuits | None = None,
) -> GarbledProgram:
    """Garble jointly: one GMW run of the combined circuit, then one opening round."""
    n = len(rands)
    gc = gc or build_garbling_circuits(circuit, n, rands[0].k)
    gmw_inputs = {
        p: party_inputs(gc, circuit, p, rands[p], list(inputs.get(p, []))) for p in range(n)
    }
    shares = evaluate_shared(gc.combined, gmw_inputs, n, net, rng)
    bits = open_shares(net, [shares[w] for w in gc.combined.outputs], tag="bmr-labels")
    return assemble_program(gc, circuit, bits)
