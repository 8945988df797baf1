"""GMW evaluation of boolean circuits over XOR-shared bits.

XOR and NOT are local.  A two-party AND costs one 1-out-of-4 OT; an n-party
AND splits into local diagonal terms plus one two-party AND per ordered pair
of parties.  All AND gates at the same AND-depth share one OT layer, so the
round count is ``1 + 2 * and_depth`` (input sharing + two rounds per layer).
"""

from __future__ import annotations

import numpy as np

from .circuits import BoolCircuit, CircuitError
from .crypto import ot_arrays
from .network import Network, pack, unpack

OT_ROUNDS = 2


def share_input(bit: int, owner: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """XOR-share ``bit``: uniform shares for everyone but the owner."""
    if n < 2:
        raise ValueError("GMW needs at least two parties")
    shares = rng.integers(0, 2, size=n, dtype=np.uint8)
    shares[owner] = 0
    shares[owner] = (int(bit) & 1) ^ int(np.bitwise_xor.reduce(shares))
    return shares


def reconstruct(shares) -> int:
    return int(np.bitwise_xor.reduce(np.asarray(shares, dtype=np.uint8))) & 1


def gate_not(x: np.ndarray) -> np.ndarray:
    out = np.array(x, dtype=np.uint8)
    out[0] ^= 1
    return out


def gate_xor(*xs) -> np.ndarray:
    if len(xs) == 1 and not isinstance(xs[0], np.ndarray):
        xs = tuple(xs[0])
    sizes = {len(x) for x in xs}
    if len(sizes) != 1:
        raise ValueError("inconsistent party counts")
    return np.bitwise_xor.reduce(np.stack([np.asarray(x, np.uint8) for x in xs]), axis=0)


def and_layer(
    pairs: list[tuple[np.ndarray, np.ndarray]],
    net: Network,
    rng: np.random.Generator,
    parties=None,
) -> list[np.ndarray]:
    """Evaluate a batch of independent AND gates in one OT layer.

    Two parties: P0 keeps a random r and offers r ^ S(u, v) for all four
    (u, v); P1 selects with its own shares.  More parties: each keeps its
    diagonal term x_i & y_i, and every ordered pair (i, j) runs a two-party
    AND of the sharings (x_i, 0) and (0, y_j).
    """
    if not pairs:
        return []
    x = np.stack([np.asarray(p[0], np.uint8) for p in pairs])
    y = np.stack([np.asarray(p[1], np.uint8) for p in pairs])
    G, n = x.shape
    parties = np.asarray(list(parties) if parties is not None else range(n))
    u = np.array([0, 0, 1, 1], np.uint8)
    v = np.array([0, 1, 0, 1], np.uint8)
    if n == 2:
        links = [(0, 1)]
        z = np.zeros((G, 2), np.uint8)
    else:
        links = [(i, j) for i in range(n) for j in range(n) if i != j]
        z = (x & y).astype(np.uint8)
    L = len(links)
    snd = np.array([i for i, _ in links])
    rcv = np.array([j for _, j in links])
    r = rng.integers(0, 2, (G, L), dtype=np.uint8)
    xs = x[:, snd]  # (G, L)
    if n == 2:
        ys = y[:, snd]
        choice = 2 * x[:, rcv] + y[:, rcv]
    else:
        ys = np.zeros_like(xs)
        choice = y[:, rcv]
    table = r[:, :, None] ^ ((xs[:, :, None] ^ u) & (ys[:, :, None] ^ v))  # (G, L, 4)
    if n != 2:
        table = table[:, :, [0, 1]]  # receiver's x share is 0: only v matters
    k = table.shape[2]
    got = ot_arrays(
        net,
        np.broadcast_to(parties[snd], (G, L)).reshape(-1),
        np.broadcast_to(parties[rcv], (G, L)).reshape(-1),
        table.reshape(G * L, k, 1),
        choice.reshape(-1),
        rng,
    ).reshape(G, L)
    for li, (i, j) in enumerate(links):
        z[:, i] ^= r[:, li]
        z[:, j] ^= got[:, li]
    return [z[g] for g in range(G)]


def gate_and2(x, y, net: Network, rng: np.random.Generator, parties=(0, 1)) -> np.ndarray:
    """Two-party AND: P1 keeps r, P2 receives r ^ AND(x, y) through one 1-of-4 OT."""
    if len(x) != 2 or len(y) != 2:
        raise ValueError("gate_and2 needs exactly two parties")
    return and_layer([(np.asarray(x, np.uint8), np.asarray(y, np.uint8))], net, rng, parties)[0]


def gate_andn(x, y, net: Network, rng: np.random.Generator) -> np.ndarray:
    """n-party AND via the diagonal/cross-term decomposition."""
    x = np.asarray(x, np.uint8)
    y = np.asarray(y, np.uint8)
    if len(x) == 2:
        # force the pairwise decomposition even for two parties
        z = (x & y).astype(np.uint8)
        cross = []
        for i, j in ((0, 1), (1, 0)):
            xi = np.zeros(2, np.uint8)
            yj = np.zeros(2, np.uint8)
            xi[0], yj[1] = x[i], y[j]
            cross.append(((xi, yj), (i, j)))
        for (xi, yj), (i, j) in cross:
            out = and_layer([(xi, yj)], net, rng, parties=(i, j))[0]
            z[i] ^= out[0]
            z[j] ^= out[1]
        return z
    return and_layer([(x, y)], net, rng)[0]


def _share_inputs(
    circuit: BoolCircuit, inputs: dict[int, list[int]], n: int, net: Network, rng
) -> dict[int, np.ndarray]:
    shares: dict[int, np.ndarray] = {}
    sent: dict[int, np.ndarray] = {}
    for p in sorted(circuit.inputs):
        ws = circuit.inputs[p]
        bits = list(inputs.get(p, []))
        if len(bits) != len(ws):
            raise CircuitError(f"party {p} needs {len(ws)} input bits, got {len(bits)}")
        if not ws:
            continue
        table = rng.integers(0, 2, (len(bits), n), dtype=np.uint8)
        table[:, p] = 0
        table[:, p] = np.asarray(bits, np.uint8) & 1 ^ np.bitwise_xor.reduce(table, axis=1)
        sent[p] = table
        for j in range(n):
            if j != p:
                net.send(p, j, pack(np.packbits(table[:, j], bitorder="little").tobytes()),
                         "gmw-share")
    net.route_round()
    for p, table in sent.items():
        ws = circuit.inputs[p]
        cols = np.zeros((len(ws), n), dtype=np.uint8)
        cols[:, p] = table[:, p]
        for j in range(n):
            if j != p:
                (blob,) = unpack(net.receive_one(j, "gmw-share", p))
                cols[:, j] = np.unpackbits(np.frombuffer(blob, np.uint8), bitorder="little")[: len(ws)]
        for w, row in zip(ws, cols):
            shares[w] = row
    return shares


def evaluate_shared(
    circuit: BoolCircuit,
    inputs: dict[int, list[int]],
    n: int,
    net: Network,
    rng: np.random.Generator,
) -> dict[int, np.ndarray]:
    """Run GMW and return every wire's share vector (party j holds entry j)."""
    for p in circuit.inputs:
        if not 0 <= p < n:
            raise CircuitError(f"input owner {p} is not one of the {n} parties")
    shares = _share_inputs(circuit, inputs, n, net, rng)
    level = circuit.levels(count=("AND",))
    by_level: dict[int, list] = {}
    for g in circuit.gates:
        by_level.setdefault(level[g.output], []).append(g)
    for lvl in sorted(by_level):
        gates = by_level[lvl]
        ands = [g for g in gates if g.kind == "AND"]
        results = and_layer([(shares[g.inputs[0]], shares[g.inputs[1]]) for g in ands], net, rng)
        for g, z in zip(ands, results):
            shares[g.output] = z
        for g in gates:
            if g.kind == "XOR":
                shares[g.output] = gate_xor(*[shares[w] for w in g.inputs])
            elif g.kind == "NOT":
                shares[g.output] = gate_not(shares[g.inputs[0]])
    return shares


def open_shares(
    net: Network, values: list[np.ndarray], recipients=None, tag: str = "gmw-open"
) -> list[int]:
    """Send share vectors to ``recipients`` in one round and reconstruct."""
    if not values:
        return []
    table = np.stack([np.asarray(v, np.uint8) for v in values])
    n = table.shape[1]
    recipients = list(range(n)) if recipients is None else list(recipients)
    for p in range(n):
        blob = pack(np.packbits(table[:, p], bitorder="little").tobytes())
        for r in recipients:
            if r != p:
                net.send(p, r, blob, tag)
    net.route_round()
    result = None
    for r in recipients:
        cols = table.copy()
        for p in range(n):
            if p != r:
                (blob,) = unpack(net.receive_one(r, tag, p))
                cols[:, p] = np.unpackbits(np.frombuffer(blob, np.uint8), bitorder="little")[: len(values)]
        bits = np.bitwise_xor.reduce(cols, axis=1)
        result = bits if result is None else result
    return [int(b) for b in result]


def run_gmw(
    circuit: BoolCircuit,
    inputs: dict[int, list[int]],
    n: int,
    rng: np.random.Generator,
    net: Network | None = None,
) -> tuple[list[int], int]:
    """Evaluate ``circuit`` under GMW; returns (outputs, rounds used).

    Output shares are combined by XOR without an extra round, so the count is
    input sharing plus the OT layers.
    """
    net = net or Network(range(n))
    start = net.rounds
    shares = evaluate_shared(circuit, inputs, n, net, rng)
    outputs = [reconstruct(shares[w]) for w in circuit.outputs]
    return outputs, net.rounds - start
