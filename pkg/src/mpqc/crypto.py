"""Classical primitives: the seed-expanding PRG, a discrete-log public-key
scheme with obliviously samplable public keys, and oblivious transfer.

The group is the order-q subgroup of quadratic residues modulo the safe
prime p = 2q + 1 < 2^31, small enough that every modular product fits in a
uint64 and whole OT layers can be processed as numpy arrays.  This is a
desk-scale stand-in, not a secure parameter choice.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .network import Network, pack, unpack

PRIME = 2147483579
ORDER = (PRIME - 1) // 2
GENERATOR = 4


class DecryptionError(RuntimeError):
    """Ciphertext did not decrypt to a valid message (wrong key or broken PKE)."""


# ---------------------------------------------------------------------- PRG


def prg_expand(seed, selector: int, n: int) -> np.ndarray:
    """Expand a k-bit seed to n*k + 1 bits; ``selector`` picks G_0 or G_1."""
    seed = np.asarray(seed, dtype=np.uint8) & 1
    k = len(seed)
    if k < 1 or n < 1:
        raise ValueError("need k >= 1 and n >= 1")
    out_len = n * k + 1
    head = b"mpqc-prg|%d|%d|%d|" % (int(selector) & 1, n, k)
    head += np.packbits(seed, bitorder="little").tobytes()
    blocks = []
    have = 0
    counter = 0
    while have < out_len:
        digest = hashlib.sha256(head + counter.to_bytes(4, "little")).digest()
        blocks.append(digest)
        have += 256
        counter += 1
    bits = np.unpackbits(np.frombuffer(b"".join(blocks), np.uint8), bitorder="little")
    return bits[:out_len].copy()


# ---------------------------------------------------------------------- PKE


def powmod(base, exp) -> np.ndarray:
    """Elementwise base**exp mod PRIME for uint64 arrays."""
    base = np.asarray(base, dtype=np.uint64) % np.uint64(PRIME)
    exp = np.asarray(exp, dtype=np.uint64)
    base, exp = np.broadcast_arrays(base, exp)
    base = base.copy()
    exp = exp.copy()
    result = np.ones_like(base)
    p = np.uint64(PRIME)
    one = np.uint64(1)
    while np.any(exp):
        odd = (exp & one).astype(bool)
        result = np.where(odd, (result * base) % p, result)
        base = (base * base) % p
        exp >>= one
    return result


@dataclass
class KeyPair:
    pk: np.ndarray
    sk: np.ndarray


class ElGamal:
    """Bitwise ElGamal: a bit m is encrypted as (g^r, pk^r * g^m)."""

    def keygen(self, rng: np.random.Generator, size=()) -> KeyPair:
        sk = rng.integers(1, ORDER, size=size, dtype=np.uint64)
        return KeyPair(powmod(GENERATOR, sk), sk)

    def sample_public_key(self, rng: np.random.Generator, size=()) -> np.ndarray:
        """Uniform public key drawn without learning its secret key (h^2 mod p)."""
        h = rng.integers(2, PRIME - 1, size=size, dtype=np.uint64)
        return (h * h) % np.uint64(PRIME)

    def encrypt(self, pk, bits, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        bits = np.asarray(bits, dtype=np.uint64) & np.uint64(1)
        pk = np.broadcast_to(np.asarray(pk, dtype=np.uint64), bits.shape)
        r = rng.integers(1, ORDER, size=bits.shape, dtype=np.uint64)
        c1 = powmod(GENERATOR, r)
        shared = powmod(pk, r)
        c2 = (shared * np.where(bits == 1, np.uint64(GENERATOR), np.uint64(1))) % np.uint64(PRIME)
        return c1, c2

    def decrypt(self, sk, c1, c2) -> np.ndarray:
        c1 = np.asarray(c1, dtype=np.uint64)
        sk = np.broadcast_to(np.asarray(sk, dtype=np.uint64), c1.shape)
        inv_shared = powmod(c1, np.uint64(ORDER) - sk)
        m = (inv_shared * np.asarray(c2, dtype=np.uint64)) % np.uint64(PRIME)
        ok = (m == 1) | (m == GENERATOR)
        if not np.all(ok):
            raise DecryptionError("ciphertext does not decrypt under this key")
        return (m == GENERATOR).astype(np.uint8)


PKE = ElGamal()


def _u32(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype="<u4").tobytes()


def _from_u32(data: bytes, shape) -> np.ndarray:
    return np.frombuffer(data, dtype="<u4").astype(np.uint64).reshape(shape)


# ----------------------------------------------------------------------- OT


@dataclass
class OTRequest:
    """One 1-out-of-k transfer: ``values`` is a (k, m) bit array."""

    sender: int
    receiver: int
    values: np.ndarray
    choice: int


def ot_batch(
    net: Network,
    requests: list[OTRequest],
    rng: np.random.Generator,
    pke: ElGamal = PKE,
    oblivious_key=None,
) -> list[np.ndarray]:
    """Run independent OTs in parallel: two network rounds in total.

    Round 1: each receiver sends its ordered key tuple (real key in the chosen
    slot, obliviously sampled keys elsewhere).  Round 2: each sender returns
    the values encrypted slot by slot.  Receivers decrypt their slot locally.
    """
    if not requests:
        return []
    values = np.stack([np.asarray(r.values, dtype=np.uint8) for r in requests])
    out = ot_arrays(
        net,
        np.array([r.sender for r in requests]),
        np.array([r.receiver for r in requests]),
        values,
        np.array([int(r.choice) for r in requests]),
        rng,
        pke,
        oblivious_key,
    )
    return [out[i] for i in range(len(requests))]


def ot_arrays(
    net: Network,
    senders: np.ndarray,
    receivers: np.ndarray,
    values: np.ndarray,
    choices: np.ndarray,
    rng: np.random.Generator,
    pke: ElGamal = PKE,
    oblivious_key=None,
) -> np.ndarray:
    """Array form of :func:`ot_batch`: ``values`` is (s, k, m), result is (s, m)."""
    values = np.asarray(values, dtype=np.uint8) & 1
    s, k, m = values.shape
    choices = np.asarray(choices, dtype=np.int64)
    if np.any((choices < 0) | (choices >= k)):
        raise ValueError(f"choice out of range for 1-out-of-{k} OT")
    sample = oblivious_key or pke.sample_public_key

    # receivers: keygen + oblivious keys
    real = pke.keygen(rng, size=s)
    keys = sample(rng, size=(s, k))
    keys[np.arange(s), choices] = real.pk
    pairs: dict[tuple[int, int], np.ndarray] = {}
    order = np.lexsort((senders, receivers))
    links = np.stack([receivers[order], senders[order]], axis=1)
    cuts = np.flatnonzero(np.any(np.diff(links, axis=0) != 0, axis=1)) + 1
    for idx in np.split(order, cuts):
        pairs[(int(receivers[idx[0]]), int(senders[idx[0]]))] = np.sort(idx)
    for (rcv, snd), idx in pairs.items():
        net.send(rcv, snd, pack(_u32(keys[idx])), "ot-keys")
    net.route_round()

    # senders: encrypt each value under the key in its slot
    seen_keys = np.zeros((s, k), dtype=np.uint64)
    for (rcv, snd), idx in pairs.items():
        (blob,) = unpack(net.receive_one(snd, "ot-keys", rcv))
        seen_keys[idx] = _from_u32(blob, (len(idx), k))
    c1, c2 = pke.encrypt(seen_keys[:, :, None], values, rng)
    for (rcv, snd), idx in pairs.items():
        net.send(snd, rcv, pack(_u32(c1[idx]), _u32(c2[idx])), "ot-cts")
    net.route_round()

    # receivers: decrypt the chosen slot only
    got1 = np.zeros((s, k, m), dtype=np.uint64)
    got2 = np.zeros((s, k, m), dtype=np.uint64)
    for (rcv, snd), idx in pairs.items():
        b1, b2 = unpack(net.receive_one(rcv, "ot-cts", snd))
        got1[idx] = _from_u32(b1, (len(idx), k, m))
        got2[idx] = _from_u32(b2, (len(idx), k, m))
    rows = np.arange(s)
    return pke.decrypt(real.sk[:, None], got1[rows, choices], got2[rows, choices])


def ot2(net: Network, sender: int, receiver: int, y0, y1, b: int, rng) -> np.ndarray:
    """1-out-of-2 OT: the receiver learns y_b."""
    y0 = np.asarray(y0, dtype=np.uint8)
    y1 = np.asarray(y1, dtype=np.uint8)
    if y0.shape != y1.shape:
        raise ValueError("y0 and y1 must have equal length")
    req = OTRequest(sender, receiver, np.stack([y0, y1]), int(b))
    return ot_batch(net, [req], rng)[0]


def ot4(net: Network, sender: int, receiver: int, values, b1: int, b2: int, rng) -> np.ndarray:
    """1-out-of-4 OT over (v00, v01, v10, v11): the receiver learns v_{b1 b2}."""
    vals = [np.asarray(v, dtype=np.uint8) for v in values]
    if len(vals) != 4 or len({v.shape for v in vals}) != 1:
        raise ValueError("need four equal-length values")
    req = OTRequest(sender, receiver, np.stack(vals), 2 * int(b1) + int(b2))
    return ot_batch(net, [req], rng)[0]


def sender_views(net_or_transcript, k: int = 2) -> list[np.ndarray]:
    """The ordered public-key tuples each sender saw, one array per message."""
    transcript = getattr(net_or_transcript, "transcript", net_or_transcript)
    out = []
    for rnd in transcript.rounds:
        for msg in rnd.messages:
            if msg.tag == "ot-keys":
                (blob,) = unpack(msg.payload)
                out.append(_from_u32(blob, (-1, k)))
    return out
