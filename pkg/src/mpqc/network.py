"""Synchronous round-based network simulator with transcript recording.

Parties queue messages during a round; :meth:`Network.route_round` delivers
every queued message at once and records one round.  Rounds in which nobody
sends anything are not counted.  Quantum registers never travel through the
network: a quantum transmission is recorded as a classical announcement
message so the round structure stays visible in the transcript.
"""

from __future__ import annotations

import json
import struct
from collections import defaultdict
from dataclasses import dataclass, field


class NetworkError(RuntimeError):
    pass


def pack(*fields: bytes) -> bytes:
    """Concatenate byte strings, each prefixed by its 4-byte little-endian length."""
    return b"".join(struct.pack("<I", len(f)) + bytes(f) for f in fields)


def unpack(payload: bytes) -> list[bytes]:
    out = []
    pos = 0
    while pos < len(payload):
        if pos + 4 > len(payload):
            raise NetworkError("truncated length prefix")
        (n,) = struct.unpack_from("<I", payload, pos)
        pos += 4
        if pos + n > len(payload):
            raise NetworkError("truncated field")
        out.append(payload[pos : pos + n])
        pos += n
    return out


@dataclass(frozen=True)
class Message:
    sender: int
    receiver: int
    payload: bytes
    tag: str

    def to_dict(self) -> dict:
        return {
            "from": self.sender,
            "to": self.receiver,
            "tag": self.tag,
            "payload": self.payload.hex(),
        }


@dataclass
class Round:
    index: int
    messages: list[Message]

    def to_dict(self) -> dict:
        return {"round": self.index, "messages": [m.to_dict() for m in self.messages]}


@dataclass
class Transcript:
    rounds: list[Round] = field(default_factory=list)

    @property
    def num_rounds(self) -> int:
        return len(self.rounds)

    @property
    def num_messages(self) -> int:
        return sum(len(r.messages) for r in self.rounds)

    def view(self, party: int) -> list[Message]:
        """Every message a party sent or received, in delivery order."""
        return [
            m
            for r in self.rounds
            for m in r.messages
            if party in (m.sender, m.receiver)
        ]

    def tags(self) -> list[list[str]]:
        return [sorted({m.tag for m in r.messages}) for r in self.rounds]

    def to_dict(self) -> dict:
        return {"rounds": [r.to_dict() for r in self.rounds]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        rounds = []
        for r in data["rounds"]:
            msgs = [
                Message(m["from"], m["to"], bytes.fromhex(m["payload"]), m["tag"])
                for m in r["messages"]
            ]
            rounds.append(Round(r["round"], msgs))
        return cls(rounds)

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        return cls.from_dict(json.loads(text))


class Network:
    """Lock-step message router between integer-identified parties."""

    def __init__(self, parties):
        self.parties = list(parties)
        self._known = set(self.parties)
        self._outbox: list[Message] = []
        self._inbox: dict[int, list[Message]] = defaultdict(list)
        self.transcript = Transcript()

    @property
    def rounds(self) -> int:
        return self.transcript.num_rounds

    def send(self, sender: int, receiver: int, payload: bytes, tag: str) -> None:
        for p in (sender, receiver):
            if p not in self._known:
                raise NetworkError(f"unknown party {p}")
        if sender == receiver:
            raise NetworkError("a party cannot message itself")
        self._outbox.append(Message(sender, receiver, bytes(payload), tag))

    def broadcast(self, sender: int, payload: bytes, tag: str) -> None:
        for p in self.parties:
            if p != sender:
                self.send(sender, p, payload, tag)

    def route_round(self) -> Round | None:
        """Deliver all queued messages simultaneously; returns the round record."""
        if not self._outbox:
            return None
        rnd = Round(self.transcript.num_rounds, self._outbox)
        self._outbox = []
        for m in rnd.messages:
            self._inbox[m.receiver].append(m)
        self.transcript.rounds.append(rnd)
        return rnd

    def receive(self, party: int, tag: str | None = None, sender: int | None = None) -> list[Message]:
        """Pop matching messages from a party's inbox (oldest first)."""
        hit, rest = [], []
        for m in self._inbox[party]:
            match = (tag is None or m.tag == tag) and (sender is None or m.sender == sender)
            (hit if match else rest).append(m)
        self._inbox[party] = rest
        return hit

    def receive_one(self, party: int, tag: str, sender: int) -> bytes:
        msgs = self.receive(party, tag, sender)
        if len(msgs) != 1:
            raise NetworkError(
                f"party {party} expected one {tag!r} message from {sender}, got {len(msgs)}"
            )
        return msgs[0].payload

    def pending(self, party: int) -> int:
        return len(self._inbox[party])
