"""Pauli-frame algebra: Clifford conjugation rules, the T-gate correction rule
and the PX group ``i^c X^a P^b`` used for group randomizing.

All frame-level rules drop global phases.  Phases are only exact inside
:func:`px_matrix`, which the tests compare against explicit matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qsim import GATE_MATRICES


class NonCliffordError(ValueError):
    pass


@dataclass
class PauliMask:
    """Per-qubit X^a Z^b bits."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=np.uint8) & 1
        self.b = np.asarray(self.b, dtype=np.uint8) & 1
        if self.a.shape != self.b.shape:
            raise ValueError("a and b must have the same length")

    @classmethod
    def zeros(cls, num_qubits: int) -> "PauliMask":
        return cls(np.zeros(num_qubits, np.uint8), np.zeros(num_qubits, np.uint8))

    @property
    def num_qubits(self) -> int:
        return len(self.a)

    def __xor__(self, other: "PauliMask") -> "PauliMask":
        return PauliMask(self.a ^ other.a, self.b ^ other.b)

    def copy(self) -> "PauliMask":
        return PauliMask(self.a.copy(), self.b.copy())

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(x), int(z)) for x, z in zip(self.a, self.b)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliMask)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )


# (a_control, b_control, a_target, b_target) -> image under CNOT conjugation.
# Frozen from the 4x4 matrix oracle (see tests/test_pauliframe.py).
CNOT_TABLE: dict[tuple[int, int, int, int], tuple[int, int, int, int]] = {
    (0, 0, 0, 0): (0, 0, 0, 0),
    (0, 0, 0, 1): (0, 1, 0, 1),
    (0, 0, 1, 0): (0, 0, 1, 0),
    (0, 0, 1, 1): (0, 1, 1, 1),
    (0, 1, 0, 0): (0, 1, 0, 0),
    (0, 1, 0, 1): (0, 0, 0, 1),
    (0, 1, 1, 0): (0, 1, 1, 0),
    (0, 1, 1, 1): (0, 0, 1, 1),
    (1, 0, 0, 0): (1, 0, 1, 0),
    (1, 0, 0, 1): (1, 1, 1, 1),
    (1, 0, 1, 0): (1, 0, 0, 0),
    (1, 0, 1, 1): (1, 1, 0, 1),
    (1, 1, 0, 0): (1, 1, 1, 0),
    (1, 1, 0, 1): (1, 0, 1, 1),
    (1, 1, 1, 0): (1, 1, 0, 0),
    (1, 1, 1, 1): (1, 0, 0, 1),
}


def conjugate_single(gate: str, a: int, b: int) -> tuple[int, int]:
    """Return (a', b') with gate . X^a Z^b ~ X^a' Z^b' . gate."""
    if gate in ("I", "X", "Z"):
        return a, b
    if gate == "H":
        return b, a
    if gate == "P":
        return a, b ^ a
    if gate == "T":
        raise NonCliffordError("T is not Clifford; use conjugate_through_T")
    raise NonCliffordError(f"unsupported single-qubit gate {gate!r}")


def conjugate_through_clifford(gate: str, targets, mask: PauliMask) -> PauliMask:
    """Push ``mask`` through ``gate`` acting on ``targets``."""
    out = mask.copy()
    if gate == "CNOT":
        c, t = targets
        key = (int(mask.a[c]), int(mask.b[c]), int(mask.a[t]), int(mask.b[t]))
        out.a[c], out.b[c], out.a[t], out.b[t] = CNOT_TABLE[key]
        return out
    (q,) = targets
    out.a[q], out.b[q] = conjugate_single(gate, int(mask.a[q]), int(mask.b[q]))
    return out


def conjugate_through_T(a: int, b: int) -> tuple[int, int, int]:
    """T . X^a Z^b ~ X^a' Z^b' P^p . T; returns (a', b', p) with p = a'."""
    return a, b ^ a, a


def remove_pending_p(a: int, b: int, p: int) -> tuple[int, int]:
    """Frame left after applying (P^dagger)^p to X^a Z^b P^p."""
    return a, b ^ p


# ---------------------------------------------------------------- PX group


@dataclass(frozen=True)
class PXElement:
    """i^c X^a P^b with a in Z_2 and b, c in Z_4."""

    a: int = 0
    b: int = 0
    c: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", int(self.a) % 2)
        object.__setattr__(self, "b", int(self.b) % 4)
        object.__setattr__(self, "c", int(self.c) % 4)

    def bits(self) -> tuple[int, int, int, int, int]:
        """The five classical bits (a, b0, b1, c0, c1)."""
        return self.a, self.b & 1, self.b >> 1, self.c & 1, self.c >> 1

    @classmethod
    def from_bits(cls, bits) -> "PXElement":
        a, b0, b1, c0, c1 = (int(x) & 1 for x in bits)
        return cls(a, b0 | (b1 << 1), c0 | (c1 << 1))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "PXElement":
        return cls(int(rng.integers(2)), int(rng.integers(4)), int(rng.integers(4)))


PX_IDENTITY = PXElement(0, 0, 0)


def px_compose(e1: PXElement, e2: PXElement) -> PXElement:
    """Group product e1 . e2, using P^b X = i^b X P^-b."""
    if e2.a:
        return PXElement(e1.a ^ 1, e2.b - e1.b, e1.c + e2.c + e1.b)
    return PXElement(e1.a, e1.b + e2.b, e1.c + e2.c)


def px_invert(e: PXElement) -> PXElement:
    if e.a:
        return PXElement(1, e.b, -e.c - e.b)
    return PXElement(0, -e.b, -e.c)


def px_matrix(e: PXElement, conjugated: bool = False) -> np.ndarray:
    x = GATE_MATRICES["X"]
    p = GATE_MATRICES["P"]
    m = (1j**e.c) * np.linalg.matrix_power(x, e.a) @ np.linalg.matrix_power(p, e.b)
    if conjugated:
        h = GATE_MATRICES["H"]
        m = h @ m @ h
    return m


def px_elements() -> list[PXElement]:
    return [PXElement(a, b, c) for a in range(2) for b in range(4) for c in range(4)]


def correction_element(p: int, randomizer: PXElement) -> PXElement:
    """C R^dagger for the correction C = (P^dagger)^p."""
    return px_compose(PXElement(0, -p, 0), px_invert(randomizer))


# ---------------------------------------------------------- circuit deferral


def defer_pauli(circuit, masks) -> tuple[PauliMask, list[int]]:
    """Push interleaved Pauli masks to the end of ``circuit``.

    ``masks[i]`` (a PauliMask or None) is applied just before gate ``i``;
    ``masks[len(gates)]`` is applied after the last gate.  After each T gate
    with pending bit ``p`` the caller inserts (P^dagger)^p; the returned
    ``p_corrections`` list those bits in gate order.  The result satisfies
    circuit-with-masks-and-corrections ~ X^a Z^b . circuit.
    """
    gates = list(circuit.gates)
    frame = PauliMask.zeros(circuit.num_qubits)
    p_corrections: list[int] = []
    masks = list(masks) + [None] * (len(gates) + 1 - len(masks))
    for i, gate in enumerate(gates):
        if masks[i] is not None:
            frame = frame ^ masks[i]
        if gate.kind == "T":
            (q,) = gate.targets
            a, b, p = conjugate_through_T(int(frame.a[q]), int(frame.b[q]))
            frame.a[q], frame.b[q] = remove_pending_p(a, b, p)
            p_corrections.append(p)
        else:
            frame = conjugate_through_clifford(gate.kind, gate.targets, frame)
    if masks[len(gates)] is not None:
        frame = frame ^ masks[len(gates)]
    return frame, p_corrections
