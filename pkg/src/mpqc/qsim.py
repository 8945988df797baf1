"""Statevector simulator used as the exact oracle for every protocol.

Qubit ordering is little-endian: qubit 0 is the least-significant bit of the
amplitude index.  Equality of states is only ever meaningful up to a global
phase, so compare with :func:`fidelity`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 14
NORM_TOL = 1e-9

SQRT2 = np.sqrt(2.0)

GATE_MATRICES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / SQRT2,
    "P": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    # control is the first target, little-endian basis |target control>
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
    ),
}

GATE_ARITY = {"I": 1, "X": 1, "Z": 1, "H": 1, "P": 1, "T": 1, "CNOT": 2}
CLIFFORD_GATES = frozenset({"I", "X", "Z", "H", "P", "CNOT"})


class QuantumError(ValueError):
    """Raised on malformed quantum operations (bad indices, arity, sizes)."""


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if self.num_qubits < 0 or self.num_qubits > MAX_QUBITS:
            raise QuantumError(f"num_qubits must be in [0, {MAX_QUBITS}]")
        if amps.shape != (2**self.num_qubits,):
            raise QuantumError(
                f"expected {2**self.num_qubits} amplitudes, got {amps.shape}"
            )
        if abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise QuantumError("state vector is not normalised")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())


def zero_state(num_qubits: int) -> StateVector:
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def basis_state(bits) -> StateVector:
    """Computational basis state; ``bits[q]`` is the value of qubit q."""
    bits = [int(b) for b in bits]
    amps = np.zeros(2 ** len(bits), dtype=complex)
    amps[sum(b << q for q, b in enumerate(bits))] = 1.0
    return StateVector(len(bits), amps)


def from_vector(vec) -> StateVector:
    vec = np.asarray(vec, dtype=complex)
    n = int(round(np.log2(len(vec))))
    return StateVector(n, vec / np.linalg.norm(vec))


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state."""
    vec = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return StateVector(num_qubits, vec / np.linalg.norm(vec))


def tensor(*states: StateVector) -> StateVector:
    """Tensor product; the first argument occupies the lowest qubit indices."""
    amps = np.ones(1, dtype=complex)
    total = 0
    for s in states:
        amps = np.kron(s.amplitudes, amps)
        total += s.num_qubits
    return StateVector(total, amps)


def _as_tensor(state: StateVector) -> np.ndarray:
    # axis j of the reshaped array corresponds to qubit n-1-j
    return state.amplitudes.reshape((2,) * state.num_qubits)


def _axis(n: int, q: int) -> int:
    return n - 1 - q


def apply_matrix(state: StateVector, matrix: np.ndarray, targets) -> StateVector:
    """Apply a 2^k x 2^k unitary to ``targets`` (targets[0] is the low bit)."""
    targets = [int(t) for t in targets]
    n = state.num_qubits
    k = len(targets)
    if matrix.shape != (2**k, 2**k):
        raise QuantumError(f"matrix shape {matrix.shape} does not fit {k} targets")
    if len(set(targets)) != k:
        raise QuantumError(f"targets must be distinct, got {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise QuantumError(f"qubit {t} out of range for {n} qubits")
    psi = _as_tensor(state)
    # matrix index bits: target[0] is least significant -> reshape axes reversed
    op = matrix.reshape((2,) * (2 * k))
    axes = [_axis(n, t) for t in reversed(targets)]
    psi = np.tensordot(op, psi, axes=(list(range(k, 2 * k)), axes))
    psi = np.moveaxis(psi, list(range(k)), axes)
    return StateVector(n, psi.reshape(-1))


def apply_gate(state: StateVector, gate: str, targets) -> StateVector:
    """Apply one gate from {I, X, Z, H, P, T, CNOT}; CNOT targets are (control, target)."""
    if gate not in GATE_MATRICES:
        raise QuantumError(f"unknown gate {gate!r}")
    targets = list(targets) if not isinstance(targets, int) else [targets]
    if len(targets) != GATE_ARITY[gate]:
        raise QuantumError(
            f"gate {gate} takes {GATE_ARITY[gate]} qubit(s), got {len(targets)}"
        )
    if gate == "CNOT":
        # little-endian: control is bit 0 of the 4x4 index
        return apply_matrix(state, GATE_MATRICES["CNOT"], [targets[0], targets[1]])
    return apply_matrix(state, GATE_MATRICES[gate], targets)


def apply_pauli(state: StateVector, qubit: int, a: int, b: int) -> StateVector:
    """Apply X^a Z^b to ``qubit`` (Z first, then X)."""
    if b & 1:
        state = apply_gate(state, "Z", [qubit])
    if a & 1:
        state = apply_gate(state, "X", [qubit])
    return state


def run_circuit(state: StateVector, gates) -> StateVector:
    """Apply a sequence of ``(kind, targets)`` pairs."""
    for kind, targets in gates:
        state = apply_gate(state, kind, targets)
    return state


def make_epr() -> StateVector:
    return StateVector(2, np.array([1, 0, 0, 1], dtype=complex) / SQRT2)


def measure_z(
    state: StateVector, qubit: int, rng: np.random.Generator, forced: int | None = None
) -> tuple[int, StateVector]:
    """Born-rule measurement in the computational basis.

    ``forced`` postselects an outcome; it must have non-zero probability.
    """
    n = state.num_qubits
    if not 0 <= qubit < n:
        raise QuantumError(f"qubit {qubit} out of range for {n} qubits")
    idx = np.arange(2**n)
    mask = ((idx >> qubit) & 1).astype(bool)
    p1 = float(np.sum(np.abs(state.amplitudes[mask]) ** 2))
    if forced is None:
        outcome = int(rng.random() < p1)
    else:
        outcome = int(forced)
    prob = p1 if outcome else 1.0 - p1
    if prob < 1e-15:
        raise QuantumError(f"outcome {outcome} has zero probability")
    amps = np.where(mask == bool(outcome), state.amplitudes, 0)
    return outcome, StateVector(n, amps / np.sqrt(prob))


def drop_qubits(state: StateVector, qubits) -> StateVector:
    """Remove qubits that are in a definite computational basis state."""
    qubits = sorted({int(q) for q in qubits}, reverse=True)
    psi = _as_tensor(state)
    n = state.num_qubits
    for q in qubits:
        ax = _axis(n, q)
        slices = [np.take(psi, v, axis=ax) for v in (0, 1)]
        weights = [np.sum(np.abs(s) ** 2) for s in slices]
        keep = int(np.argmax(weights))
        if weights[1 - keep] > 1e-12:
            raise QuantumError(f"qubit {q} is not in a basis state")
        psi = slices[keep]
        n -= 1
    return StateVector(n, np.asarray(psi).reshape(-1))


def move_qubit(state: StateVector, src: int, dst: int) -> StateVector:
    """Relabel qubit ``src`` as ``dst``, shifting the qubits in between."""
    n = state.num_qubits
    order = list(range(n))
    order.insert(dst, order.pop(src))
    # order[new] = old
    psi = _as_tensor(state)
    perm = [_axis(n, order[_axis(n, ax)]) for ax in range(n)]
    return StateVector(n, np.transpose(psi, perm).reshape(-1))


def teleport(
    state: StateVector,
    src: int,
    epr: tuple[int, int],
    rng: np.random.Generator,
    forced: tuple[int, int] | None = None,
) -> tuple[StateVector, int, int]:
    """Bell-measure ``src`` with ``epr[0]``; ``epr[1]`` then holds X^a Z^b |psi>.

    Returns the collapsed state and the outcomes (a, b): ``a`` from the EPR
    half, ``b`` from the source.  Outcomes are uniform regardless of the input,
    so ``forced`` postselection is always possible.
    """
    half_a, half_b = epr
    if len({src, half_a, half_b}) != 3:
        raise QuantumError("teleport source must be disjoint from the EPR pair")
    state = apply_gate(state, "CNOT", [src, half_a])
    state = apply_gate(state, "H", [src])
    fa, fb = (None, None) if forced is None else forced
    b, state = measure_z(state, src, rng, forced=fb)
    a, state = measure_z(state, half_a, rng, forced=fa)
    return state, a, b


def qotp_encrypt(state: StateVector, key) -> StateVector:
    """Apply X^a Z^b to every qubit; ``key`` is a sequence of (a, b) pairs."""
    key = list(key)
    if len(key) != state.num_qubits:
        raise QuantumError(
            f"QOTP key covers {len(key)} qubits, state has {state.num_qubits}"
        )
    for q, (a, b) in enumerate(key):
        state = apply_pauli(state, q, a, b)
    return state


def qotp_decrypt(state: StateVector, key) -> StateVector:
    key = list(key)
    if len(key) != state.num_qubits:
        raise QuantumError(
            f"QOTP key covers {len(key)} qubits, state has {state.num_qubits}"
        )
    for q, (a, b) in enumerate(key):
        if a & 1:
            state = apply_gate(state, "X", [q])
        if b & 1:
            state = apply_gate(state, "Z", [q])
    return state


def random_qotp_key(num_qubits: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    bits = rng.integers(0, 2, size=(num_qubits, 2))
    return [(int(a), int(b)) for a, b in bits]


def fidelity(s1: StateVector, s2: StateVector) -> float:
    if s1.num_qubits != s2.num_qubits:
        raise QuantumError(
            f"dimension mismatch: {s1.num_qubits} vs {s2.num_qubits} qubits"
        )
    f = abs(np.vdot(s1.amplitudes, s2.amplitudes)) ** 2
    return float(min(1.0, max(0.0, f)))


def density_matrix(state: StateVector) -> np.ndarray:
    return np.outer(state.amplitudes, state.amplitudes.conj())


def reduced_density_matrix(state: StateVector, keep) -> np.ndarray:
    """Partial trace onto ``keep`` (keep[0] becomes the low bit of the result)."""
    keep = [int(q) for q in keep]
    n = state.num_qubits
    psi = _as_tensor(state)
    keep_axes = [_axis(n, q) for q in reversed(keep)]
    rest = [ax for ax in range(n) if ax not in keep_axes]
    psi = np.transpose(psi, keep_axes + rest).reshape(2 ** len(keep), -1)
    return psi @ psi.conj().T


def state_fidelity_with_rho(psi: StateVector, rho: np.ndarray) -> float:
    return float(np.real(np.vdot(psi.amplitudes, rho @ psi.amplitudes)))
