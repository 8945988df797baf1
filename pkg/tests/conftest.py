import numpy as np
import pytest

from mpqc import qsim


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_operator(kind, targets, n):
    """Full 2^n x 2^n matrix built from Kronecker products (little-endian)."""
    mats = {
        "I": np.eye(2),
        "X": np.array([[0, 1], [1, 0]]),
        "Z": np.diag([1, -1]),
        "H": np.array([[1, 1], [1, -1]]) / np.sqrt(2),
        "P": np.diag([1, 1j]),
        "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    }
    if kind == "CNOT":
        c, t = targets
        dim = 2**n
        op = np.zeros((dim, dim), complex)
        for i in range(dim):
            j = i ^ (1 << t) if (i >> c) & 1 else i
            op[j, i] = 1
        return op
    (q,) = targets
    op = np.array([[1.0]])
    for k in reversed(range(n)):  # most significant qubit first in kron
        op = np.kron(op, mats[kind] if k == q else np.eye(2))
    return op


def dense_run(gates, n, vec):
    for kind, targets in gates:
        vec = dense_operator(kind, targets, n) @ vec
    return vec


def tensor_inputs(states):
    return qsim.tensor(*states)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion and print its line."""

    def record(number: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE[number] = (bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
