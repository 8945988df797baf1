import numpy as np
import pytest

from mpqc import protocols, qsim
from mpqc.circuits import QuantumCircuit, depth_sweep_circuit, quantum_corpus
from mpqc.pauliframe import NonCliffordError, PauliMask

CORPUS = quantum_corpus()


def _oracle(F, inputs):
    return qsim.run_circuit(qsim.tensor(*inputs), F.pairs())


def _split(F, n, rng):
    sizes = [F.num_qubits // n + (1 if j < F.num_qubits % n else 0) for j in range(n)]
    return [qsim.random_state(s, rng) for s in sizes]


def _assert_all_correct(res, want):
    for out in res.outputs:
        assert qsim.fidelity(out, want) >= 1 - 1e-9


def test_two_party_cnot_example():
    F = QuantumCircuit(2, [("CNOT", (0, 1))])
    res = protocols.run_two_party(F, qsim.basis_state([1]), qsim.basis_state([1]), seed=3)
    want = qsim.basis_state([1, 0])  # Alice's qubit 0 stays 1, Bob's target flips to 0
    _assert_all_correct(res, want)
    assert len(res.outputs) == 2


def test_two_party_identity(rng):
    x, y = qsim.random_state(1, rng), qsim.random_state(1, rng)
    res = protocols.run_two_party(QuantumCircuit(2, []), x, y, seed=1)
    _assert_all_correct(res, qsim.tensor(x, y))


@pytest.mark.parametrize("idx", range(0, 30, 4))
def test_two_party_corpus(idx, rng):
    F = CORPUS[idx]
    x, y = _split(F, 2, rng)
    _assert_all_correct(protocols.run_two_party(F, x, y, seed=idx), _oracle(F, [x, y]))


def test_two_party_message_flow(rng):
    F = CORPUS[2]
    x, y = _split(F, 2, rng)
    res = protocols.run_two_party(F, x, y, seed=0)
    assert res.transcript.tags() == [
        ["quantum"],
        ["garbled", "quantum"],
        ["ot-keys"],
        ["ot-cts"],
        ["quantum"],
    ]
    senders = [{m.sender for m in r.messages} for r in res.transcript.rounds]
    assert senders == [{0}, {1}, {0}, {1}, {0}]


def test_two_party_rounds_constant_over_depth(rng):
    counts = set()
    for d in (1, 5, 20):
        F = depth_sweep_circuit(d)
        counts.add(protocols.run_two_party(F, *_split(F, 2, rng), seed=d).rounds)
    assert counts == {5}


def test_two_party_rejects_size_mismatch(rng):
    with pytest.raises(Exception):
        protocols.run_two_party(QuantumCircuit(3, []), qsim.zero_state(1), qsim.zero_state(1))


def test_multi_party_cnot_chain_example():
    F = QuantumCircuit(3, [("CNOT", (0, 1)), ("CNOT", (1, 2))])
    inputs = [qsim.basis_state([1]), qsim.basis_state([0]), qsim.basis_state([0])]
    res = protocols.run_multi_party(F, inputs, 3, seed=2)
    _assert_all_correct(res, qsim.basis_state([1, 1, 1]))
    assert len(res.outputs) == 3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_multi_party_corpus_sample(n, rng):
    for idx in (1, 10, 20):
        F = CORPUS[idx]
        inputs = _split(F, n, rng)
        _assert_all_correct(protocols.run_multi_party(F, inputs, n, seed=idx), _oracle(F, inputs))


def test_two_party_and_multi_party_agree_for_n2(rng):
    for i in range(10):
        F = CORPUS[i]
        x, y = _split(F, 2, rng)
        a = protocols.run_two_party(F, x, y, seed=i).outputs[0]
        b = protocols.run_multi_party(F, [x, y], 2, seed=i).outputs[0]
        assert qsim.fidelity(a, b) >= 1 - 1e-9


def test_multi_party_round_structure(rng):
    F = CORPUS[4]
    res = protocols.run_multi_party(F, _split(F, 3, rng), 3, seed=0)
    tags = res.transcript.tags()
    assert res.rounds == 8
    assert tags[0] == ["quantum"] and tags[1] == ["gmw-share"] and tags[-1] == ["quantum"]
    assert tags[-2] == ["garbled-tables"]


def test_multi_party_rounds_constant_over_depth(rng):
    counts = {
        protocols.run_multi_party(depth_sweep_circuit(d), _split(depth_sweep_circuit(d), 2, rng), 2, seed=d).rounds
        for d in (1, 5, 10, 20)
    }
    assert counts == {8}


def test_multi_party_input_errors(rng):
    F = QuantumCircuit(2, [])
    with pytest.raises(ValueError):
        protocols.run_multi_party(F, [qsim.zero_state(2)], 1)
    with pytest.raises(Exception):
        protocols.run_multi_party(F, [qsim.zero_state(1)] * 3, 3)


def test_runs_are_deterministic(rng):
    F = CORPUS[6]
    inputs = _split(F, 3, rng)
    a = protocols.run_multi_party(F, inputs, 3, seed=11)
    b = protocols.run_multi_party(F, inputs, 3, seed=11)
    c = protocols.run_multi_party(F, inputs, 3, seed=12)
    assert a.transcript.to_json() == b.transcript.to_json() != c.transcript.to_json()


def test_clifford_fast_path_H_example():
    F = QuantumCircuit(1, [("H", (0,))])
    res = protocols.run_clifford_fast_path(F, [qsim.zero_state(1), qsim.zero_state(0)], 2, seed=0)
    _assert_all_correct(res, qsim.from_vector([1, 1]))
    assert res.rounds == 4


@pytest.mark.parametrize("flipping", [True, False])
def test_clifford_fast_path_corpus(flipping, rng):
    for F in quantum_corpus(8, seed=5, clifford_only=True):
        inputs = _split(F, 3, rng)
        res = protocols.run_clifford_fast_path(F, inputs, 3, seed=1, flipping=flipping)
        _assert_all_correct(res, _oracle(F, inputs))


def test_clifford_fast_path_rejects_T():
    with pytest.raises(NonCliffordError):
        protocols.run_clifford_fast_path(QuantumCircuit(1, [("T", (0,))]), [qsim.zero_state(1)] * 2)


def test_flipping_zero_shares_leave_masks():
    m = PauliMask([1, 0], [0, 1])
    fs = protocols.FlipShares(np.zeros((3, 2), np.uint8), np.zeros((3, 2), np.uint8))
    assert protocols.apply_qubit_flipping(m, fs) == m


def test_flipping_xor_of_shares():
    m = PauliMask([0], [0])
    fs = protocols.FlipShares(np.array([[1], [0], [1]]), np.array([[1], [0], [0]]))
    assert protocols.apply_qubit_flipping(m, fs) == PauliMask([0], [1])


def test_flipping_leaves_output_wires():
    m = PauliMask([0, 0], [0, 0])
    fs = protocols.FlipShares(np.ones((1, 2), np.uint8), np.ones((1, 2), np.uint8), [True, False])
    assert protocols.apply_qubit_flipping(m, fs) == PauliMask([1, 0], [1, 0])


def test_flipping_requires_full_cover():
    with pytest.raises(ValueError):
        protocols.apply_qubit_flipping(PauliMask.zeros(2), protocols.FlipShares.random(2, 3, np.random.default_rng(0)))


def test_flipped_bit_uniform_given_other_shares(rng):
    from scipy import stats

    table = np.zeros((2, 2))
    for _ in range(10_000):
        fs = protocols.FlipShares.random(3, 1, rng)
        out = protocols.apply_qubit_flipping(PauliMask.zeros(1), fs)
        table[int(fs.a[1, 0] ^ fs.a[2, 0]), int(out.a[0])] += 1
    assert stats.chi2_contingency(table)[1] > 0.01


def test_flipping_experiment_distinction(rng):
    assert np.allclose(protocols.flipping_experiment(200, rng, flipping=False), 1.0)
    assert abs(protocols.flipping_experiment(4000, rng, flipping=True).mean() - 0.5) < 0.03


def test_collusion_probe(rng):
    fids = protocols.collusion_probe(4000, rng)
    assert fids.mean() <= 0.5 + 3 * 0.5 / np.sqrt(4000)
    assert np.allclose(protocols.collusion_probe(50, rng, sabotage=True), 1.0)


def test_e_table_formula_agrees_with_int_evaluation():
    from mpqc.pauliframe import correction_element, px_elements

    for r in px_elements():
        for p in (0, 1):
            assert protocols.e_table_bits(r, p) == correction_element(p, r).bits()
