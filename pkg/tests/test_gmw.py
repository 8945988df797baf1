import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpqc import gmw
from mpqc.circuits import CircuitBuilder, CircuitError, and_chain_circuit, random_bool_circuit
from mpqc.network import Network


def _random_inputs(circ, rng):
    return {p: [int(b) for b in rng.integers(0, 2, len(ws))] for p, ws in circ.inputs.items()}


def test_share_and_reconstruct(rng):
    for n in (2, 3, 5):
        for bit in (0, 1):
            shares = gmw.share_input(bit, n - 1, n, rng)
            assert len(shares) == n and gmw.reconstruct(shares) == bit
    with pytest.raises(ValueError):
        gmw.share_input(1, 0, 1, rng)


def test_non_owner_shares_uniform(rng):
    draws = np.array([gmw.share_input(1, 0, 3, rng)[1:] for _ in range(4000)])
    assert np.all(np.abs(draws.mean(axis=0) - 0.5) < 0.03)


def test_local_gates(rng):
    for x, y in itertools.product((0, 1), repeat=2):
        sx, sy = gmw.share_input(x, 0, 3, rng), gmw.share_input(y, 1, 3, rng)
        assert gmw.reconstruct(gmw.gate_xor(sx, sy)) == x ^ y
        assert gmw.reconstruct(gmw.gate_not(sx)) == 1 - x
    with pytest.raises(ValueError):
        gmw.gate_xor(np.zeros(2, np.uint8), np.zeros(3, np.uint8))


@pytest.mark.parametrize("x,y", list(itertools.product((0, 1), repeat=2)))
def test_two_party_and_truth_table(x, y, rng):
    net = Network([0, 1])
    z = gmw.gate_and2(gmw.share_input(x, 0, 2, rng), gmw.share_input(y, 1, 2, rng), net, rng)
    assert gmw.reconstruct(z) == x & y
    assert net.rounds == gmw.OT_ROUNDS


@pytest.mark.parametrize("n", [2, 3, 4])
def test_n_party_and_truth_table(n, rng):
    for x, y in itertools.product((0, 1), repeat=2):
        net = Network(range(n))
        z = gmw.gate_andn(gmw.share_input(x, 0, n, rng), gmw.share_input(y, n - 1, n, rng), net, rng)
        assert gmw.reconstruct(z) == x & y


def test_xor_only_circuit_costs_one_round(rng):
    b = CircuitBuilder()
    out = b.not_(b.xor(b.input(0), b.input(1), b.input(0)))
    circ = b.build([out])
    outs, rounds = gmw.run_gmw(circ, {0: [1, 0], 1: [1]}, 2, rng)
    assert outs == circ.evaluate({0: [1, 0], 1: [1]}) and rounds == 1


def test_single_and_costs_input_round_plus_ot(rng):
    b = CircuitBuilder()
    circ = b.build([b.and_(b.input(0), b.input(1))])
    net = Network([0, 1])
    outs, rounds = gmw.run_gmw(circ, {0: [1], 1: [1]}, 2, rng, net)
    assert outs == [1]
    # count from the transcript: one sharing round then the two OT message rounds
    assert net.transcript.tags() == [["gmw-share"], ["ot-keys"], ["ot-cts"]]
    assert [len(r.messages) for r in net.transcript.rounds] == [2, 1, 1]
    assert rounds == 1 + gmw.OT_ROUNDS


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(1, 14), st.integers(0, 2**32 - 1))
def test_random_circuits_match_plaintext(n, gates, seed):
    rng = np.random.default_rng(seed)
    circ = random_bool_circuit(n, gates, rng, fanout_one=False)
    ins = _random_inputs(circ, rng)
    outs, rounds = gmw.run_gmw(circ, ins, n, rng)
    assert outs == circ.evaluate(ins)
    assert rounds == 1 + gmw.OT_ROUNDS * circ.and_depth


def test_rounds_depend_on_and_depth_not_size(rng):
    small, big = and_chain_circuit(3), and_chain_circuit(3, extra_xors=40)
    r1 = gmw.run_gmw(small, _random_inputs(small, rng), 2, rng)[1]
    r2 = gmw.run_gmw(big, _random_inputs(big, rng), 2, rng)[1]
    assert r1 == r2 == 1 + 2 * 3
    depths = [gmw.run_gmw(c, _random_inputs(c, rng), 2, rng)[1]
              for c in (and_chain_circuit(d) for d in (1, 2, 4))]
    assert depths == [3, 5, 9]


def test_parallel_ands_share_a_layer(rng):
    b = CircuitBuilder()
    outs = [b.and_(b.input(0), b.input(1)) for _ in range(10)]
    circ = b.build(outs)
    ins = _random_inputs(circ, rng)
    got, rounds = gmw.run_gmw(circ, ins, 3, rng)
    assert got == circ.evaluate(ins) and rounds == 3


def test_open_shares_to_subset(rng):
    net = Network(range(3))
    vals = [gmw.share_input(b, 0, 3, rng) for b in (1, 0, 1)]
    assert gmw.open_shares(net, vals, recipients=[2]) == [1, 0, 1]
    assert net.rounds == 1
    assert all(m.receiver == 2 for m in net.transcript.rounds[0].messages)


def test_input_errors(rng):
    b = CircuitBuilder()
    circ = b.build([b.and_(b.input(0), b.input(3))])
    with pytest.raises(CircuitError):
        gmw.run_gmw(circ, {0: [1], 3: [1]}, 2, rng)
    b = CircuitBuilder()
    circ = b.build([b.and_(b.input(0), b.input(1))])
    with pytest.raises(CircuitError):
        gmw.run_gmw(circ, {0: [1, 1], 1: [0]}, 2, rng)
