"""One test per acceptance criterion, each printing a PASS/FAIL line."""

import itertools

import numpy as np
from scipy import stats

from mpqc import bmr, crypto, dqre, harness, protocols, qsim
from mpqc.circuits import bool_corpus, depth_sweep_circuit, quantum_corpus
from mpqc.network import Network
from mpqc.pauliframe import conjugate_through_T

FID_TOL = 1e-9
DEPTHS = (1, 2, 5, 10, 20)


def _split(F, n, rng):
    sizes = [F.num_qubits // n + (1 if j < F.num_qubits % n else 0) for j in range(n)]
    return [qsim.random_state(s, rng) for s in sizes]


def test_criterion_1_correctness_oracle(criterion):
    corpus = quantum_corpus(30)
    assert all(c.num_qubits <= 4 and len(c.gates) <= 8 for c in corpus)
    rng = np.random.default_rng(101)
    worst = {"two-party": 1.0, 2: 1.0, 3: 1.0, 4: 1.0}
    for ci, F in enumerate(corpus):
        for trial in range(10):
            seed = 1000 * ci + trial
            x, y = _split(F, 2, rng)
            res = protocols.run_two_party(F, x, y, seed=seed)
            want = qsim.run_circuit(qsim.tensor(x, y), F.pairs())
            worst["two-party"] = min(worst["two-party"], *(qsim.fidelity(o, want) for o in res.outputs))
            for n in (2, 3, 4):
                inputs = _split(F, n, rng)
                want = qsim.run_circuit(qsim.tensor(*inputs), F.pairs())
                res = protocols.run_multi_party(F, inputs, n, seed=seed)
                worst[n] = min(worst[n], *(qsim.fidelity(o, want) for o in res.outputs))
    ok = all(abs(1 - f) <= FID_TOL for f in worst.values())
    detail = ", ".join(f"{k}: min fidelity {v:.12f}" for k, v in worst.items())
    assert criterion(1, ok, f"30 circuits x 10 inputs; {detail}")


def test_criterion_2_constant_rounds(criterion):
    sizes = [len(depth_sweep_circuit(d).gates) for d in DEPTHS]
    reports = {p: harness.rounds_report(harness.run_sweep(p, DEPTHS, seed=5), p) for p in harness.PROTOCOLS}
    summary = {p: [row["rounds"] for row in r.table] for p, r in reports.items()}
    ok = (
        all(reports[p].constant for p in ("two-party", "multi-party", "clifford"))
        and reports["gmw"].increasing
        and max(sizes) >= 20 * min(sizes)
    )
    assert criterion(2, ok, f"rounds over depths {DEPTHS}: {summary}; gate counts {sizes}")


def test_criterion_3_garbling_depth_bounds(criterion):
    bounds = {"lam": 1, "sigma": 4, "labels": 6}
    worst = {name: 0 for name in bounds}
    circuits = bool_corpus() + [protocols._xor_chain_circuit(4, 3)]
    for circ, n, k in itertools.product(circuits, (2, 3, 4), (2, 4)):
        gc = bmr.build_garbling_circuits(circ, n, k)
        for name in bounds:
            worst[name] = max(worst[name], gc.depths[name])
    ok = all(worst[name] <= bounds[name] for name in bounds)
    assert criterion(3, ok, f"max measured depths {worst} vs bounds {bounds}")


def test_criterion_4_bmr_equivalence(criterion):
    rng = np.random.default_rng(404)
    identical = correct = 0
    corpus = bool_corpus()
    evaluations = 0
    for circ in corpus:
        n = max(circ.inputs) + 1
        W, l = circ.num_wires, len(circ.outputs)
        order = [(p, i) for p in sorted(circ.inputs) for i in range(len(circ.inputs[p]))]
        assert len(order) <= 8
        rands = [bmr.PartyRandomness.random(W, l, 4, rng) for _ in range(n)]
        all_ok = True
        for bits in itertools.product((0, 1), repeat=len(order)):
            ins = {p: [0] * len(ws) for p, ws in circ.inputs.items()}
            for (p, i), b in zip(order, bits):
                ins[p][i] = b
            prog = bmr.garble_dealer(circ, rands, ins)
            all_ok &= bmr.bmr_evaluate(prog, circ) == circ.evaluate(ins)
            evaluations += 1
        correct += all_ok
        ins = {p: [int(b) for b in rng.integers(0, 2, len(ws))] for p, ws in circ.inputs.items()}
        dealer = bmr.garble_dealer(circ, rands, ins)
        joint = bmr.garble_with_gmw(circ, rands, ins, Network(range(n)), rng)
        identical += dealer.to_bytes() == joint.to_bytes()
    ok = identical == correct == len(corpus)
    assert criterion(
        4, ok,
        f"{identical}/{len(corpus)} bit-identical dealer vs GMW; "
        f"{correct}/{len(corpus)} circuits correct over {evaluations} exhaustive evaluations",
    )


def test_criterion_5_qotp_mixing(criterion):
    rng = np.random.default_rng(505)
    honest = harness.check_qotp_mixing(rng, sabotage=False, samples=200)
    broken = harness.check_qotp_mixing(rng, sabotage=True)
    ok = honest.passed and honest.statistic <= 1e-12 and not broken.passed
    assert criterion(
        5, ok,
        f"max |avg rho - I/2| = {honest.statistic:.2e}; sabotaged keys give {broken.statistic:.3f} (fails)",
    )


def test_criterion_6_dqre_identity_and_masking(criterion):
    rng = np.random.default_rng(606)
    corpus = quantum_corpus(30)
    worst = 1.0
    for F in corpus:
        prog = dqre.compile(F)
        for _ in range(20):
            s = qsim.random_state(F.num_qubits, rng)
            out = dqre.decode(dqre.encode(prog, s, rng), rng)
            worst = min(worst, qsim.fidelity(out, qsim.run_circuit(s, F.pairs())))
    # masking audit on a two-qubit corpus circuit containing T and CNOT
    F = next(c for c in corpus if c.num_qubits == 2 and any(g.kind == "CNOT" for g in c.gates))
    avg = dqre.masked_marginal_average(dqre.compile(F), qsim.random_state(2, rng), 10_000, rng)
    dev = max(float(np.max(np.abs(rho - np.eye(2) / 2))) for rho in avg.values())
    ok = abs(1 - worst) <= FID_TOL and dev <= 1e-3
    assert criterion(
        6, ok,
        f"min decode fidelity {worst:.12f} over 30x20 runs; "
        f"max masked-marginal deviation {dev:.2e} over {len(avg)} wires, 10^4 draws",
    )


def test_criterion_7_qubit_flipping(criterion):
    rng = np.random.default_rng(707)
    without = protocols.flipping_experiment(10_000, rng, flipping=False)
    with_flip = protocols.flipping_experiment(10_000, rng, flipping=True)
    ok = np.allclose(without, 1.0, atol=1e-12) and abs(with_flip.mean() - 0.5) <= 0.02
    assert criterion(
        7, ok,
        f"without flipping min fidelity {without.min():.6f}; with flipping mean {with_flip.mean():.4f}",
    )


def test_criterion_8_ot_contract(criterion):
    rng = np.random.default_rng(808)
    trials = 10_000
    choices = rng.integers(0, 2, trials)
    values = rng.integers(0, 2, (trials, 2, 8)).astype(np.uint8)
    net = Network([0, 1])
    reqs = [crypto.OTRequest(0, 1, values[i], int(choices[i])) for i in range(trials)]
    got = crypto.ot_batch(net, reqs, rng)
    correct = all(np.array_equal(g, values[i, choices[i]]) for i, g in enumerate(got))
    (view,) = crypto.sender_views(net)
    bucket = (view[:, 0] > crypto.PRIME // 2).astype(int) + 2 * (view[:, 1] > crypto.PRIME // 2)
    table = np.zeros((4, 2))
    np.add.at(table, (bucket, choices), 1)
    p = stats.chi2_contingency(table)[1]

    def replay(seed):
        r = np.random.default_rng(seed)
        n = Network([0, 1])
        crypto.ot2(n, 0, 1, [1, 0, 1], [0, 1, 1], 1, r)
        return n.transcript.to_json()

    deterministic = replay(3) == replay(3)
    ok = correct and p > 0.01 and deterministic
    assert criterion(
        8, ok,
        f"receiver correct {correct} over {trials}; sender view vs choice p = {p:.3f}; "
        f"deterministic transcripts {deterministic}",
    )


def test_criterion_9_T_rule(criterion):
    X = np.array([[0, 1], [1, 0]], complex)
    Z = np.diag([1, -1]).astype(complex)
    P = np.diag([1, 1j])
    T = np.diag([1, np.exp(1j * np.pi / 4)])
    matched = 0
    for a, b in itertools.product((0, 1), repeat=2):
        a2, b2, p = conjugate_through_T(a, b)
        lhs = T @ np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b)
        rhs = (np.linalg.matrix_power(X, a2) @ np.linalg.matrix_power(Z, b2)
               @ np.linalg.matrix_power(P, p) @ T)
        k = np.unravel_index(np.argmax(np.abs(rhs)), rhs.shape)
        phase = lhs[k] / rhs[k]
        matched += abs(abs(phase) - 1) < 1e-12 and np.allclose(lhs, phase * rhs, atol=1e-12)
    assert criterion(9, matched == 4, f"{matched}/4 (a, b) cases match the 2x2 matrix oracle")
