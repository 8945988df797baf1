"""Run configuration, round-count sweeps and the privacy-audit battery."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import bmr, crypto, protocols, qsim
from .circuits import CircuitBuilder, QuantumCircuit, and_chain_circuit, depth_sweep_circuit
from .gmw import run_gmw
from .network import Network, Transcript
from .pauliframe import PauliMask

SEED_ENV = "MPQC_SEED"
P_THRESHOLD = 0.01
QOTP_TOL = 1e-12
DEFAULT_DEPTHS = (1, 2, 5, 10, 20)
PROTOCOLS = ("two-party", "multi-party", "clifford", "gmw")


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


@dataclass
class RunConfig:
    protocol: str = "multi-party"
    circuit: str | None = None
    n: int = 3
    k: int = protocols.DEFAULT_K
    seed: int = field(default_factory=default_seed)
    trials: int = 10_000
    sabotage: tuple[str, ...] = ()

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# ------------------------------------------------------------ rounds


@dataclass
class RoundsReport:
    protocol: str
    table: list[dict]
    constant: bool
    increasing: bool

    @property
    def passed(self) -> bool:
        # GMW is the negative control: it passes by growing with depth.
        return self.increasing if self.protocol == "gmw" else self.constant

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "table": self.table,
            "constant": self.constant,
            "increasing": self.increasing,
            "passed": self.passed,
        }


def rounds_report(sweep, protocol: str = "mpqc") -> RoundsReport:
    """Tabulate rounds per depth; ``sweep`` maps depth to a transcript or a count."""
    items = sorted(dict(sweep).items())
    if len(items) < 2:
        raise ValueError("need >= 2 depths")
    table = []
    for depth, t in items:
        rounds = t.num_rounds if isinstance(t, Transcript) else int(t)
        table.append({"depth": int(depth), "rounds": rounds})
    counts = [row["rounds"] for row in table]
    return RoundsReport(
        protocol,
        table,
        constant=len(set(counts)) == 1,
        increasing=all(a < b for a, b in zip(counts, counts[1:])),
    )


def _sweep_inputs(num_parties: int, rng) -> list[qsim.StateVector]:
    return [qsim.random_state(1, rng) for _ in range(num_parties)]


def run_sweep(protocol: str, depths=DEFAULT_DEPTHS, seed: int = 0, n: int = 2) -> dict[int, Transcript]:
    """One run per depth; quantum protocols use ``n`` single-qubit parties."""
    out = {}
    for d in depths:
        rng = np.random.default_rng([seed, d])
        if protocol == "gmw":
            # Same depth axis, measured on a chain of d sequential ANDs.
            circ = and_chain_circuit(d, extra_xors=d)
            net = Network(range(2))
            ins = {p: [int(b) for b in rng.integers(0, 2, len(circ.inputs.get(p, [])))] for p in (0, 1)}
            run_gmw(circ, ins, 2, rng, net)
            out[d] = net.transcript
            continue
        F = depth_sweep_circuit(d, num_qubits=n, clifford_only=protocol == "clifford")
        inputs = _sweep_inputs(n, rng)
        if protocol == "two-party":
            res = protocols.run_two_party(F, inputs[0], qsim.tensor(*inputs[1:]), seed=seed)
        elif protocol == "multi-party":
            res = protocols.run_multi_party(F, inputs, n, seed=seed)
        elif protocol == "clifford":
            res = protocols.run_clifford_fast_path(F, inputs, n, seed=seed)
        else:
            raise ValueError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
        out[d] = res.transcript
    return out


# ------------------------------------------------------ privacy audit


@dataclass
class CheckResult:
    name: str
    passed: bool
    statistic: float
    p_value: float | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _independence(x, y) -> tuple[float, float]:
    """Chi-square test of independence between two small-alphabet samples."""
    x = np.asarray(x, int)
    y = np.asarray(y, int)
    table = np.zeros((x.max() + 1, y.max() + 1))
    np.add.at(table, (x, y), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        # A constant variable carries no information about the other one.
        return 0.0, 1.0
    chi2, p, _, _ = stats.chi2_contingency(table, correction=False)
    return float(chi2), float(p)


def check_qotp_mixing(rng, sabotage: bool = False, samples: int = 64) -> CheckResult:
    """Exact average over the four keys of X^a Z^b rho Z^b X^a equals I/2."""
    worst = 0.0
    states = [qsim.basis_state([0]), qsim.basis_state([1])]
    states += [qsim.random_state(1, rng) for _ in range(samples)]
    keys = [[(0, 0)]] * 4 if sabotage else [[(a, b)] for a in (0, 1) for b in (0, 1)]
    for s in states:
        rho = sum(qsim.density_matrix(qsim.qotp_encrypt(s, key)) for key in keys) / 4
        worst = max(worst, float(np.max(np.abs(rho - np.eye(2) / 2))))
    return CheckResult("qotp_mixing", worst <= QOTP_TOL, worst, detail="max |avg rho - I/2|")


def check_ot_independence(rng, trials: int, sabotage: bool = False) -> CheckResult:
    """Sender's view (key in slot 0) must carry no information about the choice bit."""
    oblivious = (lambda r, size=(): np.ones(size, np.uint64)) if sabotage else None
    net = Network([0, 1])
    choices = rng.integers(0, 2, trials)
    reqs = [crypto.OTRequest(0, 1, np.array([[0], [1]], np.uint8), int(c)) for c in choices]
    got = crypto.ot_batch(net, reqs, rng, oblivious_key=oblivious)
    correct = all(int(g[0]) == int(c) for g, c in zip(got, choices))
    (view,) = crypto.sender_views(net)
    bucket = (view[:, 0] > crypto.PRIME // 2).astype(int) + 2 * (view[:, 0] % 2 == 1)
    chi2, p = _independence(bucket, choices)
    ok = correct and p > P_THRESHOLD
    return CheckResult("ot_independence", ok, chi2, p, f"receiver correct: {correct}")


def check_label_independence(rng, trials: int, sabotage: bool = False, k: int = 4) -> CheckResult:
    """External bits on non-output wires of a garbled AND are independent of the values."""
    b = CircuitBuilder()
    x, y = b.input(0), b.input(1)
    circ = b.build([b.and_(x, y)], outputs_last=True)
    W, l = circ.num_wires, len(circ.outputs)
    values, externals = [], []
    for _ in range(trials):
        rands = [bmr.PartyRandomness.random(W, l, k, rng) for _ in range(2)]
        if sabotage:
            for r in rands:
                r.lam[:] = 0
        bits = [int(v) for v in rng.integers(0, 2, 2)]
        prog = bmr.garble_dealer(circ, rands, {0: [bits[0]], 1: [bits[1]]})
        sig = bmr.evaluate_signals(prog, circ)
        for w, v in zip((x, y), bits):
            values.append(v)
            externals.append(int(sig[w][-1]))
    chi2, p = _independence(values, externals)
    return CheckResult("label_independence", p > P_THRESHOLD, chi2, p)


def check_flip_uniformity(rng, trials: int, n: int = 3, sabotage: bool = False) -> CheckResult:
    """Given n-1 parties' flip shares, the flipped mask bit stays uniform."""
    known, flipped = [], []
    for _ in range(trials):
        fs = protocols.FlipShares.random(n, 1, rng)
        if sabotage:
            fs.a[0] = 0
        mask = PauliMask(np.zeros(1, np.uint8), np.zeros(1, np.uint8))
        out = protocols.apply_qubit_flipping(mask, fs)
        known.append(int(np.bitwise_xor.reduce(fs.a[1:, 0])))
        flipped.append(int(out.a[0]))
    chi2, p = _independence(known, flipped)
    return CheckResult("flip_uniformity", p > P_THRESHOLD, chi2, p)


def check_collusion(rng, trials: int, n: int = 3, sabotage: bool = False) -> CheckResult:
    """Coalition reconstruction fidelity must not exceed 1/2 by more than 3 sigma."""
    fids = protocols.collusion_probe(trials, rng, n, sabotage=sabotage)
    mean = float(fids.mean())
    bound = 0.5 + 3 * 0.5 / np.sqrt(trials)
    return CheckResult("collusion_probe", bool(mean <= bound), mean, detail=f"bound {bound:.4f}")


CHECKS = ("qotp_mixing", "ot_independence", "label_independence", "flip_uniformity", "collusion_probe")


@dataclass
class AuditReport:
    config: RunConfig
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }


def privacy_audit(config: RunConfig) -> AuditReport:
    if config.trials < 1000:
        raise ValueError("privacy audit needs at least 1000 trials")
    unknown = set(config.sabotage) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown sabotage target(s): {sorted(unknown)}")
    sab = set(config.sabotage)
    t = config.trials
    results = [
        check_qotp_mixing(config.rng(1), "qotp_mixing" in sab),
        check_ot_independence(config.rng(2), t, "ot_independence" in sab),
        check_label_independence(config.rng(3), t, "label_independence" in sab, config.k),
        check_flip_uniformity(config.rng(4), t, config.n, "flip_uniformity" in sab),
        check_collusion(config.rng(5), t, config.n, "collusion_probe" in sab),
    ]
    return AuditReport(config, results)


def load_circuit(path: str | None, default: QuantumCircuit) -> QuantumCircuit:
    if path is None:
        return default
    from .circuits import load

    circ = load(path)
    if not isinstance(circ, QuantumCircuit):
        raise ValueError(f"{path} holds a boolean circuit, expected a quantum one")
    return circ
