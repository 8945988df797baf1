import json

import pytest

from mpqc import cli, harness
from mpqc.network import Network


def test_rounds_report_needs_two_depths():
    with pytest.raises(ValueError, match="need >= 2 depths"):
        harness.rounds_report({1: 5})


def test_rounds_report_flags():
    flat = harness.rounds_report({1: 5, 5: 5, 10: 5, 20: 5}, "two-party")
    assert flat.constant and flat.passed and not flat.increasing
    grow = harness.rounds_report({1: 3, 5: 11, 20: 41}, "gmw")
    assert grow.increasing and grow.passed and not grow.constant
    bad = harness.rounds_report({1: 5, 2: 6}, "multi-party")
    assert not bad.passed


def test_rounds_report_accepts_transcripts():
    net = Network([0, 1])
    net.send(0, 1, b"x", "t")
    net.route_round()
    rep = harness.rounds_report({1: net.transcript, 2: net.transcript})
    assert rep.table == [{"depth": 1, "rounds": 1}, {"depth": 2, "rounds": 1}]


@pytest.mark.parametrize("protocol", ["two-party", "multi-party", "clifford"])
def test_sweeps_constant(protocol):
    rep = harness.rounds_report(harness.run_sweep(protocol, (1, 5, 10, 20)), protocol)
    assert rep.constant


def test_gmw_negative_control_grows():
    rep = harness.rounds_report(harness.run_sweep("gmw", (1, 5, 10, 20)), "gmw")
    assert rep.increasing


def test_unknown_protocol():
    with pytest.raises(ValueError):
        harness.run_sweep("teleport-everything", (1, 2))


def test_audit_passes_and_is_deterministic():
    cfg = harness.RunConfig(trials=2000, seed=9)
    a, b = harness.privacy_audit(cfg), harness.privacy_audit(cfg)
    assert a.passed
    assert json.dumps(a.to_dict(), default=str) == json.dumps(b.to_dict(), default=str)
    qotp = next(c for c in a.checks if c.name == "qotp_mixing")
    assert qotp.statistic < 1e-12


@pytest.mark.parametrize("check", harness.CHECKS)
def test_each_check_fails_when_sabotaged(check):
    rep = harness.privacy_audit(harness.RunConfig(trials=2000, seed=4, sabotage=(check,)))
    status = {c.name: c.passed for c in rep.checks}
    assert status[check] is False
    assert all(v for k, v in status.items() if k != check)


def test_audit_argument_checks():
    with pytest.raises(ValueError):
        harness.privacy_audit(harness.RunConfig(trials=10))
    with pytest.raises(ValueError):
        harness.privacy_audit(harness.RunConfig(trials=1000, sabotage=("nope",)))


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(harness.SEED_ENV, "41")
    assert harness.RunConfig().seed == 41
    assert cli.build_parser().parse_args(["run-clifford"]).seed == 41


@pytest.mark.parametrize(
    "argv",
    [
        ["run-two-party", "--seed", "2"],
        ["run-multi-party", "--n", "3", "--seed", "2"],
        ["run-clifford", "--n", "2"],
        ["rounds-report", "--depth-sweep", "1,2,5", "--n", "2"],
        ["privacy-audit", "--trials", "1000"],
        ["garble-bench", "--n", "2"],
    ],
)
def test_cli_verbs_exit_zero(argv, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(argv + ["--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data.get("passed", True) is not False
    capsys.readouterr()


def test_cli_nonzero_on_failed_check(capsys):
    assert cli.main(["privacy-audit", "--trials", "1000", "--sabotage", "qotp_mixing"]) == 1
    assert cli.main(["run-clifford", "--n", "1"]) == 2
    capsys.readouterr()


def test_cli_loads_circuit_file(tmp_path, capsys):
    from mpqc.circuits import quantum_corpus, save

    path = tmp_path / "c.json"
    save(quantum_corpus(1)[0], path)
    assert cli.main(["run-multi-party", "--circuit", str(path), "--n", "2"]) == 0
    capsys.readouterr()


def test_config_json():
    cfg = harness.RunConfig(seed=3)
    assert json.loads(cfg.to_json())["seed"] == 3
    assert cfg.rng(1).integers(1 << 30) != cfg.rng(2).integers(1 << 30)
