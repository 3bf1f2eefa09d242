import json
import subprocess
import sys

import pytest

from diagop.cli import InputError, parse_operator, run
from diagop.operator_model import make_family


def _json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip().startswith("{") else out


def test_ess(capsys):
    code, data = _json(capsys, ["ess", "--family", "A_t", "--t", "0.5"])
    assert code == 0
    assert data["result"]["points"] == [] and data["result"]["unbounded_above"]
    assert data["provenance"]["horizon"] == 4096


def test_bands(capsys):
    code, data = _json(capsys, ["bands", "--a", "A_t:t=0.5", "--n-max", "4"])
    assert code == 0 and data["result"]["dims"] == [0, 2, 5, 8, 9]


def test_obstruction(capsys):
    code, data = _json(capsys, ["obstruction", "--s", "0.3", "--t", "0.9"])
    assert code == 0
    assert data["result"]["minimum"] == pytest.approx(0.2, abs=1e-12)


def test_pair_commands(capsys):
    code, data = _json(capsys, ["ucres", "--a", "B_t:t=0", "--b", "B_t:t=1"])
    assert code == 0 and data["result"]["equivalent"]
    code, data = _json(capsys, ["dom-eq", "--a", "B_t:t=0", "--b", "B_t:t=1"])
    assert data["result"]["equal"]
    code, data = _json(capsys, ["match", "--a", "B_t:t=0", "--b", "B_t:t=1", "--horizon", "16"])
    assert data["result"]["bottleneck_cost"] == pytest.approx(1 / 3)
    code, data = _json(capsys, ["relcompact", "--k", "K0:s=0,t=1", "--a", "B_t:t=0"])
    assert data["result"]["verdict"] and data["result"]["max_gamma"] == pytest.approx(0.2357022603955158)
    code, data = _json(capsys, ["wvn", "--a", "rationals:M=1", "--b", "rationals:M=1,negative_first=1"])
    assert data["result"]["certificate"]["verdict"] == "decreasing-to-zero-on-horizon"


def test_fw(capsys):
    argv = ["fw", "--a", "A_t:t=0.4", "--b", "A_t:t=0.6", "--k-max", "2", "--n-max", "24", "--l-max", "8"]
    code, data = _json(capsys, argv)
    assert code == 0 and data["result"]["outcome"] == "Violation"


def test_fw_profiles(capsys, tmp_path):
    p = tmp_path / "p.json"
    q = tmp_path / "q.json"
    p.write_text(json.dumps({"dims": [1] * 40}))
    q.write_text(json.dumps({"dims": [0, 2] * 20}))
    code, data = _json(capsys, ["fw", "--p", str(p), "--q", str(q), "--k-max", "2", "--n-max", "20", "--l-max", "10"])
    assert code == 0 and data["result"]["k"] == 1


def test_walks(capsys):
    code, data = _json(capsys, ["walk0", "--pairs", "1:2.0,3:-0.5", "--r", "0.5"])
    assert code == 0 and data["result"]["check"]["ok"]
    assert len(data["result"]["steps"]) == 5


def test_epsnet(capsys, tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0,1\n1,0\n")
    code, data = _json(capsys, ["epsnet", "--matrix", str(path), "--eps", "3"])
    assert code == 0
    assert data["result"]["eigenvalues"] == [0.0, 0.0]
    assert data["result"]["perturbation_norm"] == pytest.approx(1.0)


def test_csv_output(capsys):
    assert run(["bands", "--a", "A_t:t=0.5", "--n-max", "2", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4 and "," in lines[0]


def test_output_file(tmp_path, capsys):
    out = tmp_path / "o.json"
    assert run(["obstruction", "--s", "0", "--t", "1", "--output", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["result"]["argmin"][0] == 1


def test_output_is_deterministic(capsys):
    argv = ["ess", "--a", "B_t:t=0.5", "--horizon", "512"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first


def test_exit_codes(capsys, tmp_path):
    assert run(["ess", "--a", "nosuchfamily"]) == 2
    assert run(["ess", "--a", "A_t:t=2"]) == 2
    assert run(["ess", "--spec", str(tmp_path / "missing.json")]) == 2
    assert run(["obstruction", "--s", "0.5", "--t", "0.5"]) == 1
    assert run(["walk0", "--pairs", "9:1.0", "--probes", "4"]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"label": "x", "generator": "1/(n - 3)", "meta": {}}))
    assert run(["ess", "--spec", str(bad)]) == 2
    data = make_family("A_t", t=0.5).to_json()
    data["generator"] = "1/(n - 3)"
    bad.write_text(json.dumps(data))
    assert run(["ess", "--spec", str(bad)]) == 1
    capsys.readouterr()


def test_config_defaults_and_rejection(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"s": 0.3, "t": 0.9, "grid": 10}))
    code, data = _json(capsys, ["obstruction", "--config", str(cfg)])
    assert code == 0 and data["config"]["grid"] == 10
    cfg.write_text(json.dumps({"s": 0.3, "nonsense": 1}))
    assert run(["obstruction", "--config", str(cfg)]) == 2
    capsys.readouterr()


def test_reproduce_single_check(capsys):
    code = run(["reproduce", "--check", "3"])
    captured = capsys.readouterr()
    assert code == 0
    assert "[PASS]  3" in captured.err
    assert json.loads(captured.out)["result"]["all_passed"]


def test_parse_operator_syntax():
    assert parse_operator("B_t:t=0.5").label == make_family("B_t", t=0.5).label
    spec = parse_operator("A_F:F=n in {1,4}")
    assert [spec.value(n) for n in range(1, 6)] == [1.0, 0.0, 0.0, 1.0, 0.0]
    with pytest.raises(InputError):
        parse_operator("B_t:bogus=1")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "diagop", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
