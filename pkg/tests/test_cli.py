import json
import subprocess
import sys

import pytest

from hardy.cli import main


@pytest.fixture
def seqfile(tmp_path):
    f = tmp_path / "u.json"
    f.write_text(json.dumps({"schema_version": 1,
                             "entries": [[1, 1.0, 0.0], [2, 0.5, 0.2], [5, -1.0, 0.0]]}))
    return f


def _run(tmp_path, *args, name="out.json"):
    out = tmp_path / name
    code = main([*map(str, args), "--output", str(out)])
    text = out.read_text()
    return code, (json.loads(text) if name.endswith(".json") else text)


def test_verify_power(tmp_path, seqfile):
    code, doc = _run(tmp_path, "verify", "--family", "power", "--p", 2, "--alpha", 0,
                     "--beta", 0.5, "--input", seqfile)
    assert code == 0
    assert doc["schema_version"] == 1 and doc["command"] == "verify"
    assert doc["results"]["relative_residual"] < 1e-9
    assert doc["violations"] == []


def test_verify_classical_and_custom(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"entries": [[1, 1, 0], [3, 2, 1]],
                             "v": [0, 1, 1, 1, 1, 1], "phi": [0, 1, 1.5, 1.8, 2, 2.1]}))
    code, doc = _run(tmp_path, "verify", "--family", "custom", "--p", 2, "--input", f)
    assert code == 0 and doc["results"]["mode"] == "identity"
    code, doc = _run(tmp_path, "verify", "--family", "classical", "--p", 3, "--input", f)
    assert code == 0 and doc["results"]["residual"] > 0


def test_verify_copson_precondition(tmp_path, seqfile):
    code, doc = _run(tmp_path, "verify", "--family", "copson", "--alpha", -0.5, "--input", seqfile)
    assert code == 2
    assert doc["error"]["type"] == "PreconditionError"


def test_constants_p2(tmp_path):
    code, doc = _run(tmp_path, "constants", "--p", 2, "--r-max", 1000)
    res = doc["results"]
    assert res["c1"]["lower"] <= 1.0 <= res["c1"]["upper"]
    assert res["muckenhoupt"]["bound"] == 1.0
    # the r = 1 term exceeds 1, so the run reports a violation
    assert res["muckenhoupt"]["sup_upper"] > 1.0
    assert code == 1 and doc["violations"][0]["invariant"] == "muckenhoupt_bound"


def test_gen_weights_csv(tmp_path):
    code, text = _run(tmp_path, "gen-weights", "--family", "fkp", "--p", 2, "--support-max", 4,
                      name="w.csv")
    lines = text.strip().splitlines()
    assert code == 0 and lines[0] == "n,w" and len(lines) == 5
    assert float(lines[1].split(",")[1]) == pytest.approx(2 - 2**0.5)


def test_compare_weights(tmp_path):
    code, doc = _run(tmp_path, "compare-weights", "--p", 3, "--support-max", 100)
    assert code == 0
    rows = doc["results"]["table"]["rows"]
    assert len(rows) == 100 and all(r[4] > 0 for r in rows)


def test_stability_command(tmp_path, seqfile):
    code, doc = _run(tmp_path, "stability", "--p", 2, "--input", seqfile)
    assert code == 0 and doc["results"]["prefactor"] == 0.125
    code, doc = _run(tmp_path, "stability", "--p", 1.5, "--input", seqfile)
    assert code == 2 and doc["error"]["type"] == "DomainError"


def test_fuzz_exit_zero_and_deterministic(tmp_path):
    code, first = _run(tmp_path, "fuzz", "--p", 3, "--trials", 1000, "--seed", 42,
                       name="a.json")
    assert code == 0 and first["results"]["failed_trials"] == 0
    main(["fuzz", "--p", "3", "--trials", "1000", "--seed", "42", "--workers", "2",
          "--output", str(tmp_path / "b.json")])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_fuzz_copson(tmp_path):
    code, doc = _run(tmp_path, "fuzz", "--p", 2, "--family", "copson", "--alpha", -0.5,
                     "--trials", 50)
    assert code == 0 and "min_copson_slack_rel" in doc["results"]


def test_parse_error_record(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("n,re,im\n0,1,0\n")
    code, doc = _run(tmp_path, "verify", "--input", bad)
    assert code == 2
    assert doc["error"]["line"] == 2 and doc["error"]["field"] == "n"


def test_bad_config(tmp_path):
    code, doc = _run(tmp_path, "fuzz", "--p", 1.0)
    assert code == 2 and doc["error"]["type"] == "DomainError"


def test_module_entry_point_stdout(seqfile):
    proc = subprocess.run([sys.executable, "-m", "hardy", "verify", "--input", str(seqfile)],
                          capture_output=True, text=True, env={"HARDY_LOG": "error",
                                                               "PATH": "/usr/bin:/bin"})
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "verify"
    assert proc.stderr == ""
