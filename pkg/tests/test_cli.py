import csv
import json
import subprocess
import sys

import numpy as np
import pytest

import mdclt.cli as cli
from mdclt.cli import main
from mdclt.inequality_lab import BoundRecord
from mdclt.montecarlo import read_samples
from mdclt.scheme import ConditionReport

SMALL = "64,128,256"


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def chain_doc(kernels=None, n=3, initial=(0.5, 0.5)):
    k = [[0.9, 0.1], [0.2, 0.8]]
    return {"n": n, "states": ["up", "down"], "initial": list(initial),
            "kernels": kernels if kernels is not None else [k] * (n - 1),
            "observables": [[1.0, -1.0]] * n}


@pytest.fixture
def chain_file(tmp_path):
    def write(doc, name="chain.json"):
        p = tmp_path / name
        p.write_text(json.dumps(doc))
        return str(p)
    return write


def test_check_family_a(tmp_path):
    out = tmp_path / "a"
    assert main(["check", "--family", "A", "--output", str(out)]) == 0
    table = rows(out / "conditions.csv")
    assert [int(r["n"]) for r in table] == [2 ** k for k in range(8, 15)]
    d = [float(r["dobrushin_value"]) for r in table]
    assert all(x < y for x, y in zip(d, d[1:]))
    report = ConditionReport.from_json((out / "conditions.json").read_text())
    assert report.trends["dobrushin_value"] == "increasing"
    assert [r.dobrushin_value for r in report.records] == d


def test_check_family_b_windows(tmp_path):
    out = tmp_path / "b"
    assert main(["check", "--family", "B", "--gamma", "0.5", "--period", "2",
                 "--output", str(out), "--format", "csv"]) == 0
    assert all(r["h_beta_ok"] == "true" for r in rows(out / "conditions.csv"))
    assert not (out / "conditions.json").exists()


def test_written_json_round_trips(tmp_path):
    out = tmp_path / "c"
    assert main(["check", "--family", "C", "--grid", SMALL, "--output", str(out),
                 "--format", "json"]) == 0
    text = (out / "conditions.json").read_text()
    assert ConditionReport.from_json(text).to_json() == text


@pytest.mark.parametrize("bad,needle", [(0.9, "row 1 sums to 0.9"),
                                        (1.2, "row 1 sums to 1.2")])
@pytest.mark.parametrize("command", ["check", "verify", "gordin", "simulate", "experiment"])
def test_malformed_kernel_exit_code(tmp_path, chain_file, capsys, command, bad, needle):
    k = [[0.9, 0.1], [0.2, 0.8]]
    path = chain_file(chain_doc([k, [[0.5, 0.5], [bad - 0.5, 0.5]]]))
    code = main([command, "--input", path, "--output", str(tmp_path / "o"),
                 "--instances", "1"] if command == "verify" else
                [command, "--input", path, "--output", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "kernels[1]" in err and needle in err


def test_malformed_json_and_missing_file(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text('{"n": 3, "initial": [0.5, 0.5],')
    assert main(["check", "--input", str(p), "--output", str(tmp_path / "o")]) == 2
    assert "malformed JSON" in capsys.readouterr().err
    assert main(["check", "--input", str(tmp_path / "nope.json"),
                 "--output", str(tmp_path / "o")]) == 2


def test_bad_parameters_exit_2(tmp_path, capsys):
    assert main(["check", "--family", "B", "--period", "1", "--output", str(tmp_path)]) == 2
    assert "period" in capsys.readouterr().err
    assert main(["check", "--family", "C", "--lam", "100", "--grid", "64",
                 "--output", str(tmp_path)]) == 2
    assert main(["simulate", "--family", "A", "--replicates", "0",
                 "--output", str(tmp_path)]) == 2
    assert main(["check", "--family", "A", "--beta", "0101",
                 "--output", str(tmp_path)]) == 2


def test_explicit_beta(tmp_path, chain_file):
    path = chain_file(chain_doc(n=6))
    out = tmp_path / "o"
    assert main(["check", "--input", path, "--beta", "101010", "--m0", "2", "--c", "0.3",
                 "--output", str(out)]) == 0
    rec = json.loads((out / "conditions.json").read_text())["records"][0]
    assert rec["beta"] == "101010" and rec["beta_source"] == "supplied"
    assert rec["h_beta_ok"] is True
    assert main(["check", "--input", path, "--beta", "1010", "--output", str(out)]) == 2


def test_gordin_command(tmp_path):
    out = tmp_path / "g"
    assert main(["gordin", "--family", "B", "--grid", SMALL, "--output", str(out)]) == 0
    doc = json.loads((out / "gordin.json").read_text())
    assert doc["trends"]["a_value"] == "decreasing"
    assert len(doc["rows"][0]["increment_vars"]) == 63
    assert [r["n"] for r in rows(out / "gordin.csv")] == ["64", "128", "256"]


def test_simulate_command(tmp_path):
    out = tmp_path / "s"
    assert main(["simulate", "--family", "A", "--grid", "32,64", "--replicates", "500",
                 "--seed", "3", "--dump-samples", "--output", str(out)]) == 0
    res = json.loads((out / "simulation.json").read_text())
    assert [r["n"] for r in res] == [32, 64]
    s = read_samples(out / "samples_n64.bin")
    assert s.size == 500 and np.all(np.diff(s) >= 0)


def test_experiment_command(tmp_path):
    out = tmp_path / "e"
    assert main(["experiment", "--family", "B", "--grid", SMALL, "--replicates", "2000",
                 "--output", str(out)]) == 0
    table = rows(out / "experiment.csv")
    assert len(table) == 3
    assert all(0 < float(r["ks_distance"]) < 1 for r in table)
    doc = json.loads((out / "experiment.json").read_text())
    assert doc["trends"]["ks_distance"] in ("decreasing", "inconclusive")
    assert doc["trends"]["dobrushin_value"] == "decreasing"


def test_experiment_single_replicate(tmp_path):
    out = tmp_path / "e1"
    assert main(["experiment", "--family", "C", "--grid", SMALL, "--replicates", "1",
                 "--output", str(out)]) == 0
    table = rows(out / "experiment.csv")
    assert len(table) == 3
    assert all(0.0 <= float(r["ks_distance"]) <= 1.0 for r in table)


def test_experiment_degenerate_warning_row(tmp_path, chain_file):
    doc = chain_doc(kernels=[[[1.0, 0.0], [0.0, 1.0]]] * 2, initial=(1.0, 0.0))
    out = tmp_path / "d"
    assert main(["experiment", "--input", chain_file(doc), "--replicates", "10",
                 "--output", str(out)]) == 0
    (row,) = rows(out / "experiment.csv")
    assert row["ks_distance"] == "nan" and "degenerate" in row["warning"]


def test_verify_default_suite(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--output", str(out)]) == 0
    summary = json.loads((out / "verify.json").read_text())
    assert summary["instances"] == 1000 and summary["failures"] == 0
    table = rows(out / "bounds.csv")
    assert len(table) == summary["records"]
    assert all(r["ok"] == "true" for r in table)


def test_verify_with_input_chain(tmp_path, chain_file):
    out = tmp_path / "vi"
    assert main(["verify", "--input", chain_file(chain_doc(n=5)), "--instances", "3",
                 "--output", str(out)]) == 0
    table = rows(out / "bounds.csv")
    assert any(r["instance"] == "-1" and r["lemma"] == "variance_lower" for r in table)


def test_verify_reports_failures(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "run_suite",
                        lambda n, seed: [(0, BoundRecord.upper("fake", (), 2.0, 1.0))])
    assert main(["verify", "--output", str(tmp_path)]) == 1


COMMANDS = [
    ["check", "--family", "B"],
    ["gordin", "--family", "B", "--grid", SMALL],
    ["simulate", "--family", "C", "--grid", SMALL, "--replicates", "3000", "--dump-samples"],
    ["experiment", "--family", "A", "--grid", SMALL, "--replicates", "3000"],
    ["verify", "--instances", "50"],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=[c[0] for c in COMMANDS])
def test_reruns_byte_identical(tmp_path, monkeypatch, argv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--output", str(a)]) in (0, 1)
    monkeypatch.setenv("MDCLT_THREADS", "4")
    assert main(argv + ["--output", str(b)]) in (0, 1)
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        if name != "metadata.json":
            assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert "created" in json.loads((a / "metadata.json").read_text())


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mdclt", "check", "--family", "A",
                           "--grid", "64", "--output", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "n=    64" in proc.stdout
