import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fracheat.cli import main

from conftest import CORA_DIR


@pytest.fixture(scope="module")
def moon_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("moon")
    assert main(["generate", "--n", "200", "--seed", "1", "--bandwidth", "offset", "--scale", "0.5",
                 "--out", str(out)]) == 0
    return out


def read_pred(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return np.array([int(r["label"]) for r in rows]), np.array([float(r["score"]) for r in rows])


def test_generate_files(moon_dir):
    for name in ("points.csv", "labels.csv", "graph.txt", "config.json"):
        assert (moon_dir / name).is_file()
    assert np.loadtxt(moon_dir / "points.csv", delimiter=",").shape == (200, 2)
    assert json.loads((moon_dir / "config.json").read_text())["bandwidth"] == "offset"


def test_propagate_closed_form(moon_dir, tmp_path, capsys):
    out = tmp_path / "pred.csv"
    rc = main(["propagate", "--graph", str(moon_dir / "graph.txt"), "--laplacian", "sym",
               "--truth", str(moon_dir / "labels.csv"), "--labels-per-class", "3", "--s", "0.5", "--t", "2",
               "--output", str(out), "--dump-eigenvalues", str(tmp_path / "eig.txt")])
    assert rc == 0
    pred, score = read_pred(out)
    assert pred.shape == (200,) and set(pred) <= {0, 1}
    acc = json.loads(capsys.readouterr().err.strip().splitlines()[-1])["accuracy_unlabeled"]
    assert acc > 0.7
    lam = np.loadtxt(tmp_path / "eig.txt")
    assert lam.shape == (200,) and lam[0] == 0.0


@pytest.mark.parametrize("extra", [["--strategy", "chebyshev"], ["--strategy", "chebyshev", "--cheb-auto-degree", "1e-8"],
                                   ["--stepper", "rk4", "--dt", "0.1"], ["--strategy", "subordination"],
                                   ["--strategy", "truncated", "--modes", "200"]])
def test_propagate_variants_agree(moon_dir, tmp_path, extra):
    base = tmp_path / "a.csv"
    other = tmp_path / "b.csv"
    common = ["propagate", "--graph", str(moon_dir / "graph.txt"), "--laplacian", "sym",
              "--truth", str(moon_dir / "labels.csv"), "--s", "0.5", "--t", "1"]
    assert main(common + ["--output", str(base)]) == 0
    assert main(common + extra + ["--output", str(other)]) == 0
    p0, _ = read_pred(base)
    p1, _ = read_pred(other)
    assert np.mean(p0 == p1) > 0.95


def test_propagate_labels_file(moon_dir, tmp_path):
    lab = tmp_path / "lab.csv"
    lab.write_text("node,label\n0,0\n150,1\n")
    out = tmp_path / "p.csv"
    assert main(["propagate", "--graph", str(moon_dir / "graph.txt"), "--laplacian", "combinatorial",
                 "--labels", str(lab), "--t", "1", "--output", str(out)]) == 0
    pred, _ = read_pred(out)
    assert pred[0] == 0 and pred[150] == 1


def test_selftrain_log(moon_dir, tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["selftrain", "--graph", str(moon_dir / "graph.txt"), "--laplacian", "sym",
                 "--truth", str(moon_dir / "labels.csv"), "--s", "0.2", "--dt", "0.2", "--tmax", "3",
                 "--output", str(out)]) == 0
    lines = [json.loads(x) for x in capsys.readouterr().out.strip().splitlines()]
    assert [r["k"] for r in lines] == [0, 1, 2]
    assert set(lines[0]) == {"k", "n_labeled", "n_selected", "frobenius_delta"}


def test_refine_and_anomaly(moon_dir, tmp_path, capsys):
    att = tmp_path / "att.txt"
    att.write_text("0 1 0.5\n1 2 0.25\n")
    out, anom = tmp_path / "p.csv", tmp_path / "a.csv"
    rc = main(["refine", "--graph", str(moon_dir / "graph.txt"), "--laplacian", "sym",
               "--truth", str(moon_dir / "labels.csv"), "--embeddings", str(moon_dir / "points.csv"),
               "--attention", str(att), "--sigma", "nn", "--s", "0.2", "--dt", "0.2", "--output", str(out),
               "--anomaly", str(anom), "--anomaly-k", "4"])
    assert rc == 0
    scores = np.loadtxt(anom, delimiter=",", skiprows=1)
    assert scores.shape == (200, 2) and scores[:, 1].max() <= 8


def test_stats_groups_and_presets(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    a.write_text("0.90\n0.91\n0.92\n")
    b.write_text("0.80\n0.82\n0.81\n")
    assert main(["stats", "--groups", str(a), str(b)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["anova"]["p"] < 0.01 and len(doc["pairwise"]) == 1
    assert main(["stats", "--list-presets"]) == 0
    assert "table1" in capsys.readouterr().out


def test_stats_preset_run(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 150, "trials": 2, "labels": [2], "s_values": [1.0], "times": {"1.0": [5.0]}}))
    res = tmp_path / "res.json"
    assert main(["stats", "--config", str(cfg), "--output", str(res)]) == 0
    first = capsys.readouterr().out
    doc = json.loads(res.read_text())
    assert doc["schema_version"] == 1 and len(doc["results"]) == 3
    assert "Tukey" in doc["metadata"]["post_hoc"]
    assert main(["stats", "--from", str(res)]) == 0
    assert capsys.readouterr().out == first


def test_bench_runs(capsys):
    assert main(["bench", "--n", "300", "--degree", "5", "--repeat", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["n"] == 300 and doc["backends"]


def test_exit_codes(moon_dir, tmp_path):
    g = str(moon_dir / "graph.txt")
    truth = str(moon_dir / "labels.csv")
    # usage: bad choice, missing required flag, out-of-range order
    with pytest.raises(SystemExit) as e:
        main(["propagate", "--graph", g, "--laplacian", "hyperbolic", "--t", "1"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["propagate", "--graph", g, "--laplacian", "sym"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["propagate", "--graph", g, "--laplacian", "sym", "--t", "1", "--s", "1.5"])
    assert e.value.code == 1
    assert main(["propagate", "--graph", g, "--laplacian", "sym", "--t", "1"]) == 1  # no labels
    # data: missing file, malformed edge list
    assert main(["propagate", "--graph", str(tmp_path / "none.txt"), "--laplacian", "sym",
                 "--truth", truth, "--t", "1"]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 oops\n")
    assert main(["propagate", "--graph", str(bad), "--laplacian", "sym", "--truth", truth, "--t", "1"]) == 2
    # numerical: forward Euler beyond the stability limit
    assert main(["propagate", "--graph", g, "--laplacian", "sym", "--truth", truth, "--t", "5",
                 "--stepper", "forward-euler", "--dt", "1.5", "--output", str(tmp_path / "x.csv")]) == 3


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "fracheat.cli", "stats", "--list-presets"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "cora_baseline" in r.stdout


def test_cora_preset_available():
    from fracheat.harness.trials import load_preset
    cfg = load_preset("cora_baseline", cora_edges=str(CORA_DIR / "cora.cites"),
                      cora_labels=str(CORA_DIR / "cora.labels"), trials=1)
    assert cfg.dataset == "cora" and cfg.kind == "sym-selfloops"
