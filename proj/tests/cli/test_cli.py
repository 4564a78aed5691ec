import csv
import io
import json
import os
import subprocess

import pytest

CLI = os.environ.get("MEASP_CLI", "measp")

REGISTRY = """
[engine A]
kind = builtin-oracle
require = facts_per_rule >= 0.3

[engine B]
kind = builtin-oracle
require = frac_constraints >= 0.3
"""


def run(*args, check=True, stdin=None):
    p = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, input=stdin)
    if check and p.returncode != 0:
        raise AssertionError(f"{args} exited {p.returncode}: {p.stderr}")
    return p


def rows(path):
    with open(path) as f:
        return list(csv.DictReader(f))


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    d = tmp_path_factory.mktemp("world")
    for kind, family in (("fact-heavy", "fact"), ("constraint-heavy", "constraint")):
        run("gen", "--kind", kind, "--count", 12, "--atoms", 12, "--seed", 3, "--out", d / "inst" / family)
    (d / "engines.ini").write_text(REGISTRY)
    run("bench", "--engines", d / "engines.ini", "--instances", d / "inst", "--cpu-limit", 5,
        "--workers", 2, "--out", d / "perf.csv")
    run("features", "--instances", d / "inst", "--out", d / "features.csv")
    return d


def test_bench_grid(world):
    perf = rows(world / "perf.csv")
    assert len(perf) == 48
    for r in perf:
        expected = "A" if r["family"] == "fact" else "B"
        assert r["status"] == ("solved" if r["solver"] == expected else "timeout")
    again = run("bench", "--engines", world / "engines.ini", "--instances", world / "inst",
                "--cpu-limit", 5, "--out", world / "perf.csv")
    assert "executed 0 runs" in again.stderr


def test_features_csv(world):
    feats = rows(world / "features.csv")
    assert len(feats) == 24
    assert len(feats[0]) == 53
    assert feats[0]["instance"].startswith("constraint/")


def test_select_train_cv_solve_report(world):
    pool = run("select-engines", "--matrix", world / "perf.csv", "--threshold", 5).stdout.split()
    assert pool == ["A", "B"]
    (world / "pool.txt").write_text("\n".join(pool) + "\n")

    run("train", "--matrix", world / "perf.csv", "--features", world / "features.csv",
        "--algorithm", "tree", "--pool", world / "pool.txt", "--model", world / "model.json")
    model = json.loads((world / "model.json").read_text())
    assert model["algorithm"] == "tree"

    cv = json.loads(run("cv", "--matrix", world / "perf.csv", "--features", world / "features.csv",
                        "--algorithm", "nn", "--folds", 4, "--repeats", 2, "--seed", 9).stdout)
    assert cv["mean_accuracy"] == 1.0

    inst = sorted((world / "inst").rglob("*.gasp"))
    solved = run("solve", "--model", world / "model.json", "--engines", world / "engines.ini",
                 "--pool", world / "pool.txt", "--out", world / "solve.csv", *inst, "--cpu-limit", 5)
    assert solved.returncode == 0
    results = rows(world / "solve.csv")
    assert len(results) == 24
    assert all(r["status"] == "solved" for r in results)

    # solve results carry the instance names used by bench, so report can join them
    by_path = {str(p): os.path.relpath(p, world / "inst") for p in inst}
    fixed = io.StringIO()
    w = csv.DictWriter(fixed, fieldnames=list(results[0]))
    w.writeheader()
    for r in results:
        r["instance"] = by_path[r["instance"]]
        w.writerow(r)
    (world / "solve_rel.csv").write_text(fixed.getvalue())
    run("report", "--matrix", world / "perf.csv", "--pool", world / "pool.txt", "--results",
        world / "solve_rel.csv", "--out", world / "report.csv", "--cactus", world / "cactus.csv",
        "--calls", world / "calls.csv")
    report = {r["row"]: r for r in rows(world / "report.csv")}
    assert report["A"]["solved"] == "12" and report["B"]["solved"] == "12"
    assert report["sota"]["solved"] == "24"
    assert report["me-asp"]["solved"] == "24"
    calls = {r["engine"]: int(r["calls"]) for r in rows(world / "calls.csv")}
    assert calls == {"A": 12, "B": 12}
    assert (world / "cactus.csv").read_text().startswith("series,time,solved\n")


def test_solve_exit_codes(tmp_path):
    sat = tmp_path / "sat.gasp"
    sat.write_text("a | b. c :- a.")
    p = run("solve", "--engine", "oracle", sat, check=False)
    assert p.returncode == 10
    assert p.stdout.splitlines()[0] == "ANSWER"

    unsat = tmp_path / "unsat.gasp"
    unsat.write_text("a. :- a.")
    assert run("solve", "--engine", "oracle", unsat, check=False).returncode == 20

    run("gen", "--kind", "pigeonhole", "--count", 1, "--atoms", 7, "--out", tmp_path / "php")
    php = next((tmp_path / "php").iterdir())
    p = run("solve", "--engine", "oracle", "--cpu-limit", 0.01, php, check=False)
    assert p.returncode == 0
    assert p.stdout.startswith("UNKNOWN")

    bad = tmp_path / "bad.gasp"
    bad.write_text("a :-")
    # run directly, the engine reports the parse failure as an error outcome
    p = run("solve", "--engine", "oracle", bad, check=False)
    assert p.returncode == 0
    assert p.stdout.startswith("UNKNOWN error")
    assert run("solve", sat, check=False).returncode == 1
    assert run("no-such-command", check=False).returncode == 1

    p = run("solve", "--engine", "oracle", "-", check=False, stdin="x.")
    assert p.returncode == 10
    assert p.stdout.splitlines() == ["ANSWER", "x"]


def test_solve_with_model_rejects_unparseable_input(world, tmp_path):
    if not (world / "model.json").exists():
        pytest.skip("model not trained")
    bad = tmp_path / "bad.gasp"
    bad.write_text("a :-")
    p = run("solve", "--model", world / "model.json", "--engines", world / "engines.ini", bad, check=False)
    assert p.returncode == 1
    assert "error:" in p.stderr


def test_competition_matrix_report(tmp_path):
    run("gen", "--kind", "competition-matrix", "--out", tmp_path / "m.csv")
    table = {r["row"]: r for r in rows_from(run("report", "--matrix", tmp_path / "m.csv", "--csv").stdout)}
    assert table["clasp"]["solved"] == "445" and table["clasp"]["unique"] == "26"
    assert table["cmodels"]["unique"] == "6"
    pool = run("select-engines", "--matrix", tmp_path / "m.csv").stdout.split()
    assert sorted(pool) == ["clasp", "cmodels", "dlv", "idp"]


def test_pca(world):
    out = run("pca", "--features", world / "features.csv").stdout.splitlines()
    assert out[0] == "instance,pc1,pc2"
    assert len(out) == 25


def rows_from(text):
    return list(csv.DictReader(io.StringIO(text)))
