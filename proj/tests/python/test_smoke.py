import math

import pytest

import measp

EXAMPLE = "a | b :- c.  b :- not a, not c.  a | c :- not b.  k :- a.  k :- b."

TWO_ENGINES = """
[engine A]
kind = builtin-oracle
require = facts_per_rule >= 0.3

[engine B]
kind = builtin-oracle
require = frac_constraints >= 0.3
"""


def test_semantics():
    assert measp.reduct(EXAMPLE, ["b", "k"]) == "a | b :- c.\nb.\nk :- a.\nk :- b."
    assert measp.is_answer_set(EXAMPLE, ["b", "k"])
    assert not measp.is_answer_set(EXAMPLE, ["a", "b", "k"])
    assert sorted(map(sorted, measp.answer_sets(EXAMPLE))) == [["a", "k"], ["b", "k"]]
    assert measp.normalize_program("a :- not b.") == "a :- not b."


def test_parse_errors_are_value_errors():
    with pytest.raises(ValueError):
        measp.normalize_program("a :-")
    with pytest.raises(measp.ParseError):
        measp.features("p(.")


def test_features():
    names = measp.feature_names()
    assert len(names) == 52
    assert measp.manifest_version() == "measp-cheap52-v1"
    f = measp.features(EXAMPLE)
    assert list(f) == names
    assert f["r"] == 5 and f["a"] == 4
    assert math.isclose(f["frac_horn"], 0.4, rel_tol=1e-15)
    csv = measp.features_csv(["x"], [EXAMPLE]).splitlines()
    assert csv[0] == "instance," + ",".join(names)
    assert csv[1].startswith("x,5,4,")


def test_selection_on_competition_matrix():
    csv = measp.competition_matrix_csv()
    counts = measp.unique_counts(csv)
    assert counts["clasp"] == 26 and counts["smodels"] == 0
    assert sorted(measp.select_by_uniqueness(csv, 5)) == ["clasp", "cmodels", "dlv", "idp"]
    solved, _ = measp.sota(csv, ["clasp", "idp"])
    assert solved >= 445
    report = measp.report_csv(csv).splitlines()
    assert report[0] == "row,solved,time,solved_np,time_np,solved_beyond_np,time_beyond_np,unique"
    assert any(line.startswith("clasp,445,") for line in report)


def test_pca_rank_one():
    rows = [[t, 2 * t, -t] for t in range(10)]
    r = measp.pca(rows)
    assert r["explained"][1] <= 1e-6 * r["total_variance"]
    assert len(r["coords"]) == 10


def test_train_predict_and_solve(tmp_path):
    programs, rows = {}, ["solver,instance,family,class,status,cpu_seconds"]
    for s in range(1, 9):
        for kind, engine in (("fact-heavy", "A"), ("constraint-heavy", "B")):
            name = f"{kind}-{s}.gasp"
            programs[name] = measp.generate(kind, 12, s)
            path = tmp_path / name
            path.write_text(programs[name])
            for e in ("A", "B"):
                out = measp.run_engine(TWO_ENGINES, e, str(path), cpu_seconds=5)
                assert out["status"] == ("solved" if e == engine else "timeout")
                rows.append(f"{e},{name},{kind},NP,{out['status']},{out['cpu_seconds']}")
    matrix = "\n".join(rows) + "\n"
    features = measp.features_csv(list(programs), list(programs.values()))

    model = measp.train(matrix, features, "tree")
    assert measp.predict(model, measp.generate("fact-heavy", 14, 99)) == "A"
    assert measp.predict(model, measp.generate("constraint-heavy", 14, 99)) == "B"

    cv = measp.cross_validate(matrix, features, "nn", folds=4, repeats=2, seed=5)
    assert cv["mean_accuracy"] == 1.0
    assert cv == measp.cross_validate(matrix, features, "nn", folds=4, repeats=2, seed=5)

    target = tmp_path / "new.gasp"
    target.write_text(measp.generate("constraint-heavy", 12, 123))
    r = measp.solve(str(target), model, registry=TWO_ENGINES, cpu_seconds=5)
    assert r["chosen"] == "B"
    assert r["status"] == "solved"
    assert r["total_seconds"] >= r["feature_seconds"] + r["classify_seconds"]

    with pytest.raises(measp.SolveError):
        measp.solve(str(target), model, pool=["A"], registry=TWO_ENGINES)
