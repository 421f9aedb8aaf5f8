import json
from pathlib import Path

import pytest

import gapforge as gf

DATA = Path(__file__).resolve().parents[1] / "data"


def test_profile_of_fragment():
    t = gf.load_csv(str(DATA / "fig1_fragment.csv"))
    assert (t.n_rows, t.n_cols) == (8, 5)
    prof = gf.profile(t)
    assert prof[0][:2] == ("LotFrontage", 5)
    assert t.missing_cells == 11


def test_table_round_trip():
    t = gf.Table({"a": [1.0, None, 3.0], "b": ["x", "y, z", None]})
    assert t.kind("a") == "numeric" and t.kind("b") == "categorical"
    assert t.column("a") == [1.0, None, 3.0]
    assert gf.read_csv(t.to_csv()) == t


def test_inject_and_impute():
    t = gf.Table({"v": [float(i) for i in range(200)]})
    spec = json.dumps({"mechanism": "mcar", "target_columns": ["v"], "rate": 0.3})
    masked, held = gf.inject(t, spec, seed=4)
    again, _ = gf.inject(t, spec, seed=4)
    assert masked == again
    assert masked.missing_cells == len(held["v"]) > 0
    for row, value in held["v"].items():
        assert masked.column("v")[row] is None and value == float(row)

    filled = gf.impute(masked, '{"strategy": "mean"}')
    assert filled.missing_cells == 0
    train = gf.Table({"v": [10.0, 20.0]})
    from_train = gf.impute(masked, '{"strategy": "mean"}', fit_on=train)
    row = next(iter(held["v"]))
    assert from_train.column("v")[row] == 15.0


def test_fit_predict_and_metrics():
    xs = [float(i) for i in range(20)]
    t = gf.Table({"x": xs, "y": [2 * x + 1 for x in xs]})
    model = gf.fit('{"kind": "linear"}', t, "y")
    pred = model.predict(t)
    assert gf.mse(pred, t.column("y")) == pytest.approx(0.0, abs=1e-18)
    assert gf.rmsle([0.0], [0.0]) == 0.0

    report = json.loads(gf.classification_report([0, 0, 1, 1], [0, 1, 1, 1]))
    assert report["accuracy"] == 0.75
    assert "weighted avg" in gf.classification_report([0, 1], [0, 1], text=True)


def test_benchmark_is_deterministic():
    table = gf.synthesize('{"n_rows": 80, "n_numeric_features": 3, "seed": 2}')
    plan = json.dumps({
        "train_fractions": [0.5],
        "trials": 2,
        "imputers": [{"strategy": "zero"}, {"strategy": "mean"}],
        "learners": [{"kind": "linear"}],
        "missingness": {"mechanism": "mcar", "target_columns": ["x0"], "rate": 0.2},
    })
    a = gf.run_benchmark(plan, table)
    assert a == gf.run_benchmark(plan, table)
    assert len(json.loads(a)["cells"]) == 2
    assert gf.run_benchmark(plan, table, format="md").count("\n") >= 3


def test_errors_are_typed():
    with pytest.raises(gf.SpecError, match="unknown field"):
        gf.impute(gf.Table({"a": [1.0]}), '{"strategy": "mean", "bogus": 1}')
    with pytest.raises(gf.ParseError):
        gf.read_csv("a,b\n1\n")
