import csv
import json
import os

import numpy as np
import pytest

from piar.cli import EXIT_CODES, main, read_series
from piar.models import table2_model
from piar.pifilter import theta_general

from conftest import TABLE3


def run(capsys, *argv):
    status = main([str(a) for a in argv])
    out = capsys.readouterr()
    return status, out.out, out.err


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def series_ii(tmp_path, capsys):
    path = tmp_path / "ii.csv"
    assert run(capsys, "simulate", "--model", "table2:II", "--n", 240, "--seed", 7, "-o", path)[0] == 0
    return path


def test_simulate_fit_end_to_end(series_ii, tmp_path, capsys):
    out = tmp_path / "params.csv"
    status, text, _ = run(capsys, "fit", "--input", series_ii, "--period", 4, "--p", 2, "--m1", 2,
                          "--blocks", "1,1", "--no-demean", "--restarts", 2, "-o", out)
    assert status == 0
    rows = {r[0]: np.array(r[1:], dtype=float) for r in read_rows(out)[1:]}
    assert abs(np.prod(rows["alpha"]) - 1) <= 1e-8
    assert abs(np.prod(rows["beta"]) - 1) <= 1e-8
    np.testing.assert_allclose(rows["alpha"] + rows["beta"], rows["theta_1"], atol=1e-8)
    assert "prod alpha 1" in text
    assert {"theta_1", "theta_2", "sigma", "sigma2"} <= set(rows)


def test_reruns_are_byte_identical(series_ii, tmp_path, capsys):
    def artifacts(tag):
        d = tmp_path / tag
        d.mkdir()
        run(capsys, "simulate", "--model", "table2:III", "--n", 120, "--seed", 3, "-o", d / "sim.csv")
        base = ["--input", series_ii, "--period", 4, "--p", 3, "--m1", 2, "--restarts", 2, "--seed", 5]
        run(capsys, "fit", *base, "-o", d / "fit.csv")
        run(capsys, "forecast", *base, "-H", 2, "-o", d / "fc.csv", "--plot-data", d / "plot.csv")
        run(capsys, "diagnose", *base, "--output-dir", d / "diag")
        run(capsys, "mc-experiment", "--model", "table2:I", "--reps", 6, "--seed", 42, "-o", d / "mc.csv",
            "--estimates", d / "est.csv")
        files = sorted(os.path.relpath(os.path.join(r, f), d) for r, _, fs in os.walk(d) for f in fs)
        return {f: (d / f).read_bytes() for f in files}

    a, b = artifacts("a"), artifacts("b")
    assert sorted(a) == ["diag/acf.csv", "diag/lr.csv", "diag/mcleod.csv", "diag/qq.csv", "est.csv", "fc.csv",
                         "fit.csv", "mc.csv", "plot.csv", "sim.csv"]
    assert a == b


def test_mc_experiment_independent_of_workers(tmp_path, capsys):
    for w in (1, 2):
        run(capsys, "mc-experiment", "--model", "table2:I", "--reps", 4, "--seed", 1, "--workers", w,
            "--estimates", tmp_path / f"est{w}.csv")
    assert (tmp_path / "est1.csv").read_bytes() == (tmp_path / "est2.csv").read_bytes()


def test_missing_input_file(capsys):
    status, _, err = run(capsys, "fit", "--input", "none.csv", "--period", 4, "--p", 1)
    assert status == EXIT_CODES["FileNotFound"]
    lines = err.strip().splitlines()
    assert len(lines) == 1 and lines[0].startswith("error: FileNotFound: ")


def test_error_codes(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("time_index,value\n1,abc\n")
    status, _, err = run(capsys, "fit", "--input", bad, "--period", 4, "--p", 1)
    assert status == EXIT_CODES["InputError"] and err.startswith("error: MalformedCSV: ")
    gap = tmp_path / "gap.csv"
    gap.write_text("time_index,value\n1,1.0\n3,2.0\n")
    assert run(capsys, "fit", "--input", gap, "--period", 4, "--p", 1)[0] == EXIT_CODES["InputError"]
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    status, _, err = run(capsys, "--config", cfg, "simulate", "--model", "table2:I", "--n", 8)
    assert status == EXIT_CODES["InvalidConfig"] and "bogus" in err
    status, _, err = run(capsys, "simulate", "--model", "table2:IV", "--n", 8)
    assert status == EXIT_CODES["InputError"]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "table2:I", "n": 16, "seed": 3}))
    run(capsys, "--config", cfg, "simulate", "-o", tmp_path / "a.csv")
    run(capsys, "simulate", "--model", "table2:I", "--n", 16, "--seed", 3, "-o", tmp_path / "b.csv")
    run(capsys, "--config", cfg, "simulate", "--seed", 4, "-o", tmp_path / "c.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert len(read_rows(tmp_path / "a.csv")) == 17
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "c.csv").read_bytes()


def test_three_column_input_equivalent(series_ii, tmp_path):
    rows = read_rows(series_ii)[1:]
    alt = tmp_path / "ysv.csv"
    with open(alt, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["year", "season", "value"])
        for t, v in rows:
            t = int(t)
            w.writerow([(t - 1) // 4 + 1, (t - 1) % 4 + 1, v])
    a, b = read_series(str(series_ii), 4), read_series(str(alt), 4)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.origin == b.origin == 1


def test_builtin_models_embed_published_seeds():
    seeds = {"I": [[-0.64, 0.46, 0.65, 0.68]],
             "II": [[0.08, -0.41, 0.52, 0.40], [0.22, 0.29, -0.58, -0.49]],
             "III": [[-0.64, -0.46, 0.65, 0.68], [-0.23, 0.95, -0.83, -0.89], [-0.30, 0.91, 0.47, -0.15]]}
    for name, rows in seeds.items():
        b = table2_model(f"table2:{name}")
        assert b.spec.seeds.T.tolist() == rows
        assert b.noise.sigma2.tolist() == TABLE3[name]["true"][-4:]
        assert b.blocks == (1,) * len(rows)


def test_json_model_file(tmp_path, capsys):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"period": 2, "sigma2": [1.0, 0.5], "seeds": [[0.5, -0.8]],
                                 "stationary": [[0.3], [0.1]]}))
    status, _, _ = run(capsys, "simulate", "--model", model, "--n", 40, "--burn-in", 5, "-o", tmp_path / "s.csv")
    assert status == 0
    assert len(read_rows(tmp_path / "s.csv")) == 41


def test_forecast_outputs(series_ii, tmp_path, capsys):
    base = ["--input", series_ii, "--period", 4, "--p", 2, "--m1", 2, "--restarts", 0]
    status, text, _ = run(capsys, "forecast", *base, "-H", 2, "--steps", 5, "-o", tmp_path / "fc.csv",
                          "--method", "mc")
    assert status == 0
    rows = read_rows(tmp_path / "fc.csv")
    assert rows[0] == ["time_index", "year", "season", "point", "lower", "upper", "sd"]
    assert [r[0] for r in rows[1:]] == ["241", "242", "243", "244", "245"]
    vs_path = tmp_path / "fc_vs.csv"
    run(capsys, "forecast", *base, "-H", 2, "--steps", 5, "-o", vs_path)
    a = np.array([r[3:] for r in rows[1:]], dtype=float)
    b = np.array([r[3:] for r in read_rows(vs_path)[1:]], dtype=float)
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8)


def test_forecast_log_scale_with_holdout(tmp_path, capsys):
    t = np.arange(1, 49)
    values = np.exp(0.01 * t + 0.2 * np.sin(t * np.pi / 2) + np.random.default_rng(0).normal(0, 0.05, 48))
    data, hold = tmp_path / "pos.csv", tmp_path / "hold.csv"
    with open(data, "w", newline="") as fh:
        csv.writer(fh).writerows([["time_index", "value"]] + [[i, repr(float(v))] for i, v in zip(t[:40], values[:40])])
    with open(hold, "w", newline="") as fh:
        csv.writer(fh).writerows([["time_index", "value"]] + [[i, repr(float(v))] for i, v in zip(t[40:], values[40:])])
    status, text, _ = run(capsys, "forecast", "--input", data, "--period", 4, "--p", 1, "--log", "-H", 2,
                          "--holdout", hold, "--metrics", tmp_path / "m.csv", "-o", tmp_path / "f.csv")
    assert status == 0
    rows = read_rows(tmp_path / "f.csv")
    assert rows[0][-3:] == ["point_exp", "lower_exp", "upper_exp"]
    assert float(rows[1][-3]) == pytest.approx(np.exp(float(rows[1][3])))
    m = read_rows(tmp_path / "m.csv")
    assert len(m) == 9 and m[0] == ["step", "mape", "rmse"]


def test_diagnose_outputs(series_ii, tmp_path, capsys):
    out = tmp_path / "diag"
    status, text, _ = run(capsys, "diagnose", "--input", series_ii, "--period", 4, "--p", 2, "--m1", 2,
                          "--restarts", 0, "--output-dir", out)
    assert status == 0
    acf = read_rows(out / "acf.csv")
    assert len(acf) == 1 + 4 * 12
    lr = read_rows(out / "lr.csv")
    assert lr[1][1] == "12.21"
    assert "LR unit-root test" in text


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="the published row is rounded and the estimator has a small-sample "
                                       "bias of about 0.005 (theta_12, theta_14), several standard errors at "
                                       "200 replications")
def test_mc_experiment_model_i(tmp_path, capsys):
    out = tmp_path / "mc.csv"
    status, _, _ = run(capsys, "mc-experiment", "--model", "table2:I", "--reps", 200, "--n", 240, "--seed", 42,
                       "-o", out)
    assert status == 0
    rows = {r[0]: np.array(r[1:], dtype=float) for r in read_rows(out)[1:]}
    np.testing.assert_allclose(rows["true"][:4], theta_general(table2_model("I").spec).phi[:, 0], rtol=1e-15)
    se = rows["sd"] / np.sqrt(200)
    assert np.all(np.abs(rows["mean"] - np.array(TABLE3["I"]["true"])) <= 3 * se)
