"""End-to-end command-line tests, driven in-process through main(argv)."""

import json
import shutil
import subprocess

import numpy as np
import pytest

import advreg.verify as verify_mod
from advreg.cli import main
from advreg.data import apply_standardizer, fit_standardizer, load_csv
from advreg.synthetic import dataset_to_csv, make_synthetic
from advreg.verify import CheckReport


@pytest.fixture(autouse=True)
def _no_ambient_seed(monkeypatch):
    # keep the "no seed anywhere -> 0" default reachable in every test
    monkeypatch.delenv("ADVREG_SEED", raising=False)


@pytest.fixture(scope="module")
def synth_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "synth.csv"
    ds = make_synthetic(m=80, d=3, mu=2.0, sigma=1.0, r2=0.6, seed=11)
    dataset_to_csv(ds, path)
    return str(path)


def run_cli(*argv):
    return main(list(argv))


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_tiny_csv(path):
    path.write_text("x,y\n1,2\n2,4\n3,5\n", encoding="utf-8")
    return str(path)


def write_model(path, theta, feature_names, algorithm="ols", standardize=False):
    model = {
        "algorithm": algorithm,
        "theta": list(theta),
        "preprocessing": {
            "standardize": standardize,
            "means": [0.0] * len(feature_names) if standardize else None,
            "stds": [1.0] * len(feature_names) if standardize else None,
            "feature_names": list(feature_names),
            "label_name": "y",
        },
    }
    path.write_text(json.dumps(model), encoding="utf-8")
    return str(path)


# ------------------------------------------------------------------ train


def test_train_ols_matches_hand_solution(tmp_path):
    csv = write_tiny_csv(tmp_path / "tiny.csv")
    out = str(tmp_path / "model.json")
    rc = run_cli("train", "--dataset", csv, "--label", "y", "--algorithm", "ols",
                 "--no-standardize", "--quiet", "--out", out)
    assert rc == 0
    model = read_json(out)
    # single regressor, no intercept: theta = sum(x*y) / sum(x^2) = 25/14
    assert model["theta"] == pytest.approx([25.0 / 14.0], abs=1e-12)
    assert model["algorithm"] == "ols"
    assert model["preprocessing"]["standardize"] is False
    assert model["preprocessing"]["feature_names"] == ["x"]
    assert model["preprocessing"]["label_name"] == "y"
    assert model["config"]["command"] == "train"


def test_train_accepts_label_column_index(tmp_path):
    csv = write_tiny_csv(tmp_path / "tiny.csv")
    out = str(tmp_path / "model.json")
    rc = run_cli("train", "--dataset", csv, "--label", "1", "--algorithm", "ols",
                 "--no-standardize", "--quiet", "--out", out)
    assert rc == 0
    assert read_json(out)["theta"] == pytest.approx([25.0 / 14.0], abs=1e-12)


def test_train_mlsg_with_beta_zero_matches_ols(synth_csv, tmp_path):
    args = ["--dataset", synth_csv, "--label", "label", "--quiet"]
    ols_out = str(tmp_path / "ols.json")
    mlsg_out = str(tmp_path / "mlsg.json")
    assert run_cli("train", *args, "--algorithm", "ols", "--out", ols_out) == 0
    assert run_cli("train", *args, "--algorithm", "mlsg", "--beta", "0",
                   "--lambda", "1", "--n", "3", "--out", mlsg_out) == 0
    theta_ols = np.array(read_json(ols_out)["theta"])
    theta_mlsg = np.array(read_json(mlsg_out)["theta"])
    assert np.max(np.abs(theta_ols - theta_mlsg)) <= 1e-8


def test_train_ridge_with_explicit_alpha_skips_cv(synth_csv, tmp_path):
    out = str(tmp_path / "ridge.json")
    rc = run_cli("train", "--dataset", synth_csv, "--label", "label",
                 "--algorithm", "ridge", "--alpha", "0.5", "--quiet", "--out", out)
    assert rc == 0
    model = read_json(out)
    assert model["diagnostics"]["alpha"] == 0.5
    assert "cv_errors" not in model["diagnostics"]


def test_train_mlsg_replay_pins_the_drawn_target(synth_csv, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "dataset": synth_csv, "label": "label", "algorithm": "mlsg",
        "seed": 4, "n": 2, "lambda": 1.0, "beta": 0.6,
        "target": {"kind": "constant", "value_range": [0.0, 4.0]},
    }), encoding="utf-8")
    first = str(tmp_path / "m1.json")
    again = str(tmp_path / "m2.json")
    assert run_cli("train", "--config", str(cfg_path), "--quiet", "--out", first) == 0
    model = read_json(first)
    drawn = model["config"]["target"]["value"]
    assert drawn is not None and 0.0 <= drawn <= 4.0
    # the artifact's embedded config replays the exact same fit
    assert run_cli("train", "--config", first, "--quiet", "--out", again) == 0
    assert read_json(again)["theta"] == model["theta"]


def test_train_error_exit_codes(tmp_path):
    csv = write_tiny_csv(tmp_path / "tiny.csv")
    out = str(tmp_path / "model.json")
    # no dataset anywhere -> config error
    assert run_cli("train", "--label", "y", "--algorithm", "ols",
                   "--quiet", "--out", out) == 2
    # unknown algorithm via config (flags are argparse-validated)
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"dataset": csv, "label": "y", "algorithm": "huh"}),
                   encoding="utf-8")
    assert run_cli("train", "--config", str(cfg), "--quiet", "--out", out) == 2
    # missing input file -> data error
    assert run_cli("train", "--dataset", str(tmp_path / "nope.csv"), "--label", "y",
                   "--algorithm", "ols", "--quiet", "--out", out) == 3
    # missing output directory surfaces as the file-not-found data error
    assert run_cli("train", "--dataset", csv, "--label", "y", "--algorithm", "ols",
                   "--quiet", "--out", str(tmp_path / "no_dir" / "model.json")) == 3
    # writing onto a directory -> OS error
    assert run_cli("train", "--dataset", csv, "--label", "y", "--algorithm", "ols",
                   "--quiet", "--out", str(tmp_path)) == 1


# ----------------------------------------------------------------- attack


def test_attack_on_zero_models_returns_data_unchanged(tmp_path):
    test_csv = tmp_path / "test.csv"
    test_csv.write_text("a,b,y\n1,2,10\n3,4,20\n5,6,30\n", encoding="utf-8")
    m1 = write_model(tmp_path / "m1.json", [0.0, 0.0], ["a", "b"])
    m2 = write_model(tmp_path / "m2.json", [0.0, 0.0], ["a", "b"], algorithm="ridge")
    out = str(tmp_path / "attacked.csv")
    rc = run_cli("attack", "--model", m1, "--model", m2, "--test", str(test_csv),
                 "--lambda", "1", "--delta-scale", "1.0", "--quiet", "--out", out)
    assert rc == 0
    original = load_csv(str(test_csv), "y")
    attacked = load_csv(out, "y")
    assert np.array_equal(attacked.X, original.X)
    assert np.array_equal(attacked.y, original.y)
    with open(out, "r", encoding="utf-8") as f:
        assert f.readline().strip() == "a,b,y"
    summary = read_json(out + ".summary.json")
    assert summary["summary"]["frobenius_shift"] == 0.0
    assert summary["summary"]["n_models"] == 2
    assert summary["summary"]["rows"] == 3
    assert summary["summary"]["shift_space"] == "original"
    assert summary["summary"]["algorithms"] == ["ols", "ridge"]


def test_attack_scalar_hand_value(tmp_path):
    # one feature, theta=1, z=2, lambda=1: X* = (x + 2) / (1 + 1) = 1.5
    test_csv = tmp_path / "test.csv"
    test_csv.write_text("x,y\n1,0\n1,0\n", encoding="utf-8")
    m = write_model(tmp_path / "m.json", [1.0], ["x"])
    out = str(tmp_path / "attacked.csv")
    rc = run_cli("attack", "--model", m, "--test", str(test_csv), "--lambda", "1",
                 "--constant-value", "2", "--quiet", "--out", out)
    assert rc == 0
    attacked = load_csv(out, "y")
    assert attacked.X[:, 0] == pytest.approx([1.5, 1.5], abs=1e-12)
    assert np.array_equal(attacked.y, np.array([0.0, 0.0]))


def test_attack_with_huge_effort_price_barely_moves_anything(synth_csv, tmp_path):
    model_out = str(tmp_path / "model.json")
    assert run_cli("train", "--dataset", synth_csv, "--label", "label",
                   "--algorithm", "ols", "--quiet", "--out", model_out) == 0
    out = str(tmp_path / "attacked.csv")
    rc = run_cli("attack", "--model", model_out, "--test", synth_csv,
                 "--lambda", "1e9", "--delta-scale", "2.0", "--quiet",
                 "--summary-out", str(tmp_path / "s.json"), "--out", out)
    assert rc == 0
    summary = read_json(str(tmp_path / "s.json"))
    # shift is reported in the model's standardized feature space
    assert summary["summary"]["shift_space"] == "standardized"
    ds = load_csv(synth_csv, "label")
    X_std = apply_standardizer(fit_standardizer(ds.X), ds.X)
    frob = float(np.sqrt(np.sum(X_std**2)))
    assert summary["summary"]["frobenius_shift"] <= 1e-3 * frob


def test_attack_rejects_mismatched_preprocessing(tmp_path):
    test_csv = tmp_path / "test.csv"
    test_csv.write_text("a,b,y\n1,2,10\n3,4,20\n", encoding="utf-8")
    m1 = write_model(tmp_path / "m1.json", [0.0, 0.0], ["a", "b"])
    m2 = write_model(tmp_path / "m2.json", [0.0, 0.0], ["a", "b"], standardize=True)
    rc = run_cli("attack", "--model", m1, "--model", m2, "--test", str(test_csv),
                 "--quiet", "--out", str(tmp_path / "attacked.csv"))
    assert rc == 2


def test_attack_rejects_wrong_test_columns(tmp_path):
    test_csv = tmp_path / "test.csv"
    test_csv.write_text("a,c,y\n1,2,10\n3,4,20\n", encoding="utf-8")
    m = write_model(tmp_path / "m.json", [0.0, 0.0], ["a", "b"])
    rc = run_cli("attack", "--model", m, "--test", str(test_csv),
                 "--quiet", "--out", str(tmp_path / "attacked.csv"))
    assert rc == 2


# --------------------------------------------------------------- evaluate


def eval_config(synth_csv, **overrides):
    cfg = {
        "dataset": synth_csv,
        "label": "label",
        "train_fraction": 0.5,
        "seed": 5,
        "n": 2,
        "algorithms": ["ols", "mlsg"],
        "defender_estimates": {"lambda": 1.0, "beta": 0.5,
                               "target": {"delta_scale": 1.0}},
        "actual": {"lambda": 1.0, "beta": 0.5, "target": {"delta_scale": 1.0}},
    }
    cfg.update(overrides)
    return cfg


def test_evaluate_beta_zero_expected_equals_clean(synth_csv, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(eval_config(
        synth_csv,
        defender_estimates={"lambda": 1.0, "beta": 0.0,
                            "target": {"delta_scale": 1.0}},
        actual={"lambda": 1.0, "beta": 0.0, "target": {"delta_scale": 1.0}},
    )), encoding="utf-8")
    out = str(tmp_path / "report.json")
    assert run_cli("evaluate", "--config", str(cfg_path), "--quiet", "--out", out) == 0
    report = read_json(out)
    for algo in ("ols", "mlsg"):
        row = report["results"][algo]
        assert row["rmse_expected"] == pytest.approx(row["rmse_clean"], rel=1e-12)
    assert report["config"]["command"] == "evaluate"
    assert report["config"]["seed"] == 5


def test_evaluate_without_out_prints_the_report(synth_csv, tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(eval_config(synth_csv)), encoding="utf-8")
    assert run_cli("evaluate", "--config", str(cfg_path), "--quiet") == 0
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"config", "results", "metadata"}
    assert set(doc["results"]) == {"ols", "mlsg"}


def test_evaluate_replay_from_emitted_report_is_byte_identical(synth_csv, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(eval_config(synth_csv)), encoding="utf-8")
    first = tmp_path / "r1.json"
    again = tmp_path / "r2.json"
    assert run_cli("evaluate", "--config", str(cfg_path), "--quiet",
                   "--out", str(first)) == 0
    assert run_cli("evaluate", "--config", str(first), "--quiet",
                   "--out", str(again)) == 0
    assert first.read_bytes() == again.read_bytes()


def test_evaluate_rejects_bad_train_fraction(synth_csv, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(eval_config(synth_csv, train_fraction=1.5)),
                        encoding="utf-8")
    assert run_cli("evaluate", "--config", str(cfg_path), "--quiet") == 2


# ------------------------------------------------------------------ sweep


def test_sweep_grid_csv_and_replay(synth_csv, tmp_path):
    cfg = eval_config(synth_csv, lambda_grid=[0.5, 1.0], beta_grid=[0.5], repeats=2)
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg), encoding="utf-8")
    base = ["sweep", "--config", str(cfg_path), "--quiet"]
    one = tmp_path / "s1.csv"
    two = tmp_path / "s2.csv"
    assert run_cli(*base, "--out", str(one)) == 0
    assert run_cli(*base, "--jobs", "2", "--out", str(two)) == 0
    # worker count must never change output bytes
    assert one.read_bytes() == two.read_bytes()
    assert (one.parent / "s1.csv.meta.json").read_bytes().replace(b"s1.csv", b"x") \
        == (two.parent / "s2.csv.meta.json").read_bytes().replace(b"s2.csv", b"x")

    lines = one.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "lambda,beta,algorithm,rmse_expected,rmse_clean,rmse_attacked"
    assert len(lines) == 1 + 2 * 1 * 2  # grid cells x algorithms

    # the sidecar metadata is itself a replayable config
    replay = tmp_path / "s3.csv"
    assert run_cli("sweep", "--config", str(one) + ".meta.json", "--quiet",
                   "--out", str(replay)) == 0
    assert replay.read_bytes() == one.read_bytes()


def test_sweep_requires_both_grids(synth_csv, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(eval_config(synth_csv, lambda_grid=[1.0])),
                        encoding="utf-8")
    assert run_cli("sweep", "--config", str(cfg_path), "--quiet",
                   "--out", str(tmp_path / "s.csv")) == 2


# ----------------------------------------------------------------- verify


def test_verify_runs_selected_checks_and_reports(tmp_path):
    out = str(tmp_path / "verify.json")
    rc = run_cli("verify", "--checks", "rosen_pd,equilibrium_fixed_point",
                 "--trials", "3", "--quiet", "--out", out)
    assert rc == 0
    doc = read_json(out)
    names = [rep["check_name"] for rep in doc["reports"]]
    assert names == ["rosen_pd", "equilibrium_fixed_point"]
    assert all(rep["failures"] == 0 for rep in doc["reports"])
    assert doc["config"]["trials"] == 3


def test_verify_unknown_check_is_a_config_error():
    assert run_cli("verify", "--checks", "nope", "--trials", "2", "--quiet") == 2


def test_verify_failure_exits_five(monkeypatch):
    def failing_stub(trials=1000, seed=0):
        return CheckReport(check_name="rosen_pd", trials=trials, failures=1,
                           worst_violation=1.0, sample_of_failures=[{"trial": 0}],
                           notes="injected failure for the exit-code path")

    monkeypatch.setitem(verify_mod.ALL_CHECKS, "rosen_pd", failing_stub)
    assert run_cli("verify", "--checks", "rosen_pd", "--trials", "4", "--quiet") == 5


# ------------------------------------------------------------- seed rules


def test_seed_precedence_flag_config_env(tmp_path, monkeypatch):
    def seed_of(*argv):
        out = str(tmp_path / "v.json")
        assert run_cli("verify", "--checks", "rosen_pd", "--trials", "2",
                       "--quiet", "--out", out, *argv) == 0
        return read_json(out)["config"]["seed"]

    assert seed_of() == 0
    monkeypatch.setenv("ADVREG_SEED", "7")
    assert seed_of() == 7
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9}), encoding="utf-8")
    assert seed_of("--config", str(cfg)) == 9
    assert seed_of("--config", str(cfg), "--seed", "3") == 3
    monkeypatch.setenv("ADVREG_SEED", "not-a-number")
    assert run_cli("verify", "--checks", "rosen_pd", "--trials", "2", "--quiet") == 2


# ---------------------------------------------------------- installed tool


def test_installed_entry_point_runs():
    exe = shutil.which("advreg")
    assert exe, "the advreg console script should be on PATH after installation"
    proc = subprocess.run([exe, "verify", "--checks", "rosen_pd", "--trials", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
