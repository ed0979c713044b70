import csv
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bandit_nash.cli import main
from bandit_nash.exceptions import ScheduleValidationError, UsageError
from bandit_nash.experiment import (
    OUTPUT_DIR_ENV,
    ExperimentConfig,
    config_equivalent,
    dump_config,
    load_config,
    read_summary,
    run_experiment,
    summarize,
    write_trace,
)

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

SMALL = """
algo = "bandit"
seeds = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
T = 300
log_every = 50
target = "known"
output_dir = "unused"

[game]
name = "cournot_duopoly"

[schedule]
a1 = "5/9"
a2 = "5/27"
a3 = "1/54"
a4 = "1/6"
"""


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def fake_trace(path, dists):
    rows = [(t, [0.0], [0.0], d, 1.0, 1.0, 1.0, 0.1) for t, d in enumerate(dists)]
    write_trace(path, "bandit", "g", 0, rows, 1)


def test_fraction_strings_and_defaults(tmp_path):
    cfg = load_config(write(tmp_path, SMALL))
    assert cfg.schedule["a1"] == "5/9"
    assert cfg.T == 300 and cfg.log_every == 50


def test_config_invariants():
    with pytest.raises(UsageError):
        ExperimentConfig(game={"name": "cournot"}, algo="bandit", seeds=[])
    with pytest.raises(UsageError):
        ExperimentConfig(game={"name": "cournot"}, T=0)
    with pytest.raises(UsageError):
        ExperimentConfig(game={"name": "cournot"}, log_every=0)
    with pytest.raises(UsageError):
        ExperimentConfig(game={"name": "cournot"}, algo="sgd")


def test_run_writes_ten_traces_and_summary(tmp_path):
    res = run_experiment(write(tmp_path, SMALL), output_dir=tmp_path / "out")
    traces = sorted((tmp_path / "out").glob("trace_*.csv"))
    assert len(traces) == 10
    assert (tmp_path / "out" / "summary.csv").exists()
    with open(traces[0]) as fh:
        header = next(csv.reader(fh))
    assert header == ["algo", "game", "seed", "t", "mu_0", "mu_1", "a_0", "a_1",
                      "dist_to_target", "gamma", "sigma", "eps", "r"]
    s = res.summary
    assert np.all(s.p10 <= s.median + 1e-15) and np.all(s.median <= s.p90 + 1e-15)


def test_numbers_use_17_significant_digits(tmp_path):
    run_experiment(write(tmp_path, SMALL.replace("[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]", "[1]")),
                   output_dir=tmp_path)
    with open(tmp_path / "trace_bandit_seed1.csv") as fh:
        rows = list(csv.DictReader(fh))
    x = rows[-1]["mu_0"]
    assert float(x) == float(format(float(x), ".17g"))
    assert len(x.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 17


def test_env_var_overrides_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env"))
    run_experiment(write(tmp_path, SMALL.replace("[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]", "[1]")))
    assert (tmp_path / "env" / "summary.csv").exists()


def test_invalid_schedule_rejected(tmp_path, capsys):
    p = write(tmp_path, SMALL.replace('a1 = "5/9"', "a1 = 0.4"))
    with pytest.raises(ScheduleValidationError, match="condition iii: 2a1 > 1"):
        run_experiment(p, output_dir=tmp_path)
    code = main(["run", str(p), "--output-dir", str(tmp_path)])
    assert code != 0
    assert "condition iii: 2a1 > 1" in capsys.readouterr().err


def test_unknown_game(tmp_path):
    with pytest.raises(UsageError):
        run_experiment(write(tmp_path, SMALL.replace("cournot_duopoly", "chess")), output_dir=tmp_path)


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(UsageError):
        run_experiment(write(tmp_path, SMALL), output_dir=blocker / "sub")


def test_config_echo_round_trip(tmp_path):
    for path in [write(tmp_path, SMALL), *sorted(CONFIGS.glob("*.toml"))]:
        cfg = load_config(path)
        again = tmp_path / "echo.toml"
        again.write_text(dump_config(cfg))
        assert config_equivalent(cfg, load_config(again))


def test_summary_single_trace(tmp_path):
    fake_trace(tmp_path / "a.csv", [3.0, 2.0, 1.0])
    s = summarize([tmp_path / "a.csv"])
    np.testing.assert_array_equal(s.median, [3.0, 2.0, 1.0])


def test_summary_two_point_median_is_midpoint(tmp_path):
    d = np.array([1.0, 0.5, 0.25, 0.1])
    fake_trace(tmp_path / "a.csv", d)
    fake_trace(tmp_path / "b.csv", 3 * d)
    s = summarize(str(tmp_path / "*.csv"))
    np.testing.assert_allclose(s.median, 2 * d)


def test_summary_windows_and_schema_mismatch(tmp_path):
    fake_trace(tmp_path / "a.csv", np.arange(20, 0, -1.0))
    s = summarize([tmp_path / "a.csv"])
    assert s.initial_window["median"] == pytest.approx(19.5)
    assert s.final_window["median"] == pytest.approx(1.5)
    rows = [(0, [0.0, 0.0], [0.0, 0.0], 1.0, 1, 1, 1, 1)]
    write_trace(tmp_path / "b.csv", "bandit", "g", 0, rows, 2)
    with pytest.raises(UsageError):
        summarize([tmp_path / "a.csv", tmp_path / "b.csv"])


def test_summary_file_round_trip(tmp_path):
    res = run_experiment(write(tmp_path, SMALL), output_dir=tmp_path)
    back = read_summary(res.summary_path)
    np.testing.assert_array_equal(back.median, res.summary.median)
    assert back.final_window == res.summary.final_window


def test_tikhonov_path_least_norm_medians_decrease(tmp_path):
    res = run_experiment(CONFIGS / "affine_tikhonov.toml", output_dir=tmp_path)
    m = res.summary.median
    assert np.all(np.diff(m) < 0)


def test_one_timescale_config_runs(tmp_path):
    cfg = load_config(CONFIGS / "affine_one_timescale.toml")
    cfg.T = 2000
    res = run_experiment(cfg, output_dir=tmp_path)
    assert res.trace_paths[0].name == "trace_z-iterate.csv"


def test_byte_identical_summaries(tmp_path):
    p = write(tmp_path, SMALL)
    run_experiment(p, output_dir=tmp_path / "a")
    run_experiment(p, output_dir=tmp_path / "b")
    assert (tmp_path / "a" / "summary.csv").read_bytes() == (tmp_path / "b" / "summary.csv").read_bytes()


def test_worker_pool_matches_serial(tmp_path):
    p = write(tmp_path, SMALL.replace("[1, 2, 3, 4, 5, 6, 7, 8, 9, 10]", "[1, 2]"))
    run_experiment(p, output_dir=tmp_path / "serial")
    run_experiment(p, output_dir=tmp_path / "pool", workers=2)
    for name in ("summary.csv", "trace_bandit_seed2.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "pool" / name).read_bytes()


def test_cli_summarize_and_validate(tmp_path, capsys):
    fake_trace(tmp_path / "a.csv", [1.0, 2.0])
    assert main(["summarize", str(tmp_path / "*.csv"), "-o", str(tmp_path / "s.csv")]) == 0
    assert (tmp_path / "s.csv").exists()
    assert main(["validate-schedule", "--a1", "5/9", "--a2", "5/27", "--a3", "1/54", "--a4", "1/6"]) == 0
    assert main(["validate-schedule", "--a1", "0.4", "--a2", "5/27", "--a3", "1/54", "--a4", "1/6"]) == 1
    assert "condition iii: 2a1 > 1" in capsys.readouterr().err


def test_cli_diagnose_writes_report(tmp_path):
    assert main(["diagnose", "lemma3", "--seed", "0", "--output-dir", str(tmp_path)]) == 0
    text = (tmp_path / "diagnose_lemma3_seed0.csv").read_text()
    assert "Ball" in text and "pass" in text


def test_module_entry_point(tmp_path):
    env = dict(os.environ)
    out = subprocess.run([sys.executable, "-m", "bandit_nash", "validate-schedule", "--a1", "0.4",
                          "--a2", "5/27", "--a3", "1/54", "--a4", "1/6"],
                         capture_output=True, text=True, env=env)
    assert out.returncode == 1
    assert "condition iii" in out.stdout + out.stderr
