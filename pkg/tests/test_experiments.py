import math

import pytest
from hypothesis import given, strategies as st

from privpower.cli import main
from privpower.errors import ConfigError, EmptyInput
from privpower.experiments import (ExperimentConfig, bootstrap_ci, epsilon_to_reach, parse_config,
                                   run_experiment)


def test_bootstrap_constant():
    assert bootstrap_ci([2.5] * 7) == (2.5, 2.5, 2.5)


def test_bootstrap_single_value():
    assert bootstrap_ci([0.3]) == (0.3, 0.3, 0.3)


def test_bootstrap_binary():
    mean, lo, hi = bootstrap_ci([0, 1] * 500, resamples=2000, seed=1)
    assert mean == 0.5 and 0 <= lo < 0.5 < hi <= 1


def test_bootstrap_empty():
    with pytest.raises(EmptyInput):
        bootstrap_ci([])


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.integers(0, 1000))
def test_bootstrap_brackets_mean_and_is_seeded(values, seed):
    a = bootstrap_ci(values, seed=seed, resamples=200)
    assert a == bootstrap_ci(values, seed=seed, resamples=200)
    assert a[1] <= a[0] + 1e-9 and a[0] <= a[2] + 1e-9


def test_parse_config_types_and_comments():
    cfg = parse_config("experiment = figure1  # trailing\nepsilons = 1, 10\nruns=2\n")
    assert cfg.epsilons == (1.0, 10.0) and cfg.runs == 2


def test_parse_unknown_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("colour = blue\n")


def test_parse_invalid_delta_names_condition():
    with pytest.raises(ConfigError, match=r"exp\(-epsilon/4\)"):
        parse_config("experiment = figure1\nepsilons = 1\ndelta = 0.9\n")


def test_runs_must_be_positive():
    with pytest.raises(ConfigError):
        parse_config("runs = 0\n")


def test_env_seed_override(monkeypatch):
    monkeypatch.setenv("DP_PPM_SEED", "42")
    assert parse_config("seed = 1\n").seed == 42
    assert parse_config("seed = 1\n", {"seed": 7}).seed == 7


def test_config_hash_stable_and_sensitive():
    a, b = ExperimentConfig(seed=1), ExperimentConfig(seed=1)
    assert a.digest() == b.digest() != ExperimentConfig(seed=2).digest()


def test_fixed_sensitivity_default():
    assert ExperimentConfig(p=32).fixed_sensitivity() == 8.0
    assert ExperimentConfig(fixed_value=1.0).fixed_sensitivity() == 1.0


def test_epsilon_to_reach():
    assert epsilon_to_reach([1, 10, 100], [0.9, 0.5, 0.1], 0.3) == pytest.approx(math.sqrt(1000))
    assert epsilon_to_reach([1, 10], [0.2, 0.1], 0.3) == 1
    assert epsilon_to_reach([1, 10], [0.9, 0.5], 0.3) == math.inf


def test_figure3_one_row_per_k(tmp_path):
    cfg = parse_config("experiment = figure3\nn_values = 1000\ntrials = 1\n")
    (path,) = run_experiment(cfg, tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert len(lines) == 2 + len(range(64, 1001, 64))


def test_single_run_prints_small_error(tmp_path, capsys):
    cfg = parse_config("experiment = single-run\nmatrix = diag:4,1,0.1\np = 2\niterations = 20\n")
    run_experiment(cfg, tmp_path)
    err = float(capsys.readouterr().out.split()[-1])
    assert err <= 1e-8


def test_figure1_small_is_byte_identical(tmp_path):
    text = ("experiment = figure1\ndataset = synthetic:n_users=60;n_items=30;clusters=4\n"
            "epsilons = 5, 500\np = 4\nruns = 2\nresamples = 50\n")
    (tmp_path / "f.cfg").write_text(text)
    assert main(["--config", str(tmp_path / "f.cfg"), "--out", str(tmp_path / "a")]) == 0
    assert main(["--config", str(tmp_path / "f.cfg"), "--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    for name in ("figure1.csv", "figure1_runs.csv", "figure1.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a" / "figure1_runs.csv").read_text().splitlines()
    assert len(rows) == 2 + 4 * 2 * 2


def test_table_pipelines(tmp_path):
    for text, name in (("experiment = table1\nparties = 1, 8\nsizes = 10\n", "table1.csv"),
                       ("experiment = table2\ndataset = synthetic:n_users=50;n_items=20;clusters=3\np = 4\n",
                        "table2.csv")):
        (path,) = run_experiment(parse_config(text), tmp_path)
        assert path.name == name and path.read_text().startswith("# config_hash=")


def test_cli_exit_codes(tmp_path):
    assert main(["--config", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("experiment = single-run\nmatrix = diag:1,2\np = 2\nk = 3\n")
    assert main(["--config", str(bad), "--out", str(tmp_path)]) == 3
