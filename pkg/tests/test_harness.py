import csv
import json
import math

import pytest

from graphtest.errors import ParameterError, ParseError
from graphtest.harness import (
    CSV_COLUMNS,
    SUMMARY_COLUMNS,
    ExperimentConfig,
    build_cells,
    load_config,
    run_experiment,
    sweep_boundary,
    wilson_interval,
    write_summary,
)
from graphtest.specs import ER, Statistic, spec_to_dict


def _config(**over):
    base = {
        "version": 1,
        "scenario": "planted_vs_er",
        "grid": {"n": [60, 80], "p": [0.3], "gamma": [0.0, 0.2]},
        "statistic": "triangle",
        "class_rule": "ier_semisparse",
        "trials": 6,
        "seed": 11,
    }
    base.update(over)
    return base


def _write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


def test_config_round_trip(tmp_path):
    cfg = load_config(_write(tmp_path, _config()), environ={})
    assert cfg.scenario == "planted_vs_er" and cfg.seed == 11 and cfg.trials == 6
    assert cfg.statistic == Statistic("triangle")
    assert cfg.default_epsilon_rule == "zero" and cfg.default_rho_rule == "cor1_7"


@pytest.mark.parametrize(
    "over, exc",
    [
        ({"version": 2}, ParseError),
        ({"bogus": 1}, ParseError),
        ({"scenario": "nope"}, ParameterError),
        ({"trials": 0}, ParameterError),
        ({"grid": {"n": [61], "p": [0.3], "gamma": [0.1]}}, ParameterError),
        ({"grid": {"n": [60], "p": [0.3], "gamma": [0.1], "gamma_multipliers": [1]}}, ParameterError),
        ({"grid": {"n": [], "p": [0.3], "gamma": [0.1]}}, ParameterError),
        ({"scenario": "custom_pair"}, ParameterError),
        ({"statistic": "lambda:0"}, ParseError),
    ],
)
def test_config_validation(tmp_path, over, exc):
    with pytest.raises(exc):
        load_config(_write(tmp_path, _config(**over)), environ={})


def test_missing_key_and_bad_json(tmp_path):
    data = _config()
    del data["trials"]
    with pytest.raises(ParseError, match="trials"):
        load_config(_write(tmp_path, data), environ={})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_config(bad, environ={})


def test_seed_environment_override(tmp_path):
    path = _write(tmp_path, _config())
    assert load_config(path, environ={"GRAPHTEST_SEED": "0x10"}).seed == 16
    with pytest.raises(ParameterError):
        load_config(path, environ={"GRAPHTEST_SEED": "abc"})


def test_csv_header_and_rows(tmp_path):
    cfg = load_config(_write(tmp_path, _config()), environ={})
    out = tmp_path / "run.csv"
    result = run_experiment(cfg, out=out)
    with out.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 4 * 6
    assert len(result.summary) == 4
    for s in result.summary:
        assert 0.0 <= s["rejection_rate"] <= 1.0
        assert s["wilson_low"] <= s["rejection_rate"] <= s["wilson_high"]
    assert result.summary_for(gamma=0.0, n1=60)[0]["label"] == "h0"
    assert result.summary_for(gamma=0.0, n1=60)[0]["error_kind"] == "type_i"


def test_output_is_identical_across_worker_counts(tmp_path):
    cfg = load_config(_write(tmp_path, _config()), environ={})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(cfg, out=a, workers=1)
    run_experiment(cfg, out=b, workers=3)
    assert a.read_bytes() == b.read_bytes()


def test_resume_completes_to_identical_output(tmp_path):
    cfg = load_config(_write(tmp_path, _config()), environ={})
    full, partial = tmp_path / "full.csv", tmp_path / "partial.csv"
    first = run_experiment(cfg, out=full)
    lines = full.read_text().splitlines(keepends=True)
    # keep two complete cells and half of the third
    partial.write_text("".join(lines[: 1 + 2 * 6 + 3]))
    resumed = run_experiment(cfg, out=partial, resume=True)
    assert partial.read_bytes() == full.read_bytes()
    assert resumed.summary == first.summary
    assert len(resumed.records) == 2 * 6


def test_resume_rejects_foreign_header(tmp_path):
    cfg = load_config(_write(tmp_path, _config()), environ={})
    out = tmp_path / "x.csv"
    out.write_text("a,b,c\n")
    with pytest.raises(ParseError):
        run_experiment(cfg, out=out, resume=True)


def test_infeasible_cells_are_kept_as_invalid(tmp_path):
    data = _config(grid={"n": [60], "p": [0.05], "gamma_multipliers": [0, 4]})
    cfg = load_config(_write(tmp_path, data), environ={})
    cells = build_cells(cfg)
    # the triangle threshold at half-size 30 and p = 0.05 exceeds p, so any positive multiplier is infeasible
    assert [c.label for c in cells] == ["h0", "invalid"]
    assert "ParameterError" in cells[1].error
    result = run_experiment(cfg, out=tmp_path / "inv.csv")
    bad = result.summary[1]
    assert bad["completed"] == 0 and bad["error_kind"] == "none"
    assert math.isnan(bad["rejection_rate"])


def test_per_trial_errors_are_recorded(tmp_path):
    data = _config(
        scenario="custom_pair",
        grid={},
        statistic="lambda:5",
        class_rule="ier_spectral",
        trials=3,
        pairs=[[spec_to_dict(ER(4, 0.5)), spec_to_dict(ER(10, 0.5))]],
        epsilon_rule="zero",
        rho_rule="theorem1_3p5",
    )
    cfg = ExperimentConfig.from_dict(data)
    out = tmp_path / "err.csv"
    result = run_experiment(cfg, out=out)
    with out.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert all(row["decision"] == "" and row["error"] for row in rows)
    assert result.summary[0]["completed"] == 0


def test_er_vs_geom_cells():
    cfg = ExperimentConfig(
        scenario="er_vs_geom",
        grid={"n": [100], "p_exponent": [-0.5], "r": [2]},
        statistic=Statistic("triangle"),
        class_rule="geom",
        trials=2,
        mu_trials=4,
        tau_pairs=20_000,
    )
    cells = build_cells(cfg)
    assert [c.params["pair"] for c in cells] == ["er/er", "geom/geom", "er/geom"]
    assert cells[0].params["p"] == pytest.approx(0.1)
    assert cells[0].label == "h0" and cells[1].label == "h0"
    assert cells[1].spec1.tau == cells[2].spec2.tau


def test_wilson_interval():
    low, high = wilson_interval(5, 100)
    assert low < 0.05 < high
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    assert all(math.isnan(x) for x in wilson_interval(0, 0))


def test_write_summary(tmp_path):
    summary = sweep_boundary([40], 0.3, [0.0, 2.0], Statistic("triangle"), trials=5, seed=3)
    path = tmp_path / "s.csv"
    write_summary(summary, path)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == SUMMARY_COLUMNS and len(rows) == 3
    assert [s["multiplier"] for s in summary] == [0.0, 2.0]
