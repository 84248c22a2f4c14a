import json

import numpy as np
import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from elfarol.cli import main
from elfarol.harness import ExperimentConfig, run_experiment, simulate_run
from elfarol.reports import (
    FIGURE_FILES,
    acf_table,
    causality_tables,
    tail_summary,
    write_figure_csvs,
)


def small_cfg(model, **kw):
    defaults = dict(
        model=model,
        c_values=(0.5,),
        runs=3,
        n_agents=20,
        rounds=120,
        burn_in=20,
        seed=9,
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


@pytest.fixture(scope="module")
def sweep_root(tmp_path_factory):
    """One tiny persisted sweep per model under a common root."""
    root = tmp_path_factory.mktemp("sweeps")
    for model in ("brats", "as", "noise"):
        run_experiment(small_cfg(model), root / model)
    return root


class TestTailSummary:
    def test_structure(self):
        cfg = small_cfg("noise")
        traces = [simulate_run(cfg, 0.5, r) for r in range(3)]
        out = tail_summary(traces, cfg)
        entry = out["0.5"]
        assert entry["n_runs"] == 3
        assert len(entry["sigma_rates"]) == 3
        assert set(entry["hill"]) == {"2.5%", "5%", "10%"}

    def test_small_sample_hill_reported_as_missing(self):
        cfg = small_cfg("noise", rounds=40, burn_in=10)
        traces = [simulate_run(cfg, 0.5, 0)]
        out = tail_summary(traces, cfg)
        # 29 deltas cannot support a 2.5% tail estimate (k < 2)
        assert out["0.5"]["hill"]["2.5%"] is None


class TestAcfTable:
    def test_columns_and_lag_zero(self):
        cfg = small_cfg("noise")
        traces = [simulate_run(cfg, 0.5, r) for r in range(3)]
        frame = acf_table(traces, cfg, max_lag=5)
        assert list(frame.columns) == ["c", "lag", "r", "band"]
        lag0 = frame[frame["lag"] == 0]
        assert np.allclose(lag0["r"], 1.0)
        assert len(frame) == 6


class TestCausalityTables:
    def test_brats_outputs(self):
        cfg = small_cfg("brats", rounds=300, burn_in=50)
        traces = [simulate_run(cfg, 0.5, r) for r in range(2)]
        report, irf, aic = causality_tables(traces, cfg, max_lag=3)
        entry = report["per_c"]["0.5"]
        assert entry["n_analyzed"] + len(entry["failures"]) == 2
        if entry["n_analyzed"]:
            assert 0 <= entry["hmp"] <= 1
            assert set(irf.columns) == {"c", "run", "horizon", "response"}
            assert set(aic.columns) == {"c", "run", "lag", "aic", "rank"}
            # ranks per run form a permutation of 1..max_lag
            one_run = aic[aic["run"] == aic["run"].iloc[0]]
            assert sorted(one_run["rank"]) == list(range(1, 4))


class TestFigureCsvs:
    def test_all_nine_written(self, sweep_root, tmp_path):
        written = write_figure_csvs(sweep_root, tmp_path)
        assert sorted(p.name for p in written) == sorted(FIGURE_FILES)
        for path in written:
            assert path.exists()

    def test_fig1_has_all_models(self, sweep_root, tmp_path):
        write_figure_csvs(sweep_root, tmp_path)
        fig1 = pd.read_csv(tmp_path / "fig1_utilisation.csv")
        assert set(fig1["model"]) == {"brats", "as", "noise"}

    def test_table3_only_brats(self, sweep_root, tmp_path):
        write_figure_csvs(sweep_root, tmp_path)
        table3 = pd.read_csv(tmp_path / "table3_granger.csv")
        assert set(table3["c"]) == {0.5}


class TestCli:
    def _write_config(self, tmp_path, **kw):
        cfg = small_cfg("noise", **kw)
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(cfg.to_dict()))
        return path

    def test_simulate_and_analyze_and_report(self, tmp_path):
        runner = CliRunner()
        config = self._write_config(tmp_path)
        out = tmp_path / "root" / "noise"
        result = runner.invoke(
            main, ["simulate", "--config", str(config), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (out / "manifest.json").exists()
        assert (out / "reports" / "tail_report.json").exists()

        result = runner.invoke(main, ["analyze", "--traces", str(out)])
        assert result.exit_code == 0, result.output

        figures = tmp_path / "figures"
        result = runner.invoke(
            main, ["report", "--root", str(tmp_path / "root"), "--out", str(figures)]
        )
        assert result.exit_code == 0, result.output
        for name in FIGURE_FILES:
            assert (figures / name).exists()

    def test_config_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text(yaml.safe_dump({"model": "quantum", "out_dir": "x"}))
        result = CliRunner().invoke(main, ["simulate", "--config", str(bad)])
        assert result.exit_code == 1

    def test_missing_out_dir_exit_code(self, tmp_path):
        config = tmp_path / "config.yaml"
        config.write_text(yaml.safe_dump({"model": "noise"}))
        result = CliRunner().invoke(main, ["simulate", "--config", str(config)])
        assert result.exit_code == 1

    def test_seed_override_changes_traces(self, tmp_path):
        runner = CliRunner()
        config = self._write_config(tmp_path)
        out1 = tmp_path / "s1"
        out2 = tmp_path / "s2"
        runner.invoke(main, ["simulate", "--config", str(config), "--out", str(out1)])
        runner.invoke(
            main,
            ["simulate", "--config", str(config), "--seed", "123", "--out", str(out2)],
        )
        m1 = json.loads((out1 / "manifest.json").read_text())
        m2 = json.loads((out2 / "manifest.json").read_text())
        assert m1["config_hash"] != m2["config_hash"]
