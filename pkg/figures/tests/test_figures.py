import hashlib

import pandas as pd
import pytest
from click.testing import CliRunner

from elfarol_figures import KINDS, SCHEMAS, SchemaError, load_validated, render_all
from elfarol_figures.cli import main


def _synthetic_csvs(out_dir):
    """Write schema-conformant CSVs with plausible shapes for every kind."""
    out_dir.mkdir(parents=True, exist_ok=True)
    models = ["brats", "as", "noise"]
    cs = [0.3, 0.5, 0.7]
    rows1, rows2, rows3, rows4 = [], [], [], []
    t1, t2, f6, f7, t3 = [], [], [], [], []
    for m in models:
        for c in cs:
            rows1.append(
                dict(model=m, c=c, mean_rate=c + 0.01, std_rate=0.02,
                     mean_error=1.5, std_error=0.4, n_runs=3)
            )
            for t in range(20):
                rows2.append(
                    dict(model=m, c=c, t=t, mean_rate=c, std_rate=0.03)
                )
            for lag in range(6):
                rows4.append(
                    dict(model=m, c=c, lag=lag, r=0.8**lag if lag else 1.0, band=0.07)
                )
            t1.append(dict(model=m, c=c, sigma_rate=0.9))
            for tail in ("2.5%", "5%", "10%"):
                t2.append(dict(model=m, tail_size=tail, c=c, alpha=3.0))
                rows3.append(dict(model=m, alpha=3.0))
    for m in ("brats", "as"):
        for c in cs:
            for h in range(10):
                f6.append(dict(model=m, c=c, horizon=h, median=0.5**h,
                               q25=0.4**h, q75=0.6**h))
            for lag in range(1, 6):
                f7.append(dict(model=m, c=c, lag=lag, median_rank=lag,
                               q25=lag - 0.5, q75=lag + 0.5))
    for c in cs:
        t3.append(dict(c=c, hmp=0.001, significant_bonferroni=True,
                       n_runs_analyzed=3))
    frames = {
        "fig1_utilisation": pd.DataFrame(rows1),
        "fig2_timeseries": pd.DataFrame(rows2),
        "fig3_violin": pd.DataFrame(rows3),
        "fig4_acf": pd.DataFrame(rows4),
        "table1_sigma": pd.DataFrame(t1),
        "table2_hill": pd.DataFrame(t2),
        "fig6_irf": pd.DataFrame(f6),
        "fig7_aic_rank": pd.DataFrame(f7),
        "table3_granger": pd.DataFrame(t3),
    }
    for kind, frame in frames.items():
        frame.to_csv(out_dir / f"{kind}.csv", index=False)
    return out_dir


@pytest.fixture(scope="module")
def csv_dir(tmp_path_factory):
    return _synthetic_csvs(tmp_path_factory.mktemp("csvs"))


def _digest_dir(path):
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(path.iterdir())
    }


class TestSchemas:
    def test_valid_csv_loads(self, csv_dir):
        for kind in KINDS:
            frame = load_validated(csv_dir / f"{kind}.csv", kind)
            assert set(SCHEMAS[kind]).issubset(frame.columns)

    def test_missing_column_lists_expected_and_found(self, csv_dir, tmp_path):
        frame = pd.read_csv(csv_dir / "fig4_acf.csv").drop(columns=["band"])
        bad = tmp_path / "fig4_acf.csv"
        frame.to_csv(bad, index=False)
        with pytest.raises(SchemaError) as err:
            load_validated(bad, "fig4_acf")
        assert "band" in str(err.value)
        assert "expected" in str(err.value)

    def test_empty_file_is_schema_error(self, tmp_path):
        empty = tmp_path / "fig3_violin.csv"
        empty.write_text("")
        with pytest.raises(SchemaError):
            load_validated(empty, "fig3_violin")

    def test_missing_file_is_schema_error(self, tmp_path):
        with pytest.raises(SchemaError):
            load_validated(tmp_path / "fig1_utilisation.csv", "fig1_utilisation")

    def test_unknown_kind_rejected(self, csv_dir):
        with pytest.raises(SchemaError):
            load_validated(csv_dir / "fig1_utilisation.csv", "fig5_surface")


class TestRenderAll:
    def test_all_nine_rendered(self, csv_dir, tmp_path):
        written = render_all(csv_dir, tmp_path)
        assert len(written) == 9
        assert sorted(p.stem for p in written) == sorted(KINDS)
        assert all(p.stat().st_size > 0 for p in written)

    def test_inputs_untouched(self, csv_dir, tmp_path):
        before = _digest_dir(csv_dir)
        render_all(csv_dir, tmp_path)
        assert _digest_dir(csv_dir) == before

    def test_deterministic_bytes(self, csv_dir, tmp_path):
        a = render_all(csv_dir, tmp_path / "a")
        b = render_all(csv_dir, tmp_path / "b")
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_kind_subset(self, csv_dir, tmp_path):
        written = render_all(csv_dir, tmp_path, ["fig3_violin"])
        assert [p.stem for p in written] == ["fig3_violin"]

    def test_unknown_kind_raises(self, csv_dir, tmp_path):
        with pytest.raises(ValueError):
            render_all(csv_dir, tmp_path, ["fig5_surface"])


class TestCli:
    def test_full_render(self, csv_dir, tmp_path):
        out = tmp_path / "png"
        result = CliRunner().invoke(
            main, ["--in", str(csv_dir), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("*.png"))) == 9

    def test_kinds_option(self, csv_dir, tmp_path):
        out = tmp_path / "png"
        result = CliRunner().invoke(
            main,
            ["--in", str(csv_dir), "--out", str(out), "--kinds", "fig4_acf,fig3_violin"],
        )
        assert result.exit_code == 0, result.output
        assert sorted(p.stem for p in out.glob("*.png")) == ["fig3_violin", "fig4_acf"]

    def test_truncated_csv_gives_schema_diagnostic(self, csv_dir, tmp_path):
        broken = tmp_path / "csvs"
        broken.mkdir()
        for p in csv_dir.iterdir():
            (broken / p.name).write_bytes(p.read_bytes())
        # Truncate one file to its first line (header lost mid-column).
        text = (broken / "fig6_irf.csv").read_text().splitlines()[0]
        (broken / "fig6_irf.csv").write_text(text.rsplit(",", 2)[0] + "\n")
        result = CliRunner().invoke(
            main, ["--in", str(broken), "--out", str(tmp_path / "png")]
        )
        assert result.exit_code == 1
        assert "schema error" in result.output


class TestEndToEnd:
    """[SECONDARY] acceptance: render a real sweep's CSVs without error."""

    def test_renders_from_simulator_output(self, tmp_path):
        elfarol = pytest.importorskip("elfarol")
        from elfarol.harness import ExperimentConfig, run_experiment
        from elfarol.reports import write_figure_csvs

        root = tmp_path / "sweeps"
        for model in ("brats", "as", "noise"):
            cfg = ExperimentConfig(
                model=model, c_values=(0.5,), runs=3, n_agents=20,
                rounds=120, burn_in=20, seed=5,
            )
            run_experiment(cfg, root / model)
        csv_dir = tmp_path / "csv"
        write_figure_csvs(root, csv_dir)
        written = render_all(csv_dir, tmp_path / "png")
        ok = len(written) == 9 and all(p.exists() for p in written)
        print(f"[ACCEPTANCE] figure-regeneration: {'PASS' if ok else 'FAIL'} "
              f"{len(written)}/9 artifacts")
        assert ok
