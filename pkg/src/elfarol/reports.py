"""Report emission: per-sweep statistics files and the plot-data CSVs.

A sweep directory holds ``manifest.json``, ``traces/`` and ``reports/``.
The figure/table CSVs combine several sweep directories (one per agent
model) living under a common root.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from . import econometrics, tailstats
from .errors import DomainError, ElFarolError
from .harness import ExperimentConfig, RunTrace, aligned_change_inputs, load_traces, summarize

DEFAULT_ACF_MAX_LAG = 20
DEFAULT_IRF_HORIZON = 15

FIGURE_FILES = (
    "fig1_utilisation.csv",
    "fig2_timeseries.csv",
    "fig3_violin.csv",
    "fig4_acf.csv",
    "fig6_irf.csv",
    "fig7_aic_rank.csv",
    "table1_sigma.csv",
    "table2_hill.csv",
    "table3_granger.csv",
)


def _float_csv(frame: pd.DataFrame, path: Path) -> None:
    frame.to_csv(path, index=False, float_format="%.12g")


def _group_by_c(traces: Sequence[RunTrace]) -> dict[float, list[RunTrace]]:
    grouped: dict[float, list[RunTrace]] = {}
    for tr in traces:
        grouped.setdefault(tr.c, []).append(tr)
    return {c: sorted(v, key=lambda t: t.run_index) for c, v in sorted(grouped.items())}


def tail_summary(
    traces: Sequence[RunTrace],
    cfg: ExperimentConfig,
    tail_fractions: Sequence[float] = tailstats.DEFAULT_TAIL_FRACTIONS,
) -> dict:
    """Per-capacity crisis rates and pooled tail indices.

    Sigma rates are computed per run and averaged; tail indices pool the
    absolute changes of all runs at one capacity before estimating, since
    single-run tails are thin.
    """
    out: dict = {}
    for c, group in _group_by_c(traces).items():
        game = cfg.game_config(c)
        rates = []
        pooled: list[np.ndarray] = []
        for tr in group:
            cs = tailstats.ChangeSeries.from_attendance(
                tr.attendance, cfg.n_agents, cfg.burn_in
            )
            try:
                rates.append(tailstats.sigma_event_rate(cs.deltas))
            except DomainError:
                pass  # frozen run; no deltas variance
            pooled.append(tailstats.absolute_changes(tr.attendance, game))
        sample = np.concatenate(pooled) if pooled else np.array([])
        hill = {}
        for frac in tail_fractions:
            try:
                hill[f"{100 * frac:g}%"] = tailstats.hill_estimator(sample, frac)
            except DomainError:
                hill[f"{100 * frac:g}%"] = None
        out[f"{c:g}"] = {
            "sigma_rate_mean": float(np.mean(rates)) if rates else None,
            "sigma_rate_std": float(np.std(rates)) if rates else None,
            "sigma_rates": rates,
            "hill": hill,
            "n_runs": len(group),
        }
    return out


def acf_table(
    traces: Sequence[RunTrace],
    cfg: ExperimentConfig,
    max_lag: int = DEFAULT_ACF_MAX_LAG,
) -> pd.DataFrame:
    """Mean volatility ACF across runs per capacity, with the noise band."""
    rows = []
    for c, group in _group_by_c(traces).items():
        per_run = []
        band = math.nan
        for tr in group:
            cs = tailstats.ChangeSeries.from_attendance(
                tr.attendance, cfg.n_agents, cfg.burn_in
            )
            try:
                acf = tailstats.autocorrelation(cs.volatility, max_lag)
            except DomainError:
                continue
            per_run.append(acf.correlations)
            band = acf.band
        if not per_run:
            continue
        mean_r = np.mean(per_run, axis=0)
        for lag in range(max_lag + 1):
            rows.append({"c": c, "lag": lag, "r": mean_r[lag], "band": band})
    return pd.DataFrame(rows)


def causality_tables(
    traces: Sequence[RunTrace],
    cfg: ExperimentConfig,
    *,
    max_lag: int = 10,
    horizon: int = DEFAULT_IRF_HORIZON,
    n_capacity_tests: int | None = None,
) -> tuple[dict, pd.DataFrame, pd.DataFrame]:
    """Granger report dict plus IRF and AIC-rank long tables.

    Per-run p-values aggregate per capacity through the harmonic mean;
    the 0.05 threshold is Bonferroni-divided by the number of capacities
    tested. A failing run is recorded and skipped, not fatal.
    """
    grouped = _group_by_c(traces)
    n_tests = n_capacity_tests or len(grouped)
    report: dict = {"bonferroni_tests": n_tests, "per_c": {}}
    irf_rows = []
    aic_rows = []
    for c, group in grouped.items():
        p_values = []
        lags = []
        failures = []
        gates = []
        for tr in group:
            try:
                div, vol = aligned_change_inputs(tr, cfg)
                result = econometrics.causality_pipeline(
                    div, vol, max_lag=max_lag, horizon=horizon
                )
            except (ElFarolError, np.linalg.LinAlgError) as exc:
                failures.append({"run": tr.run_index, "error": str(exc)})
                continue
            p_values.append(result.granger.p_value)
            lags.append(result.selected_lag)
            gates.append(result.stationarity_ok)
            response = result.irf.unit_shock_response(target=1, shock=0)
            for h, value in enumerate(response):
                irf_rows.append(
                    {"c": c, "run": tr.run_index, "horizon": h, "response": value}
                )
            ranks = np.argsort(np.argsort(result.aic_by_lag)) + 1
            for lag_idx, (aic, rank) in enumerate(
                zip(result.aic_by_lag, ranks), start=1
            ):
                aic_rows.append(
                    {"c": c, "run": tr.run_index, "lag": lag_idx, "aic": aic, "rank": int(rank)}
                )
        entry: dict = {
            "n_runs": len(group),
            "n_analyzed": len(p_values),
            "failures": failures,
            "p_values": p_values,
            "selected_lags": lags,
            "stationarity_gates_passed": int(sum(gates)),
        }
        if p_values:
            hmp = econometrics.harmonic_mean_p([max(p, 1e-300) for p in p_values])
            entry["hmp"] = hmp
            entry["significant_bonferroni"] = bool(hmp < 0.05 / n_tests)
        else:
            entry["hmp"] = None
            entry["significant_bonferroni"] = None
        report["per_c"][f"{c:g}"] = entry
    return report, pd.DataFrame(irf_rows), pd.DataFrame(aic_rows)


def write_reports(
    cfg: ExperimentConfig, traces: Sequence[RunTrace], reports_dir: str | Path
) -> None:
    """Emit the statistics files for one sweep directory."""
    reports_dir = Path(reports_dir)
    reports_dir.mkdir(parents=True, exist_ok=True)

    with open(reports_dir / "tail_report.json", "w") as fh:
        json.dump(
            {"model": cfg.model, "per_c": tail_summary(traces, cfg)},
            fh,
            indent=2,
            sort_keys=True,
        )
    _float_csv(acf_table(traces, cfg), reports_dir / "acf.csv")

    # Diversity-driven causality analysis only applies to belief-holding models.
    if cfg.model in ("brats", "as"):
        granger, irf, aic = causality_tables(traces, cfg)
        with open(reports_dir / "granger_report.json", "w") as fh:
            json.dump({"model": cfg.model, **granger}, fh, indent=2, sort_keys=True)
        _float_csv(irf, reports_dir / "irf.csv")
        _float_csv(aic, reports_dir / "aic_rank.csv")


def _model_dirs(root: Path) -> dict[str, Path]:
    found = {}
    for sub in sorted(root.iterdir()):
        if (sub / "manifest.json").exists():
            with open(sub / "manifest.json") as fh:
                model = json.load(fh)["config"]["model"]
            found[model] = sub
    if not found:
        raise DomainError(f"no sweep directories with manifest.json under {root}")
    return found


def write_figure_csvs(root: str | Path, out_dir: str | Path) -> list[Path]:
    """Combine the model sweeps under ``root`` into the plot-data CSVs."""
    root = Path(root)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweeps = {}
    for model, path in _model_dirs(root).items():
        cfg, traces = load_traces(path)
        sweeps[model] = (cfg, traces, path)

    written = []

    def emit(name: str, frame: pd.DataFrame) -> None:
        _float_csv(frame, out / name)
        written.append(out / name)

    # fig1: convergence summary per model.
    fig1 = []
    fig2 = []
    table1 = []
    table2 = []
    fig3 = []
    fig4 = []
    for model, (cfg, traces, path) in sweeps.items():
        summary = summarize(traces, cfg)
        summary.insert(0, "model", model)
        fig1.append(summary)

        for c, group in _group_by_c(traces).items():
            stack = np.stack([tr.attendance for tr in group]).astype(float)
            mean = stack.mean(axis=0) / cfg.n_agents
            std = stack.std(axis=0) / cfg.n_agents
            fig2.append(
                pd.DataFrame(
                    {
                        "model": model,
                        "c": c,
                        "t": np.arange(stack.shape[1]),
                        "mean_rate": mean,
                        "std_rate": std,
                    }
                )
            )

        tails = tail_summary(traces, cfg)
        for c_key, entry in tails.items():
            table1.append(
                {"model": model, "c": float(c_key), "sigma_rate": entry["sigma_rate_mean"]}
            )
            for frac_key, alpha in entry["hill"].items():
                table2.append(
                    {
                        "model": model,
                        "tail_size": frac_key,
                        "c": float(c_key),
                        "alpha": alpha,
                    }
                )
                if alpha is not None:
                    fig3.append({"model": model, "alpha": alpha})

        acf = acf_table(traces, cfg)
        acf.insert(0, "model", model)
        fig4.append(acf)

    emit("fig1_utilisation.csv", pd.concat(fig1, ignore_index=True))
    emit("fig2_timeseries.csv", pd.concat(fig2, ignore_index=True))
    emit("fig3_violin.csv", pd.DataFrame(fig3))
    emit("fig4_acf.csv", pd.concat(fig4, ignore_index=True))
    emit("table1_sigma.csv", pd.DataFrame(table1))
    emit("table2_hill.csv", pd.DataFrame(table2))

    # fig6/fig7/table3 come from the causality reports of belief models.
    fig6 = []
    fig7 = []
    table3 = []
    for model, (cfg, traces, path) in sweeps.items():
        reports_dir = path / "reports"
        irf_path = reports_dir / "irf.csv"
        aic_path = reports_dir / "aic_rank.csv"
        granger_path = reports_dir / "granger_report.json"
        if not irf_path.exists():
            continue
        irf = pd.read_csv(irf_path)
        if not irf.empty:
            agg = (
                irf.groupby(["c", "horizon"])["response"]
                .agg(median="median", q25=lambda s: s.quantile(0.25), q75=lambda s: s.quantile(0.75))
                .reset_index()
            )
            agg.insert(0, "model", model)
            fig6.append(agg)
        aic = pd.read_csv(aic_path)
        if not aic.empty:
            agg = (
                aic.groupby(["c", "lag"])["rank"]
                .agg(median_rank="median", q25=lambda s: s.quantile(0.25), q75=lambda s: s.quantile(0.75))
                .reset_index()
            )
            agg.insert(0, "model", model)
            fig7.append(agg)
        if granger_path.exists() and model == "brats":
            with open(granger_path) as fh:
                granger = json.load(fh)
            for c_key, entry in sorted(granger["per_c"].items(), key=lambda kv: float(kv[0])):
                table3.append(
                    {
                        "c": float(c_key),
                        "hmp": entry["hmp"],
                        "significant_bonferroni": entry["significant_bonferroni"],
                        "n_runs_analyzed": entry["n_analyzed"],
                    }
                )

    emit("fig6_irf.csv", pd.concat(fig6, ignore_index=True) if fig6 else pd.DataFrame(
        columns=["model", "c", "horizon", "median", "q25", "q75"]))
    emit("fig7_aic_rank.csv", pd.concat(fig7, ignore_index=True) if fig7 else pd.DataFrame(
        columns=["model", "c", "lag", "median_rank", "q25", "q75"]))
    emit("table3_granger.csv", pd.DataFrame(
        table3, columns=["c", "hmp", "significant_bonferroni", "n_runs_analyzed"]))
    return written
