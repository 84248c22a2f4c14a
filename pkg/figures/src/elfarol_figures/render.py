"""Figure renderers, one per plot-data CSV kind.

Every renderer takes an input directory holding the CSVs and an output
directory, writes one PNG, and returns its path. Style is fixed
(purple = recursive reasoners, orange = adaptive strategies, grey dashed
= noise traders) and nothing timestamp-dependent is embedded, so renders
are byte-deterministic given identical inputs.
"""
from __future__ import annotations

from pathlib import Path
from typing import Callable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from .schemas import KINDS, load_validated

MODEL_COLORS = {"brats": "#7b2d8b", "as": "#e07b27", "noise": "#888888"}
MODEL_STYLES = {"brats": "-", "as": "-", "noise": "--"}
MODEL_LABELS = {"brats": "BRATS", "as": "adaptive strategies", "noise": "noise traders"}

#: Tail-index range observed across real markets, drawn as reference lines.
MARKET_ALPHA_RANGE = (1.0, 4.0)

plt.rcParams.update(
    {
        "figure.dpi": 110,
        "savefig.dpi": 110,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "legend.frameon": False,
    }
)


def _style(model: str) -> dict:
    return {
        "color": MODEL_COLORS.get(model, "#333333"),
        "linestyle": MODEL_STYLES.get(model, "-"),
        "label": MODEL_LABELS.get(model, model),
    }


def _save(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.png"
    fig.savefig(path, metadata={"Software": "elfarol-figures"})
    plt.close(fig)
    return path


def render_fig1_utilisation(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "fig1_utilisation.csv", "fig1_utilisation")
    fig, (ax_rate, ax_err) = plt.subplots(1, 2, figsize=(9, 3.6))
    for model, grp in frame.groupby("model"):
        grp = grp.sort_values("c")
        style = _style(str(model))
        ax_rate.plot(grp["c"], grp["mean_rate"], marker="o", ms=3, **style)
        ax_rate.fill_between(
            grp["c"],
            grp["mean_rate"] - grp["std_rate"],
            grp["mean_rate"] + grp["std_rate"],
            color=style["color"],
            alpha=0.2,
            linewidth=0,
        )
        ax_err.errorbar(
            grp["c"], grp["mean_error"], yerr=grp["std_error"],
            marker="o", ms=3, capsize=2, **style,
        )
    ax_rate.plot([0, 1], [0, 1], ":", color="red", linewidth=0.8, label="capacity")
    ax_rate.set(xlabel="capacity c", ylabel="mean attendance rate")
    ax_err.set(xlabel="capacity c", ylabel="utilisation error")
    ax_rate.legend()
    fig.tight_layout()
    return _save(fig, out_dir, "fig1_utilisation")


def render_fig2_timeseries(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "fig2_timeseries.csv", "fig2_timeseries")
    cs = sorted(frame["c"].unique())
    ncols = 3
    nrows = int(np.ceil(len(cs) / ncols))
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.2 * nrows), sharex=True, sharey=True
    )
    axes = np.atleast_1d(axes).ravel()
    for ax, c in zip(axes, cs):
        sub = frame[frame["c"] == c]
        for model, grp in sub.groupby("model"):
            grp = grp.sort_values("t")
            style = _style(str(model))
            ax.plot(grp["t"], grp["mean_rate"], linewidth=0.8, **style)
            ax.fill_between(
                grp["t"],
                grp["mean_rate"] - grp["std_rate"],
                grp["mean_rate"] + grp["std_rate"],
                color=style["color"],
                alpha=0.15,
                linewidth=0,
            )
        ax.axhline(c, color="red", linestyle=":", linewidth=0.8)
        ax.set_title(f"c = {c:g}")
    for ax in axes[len(cs):]:
        ax.set_visible(False)
    handles, labels = axes[0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower right", ncol=3)
    fig.supxlabel("round")
    fig.supylabel("attendance rate")
    fig.tight_layout()
    return _save(fig, out_dir, "fig2_timeseries")


def render_fig3_violin(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "fig3_violin.csv", "fig3_violin")
    models = [m for m in MODEL_COLORS if m in set(frame["model"])]
    data = [frame.loc[frame["model"] == m, "alpha"].dropna().to_numpy() for m in models]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    if data:
        parts = ax.violinplot(data, showmedians=True)
        for body, model in zip(parts["bodies"], models):
            body.set_facecolor(MODEL_COLORS[model])
            body.set_alpha(0.6)
    for alpha in MARKET_ALPHA_RANGE:
        ax.axhline(alpha, color="grey", linestyle="--", linewidth=0.9)
    ax.set_xticks(range(1, len(models) + 1), [MODEL_LABELS[m] for m in models])
    ax.set_ylabel("tail index α")
    fig.tight_layout()
    return _save(fig, out_dir, "fig3_violin")


def render_fig4_acf(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "fig4_acf.csv", "fig4_acf")
    cs = sorted(frame["c"].unique())
    ncols = 3
    nrows = int(np.ceil(len(cs) / ncols))
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.2 * nrows), sharex=True, sharey=True
    )
    axes = np.atleast_1d(axes).ravel()
    for ax, c in zip(axes, cs):
        sub = frame[frame["c"] == c]
        band = float(sub["band"].iloc[0])
        lags = sorted(sub["lag"].unique())
        ax.fill_between(
            [min(lags), max(lags)], -band, band, color="grey", alpha=0.25, linewidth=0
        )
        for model, grp in sub.groupby("model"):
            grp = grp.sort_values("lag")
            ax.plot(grp["lag"], grp["r"], marker=".", ms=3, linewidth=0.8,
                    **_style(str(model)))
        ax.set_title(f"c = {c:g}")
        ax.set_ylim(-0.3, 1.05)
    for ax in axes[len(cs):]:
        ax.set_visible(False)
    handles, labels = axes[0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower right", ncol=3)
    fig.supxlabel("lag")
    fig.supylabel("volatility autocorrelation")
    fig.tight_layout()
    return _save(fig, out_dir, "fig4_acf")


def render_table1_sigma(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "table1_sigma.csv", "table1_sigma")
    fig, ax = plt.subplots(figsize=(6, 3.6))
    models = [m for m in MODEL_COLORS if m in set(frame["model"])]
    cs = sorted(frame["c"].unique())
    width = 0.8 / max(len(models), 1)
    for i, model in enumerate(models):
        sub = frame[frame["model"] == model].set_index("c").reindex(cs)
        ax.bar(
            np.arange(len(cs)) + i * width,
            sub["sigma_rate"],
            width=width,
            color=MODEL_COLORS[model],
            label=MODEL_LABELS[model],
        )
    ax.set_xticks(np.arange(len(cs)) + 0.4 - width / 2, [f"{c:g}" for c in cs])
    ax.set(xlabel="capacity c", ylabel="3σ⁺ event rate (%)")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_dir, "table1_sigma")


def render_table2_hill(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "table2_hill.csv", "table2_hill")
    tail_sizes = sorted(frame["tail_size"].unique())
    fig, axes = plt.subplots(
        1, len(tail_sizes), figsize=(3.2 * len(tail_sizes), 3.2), sharey=True
    )
    axes = np.atleast_1d(axes)
    for ax, tail in zip(axes, tail_sizes):
        sub = frame[frame["tail_size"] == tail]
        for model, grp in sub.groupby("model"):
            grp = grp.sort_values("c")
            ax.plot(grp["c"], grp["alpha"], marker="o", ms=3, **_style(str(model)))
        ax.set_title(f"tail {tail}")
        ax.set_xlabel("capacity c")
    axes[0].set_ylabel("tail index α")
    axes[0].legend()
    fig.tight_layout()
    return _save(fig, out_dir, "table2_hill")


def render_fig6_irf(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "fig6_irf.csv", "fig6_irf")
    cs = sorted(frame["c"].unique())
    ncols = 3
    nrows = max(int(np.ceil(len(cs) / ncols)), 1)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.2 * nrows), sharex=True
    )
    axes = np.atleast_1d(axes).ravel()
    for ax, c in zip(axes, cs):
        sub = frame[frame["c"] == c]
        for model, grp in sub.groupby("model"):
            grp = grp.sort_values("horizon")
            style = _style(str(model))
            ax.plot(grp["horizon"], grp["median"], marker=".", ms=3, **style)
            ax.fill_between(
                grp["horizon"], grp["q25"], grp["q75"],
                color=style["color"], alpha=0.2, linewidth=0,
            )
        ax.axhline(0.0, color="black", linewidth=0.6)
        ax.set_title(f"c = {c:g}")
    for ax in axes[len(cs):]:
        ax.set_visible(False)
    fig.supxlabel("horizon")
    fig.supylabel("volatility response to diversity shock")
    fig.tight_layout()
    return _save(fig, out_dir, "fig6_irf")


def render_fig7_aic_rank(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "fig7_aic_rank.csv", "fig7_aic_rank")
    cs = sorted(frame["c"].unique())
    ncols = 3
    nrows = max(int(np.ceil(len(cs) / ncols)), 1)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.2 * nrows), sharex=True, sharey=True
    )
    axes = np.atleast_1d(axes).ravel()
    for ax, c in zip(axes, cs):
        sub = frame[frame["c"] == c]
        for model, grp in sub.groupby("model"):
            grp = grp.sort_values("lag")
            style = _style(str(model))
            ax.plot(grp["lag"], grp["median_rank"], marker=".", ms=3, **style)
            ax.fill_between(
                grp["lag"], grp["q25"], grp["q75"],
                color=style["color"], alpha=0.2, linewidth=0,
            )
        ax.set_title(f"c = {c:g}")
    for ax in axes[len(cs):]:
        ax.set_visible(False)
    fig.supxlabel("VAR lag")
    fig.supylabel("AIC rank (1 = best)")
    fig.tight_layout()
    return _save(fig, out_dir, "fig7_aic_rank")


def render_table3_granger(in_dir: Path, out_dir: Path) -> Path:
    frame = load_validated(in_dir / "table3_granger.csv", "table3_granger")
    frame = frame.sort_values("c")
    fig, ax = plt.subplots(figsize=(6, 3.2))
    colors = [
        MODEL_COLORS["brats"] if sig else "#bbbbbb"
        for sig in frame["significant_bonferroni"]
    ]
    with np.errstate(divide="ignore"):
        heights = -np.log10(frame["hmp"].to_numpy(dtype=float))
    ax.bar([f"{c:g}" for c in frame["c"]], heights, color=colors)
    ax.set(xlabel="capacity c", ylabel="-log10 harmonic-mean p")
    ax.axhline(-np.log10(0.05), color="grey", linestyle="--", linewidth=0.9,
               label="p = 0.05")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_dir, "table3_granger")


RENDERERS: dict[str, Callable[[Path, Path], Path]] = {
    "fig1_utilisation": render_fig1_utilisation,
    "fig2_timeseries": render_fig2_timeseries,
    "fig3_violin": render_fig3_violin,
    "fig4_acf": render_fig4_acf,
    "table1_sigma": render_table1_sigma,
    "table2_hill": render_table2_hill,
    "fig6_irf": render_fig6_irf,
    "fig7_aic_rank": render_fig7_aic_rank,
    "table3_granger": render_table3_granger,
}

assert tuple(RENDERERS) == KINDS


def render_all(in_dir: str | Path, out_dir: str | Path, kinds=None) -> list[Path]:
    """Render the requested kinds (default: all nine) and return the paths."""
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    selected = list(kinds) if kinds else list(KINDS)
    unknown = [k for k in selected if k not in RENDERERS]
    if unknown:
        raise ValueError(f"unknown kinds {unknown}; known: {', '.join(KINDS)}")
    return [RENDERERS[k](in_dir, out_dir) for k in selected]
