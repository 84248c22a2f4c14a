"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click

from .errors import ConfigError, ElFarolError
from .harness import ExperimentConfig, load_traces, run_experiment
from .reports import write_figure_csvs, write_reports


@click.group()
def main() -> None:
    """Market-entrance game simulator and analysis pipeline."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (defaults to the config's out_dir).")
def simulate(config_path: str, seed: int | None, jobs: int, out_dir: str | None) -> None:
    """Run the configured Monte Carlo sweep and write traces + reports."""
    try:
        cfg = ExperimentConfig.from_yaml(config_path)
        if seed is not None:
            cfg = ExperimentConfig.from_mapping({**cfg.to_dict(), "seed": seed})
        target = out_dir or cfg.out_dir
        if target is None:
            raise ConfigError("no output directory given (config out_dir or --out)")
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    try:
        traces = run_experiment(cfg, target, jobs=jobs)
    except ElFarolError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"wrote {len(traces)} traces to {target}")


@main.command()
@click.option("--traces", "traces_dir", required=True, type=click.Path(exists=True),
              help="A sweep directory containing manifest.json and traces/.")
def analyze(traces_dir: str) -> None:
    """Re-run the statistics reports on an existing sweep directory."""
    try:
        cfg, traces = load_traces(traces_dir)
    except (ConfigError, FileNotFoundError, KeyError) as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(1)
    try:
        write_reports(cfg, traces, Path(traces_dir) / "reports")
    except ElFarolError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"reports written to {Path(traces_dir) / 'reports'}")


@main.command()
@click.option("--root", "root_dir", required=True, type=click.Path(exists=True),
              help="Directory containing one sweep subdirectory per model.")
@click.option("--out", "out_dir", required=True, type=click.Path())
def report(root_dir: str, out_dir: str) -> None:
    """Write the plot-data CSVs combining every model sweep under ROOT."""
    try:
        written = write_figure_csvs(root_dir, out_dir)
    except ElFarolError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(2)
    for path in written:
        click.echo(str(path))


if __name__ == "__main__":
    main()
