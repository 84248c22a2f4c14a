"""Batch figure rendering CLI.

Exit codes: 0 success, 1 bad arguments or schema error, 2 unexpected
rendering failure.
"""
from __future__ import annotations

import sys

import click

from .render import render_all
from .schemas import KINDS, SchemaError


@click.command()
@click.option("--in", "in_dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Directory holding the plot-data CSVs.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Directory for the rendered PNGs.")
@click.option("--kinds", default=None,
              help=f"Comma-separated subset of: {', '.join(KINDS)} (default: all).")
def main(in_dir: str, out_dir: str, kinds: str | None) -> None:
    """Render publication-style figures from the simulator's CSV reports."""
    selected = [k.strip() for k in kinds.split(",") if k.strip()] if kinds else None
    try:
        written = render_all(in_dir, out_dir, selected)
    except (SchemaError, ValueError) as exc:
        click.echo(f"schema error: {exc}", err=True)
        sys.exit(1)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        click.echo(f"rendering failed: {exc}", err=True)
        sys.exit(2)
    for path in written:
        click.echo(str(path))


if __name__ == "__main__":
    main()
