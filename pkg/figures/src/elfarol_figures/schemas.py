"""Column schemas for the nine plot-data CSVs and their validation.

The renderer never recomputes statistics; it only displays what the CSVs
contain, so schema validation is the whole input contract.
"""
from __future__ import annotations

from pathlib import Path

import pandas as pd


class SchemaError(Exception):
    """Input CSV does not match its documented column schema."""


#: Required columns per figure kind, keyed by the CSV stem.
SCHEMAS: dict[str, list[str]] = {
    "fig1_utilisation": ["model", "c", "mean_rate", "std_rate", "mean_error", "std_error"],
    "fig2_timeseries": ["model", "c", "t", "mean_rate", "std_rate"],
    "fig3_violin": ["model", "alpha"],
    "fig4_acf": ["model", "c", "lag", "r", "band"],
    "table1_sigma": ["model", "c", "sigma_rate"],
    "table2_hill": ["model", "tail_size", "c", "alpha"],
    "fig6_irf": ["model", "c", "horizon", "median", "q25", "q75"],
    "fig7_aic_rank": ["model", "c", "lag", "median_rank", "q25", "q75"],
    "table3_granger": ["c", "hmp", "significant_bonferroni", "n_runs_analyzed"],
}

KINDS = tuple(SCHEMAS)


def load_validated(path: str | Path, kind: str) -> pd.DataFrame:
    """Read one CSV and check it against the kind's schema.

    Raises SchemaError listing expected vs found columns on any mismatch,
    including unreadable or empty files.
    """
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown figure kind {kind!r}; known: {', '.join(KINDS)}")
    expected = SCHEMAS[kind]
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: file not found (expected columns {expected})")
    try:
        frame = pd.read_csv(path)
    except Exception as exc:  # pragma: no cover - pandas error text varies
        raise SchemaError(f"{path}: unreadable CSV ({exc}); expected columns {expected}")
    missing = [col for col in expected if col not in frame.columns]
    if missing:
        raise SchemaError(
            f"{path}: schema mismatch for {kind}: expected columns {expected}, "
            f"found {list(frame.columns)} (missing {missing})"
        )
    return frame
