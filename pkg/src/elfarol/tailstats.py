"""Crisis and stylized-fact statistics over attendance traces."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .game import GameConfig

#: Tail sizes commonly used for tail-index estimation.
DEFAULT_TAIL_FRACTIONS = (0.025, 0.05, 0.10)


@dataclass
class ChangeSeries:
    """Round-to-round attendance changes and the derived volatility series.

    Volatility is measured in percent of total capacity N (not of the
    previous attendance, which can be zero at low c).
    """

    deltas: np.ndarray
    volatility: np.ndarray

    @classmethod
    def from_attendance(
        cls, attendance: Sequence[int], n_agents: int, burn_in: int = 0
    ) -> "ChangeSeries":
        arr = np.asarray(attendance, dtype=float)[burn_in:]
        if arr.size < 2:
            raise DomainError("need at least two post-burn-in rounds for changes")
        deltas = np.diff(arr)
        return cls(deltas=deltas, volatility=100.0 * np.abs(deltas) / n_agents)


def sigma_event_rate(deltas: Sequence[float]) -> float:
    """Percentage of changes further than three standard deviations from the mean."""
    arr = np.asarray(deltas, dtype=float)
    if arr.size < 2:
        raise DomainError("need at least two changes")
    sigma = float(arr.std(ddof=1))
    if sigma == 0.0:
        raise DomainError("zero standard deviation: event rate undefined")
    events = np.abs(arr - arr.mean()) > 3.0 * sigma
    return 100.0 * float(events.sum()) / arr.size


def hill_estimator(samples: Sequence[float], tail_fraction: float) -> float:
    """Tail-index estimate from the top order statistics.

    Non-positive samples are dropped (their logs are undefined). With
    k = ceil(tail_fraction * n) retained extremes, the estimate is the
    reciprocal mean log-ratio against the (k+1)-th largest value.
    """
    if not 0.0 < tail_fraction < 1.0:
        raise DomainError(f"tail_fraction must be in (0, 1), got {tail_fraction}")
    arr = np.asarray(samples, dtype=float)
    arr = arr[arr > 0.0]
    n = arr.size
    k = int(math.ceil(tail_fraction * n))
    if k < 2 or n < k + 1:
        raise DomainError(
            f"insufficient positive samples (n={n}) for tail_fraction={tail_fraction}"
        )
    top = np.sort(arr)[::-1][: k + 1]
    if top[0] == top[k]:
        raise DomainError("all tail values equal: tail index undefined")
    mean_log = float(np.mean(np.log(top[:k] / top[k])))
    return 1.0 / mean_log


@dataclass
class AcfResult:
    """Sample autocorrelations r_0..r_maxlag with the white-noise band."""

    correlations: np.ndarray
    band: float


def autocorrelation(series: Sequence[float], max_lag: int) -> AcfResult:
    """Sample ACF up to ``max_lag`` with the +-1.96/sqrt(T) significance band."""
    arr = np.asarray(series, dtype=float)
    t = arr.size
    if t <= max_lag + 2:
        raise DomainError(f"series length {t} too short for max_lag={max_lag}")
    centered = arr - arr.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise DomainError("zero-variance series has no autocorrelation")
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for lag in range(1, max_lag + 1):
        r[lag] = float(centered[:-lag] @ centered[lag:]) / denom
    return AcfResult(correlations=r, band=1.96 / math.sqrt(t))


def absolute_changes(attendance: Sequence[int], cfg: GameConfig) -> np.ndarray:
    """Non-zero absolute post-burn-in attendance changes (tail-index input)."""
    cs = ChangeSeries.from_attendance(attendance, cfg.n_agents, cfg.burn_in)
    mags = np.abs(cs.deltas)
    return mags[mags > 0.0]
