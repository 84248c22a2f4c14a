"""Population heterogeneity as normalized histogram entropy.

Bin counts follow the Freedman-Diaconis rule (ceiling applied to the
paper-style |range| / width ratio). Degenerate samples fall back to
Sturges' rule (zero IQR, non-zero range) or a single bin (all values
identical), which reports zero diversity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .baselines import AsAgent, AsStrategy
from .brats import BratsAgent
from .errors import DomainError


class DiversityKind(Enum):
    BETA_RESOURCES = "beta_resources"
    STRATEGY_CODES = "strategy_codes"


@dataclass
class DiversitySample:
    values: np.ndarray
    kind: DiversityKind

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size == 0:
            raise DomainError("diversity sample must be non-empty")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("diversity sample must be finite")


def fd_bin_count(values: Sequence[float]) -> int:
    """Number of equal-width histogram bins for a sample.

    Width = 2 * IQR / cbrt(n) (quartiles by linear interpolation between
    order statistics); bin count = ceil(range / width). Zero IQR with a
    non-degenerate range falls back to Sturges; an all-identical sample
    gets a single bin.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return 1
    span = float(arr.max() - arr.min())
    if span == 0.0:
        return 1
    q75, q25 = np.percentile(arr, [75.0, 25.0])
    iqr = float(q75 - q25)
    if iqr == 0.0:
        return int(math.ceil(math.log2(arr.size))) + 1
    width = 2.0 * iqr / np.cbrt(arr.size)
    return int(math.ceil(span / width))


def normalized_entropy(sample: DiversitySample | Sequence[float]) -> float:
    """Histogram entropy scaled to [0, 1] by the uniform-distribution entropy."""
    values = sample.values if isinstance(sample, DiversitySample) else np.asarray(sample, dtype=float)
    if values.size == 0:
        raise DomainError("cannot measure diversity of an empty sample")
    bins = fd_bin_count(values)
    if bins <= 1:
        return 0.0
    counts, _ = np.histogram(values, bins=bins, range=(values.min(), values.max()))
    props = counts[counts > 0] / values.size
    h = float(-(props * np.log2(props)).sum())
    return h / math.log2(bins)


def strategy_to_decimal(strategy: AsStrategy) -> int:
    """Decimal encoding of a strategy's sign bitstring (MSB first, 0 maps to 1)."""
    bits = (strategy.weights >= 0.0).astype(int)
    length = bits.size
    return int(sum(int(b) << (length - j - 1) for j, b in enumerate(bits)))


def population_diversity(population: Sequence, kind: DiversityKind) -> float:
    """Normalized entropy of a population's belief representation.

    Recursive reasoners contribute their precision values; adaptive
    agents contribute the decimal code of their currently chosen
    strategy.
    """
    if kind is DiversityKind.BETA_RESOURCES:
        if not all(isinstance(a, BratsAgent) for a in population):
            raise DomainError("beta-resource diversity needs a BRATS population")
        values = np.array([a.beta for a in population])
    elif kind is DiversityKind.STRATEGY_CODES:
        if not all(isinstance(a, AsAgent) for a in population):
            raise DomainError("strategy-code diversity needs an AS population")
        values = np.array(
            [strategy_to_decimal(a.strategies[a.chosen_index]) for a in population],
            dtype=float,
        )
    else:
        raise DomainError(f"unknown diversity kind {kind!r}")
    return normalized_entropy(DiversitySample(values, kind))
