"""Comparison populations: adaptive-strategy agents and noise traders.

Adaptive-strategy agents hold a fixed ecology of linear attendance
predictors over the recent public history; each round they activate the
predictor that would have been most accurate lately and enter iff its
prediction leaves room. Noise traders enter i.i.d. at a fixed rate.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .game import Action, AttendanceHistory, GameConfig

DEFAULT_MEMORY = 5
DEFAULT_N_STRATEGIES = 10


@dataclass
class AsStrategy:
    """Linear predictor: constant term (scaled by N) plus one weight per lag."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or self.weights.size < 1:
            raise ConfigError("weights must be a non-empty vector")
        if np.any(np.abs(self.weights) > 1.0):
            raise ConfigError("weights must lie in [-1, 1]")

    @property
    def memory(self) -> int:
        return self.weights.size - 1


@dataclass
class AsAgent:
    """One predictor ecology with the index of the currently active strategy."""

    strategies: list[AsStrategy]
    memory: int = DEFAULT_MEMORY
    chosen_index: int = 0

    def __post_init__(self) -> None:
        if not self.strategies:
            raise ConfigError("an agent needs at least one strategy")
        if any(s.memory != self.memory for s in self.strategies):
            raise ConfigError("all strategies must share the agent's memory length")
        if not 0 <= self.chosen_index < len(self.strategies):
            raise ConfigError(f"chosen_index {self.chosen_index} out of range")

    def decide(
        self, history: AttendanceHistory, cfg: GameConfig, rng: np.random.Generator
    ) -> Action:
        if len(history) >= 1:
            self.chosen_index = as_select_strategy(self, history, cfg)
        return as_decide(self, history, cfg)


@dataclass
class NoiseTrader:
    """Enters independently each round with a fixed probability."""

    entry_probability: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.entry_probability <= 1.0:
            raise ConfigError(
                f"entry_probability must be in [0, 1], got {self.entry_probability}"
            )

    def decide(
        self, history: AttendanceHistory, cfg: GameConfig, rng: np.random.Generator
    ) -> Action:
        return noise_decide(self, rng)


def _lag_features(history: AttendanceHistory, memory: int, n_agents: int, at_round: int) -> np.ndarray:
    """Feature vector (N, A_{r-1}, ..., A_{r-M}) for predicting round ``at_round``.

    Lags reaching before the first observed round substitute the earliest
    known attendance; with no prior information at all they are zero, so
    round-0 predictions reduce to the constant term.
    """
    feats = np.empty(memory + 1)
    feats[0] = n_agents
    for i in range(1, memory + 1):
        r = at_round - i
        if at_round == 0:
            feats[i] = 0.0
        elif r >= 0:
            feats[i] = history[r]
        else:
            feats[i] = history[0]
    return feats


def as_predict(strategy: AsStrategy, history: AttendanceHistory, cfg: GameConfig) -> float:
    """Predicted attendance for the upcoming round, clamped to [0, N]."""
    feats = _lag_features(history, strategy.memory, cfg.n_agents, len(history))
    return float(np.clip(strategy.weights @ feats, 0.0, cfg.n_agents))


def as_select_strategy(agent: AsAgent, history: AttendanceHistory, cfg: GameConfig) -> int:
    """Index of the strategy with the lowest recent cumulative absolute error.

    Evaluates the last ``min(memory, len(history))`` rounds, each predicted
    using only information available before that round; ties break toward
    the lower index.
    """
    if len(history) < 1:
        raise DomainError("strategy selection needs at least one observed round")
    t = len(history)
    eval_rounds = range(max(0, t - agent.memory), t)
    errors = np.zeros(len(agent.strategies))
    for r in eval_rounds:
        feats = _lag_features(history, agent.memory, cfg.n_agents, r)
        for j, s in enumerate(agent.strategies):
            pred = float(np.clip(s.weights @ feats, 0.0, cfg.n_agents))
            errors[j] += abs(pred - history[r])
    return int(np.argmin(errors))


def as_decide(agent: AsAgent, history: AttendanceHistory, cfg: GameConfig) -> Action:
    """Enter iff the active strategy predicts attendance strictly below c*N."""
    pred = as_predict(agent.strategies[agent.chosen_index], history, cfg)
    return Action.ENTER if pred < cfg.snapped_threshold else Action.EXIT


def noise_decide(agent: NoiseTrader, rng: np.random.Generator) -> Action:
    return Action.ENTER if rng.random() < agent.entry_probability else Action.EXIT


def spawn_as_population(
    n: int,
    rng: np.random.Generator,
    *,
    memory: int = DEFAULT_MEMORY,
    n_strategies: int = DEFAULT_N_STRATEGIES,
) -> list[AsAgent]:
    """Sample n agents, each with ``n_strategies`` uniform [-1, 1] weight vectors."""
    if memory < 1:
        raise ConfigError(f"memory must be >= 1, got {memory}")
    if n_strategies < 1:
        raise ConfigError(f"n_strategies must be >= 1, got {n_strategies}")
    weights = rng.uniform(-1.0, 1.0, size=(n, n_strategies, memory + 1))
    return [
        AsAgent(
            strategies=[AsStrategy(weights[i, j]) for j in range(n_strategies)],
            memory=memory,
        )
        for i in range(n)
    ]


def as_population_round(
    weights: np.ndarray,
    history: AttendanceHistory,
    cfg: GameConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized strategy selection + decision for a whole population.

    ``weights`` has shape (n_agents, n_strategies, memory + 1). Returns
    (enter: bool array, chosen strategy index per agent). Matches the
    per-agent operations exactly; decisions are fully deterministic.
    """
    n_agents, n_strategies, width = weights.shape
    memory = width - 1
    t = len(history)
    if t >= 1:
        rounds = list(range(max(0, t - memory), t))
        feats = np.stack(
            [_lag_features(history, memory, cfg.n_agents, r) for r in rounds]
        )  # (R, memory+1)
        actual = np.array([history[r] for r in rounds], dtype=float)
        preds = np.clip(weights @ feats.T, 0.0, cfg.n_agents)  # (n, K, R)
        errors = np.abs(preds - actual[None, None, :]).sum(axis=2)
        chosen = errors.argmin(axis=1)
    else:
        chosen = np.zeros(n_agents, dtype=int)
    now = _lag_features(history, memory, cfg.n_agents, t)
    current_preds = np.clip(weights @ now, 0.0, cfg.n_agents)  # (n, K)
    active = current_preds[np.arange(n_agents), chosen]
    return active < cfg.snapped_threshold, chosen
