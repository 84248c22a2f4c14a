"""Market-entrance game: payoffs, attendance history and the round engine.

Entering pays off only when strictly fewer than ``capacity * n_agents``
other agents enter; staying out pays a fixed amount. The round engine is
synchronous: every agent decides from the shared public history, nobody
observes a current-round decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DomainError

# Floating-point slack when comparing integer attendance against c*N.
# 0.7 * 100 evaluates to 70.00000000000001; the strict inequality must
# still treat 70 as "not below" the threshold.
_THRESHOLD_EPS = 1e-9


class Action(IntEnum):
    """The two moves available each round (serialized as 1/0)."""

    EXIT = 0
    ENTER = 1


@dataclass(frozen=True)
class GameConfig:
    """Static parameters of one market-entrance game.

    Payoffs must satisfy ``u_enter > u_exit > u_overcrowded`` and the
    capacity fraction lies strictly between 0 and 1.
    """

    n_agents: int
    capacity: float
    u_enter: float = 1.0
    u_exit: float = 0.0
    u_overcrowded: float = -1.0
    rounds: int = 1000
    burn_in: int = 100

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ConfigError(f"n_agents must be positive, got {self.n_agents}")
        if not 0.0 < self.capacity < 1.0:
            raise ConfigError(f"capacity must be in (0, 1), got {self.capacity}")
        if not self.u_enter > self.u_exit > self.u_overcrowded:
            raise ConfigError(
                "payoffs must satisfy u_enter > u_exit > u_overcrowded, got "
                f"({self.u_enter}, {self.u_exit}, {self.u_overcrowded})"
            )
        if self.rounds < 1:
            raise ConfigError(f"rounds must be positive, got {self.rounds}")
        if not 0 <= self.burn_in < self.rounds:
            raise ConfigError(
                f"burn_in must satisfy 0 <= burn_in < rounds, got {self.burn_in}"
            )

    @property
    def entry_threshold(self) -> float:
        """The real-valued crowding threshold ``capacity * n_agents``."""
        return self.capacity * self.n_agents

    @property
    def max_comfortable_others(self) -> int:
        """Largest integer strictly below the crowding threshold.

        Entering is profitable iff the number of *other* entrants is at
        most this value. Computed with a small tolerance so that e.g.
        c=0.7, N=100 yields 69 rather than 70.
        """
        thr = self.snapped_threshold
        if thr == int(thr):
            return int(thr) - 1
        return int(math.floor(thr))

    @property
    def snapped_threshold(self) -> float:
        """``entry_threshold`` with float noise snapped off near-integers.

        0.7 * 100 = 70.00000000000001 must behave as exactly 70 in the
        strict "below capacity" comparisons.
        """
        thr = self.entry_threshold
        nearest = round(thr)
        if abs(thr - nearest) < _THRESHOLD_EPS:
            return float(nearest)
        return thr


class AttendanceHistory:
    """Append-only record of per-round attendance counts."""

    def __init__(self, n_agents: int, counts: Iterable[int] = ()) -> None:
        self.n_agents = n_agents
        self._counts: list[int] = []
        for a in counts:
            self.append(a)

    def append(self, attendance: int) -> None:
        attendance = int(attendance)
        if not 0 <= attendance <= self.n_agents:
            raise DomainError(
                f"attendance {attendance} outside [0, {self.n_agents}]"
            )
        self._counts.append(attendance)

    def __len__(self) -> int:
        return len(self._counts)

    def __getitem__(self, idx):
        return self._counts[idx]

    def last(self, k: int) -> list[int]:
        """The most recent ``min(k, len)`` attendance counts."""
        if k <= 0:
            return []
        return self._counts[-k:]

    def to_array(self) -> np.ndarray:
        return np.asarray(self._counts, dtype=np.int64)


def payoff(action: Action, others_attending: int, cfg: GameConfig) -> float:
    """Payoff of an action given how many *other* agents entered."""
    if not 0 <= others_attending <= cfg.n_agents - 1:
        raise DomainError(
            f"others_attending {others_attending} outside [0, {cfg.n_agents - 1}]"
        )
    if action == Action.EXIT:
        return cfg.u_exit
    if others_attending <= cfg.max_comfortable_others:
        return cfg.u_enter
    return cfg.u_overcrowded


def play_round(
    agents: Sequence,
    history: AttendanceHistory,
    cfg: GameConfig,
    rng: np.random.Generator,
) -> tuple[int, list[float]]:
    """Play one synchronous round.

    Each agent's ``decide(history, cfg, rng)`` is evaluated against the
    same public history; no current-round action leaks into another
    agent's decision. Attendance is appended to the history and each
    agent's payoff is computed against the other entrants.
    """
    actions = [agent.decide(history, cfg, rng) for agent in agents]
    attendance = sum(int(a) for a in actions)
    payoffs = [
        payoff(a, attendance - int(a), cfg) for a in actions
    ]
    history.append(attendance)
    return attendance, payoffs


def utilisation_error(attendance: Sequence[int], cfg: GameConfig) -> float:
    """Mean absolute deviation of the post-burn-in attendance rate from capacity."""
    arr = np.asarray(attendance, dtype=float)
    post = arr[cfg.burn_in:]
    if post.size == 0:
        raise DomainError(
            f"trace with {arr.size} rounds has no data past burn_in={cfg.burn_in}"
        )
    return float(np.mean(np.abs(post / cfg.n_agents - cfg.capacity)))
