"""Bounded-rational recursive agents.

Each agent reasons about the crowd through a hierarchy of levels: level k
models a representative other agent deciding at level k+1 with precision
discounted geometrically (``beta * gamma**k``). The chain terminates once
the discounted precision drops below ``EPSILON``; the deepest belief is
the naive prior built from recent history. Learning raises ``beta``
linearly over time at a per-agent rate ``eta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, NumericalError
from .game import Action, AttendanceHistory, GameConfig

#: Precision threshold below which a reasoning level collapses to the prior.
EPSILON = 1e-3

#: Hard cap on the number of reasoning levels.
DEFAULT_MAX_DEPTH = 25

#: Rounds of history feeding the naive prior.
DEFAULT_PRIOR_WINDOW = 7

#: Default sampling ranges for heterogeneous populations (calibration
#: defaults, configurable everywhere they are used). The narrow gamma and
#: eta windows keep reasoning-depth transitions loosely synchronized across
#: the population: convergence to the capacity still holds, while occasional
#: simultaneous depth shifts produce the large endogenous attendance swings
#: the tail statistics measure. Wider windows wash those avalanches out.
DEFAULT_BETA0_RANGE = (0.0, 0.1)
DEFAULT_GAMMA_RANGE = (0.50, 0.65)
DEFAULT_ETA_RANGE = (0.002, 0.003)


@dataclass
class BratsAgent:
    """One recursive reasoner with linearly growing precision."""

    beta: float
    gamma: float
    eta: float
    beta0: float | None = None
    prior_window: int = DEFAULT_PRIOR_WINDOW
    max_depth: int = DEFAULT_MAX_DEPTH

    def __post_init__(self) -> None:
        if self.beta0 is None:
            self.beta0 = self.beta
        if not 0.0 <= self.beta0 <= self.beta:
            raise ConfigError(
                f"beta ({self.beta}) must be >= beta0 ({self.beta0}) >= 0"
            )
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must be in [0, 1), got {self.gamma}")
        if not self.eta > 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if self.prior_window < 1:
            raise ConfigError(f"prior_window must be >= 1, got {self.prior_window}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1, got {self.max_depth}")

    def learn(self) -> "BratsAgent":
        """One learning step: precision grows by the fixed rate eta."""
        self.beta += self.eta
        return self

    def decide(
        self, history: AttendanceHistory, cfg: GameConfig, rng: np.random.Generator
    ) -> Action:
        dist = qh_decide(self, history, cfg)
        return Action.ENTER if rng.random() < dist[0] else Action.EXIT


@dataclass
class QhLevel:
    """Diagnostics for one level of the reasoning hierarchy."""

    level: int
    precision: float
    action_distribution: np.ndarray  # [p_enter, p_exit]
    partition_value: float
    #: log of Z_{k+1}^(1/gamma) -- the (action-independent) scalar carrying
    #: the deeper level's partition value; cancels in normalization here.
    log_future_contribution: float = field(default=0.0)


def prior_belief(
    history: AttendanceHistory, cfg: GameConfig, window: int = DEFAULT_PRIOR_WINDOW
) -> np.ndarray:
    """Laplace-smoothed entry probability from recent profitability.

    Over the last ``min(window, len(history))`` rounds, counts rounds
    whose attendance stayed strictly below the crowding threshold and
    returns ``(w + 1) / (m + 2)`` as the entry probability. Empty
    history yields the uniform distribution.
    """
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    recent = history.last(window)
    m = len(recent)
    # Attendance strictly below c*N: entering would have been profitable.
    w = sum(1 for a in recent if a <= cfg.max_comfortable_others)
    p_enter = (w + 1) / (m + 2)
    return np.array([p_enter, 1.0 - p_enter])


def _log_binom_coeffs(n: int, m: int) -> np.ndarray:
    """log C(n, x) for x = 0..m."""
    x = np.arange(m + 1)
    return (
        math.lgamma(n + 1)
        - np.array([math.lgamma(v + 1) for v in x])
        - np.array([math.lgamma(n - v + 1) for v in x])
    )


def _binom_cdf_below_threshold(q: np.ndarray, cfg: GameConfig) -> np.ndarray:
    """P(X <= m) for X ~ Binomial(N-1, q), m the largest comfortable count.

    Direct summation of the binomial probability terms; vectorized over a
    batch of entry probabilities q.
    """
    n = cfg.n_agents - 1
    m = cfg.max_comfortable_others
    q = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.empty_like(q)
    if m < 0:
        out[:] = 0.0
        return out
    if m >= n:
        out[:] = 1.0
        return out
    interior = (q > 0.0) & (q < 1.0)
    out[q <= 0.0] = 1.0  # X = 0 surely, and 0 <= m here
    out[q >= 1.0] = 0.0  # X = n surely, and n > m here
    if np.any(interior):
        qi = q[interior]
        x = np.arange(m + 1)
        logc = _log_binom_coeffs(n, m)
        # terms: (batch, m+1)
        logterms = (
            logc[None, :]
            + x[None, :] * np.log(qi)[:, None]
            + (n - x)[None, :] * np.log1p(-qi)[:, None]
        )
        out[interior] = np.exp(logterms).sum(axis=1)
    return np.clip(out, 0.0, 1.0)


def crowd_probability(q: float, cfg: GameConfig) -> float:
    """Probability that the other N-1 agents leave room, given each enters w.p. q."""
    if not 0.0 <= q <= 1.0:
        raise ConfigError(f"q must be a probability, got {q}")
    return float(_binom_cdf_below_threshold(np.array([q]), cfg)[0])


def _reasoning_depth(beta: float, gamma: float, epsilon: float, max_depth: int) -> int:
    """Largest k with beta * gamma**k >= epsilon, capped at max_depth.

    Returns -1 when even level 0 falls below the threshold.
    """
    if beta < epsilon:
        return -1
    if gamma == 0.0:
        return 0
    k = math.floor(math.log(epsilon / beta) / math.log(gamma))
    # Guard float rounding at the boundary.
    while beta * gamma ** (k + 1) >= epsilon:
        k += 1
    while k > 0 and beta * gamma**k < epsilon:
        k -= 1
    return min(k, max_depth)


def qh_decide(
    agent: BratsAgent,
    history: AttendanceHistory,
    cfg: GameConfig,
    *,
    epsilon: float = EPSILON,
    return_levels: bool = False,
):
    """Action distribution from the recursive decision rule.

    The deepest belief (one level past the last level whose precision
    clears ``epsilon``) is the naive prior; each level above it reweights
    the prior by the exponentiated expected payoff against a crowd that
    enters with the deeper level's entry probability. Exponents are
    max-shifted before exponentiation.
    """
    prior = prior_belief(history, cfg, agent.prior_window)
    depth = _reasoning_depth(agent.beta, agent.gamma, epsilon, agent.max_depth)
    if depth < 0:
        return (prior, []) if return_levels else prior

    log_prior = np.log(prior)
    f = prior
    levels: list[QhLevel] = []
    log_z_deeper = 0.0  # prior is already normalized
    for k in range(depth, -1, -1):
        p_room = crowd_probability(float(f[0]), cfg)
        utilities = np.array(
            [
                cfg.u_enter * p_room + cfg.u_overcrowded * (1.0 - p_room),
                cfg.u_exit,
            ]
        )
        precision = agent.beta * agent.gamma**k
        logits = log_prior + precision * utilities
        shift = logits.max()
        weights = np.exp(logits - shift)
        z = float(weights.sum())
        f = weights / z
        if np.any(~np.isfinite(f)):
            raise NumericalError("NaN/inf in decision distribution")
        log_z = math.log(z) + shift
        if return_levels:
            levels.append(
                QhLevel(
                    level=k,
                    precision=precision,
                    action_distribution=f.copy(),
                    partition_value=math.exp(log_z) if abs(log_z) < 700 else math.inf,
                    log_future_contribution=(
                        log_z_deeper / agent.gamma if agent.gamma > 0.0 else 0.0
                    ),
                )
            )
        log_z_deeper = log_z
    if return_levels:
        levels.reverse()  # level 0 first
        return f, levels
    return f


def population_entry_probabilities(
    beta: np.ndarray,
    gamma: np.ndarray,
    history: AttendanceHistory,
    cfg: GameConfig,
    *,
    epsilon: float = EPSILON,
    max_depth: int = DEFAULT_MAX_DEPTH,
    prior_window: int = DEFAULT_PRIOR_WINDOW,
) -> np.ndarray:
    """Vectorized ``qh_decide`` entry probabilities for a whole population.

    Agents share the public history (hence the prior); their chains differ
    only in depth and per-level precision, so all chains are advanced in
    lock-step from the deepest level down to level 0. Agents whose chain
    has not started yet simply keep the prior, which is exactly their
    deepest belief.
    """
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    prior = prior_belief(history, cfg, prior_window)
    p_enter, p_exit = float(prior[0]), float(prior[1])
    logit_prior = math.log(p_enter) - math.log(p_exit)

    depths = np.array(
        [
            _reasoning_depth(b, g, epsilon, max_depth)
            for b, g in zip(beta, gamma)
        ]
    )
    f = np.full(beta.shape, p_enter)
    if depths.max(initial=-1) < 0:
        return f
    for k in range(int(depths.max()), -1, -1):
        active = depths >= k
        if not np.any(active):
            continue
        p_room = _binom_cdf_below_threshold(f[active], cfg)
        u_enter = cfg.u_enter * p_room + cfg.u_overcrowded * (1.0 - p_room)
        precision = beta[active] * gamma[active] ** k
        logits = logit_prior + precision * (u_enter - cfg.u_exit)
        f[active] = 1.0 / (1.0 + np.exp(-logits))
    if np.any(~np.isfinite(f)):
        raise NumericalError("NaN/inf in population decision probabilities")
    return f


def spawn_population(
    n: int,
    rng: np.random.Generator,
    *,
    beta0_range: tuple[float, float] = DEFAULT_BETA0_RANGE,
    gamma_range: tuple[float, float] = DEFAULT_GAMMA_RANGE,
    eta_range: tuple[float, float] = DEFAULT_ETA_RANGE,
    prior_window: int = DEFAULT_PRIOR_WINDOW,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> list[BratsAgent]:
    """Sample a heterogeneous population.

    Draw order is fixed and field-major: n uniforms for beta0, then n for
    gamma, then n for eta, so identical seeds reproduce identical
    populations.
    """
    for name, (lo, hi) in (
        ("beta0", beta0_range),
        ("gamma", gamma_range),
        ("eta", eta_range),
    ):
        if not lo <= hi:
            raise ConfigError(f"{name}_range has lo > hi: {(lo, hi)}")
    if beta0_range[0] < 0.0:
        raise ConfigError(f"beta0_range must be non-negative, got {beta0_range}")
    if not (0.0 <= gamma_range[0] and gamma_range[1] < 1.0):
        raise ConfigError(f"gamma_range must lie in [0, 1), got {gamma_range}")
    if eta_range[0] <= 0.0:
        raise ConfigError(f"eta_range must be positive, got {eta_range}")

    beta0 = rng.uniform(*beta0_range, size=n)
    gamma = rng.uniform(*gamma_range, size=n)
    eta = rng.uniform(*eta_range, size=n)
    return [
        BratsAgent(
            beta=float(b),
            gamma=float(g),
            eta=float(e),
            beta0=float(b),
            prior_window=prior_window,
            max_depth=max_depth,
        )
        for b, g, e in zip(beta0, gamma, eta)
    ]
