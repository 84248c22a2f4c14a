"""Experiment orchestration: seeded Monte Carlo sweeps, trace persistence
and the manifest enabling re-analysis without re-simulation.

Each (c, run) pair gets its own child random stream derived from the
master seed and the pair itself, so runs are independent and any subset
can be reproduced in isolation.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import yaml

from . import baselines, brats, diversity
from .errors import ConfigError, DomainError
from .game import AttendanceHistory, GameConfig, utilisation_error

MODELS = ("brats", "as", "noise")
DEFAULT_C_VALUES = tuple(round(0.1 * i, 2) for i in range(1, 10))

TRACE_COLUMNS = ["t", "attendance", "diversity", "mean_beta"]


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a single agent model across a grid of capacities."""

    model: str = "brats"
    c_values: tuple[float, ...] = DEFAULT_C_VALUES
    runs: int = 30
    n_agents: int = 100
    rounds: int = 1000
    burn_in: int = 100
    u_enter: float = 1.0
    u_exit: float = 0.0
    u_overcrowded: float = -1.0
    seed: int = 0
    # BRATS parameters
    beta0_range: tuple[float, float] = brats.DEFAULT_BETA0_RANGE
    gamma_range: tuple[float, float] = brats.DEFAULT_GAMMA_RANGE
    eta_range: tuple[float, float] = brats.DEFAULT_ETA_RANGE
    epsilon: float = brats.EPSILON
    max_depth: int = brats.DEFAULT_MAX_DEPTH
    prior_window: int = brats.DEFAULT_PRIOR_WINDOW
    # adaptive-strategies parameters
    memory: int = baselines.DEFAULT_MEMORY
    n_strategies: int = baselines.DEFAULT_N_STRATEGIES
    # noise traders; None means "enter at rate c"
    entry_probability: float | None = None
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}, got {self.model!r}")
        if not self.c_values:
            raise ConfigError("c_values must be non-empty")
        if any(not 0.0 < c < 1.0 for c in self.c_values):
            raise ConfigError(f"c values must lie in (0, 1): {self.c_values}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        # Nested invariants are enforced by constructing a game config.
        self.game_config(self.c_values[0])

    def game_config(self, c: float) -> GameConfig:
        return GameConfig(
            n_agents=self.n_agents,
            capacity=c,
            u_enter=self.u_enter,
            u_exit=self.u_exit,
            u_overcrowded=self.u_overcrowded,
            rounds=self.rounds,
            burn_in=self.burn_in,
        )

    @classmethod
    def from_mapping(cls, data: Mapping) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        # Accept the short parameter names used throughout the docs as
        # aliases for the explicit field names.
        aliases = {
            "N": "n_agents",
            "T": "rounds",
            "U_enter": "u_enter",
            "U_exit": "u_exit",
            "U_overcrowded": "u_overcrowded",
            "h": "prior_window",
            "M": "memory",
            "K_s": "n_strategies",
        }
        kwargs = {}
        for key, value in dict(data).items():
            name = aliases.get(key, key)
            if name not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            if name in ("c_values", "beta0_range", "gamma_range", "eta_range"):
                value = tuple(value)
            kwargs[name] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_yaml(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if not isinstance(data, Mapping):
            raise ConfigError(f"configuration file {path} is not a mapping")
        return cls.from_mapping(data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["c_values"] = list(self.c_values)
        for key in ("beta0_range", "gamma_range", "eta_range"):
            out[key] = list(out[key])
        return out

    def digest(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()


@dataclass
class RunTrace:
    """All per-round series recorded for one seeded run."""

    model: str
    c: float
    run_index: int
    seed_key: tuple[int, int, int]
    attendance: np.ndarray
    diversity: np.ndarray
    mean_beta: np.ndarray

    def __post_init__(self) -> None:
        if not (
            len(self.attendance) == len(self.diversity) == len(self.mean_beta)
        ):
            raise DomainError("trace series must have equal lengths")

    @property
    def filename(self) -> str:
        return f"run_{self.c:g}_{self.run_index}.csv"

    def to_csv(self, path: str | Path) -> None:
        frame = pd.DataFrame(
            {
                "t": np.arange(len(self.attendance)),
                "attendance": self.attendance.astype(int),
                "diversity": self.diversity,
                "mean_beta": self.mean_beta,
            }
        )
        frame.to_csv(path, index=False, float_format="%.12g")

    @classmethod
    def from_csv(
        cls, path: str | Path, model: str, c: float, run_index: int, seed_key
    ) -> "RunTrace":
        frame = pd.read_csv(path)
        missing = [col for col in TRACE_COLUMNS if col not in frame.columns]
        if missing:
            raise DomainError(f"trace {path} missing columns {missing}")
        return cls(
            model=model,
            c=c,
            run_index=run_index,
            seed_key=tuple(seed_key),
            attendance=frame["attendance"].to_numpy(),
            diversity=frame["diversity"].to_numpy(dtype=float),
            mean_beta=frame["mean_beta"].to_numpy(dtype=float),
        )


def child_seed_key(master_seed: int, c: float, run_index: int) -> tuple[int, int, int]:
    """Deterministic, grid-order-independent key for one run's stream."""
    return (int(master_seed), int(round(c * 1000)), int(run_index))


def _rng_for(key: tuple[int, int, int]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def _simulate_brats(cfg: ExperimentConfig, game: GameConfig, rng) -> tuple[np.ndarray, ...]:
    n, rounds = cfg.n_agents, cfg.rounds
    agents = brats.spawn_population(
        n,
        rng,
        beta0_range=cfg.beta0_range,
        gamma_range=cfg.gamma_range,
        eta_range=cfg.eta_range,
        prior_window=cfg.prior_window,
        max_depth=cfg.max_depth,
    )
    beta0 = np.array([a.beta0 for a in agents])
    gamma = np.array([a.gamma for a in agents])
    eta = np.array([a.eta for a in agents])
    history = AttendanceHistory(n)
    attendance = np.empty(rounds, dtype=np.int64)
    div = np.empty(rounds)
    mean_beta = np.empty(rounds)
    for t in range(rounds):
        beta = beta0 + t * eta  # decision-time precision; learning applied after each round
        p_enter = brats.population_entry_probabilities(
            beta,
            gamma,
            history,
            game,
            epsilon=cfg.epsilon,
            max_depth=cfg.max_depth,
            prior_window=cfg.prior_window,
        )
        entered = rng.random(n) < p_enter
        attendance[t] = int(entered.sum())
        history.append(attendance[t])
        div[t] = diversity.normalized_entropy(beta)
        mean_beta[t] = float(beta.mean())
    return attendance, div, mean_beta


def _simulate_as(cfg: ExperimentConfig, game: GameConfig, rng) -> tuple[np.ndarray, ...]:
    n, rounds = cfg.n_agents, cfg.rounds
    weights = rng.uniform(-1.0, 1.0, size=(n, cfg.n_strategies, cfg.memory + 1))
    history = AttendanceHistory(n)
    attendance = np.empty(rounds, dtype=np.int64)
    div = np.empty(rounds)
    powers = 2.0 ** np.arange(cfg.memory, -1, -1)
    for t in range(rounds):
        entered, chosen = baselines.as_population_round(weights, history, game)
        attendance[t] = int(entered.sum())
        history.append(attendance[t])
        codes = ((weights[np.arange(n), chosen] >= 0.0) * powers).sum(axis=1)
        div[t] = diversity.normalized_entropy(codes)
    mean_beta = np.full(rounds, np.nan)
    return attendance, div, mean_beta


def _simulate_noise(cfg: ExperimentConfig, game: GameConfig, rng) -> tuple[np.ndarray, ...]:
    q = cfg.entry_probability if cfg.entry_probability is not None else game.capacity
    attendance = rng.binomial(cfg.n_agents, q, size=cfg.rounds).astype(np.int64)
    nan = np.full(cfg.rounds, np.nan)
    return attendance, nan.copy(), nan


_ENGINES = {"brats": _simulate_brats, "as": _simulate_as, "noise": _simulate_noise}


def simulate_run(cfg: ExperimentConfig, c: float, run_index: int) -> RunTrace:
    """One seeded run of the configured model at capacity c."""
    key = child_seed_key(cfg.seed, c, run_index)
    rng = _rng_for(key)
    game = cfg.game_config(c)
    attendance, div, mean_beta = _ENGINES[cfg.model](cfg, game, rng)
    return RunTrace(
        model=cfg.model,
        c=c,
        run_index=run_index,
        seed_key=key,
        attendance=attendance,
        diversity=div,
        mean_beta=mean_beta,
    )


def _simulate_run_star(args) -> RunTrace:
    return simulate_run(*args)


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path,
    jobs: int = 1,
    write_reports: bool = True,
) -> list[RunTrace]:
    """Execute the full sweep, persist traces + manifest, emit reports."""
    out = Path(out_dir)
    traces_dir = out / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    tasks = [(cfg, c, run) for c in cfg.c_values for run in range(cfg.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(_simulate_run_star, tasks, chunksize=1))
    else:
        traces = [simulate_run(*task) for task in tasks]

    manifest = {
        "config": cfg.to_dict(),
        "config_hash": cfg.digest(),
        "runs": [
            {
                "c": tr.c,
                "run": tr.run_index,
                "seed_key": list(tr.seed_key),
                "file": tr.filename,
            }
            for tr in traces
        ],
    }
    for tr in traces:
        tr.to_csv(traces_dir / tr.filename)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)

    if write_reports:
        from . import reports

        reports.write_reports(cfg, traces, out / "reports")
    return traces


def load_traces(out_dir: str | Path) -> tuple[ExperimentConfig, list[RunTrace]]:
    """Re-load a persisted sweep from its manifest."""
    out = Path(out_dir)
    with open(out / "manifest.json") as fh:
        manifest = json.load(fh)
    cfg = ExperimentConfig.from_mapping(manifest["config"])
    traces = [
        RunTrace.from_csv(
            out / "traces" / entry["file"],
            model=cfg.model,
            c=entry["c"],
            run_index=entry["run"],
            seed_key=entry["seed_key"],
        )
        for entry in manifest["runs"]
    ]
    return cfg, traces


def summarize(traces: Sequence[RunTrace], cfg: ExperimentConfig) -> pd.DataFrame:
    """Convergence summary per capacity: attendance rate and utilisation error."""
    rows = []
    for c in sorted({tr.c for tr in traces}):
        game = cfg.game_config(c)
        group = [tr for tr in traces if tr.c == c]
        rates = [
            float(np.mean(tr.attendance[cfg.burn_in:] / cfg.n_agents)) for tr in group
        ]
        errors = [utilisation_error(tr.attendance, game) for tr in group]
        rows.append(
            {
                "c": c,
                "mean_rate": float(np.mean(rates)),
                "std_rate": float(np.std(rates)),
                "mean_error": float(np.mean(errors)),
                "std_error": float(np.std(errors)),
                "n_runs": len(group),
            }
        )
    return pd.DataFrame(rows)


def aligned_change_inputs(trace: RunTrace, cfg: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Aligned post-burn-in (diversity, volatility) series for the causality
    pipeline; both start at the same round."""
    post = slice(cfg.burn_in, None)
    att = trace.attendance[post].astype(float)
    vol = 100.0 * np.abs(np.diff(att)) / cfg.n_agents  # defined from round burn_in+1
    div = trace.diversity[post][1:]  # align with vol
    return div, vol
