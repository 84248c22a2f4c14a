"""Agent-based market-entrance game with bounded-rational recursive agents."""

from .game import Action, AttendanceHistory, GameConfig, payoff, play_round, utilisation_error
from .brats import BratsAgent, crowd_probability, prior_belief, qh_decide, spawn_population
from .baselines import AsAgent, AsStrategy, NoiseTrader, as_decide, as_predict, as_select_strategy, noise_decide
from .diversity import DiversityKind, DiversitySample, fd_bin_count, normalized_entropy, population_diversity, strategy_to_decimal
from .tailstats import ChangeSeries, autocorrelation, hill_estimator, sigma_event_rate
from .econometrics import (
    BivariateSeries,
    TestResult,
    VarModel,
    adf_test,
    causality_pipeline,
    difference,
    fit_var,
    granger_test,
    harmonic_mean_p,
    impulse_response,
    kpss_test,
    select_lag,
)
from .harness import ExperimentConfig, RunTrace, run_experiment, simulate_run, summarize

__version__ = "0.1.0"
