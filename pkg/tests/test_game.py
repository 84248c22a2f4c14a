import numpy as np
import pytest

from elfarol.errors import ConfigError, DomainError
from elfarol.game import (
    Action,
    AttendanceHistory,
    GameConfig,
    payoff,
    play_round,
    utilisation_error,
)


def make_cfg(**kw):
    defaults = dict(n_agents=100, capacity=0.6)
    defaults.update(kw)
    return GameConfig(**defaults)


class TestGameConfig:
    def test_payoff_ordering_enforced(self):
        with pytest.raises(ConfigError):
            make_cfg(u_enter=0.0, u_exit=0.0)
        with pytest.raises(ConfigError):
            make_cfg(u_exit=-2.0, u_overcrowded=-1.0)

    @pytest.mark.parametrize("capacity", [0.0, 1.0, -0.2, 1.5])
    def test_capacity_open_interval(self, capacity):
        with pytest.raises(ConfigError):
            make_cfg(capacity=capacity)

    def test_burn_in_below_rounds(self):
        with pytest.raises(ConfigError):
            make_cfg(rounds=10, burn_in=10)

    def test_threshold_snaps_float_noise(self):
        # 0.7 * 100 = 70.00000000000001 must still treat 70 as at-capacity.
        cfg = make_cfg(capacity=0.7)
        assert cfg.max_comfortable_others == 69

    def test_fractional_threshold_floors(self):
        cfg = make_cfg(n_agents=10, capacity=0.55)  # threshold 5.5
        assert cfg.max_comfortable_others == 5


class TestPayoff:
    def test_room_left_pays_enter(self):
        assert payoff(Action.ENTER, 59, make_cfg()) == 1.0

    def test_boundary_is_overcrowded(self):
        assert payoff(Action.ENTER, 60, make_cfg()) == -1.0

    def test_exit_payoff_fixed(self):
        for c in (0.1, 0.6, 0.9):
            assert payoff(Action.EXIT, 99, make_cfg(capacity=c)) == 0.0

    def test_out_of_range_rejected(self):
        with pytest.raises(DomainError):
            payoff(Action.ENTER, 100, make_cfg())
        with pytest.raises(DomainError):
            payoff(Action.ENTER, -1, make_cfg())


class _Fixed:
    def __init__(self, action):
        self.action = action

    def decide(self, history, cfg, rng):
        return self.action


class TestPlayRound:
    def test_all_enter(self):
        cfg = make_cfg(n_agents=10)
        history = AttendanceHistory(10)
        rng = np.random.default_rng(0)
        attendance, payoffs = play_round([_Fixed(Action.ENTER)] * 10, history, cfg, rng)
        assert attendance == 10
        assert len(history) == 1 and history[0] == 10
        # 9 others are always above the threshold 6
        assert payoffs == [cfg.u_overcrowded] * 10

    def test_all_exit(self):
        cfg = make_cfg(n_agents=10)
        history = AttendanceHistory(10)
        attendance, payoffs = play_round(
            [_Fixed(Action.EXIT)] * 10, history, cfg, np.random.default_rng(0)
        )
        assert attendance == 0
        assert payoffs == [cfg.u_exit] * 10

    def test_deterministic_given_seed(self):
        from elfarol.baselines import NoiseTrader

        cfg = make_cfg(n_agents=20)
        results = []
        for _ in range(2):
            history = AttendanceHistory(20)
            rng = np.random.default_rng(42)
            agents = [NoiseTrader(0.5) for _ in range(20)]
            out = [play_round(agents, history, cfg, rng)[0] for _ in range(5)]
            results.append(out)
        assert results[0] == results[1]


class TestUtilisationError:
    def test_perfect_utilisation(self):
        cfg = make_cfg(n_agents=100, capacity=0.6, rounds=20, burn_in=0)
        assert utilisation_error([60] * 20, cfg) == 0.0

    def test_alternating_extremes(self):
        cfg = make_cfg(n_agents=100, capacity=0.5, rounds=10, burn_in=0)
        assert utilisation_error([0, 100] * 5, cfg) == pytest.approx(0.5)

    def test_empty_window_rejected(self):
        cfg = make_cfg(rounds=10, burn_in=5)
        with pytest.raises(DomainError):
            utilisation_error([60] * 4, cfg)


class TestAttendanceHistory:
    def test_bounds_enforced(self):
        h = AttendanceHistory(10)
        with pytest.raises(DomainError):
            h.append(11)
        with pytest.raises(DomainError):
            h.append(-1)

    def test_last_window(self):
        h = AttendanceHistory(10, [1, 2, 3])
        assert h.last(2) == [2, 3]
        assert h.last(10) == [1, 2, 3]
