import json
import math

import numpy as np
import pytest

from src.complexity import (
    ComplexityCurve,
    aggregate,
    bisect_min_samples,
    draw_pair,
    estimate_min_samples,
    fit_loglog,
    read_curve,
    run_trial,
    success_rate,
    sweep,
)
from src.estimators.base import BaseEstimator
from src.plugin_manager import PluginManager
from src.validation import ComplexityConfig, TrialOutcome


class FakeEstimator(BaseEstimator):
    """Succeeds exactly when the budget reaches scale * N^2."""

    metric_id = "fake"
    requires_k = False

    def __init__(self, scale: float = 25.0, initial: float = 10.0, **kwargs):
        super().__init__(**kwargs)
        self.scale = scale
        self.initial = initial
        self.n = None

    def estimate(self, batches):
        raise NotImplementedError

    def exact(self, first, second):
        self.n = first.n
        return 0.0

    def initial_budget(self, n, cfg):
        return int(self.initial * n)

    def succeeds(self, first, second, budget, rng, truth, epsilon):
        return budget >= self.scale * first.n ** 2


def haar_generators(n=3):
    plugins = PluginManager()
    return [plugins.get_generator("haar", n=n), plugins.get_generator("haar", n=n)]


def outcome(n, trial, m, flagged=False):
    return TrialOutcome(n=n, trial=trial, m=m, flagged=flagged, seed=0)


## Bisection

@pytest.mark.parametrize("threshold", [1, 57, 1000, 4321, 100_000])
def test_bisection_finds_threshold_of_step_oracle(threshold):
    result = bisect_min_samples(lambda m: float(m >= threshold), hi=200_000, delta=1 / 3, j_max=0)
    assert not result.flagged
    assert threshold <= result.m <= threshold + max(100, result.m // 50)


def test_bisection_with_smooth_success_curve():
    # success probability rises linearly from 0 at M=0 to 1 at M=3000
    threshold = 2000
    result = bisect_min_samples(lambda m: min(m / 3000, 1.0), hi=10_000, delta=1 / 3, j_max=0)
    assert threshold <= result.m <= threshold + max(100, result.m // 50)


def test_bisection_doubles_a_low_initial_hi():
    result = bisect_min_samples(lambda m: float(m >= 5000), hi=100, delta=0.1, j_max=8)
    assert result.doublings == 6
    assert result.initial_hi == 100
    assert 5000 <= result.m <= 5100


def test_bisection_flags_when_doubling_runs_out():
    result = bisect_min_samples(lambda m: 0.0, hi=10, delta=0.1, j_max=3)
    assert result.flagged
    assert result.m == 80
    assert result.probes == 4


def test_bisection_rejects_empty_initial_hi():
    with pytest.raises(ValueError, match="Initial hi must be >= 1"):
        bisect_min_samples(lambda m: 1.0, hi=0, delta=0.1, j_max=3)


def test_bisection_stops_at_small_budgets():
    result = bisect_min_samples(lambda m: 1.0, hi=50, delta=0.1, j_max=0)
    assert result.m == 50
    assert result.probes == 1


## Trials

def test_success_rate_counts_probes(rng):
    cfg = ComplexityConfig(repetitions=4)
    first, second = draw_pair(haar_generators(3), rng)
    estimator = FakeEstimator(scale=10.0)
    assert success_rate(estimator, first, second, 90, 0.0, cfg, rng) == 1.0
    assert success_rate(estimator, first, second, 89, 0.0, cfg, rng) == 0.0


def test_draw_pair_from_pair_generator(rng):
    first, second = draw_pair([PluginManager().get_generator("hardpair", n=3)], rng)
    assert first.n == second.n == 3


def test_draw_pair_errors(rng):
    plugins = PluginManager()
    with pytest.raises(ValueError, match="returns a single ensemble"):
        draw_pair([plugins.get_generator("haar", n=2)], rng)
    with pytest.raises(ValueError, match="Two generators must each return a single ensemble"):
        draw_pair([plugins.get_generator("haar", n=2), plugins.get_generator("hardpair", n=2)], rng)
    with pytest.raises(ValueError, match="Expected one pair generator or two"):
        draw_pair(haar_generators() * 2, rng)


def test_run_trial_finds_fake_threshold():
    cfg = ComplexityConfig(repetitions=2, trials=1, seed=3)
    result = run_trial(FakeEstimator(), haar_generators(), n=20, trial=0, cfg=cfg)
    assert not result.flagged
    assert 10_000 <= result.m <= 10_000 + max(100, result.m // 50)
    assert result.d_true == 0.0
    assert result.seed == 3


def test_run_trial_flags_hopeless_estimator():
    cfg = ComplexityConfig(repetitions=1, trials=1, j_max=2)
    result = run_trial(FakeEstimator(scale=1e9), haar_generators(), n=5, trial=0, cfg=cfg)
    assert result.flagged
    assert "no passing budget after 2 doublings" in result.message


def test_run_trial_is_reproducible():
    cfg = ComplexityConfig(epsilon=0.3, repetitions=3, trials=1, seed=11)
    estimator = PluginManager().get_estimator("mmd", k=1)
    generators = haar_generators()
    a = run_trial(estimator, generators, n=3, trial=1, cfg=cfg)
    b = run_trial(estimator, generators, n=3, trial=1, cfg=cfg)
    assert a == b


def test_estimate_min_samples_aggregates_trials():
    cfg = ComplexityConfig(repetitions=1, trials=3)
    outcomes, point = estimate_min_samples(FakeEstimator(), haar_generators(), 10, cfg)
    assert [o.trial for o in outcomes] == [0, 1, 2]
    assert point.trials_used == 3
    assert point.m_std == 0.0


## Aggregation and fits

def test_aggregate_uses_population_std_of_unflagged_trials():
    point = aggregate([outcome(5, 0, 100), outcome(5, 1, 300), outcome(5, 2, 10_000, flagged=True)])
    assert point.m_mean == 200.0
    assert point.m_std == 100.0
    assert (point.trials_used, point.trials_flagged) == (2, 1)


def test_aggregate_errors():
    with pytest.raises(ValueError, match="No trial outcomes"):
        aggregate([])
    with pytest.raises(ValueError, match="must share N"):
        aggregate([outcome(5, 0, 1), outcome(6, 0, 1)])
    with pytest.raises(ValueError, match="Every trial at N=5 was flagged"):
        aggregate([outcome(5, 0, 1, flagged=True)])


def test_fit_of_exact_power_law():
    slope, intercept, r_squared = fit_loglog([(n, 7.0 * n ** 2) for n in (50, 100, 150, 200)])
    assert slope == pytest.approx(2.0, abs=1e-9)
    assert intercept == pytest.approx(math.log(7.0))
    assert r_squared == pytest.approx(1.0)


def test_fit_of_flat_curve():
    assert fit_loglog([(10, 5.0), (20, 5.0), (40, 5.0)]) == (0.0, pytest.approx(math.log(5.0)), 1.0)


def test_fit_errors():
    with pytest.raises(ValueError, match="at least 3 points"):
        fit_loglog([(1, 1), (2, 2)])
    with pytest.raises(ValueError, match="strictly positive"):
        fit_loglog([(1, 1), (2, 0), (3, 3)])


## Curves

def test_sweep_recovers_quadratic_scaling():
    cfg = ComplexityConfig(repetitions=2, trials=2)
    curve = sweep(FakeEstimator(), haar_generators(), [10, 20, 40], cfg)
    assert [p.n for p in curve.points] == [10, 20, 40]
    assert curve.slope == pytest.approx(2.0, abs=0.05)
    assert curve.metric == "fake"
    assert curve.flagged() == []


def test_sweep_needs_three_sizes():
    with pytest.raises(ValueError, match="at least 3 distinct N"):
        sweep(FakeEstimator(), haar_generators(), [10, 10, 20], ComplexityConfig())


def test_curve_save_and_read(tmp_path):
    outcomes = [outcome(n, t, n * n + t) for n in (4, 8, 16) for t in (0, 1)]
    curve = ComplexityCurve.from_outcomes("mmd", 2, outcomes, {"seed": 9})
    csv_path, json_path = curve.save(tmp_path)

    frame = read_curve(csv_path)
    assert list(frame.columns) == ["metric", "k", "N", "trial", "M"]
    assert frame["M"].tolist() == [o.m for o in outcomes]

    summary = json.loads(json_path.read_text())
    assert summary["seed"] == 9
    assert summary["k"] == 2
    assert summary["slope"] == pytest.approx(curve.slope)
    assert len(summary["points"]) == 3


def test_curve_without_order():
    outcomes = [outcome(n, 0, 3 * n) for n in (2, 4, 8)]
    curve = ComplexityCurve.from_outcomes("wasserstein", None, outcomes)
    assert curve.to_frame()["k"].isna().all()
    assert curve.slope == pytest.approx(1.0)


@pytest.mark.slow
def test_mmd_1_budget_does_not_grow_with_n():
    plugins = PluginManager()
    generators = [plugins.get_generator("cluster", n=10, s=0.08), plugins.get_generator("circular", n=10)]
    cfg = ComplexityConfig(repetitions=10, trials=4, seed=1)
    curve = sweep(plugins.get_estimator("mmd1-labelfree"), generators, [25, 50, 100, 200], cfg)
    assert abs(curve.slope) <= 0.3
    assert np.all([p.trials_used > 0 for p in curve.points])
