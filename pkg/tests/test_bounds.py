import math

import numpy as np
import pytest

from src.bounds import (
    bounds_table,
    classical_bound,
    expected_qualifying_labels,
    fixed_k_premise,
    hoeffding_bound_mmd_k,
    hoeffding_bound_mmd_k_eps_ball,
    hoeffding_bound_mmd_k_general,
    hoeffding_bound_wasserstein,
    hoeffding_bound_wasserstein_nonuniform,
    min_samples_for_occupancy,
    occupancy_lower_bound,
    qualifying_labels_asymptotic,
)


def test_wasserstein_bound_value():
    n, epsilon, delta = 100, 0.1, 1 / 3
    labels = n * n
    expected = labels * (200 * math.log(2 * labels / delta) + math.log(labels / delta))
    assert hoeffding_bound_wasserstein(n, epsilon, delta) == math.ceil(expected)


def test_wasserstein_bound_grows_faster_than_n_squared():
    small = hoeffding_bound_wasserstein(10, 0.1, 1 / 3)
    large = hoeffding_bound_wasserstein(100, 0.1, 1 / 3)
    assert large / small > 100


def test_nonuniform_wasserstein_bound_defaults_to_uniform_labels():
    assert hoeffding_bound_wasserstein_nonuniform(4, 5, 0.1, 0.1) == hoeffding_bound_wasserstein_nonuniform(
        4, 5, 0.1, 0.1, omega_min=1 / 20
    )
    with pytest.raises(ValueError, match="omega_min"):
        hoeffding_bound_wasserstein_nonuniform(2, 2, 0.1, 0.1, omega_min=0.0)


def test_classical_bound_value():
    assert classical_bound(0.1, 1 / 3) == math.ceil(800 * math.log(18))


def test_fixed_k_premise_switches_with_n():
    assert not fixed_k_premise(2, 3, 0.1, 1 / 3)
    assert fixed_k_premise(1000, 3, 0.1, 1 / 3)


def test_mmd_bound_in_large_ensemble_regime():
    n, k, epsilon, delta = 200, 2, 0.1, 1 / 3
    term = (math.factorial(k) / epsilon ** 2 * math.log(1 / delta)) ** (1 / k) * n ** (2 - 2 / k)
    assert hoeffding_bound_mmd_k(n, k, epsilon, delta) == math.ceil(4 * term)
    assert hoeffding_bound_mmd_k(n, k, epsilon, delta, multiplier=1.0) == math.ceil(term)


def test_mmd_bound_falls_back_to_collision_term():
    n, k, epsilon, delta = 3, 4, 0.1, 1 / 3
    expected = max(k / epsilon ** 2 * math.log(1 / delta), n * n * (math.log(n * n / delta) + k))
    assert hoeffding_bound_mmd_k(n, k, epsilon, delta) == math.ceil(expected)


def test_mmd_bound_scales_as_n_to_two_minus_two_over_k():
    for k in (1, 2, 3):
        a = hoeffding_bound_mmd_k(1000, k, 0.1, 1 / 3, multiplier=1.0)
        b = hoeffding_bound_mmd_k(8000, k, 0.1, 1 / 3, multiplier=1.0)
        assert math.log(b / a) / math.log(8) == pytest.approx(2 - 2 / k, abs=0.01)


def test_general_bound_never_exceeds_its_terms():
    for n in (5, 50, 500):
        for k in (1, 2, 4):
            general = hoeffding_bound_mmd_k_general(n, k, 0.1, 1 / 3)
            assert general <= hoeffding_bound_mmd_k(n, k, 0.1, 1 / 3, multiplier=1.0)


def test_large_k_does_not_overflow():
    assert hoeffding_bound_mmd_k_general(10, 200, 0.1, 1 / 3) > 0


def test_eps_ball_bound_charges_the_bias():
    plain = hoeffding_bound_mmd_k(100, 1, 0.05, 1 / 3)
    assert hoeffding_bound_mmd_k_eps_ball(100, 1, 0.1, 1 / 3, eps_b=(0.05 / 32) ** 2) == plain
    with pytest.raises(ValueError, match="does not exceed the ball bias"):
        hoeffding_bound_mmd_k_eps_ball(100, 1, 0.1, 1 / 3, eps_b=1e-4)


@pytest.mark.parametrize(
    "call, message",
    [
        (lambda: hoeffding_bound_wasserstein(0, 0.1, 0.1), "N must be >= 1"),
        (lambda: hoeffding_bound_wasserstein(5, 0.0, 0.1), "epsilon must be > 0"),
        (lambda: hoeffding_bound_mmd_k(5, 1, 0.1, 1.0), r"delta must lie in \(0, 1\)"),
        (lambda: hoeffding_bound_mmd_k(5, 0, 0.1, 0.5), "k must be >= 1"),
        (lambda: hoeffding_bound_mmd_k(5, 1, 0.1, 0.5, multiplier=0), "multiplier must be > 0"),
        (lambda: expected_qualifying_labels(-1, 5, 1), "M must be >= 0"),
    ],
)
def test_invalid_arguments(call, message):
    with pytest.raises(ValueError, match=message):
        call()


def test_expected_qualifying_labels():
    assert expected_qualifying_labels(2, 10, 3) == 0.0
    # k = 1: n (1 - (1 - 1/n)^M)
    assert expected_qualifying_labels(20, 10, 1) == pytest.approx(10 * (1 - 0.9 ** 20))


def test_qualifying_labels_asymptotic_in_sparse_regime():
    m, n, k = 1000, 10 ** 6, 2
    assert qualifying_labels_asymptotic(m, n, k) == pytest.approx(expected_qualifying_labels(m, n, k), rel=0.01)


def test_min_samples_for_occupancy_covers_every_label(rng):
    n, delta = 100, 0.1
    m = math.ceil(min_samples_for_occupancy(1, n, delta, 1 / n))
    covered = sum(rng.multinomial(m, np.full(n, 1 / n)).min() >= 1 for _ in range(200))
    assert covered >= 180


def test_occupancy_lower_bound_is_below_the_upper_bound():
    for t in (1, 5, 20):
        assert occupancy_lower_bound(t, 0.1, 0.01) < min_samples_for_occupancy(t, 100, 0.1, 0.01)
    assert occupancy_lower_bound(0, 0.5, 0.5) == 0.0


def test_bounds_table_columns():
    table = bounds_table([10, 20], k=2, epsilon=0.1, delta=1 / 3)
    assert list(table.columns) == ["n", "wasserstein", "mmd_fixed_k", "mmd_general", "mmd_k_equals_n", "occupancy_minimum"]
    assert table["n"].tolist() == [10, 20]
    assert (table.drop(columns="n") > 0).all().all()
