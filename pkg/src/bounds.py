"""
Analytic sample-count bounds and occupancy formulas.

Every bound returns an integer sample count (rounded up) except the occupancy
expectations, which are real.
"""
import numpy as np
import pandas as pd
from scipy.special import gammaln
from scipy.stats import binom

import logging
import math
from typing import Iterable

from .validation import BoundsRow

logger = logging.getLogger(__name__)

def _check_accuracy(epsilon: float, delta: float):
    if epsilon <= 0:
        raise ValueError(f"epsilon must be > 0. Got {epsilon}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1). Got {delta}")

def _check_size(name: str, value: int):
    if value < 1:
        raise ValueError(f"{name} must be >= 1. Got {value}")

def _ceil(value: float) -> int:
    return int(math.ceil(value - 1e-9))

def hoeffding_bound_wasserstein(n: int, epsilon: float, delta: float) -> int:
    """N^2 ((2/eps^2) log(2N^2/delta) + log(N^2/delta)): per-label Hoeffding plus full coverage."""
    _check_size("N", n)
    _check_accuracy(epsilon, delta)
    labels = n * n
    return _ceil(labels * ((2.0 / epsilon ** 2) * math.log(2.0 * labels / delta) + math.log(labels / delta)))

def hoeffding_bound_wasserstein_nonuniform(
    n1: int,
    n2: int,
    epsilon: float,
    delta: float,
    omega_min: float | None = None,
) -> int:
    """
    Sufficient count for the Wasserstein estimator that also estimates the marginals.

    omega_min is the smallest label probability p_i q_j (1/(n1 n2) for uniform
    ensembles). The count is the larger of the coverage term
    (1/omega_min)(eps^-2 + 1) log(n1 n2/delta) and the marginal terms
    36 n1/eps^2, 36 n2/eps^2 and 72 eps^-2 log(4/delta).
    """
    _check_size("N1", n1)
    _check_size("N2", n2)
    _check_accuracy(epsilon, delta)
    if omega_min is None:
        omega_min = 1.0 / (n1 * n2)
    if not 0 < omega_min <= 1:
        raise ValueError(f"omega_min must lie in (0, 1]. Got {omega_min}")

    log_labels = math.log(n1 * n2 / delta)
    coverage = (1.0 / omega_min) * (log_labels / epsilon ** 2 + log_labels)
    marginals = max(36.0 * n1, 36.0 * n2, 72.0 * math.log(4.0 / delta)) / epsilon ** 2
    return _ceil(max(coverage, marginals))

def _fixed_k_term(n: int, k: int, epsilon: float, delta: float) -> float:
    """((k!/eps^2) log(1/delta))^(1/k) N^(2-2/k), in log space for large k."""
    log_inner = gammaln(k + 1) + math.log(math.log(1.0 / delta) / epsilon ** 2)
    return math.exp(log_inner / k + (2.0 - 2.0 / k) * math.log(n))

def _collision_term(n: int, k: int, epsilon: float, delta: float) -> float:
    """max{k/eps^2 log(1/delta), N^2 (log(N^2/delta) + k)}: enough samples for every label to reach k."""
    return max(k / epsilon ** 2 * math.log(1.0 / delta), n * n * (math.log(n * n / delta) + k))

def fixed_k_premise(n: int, k: int, epsilon: float, delta: float) -> bool:
    """N^2 >= (k!/eps^2) log(1/delta), the large-ensemble regime of the fixed-k bound."""
    return 2.0 * math.log(n) >= gammaln(k + 1) + math.log(math.log(1.0 / delta) / epsilon ** 2)

def hoeffding_bound_mmd_k(n: int, k: int, epsilon: float, delta: float, multiplier: float = 4.0) -> int:
    """
    Sample count for the U-statistic MMD-k estimator.

    In the large-ensemble regime this is multiplier * fixed-k term; otherwise
    the collision term is returned.
    """
    _check_size("N", n)
    _check_size("k", k)
    _check_accuracy(epsilon, delta)
    if multiplier <= 0:
        raise ValueError(f"multiplier must be > 0. Got {multiplier}")

    if fixed_k_premise(n, k, epsilon, delta):
        return _ceil(multiplier * _fixed_k_term(n, k, epsilon, delta))
    logger.debug(f"Fixed-k premise fails at N={n}, k={k}; using the collision bound")
    return _ceil(_collision_term(n, k, epsilon, delta))

def hoeffding_bound_mmd_k_general(n: int, k: int, epsilon: float, delta: float, multiplier: float = 1.0) -> int:
    """min of the fixed-k term and the collision term, valid for every N and k."""
    _check_size("N", n)
    _check_size("k", k)
    _check_accuracy(epsilon, delta)
    return _ceil(min(multiplier * _fixed_k_term(n, k, epsilon, delta), _collision_term(n, k, epsilon, delta)))

def hoeffding_bound_mmd_k_eps_ball(
    n_centers: int,
    k: int,
    epsilon: float,
    delta: float,
    eps_b: float,
    multiplier: float = 4.0,
) -> int:
    """
    Sample count for MMD-k between epsilon-ball ensembles around n_centers centers.

    The ball bias 32 k sqrt(eps_b) is charged against epsilon, which must exceed it.
    """
    if not 0.0 <= eps_b < 1.0:
        raise ValueError(f"eps_b must lie in [0, 1). Got {eps_b}")
    remaining = epsilon - 32.0 * k * math.sqrt(eps_b)
    if remaining <= 0:
        raise ValueError(f"epsilon={epsilon} does not exceed the ball bias 32*k*sqrt(eps_b)={epsilon - remaining:.4g}")
    return hoeffding_bound_mmd_k(n_centers, k, remaining, delta, multiplier)

def classical_bound(epsilon: float, delta: float) -> int:
    """8 eps^-2 log(6/delta), independent of the ensemble size."""
    _check_accuracy(epsilon, delta)
    return _ceil(8.0 / epsilon ** 2 * math.log(6.0 / delta))

## Occupancy

def expected_qualifying_labels(m: int, n: int, k: int) -> float:
    """n Pr[Bin(M, 1/n) >= k]: expected number of labels seen at least k times."""
    _check_size("n", n)
    _check_size("k", k)
    if m < 0:
        raise ValueError(f"M must be >= 0. Got {m}")
    if m < k:
        return 0.0
    return float(n * np.exp(binom.logsf(k - 1, m, 1.0 / n)))

def qualifying_labels_asymptotic(m: int, n: int, k: int) -> float:
    """M^k e^(-M/n) / (k! n^(k-1)), the sparse-regime order of the expectation."""
    _check_size("n", n)
    _check_size("k", k)
    if m <= 0:
        return 0.0
    return float(np.exp(k * math.log(m) - m / n - gammaln(k + 1) - (k - 1) * math.log(n)))

def min_samples_for_occupancy(t: float, n: int, delta: float, p_min: float) -> float:
    """
    Samples after which every one of n labels has at least t draws with probability >= 1 - delta.

    (t + L + sqrt(L^2 + 2 t L)) / p_min with L = log(n / delta).
    """
    _check_size("n", n)
    if t < 0:
        raise ValueError(f"t must be >= 0. Got {t}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1). Got {delta}")
    if not 0 < p_min <= 1:
        raise ValueError(f"p_min must lie in (0, 1]. Got {p_min}")
    big_l = math.log(n / delta)
    return (t + big_l + math.sqrt(big_l ** 2 + 2.0 * t * big_l)) / p_min

def occupancy_lower_bound(t: float, delta: float, p_min: float) -> float:
    """
    Samples below which the rarest label stays under t draws with probability > delta.

    ((t + L/2) - sqrt(L^2 + 8 t L) / 2) / p_min with L = log(1 / (1 - delta)).
    """
    if t < 0:
        raise ValueError(f"t must be >= 0. Got {t}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1). Got {delta}")
    if not 0 < p_min <= 1:
        raise ValueError(f"p_min must lie in (0, 1]. Got {p_min}")
    big_l = math.log(1.0 / (1.0 - delta))
    return max(((t + big_l / 2.0) - 0.5 * math.sqrt(big_l ** 2 + 8.0 * t * big_l)) / p_min, 0.0)

def bounds_table(
    n_values: Iterable[int],
    k: int,
    epsilon: float,
    delta: float,
    multiplier: float = 4.0,
) -> pd.DataFrame:
    """One BoundsRow per N: Wasserstein, fixed-k, general and k = N MMD bounds plus full-coverage M."""
    rows = []
    for n in n_values:
        rows.append(
            BoundsRow(
                n=n,
                wasserstein=hoeffding_bound_wasserstein(n, epsilon, delta),
                mmd_fixed_k=hoeffding_bound_mmd_k(n, k, epsilon, delta, multiplier),
                mmd_general=hoeffding_bound_mmd_k_general(n, k, epsilon, delta),
                mmd_k_equals_n=hoeffding_bound_mmd_k(n, n, epsilon, delta, multiplier),
                occupancy_minimum=_ceil(min_samples_for_occupancy(1, n * n, delta, 1.0 / (n * n))),
            ).model_dump()
        )
    return pd.DataFrame(rows)
