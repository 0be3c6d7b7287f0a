"""
Moment-matched fidelity distributions and the lower-bound instances built from them.

Both distributions live on [0, a] with a = alpha / N: mu0 is uniform and mu1 has
density (1 + eta P_k(2x/a - 1)) / a. Their moments agree below order k and
differ at order k.
"""
import numpy as np
from numpy.polynomial import legendre
from scipy.special import gammaln

import logging
import math
from dataclasses import dataclass
from typing import Tuple

from .ensembles.base import Ensemble, FidelityTable
from .ensembles.fidelity_table import from_fidelity_table

logger = logging.getLogger(__name__)

QUADRATURE_NODES = 64
INVERSE_CDF_STEPS = 60

def _legendre(order: int, t: np.ndarray) -> np.ndarray:
    if order < 0:
        return np.zeros_like(t)
    coefficients = np.zeros(order + 1)
    coefficients[order] = 1.0
    return legendre.legval(t, coefficients)

@dataclass(frozen=True)
class MomentMatchedPair:
    k: int
    eta: float
    alpha: float
    n: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1. Got {self.k}")
        if abs(self.eta) > 1.0:
            raise ValueError(f"|eta| must be <= 1 for a non-negative density. Got {self.eta}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1). Got {self.alpha}")
        if self.n < 1:
            raise ValueError(f"N must be >= 1. Got {self.n}")

    @property
    def a(self) -> float:
        return self.alpha / self.n

    def _to_unit(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(x, dtype=np.float64) / self.a - 1.0

    def density0(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return np.where((x >= 0) & (x <= self.a), 1.0 / self.a, 0.0)

    def density1(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= 0) & (x <= self.a)
        return np.where(inside, (1.0 + self.eta * _legendre(self.k, self._to_unit(x))) / self.a, 0.0)

    def cdf0(self, x) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=np.float64) / self.a, 0.0, 1.0)

    def cdf1(self, x) -> np.ndarray:
        """(1 + t)/2 + eta (P_{k+1}(t) - P_{k-1}(t)) / (2(2k + 1)) with t = 2x/a - 1."""
        t = np.clip(self._to_unit(x), -1.0, 1.0)
        k = self.k
        value = (1.0 + t) / 2.0 + self.eta * (_legendre(k + 1, t) - _legendre(k - 1, t)) / (2.0 * (2 * k + 1))
        return np.clip(value, 0.0, 1.0)

    def moments(self, max_order: int) -> Tuple[np.ndarray, np.ndarray]:
        """Moments 0..max_order of mu0 and mu1 by Gauss-Legendre quadrature on [0, a]."""
        nodes, weights = legendre.leggauss(QUADRATURE_NODES)
        x = self.a * (nodes + 1.0) / 2.0
        w = weights * self.a / 2.0
        powers = x[None, :] ** np.arange(max_order + 1)[:, None]
        return powers @ (w * self.density0(x)), powers @ (w * self.density1(x))

    def moment_gaps(self) -> np.ndarray:
        """mu1 minus mu0 moments of orders 0..k."""
        m0, m1 = self.moments(self.k)
        return m1 - m0

    def check_matching(self, tol: float = 1e-10) -> "MomentMatchedPair":
        gaps = self.moment_gaps()[: self.k]
        worst = float(np.abs(gaps).max())
        if worst > tol:
            raise ValueError(f"Moments below order {self.k} differ by up to {worst}")
        return self

    @property
    def delta_k_quadrature(self) -> float:
        return float(self.moment_gaps()[self.k])

    @property
    def delta_k_exact(self) -> float:
        """eta a^k (k!)^2 / (2k+1)!, the k-th moment gap in closed form."""
        k = self.k
        log_ratio = 2.0 * gammaln(k + 1) - gammaln(2 * k + 2)
        return float(self.eta * math.exp(k * math.log(self.a) + log_ratio))

    @property
    def delta_k_asymptotic(self) -> float:
        """eta k! (alpha/(kN))^k, the simplified form quoted with the lower bound."""
        k = self.k
        return float(self.eta * math.exp(gammaln(k + 1) + k * math.log(self.alpha / (k * self.n))))

    def sample0(self, size, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, self.a, size=size)

    def sample1(self, size, rng: np.random.Generator) -> np.ndarray:
        """Inverse-CDF draws from mu1 by vectorized bisection on [0, a]."""
        u = rng.random(size)
        lo = np.zeros_like(u)
        hi = np.full_like(u, self.a)
        for _ in range(INVERSE_CDF_STEPS):
            mid = (lo + hi) / 2.0
            below = self.cdf1(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return (lo + hi) / 2.0

def moment_matched_pair(k: int, eta: float, alpha: float, n: int) -> MomentMatchedPair:
    pair = MomentMatchedPair(k=k, eta=eta, alpha=alpha, n=n)
    logger.debug(
        f"Moment-matched pair k={k}, a={pair.a:.4g}: delta_k quadrature {pair.delta_k_quadrature:.4g}, "
        f"exact {pair.delta_k_exact:.4g}, asymptotic {pair.delta_k_asymptotic:.4g}"
    )
    return pair

def lower_bound_instance(
    k: int,
    eta: float,
    alpha: float,
    n: int,
    rng: np.random.Generator,
) -> Tuple[Tuple[Ensemble, Ensemble], Tuple[Ensemble, Ensemble]]:
    """
    Two hypotheses of ensemble pairs whose cross-fidelity tables are i.i.d. draws from mu0 and mu1.

    Returns ((psi0, phi0), (psi1, phi1)); every table entry is below 1/N so
    both tables are realizable.
    """
    pair = moment_matched_pair(k, eta, alpha, n)
    table0 = FidelityTable(pair.sample0((n, n), rng), row_id="H0:rows", col_id="H0:cols")
    table1 = FidelityTable(pair.sample1((n, n), rng), row_id="H1:rows", col_id="H1:cols")
    return from_fidelity_table(table0), from_fidelity_table(table1)
