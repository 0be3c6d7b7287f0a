import numpy as np

import logging
from typing import Dict

from ..bounds import hoeffding_bound_wasserstein, hoeffding_bound_wasserstein_nonuniform
from ..ensembles.base import Ensemble
from ..exact_metrics import wasserstein_exact
from ..swap_sampler import SampleBatch
from ..transport import solve_ot
from ..validation import ComplexityConfig, EstimateReport, KindDiagnostics
from .base import BaseEstimator, CoverageIncompleteError, EstimatorError

logger = logging.getLogger(__name__)

class WassersteinEstimator(BaseEstimator):
    """
    Plug-in Wasserstein distance from the kind-12 batch.

    Every label needs at least one sample; per-label means of r estimate the
    fidelities, clamped to [0, 1], and C = 1 - X is solved with uniform marginals.
    """

    metric_id = "wasserstein"
    requires_k = False

    def split_budget(self, budget: int) -> Dict[int, int]:
        if budget < 0:
            raise ValueError(f"Budget must be >= 0. Got {budget}")
        return {12: budget}

    def estimated_cost(self, batch: SampleBatch) -> np.ndarray:
        missing = batch.missing_labels()
        if missing:
            raise CoverageIncompleteError(batch.kind, missing)
        return 1.0 - np.clip(batch.mean_matrix(), 0.0, 1.0)

    def marginals(self, batch: SampleBatch) -> tuple[np.ndarray, np.ndarray]:
        return np.full(batch.n_rows, 1.0 / batch.n_rows), np.full(batch.n_cols, 1.0 / batch.n_cols)

    def estimate(self, batches: Dict[int, SampleBatch]) -> EstimateReport:
        batch = batches.get(12)
        if batch is None or batch.budget == 0:
            raise EstimatorError("The Wasserstein estimator needs a non-empty kind-12 batch")

        cost = self.estimated_cost(batch)
        p, q = self.marginals(batch)
        coupling, _ = solve_ot(cost, p, q)
        counts = batch.counts()
        diagnostics = KindDiagnostics(
            kind=12,
            value=coupling.objective,
            budget=batch.budget,
            labels_observed=int((counts > 0).sum()),
            m=int((counts > 0).sum()),
            min_count=int(counts.min()),
            labels_dropped=0,
        )
        return EstimateReport(
            estimate=coupling.objective,
            metric=self.metric_id,
            budget=batch.budget,
            diagnostics=[diagnostics],
            weights={"p": p.tolist(), "q": q.tolist()},
        )

    def exact(self, first: Ensemble, second: Ensemble) -> float:
        return wasserstein_exact(first, second).value

    def initial_budget(self, n: int, cfg: ComplexityConfig) -> int:
        return hoeffding_bound_wasserstein(n, cfg.epsilon, cfg.delta)

class NonuniformWassersteinEstimator(WassersteinEstimator):
    """Wasserstein estimator that also estimates the marginals from the drawn label indices."""

    metric_id = "wasserstein-nonuniform"

    def marginals(self, batch: SampleBatch) -> tuple[np.ndarray, np.ndarray]:
        counts = batch.counts()
        return counts.sum(axis=1) / batch.budget, counts.sum(axis=0) / batch.budget

    def initial_budget(self, n: int, cfg: ComplexityConfig) -> int:
        return hoeffding_bound_wasserstein_nonuniform(n, n, cfg.epsilon, cfg.delta)
