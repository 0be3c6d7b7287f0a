import numpy as np
import pandas as pd
from scipy.special import gammaln

import logging
from typing import Dict

from ..bounds import classical_bound, hoeffding_bound_mmd_k
from ..ensembles.base import Ensemble
from ..exact_metrics import mmd_k_pairwise
from ..swap_sampler import SampleBatch, draw_oracle_batch, kind_pair
from ..validation import ComplexityConfig, EstimateReport, KindDiagnostics
from .base import BaseEstimator, EstimatorError, InsufficientCollisionsError
from .ustat import ustat_kernel_counts

logger = logging.getLogger(__name__)

def _diagnostics(batch: SampleBatch, summary: pd.DataFrame, k: int, value: float, m: int) -> KindDiagnostics:
    counts = summary["count"]
    return KindDiagnostics(
        kind=batch.kind,
        value=value,
        budget=batch.budget,
        labels_observed=len(summary),
        m=m,
        min_count=int(counts.min()) if len(counts) else 0,
        labels_dropped=int((counts < k).sum()),
    )

class UStatMMDEstimator(BaseEstimator):
    """Mean of the U-statistic kernel over labels drawn at least k times, per pair kind."""

    metric_id = "mmd"

    def f_bar_estimate(self, batch: SampleBatch) -> KindDiagnostics:
        summary = batch.label_summary()
        qualifying = summary[summary["count"] >= self.k]
        if qualifying.empty:
            raise InsufficientCollisionsError(batch.kind, self.k)
        z = ustat_kernel_counts(qualifying["plus"].to_numpy(), qualifying["count"].to_numpy(), self.k)
        return _diagnostics(batch, summary, self.k, float(z.mean()), len(qualifying))

    def estimate(self, batches: Dict[int, SampleBatch]) -> EstimateReport:
        diagnostics = [self.f_bar_estimate(batches[kind]) for kind in (11, 12, 22)]
        values = {d.kind: d.value for d in diagnostics}
        return self._report(values, diagnostics, sum(b.budget for b in batches.values()))

    def exact(self, first: Ensemble, second: Ensemble) -> float:
        return mmd_k_pairwise(first, second, self.k).value

    def initial_budget(self, n: int, cfg: ComplexityConfig) -> int:
        return hoeffding_bound_mmd_k(n, self.k, cfg.epsilon, cfg.delta, cfg.mmd_bound_constant)

class LabelFreeMMD1Estimator(UStatMMDEstimator):
    """MMD-1 from the grand mean of r per pair kind; labels are ignored."""

    metric_id = "mmd1-labelfree"
    requires_k = False

    def __init__(self, k: int | None = None, **kwargs):
        if k not in (None, 1):
            raise ValueError(f"The label-free estimator only estimates MMD-1. Got k={k}")
        super().__init__(**kwargs)
        self.k = 1

    def f_bar_estimate(self, batch: SampleBatch) -> KindDiagnostics:
        if batch.budget == 0:
            raise EstimatorError(f"Empty batch for kind {batch.kind}")
        summary = batch.label_summary()
        value = batch.mean_r()
        return _diagnostics(batch, summary, 1, value, len(summary))

class NonuniformMMDEstimator(UStatMMDEstimator):
    """
    Importance-corrected collision estimator for ensembles with unequal weights.

    F = C(M,k)^-1 sum_{T >= k} C(T,k) Z / w^(k-1) with w = T/M, evaluated in log space.
    """

    metric_id = "mmd-nonuniform"

    def f_bar_estimate(self, batch: SampleBatch) -> KindDiagnostics:
        k, m_total = self.k, batch.budget
        if m_total < k:
            raise InsufficientCollisionsError(batch.kind, k)
        summary = batch.label_summary()
        qualifying = summary[summary["count"] >= k]
        if qualifying.empty:
            raise InsufficientCollisionsError(batch.kind, k)

        t = qualifying["count"].to_numpy(dtype=np.float64)
        z = ustat_kernel_counts(qualifying["plus"].to_numpy(), qualifying["count"].to_numpy(), k)
        log_ratio = (gammaln(t + 1) - gammaln(t - k + 1)) - (gammaln(m_total + 1) - gammaln(m_total - k + 1))
        log_weight = log_ratio - (k - 1) * np.log(t / m_total)
        value = float(np.sum(np.exp(log_weight) * z))
        return _diagnostics(batch, summary, k, value, len(qualifying))

class ClassicalMMDEstimator(UStatMMDEstimator):
    """
    Plug-in MMD-k from exact-fidelity oracle draws: F is the sample mean of x**k.

    Needs computational basis ensembles unless constructed with force=True.
    """

    metric_id = "classical-mmd"

    def __init__(self, k: int | None = None, force: bool = False, **kwargs):
        super().__init__(k=k, **kwargs)
        self.force = force

    def draw(
        self,
        first: Ensemble,
        second: Ensemble,
        budget: int,
        rng: np.random.Generator,
        compact: bool = False,
    ) -> Dict[int, pd.DataFrame]:
        draws = {}
        for kind, part in sorted(self.split_budget(budget).items()):
            row, col = kind_pair(first, second, kind)
            draws[kind] = draw_oracle_batch(row, col, kind, part, rng, force=self.force)
        return draws

    def estimate(self, draws: Dict[int, pd.DataFrame]) -> EstimateReport:
        diagnostics = []
        for kind in (11, 12, 22):
            frame = draws[kind]
            if frame.empty:
                raise EstimatorError(f"No oracle draws for kind {kind}")
            labels = frame.groupby(["i", "j"]).size()
            diagnostics.append(
                KindDiagnostics(
                    kind=kind,
                    value=float((frame["x"] ** self.k).mean()),
                    budget=len(frame),
                    labels_observed=len(labels),
                    m=len(labels),
                    min_count=int(labels.min()),
                    labels_dropped=0,
                )
            )
        values = {d.kind: d.value for d in diagnostics}
        return self._report(values, diagnostics, sum(len(f) for f in draws.values()))

    def initial_budget(self, n: int, cfg: ComplexityConfig) -> int:
        return classical_bound(cfg.epsilon, cfg.delta)
