from abc import ABC, abstractmethod
import numpy as np

import logging
import math
from typing import Dict, Iterable, List

from ..ensembles.base import Ensemble
from ..swap_sampler import SampleBatch, draw_kind_batches
from ..validation import ComplexityConfig, EstimateReport, KindDiagnostics, NoiseConfig

logger = logging.getLogger(__name__)

class EstimatorError(ValueError):
    """An estimate is undefined for the given samples."""

class InsufficientCollisionsError(EstimatorError):
    def __init__(self, kind: int, k: int):
        self.kind = kind
        self.k = k
        super().__init__(f"No label of kind {kind} was sampled at least k={k} times")

class CoverageIncompleteError(EstimatorError):
    def __init__(self, kind: int, missing: List[tuple[int, int]]):
        self.kind = kind
        self.missing = missing
        preview = ", ".join(str(label) for label in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        super().__init__(f"{len(missing)} labels of kind {kind} were never sampled: {preview}{more}")

def combine_kinds(f11: float, f22: float, f12: float) -> float:
    """D = F11 + F22 - 2 F12."""
    return f11 + f22 - 2.0 * f12

class BaseEstimator(ABC):
    """
    Base class of the distance estimators.

    An estimator splits a sample budget over pair kinds, draws SWAP-test
    batches for them, and turns the batches into an EstimateReport. Subclasses
    set metric_id and implement estimate().
    """

    metric_id: str
    requires_k = True

    def __init__(self, k: int | None = None, noise: NoiseConfig | dict | None = None, **kwargs):
        if self.requires_k:
            if k is None:
                raise ValueError(f"Estimator '{self.metric_id}' needs an order k")
            if int(k) < 1:
                raise ValueError(f"k must be a positive integer. Got {k}")
            k = int(k)
        self.k = k
        if isinstance(noise, dict):
            noise = NoiseConfig(**noise)
        self.noise = noise
        if kwargs:
            logger.debug(f"Estimator '{self.metric_id}' ignores options {sorted(kwargs)}")

    def __repr__(self):
        return f"{type(self).__name__}(k={self.k})"

    def split_budget(self, budget: int) -> Dict[int, int]:
        """floor(M/3) to kinds 11 and 22, the remainder to kind 12."""
        if budget < 0:
            raise ValueError(f"Budget must be >= 0. Got {budget}")
        third = budget // 3
        return {11: third, 12: budget - 2 * third, 22: third}

    def draw(
        self,
        first: Ensemble,
        second: Ensemble,
        budget: int,
        rng: np.random.Generator,
        compact: bool = False,
    ) -> Dict[int, SampleBatch]:
        return draw_kind_batches(first, second, self.split_budget(budget), rng, self.noise, compact)

    @abstractmethod
    def estimate(self, batches) -> EstimateReport:
        """Estimate the distance from per-kind sample batches."""
        pass

    def validate(self, report: EstimateReport) -> EstimateReport:
        if not math.isfinite(report.estimate):
            raise EstimatorError(f"Estimator '{self.metric_id}' produced a non-finite estimate {report.estimate}")
        return report

    def run(
        self,
        first: Ensemble,
        second: Ensemble,
        budget: int,
        rng: np.random.Generator,
        compact: bool = False,
    ) -> EstimateReport:
        """
        Draw a fresh budget of samples and estimate from it.

        compact draws per-label counts without per-draw records.

        Raises
        ------
        EstimatorError
            When the estimate is undefined for the drawn samples.
        """
        batches = self.draw(first, second, budget, rng, compact)
        return self.validate(self.estimate(batches))

    @abstractmethod
    def exact(self, first: Ensemble, second: Ensemble) -> float:
        """Population value the estimate converges to."""
        pass

    @abstractmethod
    def initial_budget(self, n: int, cfg: ComplexityConfig) -> int:
        """Analytic sufficient budget for ensembles of n states, before the hi multiplier."""
        pass

    def succeeds(
        self,
        first: Ensemble,
        second: Ensemble,
        budget: int,
        rng: np.random.Generator,
        truth: float,
        epsilon: float,
    ) -> bool:
        """One probe: is the estimate defined and within epsilon of truth?"""
        try:
            report = self.run(first, second, budget, rng, compact=True)
        except EstimatorError as e:
            logger.debug(f"Probe at M={budget} undefined: {e}")
            return False
        return abs(report.estimate - truth) <= epsilon

    def _report(self, values: Dict[int, float], diagnostics: Iterable[KindDiagnostics], budget: int, **kwargs) -> EstimateReport:
        return EstimateReport(
            estimate=combine_kinds(values[11], values[22], values[12]),
            metric=self.metric_id,
            k=self.k,
            budget=budget,
            diagnostics=list(diagnostics),
            **kwargs,
        )
