"""
Empirical sample complexity: minimal budgets by bracketing and bisection, sweeps over N, log-log fits.
"""
import numpy as np
import pandas as pd
from scipy import stats

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, List, Sequence, Tuple

from .ensembles.base import BaseEnsembleGenerator, Ensemble
from .estimators.base import BaseEstimator
from .utils import read_csv, trial_rng, write_csv
from .validation import CURVE_SCHEMA, ComplexityConfig, CurvePoint, CurveSummary, TrialOutcome, validate_frame

logger = logging.getLogger(__name__)

MIN_GAP = 100
GAP_DIVISOR = 50
MIN_SWEEP_POINTS = 3

@dataclass
class BisectionResult:
    m: int
    flagged: bool
    probes: int
    initial_hi: int
    doublings: int = 0

def bisect_min_samples(
    probe: Callable[[int], float],
    hi: int,
    delta: float,
    j_max: int,
    min_gap: int = MIN_GAP,
) -> BisectionResult:
    """
    Smallest budget whose success rate reaches 1 - delta, up to the stopping granularity.

    hi is doubled at most j_max times until it passes; a hi that never passes
    returns a flagged result. Bisection then narrows (lo, hi] until
    hi - lo <= max(min_gap, hi // 50) and returns the final hi.
    """
    if hi < 1:
        raise ValueError(f"Initial hi must be >= 1. Got {hi}")
    target = 1.0 - delta
    initial_hi = int(hi)
    probes = 0

    doublings = 0
    while True:
        probes += 1
        if probe(hi) >= target:
            break
        if doublings >= j_max:
            logger.warning(f"No passing budget after {doublings} doublings (last hi={hi})")
            return BisectionResult(m=hi, flagged=True, probes=probes, initial_hi=initial_hi, doublings=doublings)
        hi *= 2
        doublings += 1
        logger.debug(f"Bracketing: doubled hi to {hi}")

    lo = 0
    while hi - lo > max(min_gap, hi // GAP_DIVISOR):
        mid = (lo + hi) // 2
        if mid == 0:
            break
        probes += 1
        rate = probe(mid)
        logger.debug(f"Probe M={mid}: success rate {rate:.3f}")
        if rate >= target:
            hi = mid
        else:
            lo = mid
    return BisectionResult(m=hi, flagged=False, probes=probes, initial_hi=initial_hi, doublings=doublings)

def success_rate(
    estimator: BaseEstimator,
    first: Ensemble,
    second: Ensemble,
    budget: int,
    truth: float,
    cfg: ComplexityConfig,
    rng: np.random.Generator,
) -> float:
    """Fraction of K independent probes, each on fresh samples, that land within epsilon of truth."""
    hits = sum(
        estimator.succeeds(first, second, budget, rng, truth, cfg.epsilon)
        for _ in range(cfg.repetitions)
    )
    return hits / cfg.repetitions

def draw_pair(generators: Sequence[BaseEnsembleGenerator], rng: np.random.Generator) -> Tuple[Ensemble, Ensemble]:
    """One pair of ensembles: from a single pair generator, or one ensemble from each of two generators."""
    if len(generators) == 1:
        pair = generators[0].generate(rng)
        if isinstance(pair, Ensemble):
            raise ValueError(f"Generator {generators[0]!r} returns a single ensemble; give two generators")
        return pair
    if len(generators) == 2:
        first, second = (generator.generate(rng) for generator in generators)
        if not isinstance(first, Ensemble) or not isinstance(second, Ensemble):
            raise ValueError("Two generators must each return a single ensemble")
        return first, second
    raise ValueError(f"Expected one pair generator or two ensemble generators. Got {len(generators)}")

def sized(generators: Sequence[BaseEnsembleGenerator], n: int) -> List[BaseEnsembleGenerator]:
    return [generator.with_size(n) for generator in generators]

def run_trial(
    estimator: BaseEstimator,
    generators: Sequence[BaseEnsembleGenerator],
    n: int,
    trial: int,
    cfg: ComplexityConfig,
) -> TrialOutcome:
    """
    One trial at size n: fresh ensembles, exact ground truth, then bracketing and bisection.

    All randomness comes from trial_rng(seed, n, trial), so the outcome does
    not depend on which process runs the trial or in which order.
    """
    rng = trial_rng(cfg.seed, n, trial)
    first, second = draw_pair(sized(generators, n), rng)
    truth = estimator.exact(first, second)
    hi = max(1, math.ceil(cfg.hi_multiplier * estimator.initial_budget(n, cfg)))
    logger.debug(f"Trial N={n} #{trial}: D_true={truth:.6g}, initial hi={hi}")

    def probe(budget: int) -> float:
        return success_rate(estimator, first, second, budget, truth, cfg, rng)

    result = bisect_min_samples(probe, hi, cfg.delta, cfg.j_max)
    message = f"no passing budget after {cfg.j_max} doublings of {result.initial_hi}" if result.flagged else None
    if result.flagged:
        logger.warning(f"Trial N={n} #{trial} flagged: {message}")
    return TrialOutcome(
        n=n,
        trial=trial,
        m=result.m,
        flagged=result.flagged,
        d_true=truth,
        seed=cfg.seed,
        probes=result.probes,
        message=message,
    )

def aggregate(outcomes: Iterable[TrialOutcome]) -> CurvePoint:
    """Mean and standard deviation of M over the unflagged trials of one N."""
    outcomes = list(outcomes)
    if not outcomes:
        raise ValueError("No trial outcomes to aggregate")
    sizes = {o.n for o in outcomes}
    if len(sizes) != 1:
        raise ValueError(f"Outcomes of one curve point must share N. Got {sorted(sizes)}")

    used = np.array([o.m for o in outcomes if not o.flagged], dtype=np.float64)
    n = sizes.pop()
    if used.size == 0:
        raise ValueError(f"Every trial at N={n} was flagged")
    return CurvePoint(
        n=n,
        m_mean=float(used.mean()),
        m_std=float(used.std()),
        trials_used=int(used.size),
        trials_flagged=len(outcomes) - int(used.size),
    )

def estimate_min_samples(
    estimator: BaseEstimator,
    generators: Sequence[BaseEnsembleGenerator],
    n: int,
    cfg: ComplexityConfig,
) -> Tuple[List[TrialOutcome], CurvePoint]:
    """Run cfg.trials trials at size n and aggregate them."""
    outcomes = []
    for trial in range(cfg.trials):
        outcome = run_trial(estimator, generators, n, trial, cfg)
        logger.info(f"N={n} trial {trial + 1}/{cfg.trials}: M={outcome.m}{' (flagged)' if outcome.flagged else ''}")
        outcomes.append(outcome)
    return outcomes, aggregate(outcomes)

def fit_loglog(points: Iterable[Tuple[float, float]]) -> Tuple[float, float, float]:
    """Least-squares fit of log M on log N; returns (slope, intercept, R^2)."""
    points = list(points)
    if len(points) < MIN_SWEEP_POINTS:
        raise ValueError(f"A log-log fit needs at least {MIN_SWEEP_POINTS} points. Got {len(points)}")
    n, m = np.asarray(points, dtype=np.float64).T
    if (n <= 0).any() or (m <= 0).any():
        raise ValueError("Log-log fits need strictly positive N and M")

    log_m = np.log(m)
    if np.ptp(log_m) == 0.0:
        return 0.0, float(log_m[0]), 1.0
    fit = stats.linregress(np.log(n), log_m)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)

@dataclass
class ComplexityCurve:
    metric: str
    k: int | None
    outcomes: List[TrialOutcome]
    points: List[CurvePoint]
    slope: float
    intercept: float
    r_squared: float
    config: dict = field(default_factory=dict)

    @classmethod
    def from_outcomes(
        cls,
        metric: str,
        k: int | None,
        outcomes: Iterable[TrialOutcome],
        config: dict | None = None,
    ) -> "ComplexityCurve":
        outcomes = sorted(outcomes, key=lambda o: (o.n, o.trial))
        by_n: dict[int, list[TrialOutcome]] = {}
        for outcome in outcomes:
            by_n.setdefault(outcome.n, []).append(outcome)
        points = [aggregate(group) for _, group in sorted(by_n.items())]
        slope, intercept, r_squared = fit_loglog((p.n, p.m_mean) for p in points)
        return cls(metric, k, outcomes, points, slope, intercept, r_squared, dict(config or {}))

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(
            {
                "metric": self.metric,
                "k": pd.array([self.k] * len(self.outcomes), dtype="Int64"),
                "N": [o.n for o in self.outcomes],
                "trial": [o.trial for o in self.outcomes],
                "M": [o.m for o in self.outcomes],
            }
        )
        return validate_frame(df, CURVE_SCHEMA)

    def summary(self) -> CurveSummary:
        return CurveSummary(
            metric=self.metric,
            k=self.k,
            slope=self.slope,
            intercept=self.intercept,
            r_squared=self.r_squared,
            points=self.points,
            config=self.config,
            seed=int(self.config.get("seed", 0)),
        )

    def flagged(self) -> List[TrialOutcome]:
        return [o for o in self.outcomes if o.flagged]

    def save(self, output_dir: str | Path, stem: str = "curve") -> Tuple[Path, Path]:
        """Write <stem>.csv (metric,k,N,trial,M) and <stem>.json (fit summary)."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        csv_path = write_csv(self.to_frame(), output_dir / f"{stem}.csv")
        json_path = output_dir / f"{stem}.json"
        json_path.write_text(json.dumps(self.summary().model_dump(), indent=2))
        logger.info(f"Curve written to {csv_path} and {json_path}")
        return csv_path, json_path

def read_curve(path: str | Path) -> pd.DataFrame:
    return validate_frame(read_csv(path), CURVE_SCHEMA)

def sweep(
    estimator: BaseEstimator,
    generators: Sequence[BaseEnsembleGenerator],
    n_values: Sequence[int],
    cfg: ComplexityConfig,
) -> ComplexityCurve:
    """
    Minimal budgets for every N in n_values, in process, and the log-log fit over them.

    Raises
    ------
    ValueError
        With fewer than three distinct N, or when every trial of some N is flagged.
    """
    n_values = sorted(set(int(n) for n in n_values))
    if len(n_values) < MIN_SWEEP_POINTS:
        raise ValueError(f"A sweep needs at least {MIN_SWEEP_POINTS} distinct N. Got {n_values}")

    outcomes: List[TrialOutcome] = []
    for n in n_values:
        trial_outcomes, point = estimate_min_samples(estimator, generators, n, cfg)
        logger.info(f"N={n}: M mean {point.m_mean:.1f}, std {point.m_std:.1f} over {point.trials_used} trials")
        outcomes.extend(trial_outcomes)
    return ComplexityCurve.from_outcomes(estimator.metric_id, estimator.k, outcomes, cfg.model_dump())
