import numpy as np
import pandas as pd

import asyncio
import logging
from pathlib import Path
from typing import Any, Dict, List, Tuple

from .bounds import bounds_table
from .complexity import ComplexityCurve
from .database.db import ResultStore
from .ensembles.base import Ensemble
from .ensembles.hard_pair import hard_instance
from .estimators.base import BaseEstimator
from .estimators.mmd import ClassicalMMDEstimator
from .exact_metrics import distance, mmd_k_moment, mmd_k_pairwise
from .moment_matching import moment_matched_pair
from .runtime import RuntimeContext
from .swap_sampler import SampleBatch, read_batches, read_oracle_draws, write_batches, write_oracle_draws
from .sweep_manager import SweepManager
from .utils import trial_rng, write_csv
from .validation import (
    ORACLE_SCHEMA,
    ComplexityConfig,
    DistanceReport,
    EnsembleSpec,
    EstimateReport,
    NoiseConfig,
    RunConfig,
    validate_frame,
)

logger = logging.getLogger(__name__)

class CommandWorkflow:
    """The gen, dist, estimate, sweep, bounds and hard commands on top of a RuntimeContext."""

    def __init__(self, runtime: RuntimeContext):
        self.runtime = runtime

    ## Ensembles

    def build_ensembles(self, spec: EnsembleSpec, rng: np.random.Generator) -> List[Ensemble]:
        if spec.path is not None:
            return [Ensemble.load_json(spec.path)]
        generator = self.runtime.plugin_manager.get_generator(spec.generator, **spec.params)
        result = generator.generate(rng)
        return list(result) if isinstance(result, tuple) else [result]

    def run_gen(self, spec: EnsembleSpec, seed: int, output: str | Path) -> List[Dict[str, Any]]:
        """
        Generate and save an ensemble; pair generators write <stem>_1 and <stem>_2.

        Returns one summary (path, n, dim, kind) per written file.
        """
        ensembles = self.build_ensembles(spec, trial_rng(seed))
        output = Path(output)
        if len(ensembles) == 1:
            paths = [output]
        else:
            paths = [output.with_name(f"{output.stem}_{i + 1}{output.suffix or '.json'}") for i in range(len(ensembles))]

        summaries = []
        for ensemble, path in zip(ensembles, paths):
            ensemble.save_json(path)
            summaries.append({"path": str(path), "n": ensemble.n, "dim": ensemble.dim, "kind": ensemble.kind})
        return summaries

    def load_pair(self, first: str | Path, second: str | Path) -> Tuple[Ensemble, Ensemble]:
        return Ensemble.load_json(first), Ensemble.load_json(second)

    ## Exact distances

    def run_dist(
        self,
        first: Ensemble,
        second: Ensemble,
        metric: str,
        k: int | None = None,
        cross_check: bool = False,
    ) -> DistanceReport:
        if cross_check and metric != "mmd":
            raise ValueError("--cross-check applies to MMD only")
        report = distance(first, second, metric, k=k)
        if cross_check:
            moment = mmd_k_moment(first, second, k, cross_check=True)
            report = report.model_copy(update={"discrepancy": moment.discrepancy})
        logger.info(f"{metric}{'' if k is None else f'-{k}'} = {report.value:.12g}")
        return report

    ## Estimation

    def get_estimator(self, metric: str, k: int | None, noise: NoiseConfig | None, options: Dict[str, Any]) -> BaseEstimator:
        return self.runtime.plugin_manager.get_estimator(metric, k=k, noise=noise, **options)

    @staticmethod
    def label_space(first: Ensemble, second: Ensemble) -> Dict[int, Tuple[int, int]]:
        return {11: (first.n, first.n), 12: (first.n, second.n), 22: (second.n, second.n)}

    def run_estimate(
        self,
        first: Ensemble,
        second: Ensemble,
        metric: str,
        k: int | None,
        budget: int,
        seed: int,
        output_dir: str | Path,
        noise: NoiseConfig | None = None,
        options: Dict[str, Any] | None = None,
        replay: str | Path | None = None,
    ) -> Tuple[EstimateReport, Path | None]:
        """
        Draw `budget` samples, persist them as CSV, and estimate; with replay, estimate from a saved CSV.

        Samples are written before estimation so that a failed estimate can still be replayed.
        """
        estimator = self.get_estimator(metric, k, noise, options or {})
        classical = isinstance(estimator, ClassicalMMDEstimator)
        kinds = sorted(estimator.split_budget(0))

        if replay is not None:
            batches = self._read_replay(replay, first, second, kinds, classical)
            logger.info(f"Replaying {replay}")
            return estimator.validate(estimator.estimate(batches)), None

        batches = estimator.draw(first, second, budget, trial_rng(seed))
        output_dir = Path(output_dir)
        if classical:
            path = write_oracle_draws(batches.values(), output_dir / "oracle.csv")
        else:
            path = write_batches(batches.values(), output_dir / "batch.csv")
        logger.info(f"Wrote {budget} samples to {path}")
        return estimator.validate(estimator.estimate(batches)), path

    def _read_replay(self, path, first: Ensemble, second: Ensemble, kinds: List[int], classical: bool):
        if classical:
            draws = read_oracle_draws(path)
            empty = validate_frame(pd.DataFrame(), ORACLE_SCHEMA)
            return {kind: draws.get(kind, empty) for kind in kinds}

        space = self.label_space(first, second)
        batches = read_batches(path, space)
        return {kind: batches[kind] if kind in batches else SampleBatch.empty(kind, *space[kind]) for kind in kinds}

    ## Sweeps

    def resolve_complexity(self, run: RunConfig) -> ComplexityConfig:
        """Flag/sweep-file values over the application config defaults."""
        overrides = {
            key: getattr(run, key)
            for key in ("epsilon", "delta", "repetitions", "trials")
            if getattr(run, key) is not None
        }
        return ComplexityConfig(**{**self.runtime.complexity.model_dump(), **overrides, "seed": run.seed})

    async def run_sweep(self, run: RunConfig) -> ComplexityCurve:
        if run.metric is None:
            raise ValueError("A sweep needs a metric")
        if not run.ensembles or any(spec.generator is None for spec in run.ensembles):
            raise ValueError("A sweep needs generator specs (not files) so ensembles can be redrawn at every N")

        cfg = self.resolve_complexity(run)
        output_dir = Path(run.output_dir)
        store = ResultStore(self.runtime.store_url(output_dir))
        manager = SweepManager(workers=run.workers or self.runtime.workers, store=store)
        estimator_options = {"k": run.k, **run.options}
        if run.noise is not None:
            estimator_options["noise"] = run.noise.model_dump()
        generators = [(spec.generator, spec.params) for spec in run.ensembles]

        try:
            curve = await manager.sweep(run.metric, estimator_options, generators, run.n_values, cfg)
        finally:
            store.close()

        curve.save(output_dir)
        for outcome in curve.flagged():
            logger.warning(f"Flagged trial N={outcome.n} #{outcome.trial}: {outcome.message}")
        logger.info(f"Sweep slope {curve.slope:.3f} (R^2 {curve.r_squared:.3f})")
        return curve

    def run_sweep_sync(self, run: RunConfig) -> ComplexityCurve:
        return asyncio.run(self.run_sweep(run))

    ## Bounds and hard instances

    def run_bounds(
        self,
        n_values: List[int],
        k: int,
        epsilon: float,
        delta: float,
        output: str | Path | None = None,
    ) -> pd.DataFrame:
        table = bounds_table(n_values, k, epsilon, delta, self.runtime.complexity.mmd_bound_constant)
        if output is not None:
            write_csv(table, output)
        return table

    def run_hard(
        self,
        n: int,
        eta: float | None = None,
        alpha: float = 0.5,
    ) -> Dict[str, Any]:
        """
        MMD-k of the phase hard instance for k = 1..N, and optionally the moment gaps of the order-N moment-matched pair.
        """
        first, second = hard_instance(n)
        values = {k: mmd_k_pairwise(first, second, k).value for k in range(1, n + 1)}
        result: Dict[str, Any] = {"n": n, "mmd_by_k": values}
        if eta is not None:
            pair = moment_matched_pair(n, eta, alpha, n)
            result["moment_matched"] = {
                "a": pair.a,
                "lower_moment_gap": float(np.abs(pair.moment_gaps()[:n]).max()),
                "delta_k_quadrature": pair.delta_k_quadrature,
                "delta_k_exact": pair.delta_k_exact,
                "delta_k_asymptotic": pair.delta_k_asymptotic,
            }
        return result
