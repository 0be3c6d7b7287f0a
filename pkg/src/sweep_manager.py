import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence, Tuple

from .complexity import MIN_SWEEP_POINTS, ComplexityCurve, run_trial
from .config import configure_solver, configure_tolerances, get_solver_settings, get_tolerances
from .database.db import ResultStore, run_key
from .plugin_manager import PluginManager
from .validation import ComplexityConfig, TrialOutcome

logger = logging.getLogger(__name__)

@dataclass(frozen=True)
class TrialTask:
    """Everything a worker process needs to rebuild and run one trial."""
    metric: str
    estimator_options: Dict[str, Any]
    generators: Tuple[Tuple[str, Dict[str, Any]], ...]
    n: int
    trial: int
    config: Dict[str, Any] = field(default_factory=dict)
    tolerances: Dict[str, Any] = field(default_factory=dict)
    solver: Dict[str, Any] = field(default_factory=dict)

def execute_trial(task: TrialTask) -> TrialOutcome:
    # worker processes start from default settings unless the task carries the configured ones
    if task.tolerances:
        configure_tolerances(task.tolerances)
    if task.solver:
        configure_solver(task.solver)
    plugins = PluginManager()
    estimator = plugins.get_estimator(task.metric, **task.estimator_options)
    generators = [plugins.get_sized_generator(name, task.n, **params) for name, params in task.generators]
    return run_trial(estimator, generators, task.n, task.trial, ComplexityConfig(**task.config))

class SweepManager:
    """
    Runs the trials of a complexity sweep concurrently.

    Each trial is one task on a process pool, at most `workers` in flight.
    Finished trials go to the result store as they complete, so an
    interrupted sweep resumes where it stopped.
    """

    def __init__(
        self,
        workers: int = 1,
        store: ResultStore | None = None,
        runner: Callable[[TrialTask], TrialOutcome] = execute_trial,
        executor_factory: Callable[[int], Executor] | None = None,
    ):
        if workers < 1:
            raise ValueError(f"Number of workers must be >= 1. Got {workers}")
        self.workers = workers
        self.store = store
        self.runner = runner
        self.executor_factory = executor_factory or (lambda n: ProcessPoolExecutor(max_workers=n))
        self._semaphore = asyncio.Semaphore(workers)

    def build_tasks(
        self,
        metric: str,
        estimator_options: Dict[str, Any],
        generators: Sequence[Tuple[str, Dict[str, Any]]],
        n_values: Sequence[int],
        cfg: ComplexityConfig,
    ) -> List[TrialTask]:
        generators = tuple((name, dict(params)) for name, params in generators)
        config = cfg.model_dump()
        tolerances = get_tolerances().model_dump()
        solver = get_solver_settings().model_dump()
        return [
            TrialTask(metric, dict(estimator_options), generators, int(n), trial, config, tolerances, solver)
            for n in sorted(set(n_values))
            for trial in range(cfg.trials)
        ]

    @staticmethod
    def check_plugins(
        metric: str,
        estimator_options: Dict[str, Any],
        generators: Sequence[Tuple[str, Dict[str, Any]]],
        n: int,
    ):
        """Fail before any work starts when the estimator or a generator cannot be built."""
        plugins = PluginManager()
        plugins.get_estimator(metric, **estimator_options)
        for name, params in generators:
            plugins.get_sized_generator(name, n, **params)

    async def _create_trial_task(self, loop: asyncio.AbstractEventLoop, executor: Executor, task: TrialTask):
        async with self._semaphore:
            logger.debug(f"Starting trial N={task.n} #{task.trial}")
            try:
                outcome = await loop.run_in_executor(executor, self.runner, task)
            except Exception as e:
                logger.exception(f"Trial N={task.n} #{task.trial} failed: {e}")
                return task, None
        return task, outcome

    async def run_tasks(self, tasks: Sequence[TrialTask], key: str | None = None) -> List[TrialOutcome]:
        """
        Run tasks, skipping those already in the store under key.

        Outcomes are returned ordered by (n, trial) regardless of completion order.
        """
        outcomes: List[TrialOutcome] = []
        pending = list(tasks)
        if self.store is not None and key is not None:
            done = self.store.completed(key)
            if done:
                requested = {(t.n, t.trial) for t in tasks}
                stored = [o for o in self.store.query_trials(key) if (o.n, o.trial) in requested]
                outcomes.extend(stored)
                pending = [t for t in pending if (t.n, t.trial) not in done]
                logger.info(f"Resuming run {key}: {len(stored)} trials stored, {len(pending)} to go")

        total = len(pending)
        if total:
            loop = asyncio.get_running_loop()
            with self.executor_factory(self.workers) as executor:
                futures = [
                    asyncio.create_task(self._create_trial_task(loop, executor, task))
                    for task in pending
                ]
                finished = 0
                for future in asyncio.as_completed(futures):
                    task, outcome = await future
                    finished += 1
                    if outcome is None:
                        continue
                    logger.info(
                        f"[{finished}/{total}] N={outcome.n} trial {outcome.trial}: M={outcome.m}"
                        f"{' (flagged)' if outcome.flagged else ''}"
                    )
                    if self.store is not None and key is not None:
                        self.store.insert_trial(key, task.metric, task.estimator_options.get("k"), outcome)
                    outcomes.append(outcome)

        return sorted(outcomes, key=lambda o: (o.n, o.trial))

    async def sweep(
        self,
        metric: str,
        estimator_options: Dict[str, Any],
        generators: Sequence[Tuple[str, Dict[str, Any]]],
        n_values: Sequence[int],
        cfg: ComplexityConfig,
    ) -> ComplexityCurve:
        """
        Parallel counterpart of complexity.sweep, with the same per-trial seeds.

        Raises
        ------
        ValueError
            With fewer than three distinct N, or when no trial of some N produced a usable budget.
        """
        n_values = sorted(set(int(n) for n in n_values))
        if len(n_values) < MIN_SWEEP_POINTS:
            raise ValueError(f"A sweep needs at least {MIN_SWEEP_POINTS} distinct N. Got {n_values}")

        config = {
            "metric": metric,
            "estimator": estimator_options,
            "generators": [[name, params] for name, params in generators],
            "n_values": n_values,
            **cfg.model_dump(),
            "numerics": get_tolerances().model_dump(),
            "transport": get_solver_settings().model_dump(),
        }
        self.check_plugins(metric, estimator_options, generators, n_values[0])
        key = run_key(config)
        tasks = self.build_tasks(metric, estimator_options, generators, n_values, cfg)
        outcomes = await self.run_tasks(tasks, key)

        missing = [n for n in n_values if not any(o.n == n for o in outcomes)]
        if missing:
            raise ValueError(f"No trial finished for N={missing}")
        return ComplexityCurve.from_outcomes(metric, estimator_options.get("k"), outcomes, config)
