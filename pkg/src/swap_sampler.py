"""
The SWAP-test measurement channel.

A draw picks a label (i, j) with probability p_i q_j and returns r = +1 with
probability (1 + X_ij) / 2, else -1. Batches keep per-label counts and, when
drawn record by record, the kind, i, j, r frame of every draw.
"""
import numpy as np
import pandas as pd

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

from .config import NumericTolerances, get_tolerances
from .ensembles.base import Ensemble
from .quantum import depolarize_rows, eps_ball_states, fidelity_matrix
from .utils import derive_seed, read_csv, split_budget, write_csv
from .validation import BATCH_SCHEMA, ORACLE_SCHEMA, PAIR_KINDS, NoiseConfig, validate_frame

logger = logging.getLogger(__name__)

def _check_kind(kind: int):
    if kind not in PAIR_KINDS:
        raise ValueError(f"Pair kind must be one of {PAIR_KINDS}. Got {kind}")

def kind_pair(first: Ensemble, second: Ensemble, kind: int) -> Tuple[Ensemble, Ensemble]:
    """The (row, column) ensembles sampled by a pair kind."""
    _check_kind(kind)
    return {11: (first, first), 12: (first, second), 22: (second, second)}[kind]

@dataclass(frozen=True)
class SampleRecord:
    r: int
    kind: int
    i: int
    j: int

    def __post_init__(self):
        if self.r not in (-1, 1):
            raise ValueError(f"SWAP outcome must be -1 or +1. Got {self.r}")
        _check_kind(self.kind)

    @property
    def label(self) -> Tuple[int, int]:
        return self.i, self.j

class SampleBatch:
    """
    SWAP-test outcomes of one pair kind over an n_rows x n_cols label space.

    The per-label totals T and +1 counts are the sufficient statistics every
    estimator reads. Per-draw records are kept when the batch was drawn or
    read record by record; a compact batch holds counts only and expands to
    records in label order on demand.
    """

    def __init__(
        self,
        kind: int,
        totals: np.ndarray,
        plus: np.ndarray,
        records: pd.DataFrame | None = None,
    ):
        _check_kind(kind)
        totals = np.asarray(totals, dtype=np.int64)
        plus = np.asarray(plus, dtype=np.int64)
        if totals.ndim != 2 or plus.shape != totals.shape:
            raise ValueError(f"Count matrices must share one 2-D shape. Got {totals.shape} and {plus.shape}")
        if totals.min(initial=0) < 0 or np.any(plus < 0) or np.any(plus > totals):
            raise ValueError("Counts must satisfy 0 <= plus <= T")
        totals.setflags(write=False)
        plus.setflags(write=False)
        self.kind = kind
        self.totals = totals
        self.plus = plus
        self._records = records

    @classmethod
    def from_records(cls, records: pd.DataFrame, kind: int, n_rows: int, n_cols: int) -> "SampleBatch":
        records = validate_frame(records, BATCH_SCHEMA).reset_index(drop=True)
        if len(records) and not (records["kind"] == kind).all():
            raise ValueError(f"Batch of kind {kind} holds records of other kinds")
        if len(records) and (records["i"].max() >= n_rows or records["j"].max() >= n_cols):
            raise ValueError(f"Batch labels exceed the label space {n_rows}x{n_cols}")

        i, j = records["i"].to_numpy(), records["j"].to_numpy()
        totals = np.zeros((n_rows, n_cols), dtype=np.int64)
        plus = np.zeros((n_rows, n_cols), dtype=np.int64)
        np.add.at(totals, (i, j), 1)
        np.add.at(plus, (i, j), (records["r"].to_numpy() > 0).astype(np.int64))
        return cls(kind, totals, plus, records)

    @classmethod
    def empty(cls, kind: int, n_rows: int, n_cols: int) -> "SampleBatch":
        return cls.from_records(pd.DataFrame(columns=list(BATCH_SCHEMA.columns)), kind, n_rows, n_cols)

    @property
    def n_rows(self) -> int:
        return int(self.totals.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.totals.shape[1])

    @property
    def budget(self) -> int:
        return int(self.totals.sum())

    @property
    def label_space(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def has_records(self) -> bool:
        return self._records is not None

    @property
    def records(self) -> pd.DataFrame:
        """Per-draw records; a compact batch lists its outcomes label by label, +1 first."""
        if self._records is None:
            i, j = np.nonzero(self.totals)
            t = self.totals[i, j]
            p = self.plus[i, j]
            starts = np.repeat(np.cumsum(t) - t, t)
            position = np.arange(int(t.sum())) - starts
            r = np.where(position < np.repeat(p, t), 1, -1)
            self._records = validate_frame(
                pd.DataFrame({"kind": self.kind, "i": np.repeat(i, t), "j": np.repeat(j, t), "r": r}),
                BATCH_SCHEMA,
            )
        return self._records

    def counts(self) -> np.ndarray:
        """T as an n_rows x n_cols matrix (zero for unobserved labels)."""
        return self.totals

    def label_summary(self) -> pd.DataFrame:
        """Per observed label: count T, number of +1 outcomes, mean of r. Sorted by (i, j)."""
        i, j = np.nonzero(self.totals)
        t = self.totals[i, j]
        p = self.plus[i, j]
        return pd.DataFrame({"i": i, "j": j, "count": t, "plus": p, "mean": (2 * p - t) / t})

    def mean_r(self) -> float:
        """Grand mean of r over the batch."""
        if self.budget == 0:
            raise ValueError(f"Empty batch of kind {self.kind}")
        return float((2 * self.plus.sum() - self.budget) / self.budget)

    def qualifying_labels(self, k: int) -> int:
        """m = #{labels with T >= k}."""
        return int((self.totals >= k).sum())

    def missing_labels(self) -> List[Tuple[int, int]]:
        return [(int(i), int(j)) for i, j in np.argwhere(self.totals == 0)]

    def mean_matrix(self) -> np.ndarray:
        """Per-label mean of r; NaN where a label was never drawn."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.totals > 0, (2 * self.plus - self.totals) / self.totals, np.nan)

    @classmethod
    def concat(cls, batches: Iterable["SampleBatch"]) -> "SampleBatch":
        """Merge same-kind batches; records are concatenated in the given order."""
        batches = list(batches)
        if not batches:
            raise ValueError("Nothing to concatenate")
        first = batches[0]
        for batch in batches[1:]:
            if (batch.kind, batch.totals.shape) != (first.kind, first.totals.shape):
                raise ValueError("Cannot concatenate batches of different kinds or label spaces")
        records = None
        if all(b.has_records for b in batches):
            records = pd.concat([b.records for b in batches], ignore_index=True)
        return cls(first.kind, sum(b.totals for b in batches), sum(b.plus for b in batches), records)

    def __repr__(self):
        return f"SampleBatch(kind={self.kind}, labels={self.n_rows}x{self.n_cols}, budget={self.budget})"

## Drawing

def _draw_labels(first: Ensemble, second: Ensemble, m: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    i = rng.choice(first.n, size=m, p=first.weights)
    j = rng.choice(second.n, size=m, p=second.weights)
    return i, j

def _noisy_rows(rows: np.ndarray, noise: NoiseConfig, rng: np.random.Generator) -> np.ndarray:
    if noise.model == "eps-ball":
        return eps_ball_states(rows, noise.eps_b, rng)
    return depolarize_rows(rows, noise.lambda_b, rng, mode="renormalized")

def _pair_fidelities(
    first: Ensemble,
    second: Ensemble,
    i: np.ndarray,
    j: np.ndarray,
    rng: np.random.Generator,
    noise: NoiseConfig | None,
) -> np.ndarray:
    if noise is None:
        return fidelity_matrix(first.amplitudes, second.amplitudes)[i, j]
    # a fresh noisy copy of both states for every test; the label keeps the center pair
    a = _noisy_rows(first.amplitudes[i], noise, rng)
    b = _noisy_rows(second.amplitudes[j], noise, rng)
    return np.clip(np.abs(np.einsum("nd,nd->n", a.conj(), b)) ** 2, 0.0, 1.0)

def draw_sample(first: Ensemble, second: Ensemble, kind: int, rng: np.random.Generator) -> SampleRecord:
    _check_kind(kind)
    if first.dim != second.dim:
        raise ValueError(f"Ensemble dimensions differ: {first.dim} vs {second.dim}")
    i, j = _draw_labels(first, second, 1, rng)
    x = fidelity_matrix(first.amplitudes[i], second.amplitudes[j])[0, 0]
    r = 1 if rng.random() < (1.0 + x) / 2.0 else -1
    return SampleRecord(r=r, kind=kind, i=int(i[0]), j=int(j[0]))

def draw_batch(
    first: Ensemble,
    second: Ensemble,
    kind: int,
    budget: int,
    rng: np.random.Generator,
    noise: NoiseConfig | None = None,
    compact: bool = False,
) -> SampleBatch:
    """
    Draw `budget` independent SWAP-test outcomes between first (rows) and second (columns).

    Labels, noise and outcomes are drawn in that order from rng, so equal seeds
    give identical batches. With compact=True and no noise the per-label counts
    are drawn directly (multinomial labels, binomial outcomes), which has the
    same distribution and skips the per-draw records.
    """
    _check_kind(kind)
    if budget < 0:
        raise ValueError(f"Budget must be >= 0. Got {budget}")
    if first.dim != second.dim:
        raise ValueError(f"Ensemble dimensions differ: {first.dim} vs {second.dim}")
    if budget == 0:
        return SampleBatch.empty(kind, first.n, second.n)
    if compact and noise is None:
        return _draw_counts(first, second, kind, budget, rng)

    i, j = _draw_labels(first, second, budget, rng)
    x = _pair_fidelities(first, second, i, j, rng, noise)
    r = np.where(rng.random(budget) < (1.0 + x) / 2.0, 1, -1)
    records = pd.DataFrame({"kind": kind, "i": i, "j": j, "r": r})
    return SampleBatch.from_records(records, kind, first.n, second.n)

def _draw_counts(first: Ensemble, second: Ensemble, kind: int, budget: int, rng: np.random.Generator) -> SampleBatch:
    label_probs = np.outer(first.weights, second.weights).ravel()
    totals = rng.multinomial(budget, label_probs / label_probs.sum()).reshape(first.n, second.n)
    x = fidelity_matrix(first.amplitudes, second.amplitudes)
    plus = rng.binomial(totals, (1.0 + x) / 2.0)
    return SampleBatch(kind, totals, plus)

def _draw_worker(args) -> SampleBatch:
    first, second, kind, budget, seed, noise = args
    return draw_batch(first, second, kind, budget, np.random.default_rng(seed), noise)

def draw_batch_parallel(
    first: Ensemble,
    second: Ensemble,
    kind: int,
    budget: int,
    seed: int,
    workers: int = 1,
    noise: NoiseConfig | None = None,
) -> SampleBatch:
    """
    Split the budget over workers with seeds seed ^ worker_index and concatenate in worker order.

    The result depends on (seed, workers) only, never on scheduling.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1. Got {workers}")
    tasks = [
        (first, second, kind, part, derive_seed(seed, index), noise)
        for index, part in enumerate(split_budget(budget, workers))
    ]
    if workers == 1:
        return _draw_worker(tasks[0])

    logger.debug(f"Drawing {budget} kind-{kind} samples on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        parts = list(executor.map(_draw_worker, tasks))
    return SampleBatch.concat(parts)

def draw_kind_batches(
    first: Ensemble,
    second: Ensemble,
    budgets: Dict[int, int],
    rng: np.random.Generator,
    noise: NoiseConfig | None = None,
    compact: bool = False,
) -> Dict[int, SampleBatch]:
    """One batch per pair kind, drawn in kind order 11, 12, 22 from the same stream."""
    batches = {}
    for kind in sorted(budgets):
        row, col = kind_pair(first, second, kind)
        batches[kind] = draw_batch(row, col, kind, budgets[kind], rng, noise, compact)
    return batches

## Classical oracle

def _check_classical(first: Ensemble, second: Ensemble, force: bool, tol: NumericTolerances) -> np.ndarray:
    x = fidelity_matrix(first.amplitudes, second.amplitudes)
    if not force:
        off = np.minimum(x, 1.0 - x).max()
        if off > tol.distinct_fidelity:
            raise ValueError(
                "Classical oracle needs fidelities in {0, 1} (computational basis ensembles); "
                "pass force=True to read exact fidelities of other ensembles"
            )
    return x

def classical_oracle_draw(
    first: Ensemble,
    second: Ensemble,
    kind: int,
    rng: np.random.Generator,
    force: bool = False,
    tol: NumericTolerances | None = None,
) -> Tuple[Tuple[int, int], float]:
    """Draw a label and return its exact fidelity."""
    _check_kind(kind)
    x = _check_classical(first, second, force, get_tolerances(tol))
    i, j = _draw_labels(first, second, 1, rng)
    return (int(i[0]), int(j[0])), float(x[i[0], j[0]])

def draw_oracle_batch(
    first: Ensemble,
    second: Ensemble,
    kind: int,
    budget: int,
    rng: np.random.Generator,
    force: bool = False,
    tol: NumericTolerances | None = None,
) -> pd.DataFrame:
    """`budget` oracle draws as a kind, i, j, x frame."""
    _check_kind(kind)
    if budget < 0:
        raise ValueError(f"Budget must be >= 0. Got {budget}")
    x = _check_classical(first, second, force, get_tolerances(tol))
    i, j = _draw_labels(first, second, budget, rng)
    return validate_frame(pd.DataFrame({"kind": kind, "i": i, "j": j, "x": x[i, j]}), ORACLE_SCHEMA)

## CSV replay

def write_batches(batches: Iterable[SampleBatch], path: str | Path) -> Path:
    records = pd.concat([b.records for b in batches], ignore_index=True)
    return write_csv(validate_frame(records, BATCH_SCHEMA), path)

def read_batches(path: str | Path, label_space: Dict[int, Tuple[int, int]] | None = None) -> Dict[int, SampleBatch]:
    """
    Read a kind, i, j, r CSV back into one batch per kind.

    Without label_space the label ranges are taken from the largest observed
    indices, which undercounts unobserved trailing labels.
    """
    records = validate_frame(read_csv(path), BATCH_SCHEMA)
    batches = {}
    for kind, group in records.groupby("kind", sort=True):
        kind = int(kind)
        if label_space and kind in label_space:
            n_rows, n_cols = label_space[kind]
        else:
            n_rows, n_cols = int(group["i"].max()) + 1, int(group["j"].max()) + 1
        batches[kind] = SampleBatch.from_records(group.reset_index(drop=True), kind, n_rows, n_cols)
    return batches

def write_oracle_draws(draws: Iterable[pd.DataFrame], path: str | Path) -> Path:
    return write_csv(validate_frame(pd.concat(list(draws), ignore_index=True), ORACLE_SCHEMA), path)

def read_oracle_draws(path: str | Path) -> Dict[int, pd.DataFrame]:
    records = validate_frame(read_csv(path), ORACLE_SCHEMA)
    return {int(kind): group.reset_index(drop=True) for kind, group in records.groupby("kind", sort=True)}
