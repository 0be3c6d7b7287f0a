from __future__ import annotations

import numpy as np
import pandas as pd

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, Sequence, Tuple

from ..config import NumericTolerances, get_tolerances
from ..quantum import PureState, fidelity_matrix
from ..utils import read_csv, write_csv
from ..validation import EnsembleDocument, EnsembleEntry

logger = logging.getLogger(__name__)

class Ensemble:
    """
    Weighted list of pairwise distinct pure states.

    Immutable after construction. Amplitudes are stored row-wise in an (N, d)
    array; PureState views are built on demand.
    """

    def __init__(
        self,
        states: Sequence[PureState] | np.ndarray,
        weights: Sequence[float] | np.ndarray | None = None,
        kind: str = "",
        tol: NumericTolerances | None = None,
    ):
        tol = get_tolerances(tol)

        if isinstance(states, np.ndarray):
            amplitudes = np.array(states, dtype=np.complex128)
            if amplitudes.ndim != 2:
                raise ValueError(f"Amplitude array must be (N, d). Got shape {amplitudes.shape}")
            for row in amplitudes:
                PureState(row)
        else:
            if len(states) == 0:
                raise ValueError("An ensemble needs at least one state")
            dims = {s.dim for s in states}
            if len(dims) != 1:
                raise ValueError(f"All states of an ensemble must share one dimension. Got {sorted(dims)}")
            amplitudes = np.stack([s.amplitudes for s in states])

        n = amplitudes.shape[0]
        if n == 0:
            raise ValueError("An ensemble needs at least one state")
        if weights is None:
            weights = np.full(n, 1.0 / n)
        weights = np.array(weights, dtype=np.float64)

        if weights.shape != (n,):
            raise ValueError(f"Expected {n} weights. Got shape {weights.shape}")
        if np.any(weights <= 0):
            raise ValueError(f"Ensemble weights must be strictly positive. Got min {weights.min()}")
        if abs(weights.sum() - 1.0) > tol.probability_sum:
            raise ValueError(f"Ensemble weights must sum to 1. Got {weights.sum()!r}")

        collision = find_collision(amplitudes, tol)
        if collision is not None:
            i, j = collision
            raise ValueError(f"States {i} and {j} coincide (fidelity >= 1 - {tol.distinct_fidelity})")

        amplitudes.setflags(write=False)
        weights.setflags(write=False)
        self._amplitudes = amplitudes
        self._weights = weights
        self.kind = kind

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def n(self) -> int:
        return int(self._amplitudes.shape[0])

    @property
    def dim(self) -> int:
        return int(self._amplitudes.shape[1])

    @property
    def states(self) -> Tuple[PureState, ...]:
        return tuple(PureState(row) for row in self._amplitudes)

    @property
    def is_uniform(self) -> bool:
        return bool(np.allclose(self._weights, 1.0 / self.n, rtol=0.0, atol=1e-15))

    def __len__(self):
        return self.n

    def __iter__(self) -> Iterator[Tuple[float, PureState]]:
        for weight, row in zip(self._weights, self._amplitudes):
            yield float(weight), PureState(row)

    def __repr__(self):
        return f"Ensemble(n={self.n}, dim={self.dim}, kind={self.kind!r})"

    def permuted(self, permutation: Sequence[int]) -> "Ensemble":
        permutation = np.asarray(permutation)
        if sorted(permutation.tolist()) != list(range(self.n)):
            raise ValueError(f"Not a permutation of {self.n} entries: {permutation.tolist()}")
        return Ensemble(self._amplitudes[permutation], self._weights[permutation], kind=self.kind)

    ## Serialization

    def to_document(self) -> EnsembleDocument:
        return EnsembleDocument(
            dim=self.dim,
            kind=self.kind,
            entries=[
                EnsembleEntry(weight=float(w), amplitudes=state.to_interleaved())
                for w, state in self
            ],
        )

    @classmethod
    def from_document(cls, document: EnsembleDocument | Dict[str, Any]) -> "Ensemble":
        if not isinstance(document, EnsembleDocument):
            document = EnsembleDocument.model_validate(document)
        states = [PureState.from_interleaved(e.amplitudes) for e in document.entries]
        weights = [e.weight for e in document.entries]
        return cls(states, weights, kind=document.kind)

    def save_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_document().model_dump(), f, indent=2)
            f.write("\n")
        logger.info(f"Wrote ensemble ({self.n} states, d={self.dim}, kind={self.kind!r}) to {path}")
        return path

    @classmethod
    def load_json(cls, path: str | Path) -> "Ensemble":
        with open(path, encoding="utf-8") as f:
            return cls.from_document(json.load(f))

def find_collision(amplitudes: np.ndarray, tol: NumericTolerances | None = None) -> Tuple[int, int] | None:
    """First pair (i, j), i < j, whose fidelity reaches 1 - distinct_fidelity."""
    tol = get_tolerances(tol)
    if amplitudes.shape[0] < 2:
        return None
    x = fidelity_matrix(amplitudes, amplitudes)
    np.fill_diagonal(x, 0.0)
    hits = np.argwhere(np.triu(x >= 1.0 - tol.distinct_fidelity, k=1))
    if hits.size == 0:
        return None
    return int(hits[0, 0]), int(hits[0, 1])

def draw_distinct(
    draw_one: Callable[[np.random.Generator], np.ndarray],
    n: int,
    rng: np.random.Generator,
    tol: NumericTolerances | None = None,
) -> np.ndarray:
    """
    Draw n pairwise distinct unit vectors, resampling collisions.

    Each draw that collides with an earlier one is redrawn up to
    max_resample_attempts times before giving up.
    """
    tol = get_tolerances(tol)
    if n < 1:
        raise ValueError(f"Ensemble size must be >= 1. Got {n}")

    rows: list[np.ndarray] = []
    for index in range(n):
        for attempt in range(tol.max_resample_attempts + 1):
            candidate = np.asarray(draw_one(rng), dtype=np.complex128)
            if not rows:
                break
            overlaps = np.abs(np.stack(rows).conj() @ candidate) ** 2
            if overlaps.max() < 1.0 - tol.distinct_fidelity:
                break
            logger.debug(f"State {index} collided on attempt {attempt}; resampling")
        else:
            raise ValueError(
                f"Could not draw a state distinct from the previous {index} after "
                f"{tol.max_resample_attempts} resamples"
            )
        rows.append(candidate)
    return np.stack(rows)

@dataclass(frozen=True, eq=False)
class FidelityTable:
    entries: np.ndarray
    row_id: str = "rows"
    col_id: str = "cols"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2:
            raise ValueError(f"A fidelity table must be a matrix. Got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("Fidelity table contains non-finite entries")
        if entries.min() < 0.0 or entries.max() > 1.0:
            raise ValueError(f"Fidelity table entries must lie in [0, 1]. Got range [{entries.min()}, {entries.max()}]")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @classmethod
    def between(cls, first: Ensemble, second: Ensemble) -> "FidelityTable":
        return cls(fidelity_matrix(first.amplitudes, second.amplitudes), first.kind or "rows", second.kind or "cols")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.entries, columns=[str(j) for j in range(self.shape[1])])

    def to_csv(self, path: str | Path) -> Path:
        return write_csv(self.to_frame(), path)

    @classmethod
    def from_csv(cls, path: str | Path, row_id: str = "rows", col_id: str = "cols") -> "FidelityTable":
        return cls(read_csv(path).to_numpy(dtype=np.float64), row_id, col_id)

class BaseEnsembleGenerator(ABC):
    """
    Base class of the ensemble generator plugins.

    Subclasses set generator_name, accept their parameters as keyword arguments
    and produce an Ensemble (or a pair of them) from a seeded generator.
    """

    generator_name: str
    is_random = True

    def __init__(self, **params):
        self.params = params

    @abstractmethod
    def generate(self, rng: np.random.Generator | None = None) -> Ensemble | Tuple[Ensemble, Ensemble]:
        pass

    @classmethod
    def sized(cls, n: int, /, **params) -> "BaseEnsembleGenerator":
        """Build from params for ensembles of n states; n overrides any size in params."""
        return cls(**{**params, "n": n})

    def with_size(self, n: int) -> "BaseEnsembleGenerator":
        """Copy of this generator producing n states, as sweeps need one per N."""
        return type(self).sized(n, **self.params)

    def _require_rng(self, rng: np.random.Generator | None) -> np.random.Generator:
        if rng is None:
            raise ValueError(f"Generator '{self.generator_name}' needs a seeded random generator")
        return rng

    def __repr__(self):
        return f"{type(self).__name__}({self.params})"
