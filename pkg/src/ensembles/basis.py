import numpy as np

import logging
from typing import Sequence

from .base import BaseEnsembleGenerator, Ensemble

logger = logging.getLogger(__name__)

def basis_ensemble(weights: Sequence[float], d: int | None = None) -> Ensemble:
    """
    Computational basis states |i> weighted by weights[i].

    Zero-weight entries are dropped; the remaining weights must already sum to 1.
    """
    weights = np.asarray(weights, dtype=np.float64)
    d = len(weights) if d is None else int(d)
    if weights.ndim != 1 or len(weights) != d:
        raise ValueError(f"Expected {d} basis weights. Got shape {weights.shape}")
    if np.any(weights < 0):
        raise ValueError(f"Basis weights must be non-negative. Got {weights.tolist()}")

    support = np.flatnonzero(weights > 0)
    if len(support) < len(weights):
        logger.debug(f"Dropping {len(weights) - len(support)} zero-weight basis states")
    amplitudes = np.zeros((len(support), d), dtype=np.complex128)
    amplitudes[np.arange(len(support)), support] = 1.0
    return Ensemble(amplitudes, weights[support], kind=f"basis(d={d})")

def basis_labels(ensemble: Ensemble) -> np.ndarray:
    """Basis index of every member; fails for states outside the computational basis."""
    magnitudes = np.abs(ensemble.amplitudes)
    labels = magnitudes.argmax(axis=1)
    if not np.allclose(magnitudes[np.arange(ensemble.n), labels], 1.0):
        raise ValueError(f"Ensemble {ensemble.kind!r} is not made of computational basis states")
    return labels

class BasisGenerator(BaseEnsembleGenerator):
    generator_name = "basis"
    is_random = False

    def __init__(self, weights: Sequence[float], d: int | None = None):
        super().__init__(weights=[float(w) for w in weights], d=d)

    @classmethod
    def sized(cls, n: int, weights: Sequence[float] | None = None, d: int | None = None):
        """Uniform over the first n basis states of dimension d (default: len(weights), else n)."""
        d = d or (len(weights) if weights else n)
        if n > d:
            raise ValueError(f"A basis ensemble in dimension {d} has at most {d} members. Got N={n}")
        return cls(weights=[1.0 / n] * n + [0.0] * (d - n), d=d)

    def generate(self, rng=None) -> Ensemble:
        return basis_ensemble(self.params["weights"], self.params["d"])
