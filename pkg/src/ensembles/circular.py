import numpy as np

import logging

from ..config import NumericTolerances
from .base import BaseEnsembleGenerator, Ensemble, draw_distinct

logger = logging.getLogger(__name__)

def rotated_zero(theta: float) -> np.ndarray:
    """exp(-i theta Y)|0> = cos(theta)|0> + sin(theta)|1>."""
    return np.array([np.cos(theta), np.sin(theta)], dtype=np.complex128)

def circular_ensemble(
    n: int,
    rng: np.random.Generator | None = None,
    tol: NumericTolerances | None = None,
) -> Ensemble:
    """N real qubit states on the unit circle of the X-Z plane, theta uniform on [0, 2pi)."""
    if rng is None:
        raise ValueError("circular_ensemble needs a seeded random generator")
    amplitudes = draw_distinct(lambda g: rotated_zero(g.uniform(0.0, 2.0 * np.pi)), n, rng, tol)
    return Ensemble(amplitudes, kind="circular", tol=tol)

class CircularGenerator(BaseEnsembleGenerator):
    generator_name = "circular"

    def __init__(self, n: int):
        super().__init__(n=int(n))

    def generate(self, rng=None) -> Ensemble:
        return circular_ensemble(self.params["n"], self._require_rng(rng))
