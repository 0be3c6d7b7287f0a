import numpy as np

import logging

from ..config import NumericTolerances
from .base import BaseEnsembleGenerator, Ensemble, draw_distinct

logger = logging.getLogger(__name__)

DEFAULT_SCALE = 0.08

def cluster_vector(s: float, rng: np.random.Generator) -> np.ndarray:
    """|0> + s*c|1>, normalized, with Re(c) and Im(c) standard normal."""
    c = rng.standard_normal() + 1j * rng.standard_normal()
    vector = np.array([1.0, s * c], dtype=np.complex128)
    return vector / np.linalg.norm(vector)

def cluster_ensemble(
    n: int,
    s: float = DEFAULT_SCALE,
    rng: np.random.Generator | None = None,
    tol: NumericTolerances | None = None,
) -> Ensemble:
    """
    N qubit states clustered around |0>.

    A scale of 0 puts every state on |0>, which is rejected for N >= 2.
    """
    if rng is None:
        raise ValueError("cluster_ensemble needs a seeded random generator")
    amplitudes = draw_distinct(lambda g: cluster_vector(s, g), n, rng, tol)
    return Ensemble(amplitudes, kind=f"cluster(s={s})", tol=tol)

class ClusterGenerator(BaseEnsembleGenerator):
    generator_name = "cluster"

    def __init__(self, n: int, s: float = DEFAULT_SCALE):
        super().__init__(n=int(n), s=float(s))

    def generate(self, rng=None) -> Ensemble:
        return cluster_ensemble(self.params["n"], self.params["s"], self._require_rng(rng))
