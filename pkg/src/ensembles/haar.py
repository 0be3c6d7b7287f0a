import numpy as np

import logging

from ..config import NumericTolerances
from ..quantum import haar_states
from .base import BaseEnsembleGenerator, Ensemble, draw_distinct

logger = logging.getLogger(__name__)

def haar_ensemble(
    n: int,
    d: int,
    rng: np.random.Generator | None = None,
    tol: NumericTolerances | None = None,
) -> Ensemble:
    if rng is None:
        raise ValueError("haar_ensemble needs a seeded random generator")
    amplitudes = draw_distinct(lambda g: haar_states(d, 1, g)[0], n, rng, tol)
    return Ensemble(amplitudes, kind=f"haar(d={d})", tol=tol)

class HaarGenerator(BaseEnsembleGenerator):
    generator_name = "haar"

    def __init__(self, n: int, d: int = 2):
        super().__init__(n=int(n), d=int(d))

    def generate(self, rng=None) -> Ensemble:
        return haar_ensemble(self.params["n"], self.params["d"], self._require_rng(rng))
