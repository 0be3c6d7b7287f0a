import numpy as np

import logging
from typing import Tuple

from .base import BaseEnsembleGenerator, Ensemble

logger = logging.getLogger(__name__)

def phase_states(n: int, theta: float) -> np.ndarray:
    """Rows (|0> + exp(i(theta + 2 pi l / n))|1>) / sqrt(2) for l = 0..n-1."""
    phases = theta + 2.0 * np.pi * np.arange(n) / n
    rows = np.empty((n, 2), dtype=np.complex128)
    rows[:, 0] = 1.0
    rows[:, 1] = np.exp(1j * phases)
    return rows / np.sqrt(2.0)

def hard_pair(n: int, theta: float = 0.0) -> Ensemble:
    """
    N equal-weight qubit phase states offset by theta.

    hard_pair(N, 0) and hard_pair(N, pi/N) share every moment operator below
    order N and differ at order N.
    """
    if n < 2:
        raise ValueError(f"A hard pair needs N >= 2. Got {n}")
    return Ensemble(phase_states(n, theta), kind=f"hardpair(N={n}, theta={theta!r})")

def hard_instance(n: int) -> Tuple[Ensemble, Ensemble]:
    return hard_pair(n, 0.0), hard_pair(n, np.pi / n)

class HardPairGenerator(BaseEnsembleGenerator):
    """Generates the phase ensemble at theta, or the full hard instance when theta is omitted."""

    generator_name = "hardpair"
    is_random = False

    def __init__(self, n: int, theta: float | None = None):
        super().__init__(n=int(n), theta=None if theta is None else float(theta))

    def generate(self, rng=None) -> Ensemble | Tuple[Ensemble, Ensemble]:
        if self.params["theta"] is None:
            return hard_instance(self.params["n"])
        return hard_pair(self.params["n"], self.params["theta"])
