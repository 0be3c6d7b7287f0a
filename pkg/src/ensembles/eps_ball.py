import numpy as np

import logging
from typing import Tuple

from ..quantum import eps_ball_states
from .base import BaseEnsembleGenerator, Ensemble

logger = logging.getLogger(__name__)

def eps_ball_ensemble(
    centers: Ensemble,
    members_per_center: int,
    eps_b: float,
    rng: np.random.Generator,
) -> Tuple[Ensemble, np.ndarray]:
    """
    Replace every center by members_per_center states at infidelity eps_b from it.

    Each member carries an equal share of its center's weight. Returns the
    member ensemble and the center index of every member.
    """
    if members_per_center < 1:
        raise ValueError(f"members_per_center must be >= 1. Got {members_per_center}")
    if eps_b == 0.0 and members_per_center > 1:
        raise ValueError("eps_b = 0 puts every member on its center; use members_per_center = 1")

    owners = np.repeat(np.arange(centers.n), members_per_center)
    members = eps_ball_states(centers.amplitudes[owners], eps_b, rng)
    weights = centers.weights[owners] / members_per_center
    weights = weights / weights.sum()
    ensemble = Ensemble(members, weights, kind=f"eps-ball({centers.kind}, eps_b={eps_b})")
    return ensemble, owners

class EpsBallGenerator(BaseEnsembleGenerator):
    """Epsilon-ball blur of an ensemble built by another registered generator."""

    generator_name = "eps-ball"

    def __init__(self, base: str, eps_b: float, members_per_center: int = 1, n: int | None = None, **base_params):
        super().__init__(base=base, eps_b=float(eps_b), members_per_center=int(members_per_center), n=n, **base_params)

    def generate(self, rng=None) -> Ensemble:
        from ..plugin_manager import PluginManager

        rng = self._require_rng(rng)
        base_params = {
            key: value for key, value in self.params.items()
            if key not in ("base", "eps_b", "members_per_center") and value is not None
        }
        centers = PluginManager().get_generator(self.params["base"], **base_params).generate(rng)
        if isinstance(centers, tuple):
            raise ValueError(f"Base generator '{self.params['base']}' returns a pair; pick a single-ensemble generator")
        ensemble, _ = eps_ball_ensemble(centers, self.params["members_per_center"], self.params["eps_b"], rng)
        return ensemble
