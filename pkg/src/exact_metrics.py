"""Noise-free distances between ensembles: MMD-k by two routes and the Wasserstein distance."""
import numpy as np

import logging
from typing import Literal

from .config import NumericTolerances, SolverSettings, get_tolerances
from .ensembles.base import Ensemble
from .quantum import fidelity_matrix, moment_operator
from .transport import Coupling, DualPair, solve_ot
from .validation import DistanceReport

logger = logging.getLogger(__name__)

def _check_dims(first: Ensemble, second: Ensemble):
    if first.dim != second.dim:
        raise ValueError(f"Ensemble dimensions differ: {first.dim} vs {second.dim}")

def _check_order(k: int):
    if k < 1:
        raise ValueError(f"MMD order k must be a positive integer. Got {k}")

def cross_fidelities(first: Ensemble, second: Ensemble) -> np.ndarray:
    _check_dims(first, second)
    return fidelity_matrix(first.amplitudes, second.amplitudes)

def cost_matrix(first: Ensemble, second: Ensemble) -> np.ndarray:
    """C_ij = 1 - |<psi_i|phi_j>|^2."""
    return 1.0 - cross_fidelities(first, second)

def f_bar(first: Ensemble, second: Ensemble, k: int) -> float:
    """sum_ij p_i q_j X_ij**k."""
    _check_order(k)
    x = cross_fidelities(first, second)
    value = float(first.weights @ (x ** k) @ second.weights)
    return min(max(value, 0.0), 1.0)

def mmd_k_pairwise(first: Ensemble, second: Ensemble, k: int) -> DistanceReport:
    f11 = f_bar(first, first, k)
    f22 = f_bar(second, second, k)
    f12 = f_bar(first, second, k)
    return DistanceReport.from_raw(
        f11 + f22 - 2.0 * f12,
        metric="mmd",
        k=k,
        route="pairwise",
        components={"F11": f11, "F22": f22, "F12": f12},
    )

def mmd_k_moment(
    first: Ensemble,
    second: Ensemble,
    k: int,
    tol: NumericTolerances | None = None,
    cross_check: bool = False,
) -> DistanceReport:
    """
    Squared Hilbert-Schmidt norm of the difference of the k-th moment operators.

    Raises MomentCapError when d**k exceeds the cap. With cross_check the
    pairwise value is computed too and the gap is reported as discrepancy.
    """
    _check_order(k)
    _check_dims(first, second)
    diff = moment_operator(first, k, tol).matrix - moment_operator(second, k, tol).matrix
    raw = float(np.sum(np.abs(diff) ** 2))

    discrepancy = None
    if cross_check:
        discrepancy = abs(raw - mmd_k_pairwise(first, second, k).raw_value)
        logger.debug(f"MMD-{k} moment vs pairwise discrepancy {discrepancy:.3g}")
    return DistanceReport.from_raw(raw, metric="mmd", k=k, route="moment-operator", discrepancy=discrepancy)

def mmd_1(first: Ensemble, second: Ensemble, tol: NumericTolerances | None = None) -> DistanceReport:
    """MMD-1, Tr[(rho1 - rho2)^2] of the average density matrices."""
    return mmd_k_moment(first, second, 1, tol)

def mmd_k(
    first: Ensemble,
    second: Ensemble,
    k: int,
    route: Literal["pairwise", "moment-operator"] = "pairwise",
    tol: NumericTolerances | None = None,
) -> DistanceReport:
    if route == "pairwise":
        return mmd_k_pairwise(first, second, k)
    if route == "moment-operator":
        return mmd_k_moment(first, second, k, tol, cross_check=True)
    raise ValueError(f"Unknown MMD route {route!r}. Choose 'pairwise' or 'moment-operator'")

def wasserstein_transport(
    first: Ensemble,
    second: Ensemble,
    tol: NumericTolerances | None = None,
    settings: SolverSettings | None = None,
) -> tuple[Coupling, DualPair]:
    return solve_ot(cost_matrix(first, second), first.weights, second.weights, tol, settings)

def wasserstein_exact(
    first: Ensemble,
    second: Ensemble,
    tol: NumericTolerances | None = None,
    settings: SolverSettings | None = None,
) -> DistanceReport:
    coupling, _ = wasserstein_transport(first, second, tol, settings)
    return DistanceReport.from_raw(coupling.objective, metric="wasserstein", route="transport")

def eps_ball_bias_bound(k: int, eps_b: float) -> float:
    """Upper bound 32 k sqrt(eps_b) on how far epsilon-ball blurring moves MMD-k."""
    _check_order(k)
    if not 0.0 <= eps_b < 1.0:
        raise ValueError(f"eps_b must lie in [0, 1). Got {eps_b}")
    return 32.0 * k * float(np.sqrt(eps_b))

def distance(
    first: Ensemble,
    second: Ensemble,
    metric: Literal["mmd", "wasserstein"],
    k: int | None = None,
    route: str | None = None,
    tol: NumericTolerances | None = None,
) -> DistanceReport:
    """Dispatch used by the CLI dist command."""
    tol = get_tolerances(tol)
    if metric == "mmd":
        if k is None:
            raise ValueError("MMD needs an order k")
        return mmd_k(first, second, k, route=route or "pairwise", tol=tol)
    if metric == "wasserstein":
        if route not in (None, "transport"):
            raise ValueError(f"Wasserstein is only computed by the transport route. Got {route!r}")
        return wasserstein_exact(first, second, tol)
    raise ValueError(f"Unknown metric {metric!r}. Choose 'mmd' or 'wasserstein'")
