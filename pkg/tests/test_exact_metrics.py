import numpy as np
import pytest

from src.ensembles import Ensemble, basis_ensemble, eps_ball_ensemble, hard_instance, hard_pair, haar_ensemble
from src.exact_metrics import (
    cost_matrix,
    distance,
    eps_ball_bias_bound,
    f_bar,
    mmd_1,
    mmd_k,
    mmd_k_moment,
    mmd_k_pairwise,
    wasserstein_exact,
    wasserstein_transport,
)
from src.quantum import MomentCapError, PureState


def singleton(index, dim=2):
    return Ensemble([PureState.basis(index, dim)])


def random_pair(rng):
    d = int(rng.integers(2, 5))
    n1, n2 = rng.integers(1, 7, size=2)
    first = Ensemble(haar_ensemble(n1, d, rng).amplitudes, rng.dirichlet(np.ones(n1)))
    second = Ensemble(haar_ensemble(n2, d, rng).amplitudes, rng.dirichlet(np.ones(n2)))
    return first, second


def test_f_bar_singletons():
    for k in (1, 2, 5):
        assert f_bar(singleton(0), singleton(0), k) == pytest.approx(1.0)
        assert f_bar(singleton(0), singleton(1), k) == 0.0


def test_f_bar_hard_pair():
    first, second = hard_instance(2)
    assert f_bar(first, second, 2) == pytest.approx(0.25)


def test_f_bar_dimension_mismatch():
    with pytest.raises(ValueError, match="dimensions differ"):
        f_bar(singleton(0, 2), singleton(0, 3), 1)


def test_f_bar_rejects_order_zero():
    with pytest.raises(ValueError, match="positive integer"):
        f_bar(singleton(0), singleton(0), 0)


def test_mmd_of_identical_ensembles_is_zero(cluster_circular):
    first, _ = cluster_circular
    for k in (1, 2, 3):
        assert mmd_k_pairwise(first, first, k).value == pytest.approx(0.0, abs=1e-12)
        assert mmd_k_moment(first, first, k).value == pytest.approx(0.0, abs=1e-12)


def test_mmd_of_orthogonal_singletons_is_two():
    for k in (1, 2, 4):
        assert mmd_k_pairwise(singleton(0), singleton(1), k).value == pytest.approx(2.0)
    assert mmd_1(singleton(0), singleton(1)).value == pytest.approx(2.0)


def test_mmd_hard_pair_of_two_states():
    first, second = hard_instance(2)
    assert mmd_k_pairwise(first, second, 1).value == pytest.approx(0.0, abs=1e-12)
    report = mmd_k_pairwise(first, second, 2)
    assert report.value == pytest.approx(0.5)
    assert report.components == pytest.approx({"F11": 0.5, "F22": 0.5, "F12": 0.25})


def test_moment_route_matches_pairwise_route():
    rng = np.random.default_rng(21)
    for _ in range(100):
        first, second = random_pair(rng)
        k = int(rng.integers(1, 4))
        moment = mmd_k_moment(first, second, k)
        pairwise = mmd_k_pairwise(first, second, k)
        assert abs(moment.raw_value - pairwise.raw_value) <= 1e-9


def test_cross_check_reports_discrepancy(cluster_circular):
    report = mmd_k(*cluster_circular, 2, route="moment-operator")
    assert report.route == "moment-operator"
    assert report.discrepancy is not None
    assert report.discrepancy <= 1e-9


def test_unknown_route():
    with pytest.raises(ValueError, match="Unknown MMD route"):
        mmd_k(singleton(0), singleton(1), 1, route="fourier")


def test_moment_route_respects_cap():
    first = Ensemble(np.eye(8, dtype=np.complex128))
    with pytest.raises(MomentCapError):
        mmd_k_moment(first, first, 5)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_hard_pair_threshold(n):
    first, second = hard_instance(n)
    for k in range(1, n):
        assert mmd_k_pairwise(first, second, k).value <= 1e-12
    assert mmd_k_pairwise(first, second, n).value > 1e-6


def test_hierarchy_on_hard_pairs():
    # D_k = 0 implies D_k' = 0 for every k' <= k
    for n in (3, 4, 5):
        first, second = hard_instance(n)
        vanishing = [k for k in range(1, n + 1) if mmd_k_pairwise(first, second, k).value <= 1e-12]
        assert vanishing == list(range(1, n))


def test_metrics_are_label_invariant(rng):
    first = Ensemble(haar_ensemble(5, 3, rng).amplitudes, rng.dirichlet(np.ones(5)))
    second = haar_ensemble(4, 3, rng)
    shuffled = first.permuted(rng.permutation(5))
    for k in (1, 2, 3):
        assert mmd_k_pairwise(shuffled, second, k).value == pytest.approx(mmd_k_pairwise(first, second, k).value, abs=1e-12)
    assert wasserstein_exact(shuffled, second).value == pytest.approx(wasserstein_exact(first, second).value, abs=1e-12)


def test_cost_matrix_is_one_minus_fidelity():
    cost = cost_matrix(hard_pair(2), hard_pair(2))
    assert np.allclose(cost, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)


def test_wasserstein_of_identical_ensembles_is_zero(cluster_circular):
    first, _ = cluster_circular
    assert wasserstein_exact(first, first).value == pytest.approx(0.0, abs=1e-12)


def test_wasserstein_of_orthogonal_singletons_is_one():
    assert wasserstein_exact(singleton(0), singleton(1)).value == pytest.approx(1.0)


def test_wasserstein_sees_what_low_order_mmd_misses():
    first, second = hard_instance(4)
    assert mmd_k_pairwise(first, second, 3).value <= 1e-12
    assert wasserstein_exact(first, second).value > 1e-3


def test_wasserstein_transport_returns_certificate(cluster_circular):
    first, second = cluster_circular
    coupling, duals = wasserstein_transport(first, second)
    assert coupling.objective == pytest.approx(duals.objective(first.weights, second.weights), abs=1e-8)


def test_eps_ball_bias_bound_holds(rng, cluster_circular):
    first, second = cluster_circular
    eps_b = 1e-3
    blurred_first, _ = eps_ball_ensemble(first, 1, eps_b, rng)
    blurred_second, _ = eps_ball_ensemble(second, 1, eps_b, rng)
    for k in (1, 2, 3):
        exact = mmd_k_pairwise(first, second, k).value
        blurred = mmd_k_pairwise(blurred_first, blurred_second, k).value
        assert abs(blurred - exact) <= eps_ball_bias_bound(k, eps_b)


def test_eps_ball_bias_bound_values():
    assert eps_ball_bias_bound(2, 0.01) == pytest.approx(6.4)
    with pytest.raises(ValueError, match=r"eps_b must lie in \[0, 1\)"):
        eps_ball_bias_bound(1, 1.0)


def test_distance_dispatch():
    assert distance(singleton(0), singleton(1), "mmd", k=2).value == pytest.approx(2.0)
    assert distance(singleton(0), singleton(1), "wasserstein").route == "transport"
    with pytest.raises(ValueError, match="needs an order k"):
        distance(singleton(0), singleton(1), "mmd")
    with pytest.raises(ValueError, match="Unknown metric"):
        distance(singleton(0), singleton(1), "trace")
    with pytest.raises(ValueError, match="only computed by the transport route"):
        distance(singleton(0), singleton(1), "wasserstein", route="pairwise")


def test_basis_ensembles_reduce_to_classical_distance():
    first = basis_ensemble([0.5, 0.5, 0.0])
    second = basis_ensemble([0.0, 0.5, 0.5])
    # sum_i (p_i - q_i)^2
    assert mmd_k_pairwise(first, second, 3).value == pytest.approx(0.5)
    assert wasserstein_exact(first, second).value == pytest.approx(0.5)
