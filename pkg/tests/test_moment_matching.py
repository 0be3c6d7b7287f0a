import numpy as np
import pytest
from scipy.stats import kstest

from src.ensembles import FidelityTable
from src.moment_matching import MomentMatchedPair, lower_bound_instance, moment_matched_pair
from src.quantum import fidelity_matrix


def test_lower_moments_agree_and_order_k_differs():
    pair = moment_matched_pair(k=2, eta=0.5, alpha=0.5, n=50)
    assert pair.a == pytest.approx(0.01)
    gaps = pair.moment_gaps()
    assert np.all(np.abs(gaps[:2]) <= 1e-12)
    assert abs(gaps[2]) > 0.0


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_quadrature_matches_closed_form(k):
    pair = MomentMatchedPair(k=k, eta=0.8, alpha=0.5, n=4)
    pair.check_matching()
    assert pair.delta_k_quadrature == pytest.approx(pair.delta_k_exact, rel=1e-8)


def test_asymptotic_form_has_the_same_sign():
    pair = MomentMatchedPair(k=3, eta=-0.4, alpha=0.5, n=10)
    assert np.sign(pair.delta_k_asymptotic) == np.sign(pair.delta_k_exact) == -1


def test_zero_eta_gives_identical_distributions(rng):
    pair = MomentMatchedPair(k=3, eta=0.0, alpha=0.5, n=5)
    assert np.allclose(pair.moment_gaps(), 0.0, atol=1e-15)
    x = np.linspace(0, pair.a, 11)
    assert np.allclose(pair.cdf1(x), pair.cdf0(x))


def test_densities_are_non_negative():
    pair = MomentMatchedPair(k=4, eta=1.0, alpha=0.5, n=3)
    x = np.linspace(0, pair.a, 1001)
    assert pair.density1(x).min() >= 0.0
    assert pair.density1(pair.a * 1.5) == 0.0


def test_cdf_ends_at_one():
    pair = MomentMatchedPair(k=2, eta=0.7, alpha=0.5, n=3)
    assert pair.cdf1(0.0) == pytest.approx(0.0)
    assert pair.cdf1(pair.a) == pytest.approx(1.0)


def test_samples_follow_the_target_distributions(rng):
    pair = MomentMatchedPair(k=3, eta=0.9, alpha=0.5, n=4)
    assert kstest(pair.sample1(5000, rng), pair.cdf1).pvalue > 0.01
    assert kstest(pair.sample0(5000, rng), pair.cdf0).pvalue > 0.01


@pytest.mark.parametrize(
    "params, message",
    [
        ({"k": 0, "eta": 0.1, "alpha": 0.5, "n": 2}, "k must be >= 1"),
        ({"k": 1, "eta": 1.5, "alpha": 0.5, "n": 2}, "non-negative density"),
        ({"k": 1, "eta": 0.1, "alpha": 1.0, "n": 2}, r"alpha must lie in \(0, 1\)"),
        ({"k": 1, "eta": 0.1, "alpha": 0.5, "n": 0}, "N must be >= 1"),
    ],
)
def test_invalid_parameters(params, message):
    with pytest.raises(ValueError, match=message):
        MomentMatchedPair(**params)


def test_lower_bound_instance_realizes_sampled_tables(rng):
    (psi0, phi0), (psi1, phi1) = lower_bound_instance(k=2, eta=0.5, alpha=0.5, n=5, rng=rng)
    for psi, phi in ((psi0, phi0), (psi1, phi1)):
        assert psi.n == phi.n == 5
        assert psi.dim == 10
        table = FidelityTable.between(psi, phi).entries
        assert table.max() < 0.5 / 5 + 1e-12
    assert np.allclose(fidelity_matrix(psi0.amplitudes, phi0.amplitudes), FidelityTable.between(psi0, phi0).entries)
