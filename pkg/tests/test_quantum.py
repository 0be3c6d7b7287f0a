import numpy as np
import pytest

from src.ensembles import Ensemble, hard_pair, haar_ensemble
from src.quantum import (
    MomentCapError,
    PureState,
    depolarize_sample,
    depolarize_samples,
    depolarizing_radius,
    eps_ball_state,
    eps_ball_states,
    fidelity,
    fidelity_matrix,
    haar_state,
    haar_states,
    moment_operator,
    self_overlap,
    swap_test_circuit_prob,
)


def test_pure_state_rejects_non_unit_norm():
    with pytest.raises(ValueError, match="not unit-norm"):
        PureState(np.array([1.0, 1.0]))


def test_pure_state_rejects_dimension_one():
    with pytest.raises(ValueError, match="dimension must be >= 2"):
        PureState(np.array([1.0]))


def test_pure_state_is_read_only():
    state = PureState.basis(0, 2)
    with pytest.raises(ValueError):
        state.amplitudes[0] = 0.0


def test_interleaved_round_trip_keeps_amplitudes():
    state = PureState.from_vector([1.0 + 2.0j, -0.5j, 0.25, 1.0])
    restored = PureState.from_interleaved(state.to_interleaved())
    assert np.array_equal(restored.amplitudes, state.amplitudes)


def test_fidelity_ignores_global_phase():
    state = haar_state(3, np.random.default_rng(0))
    rotated = PureState(np.exp(0.7j) * state.amplitudes)
    assert fidelity(state, rotated) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_orthogonal_states_is_zero():
    assert fidelity(PureState.basis(0, 4), PureState.basis(3, 4)) == 0.0


def test_fidelity_of_plus_and_zero():
    plus = PureState.from_vector([1.0, 1.0])
    assert fidelity(plus, PureState.basis(0, 2)) == pytest.approx(0.5)


def test_fidelity_dimension_mismatch():
    with pytest.raises(ValueError, match="dimensions differ"):
        fidelity(PureState.basis(0, 2), PureState.basis(0, 3))


def test_fidelity_matrix_matches_pairwise(rng):
    a = haar_states(3, 4, rng)
    b = haar_states(3, 5, rng)
    x = fidelity_matrix(a, b)
    assert x.shape == (4, 5)
    assert x[2, 3] == pytest.approx(fidelity(PureState(a[2]), PureState(b[3])))
    assert np.all((0.0 <= x) & (x <= 1.0))


def test_haar_states_are_unit_norm(rng):
    rows = haar_states(4, 200, rng)
    assert np.allclose(np.linalg.norm(rows, axis=1), 1.0)


def test_haar_states_mean_fidelity_is_one_over_d(rng):
    # E|<a|b>|^2 = 1/d for independent Haar states
    a = haar_states(4, 20000, rng)
    b = haar_states(4, 20000, rng)
    overlaps = np.abs(np.einsum("nd,nd->n", a.conj(), b)) ** 2
    sigma = overlaps.std() / np.sqrt(len(overlaps))
    assert abs(overlaps.mean() - 0.25) < 4 * sigma


def test_haar_states_reject_small_dimension(rng):
    with pytest.raises(ValueError, match="Dimension must be >= 2"):
        haar_states(1, 3, rng)


@pytest.mark.parametrize("eps_b", [1e-4, 1e-3, 0.3])
def test_eps_ball_states_sit_at_exact_infidelity(rng, eps_b):
    centers = haar_states(3, 50, rng)
    members = eps_ball_states(centers, eps_b, rng)
    overlaps = np.abs(np.einsum("nd,nd->n", centers.conj(), members)) ** 2
    assert np.allclose(overlaps, 1.0 - eps_b, atol=1e-12)


def test_eps_ball_state_zero_radius_is_center(rng):
    center = haar_state(2, rng)
    assert eps_ball_state(center, 0.0, rng) is center


def test_eps_ball_rejects_radius_one(rng):
    with pytest.raises(ValueError, match=r"eps_b must lie in \[0, 1\)"):
        eps_ball_states(haar_states(2, 1, rng), 1.0, rng)


def test_depolarizing_radius():
    assert depolarizing_radius(0.2, 2) == pytest.approx(0.1)
    assert depolarizing_radius(0.0, 8) == 0.0


def test_depolarize_raw_average_matches_channel(rng):
    state = PureState.from_vector([1.0, 1.0j])
    lam = 0.3
    rows = depolarize_samples(state, lam, 40000, rng, mode="raw-average")
    average = np.einsum("na,nb->ab", rows, rows.conj()) / len(rows)
    channel = (1 - lam) * state.density_matrix() + lam * np.eye(2) / 2
    assert np.allclose(average, channel, atol=0.02)
    infidelity = 1.0 - np.real(state.amplitudes.conj() @ average @ state.amplitudes)
    assert infidelity == pytest.approx(depolarizing_radius(lam, 2), abs=0.02)


def test_depolarize_renormalized_returns_unit_states(rng):
    rows = depolarize_samples(PureState.basis(0, 3), 0.5, 100, rng)
    assert np.allclose(np.linalg.norm(rows, axis=1), 1.0)


def test_depolarize_sample_zero_strength_is_identity(rng):
    state = PureState.basis(1, 2)
    assert depolarize_sample(state, 0.0, rng) is state


def test_depolarize_rejects_unknown_mode(rng):
    with pytest.raises(ValueError, match="Unknown depolarize mode"):
        depolarize_samples(PureState.basis(0, 2), 0.1, 2, rng, mode="average")


def test_moment_operator_is_a_density_operator(rng):
    ensemble = haar_ensemble(5, 2, rng)
    for k in (1, 2, 3):
        operator = moment_operator(ensemble, k).check()
        assert operator.matrix.shape == (2 ** k, 2 ** k)


def test_moment_operator_cap():
    ensemble = Ensemble(np.eye(4, dtype=np.complex128))
    with pytest.raises(MomentCapError, match="exceeds the cap 4096") as excinfo:
        moment_operator(ensemble, 7)
    assert excinfo.value.dim == 4
    assert excinfo.value.order == 7


def test_partial_trace_lowers_the_order(rng):
    ensemble = haar_ensemble(4, 2, rng)
    second = moment_operator(ensemble, 2)
    first = moment_operator(ensemble, 1)
    for factor in (0, 1):
        assert np.allclose(second.partial_trace(factor).matrix, first.matrix, atol=1e-12)


def test_partial_trace_needs_order_two(rng):
    with pytest.raises(ValueError, match="order >= 2"):
        moment_operator(haar_ensemble(2, 2, rng), 1).partial_trace()


def test_self_overlap_is_trace_of_square(rng):
    ensemble = haar_ensemble(6, 2, rng)
    for k in (1, 2, 3):
        matrix = moment_operator(ensemble, k).matrix
        assert self_overlap(ensemble, k) == pytest.approx(np.trace(matrix @ matrix).real, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_hard_pair_off_diagonal_moment(n):
    theta = 0.4
    matrix = moment_operator(hard_pair(n, theta), n).matrix
    # <1...1| M_N |0...0>
    assert abs(matrix[2 ** n - 1, 0] - 2.0 ** -n * np.exp(1j * n * theta)) < 1e-10


@pytest.mark.parametrize("dim", [2, 4])
def test_swap_test_circuit_probability(rng, dim):
    for _ in range(5):
        a, b = haar_state(dim, rng), haar_state(dim, rng)
        assert swap_test_circuit_prob(a, b) == pytest.approx((1 + fidelity(a, b)) / 2, abs=1e-12)


def test_swap_test_circuit_needs_qubits():
    with pytest.raises(ValueError, match="power-of-2"):
        swap_test_circuit_prob(PureState.basis(0, 3), PureState.basis(1, 3))
