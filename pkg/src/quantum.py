"""
Pure states, fidelities, moment operators and the samplers built on them.

States are compared through fidelity only, so two vectors differing by a global
phase are the same state.
"""
from __future__ import annotations

import numpy as np

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

from .config import NumericTolerances, get_tolerances

if TYPE_CHECKING:
    from .ensembles.base import Ensemble

logger = logging.getLogger(__name__)

DepolarizeMode = Literal["renormalized", "raw-average"]

class MomentCapError(ValueError):
    """Raised when d**k exceeds the configured moment-operator cap."""

    def __init__(self, dim: int, order: int, cap: int):
        self.dim = dim
        self.order = order
        self.cap = cap
        super().__init__(f"Moment operator of side {dim}**{order} = {dim ** order} exceeds the cap {cap}")

@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if amplitudes.ndim != 1:
            raise ValueError(f"State amplitudes must be a vector. Got shape {amplitudes.shape}")
        if amplitudes.shape[0] < 2:
            raise ValueError(f"State dimension must be >= 2. Got {amplitudes.shape[0]}")
        norm = np.linalg.norm(amplitudes)
        tol = get_tolerances().state_norm
        if abs(norm - 1.0) > tol:
            raise ValueError(f"State is not unit-norm: |psi| = {norm!r} (tolerance {tol})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_vector(cls, vector, normalize: bool = True) -> "PureState":
        vector = np.asarray(vector, dtype=np.complex128)
        if normalize:
            norm = np.linalg.norm(vector)
            if norm == 0:
                raise ValueError("Cannot normalize the zero vector")
            vector = vector / norm
        return cls(vector)

    @classmethod
    def basis(cls, index: int, dim: int) -> "PureState":
        if not 0 <= index < dim:
            raise ValueError(f"Basis index {index} out of range for dimension {dim}")
        vector = np.zeros(dim, dtype=np.complex128)
        vector[index] = 1.0
        return cls(vector)

    @classmethod
    def from_interleaved(cls, values: list[float]) -> "PureState":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.size % 2:
            raise ValueError(f"Interleaved amplitudes need an even number of reals. Got {values.size}")
        return cls(values[0::2] + 1j * values[1::2])

    def to_interleaved(self) -> list[float]:
        out = np.empty(2 * self.dim, dtype=np.float64)
        out[0::2] = self.amplitudes.real
        out[1::2] = self.amplitudes.imag
        return out.tolist()

    @property
    def dim(self) -> int:
        return int(self.amplitudes.shape[0])

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def __repr__(self):
        return f"PureState(dim={self.dim}, amplitudes={np.round(self.amplitudes, 6).tolist()})"

def _check_dims(a: PureState, b: PureState):
    if a.dim != b.dim:
        raise ValueError(f"State dimensions differ: {a.dim} vs {b.dim}")

def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2, clipped to [0, 1]."""
    _check_dims(a, b)
    value = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(min(max(value, 0.0), 1.0))

def fidelity_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross fidelities |<a_i|b_j>|^2 for amplitude rows of a (N1 x d) and b (N2 x d)."""
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"State dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    return np.clip(np.abs(a.conj() @ b.T) ** 2, 0.0, 1.0)

def _gaussian_vectors(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))

def haar_states(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Haar-random unit vectors as rows of an (n, d) array."""
    if d < 2:
        raise ValueError(f"Dimension must be >= 2. Got {d}")
    z = _gaussian_vectors(d, n, rng)
    return z / np.linalg.norm(z, axis=1, keepdims=True)

def haar_state(d: int, rng: np.random.Generator) -> PureState:
    return PureState.from_vector(haar_states(d, 1, rng)[0])

def _check_radius(value: float, name: str):
    if not 0.0 <= value < 1.0:
        raise ValueError(f"{name} must lie in [0, 1). Got {value}")

def eps_ball_states(centers: np.ndarray, eps_b: float, rng: np.random.Generator) -> np.ndarray:
    """
    One epsilon-ball member per row of centers.

    Each row is sqrt(1-eps_b)*c + sqrt(eps_b)*chi with chi Haar-random in the
    orthogonal complement of c, so the fidelity with c is exactly 1 - eps_b.
    """
    _check_radius(eps_b, "eps_b")
    centers = np.atleast_2d(np.asarray(centers, dtype=np.complex128))
    if eps_b == 0.0:
        return centers.copy()

    z = _gaussian_vectors(centers.shape[1], centers.shape[0], rng)
    overlap = np.einsum("nd,nd->n", centers.conj(), z)
    chi = z - overlap[:, None] * centers
    chi /= np.linalg.norm(chi, axis=1, keepdims=True)
    out = np.sqrt(1.0 - eps_b) * centers + np.sqrt(eps_b) * chi
    # renormalize away round-off only
    return out / np.linalg.norm(out, axis=1, keepdims=True)

def eps_ball_state(center: PureState, eps_b: float, rng: np.random.Generator) -> PureState:
    _check_radius(eps_b, "eps_b")
    if eps_b == 0.0:
        return center
    return PureState(eps_ball_states(center.amplitudes[None, :], eps_b, rng)[0])

def depolarizing_radius(lambda_b: float, d: int) -> float:
    """Mean infidelity (1 - 1/d) * lambda_b of a depolarized sample; the effective ball radius."""
    _check_radius(lambda_b, "lambda_b")
    return (1.0 - 1.0 / d) * lambda_b

def depolarize_rows(
    rows: np.ndarray,
    lambda_b: float,
    rng: np.random.Generator,
    mode: DepolarizeMode = "renormalized",
) -> np.ndarray:
    """
    sqrt(1-lambda_b)*phi + sqrt(lambda_b)*psi per row phi, psi Haar on the full space.

    In raw-average mode the superposition is returned as is; its average outer
    product is the depolarizing channel output (1-lambda_b)|phi><phi| + lambda_b*I/d.
    In renormalized mode every row is scaled to unit norm.
    """
    _check_radius(lambda_b, "lambda_b")
    if mode not in ("renormalized", "raw-average"):
        raise ValueError(f"Unknown depolarize mode {mode!r}. Choose 'renormalized' or 'raw-average'")

    rows = np.atleast_2d(np.asarray(rows, dtype=np.complex128))
    if lambda_b == 0.0:
        return rows.copy()

    psi = haar_states(rows.shape[1], rows.shape[0], rng)
    out = np.sqrt(1.0 - lambda_b) * rows + np.sqrt(lambda_b) * psi
    if mode == "renormalized":
        out = out / np.linalg.norm(out, axis=1, keepdims=True)
    return out

def depolarize_samples(
    state: PureState,
    lambda_b: float,
    n: int,
    rng: np.random.Generator,
    mode: DepolarizeMode = "renormalized",
) -> np.ndarray:
    """n independent depolarized draws of one state, as rows."""
    return depolarize_rows(np.broadcast_to(state.amplitudes, (n, state.dim)), lambda_b, rng, mode)

def depolarize_sample(
    state: PureState,
    lambda_b: float,
    rng: np.random.Generator,
    mode: DepolarizeMode = "renormalized",
) -> PureState | np.ndarray:
    """Single draw; raw-average mode returns the bare (non-unit) vector."""
    if lambda_b == 0.0:
        _check_radius(lambda_b, "lambda_b")
        return state
    vector = depolarize_samples(state, lambda_b, 1, rng, mode=mode)[0]
    if mode == "raw-average":
        return vector
    return PureState(vector)

## Moment operators

@dataclass(frozen=True, eq=False)
class MomentOperator:
    matrix: np.ndarray
    order: int
    dim: int

    def check(self, tol: NumericTolerances | None = None) -> "MomentOperator":
        """Raise ValueError unless Hermitian, PSD and unit-trace."""
        tol = get_tolerances(tol)
        m = self.matrix
        hermitian_gap = np.max(np.abs(m - m.conj().T))
        if hermitian_gap > tol.moment_hermitian:
            raise ValueError(f"Moment operator not Hermitian: max |M - M^H| = {hermitian_gap}")
        min_eig = float(np.linalg.eigvalsh(m).min())
        if min_eig < -tol.moment_psd:
            raise ValueError(f"Moment operator not PSD: min eigenvalue {min_eig}")
        trace = np.trace(m).real
        if abs(trace - 1.0) > tol.moment_trace:
            raise ValueError(f"Moment operator trace {trace} != 1")
        return self

    def partial_trace(self, factor: int = 0) -> "MomentOperator":
        """Trace out one tensor factor, giving the order-(k-1) operator."""
        if self.order < 2:
            raise ValueError(f"Partial trace needs order >= 2. Got {self.order}")
        if not 0 <= factor < self.order:
            raise ValueError(f"Tensor factor {factor} out of range for order {self.order}")

        k, d = self.order, self.dim
        tensor = self.matrix.reshape([d] * (2 * k))
        reduced = np.trace(tensor, axis1=factor, axis2=factor + k)
        side = d ** (k - 1)
        return MomentOperator(reduced.reshape(side, side), order=k - 1, dim=d)

def _tensor_power_rows(amplitudes: np.ndarray, k: int) -> np.ndarray:
    rows = amplitudes
    for _ in range(k - 1):
        rows = np.einsum("na,nb->nab", rows, amplitudes).reshape(amplitudes.shape[0], -1)
    return rows

def moment_operator(ensemble: "Ensemble", k: int, tol: NumericTolerances | None = None) -> MomentOperator:
    """sum_x p_x (|psi_x><psi_x|)^{(x)k}, guarded by the d**k cap."""
    if k < 1:
        raise ValueError(f"Moment order must be >= 1. Got {k}")
    tol = get_tolerances(tol)
    d = ensemble.dim
    if d ** k > tol.max_moment_dim:
        raise MomentCapError(d, k, tol.max_moment_dim)

    rows = _tensor_power_rows(ensemble.amplitudes, k)
    matrix = (rows * ensemble.weights[:, None]).T @ rows.conj()
    logger.debug(f"Built moment operator of order {k} and side {matrix.shape[0]} for {ensemble.n} states")
    return MomentOperator(matrix, order=k, dim=d)

def self_overlap(ensemble: "Ensemble", k: int) -> float:
    """k-th frame potential E|<psi|phi>|^{2k} over two independent draws; equals Tr(M_k^2)."""
    if k < 1:
        raise ValueError(f"Moment order must be >= 1. Got {k}")
    x = fidelity_matrix(ensemble.amplitudes, ensemble.amplitudes)
    return float(ensemble.weights @ (x ** k) @ ensemble.weights)

## SWAP-test circuit

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / np.sqrt(2.0)

def _n_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 2 ** n != dim:
        raise ValueError(f"SWAP-test circuit needs a power-of-2 dimension. Got {dim}")
    return n

def _apply_hadamard(psi: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(_HADAMARD, psi, axes=([1], [axis])), 0, axis)

def _apply_controlled_swap(psi: np.ndarray, control: int, q1: int, q2: int) -> np.ndarray:
    out = psi.copy()
    branch = [slice(None)] * psi.ndim
    branch[control] = 1
    branch = tuple(branch)
    # qubit axes shift by one once the control axis is indexed away
    a, b = (q1 - 1, q2 - 1) if control < q1 else (q1, q2)
    out[branch] = np.swapaxes(psi[branch], a, b)
    return out

def swap_test_circuit_prob(a: PureState, b: PureState) -> float:
    """
    Pr[ancilla = 0] from a statevector run of H, controlled-SWAP, H.

    The controlled-SWAP is applied as one Fredkin gate per qubit pair of the two
    registers. The result equals (1 + fidelity(a, b)) / 2.
    """
    _check_dims(a, b)
    n = _n_qubits(a.dim)

    register = np.kron(a.amplitudes, b.amplitudes)
    psi = np.zeros((2, a.dim * b.dim), dtype=np.complex128)
    psi[0] = register
    psi = psi.reshape([2] * (1 + 2 * n))

    psi = _apply_hadamard(psi, 0)
    for q in range(n):
        psi = _apply_controlled_swap(psi, 0, 1 + q, 1 + n + q)
    psi = _apply_hadamard(psi, 0)

    return float(np.sum(np.abs(psi[0]) ** 2))
