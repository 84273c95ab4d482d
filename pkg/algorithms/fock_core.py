"""
Fock Core
Dense linear algebra on a truncated Fock basis |0>, ..., |dim-1>.

Operators, pure states and density matrices are immutable value objects:
their arrays are copied on construction and flagged read-only, so they can be
shared freely between threads and worker processes.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Tuple, Union

import numpy as np
from scipy.linalg import eigvalsh, expm
from scipy.special import eval_genlaguerre, gammaln

from .exceptions import DimensionMismatchError, InvalidDimensionError, NonHermitianError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10
TAIL_FRACTION = 0.1


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"truncation dimension must be an integer >= 2, got {dim}")
    return int(dim)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix on the truncated basis"""

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {matrix.shape}")
        _check_dim(matrix.shape[0])
        if self.hermitian:
            deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
            if deviation > HERMITIAN_TOL:
                raise NonHermitianError(f"operator flagged Hermitian deviates by {deviation:.3e}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.hermitian)

    def __add__(self, other: "Operator") -> "Operator":
        _match(self.dim, other.dim)
        return Operator(self.matrix + other.matrix, self.hermitian and other.hermitian)

    def __sub__(self, other: "Operator") -> "Operator":
        _match(self.dim, other.dim)
        return Operator(self.matrix - other.matrix, self.hermitian and other.hermitian)

    def __mul__(self, scalar: complex) -> "Operator":
        real = np.isrealobj(scalar) or np.imag(scalar) == 0
        return Operator(self.matrix * scalar, self.hermitian and real)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            _match(self.dim, other.dim)
            return StateVector(self.matrix @ other.amplitudes)
        _match(self.dim, other.dim)
        return Operator(self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state as an amplitude vector"""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen(self.amplitudes)
        if amplitudes.ndim != 1:
            raise ValueError(f"state amplitudes must be one-dimensional, got shape {amplitudes.shape}")
        _check_dim(amplitudes.shape[0])
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tail_population(self, fraction: float = TAIL_FRACTION) -> float:
        """Weight on the top `fraction` of basis indices"""
        return _tail(self.populations(), fraction)

    def truncation_ok(self, tol: float = 1e-6) -> bool:
        return self.tail_population() < tol

    def overlap(self, other: "StateVector") -> complex:
        _match(self.dim, other.dim)
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state. Physicality is checked on request, not on construction,
    so intermediate integrator states can be represented."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = _frozen(self.matrix)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {matrix.shape}")
        _check_dim(matrix.shape[0])
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_state(cls, state: StateVector) -> "DensityMatrix":
        return state.to_density_matrix()

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        dim = _check_dim(dim)
        return cls(np.eye(dim) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def tail_population(self, fraction: float = TAIL_FRACTION) -> float:
        return _tail(self.populations(), fraction)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        hermitian_part = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(eigvalsh(hermitian_part)[0])

    def check_physical(self, herm_tol: float = 1e-10, trace_tol: float = 1e-8,
                       eig_tol: float = 1e-8) -> bool:
        return (self.hermiticity_error() <= herm_tol
                and abs(self.trace - 1.0) <= trace_tol
                and self.min_eigenvalue() >= -eig_tol)


State = Union[StateVector, DensityMatrix]


def _match(dim_a: int, dim_b: int):
    if dim_a != dim_b:
        raise DimensionMismatchError(f"dimension mismatch: {dim_a} vs {dim_b}")


def _tail(populations: np.ndarray, fraction: float) -> float:
    count = max(1, int(math.ceil(fraction * populations.shape[0])))
    return float(np.sum(populations[-count:]))


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _ladder(dim: int) -> np.ndarray:
    matrix = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    matrix.setflags(write=False)
    return matrix


def annihilation(dim: int) -> Operator:
    """a with a|n> = sqrt(n)|n-1>"""
    return Operator(_ladder(_check_dim(dim)))


def creation(dim: int) -> Operator:
    return Operator(_ladder(_check_dim(dim)).T)


def number(dim: int) -> Operator:
    dim = _check_dim(dim)
    return Operator(np.diag(np.arange(dim, dtype=float)), hermitian=True)


def parity(dim: int) -> Operator:
    dim = _check_dim(dim)
    return Operator(np.diag((-1.0) ** np.arange(dim)), hermitian=True)


def identity(dim: int) -> Operator:
    return Operator(np.eye(_check_dim(dim)), hermitian=True)


def kerr_term(dim: int) -> Operator:
    """a^dag^2 a^2 / 2, diagonal with n(n-1)/2"""
    n = np.arange(_check_dim(dim), dtype=float)
    return Operator(np.diag(0.5 * n * (n - 1.0)), hermitian=True)


def linear_drive_operator(dim: int) -> Operator:
    a = _ladder(_check_dim(dim))
    return Operator(a + a.T, hermitian=True)


def two_photon_drive_operator(dim: int) -> Operator:
    """(a^dag^2 + a^2) / 2"""
    a = _ladder(_check_dim(dim))
    a2 = a @ a
    return Operator(0.5 * (a2 + a2.T), hermitian=True)


def displacement(alpha: complex, dim: int) -> Operator:
    """D(alpha) = exp(alpha a^dag - alpha* a) by scaling-and-squaring."""
    dim = _check_dim(dim)
    alpha = complex(alpha)
    if alpha == 0:
        return identity(dim)
    if abs(alpha) ** 2 > dim / 4:
        logger.warning("displacement |alpha|^2=%.3f exceeds dim/4=%.2f; truncation error likely",
                       abs(alpha) ** 2, dim / 4)
    a = _ladder(dim)
    generator = alpha * a.T - np.conj(alpha) * a
    return Operator(expm(generator))


def _displacement_pairs(gamma: np.ndarray, dim: int) -> Iterator[Tuple[int, int, np.ndarray, np.ndarray]]:
    """Yield (m, n, <m|D|n>, <n|D|m>) for m >= n, vectorized over gamma.

    Closed form in generalized Laguerre polynomials, exact for every gamma
    regardless of truncation.
    """
    x = np.abs(gamma) ** 2
    envelope = np.exp(-0.5 * x)
    powers = [np.ones_like(gamma)]
    conj_powers = [np.ones_like(gamma)]
    for _ in range(1, dim):
        powers.append(powers[-1] * gamma)
        conj_powers.append(conj_powers[-1] * (-np.conj(gamma)))
    for m in range(dim):
        for n in range(m + 1):
            k = m - n
            scale = math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)))
            radial = scale * envelope * eval_genlaguerre(n, k, x)
            yield m, n, powers[k] * radial, conj_powers[k] * radial


def displacement_elements(gamma, dim: int) -> np.ndarray:
    """Matrix elements <m|D(gamma)|n> for scalar or array gamma.

    Returns shape (dim, dim) for scalar input and gamma.shape + (dim, dim)
    otherwise.
    """
    dim = _check_dim(dim)
    scalar = np.ndim(gamma) == 0
    g = np.atleast_1d(np.asarray(gamma, dtype=complex))
    out = np.zeros(g.shape + (dim, dim), dtype=complex)
    for m, n, lower, upper in _displacement_pairs(g, dim):
        out[..., m, n] = lower
        out[..., n, m] = upper
    return out[0] if scalar else out


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

def fock_state(n: int, dim: int) -> StateVector:
    dim = _check_dim(dim)
    if n < 0 or n >= dim:
        raise IndexError(f"Fock index {n} outside truncated basis of size {dim}")
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[n] = 1.0
    return StateVector(amplitudes)


def displaced_fock(alpha: complex, n: int, dim: int) -> StateVector:
    """D(alpha)|n>"""
    base = fock_state(n, dim)
    if complex(alpha) == 0:
        return base
    return displacement(alpha, dim) @ base


def coherent_state(alpha: complex, dim: int) -> StateVector:
    return displaced_fock(alpha, 0, dim)


def expectation(op: Operator, state: State) -> complex:
    """<psi|A|psi> for pure states, Tr(A rho) for density matrices"""
    _match(op.dim, state.dim)
    if isinstance(state, StateVector):
        psi = state.amplitudes
        return complex(np.vdot(psi, op.matrix @ psi))
    return complex(np.trace(op.matrix @ state.matrix))


def default_dimension(n_target: int, alpha_max: float = 0.0) -> int:
    """Truncation rule: max(4n + 20, ceil(4|alpha_max|^2) + 20)"""
    return max(4 * int(n_target) + 20, int(math.ceil(4 * abs(alpha_max) ** 2)) + 20)
