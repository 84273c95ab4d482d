"""
Driven Kerr cavity model.
H = a^dag^2 a^2 / 2 + delta a^dag a + beta (a + a^dag), with the Kerr constant fixed to 1,
and the two-photon (Kerr parametric oscillator) variant with drive (p/2)(a^dag^2 + a^2).
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import List, Union

import numpy as np

from .fock_core import (Operator, _check_dim, kerr_term, linear_drive_operator, number,
                        two_photon_drive_operator)


class DriveKind(str, Enum):
    LINEAR = "linear"
    TWO_PHOTON = "two_photon"


def _finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class DrivePoint:
    """Detuning and linear drive strength, both in units of the Kerr constant"""

    delta: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "delta", _finite(self.delta, "delta"))
        object.__setattr__(self, "beta", _finite(self.beta, "beta"))
        if self.beta < 0:
            raise ValueError(f"drive strength must be non-negative, got beta={self.beta}")

    @property
    def drive(self) -> float:
        return self.beta

    @property
    def kind(self) -> DriveKind:
        return DriveKind.LINEAR


@dataclass(frozen=True)
class KpoPoint:
    """Detuning and two-photon drive strength p"""

    delta: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "delta", _finite(self.delta, "delta"))
        object.__setattr__(self, "p", _finite(self.p, "p"))
        if self.p < 0:
            raise ValueError(f"two-photon drive strength must be non-negative, got p={self.p}")

    @property
    def drive(self) -> float:
        return self.p

    @property
    def kind(self) -> DriveKind:
        return DriveKind.TWO_PHOTON


ControlPoint = Union[DrivePoint, KpoPoint]


@lru_cache(maxsize=64)
def model_terms(dim: int, kind: DriveKind = DriveKind.LINEAR):
    """(Kerr, number, drive) matrices for a truncation and drive type, read-only and cached"""
    dim = _check_dim(dim)
    drive = linear_drive_operator(dim) if DriveKind(kind) is DriveKind.LINEAR else two_photon_drive_operator(dim)
    terms = tuple(np.ascontiguousarray(op.matrix.real) for op in (kerr_term(dim), number(dim), drive))
    for term in terms:
        term.setflags(write=False)
    return terms


def hamiltonian_matrix(delta: float, drive: float, dim: int,
                       kind: DriveKind = DriveKind.LINEAR) -> np.ndarray:
    """Raw matrix for any real drive value; the sign of the drive is not checked here."""
    kerr, num, drive_op = model_terms(dim, DriveKind(kind))
    return kerr + delta * num + drive * drive_op


def kerr_hamiltonian(pt: DrivePoint, dim: int) -> Operator:
    return Operator(hamiltonian_matrix(pt.delta, pt.beta, dim, DriveKind.LINEAR), hermitian=True)


def kpo_hamiltonian(pt: KpoPoint, dim: int) -> Operator:
    return Operator(hamiltonian_matrix(pt.delta, pt.p, dim, DriveKind.TWO_PHOTON), hermitian=True)


def hamiltonian(pt: ControlPoint, dim: int) -> Operator:
    if isinstance(pt, KpoPoint):
        return kpo_hamiltonian(pt, dim)
    return kerr_hamiltonian(pt, dim)


# ---------------------------------------------------------------------------
# Crossing bookkeeping
# ---------------------------------------------------------------------------

def crossing_detuning(l: int) -> float:
    """Detuning where |n> and |m> with n + m = l are degenerate at zero drive"""
    if int(l) != l or l < 1:
        raise ValueError(f"crossing index must be a positive integer, got {l}")
    return -(l - 1) / 2.0


def odd_crossings(n_target: int, extra: int = 0) -> List[float]:
    """Ground-state crossings the path has to pass: delta_{2k-1}, k = 1 .. n_target + extra"""
    return [crossing_detuning(2 * k - 1) for k in range(1, n_target + extra + 1)]


def final_detuning(n_target: int) -> float:
    """Midpoint of the crossing-free interval where |n_target> is the undriven ground state"""
    if n_target < 1:
        raise ValueError(f"target photon number must be >= 1, got {n_target}")
    return 0.5 * (crossing_detuning(2 * n_target + 1) + crossing_detuning(2 * n_target - 1))


def undriven_energies(delta: float, dim: int) -> np.ndarray:
    n = np.arange(_check_dim(dim), dtype=float)
    return 0.5 * n * (n - 1.0) + delta * n


def ground_fock_index(delta: float) -> int:
    """Fock number of the undriven ground state; the lower index wins at a crossing."""
    return max(0, int(math.ceil(-delta)))


def undriven_eigen_index(k: int, delta: float, dim: int) -> int:
    """Fock number of the k-th undriven eigenstate (ascending energy, stable at ties)"""
    order = np.argsort(undriven_energies(delta, dim), kind="stable")
    return int(order[k])
