"""
Spectral Analysis
Sorted eigensystems with a fixed phase convention and the coupling elements
L_n = <phi_n|V|phi_0>, M_n = <phi_n|a^dag a|phi_0> that enter the adiabatic penalty.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import eigh

from .exceptions import DegeneratePointError, NonHermitianError
from .fock_core import Operator, StateVector
from .model import ControlPoint, DriveKind, KpoPoint, hamiltonian_matrix, model_terms

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class EigenSystem:
    energies: np.ndarray
    vectors: np.ndarray  # columns are eigenvectors
    point: Optional[ControlPoint] = None

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def states(self) -> List[StateVector]:
        return [StateVector(self.vectors[:, k]) for k in range(self.dim)]

    def state(self, k: int) -> StateVector:
        return StateVector(self.vectors[:, k])

    @property
    def ground_state(self) -> StateVector:
        return self.state(0)

    @property
    def ground_gap(self) -> float:
        return float(self.energies[1] - self.energies[0])

    def residuals(self, H: Operator) -> np.ndarray:
        """||H phi_k - E_k phi_k|| per eigenpair"""
        return np.linalg.norm(H.matrix @ self.vectors - self.vectors * self.energies, axis=0)


@dataclass(frozen=True, eq=False)
class CouplingRow:
    """Arrays indexed by eigenstate number; entry 0 is the diagonal term."""

    l_vals: np.ndarray
    m_vals: np.ndarray
    gaps: np.ndarray


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    pivots = np.argmax(np.abs(vectors), axis=0)
    pivot_values = vectors[pivots, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivot_values) / pivot_values)


def eigensystem(H: Operator, point: Optional[ControlPoint] = None) -> EigenSystem:
    """Full ascending spectrum; the largest-magnitude amplitude of each eigenvector is real positive."""
    if not H.hermitian:
        raise NonHermitianError("eigensystem requires a Hermitian-flagged operator")
    energies, vectors = eigh(H.matrix)
    vectors = _fix_phases(vectors)
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return EigenSystem(energies, vectors, point)


def _drive_kind(point: Optional[ControlPoint]) -> DriveKind:
    return DriveKind.TWO_PHOTON if isinstance(point, KpoPoint) else DriveKind.LINEAR


def row_from_eigenpairs(energies: np.ndarray, vectors: np.ndarray, kind: DriveKind, where=None) -> CouplingRow:
    """Couplings of the lowest eigenvector to all others; energies ascending, vectors as columns"""
    gap = float(energies[1] - energies[0])
    if gap < DEGENERACY_TOL:
        raise DegeneratePointError(f"ground state degenerate at {where} (gap {gap:.3e})", gap)
    _, num, drive = model_terms(vectors.shape[0], DriveKind(kind))
    phi0 = vectors[:, 0]
    adjoint = vectors.conj().T
    return CouplingRow(
        l_vals=adjoint @ (drive @ phi0),
        m_vals=adjoint @ (np.diag(num) * phi0),
        gaps=energies - energies[0],
    )


def coupling_row(es: EigenSystem, drive_kind: Optional[DriveKind] = None) -> CouplingRow:
    kind = DriveKind(drive_kind) if drive_kind is not None else _drive_kind(es.point)
    return row_from_eigenpairs(es.energies, es.vectors, kind, es.point)


def energy_levels(deltas: Sequence[float], drive: float, dim: int, n_levels: int = 8,
                  kind: DriveKind = DriveKind.LINEAR) -> pd.DataFrame:
    """Lowest energy levels over a detuning sweep at fixed drive."""
    n_levels = min(int(n_levels), dim)
    rows = []
    for delta in deltas:
        energies = eigh(hamiltonian_matrix(float(delta), drive, dim, kind), eigvals_only=True)
        row = {"delta": float(delta)}
        row.update({f"E{k}": float(energies[k]) for k in range(n_levels)})
        rows.append(row)
    return pd.DataFrame(rows)
