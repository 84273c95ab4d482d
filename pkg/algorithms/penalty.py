"""
Adiabatic Penalty
Penalty density Q(s) = sum_{n>=1} |dbeta/ds L_n + ddelta/ds M_n| / (E_n - E_0)^2 along a
polyline in drive space, and its line integral I[C].

Below BETA_FLOOR an edge is not diagonalized: the leading-order zero-drive
expression |dbeta/ds| * axis_penalty(delta) is used instead, computed from the
undriven Fock energies.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from .exceptions import DegeneratePointError
from .fock_core import Operator
from .model import ControlPoint, DriveKind, hamiltonian_matrix, model_terms, undriven_energies
from .spectral import DEGENERACY_TOL, CouplingRow, coupling_row, eigensystem, row_from_eigenpairs

logger = logging.getLogger(__name__)

BETA_FLOOR = 1e-4
REFINE_TOL = 0.005
EDGE_DOUBLINGS = 5
UNIT_TOL = 1e-9


class QuadratureRule(str, Enum):
    MIDPOINT = "midpoint"
    GAUSS = "gauss"


@dataclass(frozen=True, eq=False)
class PenaltyProfile:
    """Sampled penalty density along a polyline.

    Sample i sits inside the arc-length cell [cell_edges[i], cell_edges[i+1]];
    cells are contiguous from 0 to the total arc length.
    """

    arc_s: np.ndarray
    q_vals: np.ndarray
    cell_edges: np.ndarray
    deltas: np.ndarray
    betas: np.ndarray
    edge_index: np.ndarray
    analytic: np.ndarray
    samples_per_edge: int
    rule: QuadratureRule

    @property
    def weights(self) -> np.ndarray:
        return np.diff(self.cell_edges)

    @property
    def total(self) -> float:
        return math.fsum(self.q_vals * self.weights)

    @property
    def arc_length(self) -> float:
        return float(self.cell_edges[-1])

    def __len__(self) -> int:
        return self.q_vals.shape[0]


def _unit_tangent(tangent: Sequence[float]) -> np.ndarray:
    t = np.asarray(tangent, dtype=float)
    if t.shape != (2,) or abs(np.hypot(*t) - 1.0) > UNIT_TOL:
        raise ValueError(f"tangent must be a unit 2-vector, got {tangent}")
    return t


def density_from_row(row: CouplingRow, tangent: np.ndarray) -> float:
    numerators = np.abs(tangent[1] * row.l_vals[1:] + tangent[0] * row.m_vals[1:])
    return float(np.sum(numerators / row.gaps[1:] ** 2))


def _density(delta: float, drive: float, tangent: np.ndarray, dim: int, kind: DriveKind) -> float:
    # raw eigh: the phase convention of eigensystem() does not change |numerators|
    energies, vectors = eigh(hamiltonian_matrix(delta, drive, dim, kind))
    row = row_from_eigenpairs(energies, vectors, kind, (delta, drive))
    return density_from_row(row, tangent)


def penalty_density(pt: ControlPoint, tangent: Sequence[float], dim: int,
                    drive_kind: Optional[DriveKind] = None) -> float:
    """Q at a drive-space point for a unit tangent (ddelta/ds, ddrive/ds)"""
    t = _unit_tangent(tangent)
    kind = DriveKind(drive_kind) if drive_kind is not None else pt.kind
    H = Operator(hamiltonian_matrix(pt.delta, pt.drive, dim, kind), hermitian=True)
    return density_from_row(coupling_row(eigensystem(H, pt), kind), t)


def axis_penalty(delta: float, dim: int, kind: DriveKind = DriveKind.LINEAR) -> float:
    """Vertical penalty density at zero drive from undriven energies and drive matrix elements"""
    energies = undriven_energies(delta, dim)
    ground = int(np.argmin(energies))
    gaps = energies - energies[ground]
    others = np.delete(gaps, ground)
    if others.min() < DEGENERACY_TOL:
        raise DegeneratePointError(f"undriven ground state degenerate at delta={delta}", float(others.min()))
    couplings = np.abs(model_terms(dim, DriveKind(kind))[2][:, ground])
    couplings[ground] = 0.0
    mask = couplings > 0
    return float(np.sum(couplings[mask] / gaps[mask] ** 2))


# ---------------------------------------------------------------------------
# Quadrature along edges
# ---------------------------------------------------------------------------

def _rule_cells(start: float, stop: float, samples: int, rule: QuadratureRule) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and contiguous cell edges on [start, stop]"""
    width = stop - start
    if rule is QuadratureRule.GAUSS:
        x, w = np.polynomial.legendre.leggauss(samples)
        nodes = start + 0.5 * width * (x + 1.0)
        edges = start + 0.5 * width * np.concatenate(([0.0], np.cumsum(w)))
    else:
        edges = np.linspace(start, stop, samples + 1)
        nodes = 0.5 * (edges[:-1] + edges[1:])
    edges[-1] = stop
    return nodes, edges


@dataclass(frozen=True, eq=False)
class EdgeSamples:
    local_s: np.ndarray
    cell_edges: np.ndarray
    points: np.ndarray
    q_vals: np.ndarray
    analytic: np.ndarray

    @property
    def total(self) -> float:
        return math.fsum(self.q_vals * np.diff(self.cell_edges))


def _edge_pieces(p0: np.ndarray, p1: np.ndarray, length: float, beta_floor: float) -> List[Tuple[float, float, bool]]:
    """Split an edge at the drive floor into (start, stop, analytic) arc-length pieces"""
    b0, b1 = p0[1], p1[1]
    low0, low1 = b0 < beta_floor, b1 < beta_floor
    if low0 == low1:
        return [(0.0, length, low0)]
    cut = length * (beta_floor - b0) / (b1 - b0)
    return [(0.0, cut, low0), (cut, length, low1)]


def edge_samples(p0, p1, dim: int, samples: int = 8, rule: QuadratureRule = QuadratureRule.MIDPOINT,
                 drive_kind: DriveKind = DriveKind.LINEAR, beta_floor: float = BETA_FLOOR,
                 executor: Optional[ThreadPoolExecutor] = None) -> EdgeSamples:
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    length = float(np.hypot(*(p1 - p0)))
    if length == 0.0:
        empty = np.zeros(0)
        return EdgeSamples(empty, np.zeros(1), np.zeros((0, 2)), empty, np.zeros(0, dtype=bool))
    u = (p1 - p0) / length
    rule = QuadratureRule(rule)
    kind = DriveKind(drive_kind)

    nodes_all, edges_all, q_all, flags = [], [], [], []
    for start, stop, analytic in _edge_pieces(p0, p1, length, beta_floor):
        if stop <= start:
            continue
        nodes, edges = _rule_cells(start, stop, samples, rule)
        points = p0 + np.outer(nodes, u)
        if analytic:
            if u[1] == 0.0:
                q = np.zeros(samples)
            else:
                q = np.array([abs(u[1]) * axis_penalty(d, dim, kind) for d in points[:, 0]])
        else:
            evaluate = lambda pt: _density(pt[0], pt[1], u, dim, kind)
            mapper = executor.map if executor is not None else map
            q = np.fromiter(mapper(evaluate, points), dtype=float, count=samples)
        nodes_all.append(nodes)
        edges_all.append(edges if not edges_all else edges[1:])
        q_all.append(q)
        flags.append(np.full(samples, analytic))
    return EdgeSamples(
        local_s=np.concatenate(nodes_all),
        cell_edges=np.concatenate(edges_all),
        points=p0 + np.outer(np.concatenate(nodes_all), u),
        q_vals=np.concatenate(q_all),
        analytic=np.concatenate(flags),
    )


def edge_penalty(p0, p1, dim: int, samples: int = 8, rule: QuadratureRule = QuadratureRule.MIDPOINT,
                 drive_kind: DriveKind = DriveKind.LINEAR, beta_floor: float = BETA_FLOOR) -> float:
    return edge_samples(p0, p1, dim, samples, rule, drive_kind, beta_floor).total


def settled_edge_penalty(p0, p1, dim: int, samples: int = 8, rule: QuadratureRule = QuadratureRule.MIDPOINT,
                         drive_kind: DriveKind = DriveKind.LINEAR, beta_floor: float = BETA_FLOOR,
                         tol: float = REFINE_TOL, max_doublings: int = EDGE_DOUBLINGS) -> float:
    """Edge integral with the sample count doubled until two successive totals agree within tol.

    Edges that dip towards the drive floor have Q peaked within a few beta of
    their low end; a fixed uniform rule can step over that peak entirely.
    """
    total = edge_penalty(p0, p1, dim, samples, rule, drive_kind, beta_floor)
    for _ in range(max_doublings):
        samples *= 2
        finer = edge_penalty(p0, p1, dim, samples, rule, drive_kind, beta_floor)
        settled = abs(finer - total) <= tol * finer
        total = finer
        if settled:
            break
    return total


def polyline_penalty(vertices, dim: int, samples_per_edge: int = 8,
                     rule: QuadratureRule = QuadratureRule.MIDPOINT,
                     drive_kind: DriveKind = DriveKind.LINEAR, beta_floor: float = BETA_FLOOR,
                     jobs: int = 1) -> PenaltyProfile:
    """Composite quadrature of Q along an arbitrary polyline of (delta, drive) vertices"""
    if samples_per_edge < 1:
        raise ValueError(f"samples_per_edge must be >= 1, got {samples_per_edge}")
    vertices = np.asarray(vertices, dtype=float)
    executor = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    arc, q, cells, pts, edge_idx, analytic = [], [], [np.zeros(1)], [], [], []
    offset = 0.0
    try:
        for i in range(len(vertices) - 1):
            es = edge_samples(vertices[i], vertices[i + 1], dim, samples_per_edge, rule,
                              drive_kind, beta_floor, executor)
            if es.q_vals.size == 0:
                continue
            arc.append(offset + es.local_s)
            cells.append(offset + es.cell_edges[1:])
            q.append(es.q_vals)
            pts.append(es.points)
            edge_idx.append(np.full(es.q_vals.size, i))
            analytic.append(es.analytic)
            offset += float(es.cell_edges[-1])
    finally:
        if executor is not None:
            executor.shutdown()
    if not q:
        raise ValueError("polyline has zero length")
    points = np.concatenate(pts)
    return PenaltyProfile(
        arc_s=np.concatenate(arc),
        q_vals=np.concatenate(q),
        cell_edges=np.concatenate(cells),
        deltas=points[:, 0].copy(),
        betas=points[:, 1].copy(),
        edge_index=np.concatenate(edge_idx),
        analytic=np.concatenate(analytic),
        samples_per_edge=samples_per_edge,
        rule=QuadratureRule(rule),
    )


def path_penalty(path, dim: int, samples_per_edge: int = 8, rule: QuadratureRule = QuadratureRule.MIDPOINT,
                 refine: bool = False, tol: float = REFINE_TOL, max_doublings: int = 4,
                 jobs: int = 1) -> PenaltyProfile:
    """I[C] of a feasible ParamPath, optionally doubling samples until the total settles within tol"""
    path.validate()
    profile = polyline_penalty(path.vertices, dim, samples_per_edge, rule, jobs=jobs)
    if not refine:
        return profile
    samples = samples_per_edge
    for _ in range(max_doublings):
        samples *= 2
        finer = polyline_penalty(path.vertices, dim, samples, rule, jobs=jobs)
        change = abs(finer.total - profile.total) / max(profile.total, np.finfo(float).tiny)
        logger.info("quadrature refinement: %d samples/edge, total %.8g, change %.2e",
                    samples, finer.total, change)
        profile = finer
        if change <= tol:
            return profile
    logger.warning("penalty quadrature not settled within %.2g after %d doublings", tol, max_doublings)
    return profile
