"""
Path Optimizer
Polyline paths in (delta, beta) space from (delta_max, 0) to (delta_f, 0), the analytic
seed path, feasibility projection, and the accept-if-better vertex perturbation search
that minimizes the total adiabatic penalty.
"""
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DegeneratePointError, InfeasiblePathError
from .fock_core import default_dimension
from .model import final_detuning, odd_crossings
from .penalty import BETA_FLOOR, PenaltyProfile, QuadratureRule, path_penalty, settled_edge_penalty
from .variational import coherent_alpha, optimal_offset, region_b_beta

logger = logging.getLogger(__name__)

CROSSING_WINDOW = 0.05
CLAMP_EPS = 1e-6
C_THRESHOLD = 1e-4
ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class TargetSpec:
    n_target: int
    delta_max: float = 30.0
    dim: Optional[int] = None
    n_vertices: int = 60

    def __post_init__(self):
        if self.n_target < 1:
            raise ValueError(f"n_target must be >= 1, got {self.n_target}")
        if not self.delta_max > 0:
            raise ValueError(f"delta_max must be positive, got {self.delta_max}")
        if self.n_vertices < 5:
            raise ValueError(f"n_vertices must be >= 5, got {self.n_vertices}")

    @property
    def delta_f(self) -> float:
        return final_detuning(self.n_target)

    @property
    def beta_max(self) -> float:
        return region_b_beta(self.delta_max, self.delta_f)

    @property
    def column_delta(self) -> float:
        """Detuning of the vertical final approach"""
        return self.delta_f + optimal_offset(self.n_target).delta_star

    def resolved_dim(self) -> int:
        if self.dim is not None:
            return int(self.dim)
        alpha_max = coherent_alpha(self.delta_max, self.beta_max).alpha
        return default_dimension(self.n_target, alpha_max)


@dataclass(frozen=True)
class SearchOptions:
    seed: int = 1
    max_sweeps: int = 150
    min_sweeps: int = 60
    sigma0: float = 0.5
    sigma_decay: float = 0.9
    rel_tol: float = 1e-4
    samples_per_edge: int = 8
    rule: QuadratureRule = QuadratureRule.MIDPOINT
    reweight: bool = True
    refine: bool = True
    jobs: int = 1

    def to_dict(self) -> Dict:
        data = asdict(self)
        data["rule"] = QuadratureRule(self.rule).value
        return data


class ParamPath:
    """Feasible polyline in drive space. Vertices are an (N, 2) array of (delta, beta)."""

    def __init__(self, vertices, delta_max: float, n_target: int, beta_floor: float = BETA_FLOOR):
        vertices = np.array(vertices, dtype=float, copy=True)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or vertices.shape[0] < 2:
            raise InfeasiblePathError(f"vertices must be an (N>=2, 2) array, got shape {vertices.shape}")
        vertices.setflags(write=False)
        self.vertices = vertices
        self.delta_max = float(delta_max)
        self.n_target = int(n_target)
        self.delta_f = final_detuning(self.n_target)
        self.beta_floor = float(beta_floor)
        self.validate()
        seg = np.hypot(*np.diff(vertices, axis=0).T)
        self._vertex_arc = np.concatenate(([0.0], np.cumsum(seg)))

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __repr__(self) -> str:
        return (f"ParamPath(n_target={self.n_target}, delta_max={self.delta_max}, "
                f"vertices={len(self)}, arc_length={self.arc_length:.4f})")

    @property
    def arc_length(self) -> float:
        return float(self._vertex_arc[-1])

    @property
    def vertex_arc(self) -> np.ndarray:
        return self._vertex_arc.copy()

    def validate(self):
        issues = feasibility_issues(self.vertices, self.delta_max, self.n_target, self.beta_floor)
        if issues:
            raise InfeasiblePathError("; ".join(issues[:5]))

    def point_at(self, s):
        """(delta, beta) at arc length s, clamped to [0, S]; vectorized over s"""
        s = np.clip(np.asarray(s, dtype=float), 0.0, self.arc_length)
        deltas = np.interp(s, self._vertex_arc, self.vertices[:, 0])
        betas = np.interp(s, self._vertex_arc, self.vertices[:, 1])
        return deltas, betas

    def with_vertices(self, vertices) -> "ParamPath":
        return ParamPath(vertices, self.delta_max, self.n_target, self.beta_floor)

    def to_dict(self) -> Dict:
        return {
            "n_target": self.n_target,
            "delta_max": self.delta_max,
            "delta_f": self.delta_f,
            "vertices": [[float(d), float(b)] for d, b in self.vertices],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ParamPath":
        return cls(data["vertices"], data["delta_max"], data["n_target"])


def feasibility_issues(vertices: np.ndarray, delta_max: float, n_target: int,
                       beta_floor: float = BETA_FLOOR) -> List[str]:
    issues = []
    delta_f = final_detuning(n_target)
    if np.any(np.abs(vertices[0] - (delta_max, 0.0)) > ENDPOINT_TOL):
        issues.append(f"start {tuple(vertices[0])} is not ({delta_max}, 0)")
    if np.any(np.abs(vertices[-1] - (delta_f, 0.0)) > ENDPOINT_TOL):
        issues.append(f"end {tuple(vertices[-1])} is not ({delta_f}, 0)")
    if np.any(vertices[:, 1] < 0):
        issues.append("negative drive strength")
    if np.any(vertices[:, 0] > delta_max + ENDPOINT_TOL):
        issues.append(f"detuning exceeds delta_max={delta_max}")
    crossings = np.array(odd_crossings(n_target))
    for j in range(1, len(vertices) - 1):
        d, b = vertices[j]
        if b < beta_floor and np.any(np.abs(d - crossings) < CROSSING_WINDOW):
            issues.append(f"vertex {j} at ({d}, {b}) sits on a crossing below the drive floor")
    edge_crossings = odd_crossings(n_target, extra=1)
    for j in range(len(vertices) - 1):
        if not edge_is_feasible(vertices[j], vertices[j + 1], edge_crossings, beta_floor):
            issues.append(f"edge {j} passes a ground-state crossing below the drive floor")
    return issues


def edge_is_feasible(p0, p1, crossings: Sequence[float], beta_floor: float = BETA_FLOOR) -> bool:
    """An edge may only pass an odd crossing with beta >= beta_floor at the crossing point"""
    (d0, b0), (d1, b1) = p0, p1
    for c in crossings:
        if d0 == d1:
            if d0 == c and min(b0, b1) < beta_floor:
                return False
            continue
        if (d0 - c) * (d1 - c) > 0:
            continue
        beta_at = b0 + (b1 - b0) * (c - d0) / (d1 - d0)
        if beta_at < beta_floor:
            return False
    return True


def project(point, delta_max: float, n_target: int, beta_floor: float = BETA_FLOOR) -> np.ndarray:
    """Clip into the feasible set: delta <= delta_max, beta >= 0, floor near odd crossings"""
    d = min(float(point[0]), delta_max)
    b = max(float(point[1]), 0.0)
    if b < beta_floor and any(abs(d - c) < CROSSING_WINDOW for c in odd_crossings(n_target)):
        b = beta_floor
    return np.array([d, b])


def _place_on_polyline(corners: np.ndarray, counts: Sequence[int]) -> np.ndarray:
    """Resample each corner-to-corner piece with counts[i] segments, keeping corners"""
    points = [corners[0]]
    for i, count in enumerate(counts):
        for k in range(1, count):
            points.append(corners[i] + (corners[i + 1] - corners[i]) * k / count)
        points.append(corners[i + 1])
    return np.array(points)


def _allocate(lengths: Sequence[float], total_segments: int) -> List[int]:
    """Split total_segments over pieces proportionally, at least one each"""
    lengths = np.asarray(lengths, dtype=float)
    counts = np.ones(len(lengths), dtype=int)
    remaining = total_segments - len(lengths)
    if remaining > 0:
        shares = remaining * lengths / lengths.sum()
        extra = np.floor(shares).astype(int)
        leftover = remaining - extra.sum()
        order = np.argsort(-(shares - extra), kind="stable")
        extra[order[:leftover]] += 1
        counts += extra
    return counts.tolist()


def seed_path(spec: TargetSpec) -> ParamPath:
    """Clamped drive ramp, the straight coherent-regime descent, then the final approach.

    The descent stops above delta_f + delta*(n), drops vertically onto the axis
    there and slides along beta = 0 to delta_f. The slide costs nothing: the
    undriven ground state is |n> across the whole interval.
    """
    column = spec.column_delta
    corners = np.array([
        [spec.delta_max, 0.0],
        [spec.delta_max, spec.beta_max],
        [column, region_b_beta(column, spec.delta_f)],
        [column, 0.0],
        [spec.delta_f, 0.0],
    ])
    lengths = np.hypot(*np.diff(corners, axis=0).T)
    counts = _allocate(lengths, spec.n_vertices - 1)
    return ParamPath(_place_on_polyline(corners, counts), spec.delta_max, spec.n_target)


def terminal_column(vertices: np.ndarray) -> Optional[Tuple[int, int]]:
    """(top, foot) vertex indices of a vertical drop onto the axis followed by a final slide along beta = 0"""
    n = len(vertices)
    foot = n - 2
    if n < 4 or vertices[foot, 1] != 0.0 or vertices[foot, 0] == vertices[-1, 0]:
        return None
    top = foot
    while top > 1 and vertices[top - 1, 0] == vertices[foot, 0]:
        top -= 1
    return (top, foot) if top < foot else None


# ---------------------------------------------------------------------------
# Region segmentation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RegionLabels:
    labels: np.ndarray

    def mask(self, region: str) -> np.ndarray:
        return self.labels == region

    def counts(self) -> Dict[str, int]:
        return {region: int(np.sum(self.labels == region)) for region in "ABC"}

    def at_arc(self, profile: PenaltyProfile, s) -> np.ndarray:
        """Label of the profile cell containing each arc length"""
        idx = np.searchsorted(profile.cell_edges, np.asarray(s, dtype=float), side="right") - 1
        return self.labels[np.clip(idx, 0, len(self.labels) - 1)]


def segment_regions(path: ParamPath, profile: PenaltyProfile) -> RegionLabels:
    """C: terminal block with Q >= 1e-4 max Q; A: samples on the delta_max clamp before it; B: the rest"""
    q = profile.q_vals
    above = q >= C_THRESHOLD * q.max()
    labels = np.full(q.shape[0], "B", dtype="<U1")
    hits = np.flatnonzero(above)
    c_start = q.shape[0]
    if hits.size:
        c_start = int(hits[-1])
        while c_start > 0 and above[c_start - 1]:
            c_start -= 1
    off_clamp = np.flatnonzero(profile.deltas < path.delta_max - CLAMP_EPS)
    a_stop = int(off_clamp[0]) if off_clamp.size else q.shape[0]
    labels[:min(a_stop, c_start)] = "A"
    labels[c_start:] = "C"
    return RegionLabels(labels)


def vertex_regions(path: ParamPath, profile: PenaltyProfile, regions: RegionLabels) -> List[str]:
    return regions.at_arc(profile, path.vertex_arc).tolist()


# ---------------------------------------------------------------------------
# Optimization
# ---------------------------------------------------------------------------

@dataclass
class OptimizationResult:
    """Container for optimization results"""

    method: str
    path: Optional[ParamPath] = None
    profile: Optional[PenaltyProfile] = None
    total_penalty: float = 0.0
    initial_penalty: float = 0.0
    computation_time: float = 0.0
    sweeps: int = 0
    accepted_moves: int = 0
    success: bool = False
    penalty_history: List[float] = field(default_factory=list)


class PathOptimizer:
    """Accept-if-better vertex perturbation with a decaying Gaussian step.

    Only the two edges adjacent to a moved vertex are re-evaluated; the
    per-edge penalties are cached between proposals. Vertices of a terminal
    vertical column move along beta only, its foot on the axis stays put.
    """

    def __init__(self, spec: TargetSpec, options: Optional[SearchOptions] = None):
        self.spec = spec
        self.options = options or SearchOptions()
        self.dim = spec.resolved_dim()
        self._crossings = odd_crossings(spec.n_target, extra=1)

    def _edge(self, p0, p1) -> float:
        return settled_edge_penalty(p0, p1, self.dim, self.options.samples_per_edge, self.options.rule)

    def _measure(self, path: ParamPath) -> PenaltyProfile:
        opts = self.options
        return path_penalty(path, self.dim, opts.samples_per_edge, opts.rule, refine=opts.refine, jobs=opts.jobs)

    def _proposal(self, vertex: np.ndarray, step: np.ndarray, vertical: bool) -> np.ndarray:
        if vertical:
            return np.array([vertex[0], max(vertex[1] + step[1], BETA_FLOOR)])
        return project(vertex + step, self.spec.delta_max, self.spec.n_target)

    def _sweeps(self, vertices: np.ndarray, rng: np.random.Generator, history: List[float]) -> Tuple[np.ndarray, int, int]:
        opts = self.options
        column = terminal_column(vertices)
        movable = range(1, column[1] if column else len(vertices) - 1)
        vertical = set(range(column[0], column[1])) if column else set()
        costs = [self._edge(vertices[i], vertices[i + 1]) for i in range(len(vertices) - 1)]
        total = math.fsum(costs)
        history.append(total)
        accepted = 0
        sweep = 0
        for sweep in range(1, opts.max_sweeps + 1):
            sigma = opts.sigma0 * opts.sigma_decay ** (sweep - 1)
            before = total
            for j in movable:
                step = sigma * rng.standard_normal(2)
                proposal = self._proposal(vertices[j], step, j in vertical)
                left, right = vertices[j - 1], vertices[j + 1]
                if not (edge_is_feasible(left, proposal, self._crossings)
                        and edge_is_feasible(proposal, right, self._crossings)):
                    continue
                try:
                    new_left, new_right = self._edge(left, proposal), self._edge(proposal, right)
                except DegeneratePointError:
                    continue
                # equal penalties are rejected
                if new_left + new_right < costs[j - 1] + costs[j]:
                    vertices[j] = proposal
                    costs[j - 1], costs[j] = new_left, new_right
                    accepted += 1
            total = math.fsum(costs)
            if total > before:
                raise AssertionError(f"penalty increased during sweep {sweep}: {before} -> {total}")
            history.append(total)
            logger.info("sweep %d: sigma=%.3g total=%.8g", sweep, sigma, total)
            if sweep >= opts.min_sweeps and (before - total) <= opts.rel_tol * before:
                break
        return vertices, sweep, accepted

    def optimize(self, path: ParamPath) -> OptimizationResult:
        start_time = time.time()
        result = OptimizationResult(method="vertex perturbation")
        opts = self.options
        rng = np.random.default_rng(opts.seed)
        history: List[float] = []

        initial = self._measure(path)
        candidates = [(path, initial)]
        vertices, sweeps, accepted = self._sweeps(np.array(path.vertices, dtype=float), rng, history)
        first = path.with_vertices(vertices)
        candidates.append((first, self._measure(first)))

        if opts.reweight:
            spread = reweight_path(first, self.dim, opts)
            if spread is not first:
                second, extra_sweeps, extra_accepted = self._sweeps(np.array(spread.vertices), rng, history)
                sweeps += extra_sweeps
                accepted += extra_accepted
                second_path = path.with_vertices(second)
                candidates.append((second_path, self._measure(second_path)))

        # the search sees settled edge sums; the returned path is judged on the refined profile
        best, profile = min(candidates, key=lambda item: item[1].total)
        if best is path:
            logger.warning("search did not lower the refined penalty %.6g; keeping the input path", initial.total)
        result.path = best
        result.profile = profile
        result.total_penalty = profile.total
        result.initial_penalty = initial.total
        result.sweeps = sweeps
        result.accepted_moves = accepted
        result.penalty_history = history
        result.computation_time = time.time() - start_time
        result.success = True
        logger.info("optimized I[C]=%.6g after %d sweeps (%d moves accepted)",
                    result.total_penalty, sweeps, accepted)
        return result


def settled_total(path: ParamPath, dim: int, opts: SearchOptions) -> float:
    """Sum of per-edge settled integrals, the cost the vertex search minimizes"""
    v = path.vertices
    return math.fsum(settled_edge_penalty(v[i], v[i + 1], dim, opts.samples_per_edge, opts.rule)
                     for i in range(len(v) - 1))


def reweight_path(path: ParamPath, dim: int, opts: SearchOptions, sqrt_weight: float = 0.7) -> ParamPath:
    """Redistribute vertices with density proportional to a mix of sqrt(Q) and uniform arc length.

    The start, the last clamped vertex, the terminal column and the end stay
    in place. Returns the input path when the redistributed one is infeasible
    or has a larger penalty.
    """
    profile = path_penalty(path, dim, opts.samples_per_edge, opts.rule)
    S = profile.arc_length
    root_q = np.sqrt(profile.q_vals) * profile.weights
    mass = np.concatenate(([0.0], np.cumsum(root_q)))
    mass = mass / mass[-1] if mass[-1] > 0 else profile.cell_edges / S
    measure = (1.0 - sqrt_weight) * profile.cell_edges / S + sqrt_weight * mass

    n = len(path)
    clamped = np.flatnonzero(path.vertices[:, 0] >= path.delta_max - CLAMP_EPS)
    corner = int(clamped[-1]) if clamped.size else 0
    column = terminal_column(path.vertices)
    tail = column[0] if column else n - 2
    knots = sorted({0, min(corner, tail), *range(tail, n)})
    knot_arc = path.vertex_arc[knots]
    knot_measure = np.interp(knot_arc, profile.cell_edges, measure)
    pieces = np.maximum(np.diff(knot_measure), 1e-12)
    # only the free stretch before the terminal knots receives new vertices
    counts = [1] * len(pieces)
    free = len(knots) - (n - tail)
    counts[:free] = _allocate(pieces[:free], n - 1 - (len(pieces) - free))

    new_vertices = [path.vertices[0]]
    for i, count in enumerate(counts):
        levels = np.linspace(knot_measure[i], knot_measure[i + 1], count + 1)[1:-1]
        arcs = np.interp(levels, measure, profile.cell_edges)
        deltas, betas = path.point_at(arcs)
        for d, b in zip(deltas, betas):
            new_vertices.append(project((d, b), path.delta_max, path.n_target))
        new_vertices.append(path.vertices[knots[i + 1]])
    try:
        candidate = path.with_vertices(np.array(new_vertices))
    except InfeasiblePathError:
        return path
    if settled_total(candidate, dim, opts) > settled_total(path, dim, opts):
        return path
    return candidate


def optimize(path: ParamPath, spec: TargetSpec, search_opts: Optional[SearchOptions] = None) -> Tuple[ParamPath, PenaltyProfile]:
    result = PathOptimizer(spec, search_opts).optimize(path)
    return result.path, result.profile
