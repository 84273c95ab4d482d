"""
Dynamics Engine
Fixed-step RK4 propagation of pure states and density matrices under a
time-dependent Kerr-cavity Hamiltonian, with single-photon loss
L = sqrt(kappa) a for the open system, plus fidelity and Wigner observables.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.linalg import eigvalsh

from .exceptions import ConvergenceError
from .fock_core import (DensityMatrix, State, StateVector, _check_dim, _displacement_pairs, fock_state)
from .model import DriveKind, model_terms
from .path_optimizer import segment_regions
from .penalty import path_penalty
from .schedule import build_schedule

logger = logging.getLogger(__name__)

STEP_FACTOR = 0.05
OUTPUT_POINTS = 201
NORM_DRIFT_TOL = 1e-8
TRACE_DRIFT_TOL = 1e-6
POSITIVITY_TOL = 1e-8
HERMITICITY_TOL = 1e-10
STEP_DOUBLING_TOL = 1e-7
SNAPSHOT_FRACTIONS = (0.0, 0.03, 0.06, 0.1, 0.2, 1.0)
TAIL_TOL = 1e-6


@dataclass(frozen=True)
class LossModel:
    kappa: float = 0.0

    def __post_init__(self):
        kappa = float(self.kappa)
        if not math.isfinite(kappa) or kappa < 0:
            raise ValueError(f"loss rate must be finite and non-negative, got {self.kappa}")
        object.__setattr__(self, "kappa", kappa)

    def decay_time(self, n: int) -> float:
        """Lifetime scale 1/(n kappa) of |n>"""
        return math.inf if self.kappa == 0 or n == 0 else 1.0 / (n * self.kappa)


def theoretical_decay(n: int, kappa: float, t) -> np.ndarray:
    """<n|rho(t)|n> under pure loss from |n><n|"""
    return np.exp(-n * kappa * np.asarray(t, dtype=float))


@dataclass(frozen=True, eq=False)
class ControlledHamiltonian:
    """H(c) = static + sum_i c_i terms[i]"""

    static: np.ndarray
    terms: Tuple[np.ndarray, ...] = ()

    @classmethod
    def kerr_cavity(cls, dim: int, kind: DriveKind = DriveKind.LINEAR) -> "ControlledHamiltonian":
        kerr, num, drive = model_terms(dim, DriveKind(kind))
        return cls(kerr, (num, drive))

    @classmethod
    def free(cls, dim: int) -> "ControlledHamiltonian":
        return cls(np.zeros((_check_dim(dim),) * 2))

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    def at(self, controls: Sequence[float]) -> np.ndarray:
        H = np.array(self.static, dtype=complex)
        for value, term in zip(controls, self.terms):
            H += value * term
        return H

    def norm_bound(self, control_samples: np.ndarray) -> float:
        """Largest spectral norm over control samples; exact for piecewise-linear controls"""
        if not self.terms:
            return float(np.max(np.abs(eigvalsh(self.static)))) if np.any(self.static) else 0.0
        return max(float(np.max(np.abs(eigvalsh(self.at(c))))) for c in control_samples)


@dataclass(frozen=True, eq=False)
class SimResult:
    times: np.ndarray
    fidelity_series: np.ndarray
    trace_series: np.ndarray
    tail_series: np.ndarray
    populations: np.ndarray
    trajectory: List[State]
    final_state: State
    n_target: int
    open_system: bool
    diagnostics: Dict[str, float] = field(default_factory=dict)
    snapshots: Dict[float, State] = field(default_factory=dict)

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity_series[-1])

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "t": self.times,
            "fidelity": self.fidelity_series,
            "trace": self.trace_series,
            "tail": self.tail_series,
        })
        for k in range(self.populations.shape[1]):
            frame[f"p_{k}"] = self.populations[:, k]
        return frame


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def step_count(ham: ControlledHamiltonian, knot_controls: np.ndarray, duration: float, kappa: float = 0.0,
               output_points: int = OUTPUT_POINTS, step_factor: float = STEP_FACTOR) -> int:
    """Smallest multiple of (output_points - 1) keeping ||H|| dt <= step_factor"""
    segments = output_points - 1
    bound = ham.norm_bound(knot_controls) + kappa * (ham.dim - 1)
    needed = math.ceil(bound * duration / step_factor) if bound > 0 else 1
    return max(1, math.ceil(needed / segments)) * segments


def _closed_rhs(H: np.ndarray, psi: np.ndarray, _loss) -> np.ndarray:
    return -1j * (H @ psi)


def _lindblad_rhs(H: np.ndarray, rho: np.ndarray, loss) -> np.ndarray:
    kappa, a, num = loss
    X = (H - 0.5j * kappa * num) @ rho
    drho = -1j * (X - X.conj().T)
    if kappa:
        drho += kappa * (a @ rho @ a.T)
    return drho


def propagate(ham: ControlledHamiltonian, knot_times: np.ndarray, knot_controls: np.ndarray, initial: np.ndarray,
              kappa: float = 0.0, output_points: int = OUTPUT_POINTS, n_steps: Optional[int] = None,
              step_factor: float = STEP_FACTOR) -> Tuple[np.ndarray, List[np.ndarray], int]:
    """RK4 from knot_times[0] to knot_times[-1] with controls interpolated linearly between knots.

    A vector initial state evolves under the Schroedinger equation, a matrix under the
    Lindblad equation with jump operator sqrt(kappa) a. Returns the output times,
    the states at those times and the step count used.
    """
    knot_times = np.asarray(knot_times, dtype=float)
    knot_controls = np.asarray(knot_controls, dtype=float).reshape(len(knot_times), -1)
    t0, t1 = float(knot_times[0]), float(knot_times[-1])
    segments = output_points - 1
    if n_steps is None:
        n_steps = step_count(ham, knot_controls, t1 - t0, kappa, output_points, step_factor)
    if n_steps % segments:
        raise ValueError(f"step count {n_steps} is not a multiple of {segments}")
    per_segment = n_steps // segments
    h = (t1 - t0) / n_steps

    state = np.array(initial, dtype=complex)
    if state.ndim == 1:
        rhs, loss = _closed_rhs, None
    else:
        a = np.diag(np.sqrt(np.arange(1, ham.dim, dtype=float)), k=1)
        rhs, loss = _lindblad_rhs, (kappa, a, np.diag(np.arange(ham.dim, dtype=float)))

    out_times = np.linspace(t0, t1, output_points)
    outputs = [state.copy()]
    for seg in range(segments):
        seg_start = t0 + seg * per_segment * h
        half_grid = seg_start + 0.5 * h * np.arange(2 * per_segment + 1)
        controls = np.column_stack([np.interp(half_grid, knot_times, column) for column in knot_controls.T])
        H_start = ham.at(controls[0])
        for k in range(per_segment):
            H_mid = ham.at(controls[2 * k + 1])
            H_end = ham.at(controls[2 * k + 2])
            k1 = rhs(H_start, state, loss)
            k2 = rhs(H_mid, state + 0.5 * h * k1, loss)
            k3 = rhs(H_mid, state + 0.5 * h * k2, loss)
            k4 = rhs(H_end, state + h * k3, loss)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            H_start = H_end
        outputs.append(state.copy())
    return out_times, outputs, n_steps


def _wrap(array: np.ndarray) -> State:
    return StateVector(array) if array.ndim == 1 else DensityMatrix(array)


def _observe(states: List[np.ndarray], n_target: int, open_system: bool):
    populations = np.array([np.abs(s) ** 2 if s.ndim == 1 else np.real(np.diag(s)) for s in states])
    if open_system:
        traces = np.array([float(np.real(np.trace(s))) for s in states])
    else:
        traces = np.array([float(np.vdot(s, s).real) for s in states])
    tail_count = max(1, math.ceil(0.1 * populations.shape[1]))
    tails = populations[:, -tail_count:].sum(axis=1)
    return populations, traces, tails, populations[:, n_target]


def _check_drift(states: List[np.ndarray], traces: np.ndarray, open_system: bool) -> Dict[str, float]:
    diagnostics = {}
    if open_system:
        diagnostics["trace_drift"] = float(np.max(np.abs(traces - 1.0)))
        diagnostics["hermiticity_error"] = max(float(np.max(np.abs(s - s.conj().T))) for s in states)
        diagnostics["min_eigenvalue"] = min(float(eigvalsh(0.5 * (s + s.conj().T))[0]) for s in states)
        if (diagnostics["trace_drift"] > TRACE_DRIFT_TOL or diagnostics["hermiticity_error"] > HERMITICITY_TOL
                or diagnostics["min_eigenvalue"] < -POSITIVITY_TOL):
            raise ConvergenceError("density matrix left the physical set during propagation", diagnostics)
    else:
        diagnostics["norm_drift"] = float(np.max(np.abs(np.sqrt(traces) - 1.0)))
        if diagnostics["norm_drift"] > NORM_DRIFT_TOL:
            raise ConvergenceError("state norm drifted during propagation", diagnostics)
    return diagnostics


def _simulate(sched, initial: np.ndarray, n_target: int, kappa: float, output_points: int,
              step_factor: float, snapshot_fractions: Sequence[float], verify: bool,
              ham: Optional[ControlledHamiltonian] = None) -> SimResult:
    dim = initial.shape[0]
    if n_target < 0 or n_target >= dim:
        raise IndexError(f"target Fock index {n_target} outside truncated basis of size {dim}")
    ham = ham or ControlledHamiltonian.kerr_cavity(dim, sched.drive_kind)
    controls = sched.controls()
    open_system = initial.ndim == 2
    started = time.time()
    out_times, states, n_steps = propagate(ham, sched.times, controls, initial, kappa,
                                           output_points, step_factor=step_factor)
    populations, traces, tails, fidelities = _observe(states, n_target, open_system)
    diagnostics = _check_drift(states, traces, open_system)
    diagnostics["steps"] = float(n_steps)
    diagnostics["final_tail"] = float(tails[-1])
    if tails.max() > TAIL_TOL:
        logger.warning("population in the top tenth of the basis reached %.2e; increase dim", tails.max())
    if verify:
        _, fine_states, _ = propagate(ham, sched.times, controls, initial, kappa, output_points, n_steps=2 * n_steps)
        fine_fidelity = _observe(fine_states[-1:], n_target, open_system)[3][0]
        diagnostics["step_doubling_delta"] = float(abs(fine_fidelity - fidelities[-1]))
        if diagnostics["step_doubling_delta"] > STEP_DOUBLING_TOL:
            raise ConvergenceError("fidelity changed under step doubling", diagnostics)
    diagnostics["runtime"] = time.time() - started
    logger.info("propagated %d steps (%s), final fidelity %.6f",
                n_steps, "lindblad" if open_system else "closed", fidelities[-1])

    snapshots = {}
    for fraction in snapshot_fractions:
        index = int(round(float(fraction) * (output_points - 1)))
        snapshots[float(fraction)] = _wrap(states[min(max(index, 0), output_points - 1)])
    trajectory = [_wrap(s) for s in states]
    return SimResult(
        times=out_times, fidelity_series=fidelities, trace_series=traces, tail_series=tails,
        populations=populations, trajectory=trajectory, final_state=trajectory[-1],
        n_target=n_target, open_system=open_system, diagnostics=diagnostics, snapshots=snapshots,
    )


def evolve_closed(sched, psi0: Optional[StateVector] = None, dim: Optional[int] = None,
                  n_target: Optional[int] = None, output_points: int = OUTPUT_POINTS,
                  step_factor: float = STEP_FACTOR, snapshot_fractions: Sequence[float] = (),
                  verify: bool = False, ham: Optional[ControlledHamiltonian] = None) -> SimResult:
    """Schroedinger evolution along the schedule, from the vacuum unless psi0 is given"""
    if psi0 is None:
        if dim is None:
            raise ValueError("either psi0 or dim is required")
        psi0 = fock_state(0, dim)
    if dim is not None and dim != psi0.dim:
        raise ValueError(f"psi0 has dimension {psi0.dim}, expected {dim}")
    target = n_target if n_target is not None else (sched.n_target or 0)
    return _simulate(sched, np.array(psi0.amplitudes), target, 0.0, output_points, step_factor,
                     snapshot_fractions, verify, ham)


def evolve_lindblad(sched, rho0: Optional[DensityMatrix] = None, loss: LossModel = LossModel(),
                    dim: Optional[int] = None, n_target: Optional[int] = None,
                    output_points: int = OUTPUT_POINTS, step_factor: float = STEP_FACTOR,
                    snapshot_fractions: Sequence[float] = (), verify: bool = False,
                    ham: Optional[ControlledHamiltonian] = None) -> SimResult:
    """Master-equation evolution with single-photon loss"""
    if rho0 is None:
        if dim is None:
            raise ValueError("either rho0 or dim is required")
        rho0 = fock_state(0, dim).to_density_matrix()
    if dim is not None and dim != rho0.dim:
        raise ValueError(f"rho0 has dimension {rho0.dim}, expected {dim}")
    if not rho0.check_physical():
        raise ValueError("initial density matrix is not physical")
    target = n_target if n_target is not None else (sched.n_target or 0)
    return _simulate(sched, np.array(rho0.matrix), target, loss.kappa, output_points, step_factor,
                     snapshot_fractions, verify, ham)


def fidelity(state: State, n_target: int) -> float:
    """<n|rho|n>, or |<n|psi>|^2 for pure states"""
    if n_target < 0 or n_target >= state.dim:
        raise IndexError(f"target Fock index {n_target} outside truncated basis of size {state.dim}")
    if isinstance(state, StateVector):
        return float(abs(state.amplitudes[n_target]) ** 2)
    return float(np.real(state.matrix[n_target, n_target]))


# ---------------------------------------------------------------------------
# Wigner function
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WignerGrid:
    """W on a grid; values[i, j] belongs to (xs[i], ps[j]) with alpha = x + i p"""

    xs: np.ndarray
    ps: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        return float(trapezoid(trapezoid(self.values, self.ps, axis=1), self.xs))

    def value_at(self, x: float, p: float) -> float:
        i = int(np.argmin(np.abs(self.xs - x)))
        j = int(np.argmin(np.abs(self.ps - p)))
        return float(self.values[i, j])

    @property
    def min_value(self) -> float:
        return float(self.values.min())


def default_extent(dim: int) -> Tuple[float, float]:
    half = math.sqrt(2 * dim) + 1.0
    return -half, half


def wigner_grid(state: State, x_range: Optional[Tuple[float, float]] = None,
                p_range: Optional[Tuple[float, float]] = None, resolution: int = 81,
                chunk: int = 8192) -> WignerGrid:
    """W(alpha) = (2/pi) Tr[rho D(2 alpha) Pi] using closed-form displacement elements"""
    rho = state.matrix if isinstance(state, DensityMatrix) else state.to_density_matrix().matrix
    dim = rho.shape[0]
    xs = np.linspace(*(x_range or default_extent(dim)), resolution)
    ps = np.linspace(*(p_range or default_extent(dim)), resolution)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    gamma = 2.0 * (X + 1j * P).ravel()
    signs = (-1.0) ** np.arange(dim)
    values = np.zeros(gamma.size)
    for lo in range(0, gamma.size, chunk):
        part = gamma[lo:lo + chunk]
        acc = np.zeros(part.size, dtype=complex)
        for m, n, lower, upper in _displacement_pairs(part, dim):
            acc += rho[n, m] * signs[n] * lower
            if m != n:
                acc += rho[m, n] * signs[m] * upper
        values[lo:lo + chunk] = (2.0 / math.pi) * acc.real
    return WignerGrid(xs, ps, values.reshape(X.shape))


# ---------------------------------------------------------------------------
# Rabi-tuned grid scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RabiScan:
    table: pd.DataFrame
    best_time: float
    best_stretch: float
    best_fidelity: float

    def best(self) -> Tuple[float, float, float]:
        return self.best_time, self.best_stretch, self.best_fidelity


def _scan_point(job) -> Dict[str, float]:
    path, profile, regions, total_time, stretch, kappa, n_target, dim, grid_points, output_points, step_factor = job
    started = time.time()
    sched = build_schedule(path, profile, total_time, stretch, regions, grid_points)
    if kappa == 0:
        result = evolve_closed(sched, dim=dim, n_target=n_target, output_points=output_points,
                               step_factor=step_factor)
    else:
        result = evolve_lindblad(sched, loss=LossModel(kappa), dim=dim, n_target=n_target,
                                 output_points=output_points, step_factor=step_factor)
    return {
        "n": n_target, "kappa": kappa, "T": total_time, "k": stretch,
        "fidelity": result.final_fidelity, "penalty": profile.total,
        "runtime": time.time() - started,
    }


def rabi_tuned_fidelity(path, T_list: Sequence[float], k_list: Sequence[float], loss: LossModel,
                        n_target: int, dim: int, profile=None, jobs: int = 1, grid_points: int = 4096,
                        output_points: int = OUTPUT_POINTS, step_factor: float = STEP_FACTOR) -> RabiScan:
    """Exhaustive (T, k) grid; the best row is the first maximum in grid order."""
    if not len(T_list) or not len(k_list):
        raise ValueError("time and stretch grids must be nonempty")
    profile = profile if profile is not None else path_penalty(path, dim)
    regions = segment_regions(path, profile)
    grid = [(path, profile, regions, float(T), float(k), loss.kappa, n_target, dim,
             grid_points, output_points, step_factor) for T in T_list for k in k_list]
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_scan_point, grid))
    else:
        rows = [_scan_point(job) for job in grid]
    table = pd.DataFrame(rows, columns=["n", "kappa", "T", "k", "fidelity", "penalty", "runtime"])
    best = int(np.argmax(table["fidelity"].to_numpy()))
    return RabiScan(table, float(table["T"][best]), float(table["k"][best]), float(table["fidelity"][best]))
