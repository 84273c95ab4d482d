"""
Schedule Builder
Turns a path and its penalty profile into time-domain controls with the saturated-penalty law
t(s) = T/I * int_0^s Q ds', optionally stretching the time spent in region B by a factor k.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd

from .model import DriveKind, DrivePoint
from .path_optimizer import ParamPath, RegionLabels, segment_regions
from .penalty import PenaltyProfile

logger = logging.getLogger(__name__)

MIN_ARC_SAMPLES = 2000
DEFAULT_GRID_POINTS = 4096


@dataclass(frozen=True, eq=False)
class TimedSchedule:
    """Controls on a uniform time grid plus the exact cell-level time map.

    t_bounds/s_bounds are the piecewise-linear t(s) knots; cell_q is the
    penalty density on each interval between consecutive knots.
    """

    times: np.ndarray
    deltas: np.ndarray
    betas: np.ndarray
    arc: np.ndarray
    labels: Optional[np.ndarray]
    total_time: float
    stretch: float
    total_penalty: float
    t_bounds: np.ndarray
    s_bounds: np.ndarray
    cell_q: np.ndarray
    cell_labels: Optional[np.ndarray]
    n_target: Optional[int] = None
    drive_kind: DriveKind = DriveKind.LINEAR

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def start(self) -> DrivePoint:
        return DrivePoint(self.deltas[0], self.betas[0])

    @property
    def end(self) -> DrivePoint:
        return DrivePoint(self.deltas[-1], self.betas[-1])

    def controls(self) -> np.ndarray:
        """(n_times, 2) array of (delta, beta)"""
        return np.column_stack((self.deltas, self.betas))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times, "delta": self.deltas, "beta": self.betas, "s": self.arc})
        if self.labels is not None:
            frame["region"] = self.labels
        return frame


def _refined_cells(profile: PenaltyProfile, min_cells: int):
    """Subdivide the profile cells so the arc grid has at least min_cells intervals"""
    per_cell = max(1, int(math.ceil(min_cells / len(profile))))
    starts, widths = profile.cell_edges[:-1], profile.weights
    fractions = np.arange(per_cell) / per_cell
    s_lower = (starts[:, None] + widths[:, None] * fractions[None, :]).ravel()
    s_bounds = np.append(s_lower, profile.cell_edges[-1])
    return s_bounds, np.repeat(profile.q_vals, per_cell), per_cell


def build_schedule(path: ParamPath, profile: PenaltyProfile, total_time: float, stretch: float = 1.0,
                   regions: Optional[RegionLabels] = None, grid_points: int = DEFAULT_GRID_POINTS,
                   min_cells: int = MIN_ARC_SAMPLES) -> TimedSchedule:
    """Saturated-penalty timing: dt = (T/I) Q ds, region B cells weighted by the stretch factor"""
    if not total_time > 0:
        raise ValueError(f"total time must be positive, got {total_time}")
    if stretch < 1:
        raise ValueError(f"stretch factor must be >= 1, got {stretch}")
    if grid_points < 2:
        raise ValueError(f"grid_points must be >= 2, got {grid_points}")
    total_penalty = profile.total
    if not total_penalty > 0:
        raise ValueError("path has zero total penalty; the time law cannot be normalized")
    if abs(profile.arc_length - path.arc_length) > 1e-9 * max(1.0, path.arc_length):
        raise ValueError("penalty profile does not belong to this path")
    regions = regions if regions is not None else segment_regions(path, profile)

    s_bounds, cell_q, per_cell = _refined_cells(profile, min_cells)
    cell_labels = np.repeat(regions.labels, per_cell)
    factor = np.where(cell_labels == "B", float(stretch), 1.0)
    weight = cell_q * np.diff(s_bounds) * factor
    cumulative = np.concatenate(([0.0], np.cumsum(weight)))
    t_bounds = total_time * cumulative / cumulative[-1]
    t_bounds[-1] = total_time

    times = np.linspace(0.0, total_time, grid_points)
    arc = _arc_at(times, t_bounds, s_bounds)
    deltas, betas = path.point_at(arc)
    labels = regions.at_arc(profile, arc)
    logger.info("schedule: T=%.4g k=%.3g I=%.6g, %d time samples", total_time, stretch, total_penalty, grid_points)
    return TimedSchedule(
        times=times, deltas=deltas, betas=betas, arc=arc, labels=labels,
        total_time=float(total_time), stretch=float(stretch), total_penalty=total_penalty,
        t_bounds=t_bounds, s_bounds=s_bounds, cell_q=cell_q, cell_labels=cell_labels,
        n_target=path.n_target,
    )


def _arc_at(t, t_bounds: np.ndarray, s_bounds: np.ndarray) -> np.ndarray:
    """Inverse of the monotone time map; zero-penalty stretches are crossed instantly."""
    t_unique, first = np.unique(t_bounds, return_index=True)
    s_unique = s_bounds[first]
    s_unique[-1] = s_bounds[-1]
    return np.interp(t, t_unique, s_unique)


def static_schedule(point: DrivePoint, total_time: float, grid_points: int = 2) -> TimedSchedule:
    """Constant controls for the whole run"""
    if not total_time > 0:
        raise ValueError(f"total time must be positive, got {total_time}")
    times = np.linspace(0.0, total_time, grid_points)
    ones = np.ones(grid_points)
    return TimedSchedule(
        times=times, deltas=point.delta * ones, betas=point.beta * ones, arc=np.zeros(grid_points),
        labels=None, total_time=float(total_time), stretch=1.0, total_penalty=0.0,
        t_bounds=np.array([0.0, total_time]), s_bounds=np.zeros(2), cell_q=np.zeros(1), cell_labels=None,
    )


def controls_at(sched: TimedSchedule, t: float) -> DrivePoint:
    """Piecewise-linear interpolation between time samples"""
    if t < 0 or t > sched.total_time:
        raise ValueError(f"time {t} outside schedule range [0, {sched.total_time}]")
    return DrivePoint(float(np.interp(t, sched.times, sched.deltas)),
                      max(0.0, float(np.interp(t, sched.times, sched.betas))))


def arc_at_time(sched: TimedSchedule, t) -> np.ndarray:
    return _arc_at(np.asarray(t, dtype=float), sched.t_bounds, sched.s_bounds)


def time_at_arc(sched: TimedSchedule, s) -> np.ndarray:
    return np.interp(np.asarray(s, dtype=float), sched.s_bounds, sched.t_bounds)


def instantaneous_penalty(sched: TimedSchedule) -> np.ndarray:
    """P(t) = (ds/dt) Q per arc cell; NaN on cells crossed in zero time"""
    dt = np.diff(sched.t_bounds)
    ds = np.diff(sched.s_bounds)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(dt > 0, sched.cell_q * ds / dt, np.nan)


def dwell_fractions(sched: TimedSchedule) -> Dict[str, float]:
    """Fraction of the total time spent in each region"""
    if sched.cell_labels is None:
        return {}
    dt = np.diff(sched.t_bounds)
    return {region: float(dt[sched.cell_labels == region].sum() / sched.total_time) for region in "ABC"}
