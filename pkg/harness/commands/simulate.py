import logging
from typing import Dict, Optional, Tuple

import pandas as pd

from algorithms.dynamics import LossModel, SimResult, evolve_closed, evolve_lindblad, rabi_tuned_fidelity, wigner_grid
from algorithms.path_optimizer import ParamPath, RegionLabels, segment_regions
from algorithms.penalty import PenaltyProfile, QuadratureRule, path_penalty
from algorithms.schedule import TimedSchedule, build_schedule, dwell_fractions

from ..schemas import ScheduleDocument, SweepRow, RunConfig
from ..storage import ensure_dir, metadata, write_csv, write_document, write_wigner
from .optimize import Report, _silent, load_path

logger = logging.getLogger(__name__)


def prepare(config: RunConfig, path_file: str) -> Tuple[ParamPath, PenaltyProfile, RegionLabels, int]:
    """Load a path document and recompute its penalty profile at the configured quadrature"""
    path, document = load_path(path_file)
    dim = config.target.dim or document.dim
    profile = path_penalty(path, dim, config.optimizer.samples_per_edge, QuadratureRule(config.optimizer.rule),
                           refine=True)
    return path, profile, segment_regions(path, profile), dim


def _schedule(config: RunConfig, path: ParamPath, profile: PenaltyProfile, regions: RegionLabels) -> TimedSchedule:
    return build_schedule(path, profile, config.schedule.total_time, config.schedule.stretch, regions,
                          config.schedule.grid_points)


def cmd_schedule(config: RunConfig, path_file: str, out_dir: Optional[str] = None,
                 report: Report = _silent) -> Dict:
    out = ensure_dir(out_dir or config.output.directory)
    path, profile, regions, _ = prepare(config, path_file)
    sched = _schedule(config, path, profile, regions)
    dwell = dwell_fractions(sched)
    frame = sched.to_frame()
    files = []
    if config.exports.schedule:
        document = ScheduleDocument(
            config_hash=config.config_hash(),
            seed=config.optimizer.seed,
            n_target=path.n_target,
            delta_max=path.delta_max,
            delta_f=path.delta_f,
            total_time=sched.total_time,
            stretch=sched.stretch,
            total_penalty=sched.total_penalty,
            columns=list(frame.columns),
            rows=[tuple(row) for row in frame.itertuples(index=False)],
        )
        files.append(str(write_document(out / "schedule.json", document)))
        files.append(str(write_csv(out / "schedule.csv", frame,
                                   metadata(config, T=sched.total_time, k=sched.stretch))))
        for name in files:
            report(f"✅ Saved: {name}")
    report(f"⏱️  T={sched.total_time:g}, k={sched.stretch:g}; dwell A/B/C = "
           f"{dwell['A']:.3f}/{dwell['B']:.3f}/{dwell['C']:.3f}")
    return {"total_time": sched.total_time, "stretch": sched.stretch, "total_penalty": sched.total_penalty,
            "dwell_fractions": dwell, "files": files}


def _run(config: RunConfig, sched: TimedSchedule, dim: int) -> SimResult:
    sim = config.simulation
    kwargs = dict(dim=dim, n_target=sched.n_target, output_points=sim.output_points, step_factor=sim.step_factor,
                  snapshot_fractions=sim.snapshot_fractions, verify=sim.verify_steps)
    if config.loss.kappa == 0:
        return evolve_closed(sched, **kwargs)
    return evolve_lindblad(sched, loss=LossModel(config.loss.kappa), **kwargs)


def _export_wigner(config: RunConfig, result: SimResult, out, report: Report) -> Dict[float, float]:
    origin = {}
    for fraction, state in result.snapshots.items():
        grid = wigner_grid(state, resolution=config.simulation.wigner_resolution)
        origin[fraction] = grid.value_at(0.0, 0.0)
        name = write_wigner(out / f"wigner_t{fraction:.2f}.txt", grid,
                            metadata(config, t_over_T=fraction, kappa=config.loss.kappa))
        report(f"✅ Saved: {name}")
    return origin


def cmd_simulate(config: RunConfig, path_file: str, out_dir: Optional[str] = None,
                 report: Report = _silent, wigner_only: bool = False) -> Dict:
    """Propagate along the configured schedule and export trajectory and Wigner snapshots"""
    out = ensure_dir(out_dir or config.output.directory)
    path, profile, regions, dim = prepare(config, path_file)
    sched = _schedule(config, path, profile, regions)
    report(f"🔬 Simulating |{path.n_target}>: T={sched.total_time:g}, k={sched.stretch:g}, "
           f"kappa={config.loss.kappa:g}, dim={dim}")
    result = _run(config, sched, dim)

    files = []
    if config.exports.trajectory and not wigner_only:
        files.append(str(write_csv(out / "trajectory.csv", result.to_frame(),
                                   metadata(config, T=sched.total_time, k=sched.stretch, kappa=config.loss.kappa))))
        report(f"✅ Saved: {files[-1]}")
    origin = {}
    if config.exports.wigner or wigner_only:
        origin = _export_wigner(config, result, out, report)
    report(f"🎯 Final fidelity F = {result.final_fidelity:.6f}")
    return {"fidelity": result.final_fidelity, "diagnostics": result.diagnostics,
            "wigner_origin": origin, "files": files}


def cmd_wigner(config: RunConfig, path_file: str, out_dir: Optional[str] = None,
               report: Report = _silent) -> Dict:
    return cmd_simulate(config, path_file, out_dir, report, wigner_only=True)


def cmd_sweep(config: RunConfig, path_file: str, out_dir: Optional[str] = None, jobs: int = 1,
              report: Report = _silent) -> Dict:
    """Scan the (T, k) grid at the configured loss rate and write the table sorted by fidelity"""
    out = ensure_dir(out_dir or config.output.directory)
    path, profile, _, dim = prepare(config, path_file)
    report(f"🔄 Sweeping {len(config.schedule.time_grid)} x {len(config.schedule.stretch_grid)} grid "
           f"for |{path.n_target}> at kappa={config.loss.kappa:g}")
    scan = rabi_tuned_fidelity(path, config.schedule.time_grid, config.schedule.stretch_grid,
                               LossModel(config.loss.kappa), path.n_target, dim, profile=profile, jobs=jobs,
                               grid_points=config.schedule.grid_points,
                               output_points=config.simulation.output_points,
                               step_factor=config.simulation.step_factor)
    rows = [SweepRow(**row).model_dump() for row in scan.table.to_dict(orient="records")]
    table = pd.DataFrame(rows).sort_values("fidelity", ascending=False, kind="mergesort")
    files = []
    if config.exports.sweep_table:
        files.append(str(write_csv(out / "sweep.csv", table, metadata(config, kappa=config.loss.kappa))))
        report(f"✅ Saved: {files[-1]}")
    report(f"🏆 Best F = {scan.best_fidelity:.6f} at T={scan.best_time:g}, k={scan.best_stretch:g}")
    return {"best_time": scan.best_time, "best_stretch": scan.best_stretch,
            "best_fidelity": scan.best_fidelity, "table": table, "files": files}
