import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from algorithms.dynamics import LossModel, rabi_tuned_fidelity
from algorithms.fock_core import default_dimension
from algorithms.spectral import energy_levels

from ..schemas import RunConfig
from ..storage import ConfigError, ensure_dir, metadata, write_csv
from .optimize import Report, _silent, run_optimization

logger = logging.getLogger(__name__)

SQRT_BAND = (0.35, 0.65)
REQUIREMENT_EXPONENT = 1.5


def fit_power_law(ns: Sequence[float], values: Sequence[float]) -> Optional[Dict[str, object]]:
    """Least-squares fit of log(value) = gamma log(n) + c; None for fewer than two distinct n"""
    ns = np.asarray(ns, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.unique(ns).size < 2:
        return None
    x, y = np.log(ns), np.log(values)
    gamma, intercept = np.polyfit(x, y, 1)
    residuals = y - (gamma * x + intercept)
    return {"gamma": float(gamma), "intercept": float(intercept), "residuals": residuals.tolist()}


def requirements_increasing(table: pd.DataFrame) -> bool:
    """chi/kappa non-decreasing in n over the targets that reached the fidelity"""
    reached = table[table["reached"]].sort_values("n")
    return bool(np.all(np.diff(reached["chi_over_kappa"].to_numpy()) >= 0))


def _check_range(n_values: Sequence[int]) -> List[int]:
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values or n_values[0] < 1 or n_values[-1] > 8:
        raise ConfigError(f"photon numbers must lie in [1, 8], got {n_values}")
    return n_values


def _config_for(config: RunConfig, n: int) -> RunConfig:
    copy = config.model_copy(deep=True)
    copy.target.n = n
    return copy


def _optimize_one(config: RunConfig) -> Dict:
    result, spec = run_optimization(config)
    return {"n": spec.n_target, "total_penalty": result.total_penalty, "dim": spec.resolved_dim(),
            "sweeps": result.sweeps, "result": result}


def _optimize_all(config: RunConfig, n_values: List[int], jobs: int) -> List[Dict]:
    configs = [_config_for(config, n) for n in n_values]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(configs))) as pool:
            return list(pool.map(_optimize_one, configs))
    return [_optimize_one(c) for c in configs]


def cmd_scaling(config: RunConfig, n_values: Sequence[int], out_dir: Optional[str] = None, jobs: int = 1,
                report: Report = _silent) -> Dict:
    """Optimize each target and fit I[C_n] against n"""
    n_values = _check_range(n_values)
    out = ensure_dir(out_dir or config.output.directory)
    report(f"📈 Scaling study over n = {n_values}")
    rows = _optimize_all(config, n_values, jobs)
    table = pd.DataFrame([{k: v for k, v in row.items() if k != "result"} for row in rows])
    penalties = table["total_penalty"].to_numpy()
    fit = fit_power_law(table["n"], penalties)
    monotone = bool(np.all(np.diff(penalties) > 0))
    files = [str(write_csv(out / "scaling.csv", table, metadata(config)))]
    report(f"✅ Saved: {files[0]}")
    if fit is None:
        report(f"⚠️  Single target, no fit: I[C] = {penalties[0]:.6g}")
    else:
        report(f"📊 I[C_n] ~ n^{fit['gamma']:.3f} (expected band {SQRT_BAND[0]}..{SQRT_BAND[1]})")
    return {
        "table": table,
        "fit": fit,
        "gamma": None if fit is None else fit["gamma"],
        "within_band": None if fit is None else SQRT_BAND[0] <= fit["gamma"] <= SQRT_BAND[1],
        "monotone": monotone,
        "files": files,
    }


def cmd_requirements(config: RunConfig, n_values: Sequence[int], f_target: float, out_dir: Optional[str] = None,
                     jobs: int = 1, report: Report = _silent) -> Dict:
    """Largest loss rate reaching f_target for each n, scanning the loss grid downward"""
    if not 0 < f_target < 1:
        raise ConfigError(f"target fidelity must lie strictly between 0 and 1, got {f_target}")
    n_values = _check_range(n_values)
    out = ensure_dir(out_dir or config.output.directory)
    kappas = sorted(config.loss.kappa_grid, reverse=True)
    report(f"🧮 Requirements for F >= {f_target} over n = {n_values}, kappa from {kappas[0]:g} down to {kappas[-1]:g}")

    rows = []
    for entry in _optimize_all(config, n_values, jobs):
        result, n = entry["result"], entry["n"]
        threshold, best = None, 0.0
        for kappa in kappas:
            scan = rabi_tuned_fidelity(result.path, config.schedule.time_grid, config.schedule.stretch_grid,
                                       LossModel(kappa), n, entry["dim"], profile=result.profile, jobs=jobs,
                                       grid_points=config.schedule.grid_points,
                                       output_points=config.simulation.output_points,
                                       step_factor=config.simulation.step_factor)
            best = scan.best_fidelity
            logger.info("n=%d kappa=%g best F=%.6f", n, kappa, best)
            if best >= f_target:
                threshold = kappa
                break
        reached = threshold is not None
        bound_kappa = threshold if reached else kappas[-1]
        chi_over_kappa = math.inf if bound_kappa == 0 else 1.0 / bound_kappa
        rows.append({"n": n, "reached": reached, "kappa": bound_kappa, "chi_over_kappa": chi_over_kappa,
                     "best_fidelity": best})
        verdict = f"chi/kappa >= {chi_over_kappa:g}" if reached else f"not reached; chi/kappa > {chi_over_kappa:g}"
        report(f"   n={n}: {verdict}")

    table = pd.DataFrame(rows)
    reached_rows = table[table["reached"]]
    finite = reached_rows[np.isfinite(reached_rows["chi_over_kappa"])]
    fit = fit_power_law(finite["n"], finite["chi_over_kappa"]) if len(finite) else None
    files = [str(write_csv(out / "requirements.csv", table, metadata(config, f_target=f_target)))]
    report(f"✅ Saved: {files[0]}")
    if fit is not None:
        report(f"📊 (chi/kappa)_n ~ n^{fit['gamma']:.3f} (reference exponent {REQUIREMENT_EXPONENT})")
    return {"table": table, "fit": fit, "exponent": None if fit is None else fit["gamma"],
            "increasing": requirements_increasing(table), "files": files}


def cmd_spectrum(config: RunConfig, delta_range=(-6.0, 2.0), points: int = 321, beta: float = 0.0,
                 n_levels: int = 8, out_dir: Optional[str] = None, report: Report = _silent) -> Dict:
    """Lowest levels over a detuning sweep at fixed drive"""
    if beta < 0:
        raise ConfigError(f"drive strength must be non-negative, got {beta}")
    out = ensure_dir(out_dir or config.output.directory)
    dim = config.target.dim or default_dimension(config.target.n)
    deltas = np.linspace(delta_range[0], delta_range[1], points)
    table = energy_levels(deltas, beta, dim, n_levels)
    files = [str(write_csv(out / "spectrum.csv", table, metadata(config, beta=beta, dim=dim)))]
    report(f"✅ Saved: {files[0]}")
    return {"table": table, "files": files}
