import logging
from typing import Callable, Dict, Optional, Tuple

import pandas as pd

from algorithms.path_optimizer import (OptimizationResult, ParamPath, PathOptimizer, SearchOptions, TargetSpec,
                                       seed_path, segment_regions, vertex_regions)
from algorithms.penalty import QuadratureRule

from ..schemas import PathDocument, RunConfig
from ..storage import ensure_dir, load_path_document, metadata, write_csv, write_document

logger = logging.getLogger(__name__)

Report = Callable[[str], None]


def _silent(_message: str):
    pass


def target_spec(config: RunConfig) -> TargetSpec:
    return TargetSpec(
        n_target=config.target.n,
        delta_max=config.target.delta_max,
        dim=config.target.dim,
        n_vertices=config.optimizer.vertices,
    )


def search_options(config: RunConfig, jobs: int = 1) -> SearchOptions:
    opt = config.optimizer
    return SearchOptions(
        seed=opt.seed,
        max_sweeps=opt.max_sweeps,
        min_sweeps=opt.min_sweeps,
        sigma0=opt.sigma0,
        sigma_decay=opt.sigma_decay,
        rel_tol=opt.rel_tol,
        samples_per_edge=opt.samples_per_edge,
        rule=QuadratureRule(opt.rule),
        reweight=opt.reweight,
        jobs=jobs,
    )


def run_optimization(config: RunConfig, jobs: int = 1) -> Tuple[OptimizationResult, TargetSpec]:
    spec = target_spec(config)
    result = PathOptimizer(spec, search_options(config, jobs)).optimize(seed_path(spec))
    return result, spec


def load_path(path_file: str) -> Tuple[ParamPath, PathDocument]:
    document = load_path_document(path_file)
    return ParamPath(document.vertices, document.delta_max, document.n_target), document


def cmd_optimize(config: RunConfig, out_dir: Optional[str] = None, jobs: int = 1,
                 report: Report = _silent) -> Dict:
    """Optimize the path for the configured target and write the path document and penalty profile"""
    out = ensure_dir(out_dir or config.output.directory)
    report(f"🚀 Optimizing path for |{config.target.n}> (delta_max={config.target.delta_max}, "
           f"seed={config.optimizer.seed})")
    result, spec = run_optimization(config, jobs)
    dim = spec.resolved_dim()
    regions = segment_regions(result.path, result.profile)

    files = []
    if config.exports.path:
        document = PathDocument(
            config_hash=config.config_hash(),
            seed=config.optimizer.seed,
            n_target=spec.n_target,
            delta_max=spec.delta_max,
            delta_f=spec.delta_f,
            dim=dim,
            total_penalty=result.total_penalty,
            search=search_options(config).to_dict(),
            vertices=[tuple(v) for v in result.path.vertices.tolist()],
            regions=vertex_regions(result.path, result.profile, regions),
        )
        files.append(str(write_document(out / "path.json", document)))
        profile_frame = _profile_frame(result, regions)
        files.append(str(write_csv(out / "profile.csv", profile_frame,
                                   metadata(config, total_penalty=repr(result.total_penalty)))))
        for name in files:
            report(f"✅ Saved: {name}")

    report(f"📊 I[C] = {result.total_penalty:.6g} after {result.sweeps} sweeps "
           f"({result.accepted_moves} moves accepted, {result.computation_time:.1f}s)")
    return {
        "method": result.method,
        "n_target": spec.n_target,
        "delta_f": spec.delta_f,
        "dim": dim,
        "total_penalty": result.total_penalty,
        "initial_penalty": result.initial_penalty,
        "sweeps": result.sweeps,
        "region_counts": regions.counts(),
        "files": files,
    }


def _profile_frame(result: OptimizationResult, regions) -> pd.DataFrame:
    profile = result.profile
    return pd.DataFrame({
        "arc_s": profile.arc_s,
        "delta": profile.deltas,
        "beta": profile.betas,
        "q": profile.q_vals,
        "weight": profile.weights,
        "region": regions.labels,
        "analytic": profile.analytic,
    })
