"""
Command-line entry point.

Example:
  python -m harness optimize --config config.json --seed 1 --out results
  python -m harness simulate --path results/path.json --out results
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from pydantic import ValidationError

from algorithms.exceptions import ConvergenceError, DegeneratePointError, InfeasiblePathError

from .commands.optimize import cmd_optimize
from .commands.simulate import cmd_schedule, cmd_simulate, cmd_sweep, cmd_wigner
from .commands.studies import cmd_requirements, cmd_scaling, cmd_spectrum
from .schemas import RunConfig
from .settings import resolve_output_dir
from .storage import ConfigError, StorageError, load_config, write_config_template

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 3
EXIT_INFEASIBLE = 4
EXIT_NUMERICAL = 5
EXIT_IO = 6

PATH_COMMANDS = ("schedule", "simulate", "wigner", "sweep")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON run configuration (defaults when omitted)")
    common.add_argument("--out", default=None, help="Output directory (overrides FOCK_OUTPUT_DIR and the config)")
    common.add_argument("--seed", type=int, default=None, help="Optimizer seed override")
    common.add_argument("--dim", type=int, default=None, help="Truncation dimension override")
    common.add_argument("--n", type=int, default=None, help="Target photon number override")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                        help="Workers for grid scans and penalty sampling (default: CPU count)")
    common.add_argument("--quiet", action="store_true", help="Only warnings and errors")

    ap = argparse.ArgumentParser(prog="harness", description="Adiabatic Fock-state generation in a driven Kerr cavity")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("optimize", parents=[common], help="Optimize the drive path for |n>")
    for name, text in (("schedule", "Time the path with the saturated-penalty law"),
                       ("simulate", "Propagate along the schedule and export the trajectory"),
                       ("wigner", "Export Wigner grids at the snapshot times"),
                       ("sweep", "Scan total time and stretch factor at fixed loss")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--path", default=None, help="Path document (default: <out>/path.json)")

    p = sub.add_parser("scaling", parents=[common], help="Total penalty against photon number")
    p.add_argument("--n-values", type=int, nargs="+", default=[1, 2, 3, 4, 5, 6])

    p = sub.add_parser("requirements", parents=[common], help="Loss rate needed for a target fidelity")
    p.add_argument("--n-values", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--fidelity", type=float, default=0.9)

    p = sub.add_parser("spectrum", parents=[common], help="Lowest levels over a detuning sweep")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--delta-min", type=float, default=-6.0)
    p.add_argument("--delta-max", type=float, default=2.0)
    p.add_argument("--points", type=int, default=321)
    p.add_argument("--levels", type=int, default=8)

    sub.add_parser("template", parents=[common], help="Write config.json and config.schema.json")
    return ap


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """CLI flags on top of the file; assignment re-validates each field"""
    config = config.model_copy(deep=True)
    if args.seed is not None:
        config.optimizer.seed = args.seed
    if args.dim is not None:
        config.target.dim = args.dim
    if args.n is not None:
        config.target.n = args.n
    config.output.directory = resolve_output_dir(config.output.directory, args.out)
    return config


def _dispatch(args: argparse.Namespace, config: RunConfig, report) -> dict:
    out = config.output.directory
    if args.command in PATH_COMMANDS:
        path_file = args.path or f"{out}/path.json"
        if args.command == "schedule":
            return cmd_schedule(config, path_file, out, report)
        if args.command == "simulate":
            return cmd_simulate(config, path_file, out, report)
        if args.command == "wigner":
            return cmd_wigner(config, path_file, out, report)
        return cmd_sweep(config, path_file, out, args.jobs, report)
    if args.command == "optimize":
        return cmd_optimize(config, out, args.jobs, report)
    if args.command == "scaling":
        return cmd_scaling(config, args.n_values, out, args.jobs, report)
    if args.command == "requirements":
        return cmd_requirements(config, args.n_values, args.fidelity, out, args.jobs, report)
    if args.command == "spectrum":
        return cmd_spectrum(config, (args.delta_min, args.delta_max), args.points, args.beta,
                            args.levels, out, report)
    files = write_config_template(out, config)
    for name in files.values():
        report(f"✅ Saved: {name}")
    return {"files": [str(name) for name in files.values()]}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    report = (lambda _message: None) if args.quiet else print

    try:
        config = apply_overrides(load_config(args.config), args)
        _dispatch(args, config, report)
    except (ConfigError, ValidationError) as exc:
        print(f"❌ Configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasiblePathError as exc:
        print(f"❌ Infeasible path: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConvergenceError, DegeneratePointError) as exc:
        diagnostics = getattr(exc, "diagnostics", {})
        print(f"❌ Numerical failure: {exc} {diagnostics or ''}".rstrip(), file=sys.stderr)
        return EXIT_NUMERICAL
    except StorageError as exc:
        print(f"❌ IO error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        logger.exception("command %s failed", args.command)
        print(f"❌ Error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
