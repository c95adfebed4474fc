"""
Command-line interface.

    python -m experiments solve      --layers 4 --p 11 --N 10 [--field-csv PATH]
    python -m experiments sweep-n    --layers 4 --p 11 --values 2 4 8 12 30
    python -m experiments sweep-n    --layers 4 --p 11 --n-over-kr 0.5 1 1.2 2
    python -m experiments sweep-h    --p 7 --N 30 --layer-values 3 4 5
    python -m experiments sweep-p    --layers 4 --N 30 --p-values 5 7 9 11 13
    python -m experiments sweep-hp   --N 30 --layer-values 3 4 5 --p-values 5 7 9
    python -m experiments compare-bc --layers 4 --p 11 --N 12
    python -m experiments selftest

Every subcommand accepts --config FILE.json; flags override its fields.
Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 DOF cap exceeded.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from config.settings import PROJECT_ROOT
from experiments import metrics
from experiments.config import ExperimentConfig, SweepAxis
from experiments.runner import ExperimentRunner
from logging_config.logger import get_logger, set_level
from pwdg.exceptions import DofCapExceededError, NonNegativityViolation, SingularSystemError
from reference.l2_error import ZeroReferenceNormError
from reference.truncated import ModeResonanceError

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_DOF_CAP = 4

SUBCOMMAND_AXES = {
    "solve": SweepAxis.NONE,
    "sweep-n": SweepAxis.N,
    "sweep-h": SweepAxis.H,
    "sweep-p": SweepAxis.P,
    "sweep-hp": SweepAxis.HP,
    "compare-bc": SweepAxis.BC,
}


def _add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="JSON experiment configuration")
    parser.add_argument("--name", help="Output file prefix")
    parser.add_argument("--k", type=float, help="Wavenumber")
    parser.add_argument("--a", type=float, help="Scatterer radius")
    parser.add_argument("--R", type=float, help="Artificial boundary radius")
    parser.add_argument("--angle", type=float, help="Incident angle in radians")
    parser.add_argument("--layers", type=int, help="Radial mesh layers")
    parser.add_argument("--sectors", type=int, help="Angular mesh sectors (default balanced)")
    parser.add_argument("--h-target", type=float, help="Largest admissible mesh width")
    parser.add_argument("--p", type=int, help="Plane waves per element")
    parser.add_argument("--N", help="DtN truncation order or 'auto'")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--bc", choices=["dtn", "impedance"], help="Artificial boundary condition")
    parser.add_argument("--n-exact", type=int, help="Mie series truncation order")
    parser.add_argument("--output-dir", type=Path)
    parser.add_argument("--workers", type=int, help="Concurrent sweep points")
    parser.add_argument("--no-timings", action="store_true", help="Write seconds=0")
    parser.add_argument("--no-svg", action="store_true", help="Skip the SVG plot")
    parser.add_argument("--metrics-file", type=Path, help="Write Prometheus metrics here")
    parser.add_argument("--verbose", action="store_true", help="DEBUG logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m experiments",
        description="PWDG scattering experiments with a DtN or impedance artificial boundary.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve = subparsers.add_parser("solve", help="Single solve")
    _add_common_arguments(solve)
    solve.add_argument("--field-csv", type=Path, help="Write |u_h|, Re u_h, |u|, Re u samples")

    sweep_n = subparsers.add_parser("sweep-n", help="Vary the DtN truncation order")
    _add_common_arguments(sweep_n)
    sweep_n.add_argument("--values", type=int, nargs="+", help="Truncation orders")
    sweep_n.add_argument("--n-over-kr", type=float, nargs="+", help="Orders as ratios of kR")

    sweep_h = subparsers.add_parser("sweep-h", help="Uniform mesh refinement")
    _add_common_arguments(sweep_h)
    sweep_h.add_argument("--layer-values", type=int, nargs="+", help="Radial layer counts")

    sweep_p = subparsers.add_parser("sweep-p", help="Vary the plane waves per element")
    _add_common_arguments(sweep_p)
    sweep_p.add_argument("--p-values", type=int, nargs="+")

    sweep_hp = subparsers.add_parser("sweep-hp", help="One h sweep per p")
    _add_common_arguments(sweep_hp)
    sweep_hp.add_argument("--layer-values", type=int, nargs="+")
    sweep_hp.add_argument("--p-values", type=int, nargs="+")

    compare = subparsers.add_parser("compare-bc", help="DtN against impedance on the same meshes")
    _add_common_arguments(compare)
    compare.add_argument("--layer-values", type=int, nargs="+", help="Optional refinement levels")

    selftest = subparsers.add_parser("selftest", help="Run the fast test suites")
    selftest.add_argument("pytest_args", nargs="*", help="Extra pytest arguments")
    return parser


def _parse_order(value: str):
    return value if value == "auto" else int(value)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """
    Merge --config and flag overrides into a validated ExperimentConfig.

    Raises:
        ValidationError: Invalid merged configuration
    """
    data: Dict[str, Any] = json.loads(args.config.read_text()) if args.config else {}
    problem = dict(data.get("problem", {}))
    flux = dict(data.get("flux", {}))

    for flag, key in (("k", "k"), ("a", "a"), ("R", "R"), ("angle", "incident_angle")):
        if getattr(args, flag) is not None:
            problem[key] = getattr(args, flag)
    for key in ("alpha", "beta", "delta"):
        if getattr(args, key) is not None:
            flux[key] = getattr(args, key)
    data["problem"] = problem
    if flux:
        data["flux"] = flux

    overrides = {
        "name": args.name,
        "n_layers": args.layers,
        "n_sectors": args.sectors,
        "h_target": args.h_target,
        "p": args.p,
        "N": _parse_order(args.N) if args.N is not None else None,
        "bc": args.bc,
        "n_exact": args.n_exact,
        "output_dir": str(args.output_dir) if args.output_dir else None,
        "workers": args.workers,
        "n_values": getattr(args, "values", None),
        "n_over_kr": getattr(args, "n_over_kr", None),
        "layers": getattr(args, "layer_values", None),
        "p_values": getattr(args, "p_values", None),
    }
    data.update({key: value for key, value in overrides.items() if value is not None})
    if args.no_timings:
        data["record_timings"] = False
    if args.no_svg:
        data["write_svg"] = False
    data["sweep"] = SUBCOMMAND_AXES[args.command].value
    return ExperimentConfig.model_validate(data)


def run_selftest(pytest_args: List[str]) -> int:
    import pytest

    tests_dir = PROJECT_ROOT / "tests"
    return int(pytest.main([str(tests_dir), "-c", str(tests_dir / "pytest.ini"), "-m", "not slow", *pytest_args]))


def run_command(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    runner = ExperimentRunner(config)
    result = runner.run()
    if args.command == "solve" and args.field_csv is not None:
        runner.write_field(result.solutions[0], args.field_csv)
    for row in result.rows:
        print(
            f"h={row.h:.4f} p={row.p} N={row.N} bc={row.bc.value} "
            f"err={row.err_vs_exact:.3e} err_trunc={row.err_vs_truncated:.3e}"
        )
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "selftest":
        return run_selftest(args.pytest_args)
    if args.verbose:
        set_level("DEBUG")

    try:
        return run_command(args)
    except DofCapExceededError as e:
        logger.error(f"DOF cap exceeded: {e}")
        metrics.record_failure("dof_cap")
        return EXIT_DOF_CAP
    except (SingularSystemError, ModeResonanceError, NonNegativityViolation, ZeroReferenceNormError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, OSError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    finally:
        if getattr(args, "metrics_file", None) is not None:
            metrics.write_metrics(args.metrics_file)


if __name__ == "__main__":
    sys.exit(main())
