"""The `coneflow` command line: run experiments, verify cases, sample and spectra."""

import argparse
import sys

from pydantic import ValidationError
from rich.console import Console
from rich.table import Table
from termcolor import colored

from ..core.errors import ConfigValidationError, ConeflowError, MeshValidationError
from ..core.types import *
from ..exemplars import EXEMPLARS
from .cases import VERIFY_CASES, CaseResult
from .experiment import ExperimentConfig, load_experiment, run_experiment

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    """The argument parser with one subcommand per entry point."""
    parser = argparse.ArgumentParser(prog="coneflow", description=__doc__)
    parser.add_argument("--output", "-o", type=str, default=None, help="artifact directory")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment file")
    run.add_argument("--config", "-c", type=str, required=True)

    verify = sub.add_parser("verify", help="run verification cases")
    verify.add_argument("--case", type=str, action="append", default=None, help="repeatable; all cases when omitted")
    verify.add_argument("--lambda", dest="lam", type=float, default=3.0)

    slag = sub.add_parser("slag", help="sample a torus-invariant special Lagrangian")
    slag.add_argument("--n", type=int, default=2)
    slag.add_argument("--c", type=float, nargs="+", default=[0.0])
    slag.add_argument("--cprime", type=float, default=1.0)
    slag.add_argument("--count", type=int, default=1000)
    slag.add_argument("--part", choices=["auto", "re", "im"], default="auto")
    slag.add_argument("--phase", type=float, default=0.0)
    slag.add_argument("--seed", type=int, default=None)

    spectrum = sub.add_parser("spectrum", help="deformation dimension of a Legendrian link")
    spectrum.add_argument("--sigma", type=str, required=True)
    spectrum.add_argument("--n", type=int, default=2)
    spectrum.add_argument("--tol", type=float, default=None)
    spectrum.add_argument("--lumped", action="store_true", default=None)

    sub.add_parser("list-cases", help="list exemplars and verification cases")
    return parser


def _experiment(args: argparse.Namespace) -> ExperimentConfig:
    if args.command == "run":
        return load_experiment(args.config)
    if args.command == "verify":
        return ExperimentConfig(
            pipeline="verify-all", verify={"cases": args.case or list(VERIFY_CASES), "lam": args.lam}
        )
    if args.command == "slag":
        return ExperimentConfig(
            pipeline="slag",
            seed=args.seed,
            slag={
                "n": args.n,
                "c": args.c,
                "c_prime": args.cprime,
                "count": args.count,
                "part": args.part,
                "phase": args.phase,
            },
        )
    return ExperimentConfig(
        pipeline="spectrum",
        spectrum={"sigma": args.sigma, "n": args.n, "tolerance": args.tol, "lumped": args.lumped},
    )


def print_cases() -> None:
    """Print the exemplars and verification cases as a table."""
    table = Table(title="coneflow cases")
    table.add_column("kind", style="cyan")
    table.add_column("selector", style="green")
    table.add_column("description")
    for name, description in EXEMPLARS.items():
        table.add_row("exemplar", name, description)
    for name, (description, _) in VERIFY_CASES.items():
        table.add_row("verify", name, description)
    Console().print(table)


def print_verdicts(cases: Dict[str, Any]) -> None:
    """Print one coloured PASS/FAIL line per verification case."""
    for name, payload in cases.items():
        result = CaseResult(**payload)
        verdict = colored("PASS", "green") if result.passed else colored("FAIL", "red")
        print(f"{verdict} {name}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the `coneflow` script; returns the exit code."""
    args = build_parser().parse_args(argv)
    if args.command == "list-cases":
        print_cases()
        return EXIT_OK
    try:
        exp = _experiment(args)
        summary, out = run_experiment(exp, args.output)
    except (ConfigValidationError, MeshValidationError, ValidationError) as e:
        logger.error(f"invalid configuration: {e}")
        return EXIT_INVALID
    except ConeflowError as e:
        logger.error(f"numerical failure: {e}")
        return EXIT_NUMERICAL
    logger.info(f"wrote {len(out.files)} artifacts to {out.folder}")
    if "cases" in summary:
        print_verdicts(summary["cases"])
        if not summary["passed"]:
            return EXIT_NUMERICAL
    if summary.get("rescale_passed") is False:
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
