import argparse
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np
from InquirerPy import inquirer

from backend.cost_model import CostModel, flop_check
from backend.matrix_market import read_matrix_market, read_vector
from backend.solver import run
from backend.solver_config import SolverConfig
from backend.sparse_matrix import SparseRowMatrix
from backend.tomo_bench import TomoProblem, export_problem, make_tomo_problem
from backend.trace import IterationTrace, write_compare_csv, write_trace_csv
from common.errors import KaczmarzError
from common.types import Ell, FlopReport, Problem, Vector
from common.variants import Variant, Weighting

LOG: logging.Logger = logging.getLogger(__name__)


def parse_ell(value: str) -> Ell:
    """Parse a window capacity, where 'all' selects the unbounded window."""
    if value.strip().lower() == "all":
        return None
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid window length '{value}', expected an integer or 'all'") from None


def parse_variants(value: str) -> list[Variant]:
    names: list[str] = [name.strip() for name in value.split(",") if name.strip()]
    if not names:
        raise argparse.ArgumentTypeError("the variant list is empty")
    try:
        return [Variant(name) for name in names]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"{e}; choose from {', '.join(Variant)}") from None


def parse_ells(value: str) -> list[Ell]:
    names: list[str] = [name.strip() for name in value.split(",") if name.strip()]
    if not names:
        raise argparse.ArgumentTypeError("the window length list is empty")
    return [parse_ell(name) for name in names]


def _add_problem_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--matrix", help="MatrixMarket file holding the system matrix A")
    parser.add_argument("--rhs", help="Vector file holding the right-hand side b")
    parser.add_argument("--solution", help="Optional vector file holding a known solution x*, used for errors")
    parser.add_argument("--tomo", type=int, metavar="N", help="Generate an N x N parallel-beam tomography problem")


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-cycles", type=int, default=100, help="Maximum number of recorded cycles")
    parser.add_argument("--tol", type=float, default=1e-12, help="Relative stopping tolerance")
    parser.add_argument("--seed", type=int, default=0, help="Seed of the row shuffle and random epochs")
    parser.add_argument("--weighting", type=Weighting, choices=list(Weighting), default=Weighting.UNIFORM,
                        help="Row sampling scheme of the random variants")
    parser.add_argument("--no-shuffle", action="store_true", default=False, help="Keep the given row order")
    parser.add_argument("--trace-out", help="Destination CSV file of the trace")


def build_parser() -> argparse.ArgumentParser:
    parser: argparse.ArgumentParser = argparse.ArgumentParser(
        prog="kaczmarz", description="Kaczmarz solvers with line-search and affine acceleration",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    subparsers = parser.add_subparsers(dest="command", required=True)

    solve = subparsers.add_parser("solve", help="Run one solver variant and write its trace",
                                  formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_problem_arguments(solve)
    solve.add_argument("--variant", type=Variant, choices=list(Variant), default=Variant.K, help="Solver variant")
    solve.add_argument("--ell", type=parse_ell, default=10, help="Window length of the affine variants, or 'all'")
    _add_config_arguments(solve)
    solve.set_defaults(handler=cmd_solve)

    compare = subparsers.add_parser("compare", help="Run several variants and write one combined trace",
                                    formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_problem_arguments(compare)
    compare.add_argument("--variants", type=parse_variants, required=True, help="Comma separated variant list")
    compare.add_argument("--ells", type=parse_ells, default=[10], help="Comma separated window lengths")
    compare.add_argument("--jobs", type=int, default=1, help="Number of configurations run concurrently")
    _add_config_arguments(compare)
    compare.set_defaults(handler=cmd_compare)

    generate = subparsers.add_parser("generate", help="Export a tomography problem as MatrixMarket and vectors",
                                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    generate.add_argument("--tomo", type=int, metavar="N", required=True, help="Grid size N")
    generate.add_argument("--rays", type=int, help="Rays per angle, round(√2 N) when omitted")
    generate.add_argument("--out", required=True, help="Destination directory")
    generate.set_defaults(handler=cmd_generate)
    return parser


def load_problem(args: argparse.Namespace) -> Problem:
    """Generate or read the system described by the problem flags."""
    if args.tomo is not None:
        if args.matrix or args.rhs:
            raise ValueError("Use either --tomo or --matrix/--rhs, not both.")
        problem: TomoProblem = make_tomo_problem(args.tomo)
        return problem.matrix, problem.b, problem.x_star
    if not args.matrix or not args.rhs:
        raise ValueError("A problem is required: pass --tomo N or both --matrix and --rhs.")
    matrix: SparseRowMatrix = read_matrix_market(args.matrix)
    b: Vector = read_vector(args.rhs)
    x_star: Optional[Vector] = read_vector(args.solution) if args.solution else None
    return matrix, b, x_star


def _config(args: argparse.Namespace, variant: Variant, ell: Ell) -> SolverConfig:
    return SolverConfig(variant=variant, ell=ell, max_cycles=args.max_cycles, tol=args.tol, seed=args.seed,
                        weighting=args.weighting, shuffle_rows=not args.no_shuffle)


def _log_summary(trace: IterationTrace) -> None:
    error: str = "unknown" if trace.final_error is None else f"{trace.final_error:.6e}"
    LOG.info(f"{trace.label()}: status={trace.status}, cycles={len(trace.records)}, final error={error}, "
             f"flops={trace.total_flops}, breakdown resets={trace.breakdown_resets}")


def cmd_solve(args: argparse.Namespace) -> int:
    """Run one configuration and write its trace CSV."""
    matrix, b, x_star = load_problem(args)
    cfg: SolverConfig = _config(args, args.variant, args.ell)
    LOG.info(f"Solver configuration: {cfg.to_dict()}")
    trace: IterationTrace = run(matrix, b, np.zeros(matrix.n_cols), x_star, cfg)
    if args.trace_out:
        write_trace_csv(trace, args.trace_out)
        LOG.info(f"Trace written to {args.trace_out}.")
    _log_summary(trace)
    report: FlopReport = flop_check(trace, cfg, matrix)
    LOG.info(f"Flop model: {report['checked_cycles']} cycles checked, "
             f"max relative deviation {report['max_rel_deviation']:.3e}.")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    """Run every requested configuration on one problem and write the combined long-format CSV."""
    matrix, b, x_star = load_problem(args)
    if args.jobs < 1:
        raise ValueError(f"Invalid value for jobs: {args.jobs}. Must be at least 1.")
    configs: list[SolverConfig] = []
    for variant in args.variants:
        if variant.is_windowed:
            configs.extend(_config(args, variant, ell) for ell in args.ells)
        else:
            configs.append(_config(args, variant, 10))
    x0: Vector = np.zeros(matrix.n_cols)
    with ThreadPoolExecutor(max_workers=args.jobs) as executor:
        traces: list[IterationTrace] = list(executor.map(lambda cfg: run(matrix, b, x0, x_star, cfg), configs))
    for trace in traces:
        _log_summary(trace)
    model: CostModel = CostModel.of(matrix)
    for ell in args.ells:
        if ell is not None:
            LOG.info(f"oncost({ell}) = {model.oncost(ell):.4f}")
    if args.trace_out:
        write_compare_csv(traces, args.trace_out)
        LOG.info(f"Combined trace written to {args.trace_out}.")
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    problem: TomoProblem = make_tomo_problem(args.tomo, rays_per_angle=args.rays)
    for name, path in export_problem(problem, args.out).items():
        LOG.info(f"{name}: {path}")
    return 0


def get_problem_options() -> dict:
    return {
        "message": "Select problem: ",
        "choices": [
            {"name": "Generated Tomography Problem", "value": "tomo"},
            {"name": "MatrixMarket Files", "value": "files"},
            {"name": "Exit", "value": "exit"}
        ]
    }


def get_variant_options() -> dict:
    return {
        "message": "Select solver variant: ",
        "choices": [{"name": variant.value, "value": variant.value} for variant in Variant]
    }


def wizard_arguments() -> Optional[list[str]]:
    """Prompt for a solve run and return the equivalent command-line arguments, or None to exit."""
    source: str = inquirer.select(**get_problem_options()).execute()
    if source == "exit":
        return None
    if source == "tomo":
        argv: list[str] = ["solve", "--tomo", str(int(inquirer.number(
            message="Enter grid size (N): ",
            min_allowed=2,
            default=10
        ).execute()))]
    else:
        argv = ["solve",
                "--matrix", inquirer.filepath(message="MatrixMarket file: ").execute(),
                "--rhs", inquirer.filepath(message="Right-hand side file: ").execute()]
        solution: str = inquirer.filepath(message="Known solution file (optional): ").execute()
        if solution:
            argv += ["--solution", solution]
    variant: str = inquirer.select(**get_variant_options()).execute()
    argv += ["--variant", variant]
    if Variant(variant).is_windowed:
        argv += ["--ell", inquirer.text(message="Enter window length (ℓ) or 'all': ", default="10").execute()]
    argv += ["--max-cycles", str(int(inquirer.number(
        message="Enter maximum number of cycles: ",
        min_allowed=1,
        default=100
    ).execute())), "--seed", str(int(inquirer.number(
        message="Enter seed: ",
        min_allowed=0,
        default=0
    ).execute()))]
    trace_out: str = inquirer.text(message="Trace CSV path (optional): ").execute()
    if trace_out:
        argv += ["--trace-out", trace_out]
    return argv


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line interface; without arguments an interactive wizard assembles a solve run.
    :param argv: Command-line arguments without the program name.
    :return: The process exit code, 0 on success and 2 on invalid input.
    """
    arguments: Optional[list[str]] = list(argv) if argv else wizard_arguments()
    if arguments is None:
        return 0
    parser: argparse.ArgumentParser = build_parser()
    try:
        args: argparse.Namespace = parser.parse_args(arguments)
    except SystemExit as e:
        return int(e.code or 0)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (KaczmarzError, ValueError, OSError) as e:
        LOG.error(f"{args.command}: {e}")
        return 2
