"""
Hotelling 等候成本模型求解器的命令列入口

    python main.py rationalize --n 2 --a 1,3
    python main.py shares --n 2 --a 1,3 --c 0.2,0.2
    python main.py verify --n 3 --a 1
"""
import argparse
import sys
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from core.exceptions import UsageError
from core.models import RunConfig
from core.runner import Runner
from services.report_service import ReportService
from tools.param_tools import ParamsExtractor
from utils.config import OUTPUT_SIGNIFICANT_DIGITS
from utils.logger import logger


class _ArgumentParser(argparse.ArgumentParser):
    """參數錯誤改為拋出 UsageError，由 main 對應到結束狀態 1"""

    def error(self, message: str):
        raise UsageError(message)


def _common_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="number of firms (default: 2)")
    common.add_argument("--a", default="1", help="inefficiencies, comma separated; one value means symmetric; fractions such as 1/3 are exact")
    common.add_argument("--tol", type=float, default=None, help="elimination convergence tolerance")
    common.add_argument("--solver-tol", type=float, default=None, help="share solver tolerance")
    common.add_argument("--max-rounds", type=int, default=None, help="elimination round cap")
    common.add_argument("--workers", type=int, default=None, help="worker count for grid and sweep runs")
    common.add_argument("--format", dest="output_format", choices=["json", "csv"], default="json")
    common.add_argument("--output", dest="output_path", default=None, help="output file (default: stdout)")
    common.add_argument("--digits", type=int, default=OUTPUT_SIGNIFICANT_DIGITS, help="significant digits of printed numbers")
    common.add_argument("--exact", action="store_true", help="print the shortest round-trip representation of every number")
    return common


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid-m", type=int, default=None, help="grid resolution m")
    parser.add_argument("--eps-opt", default=None, help="optimality slack in share units (default: 0.01/m)")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="hotelling", description="Hotelling location model with waiting costs")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()

    shares = subparsers.add_parser("shares", parents=[common], help="cuts and market shares of a location profile")
    shares.add_argument("--c", required=True, help="locations in input order")

    best = subparsers.add_parser("best-response", parents=[common], help="closed-form best response")
    best.add_argument("--c", required=True, help="opponent location (two firms) or belief c_l,c_r (three firms)")
    best.add_argument("--firm", type=int, default=1, help="responding firm, 1-based (two firms)")
    best.add_argument("--oracle", action="store_true", help="cross-check against the grid oracle")
    _add_grid_flags(best)

    table = subparsers.add_parser("reaction-table", parents=[common], help="sample a reaction function or correspondence")
    table.add_argument("--firm", type=int, default=1)
    table.add_argument("--from", dest="range_from", default="0")
    table.add_argument("--to", dest="range_to", default="1")
    table.add_argument("--samples", type=int, default=101)

    rationalize = subparsers.add_parser("rationalize", parents=[common], help="point-rationalizable elimination trace")
    rationalize.add_argument("--method", choices=["analytic", "grid"], default="analytic")
    _add_grid_flags(rationalize)

    nash = subparsers.add_parser("nash", parents=[common], help="pure Nash equilibrium check for two firms")
    nash.add_argument("--scan-n", type=int, default=None)

    verify = subparsers.add_parser("verify", parents=[common], help="invariant suite and grid oracle comparison")
    _add_grid_flags(verify)
    verify.add_argument("--steps", default=None, help="per-round comparison threshold in grid steps")
    verify.add_argument("--samples", dest="verify_samples", type=int, default=None, help="random solver profiles")
    verify.add_argument("--seed", type=int, default=None)

    subparsers.add_parser("sweep", parents=[common], help="iterated vs closed-form limits over a parameter list")
    return parser


def parse_config(argv: Optional[List[str]] = None) -> RunConfig:
    args = build_parser().parse_args(argv)
    values: Dict[str, Any] = {
        "command": args.command,
        "n": args.n,
        "output_format": args.output_format,
        "output_path": args.output_path,
        "digits": None if args.exact else args.digits,
    }

    if ":" in args.a:
        if args.command != "sweep":
            raise UsageError("a_1:a_2 pairs are only accepted by sweep")
        values["pairs"] = ParamsExtractor.parse_pair_list(args.a)
    else:
        values["a"] = ParamsExtractor.parse_number_list(args.a)

    if getattr(args, "c", None) is not None:
        values["c"] = ParamsExtractor.parse_number_list(args.c)
    for name in ("range_from", "range_to", "eps_opt", "steps"):
        raw = getattr(args, name, None)
        if raw is not None:
            values[name] = ParamsExtractor.parse_number(raw)
    for name in (
        "tol", "solver_tol", "max_rounds", "workers", "firm", "oracle", "method",
        "grid_m", "samples", "scan_n", "verify_samples", "seed",
    ):
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value

    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise UsageError(f"invalid arguments: {e}") from e


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info(f"Report written to {path}")


def main(argv: Optional[List[str]] = None) -> int:
    try:
        config = parse_config(argv)
    except UsageError as e:
        logger.error(f"Usage error: {str(e)}")
        print(ReportService.render_error(e, e.exit_status), file=sys.stderr)
        return e.exit_status

    outcome = Runner().run(config)
    if outcome.output is not None:
        try:
            _write(outcome.output, config.output_path)
        except OSError as e:
            logger.error(f"Error writing report: {str(e)}", exc_info=True)
            status = ReportService.error_status(e)
            print(ReportService.render_error(e, status), file=sys.stderr)
            return status
    if outcome.error is not None:
        print(outcome.error, file=sys.stderr)
    return outcome.exit_status


if __name__ == "__main__":
    sys.exit(main())
