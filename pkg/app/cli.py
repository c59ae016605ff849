"""
Command-line surface.

    python -m app <command> [flags]

Commands: verify, moments, apply, functional, density, convergence, oracle.
Exit codes: 0 success, 1 validation failure, 2 I/O or parse error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from app.config import configure_logging
from app.core.exceptions import InputError, ValidationFailure
from app.core.pipeline import COMMANDS, build_config, load_config_file, run_job, write_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INPUT = 2


class _Parser(argparse.ArgumentParser):
    # bad flags: usage and message on stderr, exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_argument_group("operator")
    source.add_argument("--matrix", metavar="PATH", help="Matrix Market file (complex general)")
    source.add_argument("--generate", metavar="NAME", help="identity | shift | dft-phase | constructed | random-diagonal")
    source.add_argument("--dim", type=int, help="dimension for --generate")
    source.add_argument("--seed", type=int, help="seed for --generate")
    source.add_argument("--spectral", metavar="PATH", help="SpectralForm JSON for the operator")

    common.add_argument("--function", metavar="EXPR", help="expression in z or builtin name")

    vectors = common.add_argument_group("vectors")
    vectors.add_argument("--x", metavar="PATH", help="vector CSV for x")
    vectors.add_argument("--basis", type=int, metavar="K", help="x = e_K")
    vectors.add_argument("--random-seed", type=int, metavar="S", help="x random unit vector")
    vectors.add_argument("--y", metavar="PATH", help="vector CSV for y (default: y = x)")
    vectors.add_argument("--y-basis", type=int, metavar="K", help="y = e_K")
    vectors.add_argument("--y-random-seed", type=int, metavar="S", help="y random unit vector")

    orders = common.add_argument_group("orders")
    orders.add_argument("-N", type=int, dest="N", help="Fejér order")
    orders.add_argument("--n-list", metavar="CSVINTS", help="comma-separated increasing orders")
    orders.add_argument("--grid-M", type=int, dest="grid_M", help="grid size, at least 2N+2")
    orders.add_argument("--streaming", action="store_true", default=None, help="streaming moment accumulation")

    output = common.add_argument_group("output")
    output.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    output.add_argument("--format", choices=("json", "csv"), help="output format (default: json)")
    output.add_argument("--config", metavar="PATH", help="JSON job config; flags override it")
    output.add_argument("--log-level", help="logging level (default: FEJER_LOG_LEVEL)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fejercalc", description="Fejér functional calculus for unitary operators")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common_flags()
    helps = {
        "verify": "unitarity report",
        "moments": "moment table m_k = <U^k x, y>",
        "apply": "(sigma_N f)(U) x",
        "functional": "F^N_{x,y}(f) by both paths with self-check",
        "density": "Fejér-smoothed spectral density on a grid",
        "convergence": "sweep over --n-list with oracle gaps",
        "oracle": "exact spectral form and <f(U)x, y>",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def run_cli(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help or a bad flag; argparse has already printed
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    if args.log_level:
        configure_logging(args.log_level)
    else:
        configure_logging()

    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "log_level")}
    try:
        file_values = load_config_file(args.config) if args.config else None
        config = build_config(file_values, **overrides)
        result, _ = run_job(config)
        write_output(result, config, stdout)
        if not result.passed:
            stderr.write(f"error: '{config.command}' check failed\n")
            return EXIT_VALIDATION
    except ValidationFailure as e:
        stderr.write(f"error: {e}\n")
        return EXIT_VALIDATION
    except (InputError, OSError) as e:
        stderr.write(f"error: {e}\n")
        return EXIT_INPUT
    return EXIT_OK


def main() -> None:
    sys.exit(run_cli())
