"""
Command-line interface for dcaport.

Commands: ``solve`` a single instance, ``bench`` a cardinality sweep,
``gen`` a seeded random instance and ``validate`` an instance file.

Exit codes: 0 success, 1 usage, 2 parse or validation error,
3 infeasible, 4 limit reached.
"""

import argparse
import json
import re
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from dcaport import __version__
from dcaport.data.builder import (
    InstanceConfig,
    build_instance,
    required_return_rule,
)
from dcaport.data.generator import generate_instance
from dcaport.data.orlib import load_orlib
from dcaport.data.prices import MomentEstimate, estimate_moments, load_prices
from dcaport.dca.solver import SolverConfig, TerminationReason, run_dca
from dcaport.dca.subproblem import solve_relaxation
from dcaport.exact.result import BnbLimits, ExactStatus
from dcaport.model.instance import Instance, objective, validate_instance
from dcaport.model.serialization import instance_to_text, read_instance
from dcaport.reporting.benchmark import run_benchmark, solve_exact
from dcaport.reporting.generator import FORMATS, ReportGenerator
from dcaport.utils.config import Config
from dcaport.utils.exceptions import (
    CombinatorialGuardError,
    ConfigurationError,
    DataFormatError,
    DcaportError,
    DimensionError,
    FileAccessError,
    InfeasibleError,
    QpError,
    ValidationError,
)
from dcaport.utils.file_utils import compute_file_hash, ensure_parent_dir
from dcaport.utils.logger import configure_logging, get_logger

logger = get_logger()

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_LIMIT = 4

INPUT_FORMATS = ('auto', 'instance', 'prices', 'orlib')
LIMIT_STATUSES = (ExactStatus.NODE_LIMIT, ExactStatus.TIME_LIMIT,
                  ExactStatus.GAP_LIMIT)


class UsageError(Exception):
    """Invalid combination of command-line arguments."""


class DcaportArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with the usage code on errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '-c', '--config',
        type=str,
        help='Path to configuration file'
    )
    common.add_argument(
        '-v', '--verbose',
        action='store_true',
        help='Enable debug logging'
    )
    return common


def _model_arguments() -> argparse.ArgumentParser:
    model = argparse.ArgumentParser(add_help=False)
    model.add_argument(
        '--input-format',
        choices=INPUT_FORMATS,
        default='auto',
        help='Input kind; auto uses the suffix (.csv prices, .txt '
             'OR-Library, otherwise instance document)'
    )
    group = model.add_mutually_exclusive_group()
    group.add_argument(
        '--R',
        type=float,
        dest='R',
        help='Required net return'
    )
    group.add_argument(
        '--r-rule',
        type=float,
        dest='r_rule',
        help='Set R by the R-rule with this fraction in [0, 1]'
    )
    model.add_argument(
        '--card-mode',
        choices=['eq', 'le'],
        help='Cardinality as equality (eq) or upper bound (le)'
    )
    model.add_argument(
        '--theta',
        type=float,
        help='Initial penalty weight (default: 2.0)'
    )
    model.add_argument(
        '--epsilon',
        type=float,
        help='DCA stopping tolerance (default: 1e-6)'
    )
    model.add_argument(
        '--max-iter',
        type=int,
        dest='max_iter',
        help='DCA iteration cap per penalty weight'
    )
    model.add_argument(
        '--exact',
        dest='exact',
        action='store_true',
        default=None,
        help='Also run the exact baseline'
    )
    model.add_argument(
        '--no-exact',
        dest='exact',
        action='store_false',
        help='Skip the exact baseline'
    )
    model.add_argument(
        '-o', '--output',
        type=str,
        help='Output file path'
    )
    return model


def create_parser() -> argparse.ArgumentParser:
    """
    Create argument parser for CLI.

    Returns:
        argparse.ArgumentParser: Configured argument parser
    """
    parser = DcaportArgumentParser(
        prog='dcaport',
        description='dcaport: cardinality-constrained portfolio selection '
                    'by DC programming'
    )
    parser.add_argument(
        '--version',
        action='version',
        version=f'%(prog)s {__version__}'
    )

    common = _common_arguments()
    model = _model_arguments()
    subparsers = parser.add_subparsers(dest='command', help='Commands')

    solve_parser = subparsers.add_parser(
        'solve',
        parents=[common, model],
        help='Solve one instance by DCA'
    )
    solve_parser.add_argument('path', type=str,
                              help='Instance, price or OR-Library file')
    solve_parser.add_argument('--card', type=int,
                              help='Cardinality (required for data files)')
    solve_parser.add_argument(
        '-f', '--format',
        choices=['text', 'json'],
        help='Output format (default: text)'
    )
    solve_parser.add_argument('--trace', type=str,
                              help='Write the DCA trace table to this path')
    solve_parser.add_argument(
        '--relaxation',
        action='store_true',
        help='Also report the continuous relaxation bound'
    )

    bench_parser = subparsers.add_parser(
        'bench',
        parents=[common, model],
        help='Sweep the cardinality and compare with the exact baseline'
    )
    bench_parser.add_argument('path', type=str, nargs='?',
                              help='Instance, price or OR-Library file')
    bench_parser.add_argument('--random', type=int, metavar='N',
                              help='Benchmark a generated N-asset instance')
    bench_parser.add_argument('--seed', type=int, default=0,
                              help='Seed for --random (default: 0)')
    bench_parser.add_argument('--card-range', type=str,
                              help='Cards as A..B, A:B or A (default from '
                                   'config, 5..15 clipped to n)')
    bench_parser.add_argument(
        '-f', '--format',
        choices=list(FORMATS),
        help='Report format (default: text)'
    )
    bench_parser.add_argument('--jobs', type=int,
                              help='Worker count for concurrent rows')
    bench_parser.add_argument('--store', action='store_true',
                              help='Persist the report in the database')

    gen_parser = subparsers.add_parser(
        'gen',
        parents=[common],
        help='Generate a seeded random instance'
    )
    gen_parser.add_argument('n', type=int, help='Number of assets')
    gen_parser.add_argument('--seed', type=int, default=0,
                            help='Random seed (default: 0)')
    gen_parser.add_argument('--card', type=int,
                            help='Cardinality (default: min(n, 5))')
    group = gen_parser.add_mutually_exclusive_group()
    group.add_argument('--R', type=float, dest='R',
                       help='Required net return')
    group.add_argument('--r-rule', type=float, dest='r_rule',
                       help='R-rule fraction in [0, 1]')
    gen_parser.add_argument('--factors', type=int, default=3,
                            help='Number of risk factors (default: 3)')
    gen_parser.add_argument('-o', '--output', type=str,
                            help='Output file path (default: stdout)')

    validate_parser = subparsers.add_parser(
        'validate',
        parents=[common],
        help='Check an instance file'
    )
    validate_parser.add_argument('path', type=str, help='Instance file')
    validate_parser.add_argument('--input-format', choices=INPUT_FORMATS,
                                 default='auto', help='Input kind')
    validate_parser.add_argument('--card', type=int,
                                 help='Cardinality for data files')

    return parser


def _load_config(args: argparse.Namespace) -> Config:
    config = Config(Path(args.config)) if args.config else Config()
    configure_logging(
        'DEBUG' if args.verbose else config.get('logging.level', 'INFO'),
        config.get('logging.file'),
        config.get('logging.console', True),
    )
    return config


def _input_kind(path: str, requested: str) -> str:
    if requested != 'auto':
        return requested
    suffix = Path(path).suffix.lower()
    if suffix == '.csv':
        return 'prices'
    if suffix == '.txt':
        return 'orlib'
    return 'instance'


def _load_moments(path: str, kind: str) -> MomentEstimate:
    if kind == 'prices':
        return estimate_moments(load_prices(path))
    return load_orlib(path)


def load_model(args: argparse.Namespace, config: Config,
               card: Optional[int]) -> Instance:
    """
    Build the instance a command works on.

    Instance documents are used as written, with ``--card``, ``--R``,
    ``--r-rule`` and ``--card-mode`` applied on top. Data files need a
    cardinality and take bounds and costs from the configuration.

    Raises:
        UsageError: If a data file is given without a cardinality
    """
    kind = _input_kind(args.path, getattr(args, 'input_format', 'auto'))
    R = getattr(args, 'R', None)
    fraction = getattr(args, 'r_rule', None)
    card_mode = getattr(args, 'card_mode', None)

    if kind == 'instance':
        inst = read_instance(args.path)
        changes = {}
        if card is not None:
            changes['card'] = card
        if card_mode is not None:
            changes['card_mode'] = card_mode
        if R is not None:
            changes['R'] = R
        elif fraction is not None:
            changes['R'] = required_return_rule(
                inst.r, inst.a, inst.b, inst.c_b, inst.c_s, inst.P,
                inst.x_bar, fraction)
        return inst.with_changes(**changes) if changes else inst

    if card is None:
        raise UsageError("--card is required for price and OR-Library files")
    cfg = InstanceConfig.from_config(config, card, R=R,
                                     r_rule_fraction=fraction)
    if card_mode is not None:
        cfg = replace(cfg, card_mode=card_mode)
    return build_instance(_load_moments(args.path, kind), cfg)


def _solver_config(args: argparse.Namespace,
                   config: Config) -> SolverConfig:
    return SolverConfig.from_config(config, theta=args.theta,
                                    epsilon=args.epsilon,
                                    max_iter=args.max_iter)


def parse_card_range(text: str, n: int) -> List[int]:
    """
    Parse ``A..B``, ``A:B``, ``A-B`` or ``A`` into a list of cards.

    Raises:
        UsageError: If the text is malformed, empty or outside [1, n]
    """
    match = re.fullmatch(r'\s*(\d+)\s*(?:(?:\.\.|:|-)\s*(\d+))?\s*', text)
    if not match:
        raise UsageError(f"invalid card range: {text!r}")
    lo = int(match.group(1))
    hi = int(match.group(2)) if match.group(2) is not None else lo
    if lo > hi:
        raise UsageError(f"card range {text!r} is empty")
    if lo < 1 or hi > n:
        raise UsageError(f"card range {text!r} must lie within [1, {n}]")
    return list(range(lo, hi + 1))


def _write_or_print(text: str, output: Optional[str]) -> None:
    if output:
        ensure_parent_dir(output).write_text(text)
        print(f"Output saved to: {output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _error_code(e: Exception) -> int:
    if isinstance(e, (UsageError, ConfigurationError)):
        return EXIT_USAGE
    if isinstance(e, (DataFormatError, FileAccessError, ValidationError,
                      DimensionError)):
        return EXIT_INPUT
    if isinstance(e, InfeasibleError):
        return EXIT_INFEASIBLE
    if isinstance(e, (CombinatorialGuardError, QpError)):
        return EXIT_LIMIT
    return EXIT_USAGE


def _fail(e: Exception) -> int:
    code = _error_code(e)
    logger.error(str(e))
    print(f"Error: {e}", file=sys.stderr)
    return code


def solve_command(args: argparse.Namespace) -> int:
    """
    Execute solve command.

    Args:
        args: Parsed command-line arguments

    Returns:
        int: Exit code
    """
    try:
        config = _load_config(args)
        inst = load_model(args, config, args.card)
        validate_instance(inst).raise_if_invalid()
        cfg = _solver_config(args, config)

        relaxation = None
        if args.relaxation:
            relaxed, _ = solve_relaxation(inst, cfg.qp)
            relaxation = objective(inst, relaxed.x)

        result = run_dca(inst, cfg)

        exact = None
        run_exact = args.exact if args.exact is not None else False
        if run_exact:
            exact = solve_exact(
                inst, cfg, BnbLimits.from_config(config),
                int(config.get('exact.enumerate_limit', 100000)))

        generator = ReportGenerator(
            precision=int(config.get('output.precision', 6)))
        if args.trace:
            generator.write_trace(result, args.trace)

        fmt = args.format or config.get('output.format', 'text')
        if fmt == 'json':
            data = generator.solution_dict(inst, result, relaxation, exact)
            _write_or_print(json.dumps(data, indent=2) + '\n', args.output)
        else:
            generator.print_solution(inst, result, relaxation, exact)
            if args.output:
                data = generator.solution_dict(inst, result, relaxation,
                                               exact)
                _write_or_print(json.dumps(data, indent=2) + '\n',
                                args.output)

        if result.solution is None:
            print("Error: no feasible support found", file=sys.stderr)
            return EXIT_INFEASIBLE
        if exact is not None and exact.status in LIMIT_STATUSES:
            return EXIT_LIMIT
        if result.termination is TerminationReason.MAX_ITER:
            return EXIT_LIMIT
        return EXIT_OK

    except KeyboardInterrupt:
        print("\n\nSolve interrupted by user.", file=sys.stderr)
        return 130
    except (DcaportError, UsageError) as e:
        return _fail(e)


def bench_command(args: argparse.Namespace) -> int:
    """
    Execute bench command.

    Args:
        args: Parsed command-line arguments

    Returns:
        int: Exit code
    """
    try:
        config = _load_config(args)
        if (args.path is None) == (args.random is None):
            raise UsageError("give exactly one of PATH or --random N")

        if args.random is not None:
            if args.random < 1:
                raise UsageError("--random needs n >= 1")
            cfg = InstanceConfig.from_config(config, 1, R=args.R,
                                             r_rule_fraction=args.r_rule)
            if args.card_mode is not None:
                cfg = replace(cfg, card_mode=args.card_mode)
            base = generate_instance(args.random, args.seed, cfg=cfg)
            dataset = f"random(n={args.random}, seed={args.seed})"
            digest = None
        else:
            base = load_model(args, config, 1)
            dataset = args.path
            digest = compute_file_hash(args.path)

        if args.card_range:
            cards = parse_card_range(args.card_range, base.n)
        else:
            lo = int(config.get('benchmark.card_min', 5))
            hi = min(int(config.get('benchmark.card_max', 15)), base.n)
            cards = parse_card_range(f"{min(lo, hi)}..{hi}", base.n)

        run_exact = args.exact if args.exact is not None else \
            bool(config.get('benchmark.run_exact', True))
        n_jobs = args.jobs or int(config.get('benchmark.n_jobs', 1))
        report = run_benchmark(
            base, cards, _solver_config(args, config), run_exact=run_exact,
            limits=BnbLimits.from_config(config), n_jobs=n_jobs,
            dataset=dataset,
            enumerate_limit=int(config.get('exact.enumerate_limit', 100000)),
        )

        generator = ReportGenerator(
            precision=int(config.get('output.precision', 6)))
        fmt = args.format or config.get('output.format', 'text')
        print(generator.format_table(report), end='')
        if args.output:
            generator.generate_report(report, args.output, format=fmt)
            print(f"\nReport saved to: {args.output}")

        if args.store:
            from dcaport.database import SessionLocal, init_db
            from dcaport.database.crud import save_bench_report
            init_db()
            db = SessionLocal()
            try:
                run = save_bench_report(db, report, digest)
                print(f"Stored as benchmark run {run.id}")
            finally:
                db.close()
        return EXIT_OK

    except KeyboardInterrupt:
        print("\n\nBenchmark interrupted by user.", file=sys.stderr)
        return 130
    except (DcaportError, UsageError) as e:
        return _fail(e)


def gen_command(args: argparse.Namespace) -> int:
    """
    Execute gen command.

    Args:
        args: Parsed command-line arguments

    Returns:
        int: Exit code
    """
    try:
        config = _load_config(args)
        if args.n < 1:
            raise UsageError(f"n must be at least 1, got {args.n}")
        card = args.card if args.card is not None else min(args.n, 5)
        cfg = InstanceConfig.from_config(config, card, R=args.R,
                                         r_rule_fraction=args.r_rule)
        inst = generate_instance(args.n, args.seed, card=args.card, cfg=cfg,
                                 factors=args.factors)
        _write_or_print(instance_to_text(inst), args.output)
        return EXIT_OK
    except (DcaportError, UsageError) as e:
        return _fail(e)


def validate_command(args: argparse.Namespace) -> int:
    """
    Execute validate command.

    Args:
        args: Parsed command-line arguments

    Returns:
        int: Exit code
    """
    try:
        config = _load_config(args)
        inst = load_model(args, config, args.card)
        report = validate_instance(inst)
        if report.is_valid:
            print(f"OK: n={inst.n}, card={inst.card}, R={inst.R:.6g}")
            return EXIT_OK
        for message in report.violations:
            print(f"INVALID: {message}")
        return EXIT_INPUT
    except (DcaportError, UsageError) as e:
        return _fail(e)


COMMANDS = {
    'solve': solve_command,
    'bench': bench_command,
    'gen': gen_command,
    'validate': validate_command,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main entry point for CLI.

    Returns:
        int: Exit code
    """
    parser = create_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    return COMMANDS[args.command](args)


if __name__ == '__main__':
    sys.exit(main())
