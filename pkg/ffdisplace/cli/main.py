"""Command-line entry point.

Usage: ffdisplace <command> [--config PATH] [--out PATH] [--jobs N]
[--tol REL[,ABS]] [--dim-override MODE=N] [-v]

Exit codes: 0 success, 2 configuration error (an unreadable config file
included), 3 infeasible schedule, 4 numerical-accuracy failure, 5 output I/O
error. Failures also write one JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from ..errors import (
	AccuracyError,
	ConfigError,
	DimensionError,
	DomainError,
	FockIndexError,
	InfeasibleScheduleError,
	SolverError,
	TruncationError,
)
from .config import apply_overrides, parse_config
from .runner import run

if TYPE_CHECKING:
	from collections.abc import Sequence

	from ..types import ExperimentKind

logger = logging.getLogger(__name__)

COMMANDS: dict[str, ExperimentKind] = {
	'ramp': 'ramp-trajectory',
	'ff-resonator': 'ff-resonator',
	'lin-detuning': 'lin-detuning',
	'ff-ts': 'ff-ts-resonator',
	'cd-check': 'cd-check',
	'kpo-sweep': 'kpo-sweep',
}
"""Subcommand name -> experiment kind"""

EXIT_CODES: tuple[tuple[type[BaseException], int], ...] = (
	(ConfigError, 2),
	(DomainError, 2),
	(DimensionError, 2),
	(FockIndexError, 2),
	(InfeasibleScheduleError, 3),
	(SolverError, 3),
	(TruncationError, 4),
	(AccuracyError, 4),
	(OSError, 5),
)
"""Checked in order; the first matching class decides the exit code"""


def exit_code(exc: BaseException) -> int:
	"""Exit code for an error raised by a run, 1 if unmapped."""
	for cls, code in EXIT_CODES:
		if isinstance(exc, cls):
			return code
	return 1


def _tolerance(text: str) -> tuple[float, float | None]:
	parts = text.split(',')
	if len(parts) > 2:
		raise argparse.ArgumentTypeError(f'expected REL or REL,ABS ({text!r} passed)')
	try:
		rel = float(parts[0])
		abs_ = float(parts[1]) if len(parts) == 2 else None
	except ValueError as exc:
		raise argparse.ArgumentTypeError(f'tolerances must be numbers ({text!r} passed)') from exc
	return rel, abs_


def _dim_override(text: str) -> tuple[str, int]:
	mode, sep, value = text.partition('=')
	if not sep or not mode:
		raise argparse.ArgumentTypeError(f'expected MODE=N ({text!r} passed)')
	try:
		return mode, int(value)
	except ValueError as exc:
		raise argparse.ArgumentTypeError(f'dimension must be an integer ({text!r} passed)') from exc


def build_parser() -> argparse.ArgumentParser:
	"""Argument parser with one subcommand per experiment kind."""
	parser = argparse.ArgumentParser(
		prog='ffdisplace',
		description='Fast-forward displacement experiments on driven resonators and KPO couplers.',
	)
	commands = parser.add_subparsers(dest='command', required=True, metavar='command')
	for name, kind in COMMANDS.items():
		sub = commands.add_parser(name, help=f'run the {kind} experiment')
		sub.add_argument('--config', type=Path, required=True, metavar='PATH', help='JSON experiment document')
		sub.add_argument('--out', metavar='PATH', help='CSV path (sidecar is <PATH>.meta.json)')
		sub.add_argument('--jobs', type=int, default=1, metavar='N', help='worker processes (default 1)')
		sub.add_argument('--tol', type=_tolerance, metavar='REL[,ABS]', help='integrator tolerances')
		sub.add_argument(
			'--dim-override',
			type=_dim_override,
			action='append',
			default=[],
			metavar='MODE=N',
			help='truncation of one mode; repeatable',
		)
		sub.add_argument('-v', '--verbose', action='count', default=0, help='-v for INFO, -vv for DEBUG')
	return parser


def _configure_logging(verbosity: int) -> None:
	level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
	logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')


def _report(exc: BaseException, code: int) -> None:
	payload = {'error': type(exc).__name__, 'message': str(exc), 'exit_code': code}
	sys.stderr.write(json.dumps(payload) + '\n')


def main(argv: Sequence[str] | None = None) -> int:
	"""Run one experiment and return the process exit code.

	Args:
		argv (Sequence[str] | None, optional):
			Arguments without the program name.
			Defaults to None (sys.argv).
	"""
	args = build_parser().parse_args(argv)
	_configure_logging(args.verbose)

	try:
		if args.jobs < 1:
			raise ConfigError('--jobs', f'must be >= 1 ({args.jobs} passed)')
		try:
			text = args.config.read_text(encoding='utf-8')
		except OSError as exc:
			raise ConfigError('--config', f'cannot be read ({exc.strerror or exc})') from exc
		config = parse_config(text, COMMANDS[args.command])
		config = apply_overrides(config, args.tol, dict(args.dim_override), args.out)
		output = run(config, args.jobs)
	except Exception as exc:
		code = exit_code(exc)
		if code == 1:
			raise
		logger.debug('%s failed', args.command, exc_info=exc)
		_report(exc, code)
		return code

	logger.info('%d rows written to %s', output.rows, output.csv_path)
	return 0


if __name__ == '__main__':
	sys.exit(main())
