"""Experiment execution and CSV/metadata emission.

Every experiment is expanded into an ordered list of points. Points run on a
process pool when more than one job is requested; results are always written in
point order, so the CSV does not depend on completion order.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from itertools import repeat
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypeVar

import numpy as np

from ..errors import ConfigError, DomainError
from ..fockspace import TAIL_TOL
from ..kpo import KpoSystemSpec, displacement_point
from ..propagator import cd_drive_check, detuning_infidelity, ramp_infidelity, resonator_dim
from ..pulses import RampSpec, sample_ramp
from ..types import to_mhz

if TYPE_CHECKING:
	from collections.abc import Sequence

	from .config import ExperimentConfig

logger = logging.getLogger(__name__)

COLUMNS: dict[str, tuple[str, ...]] = {
	'ramp-trajectory': (
		't_ns',
		'alpha0',
		'alpha0_dot_over_delta',
		'alpha0_ddot_over_delta2',
		'alpha_ff',
		'omega0_mhz',
		'omega_ff_mhz',
	),
	'ff-resonator': ('t_ramp_ns', 'hamiltonian', 'infidelity'),
	'lin-detuning': ('t_f_ns', 'schedule', 'infidelity'),
	'ff-ts-resonator': ('t_f_ns', 'schedule', 'infidelity'),
	'cd-check': ('n', 'max_infidelity', 'worst_t_ns'),
	'kpo-sweep': ('t_f_ns', 'schedule', 'infidelity'),
}
"""CSV header of each experiment kind"""

T = TypeVar('T')
Row = tuple[Any, ...]
Point = tuple[Any, ...]


@dataclass(frozen=True)
class RunOutput:
	"""Files written by `run`."""

	csv_path: Path
	meta_path: Path
	rows: int


def tool_version() -> str:
	"""Installed package version."""
	try:
		return version('ffdisplace')
	except PackageNotFoundError:
		return '0+unknown'


def _fmt(value: Any) -> str:
	if isinstance(value, float):
		return format(value, '.17g')
	return str(value)


def _need(value: T | None, key: str) -> T:
	if value is None:
		raise ConfigError(key, 'required')
	return value


def _ramp(config: ExperimentConfig, t_ramp: float) -> RampSpec:
	return RampSpec(
		_need(config.omega_i, 'omega_i'), _need(config.omega_f, 'omega_f'), t_ramp, _need(config.delta, 'delta')
	)


def kpo_spec(config: ExperimentConfig) -> KpoSystemSpec:
	"""System spec of a kpo-sweep config, truncation overrides applied."""
	defaults = dict(zip(('kpo1', 'kpo2', 'coupler'), (24, 24, 12)))
	dims = {**defaults, **config.dims}
	return KpoSystemSpec(
		_need(config.kerr, 'kerr'),
		_need(config.pump, 'pump'),
		_need(config.g_1c, 'g_1c'),
		_need(config.g_2c, 'g_2c'),
		_need(config.g_12, 'g_12'),
		_need(config.delta_i, 'delta_i'),
		_need(config.delta_f, 'delta_f'),
		(dims['kpo1'], dims['kpo2'], dims['coupler']),
	)


def expand(config: ExperimentConfig) -> list[Point]:
	"""Ordered sweep points of an experiment."""
	kind = config.experiment
	if kind == 'ramp-trajectory':
		t_ramp = config.t_ramp[0]
		return [(float(t),) for t in np.linspace(0, t_ramp, config.samples)]
	if kind == 'ff-resonator':
		return [(t, run) for t in config.t_ramp for run in config.hamiltonians]
	if kind == 'cd-check':
		return [(n,) for n in config.fock_levels]
	return [(t, schedule) for t in config.t_final for schedule in config.schedules]


def run_point(config: ExperimentConfig, point: Point) -> tuple[Row, Any]:
	"""Compute one CSV row and the truncation it used."""
	kind = config.experiment
	dim = config.dims.get('resonator')

	if kind == 'ramp-trajectory':
		sample = sample_ramp(_ramp(config, config.t_ramp[0]), point[0])
		row: Row = (
			sample.t,
			sample.alpha0,
			sample.alpha0_dot_over_delta,
			sample.alpha0_ddot_over_delta2,
			sample.alpha_ff,
			to_mhz(sample.omega0),
			to_mhz(sample.omega_ff),
		)
		return row, None

	if kind == 'ff-resonator':
		t_ramp, hamiltonian = point
		report = ramp_infidelity(_ramp(config, t_ramp), hamiltonian, dim, config.rel_tol, config.abs_tol)
		return (t_ramp, hamiltonian, report.infidelity), report.dim

	if kind == 'cd-check':
		(n,) = point
		spec = _ramp(config, config.t_ramp[0])
		alpha_max = max(abs(spec.alpha0(0)), abs(spec.alpha0(spec.t_ramp)))
		level_dim = dim if dim is not None else resonator_dim(alpha_max, n)
		cd = cd_drive_check(spec, n, level_dim, config.samples, config.rel_tol, config.abs_tol)
		return (n, cd.max_infidelity, cd.worst_time), level_dim

	if kind in ('lin-detuning', 'ff-ts-resonator'):
		t_final, schedule = point
		report = detuning_infidelity(
			_need(config.delta_i, 'delta_i'),
			_need(config.delta_f, 'delta_f'),
			_need(config.omega_i, 'omega_i'),
			t_final,
			schedule,
			dim,
			config.rel_tol,
			config.abs_tol,
		)
		return (t_final, schedule, report.infidelity), report.dim

	if kind == 'kpo-sweep':
		spec = kpo_spec(config)
		t_final, schedule = point
		sweep = displacement_point(spec, t_final, schedule, config.rel_tol, config.abs_tol)
		return (t_final, schedule, sweep.infidelity), list(spec.dims)

	raise DomainError(f'Unknown experiment {kind!r}.')


def _execute(config: ExperimentConfig, points: Sequence[Point], jobs: int) -> list[tuple[Row, Any]]:
	if jobs <= 1 or len(points) <= 1:
		return [run_point(config, point) for point in points]
	with ProcessPoolExecutor(max_workers=jobs) as pool:
		return list(pool.map(run_point, repeat(config), points))


def metadata(config: ExperimentConfig, truncations: list[Any], rows: int) -> dict[str, Any]:
	"""Sidecar content: everything needed to reproduce the CSV."""
	return {
		'tool': 'ffdisplace',
		'version': tool_version(),
		'experiment': config.experiment,
		'units': {'frequency': 'MHz (omega/2pi)', 'time': 'ns'},
		'parameters': config.parameters(),
		'fock_levels': list(config.fock_levels) if config.experiment == 'cd-check' else None,
		'hamiltonians': list(config.hamiltonians) if config.experiment == 'ff-resonator' else None,
		'schedules': list(config.schedules) or None,
		'samples': config.samples if config.experiment in ('ramp-trajectory', 'cd-check') else None,
		'tolerances': {
			'rel_tol': config.rel_tol,
			'abs_tol': config.abs_tol,
			'solver_tol': 1e-12,
			'tail_tol': TAIL_TOL,
		},
		'dim_overrides': dict(sorted(config.dims.items())),
		'truncations': truncations,
		'columns': list(COLUMNS[config.experiment]),
		'rows': rows,
	}


def run(config: ExperimentConfig, jobs: int = 1) -> RunOutput:
	"""Run an experiment and write its CSV and `<csv>.meta.json` sidecar.

	Args:
		config (ExperimentConfig):
			Validated experiment
		jobs (int, optional):
			Worker processes.
			Defaults to 1.

	Raises:
		InfeasibleScheduleError: if a time-scaled schedule cannot be built
		TruncationError: if a truncation is too small
		AccuracyError: if an integration or quadrature fails its accuracy gate
	"""
	points = expand(config)
	logger.info('%s: %d points on %d job(s)', config.experiment, len(points), max(1, jobs))
	results = _execute(config, points, jobs)

	csv_path = Path(config.output_path)
	csv_path.parent.mkdir(parents=True, exist_ok=True)
	with csv_path.open('w', newline='', encoding='utf-8') as f:
		writer = csv.writer(f, lineterminator='\n')
		writer.writerow(COLUMNS[config.experiment])
		for row, _ in results:
			writer.writerow([_fmt(v) for v in row])

	truncations = [t for _, t in results if t is not None]
	meta_path = csv_path.with_name(csv_path.name + '.meta.json')
	meta = metadata(config, truncations, len(results))
	meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + '\n', encoding='utf-8')

	logger.info('Wrote %s and %s', csv_path, meta_path)
	return RunOutput(csv_path, meta_path, len(results))
