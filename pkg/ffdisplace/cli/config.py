"""Module holding the ExperimentConfig class and its strict JSON parser.

Configuration documents quote every frequency as nu = omega/2pi in MHz and every
time in ns. Keys:

- experiment: one of the experiment kinds (optional when given on the command line)
- delta, omega_i, omega_f: drive ramp at fixed detuning (MHz)
- t_ramp: ramp duration T_f (ns), a number or a list of numbers
- delta_i, delta_f: detuning endpoints (MHz)
- t_final: wall-clock duration t_f (ns), a number or a list of numbers
- fock_levels: Fock levels followed by cd-check
- hamiltonians: resonator runs of ff-resonator ('bare', 'ff', 'cd')
- schedules: detuning schedules ('ff_ts', 'linear')
- kerr, pump: KPO parameters (MHz), a number or a pair
- g_1c, g_2c, g_12: couplings (MHz)
- rel_tol, abs_tol: integrator tolerances
- dims: truncations, {"resonator": N} or {"kpo1": N, "kpo2": N, "coupler": N}
- samples: number of time samples (ramp-trajectory and cd-check)
- output: CSV path
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, get_args

from ..errors import ConfigError
from ..kpo import SWEEP_T_FINAL
from ..types import ExperimentKind, ResonatorRun, ScheduleKind, mhz

if TYPE_CHECKING:
	from collections.abc import Mapping

FREQUENCY_KEYS = ('delta', 'omega_i', 'omega_f', 'delta_i', 'delta_f', 'g_1c', 'g_2c', 'g_12')
"""Scalar keys quoted in MHz"""
PAIR_KEYS = ('kerr', 'pump')
"""Per-KPO keys quoted in MHz"""
TIME_KEYS = ('t_ramp', 't_final')
"""Keys quoted in ns, scalar or list"""
KNOWN_KEYS = frozenset(
	(
		'experiment',
		*FREQUENCY_KEYS,
		*PAIR_KEYS,
		*TIME_KEYS,
		'fock_levels',
		'hamiltonians',
		'schedules',
		'rel_tol',
		'abs_tol',
		'dims',
		'samples',
		'output',
	)
)

RAMP_KEYS = ('delta', 'omega_i', 'omega_f', 't_ramp')
DETUNING_KEYS = ('delta_i', 'delta_f', 'omega_i', 't_final')
REQUIRED: dict[str, tuple[str, ...]] = {
	'ramp-trajectory': RAMP_KEYS,
	'ff-resonator': RAMP_KEYS,
	'cd-check': RAMP_KEYS,
	'lin-detuning': DETUNING_KEYS,
	'ff-ts-resonator': DETUNING_KEYS,
	'kpo-sweep': ('kerr', 'pump', 'g_1c', 'g_2c', 'g_12', 'delta_i', 'delta_f'),
}
"""Keys every experiment kind needs"""

DIM_MODES: dict[str, tuple[str, ...]] = {
	'ramp-trajectory': (),
	'ff-resonator': ('resonator',),
	'cd-check': ('resonator',),
	'lin-detuning': ('resonator',),
	'ff-ts-resonator': ('resonator',),
	'kpo-sweep': ('kpo1', 'kpo2', 'coupler'),
}
"""Truncation overrides each kind accepts"""

DEFAULT_SCHEDULES: dict[str, tuple[str, ...]] = {
	'lin-detuning': ('linear',),
	'ff-ts-resonator': ('ff_ts',),
	'kpo-sweep': ('ff_ts', 'linear'),
}


@dataclass(frozen=True)
class ExperimentConfig:
	"""A validated experiment, frequencies converted to rad/ns.

	Fields a kind does not use stay at their defaults.
	"""

	experiment: ExperimentKind
	"""Experiment kind"""
	delta: float | None = None
	omega_i: float | None = None
	omega_f: float | None = None
	delta_i: float | None = None
	delta_f: float | None = None
	t_ramp: tuple[float, ...] = ()
	"""Ramp durations T_f (ns)"""
	t_final: tuple[float, ...] = ()
	"""Wall-clock durations t_f (ns)"""
	kerr: tuple[float, float] | None = None
	pump: tuple[float, float] | None = None
	g_1c: float | None = None
	g_2c: float | None = None
	g_12: float | None = None
	fock_levels: tuple[int, ...] = (0, 1)
	"""Fock levels followed by cd-check"""
	hamiltonians: tuple[ResonatorRun, ...] = ('bare', 'ff')
	"""Resonator runs of ff-resonator"""
	schedules: tuple[ScheduleKind, ...] = ()
	"""Detuning schedules of the sweep kinds"""
	rel_tol: float = 1e-10
	abs_tol: float = 1e-12
	dims: Mapping[str, int] = field(default_factory=dict)
	"""Truncation overrides by mode name"""
	samples: int = 101
	"""Number of time samples"""
	output: str | None = None
	"""CSV path"""

	@property
	def output_path(self) -> str:
		"""CSV path, defaulting to '<experiment>.csv'."""
		return self.output or f'{self.experiment}.csv'

	def parameters(self) -> dict[str, Any]:
		"""Resolved physical parameters as quoted by users (MHz, ns)."""
		out: dict[str, Any] = {}
		for key in FREQUENCY_KEYS:
			value = getattr(self, key)
			if value is not None:
				out[key] = value / mhz(1)
		for key in PAIR_KEYS:
			pair = getattr(self, key)
			if pair is not None:
				out[key] = [v / mhz(1) for v in pair]
		for key in TIME_KEYS:
			if getattr(self, key):
				out[key] = list(getattr(self, key))
		return out


def _number(key: str, value: Any) -> float:
	if isinstance(value, bool) or not isinstance(value, (int, float)):
		raise ConfigError(key, 'must be a number')
	if not math.isfinite(value):
		raise ConfigError(key, 'must be finite')
	return float(value)


def _numbers(key: str, value: Any) -> tuple[float, ...]:
	values = value if isinstance(value, list) else [value]
	if not values:
		raise ConfigError(key, 'must not be empty')
	return tuple(_number(key, v) for v in values)


def _positive_times(key: str, value: Any) -> tuple[float, ...]:
	times = _numbers(key, value)
	if min(times) <= 0:
		raise ConfigError(key, 'must be > 0')
	return times


def _names(key: str, value: Any, allowed: tuple[str, ...]) -> tuple[Any, ...]:
	if not isinstance(value, list) or not value:
		raise ConfigError(key, 'must be a non-empty list')
	for name in value:
		if name not in allowed:
			raise ConfigError(key, f'entries must be one of {", ".join(allowed)}')
	return tuple(value)


def _integer(key: str, value: Any, minimum: int) -> int:
	if isinstance(value, bool) or not isinstance(value, int):
		raise ConfigError(key, 'must be an integer')
	if value < minimum:
		raise ConfigError(key, f'must be >= {minimum}')
	return value


def _tolerance(key: str, value: Any) -> float:
	tol = _number(key, value)
	if not 0 < tol < 1:
		raise ConfigError(key, 'must be in (0, 1)')
	return tol


def check_dims(experiment: str, dims: Mapping[str, Any]) -> dict[str, int]:
	"""Validate truncation overrides for an experiment kind."""
	allowed = DIM_MODES[experiment]
	out = {}
	for mode, value in dims.items():
		if mode not in allowed:
			raise ConfigError(f'dims.{mode}', f'is not a mode of {experiment}')
		out[mode] = _integer(f'dims.{mode}', value, 2)
	return out


def parse_config(text: str, experiment: ExperimentKind | None = None) -> ExperimentConfig:
	"""Parse and validate a JSON experiment document.

	Args:
		text (str):
			JSON document
		experiment (ExperimentKind | None, optional):
			Kind chosen on the command line; must agree with the document's.
			Defaults to None.

	Raises:
		ConfigError: naming the field and the violated constraint
	"""
	try:
		doc = json.loads(text)
	except json.JSONDecodeError as exc:
		raise ConfigError('config', f'is not valid JSON ({exc.msg} at line {exc.lineno})') from exc
	if not isinstance(doc, dict):
		raise ConfigError('config', 'must be a JSON object')

	for key in sorted(doc):
		if key not in KNOWN_KEYS:
			raise ConfigError(key, 'is not a known field')

	kind = doc.get('experiment', experiment)
	if kind is None:
		raise ConfigError('experiment', 'required')
	if kind not in get_args(ExperimentKind):
		raise ConfigError('experiment', f'must be one of {", ".join(get_args(ExperimentKind))}')
	if experiment is not None and kind != experiment:
		raise ConfigError('experiment', f'is {kind} but the command runs {experiment}')

	for key in REQUIRED[kind]:
		if key not in doc:
			raise ConfigError(key, 'required')

	values: dict[str, Any] = {'experiment': kind}
	for key in FREQUENCY_KEYS:
		if key in doc:
			values[key] = mhz(_number(key, doc[key]))
	for key in PAIR_KEYS:
		if key in doc:
			pair = _numbers(key, doc[key])
			if len(pair) == 1:
				pair = pair * 2
			if len(pair) != 2:
				raise ConfigError(key, 'must be a number or a pair')
			values[key] = (mhz(pair[0]), mhz(pair[1]))
	for key in TIME_KEYS:
		if key in doc:
			values[key] = _positive_times(key, doc[key])

	if kind in ('ramp-trajectory', 'cd-check') and len(values['t_ramp']) != 1:
		raise ConfigError('t_ramp', f'must be a single number for {kind}')
	if kind == 'kpo-sweep' and 't_final' not in values:
		values['t_final'] = SWEEP_T_FINAL
	if 'delta' in values and values['delta'] == 0:
		raise ConfigError('delta', 'must be nonzero')

	if 'fock_levels' in doc:
		levels = doc['fock_levels'] if isinstance(doc['fock_levels'], list) else [doc['fock_levels']]
		if not levels:
			raise ConfigError('fock_levels', 'must not be empty')
		values['fock_levels'] = tuple(_integer('fock_levels', n, 0) for n in levels)
	if 'hamiltonians' in doc:
		values['hamiltonians'] = _names('hamiltonians', doc['hamiltonians'], get_args(ResonatorRun))
	values['schedules'] = DEFAULT_SCHEDULES.get(kind, ())
	if 'schedules' in doc:
		values['schedules'] = _names('schedules', doc['schedules'], get_args(ScheduleKind))
	for key in ('rel_tol', 'abs_tol'):
		if key in doc:
			values[key] = _tolerance(key, doc[key])
	if 'dims' in doc:
		if not isinstance(doc['dims'], dict):
			raise ConfigError('dims', 'must be an object')
		values['dims'] = check_dims(kind, doc['dims'])
	if 'samples' in doc:
		values['samples'] = _integer('samples', doc['samples'], 2)
	if 'output' in doc:
		if not isinstance(doc['output'], str) or not doc['output']:
			raise ConfigError('output', 'must be a non-empty string')
		values['output'] = doc['output']

	return ExperimentConfig(**values)


def apply_overrides(
	config: ExperimentConfig,
	tol: tuple[float, float | None] | None = None,
	dims: Mapping[str, int] | None = None,
	output: str | None = None,
) -> ExperimentConfig:
	"""Apply command-line overrides on top of a parsed config.

	Args:
		config (ExperimentConfig):
			Parsed config
		tol (tuple[float, float | None] | None, optional):
			Relative and optional absolute tolerance.
			Defaults to None.
		dims (Mapping[str, int] | None, optional):
			Truncation overrides by mode.
			Defaults to None.
		output (str | None, optional):
			CSV path.
			Defaults to None.
	"""
	changes: dict[str, Any] = {}
	if tol is not None:
		rel, abs_ = tol
		changes['rel_tol'] = _tolerance('rel_tol', rel)
		if abs_ is not None:
			changes['abs_tol'] = _tolerance('abs_tol', abs_)
	if dims:
		changes['dims'] = {**config.dims, **check_dims(config.experiment, dims)}
	if output is not None:
		changes['output'] = output
	return dataclasses.replace(config, **changes)
