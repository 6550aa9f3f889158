"""Time-dependent Schrodinger integration in a truncated Fock space.

A `HamiltonianSchedule` is a sum of Kronecker-structured terms, each a product of
single-mode matrices weighted by a scalar coefficient function of time. Small
spaces are applied as dense matrices; product spaces are applied term by term
without forming the product matrix.

The single-resonator scenario builders all produce
H(t) = Delta(t) a^dagger a - [Omega(t) a^dagger + conj(Omega(t)) a] (+ offset).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Callable

import numpy as np
from scipy.integrate import DOP853, quad, solve_ivp

from .errors import AccuracyError, DimensionError, DomainError, StiffnessError
from .fockspace import (
	FockVector,
	apply_factors,
	coherent_state,
	default_dim,
	displace_levels,
	displaced_fock,
	fidelity,
	lowering_operator,
	minimal_dim,
	number_operator,
)
from .timescaling import ScaledClock, linear_detuning

if TYPE_CHECKING:
	from collections.abc import Sequence

	from .pulses import RampSpec
	from .types import ComplexArray, ComplexFn, Factor, RealFn, ResonatorRun, ScheduleKind

logger = logging.getLogger(__name__)

REL_TOL = 1e-10
"""Default relative tolerance of the adaptive integrator"""
ABS_TOL = 1e-12
"""Default absolute tolerance of the adaptive integrator"""
NORM_WARN = 1e-8
"""Norm drift above which a run is logged as suspicious"""
NORM_FAIL = 1e-6
"""Norm drift above which a run is rejected"""
DENSE_LIMIT = 256
"""Largest space applied through dense matrices"""


@dataclass(frozen=True)
class Term:
	"""One term of a Hamiltonian.

	The operator is the product of `factors` (each a matrix on one mode). An
	unpaired term contributes c(t) A with real c and Hermitian factors. A paired
	term contributes c(t) A + conj(c(t)) A^dagger.
	"""

	factors: tuple[Factor, ...]
	"""(mode, matrix) pairs whose product is the operator A"""
	coeff: ComplexFn
	"""Coefficient function of time"""
	paired: bool = False
	"""Whether the conjugate partner is added"""

	adjoint: tuple[Factor, ...] = field(init=False, repr=False)
	"""Factors of A^dagger"""

	def __post_init__(self) -> None:
		"""Freeze the factors and build the adjoint."""
		factors = tuple((int(mode), np.asarray(m, dtype=np.complex128)) for mode, m in self.factors)
		object.__setattr__(self, 'factors', factors)
		object.__setattr__(self, 'adjoint', tuple((mode, m.conj().T) for mode, m in factors))

	def dense(self, dims: tuple[int, ...], adjoint: bool = False) -> ComplexArray:
		"""The operator A (or A^dagger) as a dense matrix on the product space."""
		blocks = [np.eye(d, dtype=np.complex128) for d in dims]
		for mode, matrix in self.adjoint if adjoint else self.factors:
			blocks[mode] = blocks[mode] @ matrix
		out = blocks[0]
		for block in blocks[1:]:
			out = np.kron(out, block)
		return out

	def coefficient(self, t: float) -> complex:
		"""c(t), which must be real for an unpaired term."""
		c = complex(self.coeff(t))
		if not self.paired and abs(c.imag) > 1e-12 * max(1.0, abs(c)):
			raise DomainError(f'Unpaired term has non-real coefficient {c} at t={t:.9g} ns.')
		return c


@dataclass(frozen=True)
class HamiltonianSchedule:
	"""A time-parameterized Hermitian operator H(t) in rad/ns.

	`offset` is an optional scalar function added as offset(t) times the identity
	(the classical energy terms tracked for global phases).
	"""

	dims: tuple[int, ...]
	"""Per-mode truncation dimensions"""
	terms: tuple[Term, ...]
	"""Operator terms"""
	t_span: tuple[float, float]
	"""Start and end time (ns)"""
	offset: RealFn | None = None
	"""Scalar energy added to every level"""

	_dense: tuple[tuple[Term, ComplexArray, ComplexArray | None], ...] | None = field(
		init=False, repr=False, default=None
	)

	def __post_init__(self) -> None:
		"""Validate term shapes and Hermiticity, and cache dense matrices for small spaces."""
		dims = tuple(int(d) for d in self.dims)
		if not dims or min(dims) < 2:
			raise DimensionError(f'HamiltonianSchedule dims must be >= 2 ({self.dims} passed).')
		object.__setattr__(self, 'dims', dims)
		object.__setattr__(self, 'terms', tuple(self.terms))
		if not all(math.isfinite(t) for t in self.t_span) or self.t_span[1] < self.t_span[0]:
			raise DomainError(f'HamiltonianSchedule t_span must be finite and ordered ({self.t_span} passed).')

		for term in self.terms:
			for mode, matrix in term.factors:
				if not 0 <= mode < len(dims) or matrix.shape != (dims[mode], dims[mode]):
					raise DimensionError(f'Factor of shape {matrix.shape} does not fit mode {mode} of dims {dims}.')
				if not term.paired and np.max(np.abs(matrix - matrix.conj().T), initial=0) > 1e-12:
					raise DomainError(f'Unpaired term on mode {mode} is not Hermitian.')

		if math.prod(dims) <= DENSE_LIMIT:
			dense = tuple(
				(term, term.dense(dims), term.dense(dims, adjoint=True) if term.paired else None)
				for term in self.terms
			)
			object.__setattr__(self, '_dense', dense)

	@property
	def dim(self) -> int:
		"""Dimension of the (product) space."""
		return math.prod(self.dims)

	@property
	def duration(self) -> float:  # noqa: D102
		return self.t_span[1] - self.t_span[0]

	def matrix(self, t: float) -> ComplexArray:
		"""Dense H(t). Only sensible for small spaces."""
		dense = self._dense
		if dense is None:
			dense = tuple(
				(term, term.dense(self.dims), term.dense(self.dims, adjoint=True) if term.paired else None)
				for term in self.terms
			)

		out = np.zeros((self.dim, self.dim), dtype=np.complex128)
		for term, op, op_dag in dense:
			c = term.coefficient(t)
			out += c * op
			if op_dag is not None:
				out += np.conj(c) * op_dag
		if self.offset is not None:
			out += self.offset(t) * np.eye(self.dim)
		return out

	def apply(self, t: float, amps: ComplexArray) -> ComplexArray:
		"""Compute H(t) psi."""
		if self._dense is not None:
			return self.matrix(t) @ amps

		out = np.zeros_like(amps)
		for term in self.terms:
			c = term.coefficient(t)
			if c == 0:
				continue
			out += c * apply_factors(amps, self.dims, term.factors)
			if term.paired:
				out += np.conj(c) * apply_factors(amps, self.dims, term.adjoint)
		if self.offset is not None:
			out += self.offset(t) * amps
		return out


@dataclass(frozen=True)
class StepStats:
	"""Adaptive step counts of one run."""

	accepted: int
	rejected: int
	nfev: int


@dataclass(frozen=True)
class EvolutionResult:
	"""Outcome of `evolve`."""

	final_state: FockVector
	"""State at the end of the schedule"""
	norm_drift: float
	"""Largest |norm(psi) - norm(psi0)| seen at accepted steps"""
	step_stats: StepStats
	"""Adaptive step counts"""
	trajectory: tuple[tuple[float, FockVector], ...] = ()
	"""States at the requested sample times"""


def evolve(
	schedule: HamiltonianSchedule,
	psi0: FockVector,
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
	sample_times: Sequence[float] | None = None,
) -> EvolutionResult:
	"""Integrate d(psi)/dt = -i H(t) psi over the schedule's time span.

	Uses the adaptive 8(5,3) Dormand-Prince scheme. The state is never
	renormalized; the norm drift is reported instead.

	Args:
		schedule (HamiltonianSchedule):
			Hamiltonian in rad/ns
		psi0 (FockVector):
			Initial state
		rel_tol (float, optional):
			Relative tolerance.
			Defaults to 1e-10.
		abs_tol (float, optional):
			Absolute tolerance.
			Defaults to 1e-12.
		sample_times (Sequence[float] | None, optional):
			Times at which to record the state, inside t_span; a list or a numpy array, in any order.
			Defaults to None.

	Raises:
		DimensionError: if psi0 does not live on the schedule's space
		StiffnessError: if the step size underflows
		AccuracyError: if the norm drifts by more than 1e-6
	"""
	if psi0.dims != schedule.dims:
		raise DimensionError(f'Initial state on {psi0.dims} but schedule on {schedule.dims}.')

	t0, t1 = schedule.t_span
	samples = [] if sample_times is None else sorted(np.asarray(sample_times, dtype=np.float64).ravel().tolist())
	if samples and not (t0 - 1e-12 <= samples[0] and samples[-1] <= t1 + 1e-12):
		raise DomainError(f'Sample times must lie inside {schedule.t_span}.')

	norm0 = psi0.norm
	trajectory: list[tuple[float, FockVector]] = []
	while samples and samples[0] <= t0:
		trajectory.append((samples.pop(0), psi0))
	if t1 == t0:
		return EvolutionResult(psi0, 0.0, StepStats(0, 0, 0), tuple(trajectory))

	nfev = 0

	def rhs(t: float, y: ComplexArray) -> ComplexArray:
		nonlocal nfev
		nfev += 1
		return -1j * schedule.apply(t, y)

	solver = DOP853(rhs, t0, np.array(psi0.amps), t1, rtol=rel_tol, atol=abs_tol)
	accepted = attempts = 0
	drift = 0.0
	while solver.status == 'running':
		before = nfev
		message = solver.step()
		if solver.status == 'failed':
			raise StiffnessError(f'Integrator failed at t={solver.t:.9g} ns: {message}')
		accepted += 1
		attempts += max(1, (nfev - before) // DOP853.n_stages)
		drift = max(drift, abs(float(np.linalg.norm(solver.y)) - norm0))

		if samples and samples[0] <= solver.t:
			interpolant = solver.dense_output()
			while samples and samples[0] <= solver.t:
				t = samples.pop(0)
				amps = solver.y if t >= solver.t else interpolant(t)
				trajectory.append((t, FockVector(psi0.dims, amps, psi0.tail_mass)))

	final = FockVector(psi0.dims, solver.y, psi0.tail_mass)
	trajectory.extend((t, final) for t in samples)

	stats = StepStats(accepted, attempts - accepted, nfev)
	logger.debug('evolve over %s ns: %s, norm drift %.3e', schedule.t_span, stats, drift)
	if drift > NORM_FAIL:
		raise AccuracyError(f'Norm drift {drift:.3e} exceeds {NORM_FAIL:g}; tighten tolerances or enlarge dims.')
	if drift > NORM_WARN:
		logger.warning('Norm drift %.3e above %g over %s ns', drift, NORM_WARN, schedule.t_span)

	return EvolutionResult(final, drift, stats, tuple(trajectory))


def _rk4(schedule: HamiltonianSchedule, amps: ComplexArray, n_steps: int) -> ComplexArray:
	t0, t1 = schedule.t_span
	h = (t1 - t0) / n_steps

	def f(t: float, y: ComplexArray) -> ComplexArray:
		return -1j * schedule.apply(t, y)

	y = np.array(amps)
	for k in range(n_steps):
		t = t0 + k * h
		k1 = f(t, y)
		k2 = f(t + h / 2, y + h / 2 * k1)
		k3 = f(t + h / 2, y + h / 2 * k2)
		k4 = f(t + h, y + h * k3)
		y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
	return y


def evolve_fixed_step(
	schedule: HamiltonianSchedule, psi0: FockVector, n_steps: int, extrapolate: bool = True
) -> FockVector:
	"""Fixed-step classical Runge-Kutta evolution, an oracle independent of `evolve`.

	With `extrapolate`, the run is repeated at half the step and the two results
	are combined by Richardson extrapolation (16 y_{h/2} - y_h)/15.

	Args:
		schedule (HamiltonianSchedule):
			Hamiltonian in rad/ns
		psi0 (FockVector):
			Initial state
		n_steps (int):
			Number of steps of the coarse run
		extrapolate (bool, optional):
			Whether to add the halved-step run and extrapolate.
			Defaults to True.
	"""
	if psi0.dims != schedule.dims:
		raise DimensionError(f'Initial state on {psi0.dims} but schedule on {schedule.dims}.')
	if n_steps < 1:
		raise DomainError(f'evolve_fixed_step needs n_steps >= 1 ({n_steps} passed).')

	coarse = _rk4(schedule, psi0.amps, n_steps)
	if not extrapolate:
		return FockVector(psi0.dims, coarse, psi0.tail_mass)
	fine = _rk4(schedule, psi0.amps, 2 * n_steps)
	return FockVector(psi0.dims, (16 * fine - coarse) / 15, psi0.tail_mass)


def resonator_hamiltonian(
	delta_fn: RealFn,
	drive_fn: ComplexFn,
	dim: int,
	t_span: tuple[float, float],
	offset_fn: RealFn | None = None,
) -> HamiltonianSchedule:
	"""Build H(t) = delta(t) a^dagger a - [drive(t) a^dagger + conj(drive(t)) a].

	Args:
		delta_fn (RealFn):
			Detuning in rad/ns
		drive_fn (ComplexFn):
			Drive amplitude in rad/ns
		dim (int):
			Truncation dimension (>= 2)
		t_span (tuple[float, float]):
			Start and end time (ns)
		offset_fn (RealFn | None, optional):
			Classical energy term.
			Defaults to None.
	"""
	a_dag = lowering_operator(dim).dag().entries
	return HamiltonianSchedule(
		(dim,),
		(
			Term(((0, number_operator(dim).entries),), delta_fn),
			Term(((0, a_dag),), lambda t: -drive_fn(t), paired=True),
		),
		t_span,
		offset_fn,
	)


def bare_schedule(spec: RampSpec, dim: int) -> HamiltonianSchedule:
	"""Uncorrected ramp H0: drive Omega0(t) at fixed detuning."""
	return resonator_hamiltonian(lambda t: spec.delta, spec.omega0, dim, (0.0, spec.t_ramp))


def ff_schedule(spec: RampSpec, dim: int, keep_offset: bool = False) -> HamiltonianSchedule:
	"""Fast-forward Hamiltonian: drive Omega_FF(t) at fixed detuning.

	With `keep_offset`, the classical term Delta alpha_FF^2 is kept so the global
	phase of the evolved state follows the closed form of `analytic_ff_state`.
	"""
	offset = (lambda t: spec.delta * spec.alpha_ff(t) ** 2) if keep_offset else None
	return resonator_hamiltonian(lambda t: spec.delta, spec.omega_ff, dim, (0.0, spec.t_ramp), offset)


def cd_schedule(spec: RampSpec, dim: int) -> HamiltonianSchedule:
	"""Counter-diabatic Hamiltonian: complex drive Omega0 - i Omega0'/Delta."""
	return resonator_hamiltonian(lambda t: spec.delta, spec.omega_cd, dim, (0.0, spec.t_ramp))


def linear_schedule(
	delta_i: float, delta_f: float, omega_i: float, t_final: float, dim: int
) -> HamiltonianSchedule:
	"""Comparison Hamiltonian: linear detuning sweep at fixed drive."""
	return resonator_hamiltonian(
		lambda t: linear_detuning(delta_i, delta_f, t_final, t), lambda t: omega_i, dim, (0.0, t_final)
	)


def _cached_lambda(clock: ScaledClock) -> Callable[[float], float]:
	"""Per-schedule memo of Lambda(t); every term of one step asks for the same times."""
	return lru_cache(maxsize=64)(clock.lambda_of)


def ff_ts_schedule(clock: ScaledClock, dim: int, keep_offset: bool = False) -> HamiltonianSchedule:
	"""Fixed-drive time-scaled fast-forward Hamiltonian.

	Detuning Delta_FF,TS(t) with the drive held at Omega_i. With `keep_offset` the
	time-scaled classical term S(t) Delta_i alpha_FF(Lambda)^2 is kept.
	"""
	lam = _cached_lambda(clock)
	ramp = clock.ramp

	def delta(t: float) -> float:
		return clock.delta_i / clock.drive_ratio(lam(t))

	def offset(t: float) -> float:
		return delta(t) * ramp.alpha_ff(lam(t)) ** 2

	return resonator_hamiltonian(
		delta, lambda t: clock.omega_i, dim, (0.0, clock.t_final), offset if keep_offset else None
	)


def _scaled_offset(
	offset: RealFn | None, clock: ScaledClock, lam: Callable[[float], float]
) -> RealFn | None:
	if offset is None:
		return None
	return lambda t: offset(lam(t)) / clock.drive_ratio(lam(t))


def time_scaled(schedule: HamiltonianSchedule, clock: ScaledClock) -> HamiltonianSchedule:
	"""Map a reference schedule on [0, T_f] to S(t) H(Lambda(t)) on [0, t_f]."""
	if schedule.t_span[0] != 0 or not math.isclose(schedule.t_span[1], clock.t_ramp, rel_tol=1e-12):
		raise DomainError(
			f'time_scaled needs a reference schedule on [0, {clock.t_ramp}] ({schedule.t_span} passed).'
		)
	lam = _cached_lambda(clock)

	def scale(fn: Callable[[float], complex]) -> ComplexFn:
		return lambda t: complex(fn(lam(t))) / clock.drive_ratio(lam(t))

	terms = tuple(Term(term.factors, scale(term.coeff), term.paired) for term in schedule.terms)
	return HamiltonianSchedule(schedule.dims, terms, (0.0, clock.t_final), _scaled_offset(schedule.offset, clock, lam))


def coherent_trajectory(
	delta_fn: RealFn,
	drive_fn: ComplexFn,
	alpha0: complex,
	t_span: tuple[float, float],
	sample_times: Sequence[float],
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
) -> ComplexArray:
	"""Mean-field amplitude of a driven resonator started in a coherent state.

	A coherent state stays coherent under a linear drive, with
	d(alpha)/dt = -i Delta(t) alpha + i Omega(t).

	Returns:
		ComplexArray: alpha at each sample time
	"""

	def rhs(t: float, y: ComplexArray) -> ComplexArray:
		return np.array([-1j * delta_fn(t) * y[0] + 1j * drive_fn(t)])

	sol = solve_ivp(
		rhs,
		t_span,
		np.array([alpha0], dtype=np.complex128),
		method='DOP853',
		t_eval=np.asarray(sample_times, dtype=np.float64),
		rtol=rel_tol,
		atol=abs_tol,
	)
	if not sol.success:
		raise StiffnessError(f'Mean-field integration failed: {sol.message}')
	return np.asarray(sol.y[0], dtype=np.complex128)


def resonator_dim(alpha_max: float, n: int = 0) -> int:
	"""Truncation for a resonator whose displacement reaches `alpha_max`, holding Fock level n."""
	return max(default_dim(alpha_max) + 2 * n, minimal_dim(alpha_max) + 2 * n)


def _visited_dim(
	delta_fn: RealFn,
	drive_fn: ComplexFn,
	alpha0: complex,
	t_span: tuple[float, float],
	endpoints: Sequence[complex] = (),
	n: int = 0,
) -> int:
	"""Truncation holding every |alpha| of the mean-field run and the given start/target amplitudes."""
	alphas = coherent_trajectory(delta_fn, drive_fn, alpha0, t_span, np.linspace(*t_span, 401))
	alpha_max = max(float(np.max(np.abs(alphas))), abs(alpha0), *(abs(a) for a in endpoints))
	dim = resonator_dim(alpha_max, n)
	logger.debug('Resonator truncation %d for max |alpha| %.4g', dim, alpha_max)
	return dim


def analytic_ff_state(spec: RampSpec, c_coeffs: Sequence[complex], t: float, dim: int) -> FockVector:
	"""Fast-forwarded state with its exact global phase.

	Returns exp(-i phi(t)) D(alpha_tilde(t)) sum_n c_n exp(-i n Delta t) |n>, where
	phi(t) is the integral of alpha_FF alpha0''/Delta from 0 to t, taken by
	adaptive quadrature.

	Args:
		spec (RampSpec):
			Ramp problem
		c_coeffs (Sequence[complex]):
			Normalized amplitudes of the initial state in the displaced frame
		t (float):
			Time in [0, T_f] (ns)
		dim (int):
			Truncation dimension

	Raises:
		DomainError: if the coefficients are not normalized or t is off the ramp
		TruncationError: if dim cannot hold the displaced superposition at t
		AccuracyError: if the phase quadrature misses 1e-10
	"""
	coeffs = np.asarray(c_coeffs, dtype=np.complex128)
	if abs(float(np.vdot(coeffs, coeffs).real) - 1) > 1e-10:
		raise DomainError('analytic_ff_state needs normalized coefficients.')
	if coeffs.size > dim:
		raise DimensionError(f'{coeffs.size} coefficients do not fit dim {dim}.')

	phase, abserr = quad(spec.phase_rate, 0, t, epsabs=1e-12, epsrel=1e-12, limit=200) if t > 0 else (0.0, 0.0)
	if abserr > 1e-10:
		raise AccuracyError(f'Phase quadrature error {abserr:.3e} at t={t} ns exceeds 1e-10.')

	frame = coeffs * np.exp(-1j * np.arange(coeffs.size) * spec.delta * t)
	state = displace_levels(spec.alpha_tilde(t), frame, dim, what='analytic_ff_state')
	return state.scaled(np.exp(-1j * phase))


@dataclass(frozen=True)
class CdReport:
	"""Result of `cd_drive_check`."""

	n: int
	"""Fock level followed"""
	max_infidelity: float
	"""Worst instantaneous infidelity against D(alpha0(t))|n>"""
	worst_time: float
	"""Time of the worst sample (ns)"""
	norm_drift: float
	"""Norm drift of the run"""


def cd_drive_check(
	spec: RampSpec,
	n: int,
	dim: int,
	samples: int = 41,
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
) -> CdReport:
	"""Check that the counter-diabatic drive tracks the displaced Fock state D(alpha0(t))|n>.

	Args:
		spec (RampSpec):
			Ramp problem
		n (int):
			Fock level
		dim (int):
			Truncation dimension
		samples (int, optional):
			Number of equally spaced checkpoints.
			Defaults to 41.
		rel_tol (float, optional):
			Integrator relative tolerance.
			Defaults to 1e-10.
		abs_tol (float, optional):
			Integrator absolute tolerance.
			Defaults to 1e-12.
	"""
	times = np.linspace(0, spec.t_ramp, samples)
	result = evolve(cd_schedule(spec, dim), displaced_fock(spec.alpha0(0), n, dim), rel_tol, abs_tol, times)

	worst, worst_t = 0.0, 0.0
	for t, state in result.trajectory:
		infidelity = 1 - fidelity(state, displaced_fock(spec.alpha0(t), n, dim))
		if infidelity > worst:
			worst, worst_t = infidelity, t
	return CdReport(n, worst, worst_t, result.norm_drift)


@dataclass(frozen=True)
class RunReport:
	"""Final-state infidelity of one simulated schedule."""

	infidelity: float
	"""1 - |<target|psi(t_end)>|^2"""
	norm_drift: float
	dim: int
	"""Truncation used"""
	step_stats: StepStats


def within_convergence(reference: float, refined: float) -> bool:
	"""Whether a refined infidelity agrees with the reference to 10% or 1e-9."""
	return abs(refined - reference) < max(0.1 * abs(reference), 1e-9)


def ramp_infidelity(
	spec: RampSpec,
	run: ResonatorRun,
	dim: int | None = None,
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
) -> RunReport:
	"""Ramp the drive from |alpha0(0)> and compare against |alpha0(T_f)>.

	Args:
		spec (RampSpec):
			Ramp problem
		run (ResonatorRun):
			'bare' (uncorrected drive), 'ff' (fast-forward) or 'cd' (counter-diabatic)
		dim (int | None, optional):
			Truncation; chosen from the mean-field trajectory when omitted.
			Defaults to None.
		rel_tol (float, optional):
			Integrator relative tolerance.
			Defaults to 1e-10.
		abs_tol (float, optional):
			Integrator absolute tolerance.
			Defaults to 1e-12.
	"""
	drives: dict[str, ComplexFn] = {'bare': spec.omega0, 'ff': spec.omega_ff, 'cd': spec.omega_cd}
	builders = {'bare': bare_schedule, 'ff': ff_schedule, 'cd': cd_schedule}
	if run not in builders:
		raise DomainError(f'Unknown resonator run {run!r}.')

	alpha_start, alpha_end = spec.alpha0(0), spec.alpha0(spec.t_ramp)
	if dim is None:
		dim = _visited_dim(lambda t: spec.delta, drives[run], alpha_start, (0.0, spec.t_ramp), (alpha_end,))

	result = evolve(builders[run](spec, dim), coherent_state(alpha_start, dim), rel_tol, abs_tol)
	infidelity = 1 - fidelity(result.final_state, coherent_state(alpha_end, dim))
	return RunReport(max(0.0, infidelity), result.norm_drift, dim, result.step_stats)


def detuning_infidelity(
	delta_i: float,
	delta_f: float,
	omega_i: float,
	t_final: float,
	kind: ScheduleKind,
	dim: int | None = None,
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
) -> RunReport:
	"""Sweep the detuning at fixed drive from |Omega_i/Delta_i> and compare against |Omega_i/Delta_f>.

	Args:
		delta_i (float):
			Initial detuning (rad/ns)
		delta_f (float):
			Final detuning (rad/ns)
		omega_i (float):
			Fixed drive (rad/ns)
		t_final (float):
			Wall-clock duration (ns)
		kind (ScheduleKind):
			'ff_ts' (fast-forward with time scaling) or 'linear'
		dim (int | None, optional):
			Truncation; chosen from the mean-field trajectory when omitted.
			Defaults to None.
		rel_tol (float, optional):
			Integrator relative tolerance.
			Defaults to 1e-10.
		abs_tol (float, optional):
			Integrator absolute tolerance.
			Defaults to 1e-12.
	"""
	delta_fn: RealFn
	build: Callable[[int], HamiltonianSchedule]
	if kind == 'ff_ts':
		clock = ScaledClock(delta_i, delta_f, omega_i, 2 * t_final / (delta_i / delta_f + 1))
		delta_fn = clock.delta_ff_ts
		build = lambda dim: ff_ts_schedule(clock, dim)  # noqa: E731
	elif kind == 'linear':
		delta_fn = lambda t: linear_detuning(delta_i, delta_f, t_final, t)  # noqa: E731
		build = lambda dim: linear_schedule(delta_i, delta_f, omega_i, t_final, dim)  # noqa: E731
	else:
		raise DomainError(f'Unknown schedule kind {kind!r}.')

	alpha_start, alpha_end = omega_i / delta_i, omega_i / delta_f
	if dim is None:
		dim = _visited_dim(delta_fn, lambda t: omega_i, alpha_start, (0.0, t_final), (alpha_end,))

	result = evolve(build(dim), coherent_state(alpha_start, dim), rel_tol, abs_tol)
	infidelity = 1 - fidelity(result.final_state, coherent_state(alpha_end, dim))
	return RunReport(max(0.0, infidelity), result.norm_drift, dim, result.step_stats)
