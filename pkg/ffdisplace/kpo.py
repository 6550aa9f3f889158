"""Two Kerr parametric oscillators joined by a frequency-tunable coupler.

Mode order is always (KPO 1, KPO 2, coupler). Logical states are products of
coherent states |(-1)^k alpha_1, (-1)^l alpha_2, alpha_c>, with the coupler
amplitude slaved to the KPO amplitudes through the coupler detuning. Sweeping
the coupler detuning displaces the coupler; with the fast-forward time-scaled
schedule that displacement is exact in the effective coupler model.
"""

from __future__ import annotations

import cmath
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import repeat
from typing import TYPE_CHECKING, Callable, NamedTuple

import numpy as np
from scipy.integrate import quad

from .errors import AccuracyError, DimensionError, DomainError
from .fockspace import (
	FockVector,
	coherent_state,
	fidelity,
	lowering_operator,
	number_operator,
	reduced_density_matrix,
	require_adequate,
	tensor,
)
from .propagator import ABS_TOL, REL_TOL, HamiltonianSchedule, Term, evolve, resonator_hamiltonian
from .timescaling import ScaledClock, linear_detuning
from .types import mhz

if TYPE_CHECKING:
	from collections.abc import Mapping, Sequence
	from concurrent.futures import Executor

	from .types import RealFn, ScheduleKind

logger = logging.getLogger(__name__)

SWEEP_T_FINAL = (22.0, 33.0, 44.0, 55.0, 66.0, 88.0)
"""Default half-gate durations t_f (ns) of the displacement sweep"""


@dataclass(frozen=True)
class KpoSystemSpec:
	"""Parameters of the KPO-coupler-KPO system (angular units, rad/ns).

	The couplings must satisfy g_1c alpha_1 = g_2c alpha_2, so the antisymmetric
	coupler amplitude alpha_c^- vanishes for every detuning.
	"""

	kerr: tuple[float, float]
	"""Kerr nonlinearity K_j of each KPO"""
	pump: tuple[float, float]
	"""Parametric pump amplitude p_j of each KPO"""
	g_1c: float
	"""KPO 1 - coupler coupling"""
	g_2c: float
	"""KPO 2 - coupler coupling"""
	g_12: float
	"""Direct KPO - KPO coupling"""
	delta_i: float
	"""Coupler detuning at the gate boundaries"""
	delta_f: float
	"""Coupler detuning at the middle of the gate"""
	dims: tuple[int, int, int] = (24, 24, 12)
	"""Truncation of (KPO 1, KPO 2, coupler)"""

	def __post_init__(self) -> None:
		"""Validate signs, the balance condition and the truncations."""
		object.__setattr__(self, 'kerr', tuple(self.kerr))
		object.__setattr__(self, 'pump', tuple(self.pump))
		object.__setattr__(self, 'dims', tuple(int(d) for d in self.dims))

		if len(self.kerr) != 2 or len(self.pump) != 2 or len(self.dims) != 3:
			raise DimensionError('KpoSystemSpec needs 2 Kerr values, 2 pumps and 3 dims.')
		for k, p in zip(self.kerr, self.pump):
			if k == 0 or p / k <= 0:
				raise DomainError(f'KPO amplitude sqrt(p/K) must be real and nonzero (p={p}, K={k}).')
		if self.delta_i == 0 or self.delta_f == 0 or self.delta_i * self.delta_f < 0:
			raise DomainError(
				f'Coupler detunings must be nonzero with one sign ({self.delta_i}, {self.delta_f} passed).'
			)
		if min(self.dims) < 2:
			raise DimensionError(f'KpoSystemSpec dims must be >= 2 ({self.dims} passed).')

		a1, a2 = self.alpha
		left, right = self.g_1c * a1, self.g_2c * a2
		if abs(left - right) > 1e-12 * max(abs(left), abs(right)):
			raise DomainError(f'Couplings are unbalanced: g_1c alpha_1 = {left} but g_2c alpha_2 = {right}.')

	@classmethod
	def from_mhz(
		cls,
		kerr: Sequence[float],
		pump: Sequence[float],
		g_1c: float,
		g_2c: float,
		g_12: float,
		delta_i: float,
		delta_f: float,
		dims: Sequence[int] = (24, 24, 12),
	) -> KpoSystemSpec:
		"""Create a spec from frequencies quoted as nu = omega/2pi in MHz."""
		return cls(
			(mhz(kerr[0]), mhz(kerr[1])),
			(mhz(pump[0]), mhz(pump[1])),
			mhz(g_1c),
			mhz(g_2c),
			mhz(g_12),
			mhz(delta_i),
			mhz(delta_f),
			(dims[0], dims[1], dims[2]),
		)

	@classmethod
	def table_one(cls, dims: Sequence[int] = (24, 24, 12)) -> KpoSystemSpec:
		"""Reference parameters: K = 2 MHz, p = 8 MHz, g_jc = 2 MHz, g_12 = 20 kHz, 200 -> 20 MHz."""
		return cls.from_mhz((2, 2), (8, 8), 2, 2, 0.02, 200, 20, dims)

	def with_dims(self, dims: Sequence[int]) -> KpoSystemSpec:  # noqa: D102
		return dataclasses.replace(self, dims=(dims[0], dims[1], dims[2]))

	def with_coupling_scale(self, factor: float) -> KpoSystemSpec:
		"""Scale g_jc by `factor` and g_12 by factor^2.

		The zero-ZZ detuning g_1c g_2c / g_12, the KPO amplitudes and the detuning
		schedule stay the same; only the coupler displacement and the residual
		KPO-coupler interaction shrink.
		"""
		if not factor > 0:
			raise DomainError(f'Coupling scale must be > 0 ({factor} passed).')
		return dataclasses.replace(self, g_1c=self.g_1c * factor, g_2c=self.g_2c * factor, g_12=self.g_12 * factor**2)

	@property
	def alpha(self) -> tuple[float, float]:
		"""Coherent amplitudes sqrt(p_j/K_j) of the KPOs."""
		return (math.sqrt(self.pump[0] / self.kerr[0]), math.sqrt(self.pump[1] / self.kerr[1]))

	@property
	def omega_drive(self) -> float:
		"""Effective coupler drive g_1c alpha_1 + g_2c alpha_2."""
		a1, a2 = self.alpha
		return self.g_1c * a1 + self.g_2c * a2

	@property
	def e0(self) -> float:
		"""Zeroth-order energy sum K_j alpha_j^4 / 2."""
		return sum(k * a**4 / 2 for k, a in zip(self.kerr, self.alpha))

	@property
	def boundary_detuning(self) -> float:
		"""Coupler detuning g_1c g_2c / g_12 at which the ZZ coupling vanishes."""
		if self.g_12 == 0:
			return math.inf
		return self.g_1c * self.g_2c / self.g_12

	def e1(self, delta_c: float) -> float:
		"""First-order energy 2 alpha_1 alpha_2 (g_12 - g_1c g_2c / delta_c)."""
		_check_detuning(delta_c)
		a1, a2 = self.alpha
		return 2 * a1 * a2 * (self.g_12 - self.g_1c * self.g_2c / delta_c)


def _check_detuning(delta_c: float) -> None:
	if delta_c == 0:
		raise DomainError('Coupler detuning must be nonzero.')


def kpo_detuning(spec: KpoSystemSpec, delta_c: float) -> tuple[float, float]:
	"""KPO detunings g_jc^2 / delta_c that cancel the single-qubit X rotations."""
	_check_detuning(delta_c)
	return (spec.g_1c**2 / delta_c, spec.g_2c**2 / delta_c)


def coupler_amplitude(spec: KpoSystemSpec, delta_c: float) -> tuple[float, float]:
	"""Coupler amplitudes (alpha_c^+, alpha_c^-) = (g_1c alpha_1 +- g_2c alpha_2) / delta_c."""
	_check_detuning(delta_c)
	a1, a2 = spec.alpha
	return ((spec.g_1c * a1 + spec.g_2c * a2) / delta_c, (spec.g_1c * a1 - spec.g_2c * a2) / delta_c)


def _check_bits(k: int, l: int) -> None:  # noqa: E741
	if k not in (0, 1) or l not in (0, 1):
		raise DomainError(f'Logical labels must be bits ({k}, {l} passed).')


def logical_state(spec: KpoSystemSpec, k: int, l: int, delta_c: float | None = None) -> FockVector:  # noqa: E741
	"""Product state |(-1)^k alpha_1, (-1)^l alpha_2, alpha_c> for logical label (k, l).

	The coupler amplitude is -(sum_j (-1)^{k_j} g_jc alpha_j)/delta_c, which is
	-alpha_c^+ for (0,0), -alpha_c^- for (0,1), alpha_c^- for (1,0) and alpha_c^+
	for (1,1).

	Args:
		spec (KpoSystemSpec):
			System parameters
		k (int):
			Bit of KPO 1
		l (int):
			Bit of KPO 2
		delta_c (float | None, optional):
			Coupler detuning; the boundary value delta_i when omitted.
			Defaults to None.
	"""
	_check_bits(k, l)
	delta_c = spec.delta_i if delta_c is None else delta_c
	_check_detuning(delta_c)

	b1, b2 = (-1) ** k * spec.alpha[0], (-1) ** l * spec.alpha[1]
	coupler = -(spec.g_1c * b1 + spec.g_2c * b2) / delta_c
	d1, d2, dc = spec.dims
	return tensor([coherent_state(b1, d1), coherent_state(b2, d2), coherent_state(coupler, dc)])


@dataclass(frozen=True)
class CouplerSchedule:
	"""Coupler detuning over a full gate [0, t_g], mirrored about t_g/2.

	The first half runs the chosen detuning sweep from delta_i to delta_f over
	[0, t_f]; the second half retraces it, delta_c(t) = delta_c(t_g - t).
	"""

	kind: ScheduleKind
	"""'ff_ts' or 'linear'"""
	delta_i: float
	delta_f: float
	t_final: float
	"""Half-gate duration t_f (ns)"""
	clock: ScaledClock | None = None
	"""Scaled clock of an 'ff_ts' schedule"""

	_lambda: Callable[[float], float] | None = field(init=False, repr=False, compare=False, default=None)

	def __post_init__(self) -> None:
		"""Check the kind and memoize the clock."""
		if self.kind == 'ff_ts':
			if self.clock is None:
				raise DomainError("An 'ff_ts' coupler schedule needs a scaled clock.")
			object.__setattr__(self, '_lambda', lru_cache(maxsize=128)(self.clock.lambda_of))
		elif self.kind != 'linear':
			raise DomainError(f'Unknown schedule kind {self.kind!r}.')

	@property
	def t_gate(self) -> float:
		"""Full gate time t_g = 2 t_f."""
		return 2 * self.t_final

	def half_time(self, t: float) -> float:
		"""Map t in [0, t_g] onto the first half."""
		if not -1e-12 * self.t_gate <= t <= self.t_gate * (1 + 1e-12):
			raise DomainError(f'Time {t} ns outside gate [0, {self.t_gate}] ns.')
		t = min(max(t, 0.0), self.t_gate)
		return t if t <= self.t_final else self.t_gate - t

	def scaled_time(self, t: float) -> float:
		"""Lambda(t) of the first-half clock ('ff_ts' only)."""
		if self._lambda is None:
			raise DomainError('A linear schedule has no scaled clock.')
		return self._lambda(t)

	def delta_c(self, t: float) -> float:
		"""Coupler detuning at time t in [0, t_g]."""
		t = self.half_time(t)
		if self.clock is not None:
			return self.clock.delta_i / self.clock.drive_ratio(self.scaled_time(t))
		return linear_detuning(self.delta_i, self.delta_f, self.t_final, t)


def coupler_schedule(spec: KpoSystemSpec, t_ramp: float, solver_tol: float = 1e-12) -> CouplerSchedule:
	"""Fast-forward time-scaled coupler sweep for a reference ramp of length t_ramp.

	Raises:
		InfeasibleScheduleError: if the fast-forward drive changes sign
	"""
	clock = ScaledClock(spec.delta_i, spec.delta_f, spec.omega_drive, t_ramp, solver_tol)
	return CouplerSchedule('ff_ts', spec.delta_i, spec.delta_f, clock.t_final, clock)


def linear_coupler_schedule(spec: KpoSystemSpec, t_final: float) -> CouplerSchedule:
	"""Linear coupler sweep from delta_i to delta_f over t_final (and back)."""
	if not t_final > 0:
		raise DomainError(f't_final must be > 0 ({t_final} passed).')
	return CouplerSchedule('linear', spec.delta_i, spec.delta_f, t_final)


def schedule_for(spec: KpoSystemSpec, kind: ScheduleKind, t_final: float) -> CouplerSchedule:
	"""Coupler schedule of either kind whose first half lasts t_final."""
	if kind == 'ff_ts':
		return coupler_schedule(spec, 2 * t_final / (spec.delta_i / spec.delta_f + 1))
	if kind == 'linear':
		return linear_coupler_schedule(spec, t_final)
	raise DomainError(f'Unknown schedule kind {kind!r}.')


def full_hamiltonian(
	spec: KpoSystemSpec,
	delta_c_fn: RealFn,
	t_span: tuple[float, float],
	delta_j_fn: Callable[[float], tuple[float, float]] | None = None,
) -> HamiltonianSchedule:
	"""Three-mode rotating-frame Hamiltonian.

	H = sum_j [-K_j/2 a_j^dag2 a_j^2 + p_j/2 (a_j^dag2 + a_j^2) + Delta_j a_j^dag a_j]
	+ Delta_c a_c^dag a_c + sum_j g_jc (a_j^dag a_c + h.c.) + g_12 (a_1^dag a_2 + h.c.)

	Args:
		spec (KpoSystemSpec):
			System parameters
		delta_c_fn (RealFn):
			Coupler detuning (rad/ns)
		t_span (tuple[float, float]):
			Start and end time (ns)
		delta_j_fn (Callable[[float], tuple[float, float]] | None, optional):
			KPO detunings; slaved to g_jc^2/delta_c when omitted.
			Defaults to None.

	Raises:
		TruncationError: if a KPO truncation cannot hold alpha_j
	"""
	for j, (alpha, dim) in enumerate(zip(spec.alpha, spec.dims)):
		require_adequate(alpha, dim, f'KPO {j + 1}')

	require_adequate(spec.omega_drive / min(abs(spec.delta_i), abs(spec.delta_f)), spec.dims[2], 'coupler')

	delta_c = lru_cache(maxsize=16)(delta_c_fn)
	detunings: Callable[[float], tuple[float, float]]
	if delta_j_fn is None:
		detunings = lru_cache(maxsize=16)(lambda t: kpo_detuning(spec, delta_c(t)))
	else:
		detunings = delta_j_fn

	a = [lowering_operator(d).entries for d in spec.dims]
	a_dag = [op.conj().T for op in a]
	terms: list[Term] = []
	for j in (0, 1):
		kerr, pump = spec.kerr[j], spec.pump[j]
		terms += [
			Term(((j, a_dag[j] @ a_dag[j] @ a[j] @ a[j]),), lambda t, kerr=kerr: -kerr / 2),
			Term(((j, a_dag[j] @ a_dag[j]),), lambda t, pump=pump: pump / 2, paired=True),
			Term(((j, number_operator(spec.dims[j]).entries),), lambda t, j=j: detunings(t)[j]),
		]
	terms.append(Term(((2, number_operator(spec.dims[2]).entries),), delta_c))
	for j, g in ((0, spec.g_1c), (1, spec.g_2c)):
		terms.append(Term(((j, a_dag[j]), (2, a[2])), lambda t, g=g: g, paired=True))
	terms.append(Term(((0, a_dag[0]), (1, a[1])), lambda t: spec.g_12, paired=True))

	return HamiltonianSchedule(spec.dims, tuple(terms), t_span)


class EffectiveCoupler(NamedTuple):
	"""Coupler-only model for one logical branch."""

	schedule: HamiltonianSchedule
	"""Coupler Hamiltonian including the classical and branch energies"""
	energy: RealFn
	"""Branch energy E_{k,l}(t)"""


def branch_energy(spec: KpoSystemSpec, k: int, l: int, schedule: CouplerSchedule) -> RealFn:  # noqa: E741
	"""First-order energy E_{k,l}(t) = E0 +- E1(t), plus for k = l."""
	_check_bits(k, l)
	sign = 1 if k == l else -1

	def energy(t: float) -> float:
		return spec.e0 + sign * spec.e1(schedule.delta_c(t))

	return energy


def effective_coupler_hamiltonian(
	spec: KpoSystemSpec, k: int, l: int, schedule: CouplerSchedule, dim: int | None = None  # noqa: E741
) -> EffectiveCoupler:
	"""Coupler Hamiltonian seen by the logical branch (k, l).

	For k = l it is delta_c (a^dag -+ alpha_c^+)(a -+ alpha_c^+) + E_{k,k}, i.e. a
	resonator driven at +-(g_1c alpha_1 + g_2c alpha_2) with the classical term
	kept. For k != l it is delta_c a^dag a + E_{k,l}. E_{k,l} = E0 +- E1 with the
	plus sign for k = l.

	Args:
		spec (KpoSystemSpec):
			System parameters
		k (int):
			Bit of KPO 1
		l (int):
			Bit of KPO 2
		schedule (CouplerSchedule):
			Coupler detuning over the gate
		dim (int | None, optional):
			Coupler truncation; spec.dims[2] when omitted.
			Defaults to None.
	"""
	dim = spec.dims[2] if dim is None else dim
	energy = branch_energy(spec, k, l, schedule)

	t_span = (0.0, schedule.t_gate)
	if k != l:
		return EffectiveCoupler(resonator_hamiltonian(schedule.delta_c, lambda t: 0.0, dim, t_span, energy), energy)

	drive = spec.omega_drive if k == 1 else -spec.omega_drive

	def offset(t: float) -> float:
		return spec.omega_drive**2 / schedule.delta_c(t) + energy(t)

	return EffectiveCoupler(resonator_hamiltonian(schedule.delta_c, lambda t: drive, dim, t_span, offset), energy)


def _energy_integral(energy: RealFn, t_end: float, breakpoint: float) -> float:
	if t_end <= 0:
		return 0.0
	points = [breakpoint] if 0 < breakpoint < t_end else None
	value, abserr = quad(energy, 0, t_end, points=points, epsabs=1e-11, epsrel=1e-12, limit=400)
	if abserr > 1e-10:
		raise AccuracyError(f'Energy quadrature error {abserr:.3e} up to t={t_end} ns exceeds 1e-10.')
	return float(value)


def analytic_coupler_state(
	spec: KpoSystemSpec,
	k: int,
	l: int,  # noqa: E741
	schedule: CouplerSchedule,
	t: float,
	dim: int | None = None,
) -> FockVector:
	"""Phase-exact coupler state of branch (k, l) under the fast-forward schedule.

	For k = l the coupler follows |+-alpha_tilde(Lambda(t))> with phase
	exp(-i int_0^t E_kk - i int_0^Lambda(t) b). On the second half the state is the
	time reverse of the first half: displacement conj(alpha_tilde(Lambda(t_g - t)))
	and b-phase int_0^T_f b + int_Lambda(t_g - t)^T_f b. For k != l the coupler
	stays in vacuum with phase exp(-i int_0^t E_kl).
	"""
	_check_bits(k, l)
	if schedule.clock is None:
		raise DomainError('The analytic coupler state needs an ff_ts schedule.')
	dim = spec.dims[2] if dim is None else dim
	clock = schedule.clock
	ramp = clock.ramp

	t_half = schedule.half_time(t)
	energy = branch_energy(spec, k, l, schedule)
	phase = _energy_integral(energy, min(max(t, 0.0), schedule.t_gate), schedule.t_final)

	if k != l:
		return coherent_state(0, dim).scaled(cmath.exp(-1j * phase))

	lam = schedule.scaled_time(t_half)
	beta = ramp.alpha_tilde(lam)
	if t <= schedule.t_final:
		phase += ramp.phase(lam)
	else:
		beta = beta.conjugate()
		phase += 2 * ramp.phase(clock.t_ramp) - ramp.phase(lam)

	sign = 1 if k == 1 else -1
	return coherent_state(sign * beta, dim).scaled(cmath.exp(-1j * phase))


@dataclass(frozen=True)
class GateAngles:
	"""Rotation angles of the R_ZZ gate."""

	theta_ad: float
	"""2 int_0^t_g E1 dt"""
	theta_ff_global: float
	"""Global phase E0 t_g + int_0^T_f b"""
	theta_ff: float
	"""theta_ad + 2 int_0^T_f b"""


def gate_angles(spec: KpoSystemSpec, schedule: CouplerSchedule) -> GateAngles:
	"""Compute the gate angles of a fast-forward coupler schedule.

	The integral of b is evaluated by quadrature and checked against the closed
	form and against the wall-clock substitution dLambda = S dt.

	Raises:
		DomainError: if the schedule is not 'ff_ts'
		AccuracyError: if a quadrature misses 1e-10 or the evaluations of int b disagree by 1e-8
	"""
	if schedule.clock is None:
		raise DomainError('Gate angles need an ff_ts schedule.')
	clock = schedule.clock
	ramp = clock.ramp

	theta_ad = 2 * _energy_integral(lambda t: spec.e1(schedule.delta_c(t)), schedule.t_gate, schedule.t_final)

	b_quad, abserr = quad(ramp.phase_rate, 0, clock.t_ramp, epsabs=1e-13, epsrel=1e-12, limit=200)
	if abserr > 1e-10:
		raise AccuracyError(f'b quadrature error {abserr:.3e} exceeds 1e-10.')

	def wall_rate(t: float) -> float:
		lam = schedule.scaled_time(t)
		return ramp.phase_rate(lam) / clock.drive_ratio(lam)

	b_wall, _ = quad(wall_rate, 0, clock.t_final, epsabs=1e-13, epsrel=1e-12, limit=400)
	b_closed = ramp.phase(clock.t_ramp)
	spread = max(abs(b_quad - b_closed), abs(b_wall - b_closed))
	if spread > 1e-8:
		raise AccuracyError(f'Evaluations of the b integral disagree by {spread:.3e}.')
	logger.debug('b integral %.12g (quadrature spread %.2e)', b_closed, spread)

	return GateAngles(theta_ad, spec.e0 * schedule.t_gate + b_quad, theta_ad + 2 * b_quad)


@dataclass(frozen=True)
class SweepPoint:
	"""One point of the coupler displacement sweep.

	The effective coupler model treats the KPOs as frozen in their coherent
	states. In the full model the detuning sweep also excites the KPOs, through
	the residual ZZ term and through the coupler's transient departure from its
	slaved amplitude; `kpo_leakage` is that part of the infidelity. It scales as
	the fourth power of the KPO-coupler couplings.
	"""

	t_final: float
	"""Half-gate duration t_f (ns)"""
	schedule: ScheduleKind
	infidelity: float
	"""1 - |<target|psi(t_f)>|^2"""
	norm_drift: float
	kpo_leakage: float
	"""Probability outside |-alpha_1, -alpha_2> on the KPO pair, a lower bound of `infidelity`"""


def displacement_target(spec: KpoSystemSpec) -> FockVector:
	"""|-alpha_1, -alpha_2, (sum_j alpha_j g_jc)/delta_f>, the end of the (1,1) displacement."""
	d1, d2, dc = spec.dims
	a1, a2 = spec.alpha
	return tensor([
		coherent_state(-a1, d1),
		coherent_state(-a2, d2),
		coherent_state(spec.omega_drive / spec.delta_f, dc),
	])


def kpo_leakage(spec: KpoSystemSpec, state: FockVector) -> float:
	"""1 - <-alpha_1, -alpha_2| rho_KPO |-alpha_1, -alpha_2> of a three-mode state."""
	if state.dims != spec.dims:
		raise DimensionError(f'State on {state.dims} but system dims are {spec.dims}.')
	d1, d2, _ = spec.dims
	a1, a2 = spec.alpha
	left, right = coherent_state(-a1, d1), coherent_state(-a2, d2)
	coupler = np.einsum('i,j,ijk->k', left.amps.conj(), right.amps.conj(), state.as_tensor())
	kept = float(np.vdot(coupler, coupler).real) / state.norm**2
	return max(0.0, 1 - kept)


def displacement_point(
	spec: KpoSystemSpec,
	t_final: float,
	kind: ScheduleKind,
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
) -> SweepPoint:
	"""Run the full three-mode model from |~1,1> over [0, t_f] and score it against the target."""
	schedule = schedule_for(spec, kind, t_final)
	hamiltonian = full_hamiltonian(spec, schedule.delta_c, (0.0, t_final))
	result = evolve(hamiltonian, logical_state(spec, 1, 1), rel_tol, abs_tol)
	infidelity = max(0.0, 1 - fidelity(result.final_state, displacement_target(spec)))
	leakage = kpo_leakage(spec, result.final_state)
	logger.info('kpo sweep %s t_f=%g ns: infidelity %.6e, KPO leakage %.6e', kind, t_final, infidelity, leakage)
	return SweepPoint(t_final, kind, infidelity, result.norm_drift, leakage)


def run_displacement_experiment(
	spec: KpoSystemSpec,
	t_f_values: Sequence[float],
	schedule_kind: ScheduleKind,
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
	executor: Executor | None = None,
) -> list[SweepPoint]:
	"""Sweep the coupler displacement over t_f values, in input order.

	Args:
		spec (KpoSystemSpec):
			System parameters
		t_f_values (Sequence[float]):
			Half-gate durations (ns)
		schedule_kind (ScheduleKind):
			'ff_ts' or 'linear'
		rel_tol (float, optional):
			Integrator relative tolerance.
			Defaults to 1e-10.
		abs_tol (float, optional):
			Integrator absolute tolerance.
			Defaults to 1e-12.
		executor (Executor | None, optional):
			Pool to run points on; points run inline when omitted.
			Defaults to None.
	"""
	if not t_f_values:
		raise DomainError('The t_f sweep is empty.')

	args = (repeat(spec), t_f_values, repeat(schedule_kind), repeat(rel_tol), repeat(abs_tol))
	if executor is None:
		return list(map(displacement_point, *args))
	return list(executor.map(displacement_point, *args))


def rzz_target_state(
	spec: KpoSystemSpec, betas: Mapping[tuple[int, int], complex], theta: float, global_phase: float
) -> FockVector:
	"""exp(-i global_phase) R_ZZ(theta) sum_kl beta_kl |~k,l>, renormalized."""
	amps = np.zeros(math.prod(spec.dims), dtype=np.complex128)
	for (k, l), beta in betas.items():  # noqa: E741
		rotation = cmath.exp(-1j * (2 * (k == l) - 1) * theta / 2)
		amps += beta * rotation * logical_state(spec, k, l).amps
	amps *= cmath.exp(-1j * global_phase)
	return FockVector(spec.dims, amps / np.linalg.norm(amps))


def initial_superposition(spec: KpoSystemSpec, betas: Mapping[tuple[int, int], complex]) -> FockVector:
	"""sum_kl beta_kl |~k,l>, renormalized."""
	return rzz_target_state(spec, betas, 0.0, 0.0)


@dataclass(frozen=True)
class GateReport:
	"""Outcome of a full R_ZZ gate simulation."""

	fidelity: float
	"""|<target|Psi(t_g)>|^2 against exp(-i theta_FF) R_ZZ(Theta_FF)|Psi(0)>"""
	angles: GateAngles
	norm_drift: float
	final_state: FockVector


def run_gate(
	spec: KpoSystemSpec,
	t_ramp: float,
	betas: Mapping[tuple[int, int], complex],
	rel_tol: float = REL_TOL,
	abs_tol: float = ABS_TOL,
) -> GateReport:
	"""Simulate the full fast-forward R_ZZ gate over [0, t_g].

	Raises:
		DomainError: if delta_i is not the zero-ZZ detuning g_1c g_2c / g_12
	"""
	if not math.isclose(spec.delta_i, spec.boundary_detuning, rel_tol=1e-9):
		raise DomainError(
			f'The R_ZZ gate needs delta_i = g_1c g_2c / g_12 = {spec.boundary_detuning:.9g} rad/ns'
			f' ({spec.delta_i:.9g} passed).'
		)

	schedule = coupler_schedule(spec, t_ramp)
	angles = gate_angles(spec, schedule)
	psi0 = initial_superposition(spec, betas)
	result = evolve(full_hamiltonian(spec, schedule.delta_c, (0.0, schedule.t_gate)), psi0, rel_tol, abs_tol)
	target = rzz_target_state(spec, betas, angles.theta_ff, angles.theta_ff_global)
	return GateReport(fidelity(result.final_state, target), angles, result.norm_drift, result.final_state)


def coupler_reduced_fidelity(state: FockVector, expected: FockVector) -> float:
	"""<c|rho_c|c> of the coupler (last mode) of a three-mode state against a pure coupler state."""
	if expected.dims != state.dims[-1:]:
		raise DimensionError(f'Coupler state on {expected.dims} but system coupler dim is {state.dims[-1]}.')
	rho = reduced_density_matrix(state, len(state.dims) - 1)
	return float(np.real(np.vdot(expected.amps, rho @ expected.amps)))
