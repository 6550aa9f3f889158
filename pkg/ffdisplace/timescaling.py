"""Module holding the ScaledClock class.

The scaled clock combines fast-forward driving with time scaling: the drive is
held at Omega_i and the detuning is moved from Delta_i to Delta_f instead. The
reference ramp runs over [0, T_f] in scaled time Lambda; wall-clock time runs
over [0, t_f] with t_f = (Delta_i/Delta_f + 1) T_f / 2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleScheduleError, SolverError
from .pulses import RampSpec, smoothstep
from .types import mhz

logger = logging.getLogger(__name__)

FEASIBILITY_POINTS = 1001
"""Grid size for the positivity check of the fast-forward drive"""


@dataclass(frozen=True)
class ScaledClock:
	"""The solved time-scaling map Lambda(t) and its detuning schedule.

	Lambda solves F(Lambda) = t with
	F(L) = L + (r - 1)[G(L) + 60 W(L)/(Delta_i^2 T_f^2)], r = Delta_i/Delta_f,
	and dF/dL = Omega_FF(L)/Omega_i, so F is strictly increasing whenever the
	fast-forward drive keeps its sign. That is checked on construction.
	"""

	delta_i: float
	"""Initial detuning (rad/ns)"""
	delta_f: float
	"""Final detuning (rad/ns), same sign as delta_i"""
	omega_i: float
	"""Fixed drive amplitude (rad/ns)"""
	t_ramp: float
	"""Reference ramp duration T_f (ns)"""
	solver_tol: float = 1e-12
	"""Relative tolerance of the Lambda root solve"""

	t_final: float = field(init=False)
	"""Wall-clock duration t_f (ns)"""
	ramp: RampSpec = field(init=False, repr=False)
	"""Reference ramp Omega_i -> Omega_i Delta_i/Delta_f at detuning Delta_i"""

	def __post_init__(self) -> None:
		"""Validate the inputs and check that the schedule is feasible.

		Raises:
			DomainError: sign or range violations
			InfeasibleScheduleError: if Omega_FF vanishes inside the ramp
		"""
		if self.delta_i == 0 or self.delta_f == 0:
			raise DomainError('ScaledClock detunings must be nonzero.')
		if self.delta_i * self.delta_f < 0:
			raise DomainError(
				f'ScaledClock detunings must share a sign ({self.delta_i} and {self.delta_f} passed).'
			)
		if self.omega_i == 0:
			raise DomainError('ScaledClock.omega_i must be nonzero.')
		if not self.t_ramp > 0:
			raise DomainError(f'ScaledClock.t_ramp must be > 0 ({self.t_ramp} passed).')
		if not 0 < self.solver_tol < 1:
			raise DomainError(f'ScaledClock.solver_tol must be in (0, 1) ({self.solver_tol} passed).')

		object.__setattr__(self, 't_final', 0.5 * (self.ratio + 1) * self.t_ramp)
		object.__setattr__(
			self, 'ramp', RampSpec(self.omega_i, self.omega_i * self.ratio, self.t_ramp, self.delta_i)
		)
		self._check_feasible()

		logger.debug(
			'Scaled clock: ratio=%.6g, T_f=%.6g ns, t_f=%.6g ns', self.ratio, self.t_ramp, self.t_final
		)

	@classmethod
	def from_mhz(
		cls, delta_i: float, delta_f: float, omega_i: float, t_ramp: float, solver_tol: float = 1e-12
	) -> ScaledClock:
		"""Create a clock from frequencies quoted as nu = omega/2pi in MHz.

		Args:
			delta_i (float):
				Initial detuning (MHz)
			delta_f (float):
				Final detuning (MHz)
			omega_i (float):
				Drive amplitude (MHz)
			t_ramp (float):
				Reference ramp duration (ns)
			solver_tol (float, optional):
				Relative tolerance of the Lambda solve.
				Defaults to 1e-12.
		"""
		return cls(mhz(delta_i), mhz(delta_f), mhz(omega_i), t_ramp, solver_tol)

	@property
	def ratio(self) -> float:
		"""Delta_i / Delta_f."""
		return self.delta_i / self.delta_f

	def _curvature(self) -> float:
		return 60 / (self.delta_i * self.t_ramp) ** 2

	def drive_ratio(self, lam: float) -> float:
		"""Omega_FF(Lambda)/Omega_i, the derivative dF/dLambda."""
		shape = smoothstep(min(max(lam / self.t_ramp, 0.0), 1.0))
		return 1 + (self.ratio - 1) * (shape.g + self._curvature() * shape.w)

	def reference_time(self, lam: float) -> float:
		"""F(Lambda): the wall-clock time at which the scaled clock reads `lam`."""
		shape = smoothstep(min(max(lam / self.t_ramp, 0.0), 1.0))
		return lam + (self.ratio - 1) * self.t_ramp * (shape.big_g + self._curvature() * shape.big_w)

	def _check_feasible(self) -> None:
		grid = np.linspace(0, self.t_ramp, FEASIBILITY_POINTS)
		ratios = np.array([self.drive_ratio(lam) for lam in grid])
		bad = np.flatnonzero(ratios <= 0)
		if bad.size == 0:
			return

		# drive_ratio(0) = 1, so the first bad index has a positive left neighbour
		k = int(bad[0])
		where = float(brentq(self.drive_ratio, grid[k - 1], grid[k])) if ratios[k] < 0 else float(grid[k])
		raise InfeasibleScheduleError(
			f'Fast-forward drive vanishes at Lambda={where:.6g} ns'
			f' (T_f={self.t_ramp} ns, Delta_i/Delta_f={self.ratio:.6g}); increase t_ramp.',
			where,
		)

	def _check_time(self, t: float) -> float:
		tol = 1e-12 * self.t_final
		if not -tol <= t <= self.t_final + tol:
			raise DomainError(f'Time {t} ns outside scaled schedule [0, {self.t_final}] ns.')
		return min(max(t, 0.0), self.t_final)

	def lambda_of(self, t: float) -> float:
		"""Solve for Lambda(t) by bracketed root finding with a Newton polish.

		Args:
			t (float):
				Wall-clock time in [0, t_f] (ns)

		Raises:
			DomainError: if t is outside [0, t_f]
			SolverError: if the root solve does not meet its residual target
		"""
		t = self._check_time(t)
		if t == 0:
			return 0.0
		if t == self.t_final:
			return self.t_ramp

		def residual(lam: float) -> float:
			return self.reference_time(lam) - t

		try:
			lam = float(brentq(residual, 0, self.t_ramp, xtol=self.solver_tol * self.t_ramp, maxiter=200))
		except (RuntimeError, ValueError) as exc:
			raise SolverError(f'Scaled-clock root solve failed at t={t} ns: {exc}') from exc

		for _ in range(3):
			step = residual(lam) / self.drive_ratio(lam)
			lam = min(max(lam - step, 0.0), self.t_ramp)
			if abs(step) <= 1e-16 * self.t_ramp:
				break

		if abs(residual(lam)) > self.solver_tol * self.t_final:
			raise SolverError(
				f'Scaled-clock residual {abs(residual(lam)):.3e} ns at t={t} ns'
				f' exceeds {self.solver_tol * self.t_final:.3e} ns.'
			)
		return lam

	def scaling_factor(self, t: float) -> float:
		"""S(t) = Omega_i/Omega_FF(Lambda(t)) = dLambda/dt."""
		return 1 / self.drive_ratio(self.lambda_of(t))

	def delta_ff_ts(self, t: float) -> float:
		"""Detuning Delta_i Omega_i/Omega_FF(Lambda(t)) at fixed drive Omega_i."""
		return self.delta_i * self.scaling_factor(t)

	def integrated_scaling(self) -> float:
		"""Quadrature of S over [0, t_f]; equals T_f for a consistent clock."""
		value, _ = quad(self.scaling_factor, 0, self.t_final, epsabs=1e-13 * self.t_ramp, epsrel=1e-12, limit=200)
		return float(value)


def make_clock(
	delta_i: float, delta_f: float, omega_i: float, t_ramp: float, solver_tol: float = 1e-12
) -> ScaledClock:
	"""Create and validate a scaled clock (angular units).

	Args:
		delta_i (float):
			Initial detuning (rad/ns)
		delta_f (float):
			Final detuning (rad/ns)
		omega_i (float):
			Fixed drive amplitude (rad/ns)
		t_ramp (float):
			Reference ramp duration T_f (ns)
		solver_tol (float, optional):
			Relative tolerance of the Lambda solve.
			Defaults to 1e-12.

	Raises:
		DomainError: mixed-sign detunings, zero drive or nonpositive t_ramp
		InfeasibleScheduleError: if Omega_FF changes sign on the ramp
	"""
	return ScaledClock(delta_i, delta_f, omega_i, t_ramp, solver_tol)


def lambda_of(clock: ScaledClock, t: float) -> float:
	"""Scaled time Lambda(t) of `clock`."""
	return clock.lambda_of(t)


def delta_ff_ts(clock: ScaledClock, t: float) -> float:
	"""Fixed-drive detuning schedule of `clock` at wall-clock time t."""
	return clock.delta_ff_ts(t)


def scaling_factor(clock: ScaledClock, t: float) -> float:
	"""S(t) of `clock`."""
	return clock.scaling_factor(t)


def linear_detuning(delta_i: float, delta_f: float, t_final: float, t: float) -> float:
	"""Straight-line detuning Delta_i + (Delta_f - Delta_i) t/t_f used as the comparison schedule."""
	if not 0 <= t <= t_final * (1 + 1e-12):
		raise DomainError(f'Time {t} ns outside linear schedule [0, {t_final}] ns.')
	return delta_i + (delta_f - delta_i) * min(t, t_final) / t_final
