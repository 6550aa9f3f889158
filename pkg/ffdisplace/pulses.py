"""Drive-amplitude ramp design.

Provides the quintic smoothstep ramp, the fast-forward drive and displacement
derived from it, the counter-diabatic drive, and the closed-form global phase of
the fast-forwarded state.

Frequencies are angular (rad/ns) and times are in ns. `RampSpec.from_mhz` accepts
frequencies quoted as nu = omega/2pi in MHz.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

from numpy.polynomial import Polynomial

from .errors import DomainError
from .types import mhz

logger = logging.getLogger(__name__)

_SMOOTHSTEP = Polynomial([0, 0, 0, 10, -15, 6])
"""g(s) as a polynomial in s, used for the antiderivatives"""


class Smoothstep(NamedTuple):
	"""Ramp shape values at s = t/T_f.

	`big_g` and `big_w` are the antiderivatives from 0 of `g` and `w`, per unit
	T_f (i.e. G(t)/T_f and W(t)/T_f).
	"""

	g: float
	g_prime: float
	g_second: float
	big_g: float
	w: float
	big_w: float


def smoothstep(s: float) -> Smoothstep:
	"""Evaluate g(s) = 10s^3 - 15s^4 + 6s^5 with derivatives and integrals.

	Args:
		s (float):
			Normalized time in [0, 1]

	Raises:
		DomainError: if s is outside [0, 1]
	"""
	if not 0 <= s <= 1:
		raise DomainError(f'smoothstep is defined on [0, 1] ({s} passed).')

	u = 1 - s
	s2 = s * s
	# Factored forms vanish exactly at the endpoints
	w = s * u * (1 - 2 * s)
	return Smoothstep(
		g=s2 * s * (10 - 15 * s + 6 * s2),
		g_prime=30 * s2 * u * u,
		g_second=60 * w,
		big_g=s2 * s2 * (2.5 - 3 * s + s2),
		w=w,
		big_w=0.5 * s2 * u * u,
	)


@dataclass(frozen=True)
class RampSample:
	"""Every trajectory quantity of a ramp at one instant."""

	t: float
	"""Time (ns)"""
	omega0: float
	"""Reference drive amplitude (rad/ns)"""
	omega0_dot: float
	"""First time derivative of omega0 (rad/ns^2)"""
	omega0_ddot: float
	"""Second time derivative of omega0 (rad/ns^3)"""
	omega_ff: float
	"""Fast-forward drive omega0 + omega0_ddot/delta^2 (rad/ns)"""
	alpha0: float
	"""Adiabatic displacement omega0/delta"""
	alpha0_dot_over_delta: float
	"""d(alpha0)/dt / delta"""
	alpha0_ddot_over_delta2: float
	"""d^2(alpha0)/dt^2 / delta^2"""
	alpha_ff: float
	"""omega_ff/delta"""
	alpha_tilde: complex
	"""Displacement of the fast-forwarded state"""
	omega_cd: complex
	"""Counter-diabatic drive omega0 - i*omega0_dot/delta (rad/ns)"""


@dataclass(frozen=True)
class BoundaryReport:
	"""Ramp values and derivatives at both endpoints."""

	omega0_start: float
	omega0_end: float
	omega0_dot_start: float
	omega0_dot_end: float
	omega0_ddot_start: float
	omega0_ddot_end: float

	@property
	def ok(self) -> bool:
		"""Whether all four boundary derivatives are exactly zero."""
		return (
			self.omega0_dot_start == 0
			and self.omega0_dot_end == 0
			and self.omega0_ddot_start == 0
			and self.omega0_ddot_end == 0
		)


@dataclass(frozen=True)
class RampSpec:
	"""The drive-amplitude ramp problem Omega_i -> Omega_f over T_f at fixed detuning.

	The reference drive is Omega0(t) = Omega_i + (Omega_f - Omega_i) g(t/T_f), whose
	first two derivatives vanish at both ends.
	"""

	omega_i: float
	"""Initial drive amplitude (rad/ns)"""
	omega_f: float
	"""Final drive amplitude (rad/ns)"""
	t_ramp: float
	"""Ramp duration T_f (ns)"""
	delta: float
	"""Fixed detuning (rad/ns)"""

	_phase_poly: Polynomial = field(init=False, repr=False, compare=False)

	def __post_init__(self) -> None:
		"""Validate and precompute the phase antiderivative."""
		if not self.t_ramp > 0:
			raise DomainError(f'RampSpec.t_ramp must be > 0 ({self.t_ramp} passed).')
		if self.delta == 0:
			raise DomainError('RampSpec.delta must be nonzero.')

		# b(s) = alpha_ff * alpha0_ddot / delta as a polynomial in s = t/T_f
		span = self.omega_f - self.omega_i
		g_second = _SMOOTHSTEP.deriv(2)
		alpha_ff = (self.omega_i + span * _SMOOTHSTEP + span * g_second / (self.t_ramp * self.delta) ** 2) / self.delta
		rate = alpha_ff * (span * g_second / (self.t_ramp**2 * self.delta**2))
		object.__setattr__(self, '_phase_poly', self.t_ramp * rate.integ(lbnd=0))

	@classmethod
	def from_mhz(cls, omega_i: float, omega_f: float, t_ramp: float, delta: float) -> RampSpec:
		"""Create a ramp from frequencies quoted as nu = omega/2pi in MHz.

		Args:
			omega_i (float):
				Initial drive (MHz)
			omega_f (float):
				Final drive (MHz)
			t_ramp (float):
				Ramp duration (ns)
			delta (float):
				Detuning (MHz)
		"""
		return cls(mhz(omega_i), mhz(omega_f), t_ramp, mhz(delta))

	@property
	def span(self) -> float:
		"""Omega_f - Omega_i."""
		return self.omega_f - self.omega_i

	def _shape(self, t: float) -> Smoothstep:
		tol = 1e-12 * self.t_ramp
		if not -tol <= t <= self.t_ramp + tol:
			raise DomainError(f'Time {t} ns outside ramp [0, {self.t_ramp}] ns.')
		return smoothstep(min(max(t / self.t_ramp, 0.0), 1.0))

	def omega0(self, t: float) -> float:  # noqa: D102
		g = self._shape(t).g
		return self.omega_i * (1 - g) + self.omega_f * g

	def omega0_dot(self, t: float) -> float:  # noqa: D102
		return self.span * self._shape(t).g_prime / self.t_ramp

	def omega0_ddot(self, t: float) -> float:  # noqa: D102
		return self.span * self._shape(t).g_second / self.t_ramp**2

	def omega_ff(self, t: float) -> float:
		"""Fast-forward drive Omega0 + Omega0''/delta^2."""
		return self.omega0(t) + self.omega0_ddot(t) / self.delta**2

	def omega_cd(self, t: float) -> complex:
		"""Counter-diabatic drive Omega0 - i Omega0'/delta."""
		return complex(self.omega0(t), -self.omega0_dot(t) / self.delta)

	def alpha0(self, t: float) -> float:  # noqa: D102
		return self.omega0(t) / self.delta

	def alpha_ff(self, t: float) -> float:  # noqa: D102
		return self.omega_ff(t) / self.delta

	def alpha_tilde(self, t: float) -> complex:
		"""Displacement alpha0 + i alpha0'/delta of the fast-forwarded state."""
		return complex(self.alpha0(t), self.omega0_dot(t) / self.delta**2)

	def phase_rate(self, t: float) -> float:
		"""Global phase rate b(t) = alpha_ff alpha0''/delta."""
		return self.alpha_ff(t) * self.omega0_ddot(t) / self.delta**2

	def phase(self, t: float) -> float:
		"""Closed-form integral of `phase_rate` from 0 to t."""
		self._shape(t)
		return float(self._phase_poly(min(max(t / self.t_ramp, 0.0), 1.0)))


def sample_ramp(spec: RampSpec, t: float) -> RampSample:
	"""Sample every ramp quantity at time t, all in closed form.

	Args:
		spec (RampSpec):
			Ramp problem
		t (float):
			Time in [0, T_f] (ns)

	Raises:
		DomainError: if t is outside the ramp
	"""
	shape = spec._shape(t)
	d = spec.delta
	omega0 = spec.omega_i * (1 - shape.g) + spec.omega_f * shape.g
	omega0_dot = spec.span * shape.g_prime / spec.t_ramp
	omega0_ddot = spec.span * shape.g_second / spec.t_ramp**2
	omega_ff = omega0 + omega0_ddot / d**2

	return RampSample(
		t=t,
		omega0=omega0,
		omega0_dot=omega0_dot,
		omega0_ddot=omega0_ddot,
		omega_ff=omega_ff,
		alpha0=omega0 / d,
		alpha0_dot_over_delta=omega0_dot / d**2,
		alpha0_ddot_over_delta2=omega0_ddot / d**3,
		alpha_ff=omega_ff / d,
		alpha_tilde=complex(omega0 / d, omega0_dot / d**2),
		omega_cd=complex(omega0, -omega0_dot / d),
	)


def omega_cd(spec: RampSpec, t: float) -> complex:
	"""Counter-diabatic drive at time t."""
	return spec.omega_cd(t)


def verify_boundaries(spec: RampSpec) -> BoundaryReport:
	"""Evaluate Omega0 and its first two derivatives at t = 0 and t = T_f."""
	start = sample_ramp(spec, 0.0)
	end = sample_ramp(spec, spec.t_ramp)
	report = BoundaryReport(
		omega0_start=start.omega0,
		omega0_end=end.omega0,
		omega0_dot_start=start.omega0_dot,
		omega0_dot_end=end.omega0_dot,
		omega0_ddot_start=start.omega0_ddot,
		omega0_ddot_end=end.omega0_ddot,
	)
	if not report.ok:
		logger.warning('Ramp boundary derivatives are not zero: %s', report)
	return report


def ff_phase_rate(spec: RampSpec, t: float) -> float:
	"""Global phase rate b(t) = alpha_ff(t) alpha0''(t)/delta of the fast-forwarded state."""
	return spec.phase_rate(t)


def ff_phase(spec: RampSpec, t: float) -> float:
	"""Global phase of the fast-forwarded state, integral of b from 0 to t.

	Evaluated from the polynomial antiderivative of b, so it is exact up to
	rounding.
	"""
	return spec.phase(t)
