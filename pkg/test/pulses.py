from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import quad

from ffdisplace.errors import DomainError
from ffdisplace.pulses import RampSpec, ff_phase, ff_phase_rate, omega_cd, sample_ramp, smoothstep, verify_boundaries
from ffdisplace.types import mhz


def test_smoothstep_start():
	assert smoothstep(0) == (0, 0, 0, 0, 0, 0)


def test_smoothstep_end():
	shape = smoothstep(1)
	assert shape.g == 1
	assert shape.g_prime == 0
	assert shape.g_second == 0
	assert shape.w == 0
	assert shape.big_g == 0.5
	assert shape.big_w == 0


def test_smoothstep_midpoint():
	shape = smoothstep(0.5)
	assert shape.g == 0.5
	assert shape.w == 0
	assert shape.big_g == pytest.approx(5 / 64)
	assert shape.big_w == pytest.approx(1 / 32)


def test_smoothstep_finite_differences():
	h = 1e-4
	s = 0.25
	g_second = (smoothstep(s + h).g - 2 * smoothstep(s).g + smoothstep(s - h).g) / h**2
	assert smoothstep(s).g_second == pytest.approx(g_second, rel=1e-6)

	g_prime = (smoothstep(s + h).g - smoothstep(s - h).g) / (2 * h)
	assert smoothstep(s).g_prime == pytest.approx(g_prime, rel=1e-6)
	big_g_prime = (smoothstep(s + h).big_g - smoothstep(s - h).big_g) / (2 * h)
	assert smoothstep(s).g == pytest.approx(big_g_prime, rel=1e-6)
	big_w_prime = (smoothstep(s + h).big_w - smoothstep(s - h).big_w) / (2 * h)
	assert smoothstep(s).w == pytest.approx(big_w_prime, rel=1e-6)


def test_smoothstep_domain():
	with pytest.raises(DomainError):
		smoothstep(1.5)
	with pytest.raises(DomainError):
		smoothstep(-0.1)


def test_constant_ramp_has_no_correction():
	spec = RampSpec.from_mhz(50, 50, 10, 30)
	for t in np.linspace(0, 10, 11):
		sample = sample_ramp(spec, t)
		assert sample.omega_ff == pytest.approx(mhz(50))
		assert sample.omega0 == pytest.approx(mhz(50))


def test_ff_drive_endpoints_are_exact(ramp):
	assert ramp.omega_ff(0) == 0
	assert ramp.omega_ff(ramp.t_ramp) == ramp.omega_f


def test_ramp_midpoint(ramp):
	assert ramp.omega0(ramp.t_ramp / 2) == pytest.approx(ramp.omega_f / 2)


def test_cd_drive_is_real_at_the_ends(ramp):
	assert omega_cd(ramp, 0) == complex(ramp.omega_i, 0)
	assert omega_cd(ramp, ramp.t_ramp) == complex(ramp.omega_f, 0)
	assert omega_cd(ramp, ramp.t_ramp / 3).imag != 0


def test_boundaries(ramp):
	report = verify_boundaries(ramp)
	assert report.ok
	assert report.omega0_start == 0
	assert report.omega0_end == pytest.approx(2 * np.pi * 0.12)


def test_second_derivative_scales_with_ramp_time():
	short = RampSpec.from_mhz(0, 120, 20, 30)
	long = RampSpec.from_mhz(0, 120, 40, 30)
	peak_short = max(abs(short.omega0_ddot(t)) for t in np.linspace(0, 20, 401))
	peak_long = max(abs(long.omega0_ddot(t)) for t in np.linspace(0, 40, 401))
	assert peak_long == pytest.approx(peak_short / 4)


def test_sample_fields_agree(ramp):
	for t in np.linspace(0, ramp.t_ramp, 9):
		sample = sample_ramp(ramp, t)
		assert sample.omega_ff - sample.omega0 == pytest.approx(sample.omega0_ddot / ramp.delta**2, abs=1e-12)
		assert sample.alpha_ff == pytest.approx(ramp.alpha_ff(t))
		assert sample.alpha_tilde == pytest.approx(ramp.alpha_tilde(t))
		assert sample.omega_cd == pytest.approx(ramp.omega_cd(t))
		assert sample.alpha0_ddot_over_delta2 * ramp.delta**2 == pytest.approx(ramp.omega0_ddot(t) / ramp.delta)


def test_ramp_derivatives_match_finite_differences(ramp):
	h = 1e-4
	peak = max(abs(ramp.omega0_dot(t)) for t in np.linspace(0, ramp.t_ramp, 201))
	peak_ddot = max(abs(ramp.omega0_ddot(t)) for t in np.linspace(0, ramp.t_ramp, 201))
	for t in np.linspace(1, ramp.t_ramp - 1, 7):
		dot = (ramp.omega0(t + h) - ramp.omega0(t - h)) / (2 * h)
		ddot = (ramp.omega0_dot(t + h) - ramp.omega0_dot(t - h)) / (2 * h)
		assert abs(dot - ramp.omega0_dot(t)) < 1e-6 * peak
		assert abs(ddot - ramp.omega0_ddot(t)) < 1e-6 * peak_ddot


def _derivative(fn, t: float, h: float, t_end: float) -> float:
	if t - h < 0:
		return (-3 * fn(t) + 4 * fn(t + h) - fn(t + 2 * h)) / (2 * h)
	if t + h > t_end:
		return (3 * fn(t) - 4 * fn(t - h) + fn(t - 2 * h)) / (2 * h)
	return (fn(t + h) - fn(t - h)) / (2 * h)


def test_ramp_derivatives_on_the_full_grid(ramp):
	h = 1e-4
	grid = np.linspace(0, ramp.t_ramp, 101)
	peak = max(abs(ramp.omega0_dot(t)) for t in grid)
	peak_ddot = max(abs(ramp.omega0_ddot(t)) for t in grid)
	for t in grid:
		assert abs(_derivative(ramp.omega0, t, h, ramp.t_ramp) - ramp.omega0_dot(t)) < 1e-6 * peak
		assert abs(_derivative(ramp.omega0_dot, t, h, ramp.t_ramp) - ramp.omega0_ddot(t)) < 1e-6 * peak_ddot


def test_ramp_is_point_symmetric(ramp):
	t_f = ramp.t_ramp
	for t in np.linspace(0, t_f, 101):
		assert ramp.omega0(t_f - t) + ramp.omega0(t) == pytest.approx(ramp.omega_i + ramp.omega_f, abs=1e-12)
		assert ramp.omega0_dot(t_f - t) == pytest.approx(ramp.omega0_dot(t), abs=1e-12)


def test_time_outside_ramp(ramp):
	with pytest.raises(DomainError):
		sample_ramp(ramp, ramp.t_ramp + 1)


def test_invalid_ramp():
	with pytest.raises(DomainError):
		RampSpec.from_mhz(0, 120, 0, 30)
	with pytest.raises(DomainError):
		RampSpec.from_mhz(0, 120, 20, 0)


def test_ff_phase_closed_form(ramp):
	b = ramp.span / ramp.delta
	t_f = ramp.t_ramp
	expected = b**2 / ramp.delta * (-(10 / 7) / t_f + (120 / 7) / (ramp.delta**2 * t_f**3))
	assert ff_phase(ramp, t_f) == pytest.approx(expected, rel=1e-10)


def test_ff_phase_matches_quadrature(ramp):
	for t in (0.0, 3.0, 10.0, 17.5):
		value, _ = quad(lambda s: ff_phase_rate(ramp, s), 0, t, epsabs=1e-14, epsrel=1e-13)
		assert ff_phase(ramp, t) == pytest.approx(value, abs=1e-11)
