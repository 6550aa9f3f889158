from __future__ import annotations

import cmath
import math

import numpy as np
import pytest

from ffdisplace.errors import DimensionError, DomainError, TruncationError
from ffdisplace.fockspace import FockVector, coherent_state, displaced_fock, fidelity, overlap
from ffdisplace.propagator import (
	HamiltonianSchedule,
	Term,
	analytic_ff_state,
	bare_schedule,
	cd_drive_check,
	cd_schedule,
	coherent_trajectory,
	detuning_infidelity,
	evolve,
	evolve_fixed_step,
	ff_schedule,
	ff_ts_schedule,
	linear_schedule,
	ramp_infidelity,
	resonator_dim,
	resonator_hamiltonian,
	time_scaled,
	within_convergence,
)
from ffdisplace.pulses import RampSpec, ff_phase
from ffdisplace.timescaling import linear_detuning
from ffdisplace.types import mhz


def _constant(value: float):
	return lambda t: value


def test_cd_hamiltonian_is_hermitian(ramp):
	schedule = cd_schedule(ramp, 30)
	for t in (0.0, 7.0, 13.0):
		h = schedule.matrix(t)
		assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_undriven_hamiltonian_is_diagonal():
	delta = mhz(30)
	h = resonator_hamiltonian(_constant(delta), _constant(0), 8, (0.0, 1.0)).matrix(0.5)
	assert np.allclose(h, np.diag(delta * np.arange(8)))


def test_displaced_vacuum_is_stationary():
	delta, omega = mhz(30), mhz(30)
	alpha = omega / delta
	schedule = resonator_hamiltonian(_constant(delta), _constant(omega), 30, (0.0, 1.0), _constant(delta * alpha**2))
	psi = coherent_state(alpha, 30)
	assert np.linalg.norm(schedule.apply(0.0, psi.amps)) < 1e-6 * delta


def test_number_state_phase():
	delta, duration = mhz(30), 10.0
	schedule = resonator_hamiltonian(_constant(delta), _constant(0), 6, (0.0, duration))
	e_1 = FockVector.basis((6,), (1,))
	result = evolve(schedule, e_1)
	assert abs(overlap(e_1, result.final_state) - cmath.exp(-1j * delta * duration)) < 1e-8


def test_zero_hamiltonian_keeps_state():
	schedule = resonator_hamiltonian(_constant(0), _constant(0), 12, (0.0, 5.0))
	psi = coherent_state(0.7, 12)
	result = evolve(schedule, psi)
	assert np.allclose(result.final_state.amps, psi.amps, atol=1e-12)
	assert result.norm_drift < 1e-12


def test_sample_times_are_recorded(ramp):
	dim = resonator_dim(4.5)
	times = np.linspace(0, ramp.t_ramp, 5)
	result = evolve(bare_schedule(ramp, dim), coherent_state(0, dim), sample_times=times)
	assert [t for t, _ in result.trajectory] == pytest.approx(list(times))
	assert np.allclose(result.trajectory[-1][1].amps, result.final_state.amps)


def test_sample_times_accept_arrays_and_sequences(ramp):
	dim = resonator_dim(4.5)
	schedule = bare_schedule(ramp, dim)
	psi0 = coherent_state(0, dim)
	shuffled = evolve(schedule, psi0, sample_times=np.array([15.0, 5.0, 10.0]))
	assert [t for t, _ in shuffled.trajectory] == [5.0, 10.0, 15.0]
	listed = evolve(schedule, psi0, sample_times=[5.0, 10.0, 15.0])
	for (_, a), (_, b) in zip(shuffled.trajectory, listed.trajectory):
		assert np.allclose(a.amps, b.amps)
	assert evolve(schedule, psi0, sample_times=np.array([])).trajectory == ()


def test_dims_must_match(ramp):
	with pytest.raises(DimensionError):
		evolve(bare_schedule(ramp, 20), coherent_state(0, 21))


def test_invalid_time_span():
	with pytest.raises(DomainError):
		resonator_hamiltonian(_constant(1), _constant(0), 4, (1.0, 0.0))


@pytest.mark.parametrize('t_ramp', [5, 10, 20, 40, 80])
def test_fast_forward_is_exact(t_ramp):
	report = ramp_infidelity(RampSpec.from_mhz(0, 120, t_ramp, 30), 'ff')
	assert report.infidelity <= 1e-6
	assert report.norm_drift < 1e-8


def test_bare_ramp_improves_with_time():
	infidelities = [ramp_infidelity(RampSpec.from_mhz(0, 120, t, 30), 'bare').infidelity for t in (20, 40, 80)]
	assert infidelities[0] > infidelities[1] > infidelities[2]
	assert infidelities[0] > 1e-3


@pytest.mark.parametrize('t_ramp', [20, 40, pytest.param(80, marks=pytest.mark.slow)])
def test_bare_ramp_matches_fixed_step_oracle(t_ramp):
	ramp = RampSpec.from_mhz(0, 120, t_ramp, 30)
	report = ramp_infidelity(ramp, 'bare')
	schedule = bare_schedule(ramp, report.dim)
	final = evolve_fixed_step(schedule, coherent_state(0, report.dim), 400 * t_ramp)
	oracle = 1 - fidelity(final, coherent_state(ramp.alpha0(ramp.t_ramp), report.dim))
	assert report.infidelity == pytest.approx(oracle, abs=1e-8)


def test_counter_diabatic_ramp_is_exact(ramp):
	assert ramp_infidelity(ramp, 'cd').infidelity <= 1e-7


def test_bare_ramp_follows_mean_field(ramp):
	report = ramp_infidelity(ramp, 'bare')
	alpha = coherent_trajectory(lambda t: ramp.delta, ramp.omega0, 0, (0.0, ramp.t_ramp), [ramp.t_ramp])[0]
	expected = 1 - math.exp(-abs(alpha - ramp.alpha0(ramp.t_ramp)) ** 2)
	assert report.infidelity == pytest.approx(expected, abs=1e-8)


def test_analytic_state_at_the_start(ramp):
	dim = resonator_dim(4.5)
	state = analytic_ff_state(ramp, [1], 0, dim)
	assert np.allclose(state.amps, coherent_state(0, dim).amps, atol=1e-12)


def test_analytic_state_at_the_end(ramp):
	dim = resonator_dim(4.5, 1)
	t_f = ramp.t_ramp
	state = analytic_ff_state(ramp, [0, 1], t_f, dim)
	displaced = displaced_fock(ramp.alpha0(t_f), 1, dim)
	phase = ff_phase(ramp, t_f) + ramp.delta * t_f
	assert abs(overlap(displaced, state) - cmath.exp(-1j * phase)) < 1e-9


def test_analytic_state_tracks_the_integrator(ramp):
	dim = resonator_dim(4.5)
	times = np.linspace(0, ramp.t_ramp, 11)
	result = evolve(ff_schedule(ramp, dim, keep_offset=True), coherent_state(0, dim), sample_times=times)
	for t, state in result.trajectory:
		expected = analytic_ff_state(ramp, [1], t, dim)
		assert abs(1 - overlap(state, expected)) <= 1e-6


def test_analytic_state_needs_normalized_coefficients(ramp):
	with pytest.raises(DomainError):
		analytic_ff_state(ramp, [1, 1], 0, 30)


@pytest.mark.parametrize('n', [0, 1])
def test_counter_diabatic_tracks_displaced_fock(ramp, n):
	report = cd_drive_check(ramp, n, resonator_dim(4, n))
	assert report.max_infidelity <= 1e-7
	assert 0 <= report.worst_time <= ramp.t_ramp


def test_counter_diabatic_constant_ramp():
	spec = RampSpec.from_mhz(30, 30, 10, 30)
	assert cd_drive_check(spec, 0, 20, samples=11).max_infidelity <= 1e-9


@pytest.mark.parametrize('t_ramp', [4, 8, 16])
def test_time_scaled_fast_forward_beats_linear(t_ramp):
	delta_i, delta_f, omega_i = mhz(200), mhz(20), mhz(80)
	t_final = 5.5 * t_ramp
	ff_ts = detuning_infidelity(delta_i, delta_f, omega_i, t_final, 'ff_ts')
	linear = detuning_infidelity(delta_i, delta_f, omega_i, t_final, 'linear')
	assert ff_ts.infidelity <= 1e-6
	assert linear.infidelity >= 10 * ff_ts.infidelity
	assert linear.infidelity > 1e-6


def test_linear_sweep_follows_mean_field():
	delta_i, delta_f, omega_i, t_final = mhz(200), mhz(20), mhz(80), 44.0
	report = detuning_infidelity(delta_i, delta_f, omega_i, t_final, 'linear')
	alpha = coherent_trajectory(
		lambda t: linear_detuning(delta_i, delta_f, t_final, t), lambda t: omega_i, omega_i / delta_i, (0.0, t_final), [t_final]
	)[0]
	expected = 1 - math.exp(-abs(alpha - omega_i / delta_f) ** 2)
	assert report.infidelity == pytest.approx(expected, abs=1e-7)


def test_time_scaling_map_reproduces_fixed_drive_schedule(clock):
	dim = 30
	mapped = time_scaled(ff_schedule(clock.ramp, dim, keep_offset=True), clock)
	direct = ff_ts_schedule(clock, dim, keep_offset=True)
	assert mapped.t_span == direct.t_span
	for t in np.linspace(0, clock.t_final, 7):
		assert np.allclose(mapped.matrix(t), direct.matrix(t), atol=1e-12)


def test_time_scaling_needs_reference_span(clock):
	with pytest.raises(DomainError):
		time_scaled(bare_schedule(RampSpec.from_mhz(0, 120, 20, 30), 10), clock)


def test_unknown_run(ramp):
	with pytest.raises(DomainError):
		ramp_infidelity(ramp, 'adiabatic', 20)  # type: ignore[arg-type]


def test_schedule_rejects_non_hermitian_term():
	a = np.diag(np.ones(3), k=1)
	with pytest.raises(DomainError):
		HamiltonianSchedule((4,), (Term(((0, a),), _constant(1)),), (0.0, 1.0))


def test_convergence_rule():
	assert within_convergence(1e-3, 1.05e-3)
	assert not within_convergence(1e-3, 1.2e-3)
	assert within_convergence(1e-12, 5e-10)


def test_linear_schedule_endpoints():
	schedule = linear_schedule(mhz(200), mhz(20), mhz(80), 44.0, 6)
	assert np.allclose(np.diag(schedule.matrix(0.0)).real, mhz(200) * np.arange(6))
	assert np.allclose(np.diag(schedule.matrix(44.0)).real, mhz(20) * np.arange(6))
	assert schedule.matrix(10.0)[1, 0] == pytest.approx(-mhz(80))


def test_time_scaled_state_follows_the_reference_clock(clock):
	dim = resonator_dim(4.5)
	schedule = time_scaled(ff_schedule(clock.ramp, dim, keep_offset=True), clock)
	times = np.linspace(0, clock.t_final, 11)
	psi0 = coherent_state(clock.ramp.alpha0(0), dim)
	result = evolve(schedule, psi0, rel_tol=1e-11, abs_tol=1e-13, sample_times=times)
	assert len(result.trajectory) == 11
	for t, state in result.trajectory:
		expected = analytic_ff_state(clock.ramp, [1], clock.lambda_of(t), dim)
		assert abs(1 - overlap(state, expected)) <= 1e-7


def test_truncation_covers_the_target_of_a_short_ramp():
	spec = RampSpec.from_mhz(0, 120, 0.5, 30)
	report = ramp_infidelity(spec, 'bare')
	assert report.dim >= resonator_dim(4.0)
	assert report.infidelity > 0.5


def test_truncation_covers_the_target_of_a_fast_sweep():
	report = detuning_infidelity(mhz(200), mhz(20), mhz(80), 1.0, 'linear')
	assert report.dim >= resonator_dim(4.0)


def test_analytic_state_needs_room_for_high_levels(ramp):
	coeffs = np.zeros(26)
	coeffs[25] = 1
	with pytest.raises(TruncationError):
		analytic_ff_state(ramp, coeffs, ramp.t_ramp, resonator_dim(4.5))
	state = analytic_ff_state(ramp, coeffs, ramp.t_ramp, resonator_dim(4.5, 25))
	assert state.tail_mass < 1e-10


def test_bare_ramp_converges():
	spec = RampSpec.from_mhz(0, 120, 20, 30)
	reference = ramp_infidelity(spec, 'bare')
	doubled = ramp_infidelity(spec, 'bare', 2 * reference.dim)
	tightened = ramp_infidelity(spec, 'bare', reference.dim, rel_tol=5e-11, abs_tol=5e-13)
	assert within_convergence(reference.infidelity, doubled.infidelity)
	assert within_convergence(reference.infidelity, tightened.infidelity)


def test_linear_sweep_converges():
	args = (mhz(200), mhz(20), mhz(80), 44.0, 'linear')
	reference = detuning_infidelity(*args)
	doubled = detuning_infidelity(*args, 2 * reference.dim)
	tightened = detuning_infidelity(*args, reference.dim, 5e-11, 5e-13)
	assert within_convergence(reference.infidelity, doubled.infidelity)
	assert within_convergence(reference.infidelity, tightened.infidelity)


def test_exact_schedules_stay_exact_when_refined(ramp):
	ff = ramp_infidelity(ramp, 'ff')
	assert ramp_infidelity(ramp, 'ff', 2 * ff.dim).infidelity <= 1e-6
	assert ramp_infidelity(ramp, 'ff', ff.dim, rel_tol=5e-11, abs_tol=5e-13).infidelity <= 1e-6
	args = (mhz(200), mhz(20), mhz(80), 44.0, 'ff_ts')
	ff_ts = detuning_infidelity(*args)
	assert detuning_infidelity(*args, 2 * ff_ts.dim).infidelity <= 1e-6


def test_unpaired_term_needs_real_coefficient():
	number = np.diag(np.arange(4.0))
	schedule = HamiltonianSchedule((4,), (Term(((0, number),), _constant(1j)),), (0.0, 1.0))
	with pytest.raises(DomainError):
		schedule.matrix(0.5)
	with pytest.raises(DomainError):
		schedule.apply(0.5, np.ones(4, dtype=np.complex128))


def test_unpaired_coefficient_checked_on_product_spaces():
	number = np.diag(np.arange(20.0))
	schedule = HamiltonianSchedule((20, 20), (Term(((0, number),), _constant(0.5 + 1e-3j)),), (0.0, 1.0))
	with pytest.raises(DomainError):
		schedule.apply(0.0, np.ones(400, dtype=np.complex128))


def test_paired_term_may_be_complex():
	a = np.diag(np.ones(3), k=1)
	schedule = HamiltonianSchedule((4,), (Term(((0, a),), _constant(0.3j), paired=True),), (0.0, 1.0))
	h = schedule.matrix(0.0)
	assert np.allclose(h, h.conj().T)
