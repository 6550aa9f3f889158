from __future__ import annotations

import cmath
import logging
import math

import numpy as np
import pytest

from ffdisplace.errors import DimensionError, FockIndexError, TruncationError
from ffdisplace.fockspace import (
	TAIL_TOL,
	FockVector,
	ModeOperator,
	apply_factors,
	coherent_state,
	coherent_tail_mass,
	default_dim,
	displace_levels,
	displaced_fock,
	displacement_matrix,
	expectation,
	fidelity,
	lowering_operator,
	mean_photon_number,
	minimal_dim,
	number_operator,
	overlap,
	reduced_density_matrix,
	require_adequate,
	tensor,
	tensor_op,
)


def test_lowering_operator_entries():
	assert lowering_operator(2).entries[0, 1] == 1
	assert np.count_nonzero(lowering_operator(2).entries) == 1
	assert lowering_operator(4).entries[2, 3] == pytest.approx(math.sqrt(3))


def test_lowering_operator_needs_two_levels():
	with pytest.raises(DimensionError):
		lowering_operator(1)


def test_number_operator_on_basis():
	op = number_operator(6)
	for n in range(6):
		e_n = FockVector.basis((6,), (n,))
		assert np.allclose(op.apply(e_n).amps, n * e_n.amps)


def test_ladder_product_is_number_operator():
	a = lowering_operator(7)
	assert np.allclose((a.dag() @ a).entries, number_operator(7).entries)


def test_vacuum_coherent_state():
	assert np.array_equal(coherent_state(0, 8).amps, FockVector.basis((8,), (0,)).amps)


def test_coherent_vacuum_overlap():
	state = coherent_state(0.4, 16)
	assert abs(state.amps[0]) ** 2 == pytest.approx(math.exp(-0.16), abs=1e-9)


def test_coherent_mean_photon_number():
	assert mean_photon_number(coherent_state(2, 30)) == pytest.approx(4, abs=1e-9)


def test_coherent_phase_follows_alpha():
	state = coherent_state(1j, 20)
	assert expectation(lowering_operator(20), state) == pytest.approx(1j, abs=1e-9)


def test_truncation_error_reports_minimal_dim():
	with pytest.raises(TruncationError) as info:
		coherent_state(5, 10)
	needed = info.value.minimal_dim
	assert needed > 10
	assert coherent_tail_mass(5, needed) < TAIL_TOL
	assert coherent_tail_mass(5, needed - 1) >= TAIL_TOL


def test_minimal_dim_is_tight():
	for alpha in (0.1, 1.0, 3.0):
		dim = minimal_dim(alpha)
		assert coherent_tail_mass(alpha, dim) < TAIL_TOL
		assert dim == 2 or coherent_tail_mass(alpha, dim - 1) >= TAIL_TOL


def test_displacement_of_zero_is_identity():
	assert np.array_equal(displacement_matrix(0, 5).entries, np.eye(5))


def test_displacement_column_matches_coherent_state():
	column = displacement_matrix(0.4, 24).entries[:, 0]
	assert np.allclose(column, coherent_state(0.4, 24).amps, atol=1e-9)


@pytest.mark.parametrize('radius', [0.5, 1, 2, 3, 4])
def test_displacement_column_is_coherent_up_to_four(radius):
	alpha = cmath.rect(radius, 0.3 * radius)
	dim = default_dim(radius)
	column = FockVector((dim,), displacement_matrix(alpha, dim).entries[:, 0])
	state = coherent_state(alpha, dim)
	assert fidelity(column, state) == pytest.approx(1, abs=1e-10)
	assert mean_photon_number(state) == pytest.approx(radius**2, abs=1e-8)
	assert expectation(lowering_operator(dim), state) == pytest.approx(alpha, abs=1e-8)


def test_displacements_compose_to_their_sum():
	dim = 40
	vacuum = FockVector.basis((dim,), (0,))
	shifted = displacement_matrix(1.2, dim).apply(displacement_matrix(0.8, dim).apply(vacuum))
	assert fidelity(shifted, coherent_state(2.0, dim)) == pytest.approx(1, abs=1e-10)


def test_displacement_composition_phase():
	dim = 30
	alpha, beta = 0.5j, 0.7
	vacuum = FockVector.basis((dim,), (0,))
	shifted = displacement_matrix(alpha, dim).apply(displacement_matrix(beta, dim).apply(vacuum))
	expected = cmath.exp(1j * (alpha * beta.conjugate()).imag)
	assert overlap(coherent_state(alpha + beta, dim), shifted) == pytest.approx(expected, abs=1e-9)


def test_displacement_inverse():
	dim = 24
	product = (displacement_matrix(0.5, dim) @ displacement_matrix(-0.5, dim)).entries
	block = dim // 2
	assert np.max(np.abs(product[:block, :block] - np.eye(block))) < 1e-8


def test_displacement_is_unitary():
	d = displacement_matrix(0.3 - 0.7j, 30).entries
	assert np.allclose(d @ d.conj().T, np.eye(30), atol=1e-12)


def test_displaced_fock_undisplaced():
	assert np.allclose(displaced_fock(0, 3, 8).amps, FockVector.basis((8,), (3,)).amps)


def test_displaced_vacuum_is_coherent():
	assert fidelity(displaced_fock(0.5, 0, 20), coherent_state(0.5, 20)) == pytest.approx(1, abs=1e-12)


def test_displaced_fock_orthogonal():
	assert abs(overlap(displaced_fock(0.5, 1, 20), displaced_fock(0.5, 0, 20))) < 1e-9


def test_displaced_fock_level_outside_truncation():
	with pytest.raises(FockIndexError):
		displaced_fock(0.5, 8, 8)


def test_displaced_high_level_needs_room():
	with pytest.raises(TruncationError) as info:
		displaced_fock(2, 25, 30)
	needed = info.value.minimal_dim
	assert needed > 30
	state = displaced_fock(2, 25, needed + 5)
	assert 0 < state.tail_mass < TAIL_TOL


def test_displaced_fock_photon_number():
	state = displaced_fock(1.5, 3, 60)
	assert mean_photon_number(state) == pytest.approx(1.5**2 + 3, abs=1e-9)


def test_displace_levels_is_linear():
	coeffs = np.array([0.6, 0, 0.8j])
	state = displace_levels(0.9, coeffs, 40)
	expected = 0.6 * displaced_fock(0.9, 0, 40).amps + 0.8j * displaced_fock(0.9, 2, 40).amps
	assert np.allclose(state.amps, expected, atol=1e-10)


def test_displace_levels_rejects_oversized_coefficients():
	with pytest.raises(DimensionError):
		displace_levels(0.1, np.ones(5) / math.sqrt(5), 4)


def test_tail_close_to_the_limit_is_logged(caplog):
	tail = coherent_tail_mass(2, 20)
	with caplog.at_level(logging.WARNING, logger='ffdisplace.fockspace'):
		assert require_adequate(2, 20, 'kpo', tol=1.5 * tail) == tail
	assert 'close to the limit' in caplog.text

	caplog.clear()
	with caplog.at_level(logging.WARNING, logger='ffdisplace.fockspace'):
		require_adequate(2, 20, 'kpo', tol=10 * tail)
	assert not caplog.records


def test_tensor_of_vacua():
	product = tensor([FockVector.basis((3,), (0,)), FockVector.basis((4,), (0,))])
	assert product.dims == (3, 4)
	assert np.array_equal(product.amps, FockVector.basis((3, 4), (0, 0)).amps)


def test_tensor_norm_is_product():
	a = coherent_state(0.3, 10).scaled(2)
	b = coherent_state(-0.2j, 8).scaled(3)
	assert tensor([a, b]).norm == pytest.approx(6)


def test_tensor_op_mode_order():
	dims = (3, 3, 3)
	op = tensor_op(dims, {2: number_operator(3)})
	state = FockVector.basis(dims, (0, 1, 2))
	assert expectation(op, state) == pytest.approx(2)
	assert expectation(tensor_op(dims, {1: number_operator(3)}), state) == pytest.approx(1)


def test_tensor_op_rejects_missing_mode():
	with pytest.raises(DimensionError):
		tensor_op((3, 3), {2: number_operator(3)})


def test_apply_factors_matches_dense_product():
	rng = np.random.default_rng(7)
	dims = (2, 3, 4)
	m1 = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
	m2 = rng.normal(size=(4, 4))
	psi = rng.normal(size=24) + 1j * rng.normal(size=24)

	dense = tensor_op(dims, {1: ModeOperator(m1), 2: ModeOperator(m2)}).entries
	assert np.allclose(apply_factors(psi, dims, [(1, m1), (2, m2)]), dense @ psi)


def test_fidelity_with_itself():
	state = coherent_state(1 + 1j, 25)
	assert fidelity(state, state) == pytest.approx(1)


def test_coherent_fidelity_identity():
	assert fidelity(coherent_state(0.2, 20), coherent_state(0.5, 20)) == pytest.approx(math.exp(-0.09), abs=1e-9)


def test_orthogonal_basis_overlap():
	assert overlap(FockVector.basis((4,), (0,)), FockVector.basis((4,), (1,))) == 0


def test_overlap_needs_same_space():
	with pytest.raises(DimensionError):
		overlap(coherent_state(0, 4), coherent_state(0, 5))


def test_reduced_density_matrix_of_product():
	left, right = coherent_state(0.5, 12), coherent_state(-0.3, 10)
	rho = reduced_density_matrix(tensor([left, right]), 1)
	assert np.allclose(rho, np.outer(right.amps, right.amps.conj()), atol=1e-12)


def test_amplitudes_are_frozen():
	state = coherent_state(0.5, 10)
	with pytest.raises(ValueError):
		state.amps[0] = 0


def test_vector_size_must_match_dims():
	with pytest.raises(DimensionError):
		FockVector((2, 3), np.zeros(5))
