"""Truncated Fock-space linear algebra.

Holds `FockVector` and `ModeOperator` together with ladder operators, coherent and
displaced-Fock states, tensor products, overlaps and fidelities.

Product spaces use mode-major ordering (leftmost mode slowest-varying). The
three-mode system is always ordered (KPO 1, KPO 2, coupler).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import TYPE_CHECKING

import numpy as np
from scipy.linalg import eigh
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DimensionError, FockIndexError, TruncationError

if TYPE_CHECKING:
	from collections.abc import Mapping, Sequence

	from .types import ComplexArray, Factor

logger = logging.getLogger(__name__)

TAIL_TOL = 1e-10
"""Largest coherent tail mass a truncation is allowed to discard"""
TAIL_WARN = 0.5
"""Fraction of the tail limit above which an accepted truncation is logged"""


@dataclass(frozen=True, eq=False)
class FockVector:
	"""A complex amplitude vector over a truncated number basis.

	Single mode or tensor product of modes. Amplitudes are stored read-only, so a
	vector can be shared between workers.
	"""

	dims: tuple[int, ...]
	"""Per-mode truncation dimensions"""
	amps: ComplexArray
	"""Amplitudes, length = product of dims, mode-major"""
	tail_mass: float = 0.0
	"""Probability discarded by truncation before renormalization"""

	def __post_init__(self) -> None:
		"""Validate dims and freeze the amplitudes."""
		dims = tuple(int(d) for d in self.dims)
		if not dims or min(dims) < 1:
			raise DimensionError(f'FockVector dims must be positive ({self.dims} passed).')

		amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
		if amps.size != math.prod(dims):
			raise DimensionError(
				f'FockVector has {amps.size} amplitudes but dims {dims} need {math.prod(dims)}.'
			)
		amps.setflags(write=False)

		object.__setattr__(self, 'dims', dims)
		object.__setattr__(self, 'amps', amps)

	@classmethod
	def basis(cls, dims: Sequence[int], levels: Sequence[int]) -> FockVector:
		"""Create the number state |n_1, n_2, ...>.

		Args:
			dims (Sequence[int]):
				Per-mode truncation dimensions
			levels (Sequence[int]):
				Occupation of each mode
		"""
		if len(dims) != len(levels):
			raise DimensionError(f'{len(levels)} levels given for {len(dims)} modes.')
		for level, dim in zip(levels, dims):
			if not 0 <= level < dim:
				raise FockIndexError(f'Level {level} outside truncation dim {dim}.')

		amps = np.zeros(math.prod(dims), dtype=np.complex128)
		amps[np.ravel_multi_index(tuple(levels), tuple(dims))] = 1
		return cls(tuple(dims), amps)

	@property
	def dim(self) -> int:
		"""Dimension of the (product) space."""
		return self.amps.size

	@property
	def norm(self) -> float:
		"""2-norm of the amplitudes."""
		return float(np.linalg.norm(self.amps))

	def as_tensor(self) -> ComplexArray:
		"""Amplitudes reshaped to one axis per mode."""
		return self.amps.reshape(self.dims)

	def scaled(self, factor: complex) -> FockVector:
		"""Return the vector multiplied by a scalar (phase factors)."""
		return FockVector(self.dims, factor * self.amps, self.tail_mass)


@dataclass(frozen=True, eq=False)
class ModeOperator:
	"""A dense operator on a single mode or on a product space.

	`dims` lists the mode dimensions the operator acts on; it is `(dim,)` for a
	single-mode operator.
	"""

	entries: ComplexArray
	"""Dense matrix"""
	dims: tuple[int, ...] = ()
	"""Mode dimensions the matrix acts on"""

	def __post_init__(self) -> None:
		"""Validate the matrix shape and freeze the entries."""
		entries = np.array(self.entries, dtype=np.complex128)
		if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
			raise DimensionError(f'ModeOperator needs a square matrix ({entries.shape} passed).')

		dims = tuple(self.dims) or (entries.shape[0],)
		if math.prod(dims) != entries.shape[0]:
			raise DimensionError(f'Operator of size {entries.shape[0]} does not match dims {dims}.')
		entries.setflags(write=False)

		object.__setattr__(self, 'entries', entries)
		object.__setattr__(self, 'dims', dims)

	@property
	def dim(self) -> int:
		"""Matrix size."""
		return int(self.entries.shape[0])

	def dag(self) -> ModeOperator:
		"""Conjugate transpose."""
		return ModeOperator(self.entries.conj().T, self.dims)

	def __matmul__(self, other: ModeOperator) -> ModeOperator:
		"""Operator product."""
		if self.dims != other.dims:
			raise DimensionError(f'Cannot multiply operators on {self.dims} and {other.dims}.')
		return ModeOperator(self.entries @ other.entries, self.dims)

	def apply(self, state: FockVector) -> FockVector:
		"""Apply the operator to a vector (no renormalization)."""
		if self.dims != state.dims:
			raise DimensionError(f'Operator on {self.dims} applied to state on {state.dims}.')
		return FockVector(state.dims, self.entries @ state.amps, state.tail_mass)


def _check_dim(dim: int, minimum: int, what: str) -> None:
	if dim < minimum:
		raise DimensionError(f'{what} needs dim >= {minimum} ({dim} passed).')


def lowering_operator(dim: int) -> ModeOperator:
	"""Create the annihilation operator a with <n-1|a|n> = sqrt(n).

	Args:
		dim (int):
			Truncation dimension (>= 2)
	"""
	_check_dim(dim, 2, 'lowering_operator')
	return ModeOperator(np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), k=1))


def number_operator(dim: int) -> ModeOperator:
	"""Create a^dagger a, diagonal with entries 0..dim-1."""
	_check_dim(dim, 1, 'number_operator')
	return ModeOperator(np.diag(np.arange(dim, dtype=np.float64)))


def identity(dim: int) -> ModeOperator:
	"""Create the identity on one mode."""
	_check_dim(dim, 1, 'identity')
	return ModeOperator(np.eye(dim))


def coherent_tail_mass(alpha: complex, dim: int) -> float:
	"""Probability of a coherent state |alpha> on levels n >= dim.

	The photon number of a coherent state is Poisson distributed with mean
	|alpha|^2, so this is the Poisson survival function at dim - 1.
	"""
	mean = abs(alpha) ** 2
	if mean == 0:
		return 0.0
	return float(poisson.sf(dim - 1, mean))


def minimal_dim(alpha: complex, tol: float = TAIL_TOL) -> int:
	"""Smallest dimension (>= 2) whose coherent tail mass for |alpha| is below `tol`."""
	mean = abs(alpha) ** 2
	if mean == 0:
		return 2

	guess = poisson.isf(tol, mean)
	dim = max(2, int(guess)) if math.isfinite(guess) else 2
	while coherent_tail_mass(alpha, dim) >= tol:
		dim += 1
	while dim > 2 and coherent_tail_mass(alpha, dim - 1) < tol:
		dim -= 1
	return dim


def default_dim(alpha_max: float) -> int:
	"""Truncation heuristic ceil(|a|^2 + 8|a| + 12) for the largest visited displacement."""
	a = abs(alpha_max)
	return max(2, math.ceil(a * a + 8 * a + 12))


def require_adequate(alpha: complex, dim: int, what: str, tol: float = TAIL_TOL) -> float:
	"""Check the coherent tail rule and return the tail mass.

	A tail mass within a factor `TAIL_WARN` of the limit is accepted but logged
	at WARNING.

	Raises:
		TruncationError: if the tail mass is >= `tol`
	"""
	tail = coherent_tail_mass(alpha, dim)
	if tail >= tol:
		needed = minimal_dim(alpha, tol)
		raise TruncationError(
			f'{what}: dim={dim} leaves coherent tail mass {tail:.3e} for |alpha|={abs(alpha):.6g}'
			f' (limit {tol:g}); use dim >= {needed}.',
			needed,
		)
	if tail >= TAIL_WARN * tol:
		logger.warning('%s: tail mass %.3e at dim=%d is close to the limit %g', what, tail, dim, tol)
	return tail


def coherent_state(alpha: complex, dim: int, tol: float = TAIL_TOL) -> FockVector:
	"""Create the coherent state |alpha> from its analytic amplitudes.

	Args:
		alpha (complex):
			Displacement
		dim (int):
			Truncation dimension
		tol (float, optional):
			Largest tail mass allowed.
			Defaults to 1e-10.

	Returns:
		FockVector: Renormalized state, with the discarded tail in `.tail_mass`
	"""
	_check_dim(dim, 1, 'coherent_state')
	tail = require_adequate(alpha, dim, 'coherent_state', tol)

	amps = np.zeros(dim, dtype=np.complex128)
	if alpha == 0:
		amps[0] = 1
	else:
		r = abs(alpha)
		n = np.arange(dim, dtype=np.float64)
		# Log magnitudes avoid overflow of alpha^n / sqrt(n!)
		log_mag = n * math.log(r) - 0.5 * gammaln(n + 1) - 0.5 * r * r
		amps = np.exp(log_mag) * np.exp(1j * n * cmath.phase(alpha))

	return FockVector((dim,), amps / np.linalg.norm(amps), tail)


def displacement_matrix(alpha: complex, dim: int, tol: float = TAIL_TOL) -> ModeOperator:
	"""Create D(alpha) = exp(alpha a^dagger - alpha* a) on a truncated mode.

	The anti-Hermitian generator is turned Hermitian by a factor i, diagonalized,
	and exponentiated on its eigenvalues.

	Args:
		alpha (complex):
			Displacement
		dim (int):
			Truncation dimension (>= 2)
		tol (float, optional):
			Largest coherent tail mass allowed.
			Defaults to 1e-10.
	"""
	_check_dim(dim, 2, 'displacement_matrix')
	require_adequate(alpha, dim, 'displacement_matrix', tol)
	if alpha == 0:
		return identity(dim)

	a = lowering_operator(dim).entries
	generator = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
	evals, evecs = eigh(generator)
	return ModeOperator((evecs * np.exp(-1j * evals)) @ evecs.conj().T)


def displace_levels(
	alpha: complex, coeffs: Sequence[complex], dim: int, tol: float = TAIL_TOL, what: str = 'displace_levels'
) -> FockVector:
	"""Create D(alpha) sum_n c_n |n> with the truncation judged on the displaced state.

	The displacement acts on a padded mode wide enough for the highest occupied
	level; the mass it puts on levels >= dim is the tail. A displaced level n
	spreads over roughly (|alpha| + sqrt(n))^2 photons, so the coherent rule
	alone does not bound it.

	Args:
		alpha (complex):
			Displacement
		coeffs (Sequence[complex]):
			Amplitudes c_0, c_1, ... of the undisplaced state
		dim (int):
			Truncation dimension
		tol (float, optional):
			Largest tail mass allowed.
			Defaults to 1e-10.
		what (str, optional):
			Caller name for error messages.
			Defaults to 'displace_levels'.

	Raises:
		TruncationError: if the displaced state leaves a tail mass >= `tol` above dim
	"""
	_check_dim(dim, 2, what)
	coeffs = np.asarray(coeffs, dtype=np.complex128).ravel()
	if coeffs.size > dim:
		raise DimensionError(f'{what}: {coeffs.size} coefficients do not fit dim {dim}.')
	occupied = np.flatnonzero(coeffs)
	top = int(occupied[-1]) if occupied.size else 0

	padded = max(dim + 2 * top + 20, default_dim(abs(alpha) + math.sqrt(top)) + 2 * top)
	frame = np.zeros(padded, dtype=np.complex128)
	frame[: coeffs.size] = coeffs
	full = displacement_matrix(alpha, padded, tol).entries @ frame

	# tails[d] = mass on levels >= d
	tails = np.cumsum((np.abs(full) ** 2)[::-1])[::-1]
	tail = float(tails[dim])
	if tail >= tol:
		needed = max(2, int(np.argmax(tails < tol)))
		raise TruncationError(
			f'{what}: dim={dim} leaves tail mass {tail:.3e} for level {top} displaced by |alpha|={abs(alpha):.6g}'
			f' (limit {tol:g}); use dim >= {needed}.',
			needed,
		)
	if tail >= TAIL_WARN * tol:
		logger.warning('%s: tail mass %.3e at dim=%d is close to the limit %g', what, tail, dim, tol)

	amps = full[:dim]
	return FockVector((dim,), amps / np.linalg.norm(amps), tail)


def displaced_fock(alpha: complex, n: int, dim: int, tol: float = TAIL_TOL) -> FockVector:
	"""Create D(alpha)|n>.

	Args:
		alpha (complex):
			Displacement
		n (int):
			Number state to displace
		dim (int):
			Truncation dimension
		tol (float, optional):
			Largest tail mass allowed.
			Defaults to 1e-10.

	Raises:
		TruncationError: if D(alpha)|n> does not fit in dim
	"""
	if not 0 <= n < dim:
		raise FockIndexError(f'displaced_fock: level {n} outside truncation dim {dim}.')

	coeffs = np.zeros(n + 1, dtype=np.complex128)
	coeffs[n] = 1
	return displace_levels(alpha, coeffs, dim, tol, 'displaced_fock')


def tensor(states: Sequence[FockVector]) -> FockVector:
	"""Kronecker product of states in mode-major order."""
	if not states:
		raise DimensionError('tensor() needs at least 1 state.')

	amps = reduce(np.kron, (state.amps for state in states))
	dims = tuple(d for state in states for d in state.dims)
	kept = math.prod(1 - state.tail_mass for state in states)
	return FockVector(dims, amps, 1 - kept)


def tensor_op(dims: Sequence[int], placements: Mapping[int, ModeOperator]) -> ModeOperator:
	"""Embed single-mode operators into a product space.

	Args:
		dims (Sequence[int]):
			Dimensions of every mode
		placements (Mapping[int, ModeOperator]):
			Mode index -> operator on that mode. Other modes get identities.
	"""
	dims = tuple(dims)
	factors = []
	for mode, dim in enumerate(dims):
		op = placements.get(mode)
		if op is None:
			factors.append(np.eye(dim, dtype=np.complex128))
			continue
		if op.dim != dim:
			raise DimensionError(f'Operator of dim {op.dim} placed on mode {mode} of dim {dim}.')
		factors.append(op.entries)

	if unknown := set(placements) - set(range(len(dims))):
		raise DimensionError(f'Modes {sorted(unknown)} do not exist in dims {dims}.')

	return ModeOperator(reduce(np.kron, factors), dims)


def apply_factors(amps: ComplexArray, dims: tuple[int, ...], factors: Sequence[Factor]) -> ComplexArray:
	"""Apply a Kronecker-structured product of single-mode matrices to a vector.

	The product matrix is never formed: the vector is viewed as a tensor and each
	factor is contracted with its own axis.
	"""
	psi = amps.reshape(dims)
	for mode, matrix in factors:
		psi = np.moveaxis(np.tensordot(matrix, psi, axes=([1], [mode])), 0, mode)
	return psi.reshape(-1)


def _check_same_dims(a: FockVector, b: FockVector) -> None:
	if a.dims != b.dims:
		raise DimensionError(f'States live on different spaces ({a.dims} vs {b.dims}).')


def overlap(a: FockVector, b: FockVector) -> complex:
	"""Inner product <a|b>."""
	_check_same_dims(a, b)
	return complex(np.vdot(a.amps, b.amps))


def fidelity(a: FockVector, b: FockVector) -> float:
	"""Phase-insensitive fidelity |<a|b>|^2, clipped to [0, 1]."""
	return min(1.0, abs(overlap(a, b)) ** 2)


def expectation(op: ModeOperator, state: FockVector) -> complex:
	"""Expectation value <state|op|state>."""
	return complex(np.vdot(state.amps, op.apply(state).amps))


def reduced_density_matrix(state: FockVector, mode: int) -> ComplexArray:
	"""Trace out every mode except `mode`."""
	if not 0 <= mode < len(state.dims):
		raise DimensionError(f'Mode {mode} does not exist in dims {state.dims}.')

	psi = np.moveaxis(state.as_tensor(), mode, 0).reshape(state.dims[mode], -1)
	return psi @ psi.conj().T


def mean_photon_number(state: FockVector, mode: int = 0) -> float:
	"""<a^dagger a> of one mode."""
	rho = reduced_density_matrix(state, mode)
	return float(np.real(np.trace(rho * np.arange(state.dims[mode]))))
