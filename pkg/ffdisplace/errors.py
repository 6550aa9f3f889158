"""Module holding all exception classes.

Every class derives from `FFDisplaceError` and from the builtin it refines,
so callers may catch either.
"""

from __future__ import annotations


class FFDisplaceError(Exception):
	"""Base class for every error raised by the library."""


class DimensionError(FFDisplaceError, ValueError):
	"""A truncation dimension is invalid or two dimension lists disagree."""


class FockIndexError(FFDisplaceError, IndexError):
	"""A number-state index lies outside the truncated basis."""


class DomainError(FFDisplaceError, ValueError):
	"""An argument lies outside the domain of the operation."""


class TruncationError(FFDisplaceError, ValueError):
	"""The truncated Fock space cannot hold the requested displacement."""

	minimal_dim: int
	"""Smallest dimension satisfying the tail rule"""

	def __init__(self, message: str, minimal_dim: int) -> None:
		"""Create a truncation error.

		Args:
			message (str):
				Human readable description
			minimal_dim (int):
				Smallest dimension satisfying the tail rule
		"""
		super().__init__(message)
		self.minimal_dim = minimal_dim


class InfeasibleScheduleError(FFDisplaceError, ValueError):
	"""The fast-forward drive changes sign, so no time-scaled schedule exists."""

	where: float | None
	"""Reference time (ns) where the drive first vanishes, if localized"""

	def __init__(self, message: str, where: float | None = None) -> None:
		"""Create an infeasible-schedule error.

		Args:
			message (str):
				Human readable description
			where (float | None, optional):
				Reference time where the drive first vanishes.
				Defaults to None.
		"""
		super().__init__(message)
		self.where = where


class SolverError(FFDisplaceError, RuntimeError):
	"""The scaled-clock root solver did not converge."""


class AccuracyError(FFDisplaceError, RuntimeError):
	"""A numerical result failed its accuracy gate."""


class StiffnessError(AccuracyError):
	"""The integrator step size underflowed."""


class ConfigError(FFDisplaceError, ValueError):
	"""An experiment configuration violates the schema."""

	field: str
	"""Offending field name"""
	constraint: str
	"""Violated constraint"""

	def __init__(self, field: str, constraint: str) -> None:
		"""Create a configuration error.

		Args:
			field (str):
				Offending field name
			constraint (str):
				Violated constraint
		"""
		super().__init__(f'{field} {constraint}')
		self.field = field
		self.constraint = constraint
