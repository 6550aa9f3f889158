"""Stores all custom types used in library.

- ComplexArray: complex128 numpy array (amplitudes, operator entries)
- RealArray: float64 numpy array
- RealFn: Scalar function of time t (ns) -> float
- ComplexFn: Scalar function of time t (ns) -> complex
- Factor: (mode index, single-mode matrix) placed on one mode of a product space
- ScheduleKind: Coupler/resonator detuning schedule, either 'ff_ts' or 'linear'
- ResonatorRun: Single-resonator Hamiltonian family ('bare', 'ff', 'cd')
- ExperimentKind: Experiment names accepted by the CLI config
- MHZ: Conversion factor from nu = omega/2pi in MHz to angular rad/ns
"""

from __future__ import annotations

import math
from typing import Callable, Literal

import numpy as np
import numpy.typing as npt

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]
RealFn = Callable[[float], float]
ComplexFn = Callable[[float], complex]
Factor = tuple[int, ComplexArray]
ScheduleKind = Literal['ff_ts', 'linear']
ResonatorRun = Literal['bare', 'ff', 'cd']
ExperimentKind = Literal[
	'ramp-trajectory',
	'ff-resonator',
	'lin-detuning',
	'ff-ts-resonator',
	'cd-check',
	'kpo-sweep',
]

MHZ = 2 * math.pi * 1e-3
"""Multiply a frequency nu in MHz by this to get omega in rad/ns"""


def mhz(nu: float) -> float:
	"""Convert nu = omega/2pi in MHz to angular frequency in rad/ns."""
	return nu * MHZ


def to_mhz(omega: float) -> float:
	"""Convert angular frequency in rad/ns to nu = omega/2pi in MHz."""
	return omega / MHZ
