from __future__ import annotations

import pytest

from ffdisplace.kpo import KpoSystemSpec
from ffdisplace.pulses import RampSpec
from ffdisplace.timescaling import ScaledClock


@pytest.fixture
def ramp() -> RampSpec:
	"""Delta = 30 MHz, Omega 0 -> 120 MHz over 20 ns."""
	return RampSpec.from_mhz(0, 120, 20, 30)


@pytest.fixture
def clock() -> ScaledClock:
	"""Delta 200 -> 20 MHz at a fixed 80 MHz drive, T_f = 8 ns."""
	return ScaledClock.from_mhz(200, 20, 80, 8)


@pytest.fixture
def table_one() -> KpoSystemSpec:
	return KpoSystemSpec.table_one()


@pytest.fixture
def small_kpo() -> KpoSystemSpec:
	"""Weakly pumped system whose dense matrix still fits in memory."""
	return KpoSystemSpec.from_mhz((2, 2), (0.5, 0.5), 2, 2, 0.02, 200, 20, dims=(10, 10, 6))
