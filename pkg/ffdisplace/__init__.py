from . import errors, fockspace, pulses, timescaling, propagator, kpo, types, cli
from .pulses import RampSpec
from .timescaling import ScaledClock
from .kpo import KpoSystemSpec
from .fockspace import FockVector
