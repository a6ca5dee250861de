"""Ergodic averages along Hardy floor orbits and the harmonic analysis behind them."""

from . import arcs, ergodic, expsum, hardy, lattice, report, variation
from .arcs import ArcConfig, GridTooSmallError
from .ergodic import TorusSystem
from .expsum import MajorArcBox, TorusPoint
from .hardy import HardyFunction, HardyMonomial, classify_family, floor_orbit, parse, parse_family
from .lattice import Character, LatticeFunction
from .variation import IndexedSequence, jump_count, vr_norm

__version__ = "0.1.0"

__all__ = [
    "arcs",
    "ergodic",
    "expsum",
    "hardy",
    "lattice",
    "report",
    "variation",
    "ArcConfig",
    "Character",
    "GridTooSmallError",
    "HardyFunction",
    "HardyMonomial",
    "IndexedSequence",
    "LatticeFunction",
    "MajorArcBox",
    "TorusPoint",
    "TorusSystem",
    "classify_family",
    "floor_orbit",
    "jump_count",
    "parse",
    "parse_family",
    "vr_norm",
]
