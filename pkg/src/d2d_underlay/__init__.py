"""Coverage and area spectral efficiency of D2D-underlay uplink networks with MRSS mode selection.

Two engines share the propagation model in :mod:`netmodel`: an analytic one
(:mod:`analytic`, built on :mod:`equivmap`, :mod:`shotnoise` and
:mod:`numerics`) and a Monte Carlo simulator (:mod:`mcsim`).
"""

from .analytic import AnalyticModel, AnalyticOptions, ModeBoundary, cellular_mode_probability
from .config import ConfigError, SweepConfig, load_config
from .netmodel import LOS, NLOS, Condition, NetworkParams, PathLossProfile, Segment

__all__ = [
    "AnalyticModel",
    "AnalyticOptions",
    "ModeBoundary",
    "cellular_mode_probability",
    "ConfigError",
    "SweepConfig",
    "load_config",
    "LOS",
    "NLOS",
    "Condition",
    "NetworkParams",
    "PathLossProfile",
    "Segment",
]

__version__ = "0.1.0"
