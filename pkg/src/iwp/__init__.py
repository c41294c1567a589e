"""Inertia wheel pendulum with Stribeck stiction: simulator, observers and model selection."""

from .model import FrictionParams, MechParams, PhState, PhStateStick, Regime, State
from .selection import SelectorConfig, bayes_factor, select
from .sim import NoiseModel, RegimeTrace, SimConfig, emit_measurements, simulate

__all__ = [
    "FrictionParams",
    "MechParams",
    "NoiseModel",
    "PhState",
    "PhStateStick",
    "Regime",
    "RegimeTrace",
    "SelectorConfig",
    "SimConfig",
    "State",
    "bayes_factor",
    "emit_measurements",
    "select",
    "simulate",
]

__version__ = "0.1.0"
