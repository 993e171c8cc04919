"""Delay-feedback electrostatic MEMS actuator: statics, stability, DDE integration and periodic orbits."""

from .kernels import BACKEND
from .model import ActuatorParams, Linear, SqueezeFilm, State, VoltageProfile

__version__ = "0.1.0"

__all__ = ["ActuatorParams", "BACKEND", "Linear", "SqueezeFilm", "State", "VoltageProfile"]
