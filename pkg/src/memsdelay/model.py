"""Dimensionless equations of motion of the delay-controlled parallel-plate actuator.

The gap coordinate ``x`` is measured from the fixed electrode (singularity at
``x = 0``) and the state is ``(x, v)`` with ``v = dx/dt``::

    x'' + h_D(x, x') + x = 1 - e * W(t)**2 / x**2
    W(t) = V(t) + g1 * (x - x(t - d)) + g2 * (x' - x'(t - d))

where ``V(t) = v0 + delta * v(t)`` and ``v`` is a zero-mean harmonic sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameter, InvalidVoltageProfile, NonPositiveGap

#: samples per period used for extrema / positivity checks of waveforms
WAVEFORM_GRID = 4096


@dataclass(frozen=True)
class VoltageProfile:
    """``V(t) = v0 + delta * sum_k (a_k cos(2 pi k t / T) + b_k sin(2 pi k t / T))``.

    ``harmonics`` holds ``(k, a_k, b_k)`` triples with integer ``k >= 1``, so
    the AC part has zero mean by construction.
    """

    v0: float
    delta: float = 0.0
    harmonics: tuple = ((1, 1.0, 0.0),)
    period: float = 2.0 * math.pi

    def __post_init__(self):
        harmonics = tuple((int(k), float(a), float(b)) for k, a, b in self.harmonics)
        object.__setattr__(self, "harmonics", harmonics)
        if not (math.isfinite(self.v0) and self.v0 > 0):
            raise InvalidVoltageProfile(f"v0 must be positive, got {self.v0!r}")
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise InvalidVoltageProfile(f"delta must be >= 0, got {self.delta!r}")
        if not (math.isfinite(self.period) and self.period > 0):
            raise InvalidVoltageProfile(f"period must be positive, got {self.period!r}")
        for k, a, b in harmonics:
            if k < 1:
                raise InvalidVoltageProfile("harmonic multipliers must be >= 1")
            if not (math.isfinite(a) and math.isfinite(b)):
                raise InvalidVoltageProfile("harmonic coefficients must be finite")
        if self.minimum <= 0:
            raise InvalidVoltageProfile(
                f"voltage must stay positive, min V = {self.minimum!r}"
            )

    @classmethod
    def cosine(cls, v0, delta=0.0, omega=1.0):
        """``v0 + delta * cos(omega t)``."""
        return cls(v0=v0, delta=delta, harmonics=((1, 1.0, 0.0),), period=2 * math.pi / omega)

    @property
    def omega(self):
        return 2.0 * math.pi / self.period

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        w = self.omega
        ac = np.zeros_like(t)
        for k, a, b in self.harmonics:
            ac = ac + a * np.cos(k * w * t) + b * np.sin(k * w * t)
        out = self.v0 + self.delta * ac
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        w = self.omega
        ac = np.zeros_like(t)
        for k, a, b in self.harmonics:
            ac = ac + k * w * (b * np.cos(k * w * t) - a * np.sin(k * w * t))
        out = self.delta * ac
        return float(out) if out.ndim == 0 else out

    def shifted(self, tau):
        """Profile of ``t -> V(t - tau)`` (still a finite harmonic sum)."""
        w = self.omega
        new = []
        for k, a, b in self.harmonics:
            c, s = math.cos(k * w * tau), math.sin(k * w * tau)
            new.append((k, a * c - b * s, a * s + b * c))
        return replace(self, harmonics=tuple(new))

    @cached_property
    def _grid_values(self):
        t = np.linspace(0.0, self.period, WAVEFORM_GRID, endpoint=False)
        return np.asarray(self(t)), np.asarray(self.derivative(t))

    @property
    def minimum(self):
        if self.delta == 0:
            return self.v0
        return float(self._grid_values[0].min())

    @property
    def maximum(self):
        if self.delta == 0:
            return self.v0
        return float(self._grid_values[0].max())

    @property
    def derivative_sup(self):
        """``max |V'(t)|`` over one period (grid estimate)."""
        if self.delta == 0:
            return 0.0
        return float(np.abs(self._grid_values[1]).max())


class DampingModel:
    """Transformed damping force ``h_D(x, v)``."""

    kind: int

    def force(self, x, v):
        raise NotImplementedError

    def d_dx(self, x, v):
        raise NotImplementedError

    def d_dv(self, x, v):
        raise NotImplementedError


@dataclass(frozen=True)
class Linear(DampingModel):
    """``h_D = c v``."""

    c: float
    kind = 0

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise InvalidParameter(f"damping coefficient must be >= 0, got {self.c!r}")

    @property
    def coefficient(self):
        return self.c

    def force(self, x, v):
        return self.c * v

    def d_dx(self, x, v):
        return 0.0 * x

    def d_dv(self, x, v):
        return self.c + 0.0 * x


@dataclass(frozen=True)
class SqueezeFilm(DampingModel):
    """``h_D = gamma v / x**3``."""

    gamma: float
    kind = 1

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise InvalidParameter(f"damping coefficient must be >= 0, got {self.gamma!r}")

    @property
    def coefficient(self):
        return self.gamma

    def force(self, x, v):
        return self.gamma * v / (x * x * x)

    def d_dx(self, x, v):
        return -3.0 * self.gamma * v / (x * x * x * x)

    def d_dv(self, x, v):
        return self.gamma / (x * x * x)


@dataclass(frozen=True)
class ActuatorParams:
    e: float
    damping: DampingModel
    voltage: VoltageProfile
    g1: float = 0.0
    g2: float = 0.0
    d: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.e) and self.e > 0):
            raise InvalidParameter(f"e must be positive, got {self.e!r}")
        if not (math.isfinite(self.d) and self.d >= 0):
            raise InvalidParameter(f"delay must be >= 0, got {self.d!r}")
        if not (math.isfinite(self.g1) and math.isfinite(self.g2)):
            raise InvalidParameter("gains must be finite")

    @property
    def period(self):
        return self.voltage.period

    @property
    def has_feedback(self):
        return self.g1 != 0.0 or self.g2 != 0.0

    def with_(self, **changes):
        """Copy with some fields replaced; ``v0``/``delta`` are forwarded to the voltage."""
        vchanges = {k: changes.pop(k) for k in ("v0", "delta") if k in changes}
        if vchanges:
            changes["voltage"] = replace(changes.get("voltage", self.voltage), **vchanges)
        return replace(self, **changes)


class State(NamedTuple):
    x: float
    v: float


def voltage_at(profile: VoltageProfile, t):
    return profile(t)


def feedback_voltage(params: ActuatorParams, t, s, s_d):
    """``V(t) + g1 (x - x_d) + g2 (v - v_d)``."""
    return params.voltage(t) + params.g1 * (s[0] - s_d[0]) + params.g2 * (s[1] - s_d[1])


def acceleration(params: ActuatorParams, t, x, v, xd, vd):
    """Second component of the vector field; broadcasts over numpy arrays."""
    w = params.voltage(t) + params.g1 * (x - xd) + params.g2 * (v - vd)
    return 1.0 - params.e * w * w / (x * x) - x - params.damping.force(x, v)


def rhs(params: ActuatorParams, t, s, s_d):
    x, v = float(s[0]), float(s[1])
    if not x > 0:
        raise NonPositiveGap(x, t)
    return np.array([v, acceleration(params, t, x, v, float(s_d[0]), float(s_d[1]))])


def jacobians(params: ActuatorParams, t, x, v, xd, vd):
    """Partial derivatives of the acceleration with respect to ``(x, v)`` and ``(x_d, v_d)``.

    Returns ``(fx, fv, fxd, fvd)``, each broadcast like the inputs.
    """
    e = params.e
    w = params.voltage(t) + params.g1 * (x - xd) + params.g2 * (v - vd)
    x2 = x * x
    fxd = 2.0 * e * w * params.g1 / x2
    fvd = 2.0 * e * w * params.g2 / x2
    fx = 2.0 * e * w * w / (x2 * x) - 1.0 - params.damping.d_dx(x, v) - fxd
    fv = -params.damping.d_dv(x, v) - fvd
    return fx, fv, fxd, fvd
