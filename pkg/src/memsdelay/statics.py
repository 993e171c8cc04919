"""Equilibria, pull-in threshold, constant brackets and nondimensionalization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NotAnEquilibrium, PullInExceeded, VoltageRangeInvalid
from .model import ActuatorParams, Linear, SqueezeFilm, VoltageProfile

#: maximum of (1 - x) x**2 on (0, 1), attained at x = 2/3
CUBIC_MAX = 4.0 / 27.0
#: relative slack within which a target is treated as the double root at 2/3
DEGENERATE_RTOL = 1e-12


def bisect(f, lo, hi, tol=1e-12, maxiter=400):
    """Root of ``f`` in ``[lo, hi]`` given a sign change.

    Iterates until the bracket is below ``tol`` *and* stops shrinking in
    floating point, so the result is usually accurate to machine precision.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    if hi - lo > tol:
        raise ValueError("bisection did not reach tolerance")
    return lo if abs(flo) <= abs(fhi) else hi


def pull_in_voltage(e):
    """DC threshold ``(2/9) sqrt(3/e)`` above which no equilibrium exists."""
    if not e > 0:
        raise ValueError("e must be positive")
    return 2.0 / 9.0 * math.sqrt(3.0 / e)


def cubic_residual(x, target):
    return (1.0 - x) * x * x - target


def cubic_roots(target):
    """Roots of ``(1 - x) x^2 = target`` in ``(0, 2/3]`` and ``[2/3, 1)``.

    Returns ``(small, large, degenerate)``; at the pull-in boundary both roots
    are the double root 2/3.
    """
    if not target > 0:
        raise ValueError("target must be positive")
    if abs(target - CUBIC_MAX) <= DEGENERATE_RTOL * CUBIC_MAX:
        return 2.0 / 3.0, 2.0 / 3.0, True
    if target > CUBIC_MAX:
        raise PullInExceeded(f"(1-x)x^2 = {target!r} exceeds 4/27: no real root in (0, 1)")
    f = lambda x: cubic_residual(x, target)  # noqa: E731
    return bisect(f, 0.0, 2.0 / 3.0), bisect(f, 2.0 / 3.0, 1.0), False


@dataclass(frozen=True)
class EquilibriumPair:
    x1: float
    x2: float
    degenerate: bool = False


def equilibria(e, v0):
    vstar = pull_in_voltage(e)
    if v0 > vstar * (1 + DEGENERATE_RTOL):
        raise PullInExceeded(f"v0={v0!r} is above the pull-in voltage {vstar!r}")
    x1, x2, degenerate = cubic_roots(e * v0 * v0)
    return EquilibriumPair(x1, x2, degenerate)


class Classification(str, Enum):
    SADDLE = "saddle"
    STABLE_SPIRAL = "stable_spiral"
    STABLE_NODE = "stable_node"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class EquilibriumClass:
    x: float
    kind: Classification
    eigenvalues: np.ndarray


def equilibrium_jacobian(params: ActuatorParams, x_star):
    """Jacobian of the undelayed autonomous field at ``(x_star, 0)``."""
    return np.array(
        [[0.0, 1.0], [(2.0 - 3.0 * x_star) / x_star, -float(params.damping.d_dv(x_star, 0.0))]]
    )


def check_equilibrium(params: ActuatorParams, x_star, tol=1e-8):
    v0 = params.voltage.v0
    res = cubic_residual(x_star, params.e * v0 * v0)
    if not abs(res) <= tol:
        raise NotAnEquilibrium(f"x={x_star!r} leaves residual {res!r}")


def classify_equilibrium(params: ActuatorParams, x_star):
    check_equilibrium(params, x_star)
    eig = np.linalg.eigvals(equilibrium_jacobian(params, x_star))
    if x_star < 2.0 / 3.0:
        kind = Classification.SADDLE
    elif x_star == 2.0 / 3.0:
        kind = Classification.DEGENERATE
    else:
        stiffness = (3.0 * x_star - 2.0) / x_star
        damping = params.damping
        if isinstance(damping, Linear):
            spiral = damping.c**2 / 4.0 < stiffness
        elif isinstance(damping, SqueezeFilm):
            spiral = damping.gamma**2 / 4.0 < (3.0 * x_star - 2.0) * x_star**5
        else:
            spiral = float(damping.d_dv(x_star, 0.0)) ** 2 / 4.0 < stiffness
        kind = Classification.STABLE_SPIRAL if spiral else Classification.STABLE_NODE
    return EquilibriumClass(x_star, kind, eig)


@dataclass(frozen=True)
class BracketSet:
    """Constant lower/upper solutions: ``eta1 <= xi1 < 2/3 < xi2 <= eta2``."""

    xi1: float
    eta1: float
    xi2: float
    eta2: float
    degenerate: bool = False


def bracket_constants(e, voltage: VoltageProfile):
    vmin, vmax = voltage.minimum, voltage.maximum
    if not (0 < vmin <= vmax):
        raise VoltageRangeInvalid(f"need 0 < V_min <= V_max, got {vmin!r}, {vmax!r}")
    if e * vmax * vmax > CUBIC_MAX * (1 + DEGENERATE_RTOL):
        raise VoltageRangeInvalid("e V_max^2 exceeds the pull-in bound 4/27")
    xi1, xi2, deg_max = cubic_roots(e * vmax * vmax)
    eta1, eta2, deg_min = cubic_roots(e * vmin * vmin)
    return BracketSet(xi1, eta1, xi2, eta2, deg_max or deg_min)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional actuator data (SI units); defaults are the reference device."""

    m: float = 21e-5
    l: float = 3.8e-5  # noqa: E741
    A: float = 3.96e-5
    k: float = 320.0
    xi: float = 0.0014
    epsilon: float = 8.85e-12
    Gtilde1: float = 8.0
    Gtilde2: float = 8.0

    def __post_init__(self):
        for name in ("m", "l", "A", "k", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.xi < 0:
            raise ValueError("xi must be >= 0")


@dataclass(frozen=True)
class Dimensionless:
    c: float
    e: float
    G1: float
    G2: float
    time_scale: float


def nondimensionalize(p: PhysicalParams):
    """Scale by gap ``l`` and time ``sqrt(m/k)``.

    ``e`` uses the gap length ``l``; the electrostatic scale is
    ``epsilon A / (2 k l^3)``.
    """
    ts = math.sqrt(p.m / p.k)
    return Dimensionless(
        c=p.xi / math.sqrt(p.m * p.k),
        e=p.epsilon * p.A / (2.0 * p.k * p.l**3),
        G1=p.Gtilde1 * p.l,
        G2=p.Gtilde2 * p.l / ts,
        time_scale=ts,
    )
