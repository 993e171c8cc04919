"""Fixed-step RK4 method of steps for delay equations with cubic Hermite dense output.

Two entry points share the same scheme:

* ``integrate`` advances the actuator model through the compiled (or
  fallback) kernel;
* ``solve_dde`` is a generic numpy driver for ``y' = f(t, y, y(t - d))`` with
  array-valued states, used for test problems and variational equations.

When the step divides the delay, every delayed stage lands on a grid point or
a step midpoint of already-finalized output.  For delays shorter than one step
the delayed stage falls inside the current step; the previous step's Hermite
polynomial is then extrapolated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import HistoryTooShort, IntegratorError, PullInCollapse
from .model import ActuatorParams, Linear, State

#: time tolerance for pull-in refinement
PULLIN_TTOL = 1e-10
#: minimum steps per delay span
MIN_STEPS_PER_DELAY = 8


def hermite(y0, y1, f0, f1, h, theta):
    """Cubic Hermite interpolant on one step at fraction ``theta`` (may lie outside [0, 1])."""
    t2 = theta * theta
    t3 = t2 * theta
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + theta
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@dataclass(frozen=True)
class HistorySegment:
    """Piecewise cubic Hermite function on increasing breakpoints ``t``.

    ``y`` and ``f`` hold values and derivatives at the breakpoints; trailing
    dimensions are arbitrary (a state vector, or a matrix of states).
    """

    t: np.ndarray
    y: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        if len(self.t) < 2 or np.any(np.diff(self.t) <= 0):
            raise ValueError("breakpoints must be strictly increasing (at least two)")

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def t1(self):
        return float(self.t[-1])

    def __call__(self, s):
        s = float(s)
        span = self.t1 - self.t0
        slack = 1e-12 * max(1.0, abs(self.t0), abs(self.t1))
        if s < self.t0 - slack or s > self.t1 + slack or span <= 0:
            raise HistoryTooShort(f"t={s!r} outside [{self.t0!r}, {self.t1!r}]")
        j = int(np.searchsorted(self.t, s, side="right")) - 1
        j = min(max(j, 0), len(self.t) - 2)
        h = self.t[j + 1] - self.t[j]
        theta = (s - self.t[j]) / h
        if theta == 0.0:
            return self.y[j].copy()
        return hermite(self.y[j], self.y[j + 1], self.f[j], self.f[j + 1], h, theta)

    def sample(self, times):
        return np.array([self(s) for s in np.atleast_1d(times)])


def aligned_step(d, step):
    """Largest step ``<= step`` that divides ``d`` into at least eight pieces."""
    if not step > 0:
        raise ValueError("step must be positive")
    if d <= 0:
        return step, 0
    k = max(MIN_STEPS_PER_DELAY, int(math.ceil(d / step - 1e-12)))
    return d / k, k


# ---------------------------------------------------------------------------
# generic solver


def solve_dde(fun, y0, history, d, t_end, step, align=True):
    """Integrate ``y' = fun(t, y, y(t - d))`` from ``t = 0`` to ``t_end``.

    ``history`` is a callable on ``[-d, 0]`` (or ``None`` for ``d == 0``).  With
    ``align=True`` the step is shortened to divide ``d`` (when ``d >= step``).
    Returns a ``HistorySegment`` over the computed grid; its last breakpoint is
    the first grid point at or after ``t_end``.
    """
    y0 = np.asarray(y0, dtype=float)
    if d > 0 and history is None:
        raise HistoryTooShort("a history on [-d, 0] is required when d > 0")
    if align and d >= step:
        h, _ = aligned_step(d, step)
    else:
        h = float(step)
    n = int(math.ceil(t_end / h - 1e-9))
    n = max(n, 1)
    Y = np.zeros((n + 1,) + y0.shape)
    F = np.zeros_like(Y)
    Y[0] = y0

    def hist(s):
        return np.asarray(history(s), dtype=float) if d > 0 else None

    def delayed(s, i, extra=None):
        """State at ``s`` using history, finalized steps or extrapolation of step ``i - 1``."""
        if d == 0:
            return None
        if s <= 0.0:
            return hist(s)
        j = s / h
        m = int(math.floor(j))
        if m < i:
            theta = j - m
            if theta == 0.0:
                return Y[m]
            return hermite(Y[m], Y[m + 1], F[m], F[m + 1], h, theta)
        if m == i and j - m == 0.0:
            return Y[i]
        # inside the current step
        if i == 0:
            return Y[0] + s * extra
        return hermite(Y[i - 1], Y[i], F[i - 1], F[i], h, j - (i - 1))

    F[0] = fun(0.0, Y[0], hist(-d) if d > 0 else Y[0])
    for i in range(n):
        t = i * h
        y = Y[i]
        k1 = F[i]
        tm = t + 0.5 * h
        ym = delayed(tm - d, i, k1) if d > 0 else None
        y2 = y + 0.5 * h * k1
        k2 = fun(tm, y2, ym if d > 0 else y2)
        y3 = y + 0.5 * h * k2
        k3 = fun(tm, y3, ym if d > 0 else y3)
        y4 = y + h * k3
        t1 = (i + 1) * h
        ye = delayed(t1 - d, i, k1) if d > 0 else None
        k4 = fun(t1, y4, ye if d > 0 else y4)
        Y[i + 1] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(Y[i + 1])):
            raise IntegratorError(f"non-finite state at t={t1!r}")
        if d == 0:
            yd = Y[i + 1]
        elif d < h:
            # t1 - d lies inside step i whose end slope is not known yet
            yd = ye
        else:
            yd = delayed(t1 - d, i + 1, k1)
        F[i + 1] = fun(t1, Y[i + 1], yd)
    return HistorySegment(np.arange(n + 1) * h, Y, F)


# ---------------------------------------------------------------------------
# actuator trajectories


@dataclass(frozen=True)
class PullInEvent:
    t_lo: float
    t_hi: float

    @property
    def t(self):
        return 0.5 * (self.t_lo + self.t_hi)


@dataclass(frozen=True)
class Trajectory:
    """Samples on a uniform grid ``t = i h`` with Hermite dense output."""

    t: np.ndarray
    y: np.ndarray
    dense: HistorySegment
    pullin: PullInEvent | None = None

    @property
    def x(self):
        return self.y[:, 0]

    @property
    def v(self):
        return self.y[:, 1]

    @property
    def samples(self):
        return [(float(t), State(float(s[0]), float(s[1]))) for t, s in zip(self.t, self.y)]

    @property
    def final(self):
        return State(float(self.y[-1, 0]), float(self.y[-1, 1]))

    @property
    def events(self):
        return [] if self.pullin is None else [self.pullin]


def _to_gap(state, coords):
    x, v = float(state[0]), float(state[1])
    if coords == "gap":
        return x, v
    if coords == "displacement":
        return 1.0 - x, -v
    raise ValueError(f"unknown coordinates {coords!r}")


def _history_callable(history, coords):
    if isinstance(history, HistorySegment):
        seg = history
        return lambda s: _to_gap(seg(s), coords)
    if callable(history):
        return lambda s: _to_gap(history(s), coords)
    const = _to_gap(history, coords)
    return lambda s: const


def default_step(params: ActuatorParams):
    """``min(T, d) / 64`` (``T / 64`` without delay)."""
    T = params.period
    return (min(T, params.d) if params.d > 0 else T) / 64.0


def integrate(params: ActuatorParams, history, t_end, step=None, coords="gap",
              raise_on_pullin=False, backend=None):
    """Integrate the delayed actuator from ``t = 0`` to ``t_end``.

    ``history`` is a constant state ``(x, v)``, a callable ``s -> (x, v)`` on
    ``[-d, 0]`` or a ``HistorySegment``; ``coords="displacement"`` reads it as
    ``(y, y')`` with ``x = 1 - y``.  Without feedback the delay has no effect
    and the plain periodic-forced system is integrated with ``step`` as given.
    A gap crossing ``x <= 0`` ends the record with a ``PullInEvent`` (or raises
    ``PullInCollapse`` when ``raise_on_pullin``).
    """
    if step is None:
        step = default_step(params)
    if not step > 0:
        raise ValueError("step must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    hist = _history_callable(history, coords)
    delayed = params.d > 0 and params.has_feedback
    if delayed:
        h, k = aligned_step(params.d, step)
        g1, g2 = params.g1, params.g2
    else:
        h, k = float(step), 0
        g1 = g2 = 0.0
    n = int(math.ceil(t_end / h - 1e-9))
    if k > 0:
        grid = -params.d + np.arange(k + 1) * h
        hist_grid = np.array([hist(s) for s in grid], dtype=float)
        hist_mid = np.array([hist(s + 0.5 * h) for s in grid[:-1]], dtype=float)
    else:
        hist_grid = np.zeros((1, 2))
        hist_mid = np.zeros((1, 2))
    y0 = np.array(hist(0.0), dtype=float)
    if not y0[0] > 0:
        raise PullInCollapse(0.0, 0.0)
    Y = np.zeros((n + 1, 2))
    F = np.zeros((n + 1, 2))
    Y[0] = y0
    volt = params.voltage
    ks = np.array([q[0] for q in volt.harmonics], dtype=float)
    cs = np.array([q[1] for q in volt.harmonics], dtype=float)
    ss = np.array([q[2] for q in volt.harmonics], dtype=float)
    damping = params.damping
    kind = 0 if isinstance(damping, Linear) else 1
    kernel = kernels.get_kernel(backend)
    done, status = kernel(params.e, kind, float(damping.coefficient), g1, g2, volt.v0, volt.delta,
                          volt.omega, ks, cs, ss, h, k, hist_grid, hist_mid, Y, F, n)
    t = np.arange(done + 1) * h
    Y, F = Y[: done + 1], F[: done + 1]
    if status == 2:
        raise IntegratorError(f"non-finite state after t={t[-1]!r}")
    event = None
    if status == 1:
        t_lo, t_hi = _refine_pullin(params, hist, h, k, g1, g2, t, Y, F)
        event = PullInEvent(t_lo, t_hi)
    if len(t) >= 2:
        dense = HistorySegment(t, Y, F)
    else:
        dense = HistorySegment(np.array([0.0, h]), np.vstack([Y, Y]), np.vstack([F, F]))
    traj = Trajectory(t, Y, dense, event)
    if event is not None and raise_on_pullin:
        raise PullInCollapse(event.t_lo, event.t_hi, traj)
    return traj


def _refine_pullin(params, hist, h, k, g1, g2, t, Y, F):
    """Bracket the gap crossing inside the failed step to ``PULLIN_TTOL`` by bisecting its length."""
    from .model import acceleration

    i = len(t) - 1
    t0 = float(t[-1])
    d = k * h
    p = params.with_(g1=g1, g2=g2)

    def lookup(s):
        if k == 0:
            return None
        if s <= 0.0:
            return np.asarray(hist(s), dtype=float)
        j = s / h
        m = min(int(math.floor(j)), i - 1)
        return hermite(Y[m], Y[m + 1], F[m], F[m + 1], h, j - m)

    def f(tt, y, yd):
        if yd is None:
            yd = y
        return np.array([y[1], acceleration(p, tt, y[0], y[1], yd[0], yd[1])])

    def collapses(tau):
        y = Y[i]
        if not y[0] > 0:
            return True
        yd0 = lookup(t0 - d)
        k1 = f(t0, y, yd0)
        ym = lookup(t0 + 0.5 * tau - d)
        y2 = y + 0.5 * tau * k1
        if not y2[0] > 0:
            return True
        k2 = f(t0 + 0.5 * tau, y2, ym)
        y3 = y + 0.5 * tau * k2
        if not y3[0] > 0:
            return True
        k3 = f(t0 + 0.5 * tau, y3, ym)
        y4 = y + tau * k3
        if not y4[0] > 0:
            return True
        k4 = f(t0 + tau, y4, lookup(t0 + tau - d))
        yn = y + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return not (np.all(np.isfinite(yn)) and yn[0] > 0)

    lo, hi = 0.0, h
    while hi - lo > PULLIN_TTOL:
        mid = 0.5 * (lo + hi)
        if collapses(mid):
            hi = mid
        else:
            lo = mid
    return t0 + lo, t0 + hi


# ---------------------------------------------------------------------------
# convergence metrics


def _window_mask(t, t_start, t_stop):
    return (t >= t_start - 1e-12) & (t <= t_stop + 1e-12)


def settle_metric(traj: Trajectory, target, window):
    """Sup over the trailing ``window`` of the Euclidean distance to ``target``."""
    span = traj.t[-1] - traj.t[0]
    if window > span + 1e-12:
        raise ValueError("window exceeds the trajectory span")
    mask = _window_mask(traj.t, traj.t[-1] - window, traj.t[-1])
    diff = traj.y[mask] - np.asarray(target, dtype=float)
    return float(np.sqrt((diff**2).sum(axis=1)).max())


def window_metrics(traj: Trajectory, target, window):
    """Sup distance to ``target`` over consecutive windows ``[j w, (j+1) w]``."""
    out = []
    j = 0
    while (j + 1) * window <= traj.t[-1] + 1e-9:
        mask = _window_mask(traj.t, j * window, (j + 1) * window)
        diff = traj.y[mask] - np.asarray(target, dtype=float)
        out.append(float(np.sqrt((diff**2).sum(axis=1)).max()))
        j += 1
    return np.array(out)


def mutual_distance(a: Trajectory, b: Trajectory, window):
    """Sup distance between two runs on a common grid over the trailing ``window``."""
    if len(a.t) != len(b.t) or not np.array_equal(a.t, b.t):
        raise ValueError("trajectories must share a time grid")
    mask = _window_mask(a.t, a.t[-1] - window, a.t[-1])
    diff = a.y[mask] - b.y[mask]
    return float(np.sqrt((diff**2).sum(axis=1)).max())
