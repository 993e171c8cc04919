"""Periodic orbits by Fourier collocation, natural-parameter continuation and Floquet multipliers.

Orbits are stored as real Fourier coefficients
``[a0, a1, ..., aN, b1, ..., bN]`` of ``x(t) = a0 + sum a_k cos(k w t) + b_k sin(k w t)``.
The delayed term ``x(t - d)`` is an exact phase rotation of the coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .ddesolve import solve_dde
from .errors import NegativeGapOrbit, NoConvergence, NotConverged
from .model import ActuatorParams, jacobians

DEFAULT_N = 32
MAX_N = 256
RESIDUAL_TOL = 1e-10
BRANCH_TOL = 1e-9
TAIL_RTOL = 1e-12
FD_STEP = 1e-7
MAX_NEWTON = 50


@dataclass(frozen=True)
class PeriodicOrbit:
    T: float
    coeffs: np.ndarray
    residual: float
    params: ActuatorParams | None = None

    @property
    def N(self):
        return (len(self.coeffs) - 1) // 2

    @property
    def omega(self):
        return 2.0 * math.pi / self.T

    @property
    def mean(self):
        return float(self.coeffs[0])

    @property
    def cos(self):
        return self.coeffs[1 : self.N + 1]

    @property
    def sin(self):
        return self.coeffs[self.N + 1 :]

    def _eval(self, t, order):
        t = np.asarray(t, dtype=float)
        k = np.arange(1, self.N + 1)
        arg = np.multiply.outer(t, k * self.omega)
        kw = k * self.omega
        c, s = np.cos(arg), np.sin(arg)
        a, b = self.cos, self.sin
        if order == 0:
            out = self.coeffs[0] + c @ a + s @ b
        elif order == 1:
            out = c @ (kw * b) - s @ (kw * a)
        else:
            out = -(c @ (kw**2 * a) + s @ (kw**2 * b))
        return float(out) if np.ndim(out) == 0 else out

    def x(self, t):
        return self._eval(t, 0)

    def xdot(self, t):
        return self._eval(t, 1)

    def xddot(self, t):
        return self._eval(t, 2)

    def shifted(self, tau):
        """Orbit of ``t -> x(t - tau)``."""
        return PeriodicOrbit(self.T, shift_coeffs(self.coeffs, self.omega, tau), self.residual, self.params)

    def resized(self, N):
        """Coefficients truncated or zero-padded to ``N`` harmonics."""
        return PeriodicOrbit(self.T, resize_coeffs(self.coeffs, N), self.residual, self.params)

    def defect(self, t):
        """Equation defect of the orbit at arbitrary times (closed-form evaluation)."""
        p = self.params
        t = np.asarray(t, dtype=float)
        x, v, acc = self.x(t), self.xdot(t), self.xddot(t)
        if p.d > 0:
            xd, vd = self.x(t - p.d), self.xdot(t - p.d)
        else:
            xd, vd = x, v
        return _defect(p, t, x, v, acc, xd, vd)


def shift_coeffs(coeffs, omega, tau):
    N = (len(coeffs) - 1) // 2
    k = np.arange(1, N + 1)
    c, s = np.cos(k * omega * tau), np.sin(k * omega * tau)
    a, b = coeffs[1 : N + 1], coeffs[N + 1 :]
    return np.concatenate([[coeffs[0]], a * c - b * s, a * s + b * c])


def resize_coeffs(coeffs, N):
    old = (len(coeffs) - 1) // 2
    a = np.zeros(N)
    b = np.zeros(N)
    m = min(N, old)
    a[:m] = coeffs[1 : m + 1]
    b[:m] = coeffs[old + 1 : old + 1 + m]
    return np.concatenate([[coeffs[0]], a, b])


def _defect(p: ActuatorParams, t, x, v, acc, xd, vd):
    w = p.voltage(t) + p.g1 * (x - xd) + p.g2 * (v - vd)
    return acc + p.damping.force(x, v) + x - 1.0 + p.e * w * w / (x * x)


class _Collocation:
    """Node synthesis and harmonic projection on ``4N`` equispaced nodes."""

    def __init__(self, params: ActuatorParams, T, N):
        self.p = params
        self.T = T
        self.N = N
        self.M = 4 * N
        self.t = np.arange(self.M) * (T / self.M)
        w = 2.0 * math.pi / T
        k = np.arange(N + 1)
        self.ikw = 1j * k * w
        self.delay_phase = np.exp(-1j * k * w * params.d)
        self.V = params.voltage(self.t)

    def spectrum(self, coeffs):
        N = self.N
        X = np.zeros(N + 1, dtype=complex)
        X[0] = coeffs[0]
        X[1:] = 0.5 * (coeffs[1 : N + 1] - 1j * coeffs[N + 1 :])
        return X

    def synth(self, X):
        full = np.zeros(self.M // 2 + 1, dtype=complex)
        full[: self.N + 1] = X * self.M
        return np.fft.irfft(full, n=self.M)

    def node_defect(self, coeffs):
        X = self.spectrum(coeffs)
        x = self.synth(X)
        v = self.synth(self.ikw * X)
        acc = self.synth(self.ikw**2 * X)
        if self.p.d > 0:
            Xd = X * self.delay_phase
            xd, vd = self.synth(Xd), self.synth(self.ikw * Xd)
        else:
            xd, vd = x, v
        p = self.p
        w = self.V + p.g1 * (x - xd) + p.g2 * (v - vd)
        return x, acc + p.damping.force(x, v) + x - 1.0 + p.e * w * w / (x * x)

    def project(self, r):
        R = np.fft.rfft(r)[: self.N + 1] / self.M
        return np.concatenate([[R[0].real], R[1:].real, R[1:].imag])


def _tail_ok(coeffs):
    N = (len(coeffs) - 1) // 2
    mags = np.hypot(coeffs[1 : N + 1], coeffs[N + 1 :])
    scale = max(abs(coeffs[0]), float(mags.max(initial=0.0)))
    tail = mags[N - N // 4 :]
    return float(tail.max(initial=0.0)) <= TAIL_RTOL * scale


def _newton(col: _Collocation, c0, tol):
    c = c0.copy()
    n = len(c)
    last_step = math.inf
    for _ in range(MAX_NEWTON):
        x, r = col.node_defect(c)
        if not np.all(np.isfinite(r)):
            raise NoConvergence("collocation defect became non-finite")
        if np.min(x) <= 0:
            raise NegativeGapOrbit("iterate left the domain x > 0")
        R = col.project(r)
        if np.max(np.abs(r)) <= 1e-3 * tol or last_step <= 1e-14 * (1.0 + np.max(np.abs(c))):
            return c, float(np.max(np.abs(r)))
        J = np.empty((n, n))
        for j in range(n):
            cj = c.copy()
            cj[j] += FD_STEP
            _, rj = col.node_defect(cj)
            J[:, j] = (col.project(rj) - R) / FD_STEP
        try:
            dc = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular collocation Jacobian: {exc}") from None
        c = c + dc
        last_step = float(np.max(np.abs(dc)))
    x, r = col.node_defect(c)
    res = float(np.max(np.abs(r)))
    if res <= tol and np.min(x) > 0:
        return c, res
    raise NoConvergence(f"Newton did not converge in {MAX_NEWTON} steps (residual {res:.3e})")


def find_periodic(params: ActuatorParams, guess, N=DEFAULT_N, T=None, tol=RESIDUAL_TOL, max_N=MAX_N):
    """T-periodic solution near ``guess`` (a constant gap or a ``PeriodicOrbit``).

    Harmonics double from ``N`` up to ``max_N`` until the last quarter of the
    coefficient magnitudes is negligible.
    """
    T = params.period if T is None else float(T)
    if not math.isclose(T, params.period, rel_tol=1e-12):
        raise ValueError("T must equal the forcing period")
    if not 0 <= params.d < T:
        raise ValueError(f"delay must satisfy 0 <= d < T, got d={params.d!r}")
    if isinstance(guess, PeriodicOrbit):
        c = resize_coeffs(guess.coeffs, N)
    else:
        c = np.zeros(2 * N + 1)
        c[0] = float(guess)
    while True:
        col = _Collocation(params, T, N)
        c, res = _newton(col, c, tol)
        if res > tol:
            raise NoConvergence(f"residual {res:.3e} above {tol:.1e}")
        if _tail_ok(c) or 2 * N > max_N:
            break
        N *= 2
        c = resize_coeffs(c, N)
    x, _ = col.node_defect(c)
    if np.min(x) <= 0:
        raise NegativeGapOrbit(f"orbit reaches x={np.min(x)!r}")
    return PeriodicOrbit(T, c, res, params)


# ---------------------------------------------------------------------------
# continuation


@dataclass
class Branch:
    parameter: str
    values: list = field(default_factory=list)
    orbits: list = field(default_factory=list)
    multipliers: list = field(default_factory=list)
    truncated: bool = False
    diagnostic: str = ""

    def __len__(self):
        return len(self.orbits)

    @property
    def end(self):
        return self.orbits[-1]


def dominant_multipliers(orbit: PeriodicOrbit, m=64):
    """Two largest-modulus Floquet multipliers (ODE monodromy at ``d = 0``)."""
    if orbit.params.d == 0:
        return monodromy_ode(orbit.params, orbit).multipliers
    return floquet_dde(orbit.params, orbit, m).multipliers[:2]


def continue_branch(start: PeriodicOrbit, parameter, to, steps, stability=True, m=64):
    """Natural-parameter continuation of ``start`` in ``g1``, ``g2`` or ``d``.

    A failed correction ends the branch early with ``truncated`` set; that is a
    result, not an error.
    """
    if parameter not in ("g1", "g2", "d"):
        raise ValueError(f"cannot continue in {parameter!r}")
    p0 = start.params
    v0 = float(getattr(p0, parameter))
    if parameter == "d" and not (0 <= to < start.T):
        raise ValueError("delay path must stay in [0, T)")
    branch = Branch(parameter)
    branch.values.append(v0)
    branch.orbits.append(start)
    branch.multipliers.append(dominant_multipliers(start, m) if stability else None)
    if steps <= 0 or to == v0:
        return branch
    prev = start
    for value in np.linspace(v0, to, steps + 1)[1:]:
        params = prev.params.with_(**{parameter: float(value)})
        try:
            orbit = find_periodic(params, prev, N=prev.N, tol=BRANCH_TOL)
            mult = dominant_multipliers(orbit, m) if stability else None
        except (NoConvergence, NegativeGapOrbit, NotConverged) as exc:
            branch.truncated = True
            branch.diagnostic = f"stopped at {parameter}={value!r}: {exc}"
            break
        branch.values.append(float(value))
        branch.orbits.append(orbit)
        branch.multipliers.append(mult)
        prev = orbit
    return branch


# ---------------------------------------------------------------------------
# monodromy and Floquet multipliers


@dataclass(frozen=True)
class Monodromy:
    matrix: np.ndarray
    multipliers: np.ndarray
    det: float


def _rk4_matrix_step(J, t, h):
    """One-step propagator of ``Y' = J(t) Y`` by classical RK4."""
    I = np.eye(2)  # noqa: E741
    J0, Jm, J1 = J(t), J(t + 0.5 * h), J(t + h)
    k1 = J0
    k2 = Jm @ (I + 0.5 * h * k1)
    k3 = Jm @ (I + 0.5 * h * k2)
    k4 = J1 @ (I + h * k3)
    return I + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _multipliers_2x2(P, det):
    ev = np.linalg.eigvals(P)
    ev = ev[np.argsort(-np.abs(ev))]
    if np.all(np.isreal(ev)) and abs(ev[0]) > 0:
        ev = np.array([ev[0].real, det / ev[0].real])
    return ev


def monodromy(J, T, steps=4096):
    """Monodromy of a 2x2 linear T-periodic system ``Y' = J(t) Y``.

    The determinant is accumulated as the product of one-step determinants,
    which stays accurate when the multipliers differ by many orders of magnitude.
    """
    h = T / steps
    P = np.eye(2)
    det = 1.0
    for i in range(steps):
        S = _rk4_matrix_step(J, i * h, h)
        P = S @ P
        det *= S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
    return Monodromy(P, _multipliers_2x2(P, det), det)


def monodromy_ode(params: ActuatorParams, orbit: PeriodicOrbit, steps=4096):
    """Monodromy of the undelayed variational equation around ``orbit``."""
    if params.d != 0:
        raise ValueError("monodromy_ode needs d = 0; use floquet_dde")

    def J(t):
        x, v = orbit.x(t), orbit.xdot(t)
        fx, fv, fxd, fvd = jacobians(params, t, x, v, x, v)
        return np.array([[0.0, 1.0], [fx + fxd, fv + fvd]])

    return monodromy(J, orbit.T, steps)


@dataclass(frozen=True)
class FloquetResult:
    multipliers: np.ndarray
    m: int
    change: float


def _period_map(params: ActuatorParams, orbit: PeriodicOrbit, m, step):
    T, d = orbit.T, params.d
    nodes = np.linspace(-d, 0.0, m + 1)
    basis = CubicSpline(nodes, np.eye(m + 1))
    ncol = 2 * (m + 1)

    def history(s):
        L = basis(s)
        H = np.zeros((2, ncol))
        H[0, 0::2] = L
        H[1, 1::2] = L
        return H

    def fun(t, y, yd):
        x, v = orbit.x(t), orbit.xdot(t)
        xd, vd = orbit.x(t - d), orbit.xdot(t - d)
        fx, fv, fxd, fvd = jacobians(params, t, x, v, xd, vd)
        return np.vstack([y[1], fx * y[0] + fv * y[1] + fxd * yd[0] + fvd * yd[1]])

    seg = solve_dde(fun, history(0.0), history, d, T, step)
    M = np.empty((ncol, ncol))
    for i, s in enumerate(nodes):
        M[2 * i : 2 * i + 2] = seg(T + s)
    return M


def floquet_dde(params: ActuatorParams, orbit: PeriodicOrbit, m=64, step=None, check=True):
    """Floquet multipliers of a periodic orbit of the delayed system.

    The period map is discretized on ``m + 1`` equispaced history nodes in
    ``[-d, 0]`` (cubic-spline interpolation between nodes), giving a matrix of
    size ``2 (m + 1)``.  With ``check`` the dominant multiplier is recomputed
    with ``2 m`` nodes and must move by at most 1e-4.
    """
    T, d = orbit.T, params.d
    if not 0 < d < T:
        raise ValueError("floquet_dde needs 0 < d < T")
    step = T / 512 if step is None else step
    ev = np.linalg.eigvals(_period_map(params, orbit, m, step))
    ev = ev[np.argsort(-np.abs(ev))]
    change = math.nan
    if check:
        ev2 = np.linalg.eigvals(_period_map(params, orbit, 2 * m, step))
        ev2 = ev2[np.argsort(-np.abs(ev2))]
        change = float(np.max(np.abs(ev[:2] - ev2[:2])))
        if change > 1e-4:
            raise NotConverged(f"dominant multipliers moved by {change:.2e} between m={m} and m={2 * m}")
    return FloquetResult(ev, m, change)


# ---------------------------------------------------------------------------
# shooting cross-check (undelayed)


def shoot_periodic_ode(params: ActuatorParams, guess, steps=4096, tol=1e-12, maxiter=50):
    """Initial state ``(x, v)`` of a T-periodic solution of the undelayed system by Newton shooting."""
    if params.d != 0 and params.has_feedback:
        raise ValueError("shooting is only provided for the undelayed system")
    from .model import acceleration

    T = params.period
    h = T / steps

    def f(t, z):
        x, v = z[0], z[1]
        fx, fv, fxd, fvd = jacobians(params, t, x, v, x, v)
        Jm = np.array([[0.0, 1.0], [fx + fxd, fv + fvd]])
        dz = np.empty(6)
        dz[0] = v
        dz[1] = acceleration(params, t, x, v, x, v)
        dz[2:] = (Jm @ z[2:].reshape(2, 2)).ravel()
        return dz

    y = np.asarray(guess, dtype=float)
    for _ in range(maxiter):
        z = np.concatenate([y, np.eye(2).ravel()])
        for i in range(steps):
            t = i * h
            k1 = f(t, z)
            k2 = f(t + 0.5 * h, z + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, z + 0.5 * h * k2)
            k4 = f(t + h, z + h * k3)
            z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        G = z[:2] - y
        if np.max(np.abs(G)) <= tol:
            return y
        P = z[2:].reshape(2, 2)
        y = y - np.linalg.solve(P - np.eye(2), G)
        if not y[0] > 0:
            raise NoConvergence("shooting iterate left x > 0")
    raise NoConvergence("shooting did not converge")
