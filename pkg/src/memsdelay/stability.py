"""Linear stability, delay bounds and nondegeneracy tests.

Covers the linearization about the upper equilibrium, the closed-form delay
bound built from an explicit Lyapunov matrix, the general Lyapunov-based bound
for ``X' = A X + B X(t - tau)``, the characteristic determinants ``h_n(d)``,
Hill-equation nondegeneracy, the gain gates for delay continuation and the
squeeze-film solvability constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NoLstarRoot,
    NotHurwitz,
    OutsideTheorem,
    SignAssumptionViolated,
    SingularMatrix,
)
from .model import ActuatorParams, Linear, SqueezeFilm, VoltageProfile
from .statics import BracketSet, bisect, bracket_constants, check_equilibrium, equilibria

#: samples per period for pointwise Hill checks
HILL_GRID = 4096
#: extra margin demanded of sampled pointwise inequalities
HILL_SAFETY = 1e-9


# ---------------------------------------------------------------------------
# linearization and the explicit delay bound


@dataclass(frozen=True)
class DelayLinearization:
    """``X' = A X + B X(t - d)`` about ``(x_star, 0)``."""

    A: np.ndarray
    B: np.ndarray
    a: float
    b: float
    ghat1: float
    ghat2: float
    x_star: float


def linearize_at_equilibrium(params: ActuatorParams, x_star, squeeze_slope="gap"):
    """Linearize the delayed autonomous system (DC voltage ``v0``) at ``(x_star, 0)``.

    ``b = -dh_D/dv`` at the equilibrium.  For squeeze-film damping
    ``squeeze_slope="gap"`` gives ``-gamma / x**3`` (the derivative of the
    transformed force); ``"displacement"`` gives ``-gamma / (1 - x)**3``, i.e.
    the untransformed coefficient evaluated at the gap value.
    """
    check_equilibrium(params, x_star)
    v0 = params.voltage.v0
    a = (2.0 - 3.0 * x_star) / x_star
    damping = params.damping
    if isinstance(damping, SqueezeFilm):
        if squeeze_slope == "gap":
            b = -damping.gamma / x_star**3
        elif squeeze_slope == "displacement":
            b = -damping.gamma / (1.0 - x_star) ** 3
        else:
            raise ValueError(f"unknown squeeze_slope {squeeze_slope!r}")
    else:
        b = -float(damping.d_dv(x_star, 0.0))
    ghat1 = 2.0 * (1.0 - x_star) * params.g1 / v0
    ghat2 = 2.0 * (1.0 - x_star) * params.g2 / v0
    A = np.array([[0.0, 1.0], [a - ghat1, b - ghat2]])
    B = np.array([[0.0, 0.0], [ghat1, ghat2]])
    return DelayLinearization(A, B, a, b, ghat1, ghat2, x_star)


@dataclass(frozen=True)
class LyapunovCertificate:
    C: np.ndarray
    lambda_ratio: float
    M: np.ndarray  # A + B

    @property
    def residual(self):
        R = self.M.T @ self.C + self.C @ self.M + np.eye(len(self.C))
        return float(np.abs(R).sum(axis=1).max())

    @property
    def positive_definite(self):
        return bool(self.C[0, 0] > 0 and np.linalg.det(self.C) > 0)


def eigen_ratio_closed_form(a, b):
    """``lambda_min(C) / lambda_max(C)`` for the explicit 2x2 certificate.

    Written as ``2|a| / (S + sqrt(S^2 - 4a^2))`` with ``S = a^2 + b^2 + 1``;
    algebraically equal to ``-(S - sqrt(S^2 - 4a^2)) / (2a)`` but free of
    cancellation when ``|b|`` is large.
    """
    S = a * a + b * b + 1.0
    return 2.0 * abs(a) / (S + math.sqrt(S * S - 4.0 * a * a))


def lyapunov_certificate(lin: DelayLinearization):
    a, b = lin.a, lin.b
    if not (a < 0 and b < 0):
        raise SignAssumptionViolated(f"need a < 0 and b < 0, got a={a!r}, b={b!r}")
    c11 = (b * b - a * (1.0 - a)) / (2.0 * a * b)
    c22 = (1.0 - a) / (2.0 * a * b)
    c12 = -1.0 / (2.0 * a)
    C = np.array([[c11, c12], [c12, c22]])
    return LyapunovCertificate(C, eigen_ratio_closed_form(a, b), lin.A + lin.B)


def delay_bound_d0(lin: DelayLinearization):
    """Largest delay for which the closed-form argument guarantees stability.

    ``inf`` when the delayed terms vanish (``ghat1 + ghat2 == 0``).
    """
    cert = lyapunov_certificate(lin)
    a, b = lin.a, lin.b
    gsum = abs(lin.ghat1 + lin.ghat2)
    if gsum == 0:
        return math.inf
    norm_a = max(1.0, abs(a - lin.ghat1) + abs(b - lin.ghat2))
    return math.sqrt(cert.lambda_ratio) * abs(a) / (gsum * max(1.0, (a - 1.0) / b) * (norm_a + gsum))


def lyapunov_solve(M):
    """Symmetric ``C`` with ``M^T C + C M = -I``."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    eye = np.eye(n)
    K = np.kron(eye, M.T) + np.kron(M.T, eye)
    vec = np.linalg.solve(K, -eye.reshape(-1, order="F"))
    C = vec.reshape(n, n, order="F")
    return 0.5 * (C + C.T)


def _inf_norm(P):
    return float(np.abs(P).sum(axis=1).max())


def khusainov_tau0(A, B):
    """Delay bound for ``X' = A X + B X(t - tau)`` from a numerical Lyapunov solve (inf-norms)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    M = A + B
    if np.max(np.linalg.eigvals(M).real) >= 0:
        raise NotHurwitz("A + B is not Hurwitz")
    if not np.any(B):
        return math.inf
    C = lyapunov_solve(M)
    ev = np.linalg.eigvalsh(C)
    return math.sqrt(ev[0] / ev[-1]) / (2.0 * (_inf_norm(A) + _inf_norm(B)) * _inf_norm(C @ B))


# ---------------------------------------------------------------------------
# nondegeneracy of the linear delayed system


def hn_determinant(A, B, T, d, n):
    """``det(2 n pi i / T I - A - exp(-2 n pi i d / T) B)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    w = 2.0 * math.pi * n / T
    M = 1j * w * np.eye(len(A)) - A - np.exp(-1j * w * d) * B
    return complex(np.linalg.det(M))


@dataclass(frozen=True)
class Nondegeneracy:
    ok: bool
    witness: int | None
    n_max: int
    min_scaled_modulus: float


def is_nondegenerate_delay(A, B, T, d, rtol=1e-10):
    """Whether the linear delayed system has no nontrivial T-periodic solution.

    Frequencies ``|n| > n_max`` cannot hit the spectrum because ``2 pi |n| / T``
    then exceeds ``||A||_2 + ||B||_2``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    na, nb = np.linalg.norm(A, 2), np.linalg.norm(B, 2)
    n_max = int(math.ceil(T * (na + nb) / (2.0 * math.pi)))
    dim = len(A)
    worst = math.inf
    for n in [0] + [s * j for j in range(1, n_max + 1) for s in (1, -1)]:
        scale = max(1.0, 2.0 * math.pi * abs(n) / T + na + nb) ** dim
        r = abs(hn_determinant(A, B, T, d, n)) / scale
        worst = min(worst, r)
        if r <= rtol:
            return Nondegeneracy(False, n, n_max, r)
    return Nondegeneracy(True, None, n_max, worst)


def scan_nondegenerate(A, B, T, step=1e-2):
    """``(d, Nondegeneracy)`` over the grid ``0, step, 2 step, ... < T``."""
    ds = np.arange(0.0, T, step)
    return [(float(d), is_nondegenerate_delay(A, B, T, d)) for d in ds]


def poincare_degree_sign(A, B):
    """``(-1)^m sgn det(A + B)`` for m-dimensional systems."""
    M = np.atleast_2d(np.asarray(A, dtype=float)) + np.atleast_2d(np.asarray(B, dtype=float))
    det = float(np.linalg.det(M))
    if abs(det) <= 1e-14:
        raise SingularMatrix(f"det(A + B) = {det!r}")
    return (-1) ** len(M) * (1 if det > 0 else -1)


# ---------------------------------------------------------------------------
# periodic-orbit bounds


def velocity_bound(varsigma, varrho, c, e, voltage: VoltageProfile, T=None):
    """A priori bound on ``|psi'|`` for a T-periodic solution with ``varsigma <= psi <= varrho``."""
    if not (0 < varsigma <= varrho):
        raise ValueError("need 0 < varsigma <= varrho")
    T = voltage.period if T is None else T
    vmin, vmax = voltage.minimum, voltage.maximum
    lo = abs(1.0 - varsigma - e * vmin * vmin / varrho**2)
    hi = abs(1.0 - varrho - e * vmax * vmax / varsigma**2)
    return c * (varrho - varsigma) + max(lo, hi) * T


@dataclass(frozen=True)
class HillCoefficients:
    """Samples of ``y'' + (c + b(t)) y' + a(t) y = 0`` on a uniform periodic grid."""

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    bdot: np.ndarray
    c: float
    T: float

    @classmethod
    def constant(cls, a, b, c, T, n=HILL_GRID):
        t = np.linspace(0.0, T, n, endpoint=False)
        one = np.ones(n)
        return cls(t, a * one, b * one, 0.0 * one, float(c), float(T))

    @classmethod
    def from_orbit(cls, params: ActuatorParams, orbit, n=HILL_GRID):
        """Coefficients of the linearization about an undelayed orbit ``psi`` (linear damping)."""
        if not isinstance(params.damping, Linear):
            raise OutsideTheorem("Hill coefficients are defined for linear damping")
        T = params.period
        t = np.linspace(0.0, T, n, endpoint=False)
        psi, dpsi = orbit.x(t), orbit.xdot(t)
        V, dV = params.voltage(t), params.voltage.derivative(t)
        e, g1, g2 = params.e, params.g1, params.g2
        a = 1.0 - 2.0 * e * V * V / psi**3 + 2.0 * e * g1 * V / psi**2
        b = 2.0 * e * g2 * V / psi**2
        bdot = 2.0 * e * g2 * (dV / psi**2 - 2.0 * V * dpsi / psi**3)
        return cls(t, a, b, bdot, params.damping.c, T)


@dataclass(frozen=True)
class Inequality:
    """``lhs < rhs`` (strict) or ``lhs <= rhs``; ``margin = rhs - lhs``."""

    label: str
    lhs: float
    rhs: float
    strict: bool = True

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.margin > 0 if self.strict else self.margin >= 0


@dataclass(frozen=True)
class HillVerdict:
    ok: bool
    checks: tuple


def hill_nondegenerate(h: HillCoefficients, safety=HILL_SAFETY):
    """Sufficient conditions for the Hill equation to have no nontrivial T-periodic solution.

    Pointwise conditions are evaluated on the sample grid and must hold with
    ``safety`` to spare.
    """
    q = 4.0 * h.a - (h.c + h.b) ** 2 - 2.0 * h.bdot**2
    bound = (math.pi / h.T) ** 2
    checks = (
        Inequality("pointwise 4a >= (c+b)^2 + 2b'^2", safety, float(q.min()), strict=False),
        Inequality("sup|4a - (c+b)^2 - 2b'^2| <= (pi/T)^2", float(np.abs(q).max()) + safety, bound, strict=False),
        Inequality("|c + mean(b)| > 0", 1e-12, abs(h.c + float(h.b.mean())), strict=True),
    )
    return HillVerdict(all(c.holds for c in checks), checks)


# ---------------------------------------------------------------------------
# gain gates for continuation in the delay


@dataclass(frozen=True)
class DelayCase:
    case: str  # 'a', 'b', 'c', 'd' or 'none'
    inequalities: tuple
    gate: tuple
    b_star: float
    bdot_star: float
    a_lower: float
    a_upper: float
    velocity_bound: float

    @property
    def ok(self):
        return self.case != "none"

    @property
    def gate_ok(self):
        """Either alternative of the negative-gain gate holds (vacuous for ``g2 > 0``)."""
        return not self.gate or any(g.holds for g in self.gate)


def delay_continuation_case(params: ActuatorParams, brackets: BracketSet | None = None, T=None):
    """Which sign case (if any) of the gain conditions for continuation in ``d`` holds.

    Linear damping and a nonzero velocity gain are required.  ``g1 == 0`` is
    handled with the ``g1 > 0`` formulas (both sign cases coincide there).
    """
    damping = params.damping
    if not isinstance(damping, Linear):
        raise OutsideTheorem("gain gates require linear damping")
    g1, g2, e = params.g1, params.g2, params.e
    if g2 == 0:
        raise OutsideTheorem("gain gates require a nonzero velocity gain g2")
    voltage = params.voltage
    T = voltage.period if T is None else T
    if brackets is None:
        brackets = bracket_constants(e, voltage)
    c = damping.c
    xi2, eta2 = brackets.xi2, brackets.eta2
    vmin, vmax = voltage.minimum, voltage.maximum

    lam = velocity_bound(xi2, eta2, c, e, voltage, T)
    b_star = 2.0 * g2 * (1.0 - xi2) / vmax
    bdot_star = 2.0 * e * abs(g2) / xi2**3 * (xi2 * voltage.derivative_sup + 2.0 * vmax * lam)
    lhs = 0.25 * (c + b_star) ** 2 + 0.5 * bdot_star**2
    upper = (math.pi / T) ** 2 + 0.25 * c * c
    if g1 >= 0:
        a_lower = 2.0 * g1 * (1.0 - eta2) / vmin + (3.0 * xi2 - 2.0) / xi2
        a_upper = 2.0 * g1 * (1.0 - xi2) / vmax + (3.0 * eta2 - 2.0) / eta2
    else:
        a_lower = 2.0 * g1 * (1.0 - xi2) / vmax + (3.0 * xi2 - 2.0) / xi2
        a_upper = 2.0 * g1 * (1.0 - eta2) / vmin + (3.0 * eta2 - 2.0) / eta2

    gate = ()
    if g2 > 0:
        name = "a" if g1 >= 0 else "b"
        b_lower = 2.0 * g2 * (1.0 - eta2) / vmin
        ineqs = (
            Inequality("(c+b*)^2/4 + (b'*)^2/2 <= a_*", lhs, a_lower, strict=False),
            Inequality("a^* < (pi/T)^2 + c^2/4", a_upper, upper),
            Inequality("c + b_* > 0", 0.0, c + b_lower),
        )
        gate_ok = True
    else:
        name = "c" if g1 >= 0 else "d"
        gate = (
            Inequality("c + 2 g2 (1-eta2)/V_min < 0", c + 2.0 * g2 * (1.0 - eta2) / vmin, 0.0),
            Inequality("c + 2 g2 (1-xi2)/V_max > 0", 0.0, c + 2.0 * g2 * (1.0 - xi2) / vmax),
        )
        gate_ok = any(g.holds for g in gate)
        ineqs = (
            Inequality("g2 + c V_max/(1-xi2) > 0", 0.0, g2 + c * vmax / (1.0 - xi2)),
            Inequality("(c+b*)^2/4 + (b'*)^2/2 < a_*", lhs, a_lower),
            Inequality("a^* < (pi/T)^2 + c^2/4", a_upper, upper),
        )
    case = name if gate_ok and all(i.holds for i in ineqs) else "none"
    return DelayCase(case, ineqs, gate, b_star, bdot_star, a_lower, a_upper, lam)


# ---------------------------------------------------------------------------
# squeeze-film solvability constants


@dataclass(frozen=True)
class SqueezeFlags:
    N: float
    a_hat: float
    R: float
    M: float
    Lstar: float | None
    H: float | None
    m_condition: Inequality
    n_condition: Inequality | None

    @property
    def satisfied(self):
        return self.m_condition.holds and self.n_condition is not None and self.n_condition.holds


def solve_R(target):
    """Unique ``R >= 0`` with ``R - ln(R + 1) = target``."""
    if target < 0:
        raise ValueError("target must be >= 0")
    if target == 0:
        return 0.0
    g = lambda r: r - math.log1p(r) - target  # noqa: E731
    hi = 1.0
    while g(hi) < 0:
        hi *= 2.0
    return bisect(g, 0.0, hi)


def lstar_root(M, T):
    """Root ``L*`` in ``[M, (pi/T)^2]`` of ``sin(T sqrt L) = T sqrt L (L - M)/(L + M)``."""
    top = (math.pi / T) ** 2
    if M > top:
        raise NoLstarRoot(f"M={M!r} exceeds (pi/T)^2={top!r}: empty search interval")
    if M == top:
        return M

    def F(L):
        s = T * math.sqrt(L)
        return math.sin(s) - s * (L - M) / (L + M)

    try:
        return bisect(F, M, top)
    except ValueError as exc:
        raise NoLstarRoot(str(exc)) from None


def squeeze_conditions(gamma, brackets: BracketSet, T):
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    xi2, eta2 = brackets.xi2, brackets.eta2
    N = gamma / eta2**3
    a_hat = max(N, eta2 - xi2)
    R = solve_R(a_hat * (eta2 - xi2))
    M = 3.0 * gamma * R / eta2**4 + (3.0 * eta2 - 2.0) / eta2
    top = (math.pi / T) ** 2
    m_cond = Inequality("M <= (pi/T)^2", M, top, strict=False)
    try:
        Lstar = lstar_root(M, T)
    except NoLstarRoot as exc:
        partial = SqueezeFlags(N, a_hat, R, M, None, None, m_cond, None)
        raise NoLstarRoot(str(exc), partial) from None
    s = T * math.sqrt(Lstar)
    H = (Lstar - M) / math.sqrt(Lstar) / math.tan(0.5 * s)
    n_cond = Inequality("N <= H(L*)", N, H, strict=False)
    return SqueezeFlags(N, a_hat, R, M, Lstar, H, m_cond, n_cond)


# ---------------------------------------------------------------------------
# aggregate


@dataclass
class StabilityReport:
    d0: float
    degree_sign: int
    hill_ok: bool | None = None
    delay_case: str | None = None
    squeeze_flags: SqueezeFlags | None = None
    notes: list = field(default_factory=list)


def stability_report(params: ActuatorParams, orbit=None, squeeze_slope="gap"):
    """Collect every applicable verdict for ``params`` (``orbit``: undelayed periodic orbit near x2)."""
    eq = equilibria(params.e, params.voltage.v0)
    lin = linearize_at_equilibrium(params, eq.x2, squeeze_slope)
    notes = []
    try:
        d0 = delay_bound_d0(lin)
    except SignAssumptionViolated as exc:
        d0 = math.nan
        notes.append(str(exc))
    report = StabilityReport(d0=d0, degree_sign=poincare_degree_sign(lin.A, lin.B), notes=notes)
    if isinstance(params.damping, Linear):
        if orbit is not None:
            report.hill_ok = hill_nondegenerate(HillCoefficients.from_orbit(params, orbit)).ok
        if params.g2 != 0 and params.voltage.delta > 0:
            report.delay_case = delay_continuation_case(params).case
    elif isinstance(params.damping, SqueezeFilm) and params.voltage.delta > 0:
        brackets = bracket_constants(params.e, params.voltage)
        try:
            report.squeeze_flags = squeeze_conditions(params.damping.gamma, brackets, params.period)
        except NoLstarRoot as exc:
            report.squeeze_flags = exc.partial
            notes.append(str(exc))
    return report
