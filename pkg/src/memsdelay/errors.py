"""Exception hierarchy shared by all modules."""


class ActuatorError(Exception):
    """Base class for library errors."""


class InvalidParameter(ActuatorError, ValueError):
    """A parameter violates its documented domain."""


class InvalidVoltageProfile(InvalidParameter):
    """Voltage waveform is malformed or not strictly positive."""


class NonPositiveGap(ActuatorError, ValueError):
    """The gap coordinate reached x <= 0 (electrode collapse)."""

    def __init__(self, x, t=None):
        self.x = x
        self.t = t
        where = "" if t is None else f" at t={t!r}"
        super().__init__(f"non-positive gap x={x!r}{where}")


# statics


class PullInExceeded(ActuatorError):
    """DC voltage at or above the pull-in threshold: no equilibria exist."""


class VoltageRangeInvalid(ActuatorError):
    """Voltage extrema violate 0 < V_min^2 < V_max^2 <= 4/(27 e)."""


class NotAnEquilibrium(ActuatorError):
    """Supplied gap does not solve the equilibrium cubic."""


# stability


class SignAssumptionViolated(ActuatorError):
    """The Lyapunov certificate needs a < 0 and b < 0."""


class NotHurwitz(ActuatorError):
    """A + B has an eigenvalue with non-negative real part."""


class SingularMatrix(ActuatorError):
    """det(A + B) vanishes, so the degree sign is undefined."""


class OutsideTheorem(ActuatorError):
    """The requested check does not apply to this configuration."""


class NoLstarRoot(ActuatorError):
    """The L* equation has no sign change on [M, (pi/T)^2]."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# integration


class IntegratorError(ActuatorError):
    """Time integration produced non-finite values or was misconfigured."""


class HistoryTooShort(IntegratorError):
    """Initial history (or a dense segment) does not cover the requested time."""


class PullInCollapse(ActuatorError):
    """Trajectory crossed x = 0; crossing time lies in [t_lo, t_hi]."""

    def __init__(self, t_lo, t_hi, trajectory=None):
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.trajectory = trajectory
        super().__init__(f"pull-in collapse for t in [{t_lo!r}, {t_hi!r}]")


# orbits


class NoConvergence(ActuatorError):
    """Newton iteration for a periodic orbit failed."""


class NegativeGapOrbit(ActuatorError):
    """Reconstructed orbit leaves the domain x > 0."""


class NotConverged(ActuatorError):
    """Floquet multipliers changed too much between resolutions m and 2m."""
