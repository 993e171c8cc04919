import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from memsdelay.ddesolve import (
    HistorySegment,
    aligned_step,
    default_step,
    integrate,
    mutual_distance,
    settle_metric,
    solve_dde,
    window_metrics,
)
from memsdelay.errors import HistoryTooShort, PullInCollapse
from memsdelay.model import SqueezeFilm, acceleration

from .reference import DELTA, T, table2_params


def exact_unit_delay(t):
    """Hand-integrated solution of x' = -x(t - 1) with history 1 on [0, 2]."""
    t = np.asarray(t)
    return np.where(t <= 1, 1 - t, t * t / 2 - 2 * t + 1.5)


def test_scalar_delay_oracle():
    seg = solve_dde(lambda t, y, yd: -yd, [1.0], lambda s: [1.0], 1.0, 2.0, 1 / 16)
    ts = np.linspace(0, 2, 41)
    got = seg.sample(ts)[:, 0]
    np.testing.assert_allclose(got, exact_unit_delay(ts), atol=1e-10)


def test_scalar_delay_with_short_delay_overlap():
    # d smaller than one step: delayed stages fall inside the current step
    d = 1e-3
    seg = solve_dde(lambda t, y, yd: -yd, [1.0], lambda s: [1.0], d, 1.0, 0.01)
    ode = math.exp(-1.0)
    assert seg(1.0)[0] == pytest.approx(ode, rel=2e-3)


def test_history_segment_bounds():
    seg = HistorySegment(np.array([0.0, 1.0]), np.array([[0.0], [1.0]]), np.array([[1.0], [1.0]]))
    assert seg(0.5)[0] == pytest.approx(0.5)
    with pytest.raises(HistoryTooShort):
        seg(1.5)
    with pytest.raises(ValueError):
        HistorySegment(np.array([0.0, 0.0]), np.zeros((2, 1)), np.zeros((2, 1)))


def test_aligned_step():
    h, k = aligned_step(1.0, 0.3)
    assert k == 8 and h == 1 / 8
    h, k = aligned_step(10.0, 0.3)
    assert k == 34 and h * k == pytest.approx(10.0)


def test_equilibrium_is_preserved(eq2):
    for d in (0.0, 0.5, 3.0):
        tr = integrate(table2_params(d=d), (eq2.x2, 0.0), 20.0, 0.05)
        assert np.max(np.abs(tr.x - eq2.x2)) <= 1e-12
        assert np.max(np.abs(tr.v)) <= 1e-12


def test_order_four_self_convergence(eq2):
    p = table2_params(delta=DELTA, g1=0.0, g2=0.0)
    ends = [np.array(integrate(p, (eq2.x2 + 0.01, 0.0), 20 * T, T / n).final) for n in (64, 128, 256)]
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert 16 * 0.8 <= ratio <= 16 * 1.2


def test_order_four_with_delay(eq2):
    p = table2_params(delta=DELTA, d=1.0, g1=0.0, g2=-8.0)
    # t_end on every grid so all runs stop at the same time
    ends = [np.array(integrate(p, (eq2.x2 + 0.01, 0.0), 60.0, 1 / n).final) for n in (8, 16, 32)]
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert 16 * 0.8 <= ratio <= 16 * 1.2


def test_zero_delay_matches_generic_ode_path(eq2):
    p = table2_params(delta=DELTA)
    tr = integrate(p, (eq2.x2 + 0.01, 0.0), 10 * T, T / 64)

    def f(t, y, yd):
        return np.array([y[1], acceleration(p, t, y[0], y[1], y[0], y[1])])

    seg = solve_dde(f, [eq2.x2 + 0.01, 0.0], None, 0.0, 10 * T, T / 64)
    np.testing.assert_allclose(tr.y, seg.y[: len(tr.t)], atol=1e-12, rtol=0)


@given(d1=st.floats(0.1, 5.0), d2=st.floats(0.1, 5.0))
def test_feedback_off_makes_delay_irrelevant(d1, d2):
    a = integrate(table2_params(delta=DELTA, d=d1, g1=0.0, g2=0.0), (0.99, 0.01), 5.0, 0.05)
    b = integrate(table2_params(delta=DELTA, d=d2, g1=0.0, g2=0.0), (0.99, 0.01), 5.0, 0.05)
    assert np.array_equal(a.t, b.t)
    np.testing.assert_allclose(a.y, b.y, atol=1e-12, rtol=0)


def test_determinism(eq2):
    p = table2_params(delta=DELTA, d=1.0, g2=-8.0)
    a = integrate(p, (eq2.x2 + 0.01, 0.0), 50.0)
    b = integrate(p, (eq2.x2 + 0.01, 0.0), 50.0)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.t, b.t)


def test_callable_and_segment_histories(eq2):
    p = table2_params(d=2.0, g2=0.37)
    first = integrate(p, lambda s: (eq2.x2 + 0.01 * math.cos(s), 0.0), 4.0, 0.05)
    assert first.x[0] == pytest.approx(eq2.x2 + 0.01)
    shifted = HistorySegment(first.dense.t - first.dense.t[-1], first.dense.y, first.dense.f)
    second = integrate(p, shifted, 1.0, 0.05)
    assert second.x[0] == pytest.approx(first.x[-1])
    with pytest.raises(HistoryTooShort):
        integrate(p.with_(d=10.0), shifted, 1.0, 0.05)


def test_displacement_coordinates(eq2):
    p = table2_params()
    a = integrate(p, (1 - (eq2.x2 + 0.01), -0.02), 5.0, 0.05, coords="displacement")
    b = integrate(p, (eq2.x2 + 0.01, 0.02), 5.0, 0.05)
    assert np.array_equal(a.y, b.y)


def test_pull_in_event_is_bracketed():
    p = table2_params(delta=DELTA, d=1.0, g1=0.0, g2=-8.0)
    tr = integrate(p, (0.0625, 0.0092), 50.0, 1 / 32)
    ev = tr.pullin
    assert ev is not None
    assert ev.t_hi - ev.t_lo <= 1e-10
    assert tr.t[-1] <= ev.t_lo <= tr.t[-1] + 1 / 32
    assert np.all(tr.x > 0)
    with pytest.raises(PullInCollapse) as info:
        integrate(p, (0.0625, 0.0092), 50.0, 1 / 32, raise_on_pullin=True)
    assert info.value.t_lo == ev.t_lo


def test_pull_in_time_converges_with_step():
    p = table2_params(g1=0.0, g2=0.0)
    # the 1/x^2 singularity limits accuracy near collapse, so only ask for steady refinement
    ts = [integrate(p, (0.06, -0.01), 5.0, h).pullin.t for h in (0.005, 0.0025, 0.00125)]
    assert abs(ts[1] - ts[2]) < abs(ts[0] - ts[1])
    assert ts[1] == pytest.approx(ts[2], abs=5e-5)


def test_default_step():
    assert default_step(table2_params()) == pytest.approx(T / 64)
    assert default_step(table2_params(d=1.0)) == pytest.approx(1 / 64)


def test_settle_metric_constant_trajectory(eq2):
    tr = integrate(table2_params(), (eq2.x2, 0.0), 10.0, 0.1)
    assert settle_metric(tr, (eq2.x2, 0.0), 5.0) <= 1e-12
    with pytest.raises(ValueError):
        settle_metric(tr, (eq2.x2, 0.0), 50.0)


def test_settle_metric_decreases_below_delay_bound(eq2):
    tr = integrate(table2_params(d=1.0), (eq2.x2 + 0.01, 0.0), 20 * T)
    w = window_metrics(tr, (eq2.x2, 0.0), 10 * T)
    assert len(w) == 2 and w[1] < w[0]
    sup = [settle_metric(integrate(table2_params(d=1.0), (eq2.x2 + 0.01, 0.0), k * 10 * T), (eq2.x2, 0.0), 10 * T)
           for k in (1, 2, 3)]
    assert sup[0] > sup[1] > sup[2]


def test_settle_metric_grows_at_saddle(eq2):
    tr = integrate(table2_params(), (eq2.x1 + 1e-4, 0.0), 3.0, 0.01)
    w = window_metrics(tr, (eq2.x1, 0.0), 1.0)
    assert np.all(np.diff(w) > 0)


def test_mutual_distance_requires_common_grid(eq2):
    a = integrate(table2_params(), (eq2.x2, 0.0), 5.0, 0.1)
    b = integrate(table2_params(), (eq2.x2, 0.0), 5.0, 0.05)
    with pytest.raises(ValueError):
        mutual_distance(a, b, 1.0)
    assert mutual_distance(a, a, 1.0) == 0.0


def test_squeeze_damping_decays(eq2):
    p = table2_params(damping=SqueezeFilm(3e-4))
    tr = integrate(p, (eq2.x2 + 0.01, 0.0), 40 * T)
    w = window_metrics(tr, (eq2.x2, 0.0), 10 * T)
    assert np.all(np.diff(w) < 0)
