"""Pure-Python fixed-step RK4 kernel for the delayed actuator.

Mirrors ``_ckernels.pyx`` operation for operation so that both backends give
bitwise-identical results (the extension is compiled without FMA contraction).

Grid conventions shared with the compiled kernel: ``t_i = i * h``; the delay is
``k * h``; ``hist_grid[j]`` holds the history at ``-d + j h`` (``j = 0..k``) and
``hist_mid[j]`` the history at ``-d + (j + 1/2) h``.  ``k == 0`` means the
delayed state equals the current one.  Status codes: 0 ok, 1 gap reached
``x <= 0``, 2 non-finite state.
"""

from math import cos, isfinite, sin

OK, PULL_IN, NON_FINITE = 0, 1, 2


def actuator_rk4(e, kind, coef, g1, g2, v0, delta, omega, ks, cs, ss, h, k,
                 hist_grid, hist_mid, Y, F, n):
    nh = len(ks)
    ks = [float(q) for q in ks]
    cs = [float(q) for q in cs]
    ss = [float(q) for q in ss]
    hgx = [float(q) for q in hist_grid[:, 0]] if k > 0 else []
    hgv = [float(q) for q in hist_grid[:, 1]] if k > 0 else []
    hmx = [float(q) for q in hist_mid[:, 0]] if k > 0 else []
    hmv = [float(q) for q in hist_mid[:, 1]] if k > 0 else []

    def volt(t):
        ac = 0.0
        for j in range(nh):
            arg = ks[j] * omega * t
            ac += cs[j] * cos(arg) + ss[j] * sin(arg)
        return v0 + delta * ac

    def acc(t, x, v, xd, vd):
        w = volt(t) + g1 * (x - xd) + g2 * (v - vd)
        if kind == 0:
            damp = coef * v
        else:
            damp = coef * v / (x * x * x)
        return 1.0 - e * w * w / (x * x) - x - damp

    xs = [float(Y[0, 0])]
    vs = [float(Y[0, 1])]
    fx = []
    fv = []

    def grid_delayed(i):
        m = i - k
        if m < 0:
            return hgx[i], hgv[i]
        return xs[m], vs[m]

    def mid_delayed(i):
        m = i - k
        if m < 0:
            return hmx[i], hmv[i]
        xm = 0.5 * (xs[m] + xs[m + 1]) + 0.125 * h * (fx[m] - fx[m + 1])
        vm = 0.5 * (vs[m] + vs[m + 1]) + 0.125 * h * (fv[m] - fv[m + 1])
        return xm, vm

    status = OK
    done = 0
    x = xs[0]
    v = vs[0]
    if k > 0:
        xd, vd = grid_delayed(0)
    else:
        xd, vd = x, v
    fx.append(v)
    fv.append(acc(0.0, x, v, xd, vd))
    for i in range(n):
        t = i * h
        x = xs[i]
        v = vs[i]
        k1x = fx[i]
        k1v = fv[i]
        tm = t + 0.5 * h
        x2 = x + 0.5 * h * k1x
        v2 = v + 0.5 * h * k1v
        if not x2 > 0.0:
            status = PULL_IN
            break
        if k > 0:
            xdm, vdm = mid_delayed(i)
        else:
            xdm, vdm = x2, v2
        k2x = v2
        k2v = acc(tm, x2, v2, xdm, vdm)
        x3 = x + 0.5 * h * k2x
        v3 = v + 0.5 * h * k2v
        if not x3 > 0.0:
            status = PULL_IN
            break
        if k == 0:
            xdm, vdm = x3, v3
        k3x = v3
        k3v = acc(tm, x3, v3, xdm, vdm)
        x4 = x + h * k3x
        v4 = v + h * k3v
        if not x4 > 0.0:
            status = PULL_IN
            break
        t1 = (i + 1) * h
        if k > 0:
            xde, vde = grid_delayed(i + 1)
        else:
            xde, vde = x4, v4
        k4x = v4
        k4v = acc(t1, x4, v4, xde, vde)
        xn = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (isfinite(xn) and isfinite(vn)):
            status = NON_FINITE
            break
        if not xn > 0.0:
            status = PULL_IN
            break
        xs.append(xn)
        vs.append(vn)
        if k > 0:
            xde, vde = grid_delayed(i + 1)
        else:
            xde, vde = xn, vn
        fx.append(vn)
        fv.append(acc(t1, xn, vn, xde, vde))
        done = i + 1

    for i in range(done + 1):
        Y[i, 0] = xs[i]
        Y[i, 1] = vs[i]
        F[i, 0] = fx[i]
        F[i, 1] = fv[i]
    return done, status
