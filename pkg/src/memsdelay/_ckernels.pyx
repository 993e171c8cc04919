# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step RK4 kernel for the delayed actuator.

Operation-for-operation mirror of ``_pykernels.actuator_rk4``; see that module
for the grid conventions and status codes.
"""

from libc.math cimport cos, sin, isfinite

import numpy as np


cdef double _volt(double t, double v0, double delta, double omega,
                  const double[::1] ks, const double[::1] cs, const double[::1] ss,
                  Py_ssize_t nh) noexcept nogil:
    cdef double ac = 0.0
    cdef double arg
    cdef Py_ssize_t j
    for j in range(nh):
        arg = ks[j] * omega * t
        ac += cs[j] * cos(arg) + ss[j] * sin(arg)
    return v0 + delta * ac


cdef inline double _acc(double t, double x, double v, double xd, double vd,
                        double e, int kind, double coef, double g1, double g2,
                        double v0, double delta, double omega,
                        const double[::1] ks, const double[::1] cs, const double[::1] ss,
                        Py_ssize_t nh) noexcept nogil:
    cdef double w = _volt(t, v0, delta, omega, ks, cs, ss, nh) + g1 * (x - xd) + g2 * (v - vd)
    cdef double damp
    if kind == 0:
        damp = coef * v
    else:
        damp = coef * v / (x * x * x)
    return 1.0 - e * w * w / (x * x) - x - damp


def actuator_rk4(double e, int kind, double coef, double g1, double g2,
                 double v0, double delta, double omega, ks_in, cs_in, ss_in,
                 double h, Py_ssize_t k, hist_grid_in, hist_mid_in,
                 double[:, ::1] Y, double[:, ::1] F, Py_ssize_t n):
    cdef const double[::1] ks = np.ascontiguousarray(ks_in, dtype=np.float64)
    cdef const double[::1] cs = np.ascontiguousarray(cs_in, dtype=np.float64)
    cdef const double[::1] ss = np.ascontiguousarray(ss_in, dtype=np.float64)
    cdef const double[:, ::1] hg = np.ascontiguousarray(hist_grid_in, dtype=np.float64)
    cdef const double[:, ::1] hm = np.ascontiguousarray(hist_mid_in, dtype=np.float64)
    cdef Py_ssize_t nh = ks.shape[0]
    cdef Py_ssize_t i, m
    cdef int status = 0
    cdef Py_ssize_t done = 0
    cdef double t, tm, t1, x, v, xd, vd, xdm, vdm, xde, vde
    cdef double k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v
    cdef double x2, v2, x3, v3, x4, v4, xn, vn

    with nogil:
        x = Y[0, 0]
        v = Y[0, 1]
        if k > 0:
            xd = hg[0, 0]
            vd = hg[0, 1]
        else:
            xd = x
            vd = v
        F[0, 0] = v
        F[0, 1] = _acc(0.0, x, v, xd, vd, e, kind, coef, g1, g2, v0, delta, omega, ks, cs, ss, nh)
        for i in range(n):
            t = i * h
            x = Y[i, 0]
            v = Y[i, 1]
            k1x = F[i, 0]
            k1v = F[i, 1]
            tm = t + 0.5 * h
            x2 = x + 0.5 * h * k1x
            v2 = v + 0.5 * h * k1v
            if not x2 > 0.0:
                status = 1
                break
            if k > 0:
                m = i - k
                if m < 0:
                    xdm = hm[i, 0]
                    vdm = hm[i, 1]
                else:
                    xdm = 0.5 * (Y[m, 0] + Y[m + 1, 0]) + 0.125 * h * (F[m, 0] - F[m + 1, 0])
                    vdm = 0.5 * (Y[m, 1] + Y[m + 1, 1]) + 0.125 * h * (F[m, 1] - F[m + 1, 1])
            else:
                xdm = x2
                vdm = v2
            k2x = v2
            k2v = _acc(tm, x2, v2, xdm, vdm, e, kind, coef, g1, g2, v0, delta, omega, ks, cs, ss, nh)
            x3 = x + 0.5 * h * k2x
            v3 = v + 0.5 * h * k2v
            if not x3 > 0.0:
                status = 1
                break
            if k == 0:
                xdm = x3
                vdm = v3
            k3x = v3
            k3v = _acc(tm, x3, v3, xdm, vdm, e, kind, coef, g1, g2, v0, delta, omega, ks, cs, ss, nh)
            x4 = x + h * k3x
            v4 = v + h * k3v
            if not x4 > 0.0:
                status = 1
                break
            t1 = (i + 1) * h
            if k > 0:
                m = i + 1 - k
                if m < 0:
                    xde = hg[i + 1, 0]
                    vde = hg[i + 1, 1]
                else:
                    xde = Y[m, 0]
                    vde = Y[m, 1]
            else:
                xde = x4
                vde = v4
            k4x = v4
            k4v = _acc(t1, x4, v4, xde, vde, e, kind, coef, g1, g2, v0, delta, omega, ks, cs, ss, nh)
            xn = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if not (isfinite(xn) and isfinite(vn)):
                status = 2
                break
            if not xn > 0.0:
                status = 1
                break
            Y[i + 1, 0] = xn
            Y[i + 1, 1] = vn
            if k > 0:
                m = i + 1 - k
                if m < 0:
                    xde = hg[i + 1, 0]
                    vde = hg[i + 1, 1]
                else:
                    xde = Y[m, 0]
                    vde = Y[m, 1]
            else:
                xde = xn
                vde = vn
            F[i + 1, 0] = vn
            F[i + 1, 1] = _acc(t1, xn, vn, xde, vde, e, kind, coef, g1, g2, v0, delta, omega, ks, cs, ss, nh)
            done = i + 1
    return done, status
