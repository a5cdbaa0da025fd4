# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch integrator for the delayed Langevin equations.

Mirrors ``_fallback.integrate_batch`` step for step; see that module for
the meaning of each argument.
"""

import numpy as np

from libc.math cimport floor, fabs, ceil

cdef double GUARD = 1e150


cdef inline double _hermite(double x0, double v0, double x1, double v1, double th, double dt) noexcept nogil:
    cdef double th2 = th * th
    cdef double th3 = th2 * th
    return ((2.0 * th3 - 3.0 * th2 + 1.0) * x0 + (th3 - 2.0 * th2 + th) * dt * v0
            + (-2.0 * th3 + 3.0 * th2) * x1 + (th3 - th2) * dt * v1)


cdef inline void _delayed(double[:, ::1] hx, double[:, ::1] hv, long H, long[::1] pj,
                          double[::1] delay, double s0, double dt, double[::1] out) noexcept nogil:
    cdef Py_ssize_t p
    cdef double s, q, th
    cdef long kk, a, b
    for p in range(delay.shape[0]):
        s = s0 - delay[p]
        if s < 0.0:
            out[p] = 0.0
            continue
        q = s / dt
        kk = <long>floor(q)
        th = q - kk
        a = kk % H
        b = (kk + 1) % H
        out[p] = _hermite(hx[a, pj[p]], hv[a, pj[p]], hx[b, pj[p]], hv[b, pj[p]], th, dt)


cdef inline void _accel(double[::1] x, double[::1] v, double[:, ::1] f, long row,
                        double[:, ::1] omega2, double damping, long[::1] pi,
                        double[::1] coef, double[::1] dl, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j, p
    cdef Py_ssize_t n = x.shape[0]
    cdef double acc
    for i in range(n):
        acc = f[row, i] - damping * v[i]
        for j in range(n):
            acc -= omega2[i, j] * x[j]
        out[i] = acc
    for p in range(coef.shape[0]):
        out[pi[p]] += coef[p] * dl[p]


def integrate_batch(double[:, ::1] x0, double[:, ::1] v0, double[:, :, ::1] force,
                    double[:, ::1] omega2, double damping,
                    long[::1] pair_i, long[::1] pair_j, double[::1] coef, double[::1] delay,
                    double dt, long steps, long stride):
    cdef Py_ssize_t R = x0.shape[0]
    cdef Py_ssize_t n = x0.shape[1]
    cdef Py_ssize_t P = coef.shape[0]
    cdef long nrec = steps // stride + 1
    cdef double dmax = 0.0
    cdef Py_ssize_t p, r, i
    for p in range(P):
        if delay[p] > dmax:
            dmax = delay[p]
    cdef long H = <long>ceil(dmax / dt) + 3

    xs_np = np.zeros((R, nrec, n))
    vs_np = np.zeros((R, nrec, n))
    status_np = np.zeros(R, dtype=np.int32)
    cdef double[:, :, ::1] xs = xs_np
    cdef double[:, :, ::1] vs = vs_np
    cdef int[::1] status = status_np

    cdef double[:, ::1] hx = np.zeros((H, n))
    cdef double[:, ::1] hv = np.zeros((H, n))
    cdef double[::1] x = np.zeros(n)
    cdef double[::1] v = np.zeros(n)
    cdef double[::1] xt = np.zeros(n)
    cdef double[::1] vt = np.zeros(n)
    cdef double[:, ::1] kx = np.zeros((4, n))
    cdef double[:, ::1] kv = np.zeros((4, n))
    cdef double[::1] d0 = np.zeros(max(P, 1))
    cdef double[::1] dh = np.zeros(max(P, 1))
    cdef double[::1] d1 = np.zeros(max(P, 1))
    cdef double[:, ::1] f
    cdef long k, slot
    cdef double half = 0.5 * dt
    cdef double t

    for r in range(R):
        f = force[r]
        with nogil:
            for i in range(n):
                x[i] = x0[r, i]
                v[i] = v0[r, i]
                hx[0, i] = x[i]
                hv[0, i] = v[i]
                xs[r, 0, i] = x[i]
                vs[r, 0, i] = v[i]
            for k in range(steps):
                t = k * dt
                if P > 0:
                    _delayed(hx, hv, H, pair_j, delay, t, dt, d0)
                    _delayed(hx, hv, H, pair_j, delay, t + half, dt, dh)
                    _delayed(hx, hv, H, pair_j, delay, t + dt, dt, d1)
                _accel(x, v, f, 2 * k, omega2, damping, pair_i, coef, d0, kv[0])
                for i in range(n):
                    kx[0, i] = v[i]
                    xt[i] = x[i] + half * kx[0, i]
                    vt[i] = v[i] + half * kv[0, i]
                _accel(xt, vt, f, 2 * k + 1, omega2, damping, pair_i, coef, dh, kv[1])
                for i in range(n):
                    kx[1, i] = vt[i]
                    xt[i] = x[i] + half * kx[1, i]
                    vt[i] = v[i] + half * kv[1, i]
                _accel(xt, vt, f, 2 * k + 1, omega2, damping, pair_i, coef, dh, kv[2])
                for i in range(n):
                    kx[2, i] = vt[i]
                    xt[i] = x[i] + dt * kx[2, i]
                    vt[i] = v[i] + dt * kv[2, i]
                _accel(xt, vt, f, 2 * k + 2, omega2, damping, pair_i, coef, d1, kv[3])
                slot = (k + 1) % H
                for i in range(n):
                    kx[3, i] = vt[i]
                    x[i] = x[i] + dt / 6.0 * (kx[0, i] + 2.0 * kx[1, i] + 2.0 * kx[2, i] + kx[3, i])
                    v[i] = v[i] + dt / 6.0 * (kv[0, i] + 2.0 * kv[1, i] + 2.0 * kv[2, i] + kv[3, i])
                    hx[slot, i] = x[i]
                    hv[slot, i] = v[i]
                    if not (fabs(x[i]) < GUARD):
                        status[r] = 1
                if status[r] != 0:
                    break
                if (k + 1) % stride == 0:
                    for i in range(n):
                        xs[r, (k + 1) // stride, i] = x[i]
                        vs[r, (k + 1) // stride, i] = v[i]
    return xs_np, vs_np, status_np
