"""Pure-numpy batch integrator, used when the compiled core is unavailable.

The system is ``x'' = f(t) - Omega^2 x - damping x' + sum_p coef_p x_{j_p}(t - delay_p)``
with the delayed term zero for negative arguments. Integration is classical
RK4 with the force sampled on the half-step grid; delayed positions come
from cubic Hermite interpolation of a ring buffer of past (x, v) states.
All trajectories in the batch are advanced together.
"""

from __future__ import annotations

import math

import numpy as np

GUARD = 1e150


def _hermite(x0, v0, x1, v1, th, dt):
    th2 = th * th
    th3 = th2 * th
    return (
        (2.0 * th3 - 3.0 * th2 + 1.0) * x0
        + (th3 - 2.0 * th2 + th) * dt * v0
        + (-2.0 * th3 + 3.0 * th2) * x1
        + (th3 - th2) * dt * v1
    )


def integrate_batch(x0, v0, force, omega2, damping, pair_i, pair_j, coef, delay, dt, steps, stride):
    """Advance ``R`` trajectories; returns recorded ``(xs, vs, status)``.

    ``force`` has shape ``(R, 2 * steps + 1, n)`` (half-step samples).
    Records are taken every ``stride`` steps, starting at step 0.
    ``status[r]`` is 1 if trajectory ``r`` crossed the overflow guard.
    """
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    R, n = x.shape
    P = len(coef)
    nrec = steps // stride + 1
    xs = np.zeros((R, nrec, n))
    vs = np.zeros((R, nrec, n))
    status = np.zeros(R, dtype=np.int32)
    alive = np.ones(R, dtype=bool)
    H = int(math.ceil(max(delay, default=0.0) / dt)) + 3
    hx = np.zeros((H, R, n))
    hv = np.zeros((H, R, n))
    hx[0], hv[0] = x, v
    xs[:, 0], vs[:, 0] = x, v
    pair_i = np.asarray(pair_i, dtype=np.intp)
    pair_j = np.asarray(pair_j, dtype=np.intp)
    delay = np.asarray(delay, dtype=float)
    # scatter matrix taking per-pair delayed values to per-oscillator forces
    scatter = np.zeros((P, n))
    scatter[np.arange(P), pair_i] = coef
    om_t = np.ascontiguousarray(np.asarray(omega2, dtype=float).T)
    half = 0.5 * dt

    def delayed(s0):
        s = s0 - delay
        q = s / dt
        kk = np.floor(q).astype(np.intp)
        th = q - kk
        a = kk % H
        b = (kk + 1) % H
        val = _hermite(hx[a, :, pair_j], hv[a, :, pair_j], hx[b, :, pair_j], hv[b, :, pair_j], th[:, None], dt)
        val[s < 0.0] = 0.0
        return val.T @ scatter

    def accel(xc, vc, row, dl):
        out = force[:, row, :] - damping * vc - xc @ om_t
        if P:
            out = out + dl
        return out

    for k in range(steps):
        t = k * dt
        if P:
            d0, dh, d1 = delayed(t), delayed(t + half), delayed(t + dt)
        else:
            d0 = dh = d1 = None
        k1x, k1v = v, accel(x, v, 2 * k, d0)
        x2, v2 = x + half * k1x, v + half * k1v
        k2x, k2v = v2, accel(x2, v2, 2 * k + 1, dh)
        x3, v3 = x + half * k2x, v + half * k2v
        k3x, k3v = v3, accel(x3, v3, 2 * k + 1, dh)
        x4, v4 = x + dt * k3x, v + dt * k3v
        k4x, k4v = v4, accel(x4, v4, 2 * k + 2, d1)
        x_new = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        v_new = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        blown = alive & ~np.all(np.abs(x_new) < GUARD, axis=1)
        if np.any(blown):
            status[blown] = 1
            alive &= ~blown
        # a trajectory that blew up stops being advanced and recorded, as in the compiled loop
        x = np.where(alive[:, None], x_new, x)
        v = np.where(alive[:, None], v_new, v)
        slot = (k + 1) % H
        hx[slot], hv[slot] = x, v
        if (k + 1) % stride == 0:
            xs[alive, (k + 1) // stride] = x[alive]
            vs[alive, (k + 1) // stride] = v[alive]
    return xs, vs, status
