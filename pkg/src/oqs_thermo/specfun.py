"""Complex digamma, trigamma and harmonic numbers.

Both functions push the argument to ``Re z >= 12`` with the upward
recurrence and then sum the Stirling-type Bernoulli series. Arguments in
the left half plane go through the reflection formulas first, so the
number of recurrence steps never exceeds a dozen.
"""

from __future__ import annotations

import numpy as np

from .errors import PoleArgument

EULER_GAMMA = 0.57721566490153286061

# B_2k for k = 1..8
_BERNOULLI = np.array(
    [1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510]
)
_SHIFT_TO = 12.0
_POLE_TOL = 1e-14


def _prepare(z):
    arr = np.asarray(z, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr).copy()
    near_int = np.abs(arr - np.round(arr.real)) < _POLE_TOL * np.maximum(1.0, np.abs(arr))
    if np.any(near_int & (np.round(arr.real) <= 0)):
        raise PoleArgument("argument is a non-positive integer")
    return arr, scalar


def _finish(out, scalar):
    return complex(out[0]) if scalar else out


def _digamma_right(z):
    """Digamma for Re z >= 0.5 (vectorised)."""
    z = z.copy()
    acc = np.zeros_like(z)
    need = z.real < _SHIFT_TO
    while np.any(need):
        acc[need] -= 1.0 / z[need]
        z[need] += 1.0
        need = z.real < _SHIFT_TO
    inv2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    power = inv2.copy()
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2 * k) * power
        power = power * inv2
    return acc + np.log(z) - 0.5 / z - series


def _trigamma_right(z):
    z = z.copy()
    acc = np.zeros_like(z)
    need = z.real < _SHIFT_TO
    while np.any(need):
        acc[need] += 1.0 / (z[need] * z[need])
        z[need] += 1.0
        need = z.real < _SHIFT_TO
    inv = 1.0 / z
    inv2 = inv * inv
    series = np.zeros_like(z)
    power = inv2 * inv
    for b in _BERNOULLI:
        series += b * power
        power = power * inv2
    return acc + inv + 0.5 * inv2 + series


def digamma(z):
    """psi(z) for complex ``z``; accepts scalars or arrays."""
    arr, scalar = _prepare(z)
    out = np.empty_like(arr)
    left = arr.real < 0.5
    right = ~left
    if np.any(right):
        out[right] = _digamma_right(arr[right])
    if np.any(left):
        zl = arr[left]
        # psi(z) = psi(1 - z) - pi cot(pi z)
        out[left] = _digamma_right(1.0 - zl) - np.pi / np.tan(np.pi * zl)
    return _finish(out, scalar)


def trigamma(z):
    """psi'(z) for complex ``z``; accepts scalars or arrays."""
    arr, scalar = _prepare(z)
    out = np.empty_like(arr)
    left = arr.real < 0.5
    right = ~left
    if np.any(right):
        out[right] = _trigamma_right(arr[right])
    if np.any(left):
        zl = arr[left]
        cot = 1.0 / np.tan(np.pi * zl)
        # psi'(z) = pi^2 / sin^2(pi z) - psi'(1 - z), written with cot to avoid overflow
        out[left] = np.pi**2 * (1.0 + cot * cot) - _trigamma_right(1.0 - zl)
    return _finish(out, scalar)


def complex_harmonic(z):
    """Harmonic number H(z) = psi(z + 1) + Euler's constant."""
    arr = np.asarray(z, dtype=complex)
    out = digamma(arr + 1.0)
    return out + EULER_GAMMA


def x_coth_x(x):
    """x*coth(x) with the removable singularity at 0 filled in (real input)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    small = ax < 1e-4
    safe = np.where(small, 1.0, ax)
    big = ax > 20.0
    with np.errstate(over="ignore"):
        val = np.where(big, ax, safe / np.tanh(safe))
    x2 = np.where(small, x, 0.0) ** 2
    return np.where(small, 1.0 + x2 / 3.0 - x2 * x2 / 45.0, val)


def x_csch_x_sq(x):
    """(x / sinh x)^2 without overflow; equals 1 at x = 0."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < 1e-4
    safe = np.where(small, 1.0, x)
    e = np.exp(-2.0 * safe)
    val = 4.0 * safe * safe * e / (1.0 - e) ** 2
    x2 = np.where(small, x, 0.0) ** 2
    return np.where(small, 1.0 - x2 / 3.0, val)
