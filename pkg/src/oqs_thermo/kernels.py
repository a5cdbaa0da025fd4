"""Thermal Green's functions of a free massless scalar field in 3+1 dimensions.

Conventions: natural units, and ``f(omega) = int dtau exp(+i omega tau) f(tau)``.
All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LightConeSingularity
from .specfun import x_coth_x

FOUR_PI = 4.0 * math.pi
LIGHT_CONE_WIDTH = 1e-9


@dataclass(frozen=True)
class BathState:
    """Thermal state of the field; ``beta = inf`` means zero temperature."""

    beta: float

    def __post_init__(self):
        b = float(self.beta)
        if not b > 0.0:
            raise ConfigError(f"beta must be positive, got {self.beta!r}")
        object.__setattr__(self, "beta", b)

    @classmethod
    def from_temperature(cls, temperature: float) -> "BathState":
        if temperature < 0:
            raise ConfigError("temperature must be non-negative")
        return cls(math.inf if temperature == 0 else 1.0 / temperature)

    @classmethod
    def zero_temperature(cls) -> "BathState":
        return cls(math.inf)

    @property
    def is_zero_temperature(self) -> bool:
        return math.isinf(self.beta)

    @property
    def temperature(self) -> float:
        return 0.0 if self.is_zero_temperature else 1.0 / self.beta


def thermal_weight(omega, bath: BathState):
    """omega * coth(beta*omega/2), even in omega and finite at omega = 0."""
    omega = np.asarray(omega, dtype=float)
    if bath.is_zero_temperature:
        return np.abs(omega)
    return (2.0 / bath.beta) * x_coth_x(0.5 * bath.beta * omega)


def coth_half(omega, bath: BathState):
    """coth(beta*omega/2); the zero-temperature limit is sign(omega)."""
    omega = np.asarray(omega, dtype=float)
    if bath.is_zero_temperature:
        return np.sign(omega)
    with np.errstate(divide="ignore"):
        return 1.0 / np.tanh(0.5 * bath.beta * omega)


def _sinc_r(omega, r):
    """sin(omega r) / (omega r), equal to 1 at r = 0."""
    return np.sinc(np.asarray(omega, dtype=float) * np.asarray(r, dtype=float) / math.pi)


def g_ret_freq(omega, r):
    """Retarded function in frequency space.

    For ``r > 0`` this is ``exp(i omega r) / (4 pi r)``. At ``r = 0`` only the
    cutoff-free part ``i omega / (4 pi)`` is kept; the divergent real piece
    lives in the renormalised oscillator frequency.
    """
    omega = np.asarray(omega, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ConfigError("separation must be non-negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        far = np.exp(1j * omega * r) / (FOUR_PI * r)
    out = np.where(r > 0, far, 1j * omega / FOUR_PI)
    return out[()] if out.ndim == 0 else out


def im_g_ret_freq(omega, r):
    """Imaginary part of :func:`g_ret_freq`: ``omega * sinc(omega r) / (4 pi)``."""
    out = np.asarray(omega, dtype=float) * _sinc_r(omega, r) / FOUR_PI
    return out[()] if np.ndim(out) == 0 else out


def g_had_freq(omega, r, bath: BathState):
    """Hadamard function from the free-field FDR, with the omega -> 0 limit built in."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ConfigError("separation must be non-negative")
    out = thermal_weight(omega, bath) * _sinc_r(omega, r) / FOUR_PI
    return out[()] if np.ndim(out) == 0 else out


def _coth_scaled(u, beta):
    return 1.0 / np.tanh(math.pi * u / beta)


def g_had_time(tau, r, bath: BathState, exclusion: float = LIGHT_CONE_WIDTH):
    """Hadamard function in the time domain.

    Raises :class:`LightConeSingularity` within ``exclusion`` of ``|tau| = r``.
    """
    tau = np.asarray(tau, dtype=float)
    r = np.asarray(r, dtype=float)
    tau, r = np.broadcast_arrays(tau, r)
    if np.any(r < 0):
        raise ConfigError("separation must be non-negative")
    if np.any(np.abs(np.abs(tau) - r) < exclusion):
        raise LightConeSingularity("time-domain Hadamard function evaluated on the light cone")
    beta = bath.beta
    out = np.empty(tau.shape, dtype=float)
    pos = r > 0
    if bath.is_zero_temperature:
        out[pos] = -1.0 / (4.0 * math.pi**2 * (tau[pos] ** 2 - r[pos] ** 2))
        out[~pos] = -1.0 / (4.0 * math.pi**2 * tau[~pos] ** 2)
    else:
        tp, rp = tau[pos], r[pos]
        out[pos] = -(_coth_scaled(tp - rp, beta) - _coth_scaled(tp + rp, beta)) / (
            8.0 * math.pi * beta * rp
        )
        t0 = tau[~pos]
        out[~pos] = -1.0 / (4.0 * beta**2 * np.sinh(math.pi * t0 / beta) ** 2)
    return out[()] if out.ndim == 0 else out


def fdr_residual(omega, r, bath: BathState):
    """|G_H - coth(beta omega/2) Im G_R|, zero up to rounding by construction."""
    omega = np.asarray(omega, dtype=float)
    lhs = g_had_freq(omega, r, bath)
    with np.errstate(divide="ignore", invalid="ignore"):
        rhs = coth_half(omega, bath) * im_g_ret_freq(omega, r)
    # coth * Im G_R is 0 * inf at omega = 0; its limit is 2 / (4 pi beta)
    limit = 0.0 if bath.is_zero_temperature else 2.0 / (FOUR_PI * bath.beta)
    rhs = np.where(omega == 0, limit, rhs)
    return np.abs(lhs - rhs)
