"""Closed-form time-domain pieces for a single oscillator and the bath-mode memory integral."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from ..errors import ConfigError, NotConverged
from ..kernels import BathState
from ..network import NetworkSpec
from ..specfun import trigamma


def _branch(gamma: float, omega_p: float):
    disc = omega_p * omega_p - gamma * gamma
    scale = max(omega_p * omega_p, gamma * gamma)
    if abs(disc) <= 1e-12 * scale:
        return "critical", 0.0
    return ("under", math.sqrt(disc)) if disc > 0 else ("over", math.sqrt(-disc))


def d_funcs_single(t, gamma: float, omega_p: float):
    """Homogeneous solutions with ``d1(0)=1, d1'(0)=0`` and ``d2(0)=0, d2'(0)=1``.

    Covers the underdamped, critical and overdamped branches.
    """
    t = np.asarray(t, dtype=float)
    kind, w = _branch(gamma, omega_p)
    decay = np.exp(-gamma * t)
    if kind == "under":
        s, c = np.sin(w * t), np.cos(w * t)
        return decay * (c + (gamma / w) * s), decay * s / w
    if kind == "over":
        s, c = np.sinh(w * t), np.cosh(w * t)
        return decay * (c + (gamma / w) * s), decay * s / w
    return decay * (1.0 + gamma * t), decay * t


def d2_rate_single(t, gamma: float, omega_p: float):
    """Time derivative of ``d2``."""
    t = np.asarray(t, dtype=float)
    kind, w = _branch(gamma, omega_p)
    decay = np.exp(-gamma * t)
    if kind == "under":
        return decay * (np.cos(w * t) - (gamma / w) * np.sin(w * t))
    if kind == "over":
        return decay * (np.cosh(w * t) - (gamma / w) * np.sinh(w * t))
    return decay * (1.0 - gamma * t)


def regulated_hadamard_time(tau, bath: BathState, cutoff: float):
    """Coincident-point field Hadamard function with the spectrum damped by ``exp(-|w|/cutoff)``.

    Finite everywhere; tends to the unregulated kernel for ``|tau| >> 1/cutoff``.
    """
    z = 1.0 / cutoff + 1j * np.asarray(tau, dtype=float)
    if bath.is_zero_temperature:
        val = 1.0 / (z * z)
    else:
        b = bath.beta
        val = 2.0 * trigamma(z / b) / (b * b) - 1.0 / (z * z)
    return np.real(val) / (4.0 * math.pi**2)


def power_noise_time(
    spec: NetworkSpec,
    bath: BathState,
    t: float,
    cutoff: float | None = None,
    rel_tol: float = 1e-10,
) -> float:
    """Power delivered by the noise to a single oscillator released at ``t = 0``.

    ``(e^2/m) int_0^t du d2'(u) G_H(u)`` with the field kernel regulated at
    ``cutoff`` (default ``spec.uv_cutoff``). The late-time limit equals the
    frequency-domain noise power computed with the exponential regulator.
    """
    if spec.n != 1:
        raise ConfigError("time-domain noise power is implemented for a single oscillator")
    if t < 0:
        raise ConfigError("t must be non-negative")
    if t == 0:
        return 0.0
    cutoff = float(spec.uv_cutoff if cutoff is None else cutoff)
    eps = 1.0 / cutoff
    g, w = spec.gamma, spec.omega_p

    def f(u):
        return float(d2_rate_single(u, g, w) * regulated_hadamard_time(u, bath, cutoff))

    # the kernel is a spike of width 1/cutoff at u = 0; integrate it on its own scale first
    edges = [0.0] + [e for e in (eps, 10 * eps, 100 * eps) if e < t]
    period = 2.0 * math.pi / max(w, 1e-300)
    nxt = edges[-1]
    while nxt < t:
        nxt = min(t, nxt + period)
        edges.append(nxt)
    kind, root = _branch(g, w)
    rate = g - root if kind == "over" else g
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, err = quad(f, a, b, epsabs=0.0, epsrel=rel_tol, limit=200)
        if err > 1e3 * rel_tol * max(abs(val), 1e-300) and err > 1e-14:
            raise NotConverged(f"noise power integral on [{a:g}, {b:g}] has error {err:.3g}")
        total += val
        if rate * b > 40.0:
            break
    return spec.charge_sq / spec.mass * total


@dataclass(frozen=True)
class MemorySeries:
    """``integral`` is ``int_0^t sin(w (t - s)) exp(-gamma s) ds`` and ``envelope`` its modulus envelope."""

    t: np.ndarray
    integral: np.ndarray
    envelope: np.ndarray
    residue: float


def bath_mode_memory(omega_k: float, gamma_relax: float, t_grid) -> MemorySeries:
    """Response of one bath mode to a source that relaxes at rate ``gamma_relax``.

    The envelope settles to ``1/|gamma + i omega|``, not to zero: the mode
    keeps oscillating with an amplitude set by the initial data.
    """
    if not omega_k > 0 or gamma_relax < 0:
        raise ConfigError("need omega_k > 0 and gamma_relax >= 0")
    t = np.asarray(t_grid, dtype=float)
    s = gamma_relax + 1j * omega_k
    z = (np.exp(1j * omega_k * t) - np.exp(-gamma_relax * t)) / s
    return MemorySeries(t=t, integral=z.imag, envelope=np.abs(z), residue=1.0 / abs(s))
