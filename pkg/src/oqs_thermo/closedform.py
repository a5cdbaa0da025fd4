"""Analytic reference results.

Single oscillator: Matsubara-resummed energy and heat capacity, their
high- and low-temperature asymptotes, and the textbook canonical-ensemble
results they reduce to at vanishing coupling. Two oscillators: the
heat capacity written as a sum over the symmetric and antisymmetric
channels, whose integrand is manifestly non-negative.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnstableSpec
from .quadrature import QuadratureSpec, Scales, half_line_integral
from .specfun import complex_harmonic, trigamma, x_csch_x_sq


@dataclass(frozen=True)
class SingleOscParams:
    beta: float
    gamma: float
    omega_p: float
    uv_cutoff: float = 100.0

    def __post_init__(self):
        if not (self.beta > 0 and self.omega_p > 0 and self.gamma >= 0 and self.uv_cutoff > 0):
            raise ConfigError("need beta, omega_p, cutoff > 0 and gamma >= 0")

    @property
    def resonance(self) -> complex:
        """W = sqrt(omega_p^2 - gamma^2); imaginary on the overdamped branch."""
        return cmath.sqrt(self.omega_p**2 - self.gamma**2)

    @property
    def overdamped(self) -> bool:
        return self.gamma > self.omega_p

    @property
    def extrapolated(self) -> bool:
        """True when the formulas are used outside the underdamped regime."""
        return self.gamma >= self.omega_p

    def _poles(self):
        w = self.resonance
        return (w + 1j * self.gamma) / (2 * math.pi), (-w + 1j * self.gamma) / (2 * math.pi)


def single_energy_closed(p: SingleOscParams) -> float:
    """Late-time energy of one oscillator in terms of complex harmonic numbers."""
    wp, wm = p._poles()
    b = p.beta
    pole_sum = wp * complex_harmonic(-1j * b * wp) + wm * complex_harmonic(-1j * b * wm)
    return 1.0 / b - (p.gamma / math.pi) * math.log(2 * math.pi / (b * p.uv_cutoff)) - pole_sum.imag


def single_heat_capacity_closed(p: SingleOscParams) -> float:
    """Heat capacity of one oscillator in terms of the trigamma function."""
    wp, wm = p._poles()
    b = p.beta
    s = b * b * (wp * wp * trigamma(1 - 1j * b * wp) + wm * wm * trigamma(1 - 1j * b * wm))
    return 1.0 - p.gamma * b / math.pi - s.real


def high_temperature_heat_capacity(p: SingleOscParams) -> float:
    return 1.0 - p.gamma * p.beta / math.pi


def low_temperature_heat_capacity(p: SingleOscParams) -> float:
    return 2.0 * math.pi * p.gamma / (3.0 * p.beta * p.omega_p**2)


def conventional_energy(beta, omega_p):
    """(omega/2) coth(beta omega / 2) for an isolated oscillator."""
    x = 0.5 * np.asarray(beta, dtype=float) * omega_p
    return 0.5 * omega_p / np.tanh(x)


def weak_coupling_energy(p: SingleOscParams) -> float:
    """Leading small-gamma form: canonical energy plus the cutoff logarithm."""
    shift = (p.gamma / math.pi) * math.log(2 * math.pi / (p.beta * p.uv_cutoff))
    return float(conventional_energy(p.beta, p.omega_p)) - shift


def conventional_heat_capacity(beta, omega_p):
    """Canonical-ensemble heat capacity (x / sinh x)^2 with x = beta omega / 2."""
    out = x_csch_x_sq(0.5 * np.asarray(beta, dtype=float) * omega_p)
    return float(out) if np.ndim(out) == 0 else out


# --- two oscillators ----------------------------------------------------------------


@dataclass(frozen=True)
class CriticalScales:
    gamma_c: float
    ell_c: float
    varsigma: float


def critical_scales(gamma: float, sigma: float, ell: float) -> CriticalScales:
    """Crossover between direct and field-mediated coupling."""
    if gamma <= 0 or sigma == 0 or ell <= 0:
        raise ConfigError("need gamma > 0, sigma != 0 and ell > 0")
    return CriticalScales(gamma_c=sigma * ell / 4.0, ell_c=4.0 * gamma / sigma, varsigma=sigma * ell / (2.0 * gamma))


def _channels(omega_p, sigma):
    return ((omega_p**2 + sigma, 1.0), (omega_p**2 - sigma, -1.0))


def two_osc_channel_terms(kappa, omega_p, gamma, sigma, ell):
    """Per-channel non-negative spectral weights, shape ``(2,) + kappa.shape``.

    Row 0 is the symmetric channel (frequency omega_p^2 + sigma), row 1 the
    antisymmetric one. Their sum times the thermal window and 1/pi,
    integrated over positive frequencies, gives the heat capacity.
    """
    k = np.asarray(kappa, dtype=float)
    kl = k * ell
    sinc = np.sinc(kl / math.pi)
    out = []
    for w2, s in _channels(omega_p, sigma):
        real = (k * k - w2) * ell + s * 2.0 * gamma * np.cos(kl)
        imag = 2.0 * gamma * (kl + s * np.sin(kl))
        num = 2.0 * gamma * ell * ell * (1.0 + s * sinc) * (k * k + w2)
        out.append(num / (real * real + imag * imag))
    return np.stack(out)


def two_osc_integrand(kappa, beta, omega_p, gamma, sigma, ell):
    """Thermal window times the summed channel weights; non-negative."""
    k = np.asarray(kappa, dtype=float)
    return x_csch_x_sq(0.5 * beta * k) * two_osc_channel_terms(k, omega_p, gamma, sigma, ell).sum(axis=0)


def check_two_osc_stable(omega_p, gamma, sigma, ell) -> None:
    sym, anti = omega_p**2 + sigma, omega_p**2 - sigma
    if anti <= 0 or sym <= 0:
        raise UnstableSpec("a channel frequency squared is not positive")
    if sym - 2.0 * gamma / ell <= 0:
        raise UnstableSpec("symmetric channel has a runaway root on the real axis")


def two_osc_heat_capacity(
    beta: float,
    omega_p: float,
    gamma: float,
    sigma: float,
    ell: float,
    uv_cutoff: float = 100.0,
    quad: QuadratureSpec | None = None,
) -> float:
    """Heat capacity of a pair from its explicit channel decomposition."""
    quad = QuadratureSpec() if quad is None else quad
    check_two_osc_stable(omega_p, gamma, sigma, ell)
    feats = [math.sqrt(omega_p**2 + sigma), math.sqrt(omega_p**2 - sigma), math.pi / ell, 1.0 / beta]
    widths = [0.25 * omega_p, 0.5 / beta, 0.5 / ell] + ([0.5 * gamma] if gamma > 0 else [])
    scales = Scales(uv_cutoff=uv_cutoff, subtraction=omega_p, features=tuple(feats), resolution=min(widths), oscillation=ell)

    def f(k):
        return two_osc_integrand(k, beta, omega_p, gamma, sigma, ell)

    return float(half_line_integral(f, quad, scales)) / math.pi


def two_osc_low_temperature_coefficient(omega_p: float, gamma: float, sigma: float, ell: float) -> float:
    """Limit of beta * C as beta -> infinity; only the symmetric channel contributes."""
    w2 = omega_p**2 + sigma
    return 4.0 * math.pi * gamma * w2 / (3.0 * (w2 - 2.0 * gamma / ell) ** 2)

