"""Late-time covariances, internal energy and heat capacity of the network.

All quantities are half-line frequency integrals of the imaginary part of
the response matrix weighted by a thermal factor. Symmetric integrands on
the full line are folded onto ``kappa > 0``; the apparent ``1/kappa``
singularities combine into finite limits at ``kappa = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NotConverged, StepTooLarge, UnstableSpec
from .kernels import BathState, thermal_weight
from .network import NetworkSpec, build_frequency_matrix, d2_batch, is_positive_definite
from .quadrature import QuadratureSpec, Scales, half_line_integral
from .specfun import x_csch_x_sq

PSD_TOL = 1e-10


@dataclass(frozen=True)
class CovariancePair:
    sigma_xx: np.ndarray
    sigma_vv: np.ndarray


@dataclass(frozen=True)
class ThermoPoint:
    beta: float
    energy: float
    heat_capacity: float
    mode_energies: np.ndarray


def problem_scales(spec: NetworkSpec, bath: BathState | None = None) -> Scales:
    """Breakpoints and panel widths for frequency integrals of ``spec``."""
    omega2 = build_frequency_matrix(spec, warn=False)
    eig = np.linalg.eigvalsh(omega2)
    feats = [math.sqrt(e) for e in eig if e > 0]
    if spec.n > 1 and spec.gamma > 0:
        ell = spec.separations[~np.eye(spec.n, dtype=bool)]
        feats.append(math.pi / float(np.min(ell)))
    thermal = None
    if bath is not None and not bath.is_zero_temperature:
        thermal = 1.0 / bath.beta
        feats.append(thermal)
    widths = [0.25 * spec.omega_p]
    if spec.gamma > 0:
        widths.append(0.5 * spec.gamma)
    if thermal is not None:
        widths.append(0.5 * thermal)
    osc = None
    if spec.n > 1:
        osc = float(np.max(spec.separations))
        widths.append(0.5 / osc)
    return Scales(
        uv_cutoff=spec.uv_cutoff,
        subtraction=spec.omega_p,
        features=tuple(sorted(set(feats))),
        resolution=min(widths),
        oscillation=osc,
    )


def check_stable(spec: NetworkSpec) -> None:
    """Cheap necessary conditions for a late-time state; raises UnstableSpec."""
    omega2 = build_frequency_matrix(spec, warn=False)
    if not is_positive_definite(omega2):
        raise UnstableSpec("frequency matrix is not positive definite")
    # static stiffness including the field-mediated coupling at zero frequency
    if spec.n > 1 and spec.gamma > 0:
        ell = spec.separations
        static = omega2 - np.where(np.eye(spec.n, dtype=bool), 0.0, 2.0 * spec.gamma / np.where(ell > 0, ell, 1.0))
        if not is_positive_definite(static):
            raise UnstableSpec("static stiffness is not positive definite: runaway mode on the real axis")


def _im_d2(spec: NetworkSpec, omega2: np.ndarray, kappa: np.ndarray) -> np.ndarray:
    d = d2_batch(spec, kappa, omega2)
    return 0.5 * (d.imag + np.swapaxes(d.imag, -1, -2))


def _resolve(quad: QuadratureSpec | None) -> QuadratureSpec:
    return QuadratureSpec() if quad is None else quad


def _psd_checked(mat: np.ndarray, label: str) -> np.ndarray:
    sym = 0.5 * (mat + mat.T)
    eig = np.linalg.eigvalsh(sym)
    if eig.min() < -PSD_TOL * max(1.0, np.abs(eig).max()):
        raise NotConverged(f"{label} has negative eigenvalue {eig.min():.3e}")
    return sym


def covariance(spec: NetworkSpec, bath: BathState, quad: QuadratureSpec | None = None) -> CovariancePair:
    """Late-time position and velocity covariance matrices."""
    quad = _resolve(quad)
    check_stable(spec)
    omega2 = build_frequency_matrix(spec, warn=False)
    n = spec.n
    eye = np.eye(n)

    def integrand(k):
        imd = _im_d2(spec, omega2, k)
        tw = thermal_weight(k, bath)[:, None, None]
        # coth(beta k / 2) Im d2 written as (k coth) * (Im d2 / k) to stay finite at k = 0
        ratio = imd / np.where(k > 0, k, 1.0)[:, None, None]
        xx = tw * ratio
        vv = tw * k[:, None, None] ** 2 * ratio
        return np.stack([xx, vv], axis=1)

    tail = np.stack([np.zeros((n, n)), 2.0 * spec.gamma * eye])
    scales = problem_scales(spec, bath)
    val = half_line_integral(integrand, quad, scales, log_tail=tail) / (math.pi * spec.mass)
    return CovariancePair(
        sigma_xx=_psd_checked(val[0], "sigma_xx"),
        sigma_vv=_psd_checked(val[1], "sigma_vv"),
    )


def _trace_integrand(spec: NetworkSpec, omega2: np.ndarray, weight):
    def integrand(k):
        imd = _im_d2(spec, omega2, k)
        ratio = imd / np.where(k > 0, k, 1.0)[:, None, None]
        kk = (k * k)[:, None]
        tr_k2 = kk[:, 0] * np.trace(ratio, axis1=1, axis2=2)
        tr_w2 = np.einsum("ij,kji->k", omega2, ratio)
        return weight(k) * (tr_k2 + tr_w2)

    return integrand


def internal_energy(spec: NetworkSpec, bath: BathState, quad: QuadratureSpec | None = None) -> float:
    """Late-time mechanical energy of the oscillators."""
    quad = _resolve(quad)
    check_stable(spec)
    omega2 = build_frequency_matrix(spec, warn=False)
    f = _trace_integrand(spec, omega2, lambda k: thermal_weight(k, bath))
    tail = 2.0 * spec.gamma * spec.n
    val = half_line_integral(f, quad, problem_scales(spec, bath), log_tail=tail)
    return float(val) / (2.0 * math.pi)


def heat_capacity_direct(spec: NetworkSpec, bath: BathState, quad: QuadratureSpec | None = None) -> float:
    """Heat capacity from the thermal-window integral; convergent without a cutoff."""
    quad = _resolve(quad)
    if bath.is_zero_temperature:
        return 0.0
    check_stable(spec)
    omega2 = build_frequency_matrix(spec, warn=False)
    beta = bath.beta
    f = _trace_integrand(spec, omega2, lambda k: x_csch_x_sq(0.5 * beta * k))
    val = half_line_integral(f, quad, problem_scales(spec, bath), log_tail=None)
    return float(val) / math.pi


def heat_capacity_fd(
    spec: NetworkSpec,
    bath: BathState,
    quad: QuadratureSpec | None = None,
    h: float | None = None,
    tol: float = 1e-4,
) -> float:
    """Heat capacity as -beta^2 dE/dbeta by a central difference.

    The step is checked against a halved step; a disagreement above ``tol``
    (relative) raises :class:`StepTooLarge`.
    """
    if bath.is_zero_temperature:
        raise ConfigError("finite-difference heat capacity needs finite beta")
    beta = bath.beta
    h = 1e-3 * beta if h is None else h
    if not 0 < h < beta:
        raise ConfigError("step must satisfy 0 < h < beta")

    def central(step):
        ep = internal_energy(spec, BathState(beta + step), quad)
        em = internal_energy(spec, BathState(beta - step), quad)
        return -beta * beta * (ep - em) / (2.0 * step)

    c_h = central(h)
    c_half = central(0.5 * h)
    if abs(c_h - c_half) > tol * max(abs(c_half), 1e-300):
        raise StepTooLarge(f"central differences disagree: {c_h!r} vs {c_half!r}")
    return c_h


def normal_mode_energies(
    spec: NetworkSpec,
    bath: BathState,
    quad: QuadratureSpec | None = None,
    cov: CovariancePair | None = None,
) -> np.ndarray:
    """Energies of the normal modes of the frequency matrix; they sum to the total."""
    cov = covariance(spec, bath, quad) if cov is None else cov
    omega2 = build_frequency_matrix(spec, warn=False)
    w2, u = np.linalg.eigh(omega2)
    nmat = u.T @ cov.sigma_xx @ u
    mmat = u.T @ cov.sigma_vv @ u
    return 0.5 * spec.mass * (np.diag(mmat) + w2 * np.diag(nmat))


def energy_from_covariance(spec: NetworkSpec, cov: CovariancePair) -> float:
    omega2 = build_frequency_matrix(spec, warn=False)
    return 0.5 * spec.mass * float(np.trace(cov.sigma_vv) + np.trace(omega2 @ cov.sigma_xx))


def thermo_point(spec: NetworkSpec, bath: BathState, quad: QuadratureSpec | None = None) -> ThermoPoint:
    cov = covariance(spec, bath, quad)
    modes = normal_mode_energies(spec, bath, quad, cov=cov)
    return ThermoPoint(
        beta=bath.beta,
        energy=float(np.sum(modes)),
        heat_capacity=heat_capacity_direct(spec, bath, quad),
        mode_energies=modes,
    )
