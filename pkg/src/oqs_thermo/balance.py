"""Late-time power flows into each oscillator.

Three flows are computed per oscillator. ``P_gamma`` is the work done by
the local dissipative self-force, and it is never positive. ``P_xi`` is
the work done by the field noise, and it is never negative. ``P_c`` is
the net work done by the other oscillators through the field. Each is a
half-line integral of ``kappa`` times a product of a retarded kernel's
imaginary part and a Hadamard kernel.

The system Hadamard function is either taken from the fluctuation-
dissipation relation (``route="fdr"``, cheap) or assembled from the
noise kernel sandwiched between response matrices
(``route="convolution"``). Only the second makes the vanishing of the
total a non-trivial statement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibrium import check_stable, problem_scales
from .kernels import BathState, coth_half, g_had_freq, im_g_ret_freq, thermal_weight
from .network import NetworkSpec, build_frequency_matrix, d2_batch
from .quadrature import QuadratureSpec, half_line_integral

ROUTES = ("fdr", "convolution")


@dataclass(frozen=True)
class PowerBreakdown:
    p_gamma: np.ndarray
    p_xi: np.ndarray
    p_c: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return self.p_gamma + self.p_xi + self.p_c

    @property
    def relative_residual(self) -> np.ndarray:
        scale = np.maximum(np.abs(self.p_gamma), np.abs(self.p_xi))
        return np.abs(self.residual) / scale


@dataclass(frozen=True)
class FDRCheck:
    max_abs: float
    max_rel: float


def _field_matrices(spec: NetworkSpec, bath: BathState, k: np.ndarray):
    """Im G_R and G_H of the field between oscillator sites, shape (K, n, n)."""
    sep = spec.separations
    im_gr = im_g_ret_freq(k[:, None, None], sep[None])
    gh = g_had_freq(k[:, None, None], sep[None], bath)
    return im_gr, gh


def system_hadamard(spec: NetworkSpec, bath: BathState, k: np.ndarray, route: str = "fdr", omega2=None):
    """Hadamard function of the oscillator coordinates at frequencies ``k``.

    Returned multiplied by ``k`` so the value stays finite at ``k = 0``.
    """
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}")
    d = d2_batch(spec, k, omega2)
    m = spec.mass
    if route == "fdr":
        # k coth(beta k / 2) Im d / m
        return thermal_weight(k, bath)[:, None, None] * d.imag / m
    _, gh = _field_matrices(spec, bath, k)
    sandwich = d @ gh @ np.conj(np.swapaxes(d, -1, -2))
    return (spec.charge_sq / m**2) * k[:, None, None] * sandwich.real


def _integrand(spec: NetworkSpec, bath: BathState, route: str, omega2):
    n = spec.n
    e2 = spec.charge_sq
    m = spec.mass
    offdiag = ~np.eye(n, dtype=bool)

    def f(k):
        im_gr, gh = _field_matrices(spec, bath, k)
        k_gh_sys = system_hadamard(spec, bath, k, route, omega2)
        im_gr_sys = d2_batch(spec, k, omega2).imag / m
        # the integrands are kappa * ImG * G_H; k_gh_sys already carries one kappa
        diag_phi = np.diagonal(im_gr, axis1=1, axis2=2)
        diag_sys = np.diagonal(k_gh_sys, axis1=1, axis2=2)
        p_gamma = -e2 * diag_phi * diag_sys
        p_xi = e2 * k[:, None] * np.sum(im_gr_sys * gh, axis=2)
        p_c = -e2 * np.sum(np.where(offdiag, im_gr * k_gh_sys, 0.0), axis=2)
        return np.stack([p_gamma, p_xi, p_c], axis=1)

    return f


def power_breakdown(
    spec: NetworkSpec,
    bath: BathState,
    quad: QuadratureSpec | None = None,
    route: str = "fdr",
) -> PowerBreakdown:
    """All three flows for every oscillator, from one shared quadrature."""
    quad = QuadratureSpec() if quad is None else quad
    check_stable(spec)
    n = spec.n
    g = spec.gamma
    if g == 0:
        # zero charge: no coupling to the field, and no flows
        z = np.zeros(n)
        return PowerBreakdown(p_gamma=z, p_xi=z.copy(), p_c=z.copy())
    omega2 = build_frequency_matrix(spec, warn=False)
    # large-kappa tails: P_gamma ~ -4 gamma^2 / kappa, P_xi ~ +4 gamma^2 / kappa
    tail = np.zeros((3, n))
    tail[0] = -4.0 * g * g
    tail[1] = 4.0 * g * g
    val = half_line_integral(_integrand(spec, bath, route, omega2), quad, problem_scales(spec, bath), log_tail=tail)
    val = val / math.pi
    return PowerBreakdown(p_gamma=val[0], p_xi=val[1], p_c=val[2])


def power_dissipative(spec, bath, i: int, quad=None, route: str = "fdr") -> float:
    return float(power_breakdown(spec, bath, quad, route).p_gamma[i])


def power_noise(spec, bath, i: int, quad=None, route: str = "fdr") -> float:
    return float(power_breakdown(spec, bath, quad, route).p_xi[i])


def power_causal(spec, bath, i: int, quad=None, route: str = "fdr") -> float:
    return float(power_breakdown(spec, bath, quad, route).p_c[i])


def fdr_system_check(spec: NetworkSpec, bath: BathState, kappa_grid=None) -> FDRCheck:
    """Compare the noise-built system Hadamard function with coth * Im G_R."""
    if kappa_grid is None:
        top = 20.0 * max(spec.omega_p, 1.0 if bath.is_zero_temperature else 1.0 / bath.beta)
        kappa_grid = np.linspace(top / 2000, top, 2000)
    k = np.asarray(kappa_grid, dtype=float)
    k = k[k != 0]
    omega2 = build_frequency_matrix(spec, warn=False)
    d = d2_batch(spec, k, omega2)
    sep = spec.separations
    gh = g_had_freq(k[:, None, None], sep[None], bath)
    built = (spec.charge_sq / spec.mass**2) * (d @ gh @ np.conj(np.swapaxes(d, -1, -2)))
    im_gr_sys = d.imag / spec.mass
    expected = coth_half(k, bath)[:, None, None] * im_gr_sys
    diff = np.linalg.norm(built - expected, axis=(1, 2))
    ref = np.linalg.norm(d / spec.mass, axis=(1, 2))
    return FDRCheck(max_abs=float(diff.max()), max_rel=float((diff / ref).max()))

