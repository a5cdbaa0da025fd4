"""Oscillator network model and its frequency-domain response matrix.

Every oscillator carries the same mass, physical frequency and damping.
Oscillators sit at fixed points and see each other both through a direct
coupling ``sigma`` and through the field, which contributes a retarded
cross kernel ``(2 gamma / l) exp(i kappa l)`` for a pair at separation ``l``.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ConfigError, NotPositiveDefiniteWarning, SingularAtFrequency

Coupling = Union[float, Callable[[float], float]]

COND_LIMIT = 1e13


@dataclass(frozen=True)
class NetworkSpec:
    """Parameters of an ``n``-oscillator network.

    ``omega_p`` is the physical (renormalised) frequency. The bare value
    follows from ``omega_b^2 = omega_p^2 + 4 gamma Lambda / pi``.
    ``sigma`` is either a constant or a function of pair separation.
    """

    omega_p: float
    gamma: float
    positions: np.ndarray = field(default_factory=lambda: np.zeros((1, 3)))
    sigma: Coupling = 0.0
    mass: float = 1.0
    uv_cutoff: float = 100.0
    ir_cutoff: float = 1e-6
    ell_min: float | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos.reshape(-1, 1)
        if pos.ndim != 2 or pos.shape[0] < 1:
            raise ConfigError("positions must be an (n, d) array with n >= 1")
        if pos.shape[1] < 3:
            pos = np.hstack([pos, np.zeros((pos.shape[0], 3 - pos.shape[1]))])
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        for name in ("omega_p", "mass", "uv_cutoff", "ir_cutoff"):
            if not float(getattr(self, name)) > 0:
                raise ConfigError(f"{name} must be positive")
        if not float(self.gamma) >= 0:
            raise ConfigError("gamma must be non-negative")
        ell_min = self.ell_min if self.ell_min is not None else 1e-3 / self.omega_p
        object.__setattr__(self, "ell_min", float(ell_min))
        n = pos.shape[0]
        if n > 1:
            sep = self.separations
            off = sep[~np.eye(n, dtype=bool)]
            if np.min(off) < self.ell_min:
                raise ConfigError(
                    f"pair separation {np.min(off):.3g} below ell_min={self.ell_min:.3g}"
                )

    # -- constructors -------------------------------------------------
    @classmethod
    def single(cls, omega_p: float, gamma: float, **kw) -> "NetworkSpec":
        return cls(omega_p=omega_p, gamma=gamma, positions=np.zeros((1, 3)), **kw)

    @classmethod
    def pair(cls, omega_p: float, gamma: float, sigma: Coupling, ell: float, **kw) -> "NetworkSpec":
        pos = np.array([[0.0, 0.0, 0.0], [ell, 0.0, 0.0]])
        return cls(omega_p=omega_p, gamma=gamma, positions=pos, sigma=sigma, **kw)

    @classmethod
    def chain(cls, n: int, spacing: float, omega_p: float, gamma: float, sigma: Coupling = 0.0, **kw):
        pos = np.zeros((n, 3))
        pos[:, 0] = spacing * np.arange(n)
        return cls(omega_p=omega_p, gamma=gamma, positions=pos, sigma=sigma, **kw)

    @classmethod
    def ring(cls, n: int, spacing: float, omega_p: float, gamma: float, sigma: Coupling = 0.0, **kw):
        """Regular polygon with nearest-neighbour distance ``spacing``."""
        if n < 2:
            return cls.single(omega_p, gamma, **kw)
        radius = spacing / (2.0 * math.sin(math.pi / n)) if n > 2 else spacing / 2.0
        ang = 2.0 * math.pi * np.arange(n) / n
        pos = np.stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(n)], axis=1)
        return cls(omega_p=omega_p, gamma=gamma, positions=pos, sigma=sigma, **kw)

    # -- derived quantities ---------------------------------------------
    @property
    def n(self) -> int:
        return int(self.positions.shape[0])

    @property
    def charge_sq(self) -> float:
        """Squared coupling e^2 = 8 pi m gamma."""
        return 8.0 * math.pi * self.mass * self.gamma

    @property
    def omega_b2(self) -> float:
        """Bare squared frequency implied by omega_p and the cutoff (read-only)."""
        return self.omega_p**2 + 4.0 * self.gamma * self.uv_cutoff / math.pi

    @property
    def separations(self) -> np.ndarray:
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def coupling_value(self, ell: float) -> float:
        return float(self.sigma(ell)) if callable(self.sigma) else float(self.sigma)

    def replace(self, **changes) -> "NetworkSpec":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PropagatorMatrix:
    kappa: float
    d2: np.ndarray


@dataclass(frozen=True)
class GammaMatrix:
    kappa: float
    gamma_mat: np.ndarray


def _offdiag_mask(n: int) -> np.ndarray:
    return ~np.eye(n, dtype=bool)


def is_positive_definite(mat: np.ndarray) -> bool:
    sym = 0.5 * (mat + mat.T)
    return bool(np.all(np.linalg.eigvalsh(sym) > 0))


def build_frequency_matrix(spec: NetworkSpec, warn: bool = True) -> np.ndarray:
    """Real symmetric matrix with omega_p^2 on the diagonal and sigma(l_ij) off it."""
    n = spec.n
    mat = np.full((n, n), 0.0)
    sep = spec.separations
    for i in range(n):
        for j in range(i + 1, n):
            mat[i, j] = mat[j, i] = spec.coupling_value(sep[i, j])
    mat[np.diag_indices(n)] = spec.omega_p**2
    if warn and not is_positive_definite(mat):
        warnings.warn("frequency matrix is not positive definite", NotPositiveDefiniteWarning, stacklevel=2)
    return mat


def field_coupling_matrix(spec: NetworkSpec, kappa) -> np.ndarray:
    """Cross kernel M(kappa) with zero diagonal, shape ``kappa.shape + (n, n)``."""
    kappa = np.asarray(kappa, dtype=float)
    n = spec.n
    out = np.zeros(kappa.shape + (n, n), dtype=complex)
    if n == 1 or spec.gamma == 0:
        return out
    sep = spec.separations
    mask = _offdiag_mask(n)
    ell = sep[mask]
    out[..., mask] = (2.0 * spec.gamma / ell) * np.exp(1j * kappa[..., None] * ell)
    return out


def inverse_response(spec: NetworkSpec, kappa, omega2: np.ndarray | None = None) -> np.ndarray:
    """The matrix d2(kappa)^-1 = Omega_p^2 - kappa^2 - 2 i gamma kappa - M(kappa)."""
    kappa = np.asarray(kappa, dtype=float)
    if omega2 is None:
        omega2 = build_frequency_matrix(spec, warn=False)
    n = spec.n
    eye = np.eye(n)
    diag = (kappa**2 + 2j * spec.gamma * kappa)[..., None, None] * eye
    return omega2 - diag - field_coupling_matrix(spec, kappa)


def d2_batch(spec: NetworkSpec, kappa, omega2: np.ndarray | None = None, check: bool = True) -> np.ndarray:
    """Response matrix at an array of real frequencies, shape ``kappa.shape + (n, n)``."""
    kappa = np.asarray(kappa, dtype=float)
    if spec.n == 1:
        w2 = spec.omega_p**2 if omega2 is None else omega2[0, 0]
        denom = w2 - kappa**2 - 2j * spec.gamma * kappa
        if check and np.any(np.abs(denom) < 1e-300):
            bad = kappa.flat[int(np.argmin(np.abs(denom)))]
            raise SingularAtFrequency(float(bad), math.inf)
        return (1.0 / denom)[..., None, None]
    a = inverse_response(spec, kappa, omega2)
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        raise SingularAtFrequency(float(np.ravel(kappa)[0]), math.inf) from None
    if check:
        cond = np.abs(a).sum(axis=-2).max(axis=-1) * np.abs(inv).sum(axis=-2).max(axis=-1)
        worst = np.nanargmax(np.where(np.isfinite(cond), cond, np.inf))
        cw = np.ravel(cond)[worst]
        if not np.isfinite(cw) or cw > COND_LIMIT:
            raise SingularAtFrequency(float(np.ravel(kappa)[worst]), float(cw))
    return inv


def d2_freq(spec: NetworkSpec, kappa: float) -> PropagatorMatrix:
    """Response matrix at one real frequency."""
    return PropagatorMatrix(float(kappa), d2_batch(spec, float(kappa)))


def gamma_matrix_batch(spec: NetworkSpec, kappa) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    n = spec.n
    sep = spec.separations
    out = spec.gamma * np.sinc(kappa[..., None, None] * sep / math.pi)
    return np.broadcast_to(out, kappa.shape + (n, n)).copy()


def gamma_matrix(spec: NetworkSpec, kappa: float) -> GammaMatrix:
    """Damping matrix with gamma on the diagonal and gamma*sinc(kappa l_ij) off it."""
    return GammaMatrix(float(kappa), gamma_matrix_batch(spec, float(kappa)))


def im_d2_identity_residual(spec: NetworkSpec, kappa: float) -> float:
    """Frobenius norm of Im d2 - d2 (2 kappa Gamma) d2^dagger."""
    d = d2_batch(spec, float(kappa))
    two_k_gamma = 2.0 * kappa * gamma_matrix_batch(spec, float(kappa))
    rhs = d @ two_k_gamma @ d.conj().T
    return float(np.linalg.norm(d.imag - rhs.real) + np.linalg.norm(rhs.imag))
