"""Existence of the late-time state.

Four tools live here. The first is the diagonal-dominance check on the
damping matrix. The second is a Routh-Hurwitz verdict for the
characteristic polynomial of the network with the damping matrix frozen
at a reference frequency. The third is the quadratic-form bound on
individual roots. The last is a root search for the two-oscillator delay
equation, whose characteristic function is transcendental.
"""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq

from .errors import ConfigError
from .network import NetworkSpec, build_frequency_matrix, gamma_matrix_batch, is_positive_definite

LEIBNIZ_MAX_N = 6


class Verdict(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class DominanceResult:
    dominant: bool
    margin: float
    worst_kappa: float
    worst_row: int


@dataclass(frozen=True)
class RouthResult:
    verdict: Verdict
    first_column: np.ndarray
    degenerate_row: int | None = None


@dataclass(frozen=True)
class DelaySearchResult:
    roots: np.ndarray
    channels: np.ndarray
    runaway: bool
    failures: list = field(default_factory=list)


@dataclass(frozen=True)
class StabilityReport:
    omega_p2_positive_definite: bool
    gamma_diagonally_dominant: bool
    dominance_margin: float
    dominance_worst_kappa: float
    gamma_prime: np.ndarray
    w_script: np.ndarray
    w_script_positive_definite: bool
    hurwitz: Verdict
    roots: np.ndarray
    runaway: bool

    @property
    def hurwitz_pass(self) -> bool:
        return self.hurwitz is Verdict.STABLE

    @property
    def stable(self) -> bool:
        return self.omega_p2_positive_definite and self.hurwitz_pass and not self.runaway


# --- damping matrix ------------------------------------------------------------------


def default_kappa_grid(spec: NetworkSpec, points: int = 400) -> np.ndarray:
    top = 10.0 * spec.omega_p
    if spec.n > 1:
        ell = spec.separations[~np.eye(spec.n, dtype=bool)]
        top = max(top, 20.0 * math.pi / float(np.min(ell)))
    return np.linspace(top / points, top, points)


def diagonal_dominance(spec: NetworkSpec, kappa_grid=None) -> DominanceResult:
    """Strict row dominance of the damping matrix on a frequency grid."""
    grid = default_kappa_grid(spec) if kappa_grid is None else np.asarray(kappa_grid, dtype=float)
    if spec.n == 1:
        return DominanceResult(True, spec.gamma, float(grid[0]) if grid.size else 0.0, 0)
    gm = gamma_matrix_batch(spec, grid)
    diag = np.abs(np.diagonal(gm, axis1=-2, axis2=-1))
    off = np.abs(gm).sum(axis=-1) - diag
    margin = diag - off
    k, row = np.unravel_index(int(np.argmin(margin)), margin.shape)
    worst = float(margin[k, row])
    return DominanceResult(worst > 0, worst, float(grid[k]), int(row))


def diagonalize_gamma(spec: NetworkSpec, kappa_ref: float | None = None):
    """Return (gamma_prime, V, w_script) with V Gamma V^T = diag(gamma_prime)."""
    kappa_ref = spec.omega_p if kappa_ref is None else kappa_ref
    gm = gamma_matrix_batch(spec, float(kappa_ref))
    omega2 = build_frequency_matrix(spec, warn=False)
    if np.allclose(gm, np.diag(np.diagonal(gm)), rtol=0, atol=0):
        v = np.eye(spec.n)
        gp = np.diagonal(gm).copy()
    else:
        gp, q = np.linalg.eigh(gm)
        v = q.T
    w_script = v @ omega2 @ v.T
    return gp, v, 0.5 * (w_script + w_script.T)


# --- characteristic polynomial and Routh array ----------------------------------------


def _perm_sign(perm) -> int:
    sign, seen = 1, [False] * len(perm)
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def _charpoly_leibniz(entries) -> np.ndarray:
    """det of a matrix of polynomials (ascending coefficient arrays)."""
    n = len(entries)
    total = np.zeros(1)
    for perm in itertools.permutations(range(n)):
        term = np.ones(1)
        for i, j in enumerate(perm):
            term = P.polymul(term, entries[i][j])
        total = P.polyadd(total, _perm_sign(perm) * term)
    return total


def _charpoly_faddeev(a: np.ndarray) -> np.ndarray:
    """Characteristic polynomial of ``a`` by Faddeev-LeVerrier (descending)."""
    m = a.shape[0]
    coeffs = np.zeros(m + 1)
    coeffs[0] = 1.0
    mk = np.zeros_like(a)
    eye = np.eye(m)
    for k in range(1, m + 1):
        mk = a @ mk + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(a @ mk) / k
    return coeffs


def characteristic_polynomial(gamma_prime, w_script) -> np.ndarray:
    """Descending coefficients of det(s^2 I + 2 s Gamma' + W)."""
    g = np.asarray(gamma_prime, dtype=float)
    g = np.diag(g) if g.ndim == 1 else g
    w = np.asarray(w_script, dtype=float)
    n = w.shape[0]
    if n <= LEIBNIZ_MAX_N:
        entries = [
            [np.array([w[i, j], 2.0 * g[i, j], 1.0 if i == j else 0.0]) for j in range(n)] for i in range(n)
        ]
        asc = _charpoly_leibniz(entries)
        asc = np.concatenate([asc, np.zeros(2 * n + 1 - asc.size)])[: 2 * n + 1]
        return asc[::-1].copy()
    return _charpoly_faddeev(companion_matrix(g, w))


def companion_matrix(gamma_prime, w_script) -> np.ndarray:
    g = np.asarray(gamma_prime, dtype=float)
    g = np.diag(g) if g.ndim == 1 else g
    w = np.asarray(w_script, dtype=float)
    n = w.shape[0]
    top = np.hstack([np.zeros((n, n)), np.eye(n)])
    bottom = np.hstack([-w, -2.0 * g])
    return np.vstack([top, bottom])


def companion_roots(gamma_prime, w_script) -> np.ndarray:
    return np.linalg.eigvals(companion_matrix(gamma_prime, w_script))


def routh_array(coeffs, rel_tol: float = 1e-12) -> RouthResult:
    """Routh array of a real polynomial given in descending order."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size == 0:
        raise ConfigError("zero polynomial")
    if c[0] < 0:
        c = -c
    deg = c.size - 1
    if deg == 0:
        return RouthResult(Verdict.STABLE, c[:1])
    width = deg // 2 + 1
    row0 = np.zeros(width)
    row1 = np.zeros(width)
    row0[: len(c[0::2])] = c[0::2]
    row1[: len(c[1::2])] = c[1::2]
    scale = np.max(np.abs(c))
    rows = [row0, row1]
    first = [row0[0]]
    for r in range(1, deg + 1):
        cur = rows[-1]
        if np.all(np.abs(cur) <= rel_tol * scale):
            return RouthResult(Verdict.INDETERMINATE, np.array(first), degenerate_row=r)
        first.append(cur[0])
        if abs(cur[0]) <= rel_tol * scale:
            return RouthResult(Verdict.UNSTABLE, np.array(first))
        if r == deg:
            break
        prev = rows[-2]
        nxt = np.zeros(width)
        for j in range(width - 1):
            nxt[j] = (cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0]
        rows.append(nxt)
        scale = max(scale, np.max(np.abs(nxt)))
    col = np.array(first)
    verdict = Verdict.STABLE if np.all(col > 0) else Verdict.UNSTABLE
    return RouthResult(verdict, col)


def hurwitz_test(gamma_prime, w_script) -> RouthResult:
    """Routh-Hurwitz verdict for det(s^2 I + 2 s Gamma' + W)."""
    return routh_array(characteristic_polynomial(gamma_prime, w_script))


def roots_verdict(roots, tol: float = 1e-9) -> Verdict:
    re = np.real(roots)
    if np.all(re < -tol):
        return Verdict.STABLE
    if np.any(re > tol):
        return Verdict.UNSTABLE
    return Verdict.INDETERMINATE


def quadratic_bound(gamma_prime, w_script, x):
    """Roots of s^2 + 2 b s + c with b = x.Gamma'.x and c = x.W.x for a unit vector x."""
    g = np.asarray(gamma_prime, dtype=float)
    g = np.diag(g) if g.ndim == 1 else g
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if abs(nrm - 1.0) > 1e-10:
        raise ConfigError("x must be a unit vector")
    b = float(x @ g @ x)
    c = float(x @ np.asarray(w_script, dtype=float) @ x)
    disc = c - b * b
    if disc >= 0:
        r = math.sqrt(disc)
        return complex(-b, r), complex(-b, -r)
    r = math.sqrt(-disc)
    return complex(-b + r, 0.0), complex(-b - r, 0.0)


# --- two-oscillator delay roots ------------------------------------------------------


def _channel_params(spec: NetworkSpec):
    if spec.n != 2:
        raise ConfigError("delay pole search needs exactly two oscillators")
    ell = float(spec.separations[0, 1])
    sig = spec.coupling_value(ell)
    w0 = spec.omega_p**2
    # (omega^2, sign of the delay term)
    return ell, ((w0 + sig, -1.0), (w0 - sig, +1.0))


def _char(z, gamma, ell, w2, sgn):
    return z * z + 2 * gamma * z + w2 + sgn * (2 * gamma / ell) * cmath.exp(-z * ell)


def _dchar(z, gamma, ell, w2, sgn):
    return 2 * z + 2 * gamma - sgn * 2 * gamma * cmath.exp(-z * ell)


def characteristic_delay(z, spec: NetworkSpec, channel: int) -> complex:
    """Channel characteristic function; channel 0 symmetric, 1 antisymmetric."""
    ell, chans = _channel_params(spec)
    w2, sgn = chans[channel]
    return _char(complex(z), spec.gamma, ell, w2, sgn)


def _newton(z, gamma, ell, w2, sgn, max_iter, tol):
    for _ in range(max_iter):
        try:
            f = _char(z, gamma, ell, w2, sgn)
        except OverflowError:
            return None
        if abs(f) < tol:
            return z
        d = _dchar(z, gamma, ell, w2, sgn)
        if d == 0:
            return None
        z = z - f / d
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            return None
    return z if abs(_char(z, gamma, ell, w2, sgn)) < tol else None


def delay_pole_search(
    spec: NetworkSpec,
    window: float | None = None,
    max_iter: int = 50,
    accept: float = 1e-10,
    newton_tol: float = 1e-12,
) -> DelaySearchResult:
    """Roots of z^2 + 2 gamma z + omega_pm^2 -/+ (2 gamma / l) exp(-z l) in both channels."""
    ell, chans = _channel_params(spec)
    gamma = spec.gamma
    window = 20.0 / ell if window is None else window
    found: list[tuple[complex, int]] = []
    failures = []
    runaway = False
    for ch, (w2, sgn) in enumerate(chans):
        seeds = []
        # runaway root: the channel function increases on z >= 0
        f0 = w2 + sgn * 2 * gamma / ell
        if f0 < 0:
            hi = 1.0
            while _char(complex(hi), gamma, ell, w2, sgn).real < 0:
                hi *= 2.0
            r = brentq(lambda x: _char(complex(x), gamma, ell, w2, sgn).real, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            seeds.append(complex(r))
        disc = cmath.sqrt(complex(gamma * gamma - w2))
        seeds += [-gamma + disc, -gamma - disc]
        # delay term expanded to second order in z l
        qa = 1.0 + sgn * gamma * ell
        qb = 2.0 * gamma * (1.0 - sgn)
        qc = w2 + sgn * 2.0 * gamma / ell
        if abs(qa) > 1e-12:
            d2 = cmath.sqrt(qb * qb - 4 * qa * qc)
            seeds += [(-qb + d2) / (2 * qa), (-qb - d2) / (2 * qa)]
        structured = len(seeds)
        for x in np.linspace(-5.0 / ell, 1.0 / ell, 7):
            for y in np.linspace(0.0, window, 21):
                seeds.append(complex(x, y))
        if gamma > 0:
            base = math.pi if sgn < 0 else 0.0
            k = 1
            while True:
                y = (2 * math.pi * k - base) / ell
                if y > window:
                    break
                x = math.log(2 * gamma / (ell * y * y)) / ell
                seeds.append(complex(x, y))
                k += 1
        for idx, s in enumerate(seeds):
            z = _newton(complex(s), gamma, ell, w2, sgn, max_iter, newton_tol)
            if z is None or abs(_char(z, gamma, ell, w2, sgn)) >= accept:
                if idx < structured:
                    failures.append((ch, complex(s)))
                continue
            if abs(z.imag) > window:
                continue
            if abs(z.imag) < 1e-12:
                z = complex(z.real, 0.0)
            for cand in (z, z.conjugate()):
                if not any(c == ch and abs(cand - q) < 1e-8 * max(1.0, abs(q)) for q, c in found):
                    found.append((cand, ch))
            if z.real > 1e-12 * max(1.0, abs(z)):
                runaway = True
    found.sort(key=lambda item: (item[0].real, item[0].imag))
    roots = np.array([q for q, _ in found], dtype=complex)
    channels = np.array([c for _, c in found], dtype=int)
    return DelaySearchResult(roots=roots, channels=channels, runaway=runaway, failures=failures)


# --- full report ----------------------------------------------------------------------


def analyze(spec: NetworkSpec, kappa_grid=None, kappa_ref: float | None = None) -> StabilityReport:
    omega2 = build_frequency_matrix(spec, warn=False)
    dom = diagonal_dominance(spec, kappa_grid)
    gp, _, ws = diagonalize_gamma(spec, kappa_ref)
    routh = hurwitz_test(gp, ws)
    if spec.n == 2:
        search = delay_pole_search(spec)
        roots, runaway = search.roots, search.runaway
    else:
        roots = companion_roots(gp, ws)
        roots = np.array(sorted(roots, key=lambda q: (q.real, q.imag)))
        runaway = bool(np.any(roots.real > 0))
    return StabilityReport(
        omega_p2_positive_definite=is_positive_definite(omega2),
        gamma_diagonally_dominant=dom.dominant,
        dominance_margin=dom.margin,
        dominance_worst_kappa=dom.worst_kappa,
        gamma_prime=gp,
        w_script=ws,
        w_script_positive_definite=is_positive_definite(ws),
        hurwitz=routh.verdict,
        roots=roots,
        runaway=runaway,
    )
