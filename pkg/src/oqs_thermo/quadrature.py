"""Half-line frequency integrals with UV regularisation.

Two regulator schemes are available:

``"asymptotic"``
    The large-frequency ``c / kappa`` tail is removed with the integrable
    subtraction ``c kappa / (kappa^2 + a^2)`` and added back as its
    exponentially-regulated value in the large-cutoff limit,
    ``c (ln(Lambda / a) - Euler gamma)``. Only the logarithmic cutoff
    dependence survives, and convergent integrals carry none at all.

``"exponential"``
    The integrand is multiplied by ``exp(-kappa / Lambda)`` literally. This
    matches time-domain simulations whose noise is filtered the same way,
    but leaves ``O(omega / Lambda)`` corrections in every quantity.

Integration is either adaptive (``scipy.integrate.quad_vec``) or a fixed
composite Gauss-Legendre rule evaluated in large vectorised batches. The
``"auto"`` method picks the adaptive rule for scalar problems and the
batched rule for matrix-valued ones, where a point-by-point callback is
too slow. Each serves as the other's independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad_vec

from .errors import ConfigError, NotConverged
from .specfun import EULER_GAMMA

REGULATORS = ("asymptotic", "exponential")
METHODS = ("auto", "adaptive", "gauss_legendre")


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-14
    regulator: str = "asymptotic"
    method: str = "auto"
    kappa_max: float | None = None
    split_points: Sequence[float] = field(default_factory=tuple)
    limit: int = 20000
    gl_order: int = 20
    gl_panel_width: float | None = None
    tail_factor: float = 2000.0
    max_panels: int = 200_000

    def __post_init__(self):
        if self.regulator not in REGULATORS:
            raise ConfigError(f"regulator must be one of {REGULATORS}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if not (self.rel_tol > 0 and self.abs_tol >= 0):
            raise ConfigError("tolerances must be positive")
        object.__setattr__(self, "split_points", tuple(float(p) for p in self.split_points))

    def with_(self, **changes) -> "QuadratureSpec":
        import dataclasses

        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Scales:
    """Frequency scales of a problem, used to place breakpoints and panels."""

    uv_cutoff: float
    subtraction: float
    features: tuple[float, ...]
    resolution: float
    oscillation: float | None = None


def log_tail_integral(uv_cutoff: float, a: float) -> float:
    """Large-cutoff value of int_0^inf kappa exp(-kappa/Lambda) / (kappa^2 + a^2)."""
    return math.log(uv_cutoff / a) - EULER_GAMMA


def _breakpoints(scales: Scales, quad: QuadratureSpec, upper: float) -> list[float]:
    pts = set()
    for w in scales.features:
        if w > 0:
            for fac in (0.5, 0.9, 1.0, 1.1, 2.0, 5.0):
                if fac * w < upper:
                    pts.add(fac * w)
    for p in quad.split_points:
        if 0 < p < upper:
            pts.add(p)
    return sorted(pts)


def _gl_nodes(a: float, b: float, width: float, order: int):
    npan = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, npan + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _gl_integrate(g: Callable, segments, quad: QuadratureSpec, scales: Scales, chunk: int = 20000):
    total = None
    for a, b, width in segments:
        nodes, weights = _gl_nodes(a, b, width, quad.gl_order)
        for s in range(0, nodes.size, chunk):
            vals = g(nodes[s : s + chunk])
            part = np.tensordot(weights[s : s + chunk], vals, axes=(0, 0))
            total = part if total is None else total + part
    return total


def _segments(points: list[float], lo: float, hi: float, fine: float, coarse: float, dense_until: float):
    """Panel widths: ``fine`` below ``dense_until``, then ``coarse``."""
    edges = [lo] + [p for p in points if lo < p < hi] + [hi]
    if lo < dense_until < hi and dense_until not in edges:
        edges = sorted(edges + [dense_until])
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        out.append((a, b, fine if b <= dense_until else coarse))
    return out


def half_line_integral(
    f: Callable[[np.ndarray], np.ndarray],
    quad: QuadratureSpec,
    scales: Scales,
    log_tail: np.ndarray | float | None = None,
) -> np.ndarray:
    """Regularised value of ``int_0^inf f(kappa) dkappa``.

    ``f`` maps a 1-D array of frequencies to an array whose first axis
    runs over frequency. ``log_tail`` is the coefficient ``c`` of the
    ``c / kappa`` large-frequency behaviour, or ``None`` for integrands
    that converge on their own.

    When ``scales.oscillation`` is set (networks with field-mediated cross
    terms) the subtracted integrand is truncated at ``kappa_max``. What is
    dropped decays like ``kappa^-3`` on the diagonal and ``sin(kappa l) /
    kappa^2`` off it, so the truncation error is ``O(gamma omega^2 /
    kappa_max^2)``, about 1e-8 with the default ``tail_factor``.
    """
    lam = scales.uv_cutoff
    a = scales.subtraction
    top_feature = max([w for w in scales.features if w > 0] + [a])

    if quad.regulator == "exponential":
        upper = quad.kappa_max or 60.0 * lam

        def g(k):
            k = np.asarray(k, dtype=float)
            vals = f(k)
            damp = np.exp(-k / lam).reshape((-1,) + (1,) * (vals.ndim - 1))
            return vals * damp

        add_back = 0.0
    else:
        upper = quad.kappa_max or quad.tail_factor * top_feature
        if log_tail is None:
            g = f
            add_back = 0.0
        else:
            c = np.asarray(log_tail, dtype=float)

            def g(k):
                k = np.asarray(k, dtype=float)
                vals = f(k)
                sub = (1.0 / (k + a * a / k)).reshape((-1,) + (1,) * (vals.ndim - 1))
                return vals - c * sub

            add_back = c * log_tail_integral(lam, a)

    pts = _breakpoints(scales, quad, upper)
    method = quad.method
    if method == "auto":
        method = "adaptive" if scales.oscillation is None else "gauss_legendre"
    if method == "adaptive":
        value = _adaptive(g, 0.0, upper, pts, quad)
        if quad.regulator == "asymptotic" and scales.oscillation is None:
            value = value + _adaptive(g, upper, math.inf, [], quad)
    else:
        fine = quad.gl_panel_width or scales.resolution
        coarse = top_feature if scales.oscillation is None else min(top_feature, 1.0 / scales.oscillation)
        # Cross terms of very distant pairs oscillate faster than is worth
        # resolving: their amplitude falls like 1/l, so cap the panel count.
        dense = 20.0 * top_feature
        fine = max(fine, dense / quad.max_panels)
        coarse = max(fine, coarse, upper / quad.max_panels)
        segs = _segments(pts, 0.0, upper, fine, coarse, dense)
        value = _gl_integrate(g, segs, quad, scales)
        if quad.regulator == "asymptotic" and scales.oscillation is None:
            # map [upper, inf) onto (0, 1] with kappa = upper / u
            def h(u):
                u = np.asarray(u, dtype=float)
                k = upper / u
                vals = g(k)
                jac = (upper / (u * u)).reshape((-1,) + (1,) * (vals.ndim - 1))
                return vals * jac

            value = value + _gl_integrate(h, [(1e-12, 1.0, 1.0 / 64)], quad, scales)
    return value + add_back


def _adaptive(g, a, b, points, quad: QuadratureSpec):
    def scalar(x):
        with np.errstate(over="ignore"):
            return g(np.array([x]))[0]

    kwargs = dict(epsabs=quad.abs_tol, epsrel=quad.rel_tol, limit=quad.limit, norm="max", full_output=True)
    if math.isfinite(b) and points:
        kwargs["points"] = points
    res, err, info = quad_vec(scalar, a, b, **kwargs)
    scale = float(np.max(np.abs(res))) if np.size(res) else 0.0
    allowed = max(quad.abs_tol, quad.rel_tol * scale)
    if info.status != 0 and err > 1e3 * allowed:
        raise NotConverged(f"adaptive quadrature on [{a}, {b}] stopped with error {err:.3e}")
    return np.asarray(res)
