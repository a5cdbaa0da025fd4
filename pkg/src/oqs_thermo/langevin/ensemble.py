"""Trajectory integration and Monte-Carlo ensembles of the delayed Langevin equations."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..equilibrium import CovariancePair, check_stable
from ..errors import ConfigError, StepUnstable, UnstableSpec
from ..kernels import BathState
from ..network import NetworkSpec, build_frequency_matrix
from ..stability import analyze, delay_pole_search
from .backend import resolve_backend
from .noise import NoiseRealization, NoiseSynthesizer, TimeGrid, make_rng


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    v: np.ndarray


def delay_terms(spec: NetworkSpec):
    """Pair lists ``(i, j, coef, delay)`` for the retarded field coupling."""
    n = spec.n
    if n == 1 or spec.gamma == 0:
        empty = np.zeros(0)
        return np.zeros(0, dtype=np.int_), np.zeros(0, dtype=np.int_), empty, empty
    ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    ell = spec.separations[ii, jj]
    return ii.astype(np.int_), jj.astype(np.int_), 2.0 * spec.gamma / ell, ell.astype(float)


def _run_batch(spec, grid, force, x0, v0, stride, backend):
    name, fn = resolve_backend(backend)
    pi, pj, coef, delay = delay_terms(spec)
    omega2 = np.ascontiguousarray(build_frequency_matrix(spec, warn=False))
    xs, vs, status = fn(
        np.array(x0, dtype=float, order="C"),
        np.array(v0, dtype=float, order="C"),
        np.ascontiguousarray(force, dtype=float),
        omega2,
        2.0 * spec.gamma,
        pi,
        pj,
        np.ascontiguousarray(coef),
        np.ascontiguousarray(delay),
        float(grid.dt),
        int(grid.steps),
        int(stride),
    )
    if np.any(status):
        raise StepUnstable("trajectory exceeded the overflow guard; the network is likely unstable")
    return xs, vs


def integrate_trajectory(
    spec: NetworkSpec,
    bath: BathState,
    noise: NoiseRealization | None,
    x0,
    v0,
    grid: TimeGrid | None = None,
    stride: int = 1,
    backend: str | None = None,
) -> Trajectory:
    """Integrate one trajectory; ``noise=None`` gives the deterministic motion on ``grid``.

    ``bath`` only matters through ``noise``; it is accepted so every entry
    point takes the same arguments.
    """
    if noise is not None:
        grid = noise.grid
        if noise.channels.shape != (2 * grid.steps + 1, spec.n):
            raise ConfigError("noise channels do not match the network size or grid")
        force = math.sqrt(spec.charge_sq) / spec.mass * noise.channels
    elif grid is None:
        raise ConfigError("a grid is needed when no noise is given")
    else:
        force = np.zeros((2 * grid.steps + 1, spec.n))
    grid.check(spec)
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (spec.n,))
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (spec.n,))
    xs, vs = _run_batch(spec, grid, force[None], x0[None], v0[None], stride, backend)
    return Trajectory(times=grid.times[::stride], x=xs[0], v=vs[0])


def relaxation_time(spec: NetworkSpec) -> float:
    """Inverse decay rate of the slowest mode (``inf`` without damping)."""
    g, w = spec.gamma, spec.omega_p
    if g == 0:
        return math.inf
    if spec.n == 1:
        rate = g - math.sqrt(g * g - w * w) if g > w else g
        return 1.0 / rate
    if spec.n == 2:
        roots = delay_pole_search(spec).roots
    else:
        roots = analyze(spec).roots
    top = float(np.max(roots.real))
    if top >= 0:
        raise UnstableSpec("slowest mode does not decay")
    return -1.0 / top


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Ensemble statistics of ``realizations`` independent trajectories.

    Time series are second moments about zero (the process has zero mean)
    at ``times``; ``*_se`` are Monte-Carlo standard errors. Plateau values
    are averages over ``plateau`` of per-trajectory time averages, so their
    errors account for time correlations.
    """

    realizations: int
    seed: int
    backend: str
    times: np.ndarray
    sigma_xx: np.ndarray
    sigma_xx_se: np.ndarray
    sigma_vv: np.ndarray
    sigma_vv_se: np.ndarray
    p_xi: np.ndarray
    p_xi_se: np.ndarray
    plateau: tuple
    plateau_xx: np.ndarray
    plateau_xx_se: np.ndarray
    plateau_vv: np.ndarray
    plateau_vv_se: np.ndarray
    stationarity_z: float
    relaxation_time: float
    relaxed: bool
    seed_ledger: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        return "RELAXED" if self.relaxed else "NON-RELAXED"


def _initial_state(init, rng, n):
    if init is None or (isinstance(init, str) and init == "rest"):
        return np.zeros(n), np.zeros(n)
    if isinstance(init, CovariancePair):
        x0 = rng.multivariate_normal(np.zeros(n), init.sigma_xx, method="eigh")
        v0 = rng.multivariate_normal(np.zeros(n), init.sigma_vv, method="eigh")
        return x0, v0
    x0, v0 = init
    return np.broadcast_to(np.asarray(x0, float), (n,)), np.broadcast_to(np.asarray(v0, float), (n,))


def _se(sum1, sum2, count):
    mean = sum1 / count
    var = np.maximum(sum2 / count - mean * mean, 0.0) * count / max(count - 1, 1)
    return mean, np.sqrt(var / count)


def ensemble_stats(
    spec: NetworkSpec,
    bath: BathState,
    grid: TimeGrid,
    R: int,
    seed: int,
    *,
    cutoff: float | None = None,
    initial=None,
    stride: int = 4,
    batch: int = 200,
    threads: int = 1,
    backend: str | None = None,
    plateau: tuple | None = None,
    lags: int = 20,
) -> TrajectoryEnsemble:
    """Run ``R`` trajectories and reduce them to covariance and power statistics.

    Trajectory ``r`` draws from the stream keyed by ``(seed, r)``, so the
    result does not depend on ``batch`` or ``threads``. ``initial`` is
    ``"rest"`` (default), a :class:`CovariancePair` to sample a Gaussian
    start, or an explicit ``(x0, v0)``.
    """
    if R < 2:
        raise ConfigError("need at least two realizations")
    check_stable(spec)
    grid.check(spec)
    name, _ = resolve_backend(backend)
    n = spec.n
    synth = NoiseSynthesizer(spec, bath, grid, cutoff)
    charge = math.sqrt(spec.charge_sq) / spec.mass
    times = grid.times[::stride]
    nrec = len(times)
    tau = relaxation_time(spec)
    total = grid.duration
    lo_default = max(5.0 * tau, 0.05 * total)
    hi = 0.95 * total
    window_ok = lo_default < 0.8 * hi
    if plateau is None:
        plateau = (lo_default, hi) if window_ok else (0.5 * total, hi)
    pmask = (times >= plateau[0]) & (times <= plateau[1])
    if pmask.sum() < 4:
        raise ConfigError("plateau window holds fewer than four record points")
    pidx = np.nonzero(pmask)[0]
    half = len(pidx) // 2
    ref_a, ref_b = pidx[0], pidx[half]
    nlag = max(1, min(lags, len(pidx) - half))
    lag_step = max(1, (len(pidx) - half) // nlag)
    lag_idx = np.arange(nlag) * lag_step

    def work(start):
        idx = range(start, min(start + batch, R))
        force = np.empty((len(idx), 2 * grid.steps + 1, n))
        x0 = np.empty((len(idx), n))
        v0 = np.empty((len(idx), n))
        for b, r in enumerate(idx):
            rng = make_rng(seed, r)
            force[b] = charge * synth.draw(rng)
            x0[b], v0[b] = _initial_state(initial, rng, n)
        xs, vs = _run_batch(spec, grid, force, x0, v0, stride, name)
        xi_rec = force[:, :: 2 * stride, :][:, :nrec] / charge if charge > 0 else np.zeros_like(xs)
        xx = np.einsum("rti,rtj->rtij", xs, xs)
        vv = np.einsum("rti,rtj->rtij", vs, vs)
        pw = math.sqrt(spec.charge_sq) * xi_rec * vs
        first, second = pidx[:half], pidx[half:]
        out = {
            "xx": (xx.sum(0), (xx * xx).sum(0)),
            "vv": (vv.sum(0), (vv * vv).sum(0)),
            "pw": (pw.sum(0), (pw * pw).sum(0)),
            "pxx": xx[:, pidx].mean(1),
            "pvv": vv[:, pidx].mean(1),
            "halves": xx[:, first].mean(1) - xx[:, second].mean(1),
            "corr_diff": xs[:, ref_a, 0:1] * xs[:, ref_a + lag_idx, 0] - xs[:, ref_b, 0:1] * xs[:, ref_b + lag_idx, 0],
        }
        return out

    starts = list(range(0, R, batch))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]

    def summed(key):
        s1 = parts[0][key][0].copy()
        s2 = parts[0][key][1].copy()
        for p in parts[1:]:
            s1 += p[key][0]
            s2 += p[key][1]
        return _se(s1, s2, R)

    def stacked(key):
        return np.concatenate([p[key] for p in parts], axis=0)

    sxx, sxx_se = summed("xx")
    svv, svv_se = summed("vv")
    pw, pw_se = summed("pw")
    pxx, pvv = stacked("pxx"), stacked("pvv")
    halves = stacked("halves")
    corr = stacked("corr_diff")
    root_r = math.sqrt(R)
    h_mean = halves.mean(0)
    h_se = halves.std(0, ddof=1) / root_r
    drift_ok = bool(np.all(np.abs(h_mean) <= 4.0 * h_se + 1e-300))
    c_se = corr.std(0, ddof=1) / root_r
    z = np.abs(corr.mean(0)) / np.where(c_se > 0, c_se, np.inf)
    return TrajectoryEnsemble(
        realizations=R,
        seed=int(seed),
        backend=name,
        times=times,
        sigma_xx=sxx,
        sigma_xx_se=sxx_se,
        sigma_vv=svv,
        sigma_vv_se=svv_se,
        p_xi=pw,
        p_xi_se=pw_se,
        plateau=(float(plateau[0]), float(plateau[1])),
        plateau_xx=pxx.mean(0),
        plateau_xx_se=pxx.std(0, ddof=1) / root_r,
        plateau_vv=pvv.mean(0),
        plateau_vv_se=pvv.std(0, ddof=1) / root_r,
        stationarity_z=float(z.max()),
        relaxation_time=tau,
        relaxed=bool(window_ok and drift_ok),
        seed_ledger={"master": int(seed), "first_index": 0, "count": int(R)},
    )
