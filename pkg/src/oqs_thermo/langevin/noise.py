"""Time grids and synthesis of the thermal field noise seen by the oscillators.

The noise is a stationary Gaussian process whose cross-spectrum between
sites ``i`` and ``j`` is the field's Hadamard function at their separation,
damped by ``exp(-|omega| / Lambda)`` so that its variance is finite. It is
drawn by spectral synthesis on a periodic grid at least twice as long as
the requested one, which keeps wrap-around correlations negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, SpectralNotPSD
from ..kernels import BathState, g_had_freq
from ..network import NetworkSpec

PSD_TOL = 1e-10
# exp(-omega_nyquist / Lambda) must fall below ~1e-8
NYQUIST_MARGIN = 18.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0 + k dt`` for ``k = 0..steps``."""

    dt: float
    steps: int
    t0: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if int(self.steps) < 1:
            raise ConfigError("steps must be at least 1")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def duration(self) -> float:
        return self.dt * self.steps

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.steps + 1)

    @property
    def sample_times(self) -> np.ndarray:
        """Half-step nodes where the integrator reads the force."""
        return self.t0 + 0.5 * self.dt * np.arange(2 * self.steps + 1)

    @staticmethod
    def max_step(spec: NetworkSpec) -> float:
        limit = 1.0 / (20.0 * spec.omega_p)
        if spec.n > 1:
            sep = spec.separations[~np.eye(spec.n, dtype=bool)]
            limit = min(limit, float(sep.min()) / 8.0)
        return limit

    def check(self, spec: NetworkSpec) -> None:
        """Raise ConfigError if the step is too coarse for ``spec``."""
        limit = self.max_step(spec)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigError(f"dt={self.dt:.4g} exceeds the limit {limit:.4g} for this network")

    @classmethod
    def for_duration(cls, spec: NetworkSpec, duration: float, dt: float | None = None) -> "TimeGrid":
        dt = cls.max_step(spec) if dt is None else dt
        grid = cls(dt=dt, steps=int(math.ceil(duration / dt)))
        grid.check(spec)
        return grid


@dataclass(frozen=True)
class NoiseRealization:
    """One draw of the field at every oscillator, sampled on the half-step grid.

    ``channels[k, i]`` is the field at oscillator ``i`` at time
    ``grid.sample_times[k]``; the force on the oscillator is ``e`` times it.
    """

    grid: TimeGrid
    channels: np.ndarray
    cutoff: float

    @property
    def on_grid(self) -> np.ndarray:
        return self.channels[::2]


def _fft_length(samples: int) -> int:
    return 1 << int(math.ceil(math.log2(2 * samples)))


class NoiseSynthesizer:
    """Precomputed spectral factors for repeated draws on one grid."""

    def __init__(self, spec: NetworkSpec, bath: BathState, grid: TimeGrid, cutoff: float | None = None):
        self.spec = spec
        self.grid = grid
        self.cutoff = float(spec.uv_cutoff if cutoff is None else cutoff)
        if not self.cutoff > 0:
            raise ConfigError("cutoff must be positive")
        h = 0.5 * grid.dt
        self.samples = 2 * grid.steps + 1
        self.length = _fft_length(self.samples)
        if math.pi / h < NYQUIST_MARGIN * self.cutoff:
            raise ConfigError(
                f"step too coarse for cutoff {self.cutoff:g}: need dt <= {2 * math.pi / (NYQUIST_MARGIN * self.cutoff):.3g}"
            )
        resolve = [spec.omega_p] + ([] if bath.is_zero_temperature else [1.0 / bath.beta])
        spacing = 2.0 * math.pi / (self.length * h)
        if spacing > 0.25 * min(resolve):
            raise ConfigError("grid too short to resolve the oscillator and thermal frequencies")
        omega = spacing * np.arange(self.length // 2 + 1)
        self.omega = omega
        spectrum = g_had_freq(omega[:, None, None], spec.separations[None], bath)
        spectrum = spectrum * np.exp(-omega / self.cutoff)[:, None, None]
        lam, vec = np.linalg.eigh(spectrum)
        scale = np.abs(lam).max(axis=1)
        bad = lam.min(axis=1) < -PSD_TOL * np.maximum(scale, 1e-300)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise SpectralNotPSD(f"spectral matrix not positive semidefinite at omega={omega[k]:.6g}")
        root = vec * np.sqrt(np.clip(lam, 0.0, None))[:, None, :]
        # amplitude per bin so that sum over bins reproduces (1/2pi) int S domega
        self.factors = root * math.sqrt(1.0 / (self.length * h))

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        """One realization, shape ``(samples, n)``."""
        bins = self.factors.shape[0]
        n = self.spec.n
        re = rng.standard_normal((bins, n))
        im = rng.standard_normal((bins, n))
        z = (re + 1j * im) / math.sqrt(2.0)
        # the zero and Nyquist bins of a real series are real
        z[0] = re[0]
        z[-1] = re[-1]
        amp = np.einsum("kij,kj->ki", self.factors, z)
        series = np.fft.irfft(self.length * amp, n=self.length, axis=0)
        return series[: self.samples]


def make_rng(seed, index: int = 0) -> np.random.Generator:
    """Counter-style stream keyed by ``(seed, index)``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def sample_noise(
    spec: NetworkSpec,
    bath: BathState,
    grid: TimeGrid,
    rng_seed,
    cutoff: float | None = None,
) -> NoiseRealization:
    """Draw one field realization at every oscillator on ``grid``."""
    synth = NoiseSynthesizer(spec, bath, grid, cutoff)
    return NoiseRealization(grid=grid, channels=synth.draw(make_rng(rng_seed)), cutoff=synth.cutoff)
