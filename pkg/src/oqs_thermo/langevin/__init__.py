"""Time-domain Langevin simulation of the oscillator network.

The hot loop lives in a compiled extension when it has been built and in
``_fallback`` otherwise; :data:`DEFAULT_BACKEND` says which one is active.
"""

from .analytic import (
    MemorySeries,
    bath_mode_memory,
    d2_rate_single,
    d_funcs_single,
    power_noise_time,
    regulated_hadamard_time,
)
from .backend import BACKENDS, DEFAULT_BACKEND, compiled_available, resolve_backend
from .ensemble import (
    Trajectory,
    TrajectoryEnsemble,
    delay_terms,
    ensemble_stats,
    integrate_trajectory,
    relaxation_time,
)
from .noise import NoiseRealization, NoiseSynthesizer, TimeGrid, make_rng, sample_noise

__all__ = [
    "BACKENDS",
    "DEFAULT_BACKEND",
    "MemorySeries",
    "NoiseRealization",
    "NoiseSynthesizer",
    "TimeGrid",
    "Trajectory",
    "TrajectoryEnsemble",
    "bath_mode_memory",
    "compiled_available",
    "d2_rate_single",
    "d_funcs_single",
    "delay_terms",
    "ensemble_stats",
    "integrate_trajectory",
    "make_rng",
    "power_noise_time",
    "regulated_hadamard_time",
    "relaxation_time",
    "resolve_backend",
    "sample_noise",
]
