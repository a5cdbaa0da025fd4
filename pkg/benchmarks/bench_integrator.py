"""Wall-clock comparison of the compiled and pure-Python trajectory integrators.

    python3 benchmarks/bench_integrator.py [--realizations R] [--steps N]

Both backends integrate the same noisy batch; the script reports the time
per backend, the speed-up and the largest difference between the results.
"""

import argparse
import math
import time

import numpy as np

from oqs_thermo.kernels import BathState
from oqs_thermo.langevin import NoiseSynthesizer, TimeGrid, compiled_available, make_rng
from oqs_thermo.langevin.ensemble import _run_batch
from oqs_thermo.network import NetworkSpec


def _time(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--realizations", type=int, default=50)
    parser.add_argument("--steps", type=int, default=4000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    cases = {
        "single": NetworkSpec.single(1.0, 0.2, uv_cutoff=10.0),
        "pair": NetworkSpec.pair(math.sqrt(1.04), 0.2, 0.5, 1.0, uv_cutoff=10.0),
        "ring of 4": NetworkSpec.ring(4, 1.0, 1.0, 0.1, 0.05, uv_cutoff=10.0),
    }
    backends = ["python"] + (["compiled"] if compiled_available() else [])
    if len(backends) == 1:
        print("compiled core not built; timing the Python backend only")
    grid = TimeGrid(0.025, args.steps)
    print(f"{'network':<10} {'backend':<9} {'seconds':>9} {'steps/s':>12} {'speed-up':>9} {'max diff':>9}")
    for label, spec in cases.items():
        synth = NoiseSynthesizer(spec, BathState(1.0), grid)
        charge = math.sqrt(spec.charge_sq) / spec.mass
        force = np.stack([charge * synth.draw(make_rng(0, r)) for r in range(args.realizations)])
        zeros = np.zeros((args.realizations, spec.n))
        results = {}
        for name in backends:
            results[name] = _time(lambda: _run_batch(spec, grid, force, zeros, zeros, 4, name), args.repeat)
        base = results["python"][0]
        for name, (secs, (xs, _)) in results.items():
            diff = float(np.abs(xs - results["python"][1][0]).max())
            rate = args.realizations * args.steps / secs
            print(f"{label:<10} {name:<9} {secs:9.3f} {rate:12.3g} {base / secs:9.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
