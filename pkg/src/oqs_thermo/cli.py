"""Command-line front end.

Every subcommand reads an optional YAML or JSON config file, applies flag
overrides, and writes a CSV whose comment header records the code version,
a SHA-256 hash of the resolved configuration, the cutoff(s) and the seed.
Output is deterministic: the same configuration gives the same bytes.

Exit codes: 0 success, 2 unstable network, 3 numerical non-convergence,
4 configuration error.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np
import yaml

from . import __version__
from .balance import power_breakdown
from .closedform import (
    SingleOscParams,
    conventional_energy,
    conventional_heat_capacity,
    high_temperature_heat_capacity,
    low_temperature_heat_capacity,
    single_energy_closed,
    single_heat_capacity_closed,
    two_osc_heat_capacity,
)
from .equilibrium import heat_capacity_direct, internal_energy
from .errors import ConfigError, NotConverged, StepUnstable, UnstableSpec
from .kernels import BathState, g_had_freq
from .network import NetworkSpec, build_frequency_matrix
from .quadrature import QuadratureSpec
from .stability import analyze

EXIT_OK, EXIT_UNSTABLE, EXIT_NOT_CONVERGED, EXIT_CONFIG = 0, 2, 3, 4

COMMANDS = ("energy", "heat-capacity", "stability", "balance", "simulate", "spectrum", "closed-form", "sweep")

DEFAULTS: dict[str, Any] = {
    "network": {
        "n": 1,
        "omega_p": 1.0,
        "gamma": 0.2,
        "sigma": 0.0,
        "ell": 1.0,
        "geometry": "chain",
        "mass": 1.0,
        "uv_cutoff": 100.0,
    },
    "bath": {"beta": [1.0], "temperature": None},
    "quadrature": {"regulator": "asymptotic", "method": "auto", "rel_tol": 1e-11},
    "energy": {"lambdas": None},
    "simulation": {
        "dt": None,
        "duration": None,
        "realizations": 1000,
        "seed": 0,
        "stride": 4,
        "cutoff": 10.0,
        "backend": "auto",
    },
    "spectrum": {"omega_max": 10.0, "points": 201, "ells": [0.5, 1.0, 2.0], "temperatures": [0.5, 1.0, 2.0]},
    "sweep": {"parameter": "gamma", "values": [0.1, 0.2, 0.5], "quantity": "heat_capacity"},
    "threads": 1,
}

SWEEP_PARAMETERS = ("gamma", "sigma", "ell", "omega_p", "uv_cutoff", "beta")
SWEEP_QUANTITIES = ("heat_capacity", "energy")


# --- configuration ------------------------------------------------------------------


def _merge(base: dict, extra: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if key not in out:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(out[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {path + key!r} must be a mapping")
            out[key] = _merge(out[key], val, path + key + ".")
        else:
            out[key] = val
    return out


def load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path!r}: {exc}") from exc
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping at top level")
    return data


def _as_list(val) -> list[float]:
    if val is None:
        return []
    if isinstance(val, (int, float)):
        return [float(val)]
    return [float(v) for v in val]


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then command-line flags."""
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        cfg = _merge(cfg, load_config_file(args.config))
    net = cfg["network"]
    for flag, key in (("n", "n"), ("omega_p", "omega_p"), ("gamma", "gamma"), ("sigma", "sigma"), ("ell", "ell"), ("geometry", "geometry")):
        val = getattr(args, flag)
        if val is not None:
            net[key] = val
    if args.beta is not None:
        cfg["bath"]["beta"] = args.beta
        cfg["bath"]["temperature"] = None
    if args.temp is not None:
        cfg["bath"]["temperature"] = args.temp
        cfg["bath"]["beta"] = None
    if args.lambda_ is not None:
        if len(args.lambda_) == 1:
            net["uv_cutoff"] = args.lambda_[0]
        cfg["energy"]["lambdas"] = args.lambda_
    if args.regulator is not None:
        cfg["quadrature"]["regulator"] = args.regulator
    sim = cfg["simulation"]
    for flag, key in (("seed", "seed"), ("realizations", "realizations"), ("duration", "duration"), ("dt", "dt"), ("backend", "backend")):
        val = getattr(args, flag)
        if val is not None:
            sim[key] = val
    if args.parameter is not None:
        cfg["sweep"]["parameter"] = args.parameter
    if args.values is not None:
        cfg["sweep"]["values"] = args.values
    if args.quantity is not None:
        cfg["sweep"]["quantity"] = args.quantity
    threads = args.threads if args.threads is not None else os.environ.get("OQS_THREADS", cfg["threads"])
    try:
        cfg["threads"] = max(1, int(threads))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"threads must be an integer, got {threads!r}") from exc
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    net = cfg["network"]
    try:
        net["n"] = int(net["n"])
        for key in ("omega_p", "gamma", "sigma", "ell", "mass", "uv_cutoff"):
            net[key] = float(net[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad network parameter: {exc}") from exc
    if net["n"] < 1:
        raise ConfigError("n must be at least 1")
    if net["geometry"] not in ("chain", "ring"):
        raise ConfigError("geometry must be 'chain' or 'ring'")
    for key in ("omega_p", "ell", "mass", "uv_cutoff"):
        if not net[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if net["gamma"] < 0:
        raise ConfigError("gamma must be non-negative")
    bath = cfg["bath"]
    betas = _as_list(bath["beta"]) if bath.get("temperature") is None else [1.0 / t if t > 0 else math.inf for t in _as_list(bath["temperature"])]
    if not betas or any(not b > 0 for b in betas):
        raise ConfigError("need at least one positive beta (or non-negative temperature)")
    sweep = cfg["sweep"]
    if sweep["parameter"] not in SWEEP_PARAMETERS:
        raise ConfigError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    if sweep["quantity"] not in SWEEP_QUANTITIES:
        raise ConfigError(f"sweep quantity must be one of {SWEEP_QUANTITIES}")
    sim = cfg["simulation"]
    if int(sim["realizations"]) < 2:
        raise ConfigError("simulation needs at least two realizations")


def betas_of(cfg: dict) -> list[float]:
    bath = cfg["bath"]
    if bath.get("temperature") is not None:
        return [1.0 / t if t > 0 else math.inf for t in _as_list(bath["temperature"])]
    return _as_list(bath["beta"])


def build_spec(net: dict) -> NetworkSpec:
    common = {"mass": net["mass"], "uv_cutoff": net["uv_cutoff"]}
    n = net["n"]
    if n == 1:
        return NetworkSpec.single(net["omega_p"], net["gamma"], **common)
    if n == 2:
        return NetworkSpec.pair(net["omega_p"], net["gamma"], net["sigma"], net["ell"], **common)
    ctor = NetworkSpec.ring if net["geometry"] == "ring" else NetworkSpec.chain
    return ctor(n, net["ell"], net["omega_p"], net["gamma"], net["sigma"], **common)


def build_quad(q: dict) -> QuadratureSpec:
    return QuadratureSpec(regulator=q["regulator"], method=q["method"], rel_tol=float(q["rel_tol"]))


def config_hash(cfg: dict) -> str:
    """Hash of everything that can change the numbers; the worker count cannot."""
    cfg = {k: v for k, v in cfg.items() if k != "threads"}
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


# --- CSV output -------------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def render_csv(command: str, cfg: dict, columns: list[str], rows: list[list], lambdas, seed=None) -> str:
    buf = io.StringIO(newline="")
    buf.write(f"# oqs-thermo {__version__}\n")
    buf.write(f"# command: {command}\n")
    buf.write(f"# config_sha256: {config_hash(cfg)}\n")
    buf.write("# lambda: " + ";".join(fmt(v) for v in lambdas) + "\n")
    buf.write(f"# seed: {'none' if seed is None else seed}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pool_map(fn, items, threads: int):
    """Map preserving input order; a process pool when more than one worker is asked for."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# --- commands ---------------------------------------------------------------------


def _energy_row(job):
    net, quad, beta, lam = job
    spec = build_spec({**net, "uv_cutoff": lam})
    bath = BathState(beta)
    rows = [[beta, internal_energy(spec, bath, build_quad(quad)), lam, "quadrature"]]
    if spec.n == 1 and math.isfinite(beta):
        p = SingleOscParams(beta=beta, gamma=spec.gamma, omega_p=spec.omega_p, uv_cutoff=lam)
        rows.append([beta, single_energy_closed(p), lam, "closed_form"])
    return rows


def cmd_energy(cfg: dict):
    net = cfg["network"]
    lambdas = _as_list(cfg["energy"]["lambdas"]) or [net["uv_cutoff"]]
    jobs = [(net, cfg["quadrature"], b, lam) for lam in lambdas for b in betas_of(cfg)]
    rows = [r for part in _pool_map(_energy_row, jobs, cfg["threads"]) for r in part]
    # the canonical (vanishing-coupling) curve, summed over normal modes
    w = np.sqrt(np.linalg.eigvalsh(build_frequency_matrix(build_spec(net), warn=False)))
    for b in betas_of(cfg):
        e = float(np.sum(conventional_energy(b, w))) if math.isfinite(b) else 0.5 * float(np.sum(w))
        rows.append([b, e, math.inf, "conventional"])
    return ["beta", "energy", "lambda", "backend"], rows, lambdas, None


def _heat_row(job):
    net, quad, beta = job
    spec = build_spec(net)
    bath = BathState(beta)
    w = np.sqrt(np.linalg.eigvalsh(build_frequency_matrix(spec, warn=False)))
    c_eq = float(np.sum(conventional_heat_capacity(beta, w))) if math.isfinite(beta) else 0.0
    temp = 1.0 / beta
    rows = [[temp, heat_capacity_direct(spec, bath, build_quad(quad)), c_eq, "quadrature"]]
    if math.isfinite(beta) and spec.n == 1:
        p = SingleOscParams(beta=beta, gamma=spec.gamma, omega_p=spec.omega_p, uv_cutoff=spec.uv_cutoff)
        rows.append([temp, single_heat_capacity_closed(p), c_eq, "closed_form"])
    if math.isfinite(beta) and spec.n == 2 and spec.gamma > 0:
        c = two_osc_heat_capacity(beta, spec.omega_p, spec.gamma, net["sigma"], net["ell"], spec.uv_cutoff, build_quad(quad))
        rows.append([temp, c, c_eq, "channel"])
    return rows


def cmd_heat_capacity(cfg: dict):
    jobs = [(cfg["network"], cfg["quadrature"], b) for b in betas_of(cfg)]
    rows = [r for part in _pool_map(_heat_row, jobs, cfg["threads"]) for r in part]
    return ["temperature", "c_neq", "c_eq", "backend"], rows, [cfg["network"]["uv_cutoff"]], None


def stability_report(spec: NetworkSpec) -> tuple[dict, str]:
    rep = analyze(spec)
    data = {
        "stable": rep.stable,
        "runaway": rep.runaway,
        "hurwitz": rep.hurwitz.name,
        "omega_p2_positive_definite": rep.omega_p2_positive_definite,
        "gamma_diagonally_dominant": rep.gamma_diagonally_dominant,
        "dominance_margin": rep.dominance_margin,
        "w_script_positive_definite": rep.w_script_positive_definite,
        "roots": [[float(z.real), float(z.imag)] for z in rep.roots],
    }
    lines = [
        f"stable: {'yes' if rep.stable else 'no'}",
        f"runaway root: {'yes' if rep.runaway else 'no'}",
        f"Routh-Hurwitz verdict: {rep.hurwitz.name}",
        f"frequency matrix positive definite: {rep.omega_p2_positive_definite}",
        f"damping matrix diagonally dominant: {rep.gamma_diagonally_dominant} (margin {rep.dominance_margin:.6g})",
    ]
    if len(rep.roots):
        slow = max(rep.roots, key=lambda z: z.real)
        lines.append(f"slowest root: {slow.real:.10g} {'+' if slow.imag >= 0 else '-'} {abs(slow.imag):.10g}i")
    return data, "\n".join(lines) + "\n"


def cmd_stability(cfg: dict):
    spec = build_spec(cfg["network"])
    data, text = stability_report(spec)
    rows = [[z[0], z[1]] for z in data["roots"]]
    sys.stderr.write(text)
    sys.stderr.write("# machine: " + json.dumps({k: v for k, v in data.items() if k != "roots"}, sort_keys=True) + "\n")
    return ["re_root", "im_root"], rows, [spec.uv_cutoff], None, (not data["stable"])


def cmd_balance(cfg: dict):
    spec = build_spec(cfg["network"])
    quad = build_quad(cfg["quadrature"])
    rows = []
    for b in betas_of(cfg):
        pb = power_breakdown(spec, BathState(b), quad)
        for i in range(spec.n):
            rows.append([b, i, pb.p_gamma[i], pb.p_xi[i], pb.p_c[i], pb.residual[i]])
    return ["beta", "oscillator", "p_gamma", "p_xi", "p_c", "residual"], rows, [spec.uv_cutoff], None


def cmd_simulate(cfg: dict):
    from .langevin import TimeGrid, ensemble_stats, relaxation_time

    spec = build_spec(cfg["network"])
    sim = cfg["simulation"]
    cutoff = float(sim["cutoff"])
    spec = spec.replace(uv_cutoff=cutoff)
    beta = betas_of(cfg)[0]
    duration = sim["duration"]
    if duration is None:
        duration = 10.0 * relaxation_time(spec)
        if not math.isfinite(duration):
            raise ConfigError("undamped network: give simulation.duration explicitly")
    dt = sim["dt"] if sim["dt"] is not None else min(TimeGrid.max_step(spec), 0.025)
    grid = TimeGrid.for_duration(spec, float(duration), float(dt))
    seed = int(sim["seed"])
    ens = ensemble_stats(
        spec,
        BathState(beta),
        grid,
        int(sim["realizations"]),
        seed,
        cutoff=cutoff,
        stride=int(sim["stride"]),
        threads=cfg["threads"],
        backend=sim["backend"],
    )
    n = spec.n
    cols = ["t"]
    cols += [f"sxx_{i}{j}" for i in range(n) for j in range(n)]
    cols += [f"svv_{i}{j}" for i in range(n) for j in range(n)]
    cols += [f"pxi_{i}" for i in range(n)]
    cols += [f"sxx_se_{i}{j}" for i in range(n) for j in range(n)]
    cols += [f"svv_se_{i}{j}" for i in range(n) for j in range(n)]
    cols += [f"pxi_se_{i}" for i in range(n)]
    rows = []
    for k, t in enumerate(ens.times):
        rows.append(
            [t]
            + list(ens.sigma_xx[k].ravel())
            + list(ens.sigma_vv[k].ravel())
            + list(ens.p_xi[k])
            + list(ens.sigma_xx_se[k].ravel())
            + list(ens.sigma_vv_se[k].ravel())
            + list(ens.p_xi_se[k])
        )
    sys.stderr.write(f"status: {ens.status} (relaxation time {ens.relaxation_time:.6g}, backend {ens.backend})\n")
    return cols, rows, [cutoff], seed


def cmd_spectrum(cfg: dict):
    sp = cfg["spectrum"]
    omega = np.linspace(0.0, float(sp["omega_max"]), int(sp["points"]))
    rows = []
    for temp in _as_list(sp["temperatures"]):
        bath = BathState(1.0 / temp) if temp > 0 else BathState.zero_temperature()
        for ell in _as_list(sp["ells"]):
            vals = g_had_freq(omega, ell, bath)
            rows += [[w, ell, temp, v] for w, v in zip(omega, vals)]
    return ["omega", "ell", "temperature", "hadamard"], rows, [], None


def cmd_closed_form(cfg: dict):
    net = cfg["network"]
    if net["n"] != 1:
        raise ConfigError("closed forms exist for a single oscillator only (use heat-capacity for pairs)")
    rows = []
    for b in betas_of(cfg):
        if not math.isfinite(b):
            raise ConfigError("closed forms need a finite beta")
        p = SingleOscParams(beta=b, gamma=net["gamma"], omega_p=net["omega_p"], uv_cutoff=net["uv_cutoff"])
        rows.append(
            [
                b,
                single_energy_closed(p),
                single_heat_capacity_closed(p),
                high_temperature_heat_capacity(p),
                low_temperature_heat_capacity(p),
                conventional_heat_capacity(b, p.omega_p),
            ]
        )
    cols = ["beta", "energy", "heat_capacity", "c_high_t", "c_low_t", "c_conventional"]
    return cols, rows, [net["uv_cutoff"]], None


def _sweep_row(job):
    net, quad, param, value, beta, quantity = job
    if param == "beta":
        beta = value
    else:
        net = {**net, param: value}
    spec = build_spec(net)
    bath = BathState(beta)
    if quantity == "heat_capacity":
        val = heat_capacity_direct(spec, bath, build_quad(quad))
    else:
        val = internal_energy(spec, bath, build_quad(quad))
    return [value, beta, val]


def cmd_sweep(cfg: dict):
    sw = cfg["sweep"]
    betas = betas_of(cfg) if sw["parameter"] != "beta" else [math.nan]
    jobs = [
        (cfg["network"], cfg["quadrature"], sw["parameter"], float(v), b, sw["quantity"])
        for b in betas
        for v in _as_list(sw["values"])
    ]
    rows = _pool_map(_sweep_row, jobs, cfg["threads"])
    return [sw["parameter"], "beta", sw["quantity"]], rows, [cfg["network"]["uv_cutoff"]], None


HANDLERS = {
    "energy": cmd_energy,
    "heat-capacity": cmd_heat_capacity,
    "stability": cmd_stability,
    "balance": cmd_balance,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "closed-form": cmd_closed_form,
    "sweep": cmd_sweep,
}


# --- entry point ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON config file")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="worker count (env OQS_THREADS)")
    common.add_argument("--beta", type=float, nargs="+")
    common.add_argument("--temp", type=float, nargs="+")
    common.add_argument("--lambda", dest="lambda_", type=float, nargs="+", help="UV cutoff(s)")
    common.add_argument("--gamma", type=float)
    common.add_argument("--sigma", type=float)
    common.add_argument("--ell", type=float)
    common.add_argument("--omega-p", dest="omega_p", type=float)
    common.add_argument("--n", type=int)
    common.add_argument("--geometry", choices=("chain", "ring"))
    common.add_argument("--regulator", choices=("asymptotic", "exponential"))
    common.add_argument("--realizations", type=int)
    common.add_argument("--duration", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--backend", choices=("auto", "compiled", "python"))
    common.add_argument("--parameter", help="sweep parameter")
    common.add_argument("--values", type=float, nargs="+", help="sweep values")
    common.add_argument("--quantity", help="sweep quantity")
    parser = _Parser(prog="oqs-thermo", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    unstable = False
    try:
        cfg = resolve_config(args)
        cfg_for_hash = {**cfg, "command": args.command}
        result = HANDLERS[args.command](cfg)
        columns, rows, lambdas, seed = result[:4]
        if len(result) > 4:
            unstable = result[4]
        emit(render_csv(args.command, cfg_for_hash, columns, rows, lambdas, seed), args.out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (UnstableSpec, StepUnstable) as exc:
        sys.stderr.write(f"unstable: {exc}\n")
        return EXIT_UNSTABLE
    except NotConverged as exc:
        sys.stderr.write(f"not converged: {exc}\n")
        return EXIT_NOT_CONVERGED
    return EXIT_UNSTABLE if unstable else EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
