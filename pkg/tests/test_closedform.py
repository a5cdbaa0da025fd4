import math

import numpy as np
import pytest

from oqs_thermo.closedform import (
    SingleOscParams,
    check_two_osc_stable,
    conventional_energy,
    conventional_heat_capacity,
    critical_scales,
    high_temperature_heat_capacity,
    low_temperature_heat_capacity,
    single_energy_closed,
    single_heat_capacity_closed,
    two_osc_channel_terms,
    two_osc_heat_capacity,
    two_osc_integrand,
    two_osc_low_temperature_coefficient,
    weak_coupling_energy,
)
from oqs_thermo.equilibrium import heat_capacity_direct
from oqs_thermo.errors import ConfigError, UnstableSpec
from oqs_thermo.kernels import BathState
from oqs_thermo.network import NetworkSpec

# (beta, gamma, omega_p, cutoff) -> (E, C), from the same formulas evaluated with mpmath at 30 digits
FROZEN = {
    (1.0, 0.2, 1.0, 100.0): (1.246556423482199, 0.8728233647147514),
    (2.0, 0.2, 1.0, 100.0): (0.8468536716826262, 0.6771044278412823),
    (30.0, 0.2, 1.0, 100.0): (0.683761951849341, 0.014328027179015395),
    (0.5, 0.5, 1.0, 100.0): (2.348613334682197, 0.9122878804922648),
}


@pytest.mark.parametrize("args,ref", FROZEN.items())
def test_single_oscillator_frozen(args, ref):
    p = SingleOscParams(*args)
    assert abs(single_energy_closed(p) - ref[0]) < 1e-12 * abs(ref[0])
    assert abs(single_heat_capacity_closed(p) - ref[1]) < 1e-11 * abs(ref[1])


def test_weak_coupling_energy_limit():
    for beta in (0.5, 2.0, 7.0):
        p = SingleOscParams(beta, 1e-6, 1.0)
        assert abs(single_energy_closed(p) - weak_coupling_energy(p)) < 1e-5
        assert abs(weak_coupling_energy(p) - conventional_energy(beta, 1.0)) < 1e-4


def test_high_temperature_leading_term():
    p = SingleOscParams(1e-3, 0.2, 1.0)
    assert abs(single_energy_closed(p) * p.beta - 1.0) < 1e-2


def test_heat_capacity_asymptotes():
    hi = [SingleOscParams(b, 0.2, 1.0) for b in (1e-3, 1e-2)]
    errs = [abs(single_heat_capacity_closed(p) - high_temperature_heat_capacity(p)) for p in hi]
    assert errs[0] < errs[1] < 1e-4
    lo = [SingleOscParams(b, 0.2, 1.0) for b in (100.0, 1000.0)]
    rel = [abs(single_heat_capacity_closed(p) / low_temperature_heat_capacity(p) - 1) for p in lo]
    assert rel[1] < rel[0] < 1e-2


def test_low_temperature_within_ten_percent():
    p = SingleOscParams(30.0, 0.2, 1.0)
    assert abs(single_heat_capacity_closed(p) / low_temperature_heat_capacity(p) - 1) < 0.1


def test_asymptote_convergence_is_monotone():
    betas = np.geomspace(20.0, 2000.0, 11)
    rel = [abs(single_heat_capacity_closed(SingleOscParams(b, 0.2, 1.0)) / low_temperature_heat_capacity(SingleOscParams(b, 0.2, 1.0)) - 1) for b in betas]
    assert np.all(np.diff(rel) < 0)


def test_conventional_heat_capacity_values():
    assert abs(conventional_heat_capacity(1e-8, 1.0) - 1.0) < 1e-15
    assert abs(conventional_heat_capacity(2.0, 1.0) - 1 / math.sinh(1.0) ** 2) < 1e-15
    c10 = conventional_heat_capacity(10.0, 1.0)
    assert 0.9 < c10 / (100 * math.exp(-10.0)) < 1.1
    x = 0.1
    assert abs(conventional_heat_capacity(x, 1.0) - (1 - x * x / 12)) < 1e-6


@pytest.mark.parametrize("beta", [0.2, 0.7, 1.5, 3.0, 5.0])
def test_weak_coupling_collapse(beta):
    p = SingleOscParams(beta, 1e-5, 1.0)
    assert abs(single_heat_capacity_closed(p) - conventional_heat_capacity(beta, 1.0)) < 1e-3


def test_overdamped_branch_is_real_and_flagged():
    p = SingleOscParams(1.0, 1.5, 1.0)
    assert p.overdamped and p.extrapolated
    spec = NetworkSpec.single(1.0, 1.5)
    assert abs(single_heat_capacity_closed(p) - heat_capacity_direct(spec, BathState(1.0))) < 1e-9


def test_critical_scales():
    cs = critical_scales(0.2, 10.0, 0.08)
    assert abs(cs.gamma_c - 0.2) < 1e-15
    assert abs(cs.ell_c - 0.08) < 1e-15
    assert abs(cs.varsigma - 2.0) < 1e-15
    cs = critical_scales(0.05, 10.0, 0.08)
    assert abs(cs.varsigma - 2 * cs.gamma_c / 0.05) < 1e-14
    with pytest.raises(ConfigError):
        critical_scales(0.0, 1.0, 1.0)


def test_two_oscillator_integrand_nonnegative():
    rng = np.random.default_rng(11)
    count = 0
    while count < 10_000:
        wp = rng.uniform(0.3, 3.0)
        g = rng.uniform(0.01, 1.0)
        s = rng.uniform(-0.95, 0.95) * wp * wp
        ell = rng.uniform(0.05, 5.0)
        try:
            check_two_osc_stable(wp, g, s, ell)
        except UnstableSpec:
            continue
        k = rng.uniform(0.0, 20.0, size=1)
        beta = rng.uniform(0.05, 50.0)
        assert two_osc_channel_terms(k, wp, g, s, ell).min() >= 0
        assert two_osc_integrand(k, beta, wp, g, s, ell).min() >= 0
        count += 1


@pytest.mark.parametrize("beta", [0.3, 1.0, 4.0])
def test_two_oscillator_matches_matrix_route(reference_pair, beta):
    c_channel = two_osc_heat_capacity(beta, math.sqrt(1.04), 0.2, 0.5, 1.0)
    c_matrix = heat_capacity_direct(reference_pair, BathState(beta))
    assert abs(c_channel - c_matrix) < 1e-6 * c_matrix
    assert c_channel > 0


def test_two_oscillator_low_temperature_coefficient():
    wp = math.sqrt(1.04)
    k = two_osc_low_temperature_coefficient(wp, 0.2, 0.5, 1.0)
    c = two_osc_heat_capacity(2000.0, wp, 0.2, 0.5, 1.0)
    assert abs(c * 2000.0 / k - 1) < 1e-4


def test_two_oscillator_stability_guard():
    with pytest.raises(UnstableSpec):
        two_osc_heat_capacity(1.0, 1.0, 0.2, 1.2, 1.0)
    with pytest.raises(UnstableSpec):
        # symmetric channel pulled below the static field coupling
        two_osc_heat_capacity(1.0, 1.0, 0.2, -0.7, 1.0)
