import math

import numpy as np
import pytest

from oqs_thermo.closedform import SingleOscParams, conventional_heat_capacity, single_energy_closed
from oqs_thermo.equilibrium import (
    check_stable,
    covariance,
    energy_from_covariance,
    heat_capacity_direct,
    heat_capacity_fd,
    internal_energy,
    normal_mode_energies,
    thermo_point,
)
from oqs_thermo.errors import ConfigError, StepTooLarge, UnstableSpec
from oqs_thermo.kernels import BathState
from oqs_thermo.network import NetworkSpec, build_frequency_matrix
from oqs_thermo.quadrature import QuadratureSpec

# channel-decomposed integrals evaluated with mpmath.quad at 20 digits
PAIR_SXX = (1.0489293439384033, -0.09390710662661697)


def test_free_oscillator_limit():
    spec = NetworkSpec.single(1.0, 1e-6)
    cov = covariance(spec, BathState(2.0))
    ref = 1 / math.tanh(1.0) / 2.0
    assert abs(cov.sigma_xx[0, 0] - ref) < 1e-5


def test_pair_position_covariance_frozen(reference_pair, unit_bath):
    cov = covariance(reference_pair, unit_bath)
    assert abs(cov.sigma_xx[0, 0] - PAIR_SXX[0]) < 1e-8
    assert abs(cov.sigma_xx[0, 1] - PAIR_SXX[1]) < 1e-8
    for m in (cov.sigma_xx, cov.sigma_vv):
        assert np.allclose(m, m.T)
        assert np.linalg.eigvalsh(m).min() > 0


def test_two_integrators_agree(reference_pair, unit_bath):
    a = covariance(reference_pair, unit_bath, QuadratureSpec(method="adaptive", rel_tol=1e-10))
    b = covariance(reference_pair, unit_bath, QuadratureSpec(method="gauss_legendre"))
    assert np.allclose(a.sigma_xx, b.sigma_xx, atol=1e-8)
    assert np.allclose(a.sigma_vv, b.sigma_vv, atol=1e-8)


@pytest.mark.parametrize("beta", [0.3, 1.0, 2.0, 8.0])
def test_energy_matches_closed_form(beta):
    spec = NetworkSpec.single(1.0, 0.2)
    e = internal_energy(spec, BathState(beta))
    ref = single_energy_closed(SingleOscParams(beta, 0.2, 1.0, 100.0))
    assert abs(e - ref) < 1e-10 * abs(ref)


def test_energy_equals_covariance_trace(reference_pair, unit_bath):
    cov = covariance(reference_pair, unit_bath)
    e = internal_energy(reference_pair, unit_bath)
    assert abs(energy_from_covariance(reference_pair, cov) - e) < 1e-6 * abs(e)


def test_mass_scaling():
    light = NetworkSpec.single(1.0, 0.2, mass=1.0)
    heavy = NetworkSpec.single(1.0, 0.2, mass=3.0)
    bath = BathState(1.0)
    cl, ch = covariance(light, bath), covariance(heavy, bath)
    assert abs(ch.sigma_xx[0, 0] * 3.0 - cl.sigma_xx[0, 0]) < 1e-12
    assert abs(internal_energy(heavy, bath) - internal_energy(light, bath)) < 1e-12


def test_high_temperature_energy():
    spec = NetworkSpec.single(1.0, 0.2)
    beta = 1e-3
    assert abs(internal_energy(spec, BathState(beta)) * beta - 1) < 0.01


def test_direct_and_finite_difference_heat_capacity(reference_pair, unit_bath):
    single = NetworkSpec.single(1.0, 0.2)
    for spec in (single, reference_pair):
        c = heat_capacity_direct(spec, unit_bath)
        assert abs(heat_capacity_fd(spec, unit_bath) - c) < 1e-4 * c


def test_finite_difference_is_second_order():
    spec = NetworkSpec.single(1.0, 0.2)
    bath = BathState(1.0)
    exact = heat_capacity_direct(spec, bath)
    e1 = heat_capacity_fd(spec, bath, h=0.08, tol=1.0) - exact
    e2 = heat_capacity_fd(spec, bath, h=0.04, tol=1.0) - exact
    assert 3.5 < e1 / e2 < 4.5


def test_finite_difference_rejects_bad_steps():
    spec = NetworkSpec.single(1.0, 0.2)
    with pytest.raises(StepTooLarge):
        heat_capacity_fd(spec, BathState(1.0), h=0.5)
    with pytest.raises(ConfigError):
        heat_capacity_fd(spec, BathState(1.0), h=2.0)


def test_weak_coupling_heat_capacity():
    spec = NetworkSpec.single(1.0, 1e-5)
    for beta in (0.5, 2.0):
        c = heat_capacity_direct(spec, BathState(beta))
        assert abs(c - conventional_heat_capacity(beta, 1.0)) < 1e-3


def test_mode_energies():
    single = NetworkSpec.single(1.0, 0.2)
    bath = BathState(1.0)
    modes = normal_mode_energies(single, bath)
    assert abs(modes[0] - internal_energy(single, bath)) < 1e-9
    far = NetworkSpec.pair(1.0, 0.2, 0.0, 1e6)
    modes = normal_mode_energies(far, bath)
    assert abs(modes[0] - modes[1]) < 1e-9
    assert abs(modes[0] - internal_energy(single, bath)) < 1e-5
    ring = NetworkSpec.ring(3, 1.0, 1.0, 0.1, 0.1)
    tp = thermo_point(ring, bath)
    assert abs(tp.mode_energies.sum() - tp.energy) <= 1e-12 * abs(tp.energy)
    assert tp.heat_capacity > 0


def test_zero_temperature():
    spec = NetworkSpec.single(1.0, 0.2)
    assert heat_capacity_direct(spec, BathState.zero_temperature()) == 0.0
    e0 = internal_energy(spec, BathState.zero_temperature())
    assert abs(e0 - internal_energy(spec, BathState(1e4))) < 1e-6


def test_unstable_rejected():
    with pytest.raises(UnstableSpec):
        covariance(NetworkSpec.pair(1.0, 0.2, 1.5, 1.0), BathState(1.0))
    with pytest.raises(UnstableSpec):
        check_stable(NetworkSpec.pair(1.0, 0.4, 0.0, 0.5))


def _random_stable_spec(rng):
    while True:
        n = int(rng.integers(1, 5))
        wp = rng.uniform(0.5, 2.0)
        g = rng.uniform(0.02, 0.4)
        sigma = rng.uniform(-0.3, 0.3) * wp * wp
        spacing = rng.uniform(0.8, 3.0)
        spec = NetworkSpec.chain(n, spacing, wp, g, sigma)
        try:
            check_stable(spec)
        except UnstableSpec:
            continue
        return spec


def test_heat_capacity_positive_on_random_specs():
    rng = np.random.default_rng(3)
    quad = QuadratureSpec(method="gauss_legendre")
    for _ in range(25):
        spec = _random_stable_spec(rng)
        for beta in (0.2, 1.0, 50.0):
            assert heat_capacity_direct(spec, BathState(beta), quad) > 0


def test_extensivity_on_random_specs():
    rng = np.random.default_rng(5)
    quad = QuadratureSpec(method="gauss_legendre")
    for _ in range(10):
        spec = _random_stable_spec(rng)
        bath = BathState(rng.uniform(0.2, 5.0))
        tp = thermo_point(spec, bath, quad)
        assert abs(tp.mode_energies.sum() - tp.energy) <= 1e-12 * abs(tp.energy)
        w2 = np.linalg.eigvalsh(build_frequency_matrix(spec, warn=False))
        assert len(tp.mode_energies) == len(w2)
