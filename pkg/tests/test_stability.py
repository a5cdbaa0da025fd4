import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oqs_thermo.errors import ConfigError
from oqs_thermo.network import NetworkSpec
from oqs_thermo.stability import (
    Verdict,
    analyze,
    characteristic_delay,
    characteristic_polynomial,
    companion_roots,
    delay_pole_search,
    diagonal_dominance,
    diagonalize_gamma,
    hurwitz_test,
    quadratic_bound,
    roots_verdict,
    routh_array,
)


def _random_pd(rng, n, lo=0.05):
    a = rng.normal(size=(n, n))
    return a @ a.T + lo * np.eye(n)


def test_dominance_trivial_cases(reference_pair):
    assert diagonal_dominance(NetworkSpec.single(1.0, 0.2)).dominant
    res = diagonal_dominance(reference_pair)
    assert res.dominant and res.margin > 0


def test_dominance_margin_for_tight_clusters():
    grid = np.linspace(0.01, 10.0, 400)
    pair = [diagonal_dominance(NetworkSpec.chain(2, s, 1.0, 0.2), grid).margin for s in (1.0, 0.1, 0.01)]
    assert pair[0] > pair[1] > pair[2] > 0
    assert pair[2] < 1e-5
    # the middle oscillator of three has two near-unit neighbours
    res = diagonal_dominance(NetworkSpec.chain(3, 0.01, 1.0, 0.2), grid)
    assert not res.dominant and res.worst_row == 1
    assert abs(res.margin + 0.2) < 1e-4


def test_diagonalize_gamma():
    gp, v, ws = diagonalize_gamma(NetworkSpec.single(1.0, 0.2))
    assert np.array_equal(v, np.eye(1))
    assert abs(gp[0] - 0.2) < 1e-15
    _, v, _ = diagonalize_gamma(NetworkSpec.pair(1.0, 0.2, 0.1, 1.0))
    rot = np.abs(v) - np.full((2, 2), 1 / math.sqrt(2))
    assert np.abs(rot).max() < 1e-12
    rng = np.random.default_rng(0)
    spec = NetworkSpec(1.0, 0.2, positions=rng.uniform(-2, 2, size=(4, 3)))
    gp, v, ws = diagonalize_gamma(spec)
    assert np.abs(v @ v.T - np.eye(4)).max() < 1e-12
    assert np.allclose(ws, ws.T)


def test_hurwitz_single_oscillator():
    assert hurwitz_test([0.2], [[1.0]]).verdict is Verdict.STABLE
    assert hurwitz_test([0.2], [[-1.0]]).verdict is Verdict.UNSTABLE
    assert np.allclose(characteristic_polynomial([0.2], [[1.0]]), [1.0, 0.4, 1.0])


def test_hurwitz_random_positive_definite_n3():
    rng = np.random.default_rng(1)
    for _ in range(20):
        gp = rng.uniform(0.05, 1.0, size=3)
        w = _random_pd(rng, 3)
        assert hurwitz_test(gp, w).verdict is Verdict.STABLE
        assert roots_verdict(companion_roots(gp, w)) is Verdict.STABLE


def test_characteristic_polynomial_matches_roots():
    rng = np.random.default_rng(2)
    for n in (2, 3, 7):
        gp = rng.uniform(0.05, 1.0, size=n)
        w = _random_pd(rng, n)
        coeffs = characteristic_polynomial(gp, w)
        for r in companion_roots(gp, w):
            assert abs(np.polyval(coeffs, r)) < 1e-8 * np.abs(coeffs).max() * max(1.0, abs(r)) ** (2 * n)


def test_hurwitz_agrees_with_companion_roots():
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 200:
        n = int(rng.integers(1, 5))
        gp = rng.uniform(-0.3, 1.0, size=n)
        w = rng.normal(size=(n, n))
        w = 0.5 * (w + w.T) + rng.uniform(-0.5, 2.0) * np.eye(n)
        roots = companion_roots(gp, w)
        if np.min(np.abs(roots.real)) < 1e-6:
            continue
        assert hurwitz_test(gp, w).verdict is roots_verdict(roots)
        checked += 1


def test_marginal_routh_row_is_reported():
    # s^4 + 2 s^2 + 1 has a double pair on the imaginary axis
    res = routh_array([1.0, 0.0, 2.0, 0.0, 1.0])
    assert res.verdict is Verdict.INDETERMINATE
    assert res.degenerate_row == 1
    with pytest.raises(ConfigError):
        routh_array([0.0, 0.0])


def test_quadratic_bound_examples():
    s1, s2 = quadratic_bound([0.2], [[1.0]], [1.0])
    assert abs(s1 - complex(-0.2, math.sqrt(0.96))) < 1e-15
    assert s2 == s1.conjugate()
    s1, s2 = quadratic_bound([2.0], [[1.0]], [1.0])
    assert s1.imag == 0 and s2.imag == 0 and s1.real < 0 and s2.real < 0
    with pytest.raises(ConfigError):
        quadratic_bound([0.2], [[1.0]], [2.0])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_quadratic_bound_negative_real_part(n, seed):
    rng = np.random.default_rng(seed)
    gp = rng.uniform(0.01, 2.0, size=n)
    w = _random_pd(rng, n)
    x = rng.normal(size=n)
    x /= np.linalg.norm(x)
    for s in quadratic_bound(gp, w, x):
        assert s.real < 0


def test_delay_search_without_damping():
    spec = NetworkSpec.pair(1.0, 0.0, 0.3, 1.0)
    res = delay_pole_search(spec)
    expected = sorted([complex(0, math.sqrt(1.3)), complex(0, -math.sqrt(1.3)), complex(0, math.sqrt(0.7)), complex(0, -math.sqrt(0.7))], key=lambda z: z.imag)
    got = sorted(res.roots, key=lambda z: z.imag)
    assert len(got) == 4
    for a, b in zip(got, expected):
        assert abs(a - b) < 1e-12
    assert not res.runaway


def test_delay_search_reference_pair(reference_pair):
    res = delay_pole_search(reference_pair)
    assert not res.runaway
    assert res.roots.size >= 4
    assert np.all(res.roots.real < 0)
    for z, ch in zip(res.roots, res.channels):
        assert abs(characteristic_delay(z, reference_pair, int(ch))) < 1e-10
    # slowest pair of roots sits near the undamped modes shifted by the coupling
    slow = res.roots[np.argmax(res.roots.real)]
    assert -0.3 < slow.real < 0


@pytest.mark.parametrize("sigma,ell", [(1.5, 1.0), (3.0, 1.0), (1.1, 5.0), (1.01, 100.0)])
def test_runaway_root_when_coupling_exceeds_stiffness(sigma, ell):
    spec = NetworkSpec.pair(1.0, 0.2, sigma, ell)
    res = delay_pole_search(spec)
    assert res.runaway
    real_pos = [z for z in res.roots if z.imag == 0 and z.real > 0]
    assert len(real_pos) == 1
    z = real_pos[0]
    assert abs(characteristic_delay(z, spec, 1)) < 1e-10
    assert abs(cmath.phase(z)) == 0


def test_delayed_term_stiffens_the_slow_channel():
    # omega_p^2 < sigma < omega_p^2 + 2 gamma / l: no real runaway root
    spec = NetworkSpec.pair(1.0, 0.2, 1.1, 1.0)
    res = delay_pole_search(spec)
    assert not any(z.imag == 0 and z.real > 0 for z in res.roots)
    assert characteristic_delay(0.0, spec, 1).real > 0


def test_symmetric_channel_runaway_at_short_range():
    # 2 gamma / l above omega_+^2 pushes the fast channel through zero
    spec = NetworkSpec.pair(1.0, 0.2, 0.0, 0.3)
    res = delay_pole_search(spec)
    assert res.runaway
    z = max(res.roots, key=lambda q: q.real)
    assert z.imag == 0 and abs(characteristic_delay(z, spec, 0)) < 1e-10


def test_analyze_report(reference_pair):
    rep = analyze(reference_pair)
    assert rep.stable and rep.hurwitz_pass and rep.omega_p2_positive_definite
    assert rep.gamma_diagonally_dominant and np.all(rep.gamma_prime > 0)
    assert np.all(rep.roots.real < 0)
    bad = analyze(NetworkSpec.pair(1.0, 0.2, 1.5, 1.0))
    assert not bad.stable and bad.runaway and not bad.omega_p2_positive_definite
    ring = analyze(NetworkSpec.ring(4, 1.0, 1.0, 0.1, 0.05))
    assert ring.stable
    assert np.all(ring.roots.real < 0)
