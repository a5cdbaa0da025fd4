import math

import numpy as np
import pytest
from scipy.special import sici

from oqs_thermo.errors import ConfigError
from oqs_thermo.quadrature import EULER_GAMMA, QuadratureSpec, Scales, half_line_integral, log_tail_integral

SCALES = Scales(uv_cutoff=100.0, subtraction=1.0, features=(1.0,), resolution=0.2)


@pytest.mark.parametrize("method", ["adaptive", "gauss_legendre"])
def test_convergent_integral(method):
    quad = QuadratureSpec(method=method)
    val = half_line_integral(lambda k: np.exp(-k) * np.cos(k), quad, SCALES)
    assert abs(val - 0.5) < 1e-10


def test_log_tail_subtraction_is_exact_for_the_model_tail():
    quad = QuadratureSpec()
    c = 0.7
    val = half_line_integral(lambda k: c * k / (k * k + 1.0), quad, SCALES, log_tail=c)
    assert abs(val - c * (math.log(100.0) - EULER_GAMMA)) < 1e-12
    assert abs(log_tail_integral(100.0, 1.0) - (math.log(100.0) - EULER_GAMMA)) < 1e-15


def test_regulators_agree_up_to_inverse_cutoff():
    lam = 1000.0
    scales = Scales(uv_cutoff=lam, subtraction=1.0, features=(1.0,), resolution=0.2)
    f = lambda k: k / (k * k + 1.0)  # noqa: E731
    asym = half_line_integral(f, QuadratureSpec(), scales, log_tail=1.0)
    expo = half_line_integral(f, QuadratureSpec(regulator="exponential"), scales, log_tail=1.0)
    # exact exponentially damped value: -Ci(a) cos(a) - (Si(a) - pi/2) sin(a) with a = 1/lam
    a = 1.0 / lam
    si, ci = sici(a)
    exact = -ci * math.cos(a) - (si - math.pi / 2) * math.sin(a)
    assert abs(expo - exact) < 1e-9
    assert abs(asym - expo) < 5.0 / lam


def test_vector_valued_integrand():
    quad = QuadratureSpec()
    f = lambda k: np.stack([np.exp(-k), np.exp(-2 * k)], axis=-1)  # noqa: E731
    val = half_line_integral(f, quad, SCALES)
    assert np.allclose(val, [1.0, 0.5], rtol=1e-10)


def test_bad_options():
    with pytest.raises(ConfigError):
        QuadratureSpec(regulator="hard")
    with pytest.raises(ConfigError):
        QuadratureSpec(method="simpson")
    assert QuadratureSpec().with_(rel_tol=1e-6).rel_tol == 1e-6
