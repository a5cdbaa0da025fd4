import math

import pytest

from oqs_thermo.kernels import BathState
from oqs_thermo.network import NetworkSpec

REF_OMEGA = math.sqrt(1.04)


@pytest.fixture
def reference_pair():
    """Two oscillators at unit separation with moderate damping and coupling."""
    return NetworkSpec.pair(REF_OMEGA, 0.2, 0.5, 1.0)


@pytest.fixture
def unit_bath():
    return BathState(1.0)
