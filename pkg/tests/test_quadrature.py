import math

import numpy as np
import pytest

from cusp_spectra.errors import ConvergenceError, DomainError
from cusp_spectra.quadrature import integrate


def test_polynomial_exact():
    value, err = integrate(lambda x: x ** 5 - 2 * x, 0.0, 2.0)
    assert value == pytest.approx(64 / 6 - 4, rel=1e-14)
    assert err < 1e-12


def test_gaussian_with_breakpoint():
    value, _ = integrate(lambda x: np.exp(-x * x), -8.0, 8.0, breakpoints=[0.0])
    assert value == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_endpoint_singularity():
    value, _ = integrate(lambda x: 1 / np.sqrt(x), 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, max_panels=4000)
    assert value == pytest.approx(2.0, rel=1e-8)


def test_complex_integrand():
    value, _ = integrate(lambda x: np.exp(1j * x), 0.0, math.pi)
    assert value == pytest.approx(2j, abs=1e-13)


def test_reversed_limits_change_sign():
    f = lambda x: np.cos(x)
    forward, _ = integrate(f, 0.0, 1.0)
    backward, _ = integrate(f, 1.0, 0.0)
    assert backward == pytest.approx(-forward, rel=1e-15)


def test_budget_exhaustion_reports_estimate():
    with pytest.raises(ConvergenceError) as info:
        integrate(lambda x: np.sin(1 / x), 1e-6, 1.0, epsabs=1e-15, epsrel=1e-15, max_panels=20)
    assert info.value.estimate is not None


def test_deterministic():
    f = lambda x: np.exp(-x) * np.sin(40 * x)
    assert integrate(f, 0.0, 3.0) == integrate(f, 0.0, 3.0)
