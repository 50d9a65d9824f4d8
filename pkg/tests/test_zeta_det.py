import math

import numpy as np
import pytest

from cusp_spectra.errors import DomainError, ModelMismatchError
from cusp_spectra.trace_expansion import ExpansionCoeffs, RelativeTrace, model_pair_trace
from cusp_spectra.zeta_det import (
    ZetaOptions,
    check_remainder,
    pole_part,
    relative_determinant,
    relative_zeta,
    relative_zeta_continued,
    synthetic_trace,
    synthetic_zeta,
    theta,
    zeta_prime_zero,
)

from oracles import model_pair_zeta, synthetic_zeta_prime_zero, synthetic_zeta_value


def constant_trace(h):
    return RelativeTrace(eval=lambda t: np.full_like(np.asarray(t, float), h), coeffs=ExpansionCoeffs(a2=h),
                         kernel_offset=h)


SYNTHETIC = [
    dict(a0=0.0, a10=0.3, a11=0.0, b=0.5, rate=1.0),
    dict(a0=0.8, a10=-0.2, a11=0.15, b=-0.4, rate=0.7),
    dict(a0=1.0, a10=0.0814, a11=0.1410, b=0.0833, rate=2.0),
]


class TestDirectMellin:
    def test_model_pair_at_two(self):
        expected = -math.log(4) / math.sqrt(4 * math.pi) * math.gamma(1.5) * 4 ** 1.5
        assert relative_zeta(model_pair_trace(4.0), 2.0) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("s", [1.2, 3.0, 2 + 1.5j])
    def test_model_pair_oracle(self, s):
        assert relative_zeta(model_pair_trace(3.0), s) == pytest.approx(model_pair_zeta(3.0, s), rel=1e-9)

    def test_constant_trace(self):
        assert relative_zeta(constant_trace(1), 2.5) == 0.0

    def test_linearity(self):
        r1, r2 = model_pair_trace(2.0), synthetic_trace(a10=0.3, b=0.2, h=1)
        assert relative_zeta(r1 + r2, 2.2) == pytest.approx(relative_zeta(r1, 2.2) + relative_zeta(r2, 2.2), rel=1e-12)

    def test_requires_convergent_half_plane(self):
        with pytest.raises(DomainError):
            relative_zeta(model_pair_trace(2.0), 1.0)


class TestContinuation:
    def test_overlap(self):
        trace = model_pair_trace(4.0)
        assert relative_zeta_continued(trace, 2.0) == pytest.approx(relative_zeta(trace, 2.0), rel=1e-8)

    @pytest.mark.parametrize("s", [1.1, 1.5, 3.0, 2.0 - 1.0j])
    def test_overlap_synthetic(self, s):
        trace = synthetic_trace(**SYNTHETIC[1])
        assert relative_zeta_continued(trace, s) == pytest.approx(relative_zeta(trace, s), rel=1e-9)

    def test_model_pair_zero(self):
        assert relative_zeta_continued(model_pair_trace(4.0), 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_gamma_oracle_is_constant(self):
        trace = synthetic_trace(b=1.0)  # R = exp(-t): zeta(s) = 1
        assert trace.coeffs.a2 == 1.0
        for s in (-0.2, 0.0, 0.3, 0.9, 2.0):
            assert relative_zeta_continued(trace, s) == pytest.approx(1.0, abs=1e-10)
        value, err = relative_zeta_continued(trace, -0.45, return_error=True)
        assert abs(value - 1.0) <= err < 1e-8

    @pytest.mark.parametrize("params", SYNTHETIC)
    @pytest.mark.parametrize("s", [0.0, 0.25, 0.75, 0.4 + 0.8j, 2.5])
    def test_synthetic_oracle(self, params, s):
        trace = synthetic_trace(**params)
        assert relative_zeta_continued(trace, s) == pytest.approx(synthetic_zeta_value(s, **params), abs=1e-9)

    @pytest.mark.parametrize("params", SYNTHETIC + [dict(a0=30.0, a10=3.0, a11=-2.0, b=1.0, rate=0.3)])
    @pytest.mark.parametrize("s", [-0.45, -0.3, -0.1 + 0.5j])
    def test_error_estimate_near_left_edge(self, params, s):
        # accuracy degrades towards Re s = -1/2, but the reported bound stays honest
        value, err = relative_zeta_continued(synthetic_trace(**params), s, return_error=True)
        assert abs(value - synthetic_zeta_value(s, **params)) <= max(err, 1e-12)
        assert err < (1e-3 if s == -0.45 else 1e-5)

    def test_closed_form_helper_matches_oracle(self):
        assert synthetic_zeta(0.3, **SYNTHETIC[1]) == pytest.approx(synthetic_zeta_value(0.3, **SYNTHETIC[1]).real)

    def test_kernel_offset(self):
        params = SYNTHETIC[0]
        trace = synthetic_trace(**params, h=1)
        assert trace.coeffs.a2 == pytest.approx(1 + params["b"])
        assert relative_zeta_continued(trace, 0.2) == pytest.approx(synthetic_zeta_value(0.2, **params).real, abs=1e-9)

    @pytest.mark.parametrize("s", [1.0, 0.5, -0.5, -1.0])
    def test_poles_and_range(self, s):
        with pytest.raises(DomainError):
            relative_zeta_continued(synthetic_trace(**SYNTHETIC[1]), s)

    def test_pole_part_model_pair(self):
        trace = model_pair_trace(4.0)
        assert pole_part(trace, 0.0) == pytest.approx(-2 * trace.coeffs.a10)

    def test_split_independence(self):
        trace = synthetic_trace(**SYNTHETIC[1])
        a = relative_zeta_continued(trace, 0.3, ZetaOptions(split=1.0))
        b = relative_zeta_continued(trace, 0.3, ZetaOptions(split=2.5))
        assert a == pytest.approx(b, abs=1e-10)


class TestRemainderCheck:
    def test_model_pair_passes(self):
        report = check_remainder(model_pair_trace(4.0))
        assert report["growth"] < 10

    def test_wrong_constant_detected(self):
        trace = model_pair_trace(4.0, "restricted")
        wrong = RelativeTrace(eval=trace.eval, coeffs=ExpansionCoeffs(), kernel_offset=0)
        with pytest.raises(ModelMismatchError) as info:
            check_remainder(wrong)
        assert info.value.worst_t <= 1e-4

    def test_wrong_offset_detected(self):
        trace = synthetic_trace(**SYNTHETIC[0], h=1)
        shifted = RelativeTrace(eval=trace.eval, coeffs=trace.coeffs, kernel_offset=0)
        with pytest.raises(ModelMismatchError):
            zeta_prime_zero(shifted)

    def test_theta_is_small(self):
        t = np.geomspace(1e-6, 1e-2, 9)
        assert np.all(np.abs(theta(model_pair_trace(2.0), t)) < np.sqrt(t))


class TestDerivativeAtZero:
    def test_model_pair(self):
        result = zeta_prime_zero(model_pair_trace(4.0))
        assert result.zeta_prime_at_zero == pytest.approx(math.log(4) / 2, abs=1e-9)
        assert result.determinant == pytest.approx(0.5, abs=1e-9)
        assert result.diagnostics["method_gap"] < 1e-6

    def test_constant_trace(self):
        result = zeta_prime_zero(constant_trace(1))
        assert result.zeta_prime_at_zero == pytest.approx(0.0, abs=1e-12)
        assert result.determinant == pytest.approx(1.0, abs=1e-12)

    def test_gamma_oracle(self):
        assert zeta_prime_zero(synthetic_trace(b=1.0)).determinant == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("params", SYNTHETIC)
    def test_synthetic_oracle(self, params):
        result = zeta_prime_zero(synthetic_trace(**params))
        expected = synthetic_zeta_prime_zero(**params)
        assert result.zeta_prime_at_zero == pytest.approx(expected, abs=1e-8)
        assert result.diagnostics["zeta_prime_0_finite_difference"] == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize("a,det", [(1.0, 1.0), (4.0, 0.5), (math.e ** 2, math.exp(-1))])
    def test_determinants(self, a, det):
        assert relative_determinant(model_pair_trace(a)) == pytest.approx(det, abs=1e-9)

    def test_multiplicative_over_cusps(self):
        two = relative_determinant(model_pair_trace(2.0) + model_pair_trace(3.0))
        assert two == pytest.approx(6 ** -0.5, rel=1e-9)

    def test_restricted_split_independent(self):
        trace = model_pair_trace(4.0, "restricted")
        a = zeta_prime_zero(trace, ZetaOptions(split=1.0)).zeta_prime_at_zero
        b = zeta_prime_zero(trace, ZetaOptions(split=3.0)).zeta_prime_at_zero
        assert a == pytest.approx(b, abs=1e-8)

    def test_serialisable(self):
        d = zeta_prime_zero(model_pair_trace(2.0)).as_dict()
        assert set(d) == {"zeta_prime_0", "determinant", "diagnostics"}
