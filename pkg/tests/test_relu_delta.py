import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cltlab.numerics import QuadratureSpec, RngStream, gauss_pdf, integrate_semi_infinite
from cltlab.dist_zoo import get_model
from cltlab.edgeworth import VacuousBoundError, charfn_sup
from cltlab.relu_delta import (
    appendix_e_integrals,
    delta_relu_mc,
    delta_relu_mc_coupled,
    delta_relu_profile,
    edgeworth_relu_prediction,
    gauss_relu_mean,
    kappa,
    relu_pointwise_bound,
    zeta2_bound,
    zeta2_mc,
    zeta2_mc_coupled,
)


class TestGaussReluMean:
    def test_frozen_values(self):
        assert gauss_relu_mean(0.0) == pytest.approx(1.0 / math.sqrt(2 * math.pi),
                                                     abs=1e-15)
        assert gauss_relu_mean(1.0) == pytest.approx(0.08331547058768629, abs=1e-14)
        assert gauss_relu_mean(-0.5) == pytest.approx(0.6977965574013061, abs=1e-14)

    def test_matches_quadrature(self):
        spec = QuadratureSpec()
        for t in (-2.0, 0.3, 1.7):
            q = integrate_semi_infinite(lambda s: (t + s - t) * gauss_pdf(t + s),
                                        0.0, spec)
            # E (Z - t)_+ = int_0^inf s phi(t+s) ds
            assert gauss_relu_mean(t) == pytest.approx(
                integrate_semi_infinite(lambda s: s * gauss_pdf(t + s), 0.0,
                                        spec).value, abs=1e-9)

    def test_asymptotes(self):
        assert gauss_relu_mean(30.0) == pytest.approx(0.0, abs=1e-15)
        assert gauss_relu_mean(-30.0) == pytest.approx(30.0, abs=1e-12)


class TestKappa:
    def test_frozen_values(self):
        assert kappa(0.0) == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert kappa(1.0) == pytest.approx(1.0 / 24.0, abs=1e-15)
        assert kappa(-1.0) == pytest.approx(0.625, abs=1e-15)

    def test_limits(self):
        assert kappa(1e9) == pytest.approx(0.0, abs=1e-12)
        assert kappa(-1e9) == pytest.approx(2.0 / 3.0, abs=1e-12)

    @given(st.floats(-30, 30))
    @settings(max_examples=50, deadline=None)
    def test_decreasing_positive(self, t):
        assert 0.0 < kappa(t) < 2.0 / 3.0 + 1e-12
        assert kappa(t) >= kappa(t + 0.5) - 1e-15

    def test_matches_quadrature(self):
        for t in (-5.0, -1.0, 0.0, 2.0):
            _, k_q = appendix_e_integrals(t)
            assert k_q == pytest.approx(kappa(t), abs=1e-9)


class TestTailIdentities:
    def test_hermite_tail_identity(self):
        for t in (-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0):
            h_q, _ = appendix_e_integrals(t)
            assert h_q == pytest.approx(-t * gauss_pdf(t), abs=1e-9)


class TestPrediction:
    def test_scaling(self):
        m = get_model("exp_centered").moments
        p100 = edgeworth_relu_prediction(m, 100, 1.0)
        p400 = edgeworth_relu_prediction(m, 400, 1.0)
        assert p100 == pytest.approx(2.0 * p400, rel=1e-12)

    def test_sign_follows_skewness(self):
        m = get_model("exp_centered").moments
        assert edgeworth_relu_prediction(m, 100, 1.0) > 0.0
        assert edgeworth_relu_prediction(m, 100, -1.0) < 0.0
        assert edgeworth_relu_prediction(m, 100, 0.0) == 0.0

    def test_symmetric_law_zero(self):
        m = get_model("uniform_sym").moments
        assert edgeworth_relu_prediction(m, 100, 1.3) == 0.0


class TestDeltaMc:
    def test_gaussian_null(self):
        g = get_model("gauss")
        est = delta_relu_mc(g, 10, 0.5, 200_000, RngStream(6, 0))
        assert est.abs_delta < 4.0 * est.se + 1e-3

    def test_reps_floor(self):
        with pytest.raises(ValueError):
            delta_relu_mc(get_model("gauss"), 10, 0.0, 100, RngStream(0, 0))

    def test_coupled_agrees_with_plain(self):
        ex = get_model("exp_centered")
        plain = delta_relu_mc(ex, 100, 1.0, 2_000_000, RngStream(6, 1))
        coupled = delta_relu_mc_coupled(ex, 100, 1.0, 2_000_000, RngStream(6, 2))
        assert coupled.delta == pytest.approx(
            plain.delta, abs=4.0 * (plain.se + coupled.se))
        assert coupled.se < plain.se / 5.0

    def test_profile_shares_pool(self):
        ex = get_model("exp_centered")
        prof = delta_relu_profile(ex, 50, [0.0, 0.5, 1.0], 100_000, RngStream(6, 3))
        single = delta_relu_mc(ex, 50, 0.5, 100_000, RngStream(6, 3))
        assert prof[1].delta == pytest.approx(single.delta, abs=1e-12)


class TestPointwiseBound:
    def test_kappa_weighting(self):
        ex = get_model("exp_centered")
        cs = charfn_sup(ex)
        b0 = relu_pointwise_bound(ex, 100, 0.0, char_sup=cs).value
        b1 = relu_pointwise_bound(ex, 100, 1.0, char_sup=cs).value
        assert b0 / b1 == pytest.approx(kappa(0.0) / kappa(1.0), rel=1e-12)

    def test_vacuous_flag(self):
        b = get_model("bernoulli:p=0.5")
        res = relu_pointwise_bound(b, 100, 0.0)
        assert res.vacuous
        with pytest.raises(VacuousBoundError):
            res.require_valid()

    def test_missing_beta4_refused(self):
        from cltlab.dist_zoo import MomentSet, UnivariateModel
        m = MomentSet(sigma2=1.0, mu3=0.0, beta3=2.0, beta4=None)
        model = UnivariateModel(name="heavy", moments=m,
                                sampler=lambda gen, k: gen.standard_normal(k),
                                char_fn=lambda b: complex(math.exp(-b * b / 2)))
        with pytest.raises(ValueError):
            relu_pointwise_bound(model, 100, 0.0)


class TestZeta2:
    def test_prediction_value(self):
        ex = get_model("exp_centered")
        pred, _ = zeta2_bound(ex, 400)
        assert pred == pytest.approx(0.006649038006690545, abs=1e-15)

    def test_mc_vs_coupled(self):
        ex = get_model("exp_centered")
        v1, e1 = zeta2_mc(ex, 100, 1_000_000, RngStream(7, 0))
        v2, e2 = zeta2_mc_coupled(ex, 100, 1_000_000, RngStream(7, 1))
        assert v1 == pytest.approx(v2, abs=4.0 * (e1 + e2))
        assert e2 < e1

    def test_mc_matches_half_square_identity(self):
        # int_0^inf (w - t)_+ dt = w_+^2 / 2, so the t-integral of the gap
        # equals E[w_+^2 - z_+^2]/2 up to truncation
        from cltlab import coupling
        ex = get_model("exp_centered")
        v, e = zeta2_mc_coupled(ex, 100, 2_000_000, RngStream(7, 2))
        w, z = coupling.coupled_sums(ex, 100, 2_000_000, RngStream(7, 2))
        direct = 0.5 * float(np.mean(np.clip(w, 0, None) ** 2
                                     - np.clip(z, 0, None) ** 2))
        assert v == pytest.approx(direct, abs=5.0 * e + 1e-4)

    def test_bound_vacuous_for_lattice(self):
        b = get_model("bernoulli:p=0.5")
        _, res = zeta2_bound(b, 100)
        assert res.vacuous
