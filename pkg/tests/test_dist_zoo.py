import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cltlab.numerics import RngStream
from cltlab.dist_zoo import (
    MomentSet,
    get_model,
    get_multivariate_model,
    l4_l2_constant,
    list_models,
    project,
    sample_sums,
)


class TestMomentSet:
    def test_lyapunov_violation(self):
        with pytest.raises(ValueError):
            MomentSet(sigma2=4.0, mu3=0.0, beta3=1.0, beta4=20.0)

    def test_beta4_below_sigma4(self):
        with pytest.raises(ValueError):
            MomentSet(sigma2=2.0, mu3=0.0, beta3=3.0, beta4=1.0)

    def test_mu3_exceeds_beta3(self):
        with pytest.raises(ValueError):
            MomentSet(sigma2=1.0, mu3=5.0, beta3=2.0, beta4=9.0)

    def test_missing_fourth_moment_allowed(self):
        m = MomentSet(sigma2=1.0, mu3=0.5, beta3=2.0, beta4=None)
        assert m.beta4 is None
        assert m.sigma == 1.0


class TestCatalog:
    def test_exact_moments(self):
        gauss = get_model("gauss").moments
        assert gauss.beta3 == pytest.approx(2.0 * math.sqrt(2.0 / math.pi), abs=1e-14)
        assert gauss.beta4 == pytest.approx(3.0, abs=1e-14)

        ex = get_model("exp_centered").moments
        assert ex.sigma2 == 1.0
        assert ex.mu3 == 2.0
        assert ex.beta3 == pytest.approx(12.0 / math.e - 2.0, abs=1e-14)
        assert ex.beta4 == 9.0

        uni = get_model("uniform_sym").moments
        assert uni.sigma2 == pytest.approx(1.0, abs=1e-14)
        assert uni.mu3 == 0.0
        assert uni.beta3 == pytest.approx(9.0 / (4.0 * math.sqrt(3.0)), abs=1e-14)
        assert uni.beta4 == pytest.approx(9.0 / 5.0, abs=1e-14)

    def test_bernoulli(self):
        b = get_model("bernoulli:p=0.3")
        assert b.lattice
        m = b.moments
        # centered Bernoulli(p): sigma2 = p(1-p), mu3 = p(1-p)(1-2p)
        assert m.sigma2 == pytest.approx(0.21, abs=1e-14)
        assert m.mu3 == pytest.approx(0.21 * 0.4, abs=1e-14)

    def test_char_fn_values(self):
        ex = get_model("exp_centered")
        # |v(b)| = (1 + b^2)^{-1/2} for the centered exponential
        assert abs(ex.char_fn(1.0)) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
        uni = get_model("uniform_sym")
        b = 0.7
        assert complex(uni.char_fn(b)).real == pytest.approx(
            math.sin(math.sqrt(3) * b) / (math.sqrt(3) * b), abs=1e-12)
        g = get_model("gauss")
        assert abs(g.char_fn(2.0)) == pytest.approx(math.exp(-2.0), abs=1e-12)

    def test_unknown_models(self):
        with pytest.raises(KeyError):
            get_model("nosuch")
        with pytest.raises(KeyError):
            get_multivariate_model("nosuch:d=3")

    def test_listing(self):
        names = list_models()
        assert "exp_centered" in names
        assert any(n.startswith("gauss_iso") for n in names)

    def test_negated_flips_skew(self):
        ex = get_model("exp_centered")
        neg = ex.negated()
        assert neg.moments.mu3 == -2.0
        assert complex(neg.char_fn(0.5)) == pytest.approx(
            complex(np.conj(ex.char_fn(0.5))), abs=1e-14)


class TestSampling:
    def test_sum_sampler_matches_generic(self):
        # closed-form Gamma sum versus the chunked generic path
        ex = get_model("exp_centered")
        fast = sample_sums(ex, 50, 200_000, RngStream(3, 1))
        slow_model = type(ex)(
            name="exp_slow", moments=ex.moments, sampler=ex.sampler,
            char_fn=ex.char_fn, density=ex.density, support=ex.support,
            lattice=ex.lattice, sum_sampler=None)
        slow = sample_sums(slow_model, 50, 200_000, RngStream(3, 2))
        for arr in (fast, slow):
            assert abs(arr.mean()) < 0.01
            assert arr.var() == pytest.approx(1.0, abs=0.02)
        assert abs(np.mean(fast ** 3) - np.mean(slow ** 3)) < 0.05

    def test_standardization(self):
        b = get_model("bernoulli:p=0.3")
        w = sample_sums(b, 200, 100_000, RngStream(4, 0))
        assert abs(w.mean()) < 0.02
        assert w.var() == pytest.approx(1.0, abs=0.03)


class TestMultivariate:
    def test_projection_moments_exact(self):
        mv = get_multivariate_model("exp_prod:d=3")
        a = np.array([1.0, 0.0, 0.0])
        um = project(mv, a)
        m = um.moments
        assert m.sigma2 == pytest.approx(1.0, abs=1e-12)
        assert m.mu3 == pytest.approx(2.0, abs=1e-12)
        assert m.beta4 == pytest.approx(9.0, abs=1e-12)

    def test_projection_mixed_direction(self):
        mv = get_multivariate_model("exp_prod:d=2")
        a = np.array([1.0, 1.0]) / math.sqrt(2.0)
        um = project(mv, a)
        m = um.moments
        assert m.sigma2 == pytest.approx(1.0, abs=1e-12)
        # independent sums: mu3 of (X1+X2)/sqrt(2) is 2 * 2 / 2^{3/2}
        assert m.mu3 == pytest.approx(4.0 / 2.0 ** 1.5, abs=1e-12)

    def test_l4_l2_exp_prod(self):
        mv = get_multivariate_model("exp_prod:d=3")
        axes = list(np.eye(3))
        assert l4_l2_constant(mv, axes) == pytest.approx(9.0, abs=1e-12)

    def test_covariance_shapes(self):
        mv = get_multivariate_model("box_aniso:d=4")
        assert mv.covariance.shape == (4, 4)
        eigs = mv.eigenvalues
        assert np.all(np.diff(eigs) <= 1e-12)
        assert mv.trace_sigma2 == pytest.approx(float(np.trace(mv.covariance)),
                                                abs=1e-12)

    def test_sampler_covariance(self):
        mv = get_multivariate_model("box_aniso:d=3")
        x = mv.sampler(RngStream(9, 0).generator(), 400_000)
        emp = np.cov(x.T)
        assert np.allclose(emp, mv.covariance, atol=0.01)

    @given(st.integers(2, 6))
    @settings(max_examples=5, deadline=None)
    def test_gauss_iso_projection_is_normal(self, d):
        mv = get_multivariate_model(f"gauss_iso:d={d}")
        a = np.ones(d) / math.sqrt(d)
        um = project(mv, a)
        assert um.moments.sigma2 == pytest.approx(1.0, abs=1e-9)
        assert um.moments.mu3 == pytest.approx(0.0, abs=1e-9)
