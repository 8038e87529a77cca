"""End-to-end acceptance checks.

Each test exercises one headline guarantee of the toolkit at full scale and
prints a single PASS/FAIL line (run with -s to see them inline).
"""

import math

import numpy as np
import pytest

from cltlab.numerics import QuadratureSpec, RngStream, gauss_cdf, gauss_pdf, integrate_1d
from cltlab.dist_zoo import get_model, get_multivariate_model, l4_l2_constant
from cltlab.mc_oracle import SignedAtom, aggregate_signed_measure, pooled_sums
from cltlab.edgeworth import (
    VacuousBoundError,
    charfn_sup,
    edgeworth_cdf,
    nonuniform_bound,
)
from cltlab import relu_delta, ridge_repr, normball, norm_moments


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    tail = f"  [{detail}]" if detail else ""
    print(f"acceptance {num:02d} {name}: {'PASS' if ok else 'FAIL'}{tail}")
    assert ok, f"{name}: {detail}"


T_GRID = (-5.0, -2.0, -1.0, 0.0, 1.0, 2.0, 5.0)


def test_01_tail_integral_identities():
    worst = 0.0
    for t in T_GRID:
        h_q, k_q = relu_delta.appendix_e_integrals(t)
        worst = max(worst, abs(h_q + t * gauss_pdf(t)),
                    abs(k_q - relu_delta.kappa(t)))
    _report(1, "tail-integral identities", worst < 1e-9, f"max err {worst:.2e}")


def test_02_complex_relu_identity():
    worst = 0.0
    bound_ok = True
    for z in np.linspace(-20.0, 20.0, 81):
        z = float(z)
        rhs = complex(math.cos(z) - 1.0, math.sin(z) - z)
        worst = max(worst, abs(ridge_repr.relu_complex_identity(z) - rhs))
        bound_ok &= abs(rhs) <= min(2 * abs(z), z * z / 2) + 1e-12
    _report(2, "complex ReLU identity", worst < 1e-9 and bound_ok,
            f"max err {worst:.2e}")


def test_03_ridge_reconstruction():
    act = ridge_repr.ActivationModel(
        h=lambda t: np.exp(-0.5 * np.asarray(t) ** 2),
        h_fourier=lambda a: complex(math.exp(-0.5 * a * a)
                                    / math.sqrt(2 * math.pi)),
        a=1.0, c_h=0.0, u_radius=12.0)
    worst = 0.0
    for d in (1, 2):
        fm = ridge_repr.gaussian_fourier_function(d)
        for v in np.linspace(-3.0, 3.0, 25):
            x = np.full(d, float(v) / math.sqrt(d))
            ref = math.exp(-0.5 * float(x @ x))
            worst = max(worst,
                        abs(ridge_repr.reconstruct_ridge(fm, x) - ref),
                        abs(ridge_repr.reconstruct_activation(fm, act, x) - ref))
    _report(3, "ridge/activation reconstruction", worst < 1e-3,
            f"max err {worst:.2e}")


def test_04_weighted_t_integrals():
    spec = QuadratureSpec()
    worst_exact = 0.0
    dominated = True
    for ny in (0.5, 1.0, 2.0):
        for h in (0.5, 1.0, 2.0):
            i1, i2, i3 = normball.holder_t_integrals(ny, h)
            worst_exact = max(worst_exact,
                              abs(normball.indicator_t_integral(ny, h, spec) - i2))

            def radius_factor(t, h=h):
                return (2.0 * h * math.log(1.0 / t)) ** 1.5

            def restricted(t, ny=ny, h=h):
                if ny * ny >= 8.0 * h * math.log(1.0 / t):
                    return 0.0
                return radius_factor(t, h)

            q1 = integrate_1d(restricted, 1e-12, 1.0 - 1e-14, spec).value
            q3 = integrate_1d(radius_factor, 1e-12, 1.0 - 1e-14, spec).value
            dominated &= q1 <= i1 + 1e-9 and q3 <= i3 + 1e-9
    _report(4, "weighted t-integrals", worst_exact < 1e-10 and dominated,
            f"max exact err {worst_exact:.2e}")


def _loglog_slope(ns, vals):
    return float(np.polyfit(np.log(ns), np.log(vals), 1)[0])


def test_05_relu_gap_rate():
    # one shared uniform pool per model couples the estimates across n, so
    # the n-to-n ratios are far better determined than the individual gaps
    from cltlab import coupling
    ns = [100, 400, 1600]
    reps = 10_000_000
    ex = get_model("exp_centered")
    z, pools = coupling.coupled_sums_multi(ex, ns, reps, RngStream(42, 0))
    ref = np.clip(z - 1.0, 0.0, None).mean()
    resid = []
    for n in ns:
        gap = float(np.clip(pools[n] - 1.0, 0.0, None).mean() - ref)
        pred = relu_delta.edgeworth_relu_prediction(ex.moments, n, 1.0)
        resid.append(abs(gap - pred))
    slope_ex = _loglog_slope(ns, resid)

    uni = get_model("uniform_sym")
    z, pools = coupling.coupled_sums_multi(uni, ns, reps, RngStream(42, 1))
    ref = np.clip(z - 1.0, 0.0, None).mean()
    gaps = [abs(float(np.clip(pools[n] - 1.0, 0.0, None).mean() - ref))
            for n in ns]
    slope_uni = _loglog_slope(ns, gaps)
    _report(5, "ReLU gap decay rates", slope_ex <= -0.8 and slope_uni <= -0.8,
            f"slopes {slope_ex:.2f}, {slope_uni:.2f}")


def test_06_second_order_integral():
    ns = (100, 400, 1600)
    reps = 10_000_000
    ex = get_model("exp_centered")
    m = ex.moments
    cs = charfn_sup(ex)
    c_hats, resids, errs, units = [], [], [], []
    for i, n in enumerate(ns):
        mc, err = relu_delta.zeta2_mc_coupled(ex, n, reps, RngStream(43, i))
        pred, _ = relu_delta.zeta2_bound(ex, n, char_sup=cs)
        resids.append(abs(mc - pred))
        errs.append(err)
        # fourth-moment width at this n, and the constant it would demand
        units.append(m.beta4 / (m.sigma2 ** 2 * n) / 6.0)
        c_hats.append(max(resids[-1] - 4.0 * err, 0.0) / units[-1])
    c_fit = max(c_hats + [1.0])
    i400 = ns.index(400)
    landed = resids[i400] <= c_fit * units[i400] + 4.0 * errs[i400]
    landed &= relu_delta.zeta2_bound(ex, 400, char_sup=cs)[0] == \
        pytest.approx(0.006649038006690545, abs=1e-12)
    hi, lo = max(c_hats), min(c_hats)
    stable = hi == 0.0 or hi <= 3.0 * max(lo, hi / 3.0)
    _report(6, "second-order gap integral", landed and stable,
            f"fitted constants {['%.3g' % c for c in c_hats]}")


def test_07_edgeworth_cdf_accuracy():
    reps = 10_000_000
    ex = get_model("exp_centered")
    m = ex.moments
    xs = np.arange(-3.0, 3.5, 1.0)
    c_hats = {}
    for i, n in enumerate((100, 200, 400)):
        w = np.sort(pooled_sums(ex, n, reps, RngStream(44, i)))
        c_n = 0.0
        for x in xs:
            emp = float(np.searchsorted(w, x, side="right")) / reps
            dev = abs(emp - edgeworth_cdf(m, n, float(x)))
            unit = m.beta4 / (m.sigma2 ** 2 * n * (1.0 + abs(x)) ** 4)
            c_n = max(c_n, dev / unit)
        c_hats[n] = c_n
    stable = max(c_hats.values()) <= 3.0 * min(c_hats.values())

    n = 200
    w = np.sort(pooled_sums(ex, n, reps, RngStream(44, 1)))
    emp0 = float(np.searchsorted(w, 0.0, side="right")) / reps
    corr = edgeworth_cdf(m, n, 0.0) - gauss_cdf(0.0)
    sharper = abs(emp0 - gauss_cdf(0.0)) > 2.0 * abs(emp0 - edgeworth_cdf(m, n, 0.0))
    corr_ok = corr == pytest.approx(0.009403159725795938, abs=1e-12)
    _report(7, "Edgeworth CDF accuracy", stable and sharper and corr_ok,
            f"fitted constants {['%.3g' % c_hats[k] for k in sorted(c_hats)]}")


def test_08_norm_identity_constant():
    exact_ok = (norm_moments.c_d(2) == pytest.approx(math.pi, abs=1e-10)
                and norm_moments.c_d(3) == pytest.approx(4.0, abs=1e-10))
    spec = norm_moments.SphereRidgeSpec(3, 1_000_000, RngStream(45, 0))
    est = norm_moments.norm_via_ridge(np.array([1.0, 0.0, 0.0]), spec)
    ridge_ok = abs(est.value - 1.0) <= 3.0 * est.err
    bracket_ok = all(2.0 <= norm_moments.c_d(d) / math.sqrt(d) <= 4.0
                     for d in range(2, 101))
    _report(8, "norm ridge identity and c_d", exact_ok and ridge_ok and bracket_ok,
            f"ridge err {abs(est.value - 1.0):.2e} (se {est.err:.2e})")


def test_09_expected_norm_gap():
    ns = (50, 200, 800)
    reps = 10_000_000
    mv = get_multivariate_model("exp_prod:d=5")
    gaps = []
    for i, n in enumerate(ns):
        est = norm_moments.expected_norm_gap(mv, n, reps, RngStream(46, i))
        gaps.append(est.abs_delta)
    slope = _loglog_slope(ns, gaps)

    # fit the constant against the moment-ratio part of the bound, which is
    # the only n-decaying piece at this scale
    axes = list(np.eye(5))
    L = l4_l2_constant(mv, axes)
    unit = (2.0 * relu_delta.kappa(0.0) * norm_moments.c_d(5)
            * math.sqrt(float(mv.eigenvalues[0])))
    c_hats = [g * n / (unit * L) for g, n in zip(gaps, ns)]
    stable = max(c_hats) <= 3.0 * min(c_hats)
    dominates = all(max(c_hats) * unit * L / n >= g
                    for g, n in zip(gaps, ns))
    dominates &= all(norm_moments.norm_gap_bound(mv, n).value >= g
                     for g, n in zip(gaps, ns))
    _report(9, "expected-norm gap", slope <= -0.8 and stable and dominates,
            f"slope {slope:.2f}, constants {['%.3g' % c for c in c_hats]}")


def test_10_signed_measure_and_levelsets():
    atoms = [SignedAtom(2.0, 0.5), SignedAtom(-3.0, 0.25)]
    agg_ok = (aggregate_signed_measure(atoms) == pytest.approx(1.75)
              and aggregate_signed_measure([]) == 0.0
              and aggregate_signed_measure(atoms + atoms)
              == pytest.approx(3.5))

    from cltlab.mc_oracle import estimate_delta_levelset
    ex = get_model("exp_centered")
    dt = 0.02
    t_grid = list(np.arange(-8.0, 8.0, dt))
    rows = estimate_delta_levelset(ex, lambda x: x, 100, t_grid, 400_000,
                                   RngStream(47, 0))
    integral = float(np.sum([r[1] for r in rows]) * dt)
    # f(x) = x has zero mean under both laws, so the level-set integral of
    # the probability differences must vanish within MC noise
    level_ok = abs(integral) < 2e-3
    _report(10, "signed-measure aggregation and level sets",
            agg_ok and level_ok, f"level-set integral {integral:.2e}")


def test_11_lattice_vacuity():
    b = get_model("bernoulli:p=0.5")
    cs = charfn_sup(b)
    paths = [nonuniform_bound(b, 100, 1.0, char_sup=cs),
             relu_delta.relu_pointwise_bound(b, 100, 0.0, char_sup=cs),
             relu_delta.zeta2_bound(b, 100, char_sup=cs)[1]]
    ok = cs.vacuous and all(p.vacuous for p in paths)
    for p in paths:
        try:
            p.require_valid()
            ok = False
        except VacuousBoundError:
            pass
    _report(11, "lattice vacuity propagation", ok,
            f"sup |v| = {cs.sup_abs_v:.6f}")
