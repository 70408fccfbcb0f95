import math

import numpy as np
import pytest

from creatorsim import (
    KMR,
    LinearTwitter,
    Metric,
    MetricEstimate,
    ModelInstance,
    TypeSpace,
    closed_form_ucq_homogeneous,
    engagement_eq_homogeneous,
    estimate_re,
    estimate_ucq,
    estimate_uw,
    expected_max_from_cdf,
    investment_engagement_cdf,
    investment_eq,
    ks_distance,
    limit_engagement_cdf,
    random_eq,
)
from creatorsim._stats import RunningMoments
from creatorsim.metrics import E_LIMIT_TOP, homogeneous_quality_cdf


def linear(alpha, gamma=0.0, types=(1.0,)):
    return ModelInstance(LinearTwitter(alpha, gamma), TypeSpace.of(types))


class TestEstimateContainers:
    def test_metric_estimate_validation(self):
        with pytest.raises(ValueError):
            MetricEstimate(0.0, -1.0, 10)
        with pytest.raises(ValueError):
            MetricEstimate(0.0, 0.0, 0)

    def test_running_moments_merge_matches_direct(self):
        rng = np.random.default_rng(0)
        data = rng.normal(3.0, 2.0, size=997)
        merged = RunningMoments()
        for chunk in np.array_split(data, 7):
            part = RunningMoments()
            part.add_samples(chunk)
            merged.merge(part)
        est = merged.estimate()
        assert est.mean == pytest.approx(data.mean(), abs=1e-12)
        assert est.stderr == pytest.approx(data.std(ddof=1) / math.sqrt(len(data)),
                                           abs=1e-12)


class TestClosedFormCdfs:
    def test_investment_engagement_cdf(self):
        assert investment_engagement_cdf(1.5) == pytest.approx(0.5)
        assert investment_engagement_cdf(0.3) == 0.0
        assert investment_engagement_cdf(2.0) == 1.0

    def test_limit_cdf_boundaries(self):
        for eps in (0.0, 0.01, 0.3):
            assert limit_engagement_cdf(1.0 + eps, eps) == 0.0
            assert limit_engagement_cdf((1.0 + eps) * E_LIMIT_TOP, eps) \
                == pytest.approx(1.0, abs=1e-12)

    def test_limit_cdf_interior_value(self):
        assert limit_engagement_cdf(math.exp(0.5), 0.0) == pytest.approx(math.log(2.0))

    def test_limit_cdf_monotone(self):
        v = np.linspace(0.5, 2.5, 500)
        out = np.asarray(limit_engagement_cdf(v, 0.01))
        assert np.all(np.diff(out) >= -1e-12)


class TestExpectedMax:
    def test_investment_pair_value(self):
        got = expected_max_from_cdf(investment_engagement_cdf, 2, 2.0,
                                    breakpoints=(1.0, 2.0))
        assert got == pytest.approx(5.0 / 3.0, abs=1e-6)

    def test_degenerate_point_mass(self):
        c = 0.7

        def step(v):
            v = np.asarray(v, dtype=float)
            out = (v >= c).astype(float)
            return out if out.ndim else float(out)

        for P in (1, 2, 5):
            got = expected_max_from_cdf(step, P, 1.0, breakpoints=(c,))
            assert got == pytest.approx(c, abs=1e-6)

    def test_limit_engagement_below_investment(self):
        got = expected_max_from_cdf(lambda v: limit_engagement_cdf(v, 0.0), 2,
                                    E_LIMIT_TOP, breakpoints=(1.0, E_LIMIT_TOP))
        assert got < 5.0 / 3.0
        assert got == pytest.approx(1.616, abs=2e-3)

    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError, match="monotone"):
            expected_max_from_cdf(lambda v: np.abs(np.sin(3 * np.asarray(v))), 2, 3.0)

    def test_rejects_cdf_not_reaching_one(self):
        with pytest.raises(ValueError, match="reaches"):
            expected_max_from_cdf(lambda v: 0.5 * np.clip(v, 0, 1), 2, 1.0)


class TestClosedFormUcq:
    def test_costless_gaming_matches_investment_value(self):
        assert closed_form_ucq_homogeneous(1.0, 0.0, 1.0, 2) \
            == pytest.approx(2.0 / 3.0, abs=1e-9)

    def test_costly_gaming_value(self):
        # hand integral: 1/3 - (1 - 0.125)/4.5 = 5/36
        got = closed_form_ucq_homogeneous(1.0, 0.5, 1.0, 2)
        assert got == pytest.approx(5.0 / 36.0, abs=1e-8)
        assert got < 2.0 / 3.0

    def test_strictly_decreasing_in_gamma(self):
        for P in (2, 3):
            vals = [closed_form_ucq_homogeneous(0.5, g, 1.0, P)
                    for g in (0.0, 0.2, 0.4, 0.6, 0.8)]
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_engagement_never_beats_investment(self):
        inv = expected_max_from_cdf(lambda x: np.clip(x, 0, 1), 2, 1.0)
        for g in (0.0, 0.1, 0.5, 0.9):
            e = closed_form_ucq_homogeneous(0.5, g, 1.0, 2)
            if g == 0.0:
                assert e == pytest.approx(inv, abs=1e-9)
            else:
                assert e < inv

    def test_cross_validated_against_monte_carlo(self):
        inst = linear(-0.9, 0.0)
        s = engagement_eq_homogeneous(inst, 2)
        est = estimate_ucq(inst, Metric.ENGAGEMENT, s, 2, 40000,
                           np.random.default_rng(0))
        exact = closed_form_ucq_homogeneous(-0.9, 0.0, 1.0, 2)
        assert abs(est.mean - exact) <= 3 * est.stderr


class TestEstimators:
    def test_random_rec_trivial_values(self):
        inst = linear(1.0, 0.0)
        s = random_eq(inst, 2)
        rng = np.random.default_rng(1)
        assert estimate_ucq(inst, Metric.RANDOM, s, 2, 5000, rng).mean == 0.0
        assert estimate_re(inst, Metric.RANDOM, s, 2, 5000, rng).mean == 0.0
        assert estimate_uw(inst, Metric.RANDOM, s, 2, 5000, rng).mean == 1.0

    def test_investment_re_is_expected_max_uniform(self):
        inst = linear(1.0, 0.0)
        s = investment_eq(inst, 2)
        est = estimate_re(inst, Metric.INVESTMENT, s, 2, 100000,
                          np.random.default_rng(2))
        assert abs(est.mean - 2.0 / 3.0) <= 0.01

    def test_engagement_re_homogeneous(self):
        # engagement on the support is 2 * gaming - 1, uniform on [1, 3]
        inst = linear(1.0, 0.0)
        s = engagement_eq_homogeneous(inst, 2)
        est = estimate_re(inst, Metric.ENGAGEMENT, s, 2, 100000,
                          np.random.default_rng(3))
        assert abs(est.mean - 7.0 / 3.0) <= 0.02

    def test_uw_zero_on_zero_utility_support(self):
        inst = linear(1.0, 0.0)
        s = engagement_eq_homogeneous(inst, 2)
        est = estimate_uw(inst, Metric.ENGAGEMENT, s, 2, 20000,
                          np.random.default_rng(4))
        assert abs(est.mean) <= 1e-9

    def test_mc_matches_closed_form_over_grid(self):
        for alpha in (-0.5, 0.0, 1.0):
            for gamma in (0.0, 0.3, 0.6):
                inst = linear(alpha, gamma)
                s = engagement_eq_homogeneous(inst, 2)
                seed = int(1000 + alpha * 10 + gamma * 100)
                est = estimate_ucq(inst, Metric.ENGAGEMENT, s, 2, 30000,
                                   np.random.default_rng(seed))
                exact = closed_form_ucq_homogeneous(alpha, gamma, 1.0, 2)
                assert abs(est.mean - exact) <= 3 * max(est.stderr, 1e-4), \
                    (alpha, gamma)

    def test_re_engagement_at_least_investment_homogeneous(self):
        for alpha in (-0.5, 0.0, 1.0):
            for gamma in (0.0, 0.3, 0.6):
                inst = linear(alpha, gamma)
                seed = int(2000 + alpha * 10 + gamma * 100)
                re_e = estimate_re(inst, Metric.ENGAGEMENT,
                                   engagement_eq_homogeneous(inst, 2), 2, 30000,
                                   np.random.default_rng(seed))
                re_i = estimate_re(inst, Metric.INVESTMENT,
                                   investment_eq(inst, 2), 2, 30000,
                                   np.random.default_rng(seed + 1))
                slack = 3 * (re_e.stderr + re_i.stderr)
                assert re_e.mean >= re_i.mean - slack, (alpha, gamma)

    def test_uw_engagement_below_random_for_positive_baseline(self):
        for alpha in (0.5, 1.0):
            inst = linear(alpha, 0.2)
            uw_e = estimate_uw(inst, Metric.ENGAGEMENT,
                               engagement_eq_homogeneous(inst, 2), 2, 20000,
                               np.random.default_rng(5))
            uw_r = estimate_uw(inst, Metric.RANDOM, random_eq(inst, 2), 2, 20000,
                               np.random.default_rng(6))
            assert uw_e.mean < uw_r.mean - 3 * (uw_e.stderr + uw_r.stderr)

    def test_kmr_engagement_keeps_unit_offset(self):
        # watch-time engagement includes the +1 shift; estimators never renormalize
        inst = ModelInstance(KMR(1.0, 0.0), TypeSpace.of([1.0]))
        s = random_eq(inst, 2)
        est = estimate_re(inst, Metric.RANDOM, s, 2, 2000, np.random.default_rng(7))
        assert est.mean == 1.0  # origin content has engagement exactly 1

    def test_threads_shard_and_merge(self):
        inst = linear(1.0, 0.0)
        s = engagement_eq_homogeneous(inst, 2)
        one = estimate_ucq(inst, Metric.ENGAGEMENT, s, 2, 20000,
                           np.random.default_rng(8), threads=1)
        four = estimate_ucq(inst, Metric.ENGAGEMENT, s, 2, 20000,
                            np.random.default_rng(8), threads=4)
        assert four.n == one.n == 20000
        assert abs(four.mean - one.mean) <= 4 * (one.stderr + four.stderr)

    def test_threads_deterministic_for_fixed_shard_count(self):
        inst = linear(1.0, 0.0)
        s = engagement_eq_homogeneous(inst, 2)
        a = estimate_ucq(inst, Metric.ENGAGEMENT, s, 2, 9999,
                         np.random.default_rng(9), threads=3)
        b = estimate_ucq(inst, Metric.ENGAGEMENT, s, 2, 9999,
                         np.random.default_rng(9), threads=3)
        assert a == b


class TestKsDistance:
    def test_uniform_sample(self):
        rng = np.random.default_rng(10)
        d = ks_distance(rng.random(20000), lambda x: np.clip(x, 0.0, 1.0))
        assert d < 0.015

    def test_atom_handling(self):
        # half the mass at zero, half uniform on [0.5, 1]
        rng = np.random.default_rng(11)
        n = 20000
        vals = np.where(rng.random(n) < 0.5, 0.0, 0.5 + 0.5 * rng.random(n))

        def cdf(x):
            x = np.asarray(x, dtype=float)
            return np.where(x < 0.0, 0.0, np.clip(0.5 + (x - 0.5), 0.5, 1.0))

        assert ks_distance(vals, cdf) < 0.015

    def test_detects_shifted_distribution(self):
        rng = np.random.default_rng(12)
        d = ks_distance(rng.random(5000) + 0.1, lambda x: np.clip(x, 0.0, 1.0))
        assert d > 0.08

    def test_quality_marginal_cdf_is_valid_cdf(self):
        cdf, top, _ = homogeneous_quality_cdf(-0.5, 0.3, 2.0, 3)
        grid = np.linspace(-0.5, top + 0.5, 400)
        vals = np.asarray(cdf(grid))
        assert np.all(np.diff(vals) >= -1e-12)
        assert vals[0] == 0.0
        assert vals[-1] == pytest.approx(1.0)


class TestWelfareZeroCases:
    def test_uw_zero_with_costly_gaming_negative_baseline(self):
        inst = linear(-0.5, 0.3)
        s = engagement_eq_homogeneous(inst, 2)
        est = estimate_uw(inst, Metric.ENGAGEMENT, s, 2, 20000,
                          np.random.default_rng(20))
        assert abs(est.mean) <= 1e-9


def _two_type_uw_quadrature(c, eps, W=1.0):
    """Analytic user welfare of the two-type engagement equilibrium (KMR).

    Only a high-tolerance user consuming low-type-targeted content earns
    positive utility, worth W * (c - 1) * v at reparameterized engagement v.
    Integrates that against the density of the max of two draws from the
    piecewise-constant (V, T) density, taking the winner's type share per
    interval. Intervals follow the case-3/case-2/case-1 tables.
    """
    a1 = 1.0 / (1.0 + eps)
    a2 = 1.0 / (c * (1.0 + eps))
    r = a1 / a2
    if r >= 1.5:
        intervals = [(1 / a1, 1.5 / a1, a1, 1.0), (1 / a2, 1.25 / a2, 2 * a2, 0.0)]
    elif r >= (5 - math.sqrt(5)) / 2:
        mid = 1 / (2 * a2 * (r - 1))
        intervals = [(1 / a1, 1 / a2, a1, 1.0), (1 / a2, mid, 2 * a2, r - 1),
                     (mid, (2 - r / 2) / a2, 2 * a2, 0.0)]
    else:
        mid = (3 - r) / (2 * a2 * (2 - r))
        top = 1 / a1 + (1 / a1 - 1 / (2 * a2)) * (3 - r) / (2 - r)
        intervals = [(1 / a1, 1 / a2, a1, 1.0), (1 / a2, mid, 2 * a2, r - 1),
                     (mid, top, a1, 1.0)]

    def g(v):
        for lo, hi, d, _ in intervals:
            if lo <= v <= hi:
                return d
        return 0.0

    def G(v):
        acc = 0.0
        for lo, hi, d, _ in intervals:
            acc += d * max(0.0, min(v, hi) - lo)
        return min(1.0, acc)

    def p_low(v):
        for lo, hi, _, p in intervals:
            if lo <= v <= hi:
                return p
        return 0.0

    total = 0.0
    for lo, hi, _, _ in intervals:
        xs = np.linspace(lo, hi, 20001)
        ys = np.array([2.0 * g(v) * G(v) * p_low(v) * v for v in xs])
        total += np.trapezoid(ys, xs)
    return 0.5 * W * (c - 1.0) * total


class TestTwoTypeWelfareQuadrature:
    @pytest.mark.parametrize("c", [1.2, 1.45, 2.0])
    def test_simulation_matches_density_integral(self, c):
        from creatorsim import KMR, engagement_eq_two_types
        eps = 0.01
        inst = ModelInstance(KMR(1.0, 0.0),
                             TypeSpace.of([eps, c * (1.0 + eps) - 1.0]))
        s = engagement_eq_two_types(inst)
        est = estimate_uw(inst, Metric.ENGAGEMENT, s, 2, 60000,
                          np.random.default_rng(int(c * 100)))
        exact = _two_type_uw_quadrature(c, eps)
        assert abs(est.mean - exact) <= 3 * est.stderr + 1e-4, (c, est.mean, exact)
