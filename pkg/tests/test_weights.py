"""Weight distributions: quantiles, samplers, quadrature, tail diagnostics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from irgtail.weights import (
    Burr,
    Frechet,
    HalfCauchy,
    MixedPolyTail,
    Pareto,
    QuadratureError,
    SecondOrderUnavailable,
    TailParams,
    WeightDistribution,
    WeightVector,
    check_u_lower_condition,
    estimate_second_order_scale,
    mixed_poisson_pmf,
    parse_distribution,
    read_weights_csv,
    sample_order_statistics_renyi,
    sample_weights,
    second_order_scale,
    write_weights_csv,
)

ALL_FAMILIES = [Pareto(2, 1), Burr(2), MixedPolyTail(), Frechet(1.5), HalfCauchy()]


class TestTailParams:
    def test_reciprocal_pair_accepted(self):
        p = TailParams(gamma=1.0 / 49.0, alpha=49.0)
        assert p.gamma == 1.0 / p.alpha

    def test_non_reciprocal_rejected(self):
        with pytest.raises(ValueError):
            TailParams(gamma=0.5, alpha=3.0)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            TailParams(gamma=1.0, alpha=1.0, rho=0.5)
        with pytest.raises(ValueError):
            TailParams(gamma=1.0, alpha=1.0, eta=1.0)
        with pytest.raises(ValueError):
            TailParams(gamma=1.0, alpha=1.0, t0=0.5)


class TestQuantileU:
    def test_pareto_hand_inversion(self):
        # invert 1 - F(x) = 2/x at 1/t = 0.1 by hand: x = 20
        assert Pareto(2, 1).quantile_u(10.0) == pytest.approx(20.0, abs=1e-12)

    def test_burr_hand_inversion(self):
        # (1 + x^2)^{-1} = 1/5  =>  x = 2
        assert Burr(2).quantile_u(5.0) == pytest.approx(2.0, abs=1e-12)

    def test_pareto_left_endpoint(self):
        assert Pareto(2, 1).quantile_u(1.0) == 2.0

    def test_mixedpoly_quadratic_root(self):
        # (2 + x)/x^2 = 1/2  =>  x^2 - 2x - 4 = 0  =>  x = (2 + sqrt(20))/2
        expected = (2.0 + math.sqrt(20.0)) / 2.0
        assert MixedPolyTail().quantile_u(2.0) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(3.23607, abs=5e-6)

    def test_domain_error_below_one(self):
        for dist in ALL_FAMILIES:
            with pytest.raises(ValueError):
                dist.quantile_u(0.999)

    def test_vectorized_matches_scalar(self):
        t = np.array([1.0, 2.0, 17.5, 1e6])
        for dist in ALL_FAMILIES:
            vec = dist.quantile_u(t)
            assert vec.shape == t.shape
            for ti, vi in zip(t, vec):
                assert vi == dist.quantile_u(float(ti))

    @pytest.mark.parametrize("dist", ALL_FAMILIES, ids=lambda d: d.name)
    def test_survival_roundtrip(self, dist):
        for t in (2.0, 10.0, 1e3, 1e6):
            assert abs(dist.survival(dist.quantile_u(t)) * t - 1.0) < 1e-10

    @pytest.mark.parametrize("dist", ALL_FAMILIES, ids=lambda d: d.name)
    def test_regular_variation_limit(self, dist):
        # U(tx)/U(t) -> x^gamma, monotone approach over t = 10^2..10^6
        gamma = dist.params.gamma
        for x in (0.5, 1.0, 2.0, 4.0):
            errs = []
            for t in (1e2, 1e3, 1e4, 1e5, 1e6):
                ratio = dist.quantile_u(t * x) / dist.quantile_u(t)
                errs.append(abs(ratio - x**gamma))
            assert errs[-1] < 1e-2
            # allow ties at the fp floor, forbid growth
            assert all(b <= a + 1e-14 for a, b in zip(errs, errs[1:]))

    @given(t=st.floats(min_value=1.0, max_value=1e12))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip_property(self, t):
        for dist in ALL_FAMILIES:
            u = dist.quantile_u(t)
            if u > dist.support_min:  # survival clamps below the support
                assert abs(dist.survival(u) * t - 1.0) < 1e-9 * t

    @given(t1=st.floats(min_value=1.0, max_value=1e9),
           t2=st.floats(min_value=1.0, max_value=1e9))
    @settings(max_examples=60, deadline=None)
    def test_monotone_property(self, t1, t2):
        lo, hi = min(t1, t2), max(t1, t2)
        for dist in ALL_FAMILIES:
            assert dist.quantile_u(lo) <= dist.quantile_u(hi)


class TestSampleWeights:
    def test_singleton(self):
        wv = sample_weights(Burr(2), 1, np.random.default_rng(0))
        assert wv.n == 1
        assert wv.values[0] > 0
        assert wv.total == wv.values[0]

    def test_empirical_survival_binomial_ci(self):
        # 1 - F(20) = 0.1 for Pareto(2, 1); binomial CI at 3 sigma
        wv = sample_weights(Pareto(2, 1), 10**5, np.random.default_rng(2026))
        emp = np.mean(wv.values > 20.0)
        assert abs(emp - 0.1) < 3.0 * math.sqrt(0.1 * 0.9 / 10**5)

    def test_bitwise_determinism(self):
        for dist in ALL_FAMILIES:
            a = sample_weights(dist, 512, np.random.default_rng(99))
            b = sample_weights(dist, 512, np.random.default_rng(99))
            assert np.array_equal(a.values, b.values)
            assert a.total == b.total

    def test_sorted_descending_and_total(self):
        wv = sample_weights(Frechet(1.5), 4096, np.random.default_rng(5))
        assert np.all(np.diff(wv.values) <= 0)
        assert wv.total == pytest.approx(math.fsum(wv.values), rel=1e-15)

    def test_zero_n_rejected(self):
        with pytest.raises(ValueError):
            sample_weights(Pareto(2, 1), 0, np.random.default_rng(0))


class TestRenyiSampler:
    def test_singleton_marginal(self):
        # U(e^E) with E ~ Exp(1) has the weight law itself: compare 4000
        # singletons against 4000 iid draws
        rng = np.random.default_rng(7)
        singles = np.array([sample_order_statistics_renyi(Pareto(2, 1), 1, rng).values[0]
                            for _ in range(4000)])
        iid = sample_weights(Pareto(2, 1), 4000, np.random.default_rng(8)).values
        assert stats.ks_2samp(singles, iid).pvalue > 0.01

    def test_strictly_decreasing(self):
        wv = sample_order_statistics_renyi(Pareto(2, 1), 2048, np.random.default_rng(3))
        assert np.all(np.diff(wv.values) < 0)

    def test_matches_sorted_iid_distribution(self):
        # two-sample KS on W_(1), W_(64), W_(n/2) at n = 2048 over 2000
        # replicates, Bonferroni across the three statistics
        n, reps = 2048, 2000
        dist = Pareto(2, 1)
        rng_a = np.random.default_rng(11)
        rng_b = np.random.default_rng(12)
        idx = [0, 63, n // 2 - 1]
        renyi = np.empty((reps, 3))
        sorted_iid = np.empty((reps, 3))
        for r in range(reps):
            renyi[r] = sample_order_statistics_renyi(dist, n, rng_a).values[idx]
            sorted_iid[r] = sample_weights(dist, n, rng_b).values[idx]
        for col in range(3):
            p = stats.ks_2samp(renyi[:, col], sorted_iid[:, col]).pvalue
            assert p > 0.01 / 3

    def test_determinism(self):
        a = sample_order_statistics_renyi(Burr(2.5), 256, np.random.default_rng(42))
        b = sample_order_statistics_renyi(Burr(2.5), 256, np.random.default_rng(42))
        assert np.array_equal(a.values, b.values)


class TestMixedPoissonPMF:
    def test_narrow_pareto_matches_poisson_oracle(self):
        # Pareto(5, 100) concentrates near w = 5, so P(D=5) is close to the
        # Poisson(5) pmf at 5 = e^-5 5^5/5! = 0.17547; the slight weight
        # spread shifts it by O(1e-4)
        oracle = math.exp(-5.0) * 5.0**5 / math.factorial(5)
        assert oracle == pytest.approx(0.17547, abs=5e-6)
        val = mixed_poisson_pmf(Pareto(5, 100), 5)
        assert val == pytest.approx(oracle, abs=2e-3)

    def test_normalization(self):
        # narrow family: mass beyond k = 40 is astronomically small
        total = sum(mixed_poisson_pmf(Pareto(5, 100), k) for k in range(41))
        assert total == pytest.approx(1.0, abs=1e-8)
        # heavier tail: remaining mass is about survival(K), keep it bounded
        total = sum(mixed_poisson_pmf(Burr(2), k) for k in range(201))
        assert 1.0 - total == pytest.approx(0.0, abs=5e-5)

    def test_tail_slope_with_monte_carlo_oracle(self):
        # Pareto(2, 1) mixing density 2/w^2 transfers to pmf(k) ~ 2 k^-2
        dist = Pareto(2, 1)
        ks = np.unique(np.geomspace(50, 500, 12).astype(int))
        pmf = np.array([mixed_poisson_pmf(dist, int(k)) for k in ks])
        slope = np.polyfit(np.log(ks), np.log(pmf), 1)[0]
        assert abs(slope - (-2.0)) < 0.15

        # Monte Carlo mixed-Poisson draws cross-check the quadrature values
        rng = np.random.default_rng(314)
        w = sample_weights(dist, 2 * 10**6, rng).values
        d = rng.poisson(w)
        for k in (50, 100):
            p_hat = np.mean(d == k)
            sigma = math.sqrt(p_hat * (1 - p_hat) / d.size)
            assert abs(mixed_poisson_pmf(dist, k) - p_hat) < 4.0 * sigma

    def test_unreachable_tolerance_raises(self):
        with pytest.raises(QuadratureError):
            mixed_poisson_pmf(Pareto(2, 1), 3, abs_tol=1e-16)

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            mixed_poisson_pmf(Pareto(2, 1), -1)


class TestUlowerCondition:
    def test_pareto_exact(self):
        # U(tx)/U(t) = x^gamma exactly, eta = 0 passes on any grid
        grid = [(t, x) for t in np.geomspace(1, 1e8, 50) for x in (1, 2, 7, 1e3)]
        assert check_u_lower_condition(Pareto(2, 1), eta=0.0, t0=1.0, grid=grid) == []
        assert check_u_lower_condition(Pareto(2, 0.25)) == []

    def test_mixedpoly_quarter_slack(self):
        grid = [(t, x) for t in (10.0, 30.0, 100.0, 1e4) for x in (1.0, 2.0, 8.0, 64.0)]
        assert check_u_lower_condition(MixedPolyTail(), eta=0.25, t0=10.0, grid=grid) == []

    def test_burr_numeric_sweep(self):
        grid = [(t, x) for t in np.geomspace(2, 1e6, 60) for x in np.geomspace(1, 1e3, 40)]
        assert check_u_lower_condition(Burr(2), eta=0.0, t0=2.0, grid=grid) == []

    def test_frechet_halfcauchy_defaults(self):
        assert check_u_lower_condition(Frechet(1.5)) == []
        assert check_u_lower_condition(HalfCauchy()) == []

    def test_detects_real_violations(self):
        # the mixed tail genuinely fails its envelope for onset t0 = 4
        tg = np.geomspace(4.0, 1e5, 60)
        xg = np.geomspace(1.0, 1e3, 40)
        viol = check_u_lower_condition(MixedPolyTail(), eta=0.25, t0=4.0,
                                       grid=[(t, x) for t in tg for x in xg])
        assert viol
        worst = min(viol, key=lambda v: v.ratio - v.bound)
        assert worst.ratio < worst.bound

    def test_grid_precondition(self):
        with pytest.raises(ValueError):
            check_u_lower_condition(Burr(2), t0=2.0, grid=[(1.0, 2.0)])
        with pytest.raises(ValueError):
            check_u_lower_condition(Burr(2), t0=2.0, grid=[(4.0, 0.5)])


class TestSecondOrder:
    def test_burr_rho(self):
        assert Burr(2.5).params.rho == -1.0

    def test_pareto_a_is_zero(self):
        dist = Pareto(2, 1)
        assert dist.second_order_scale(10.0) == 0.0
        assert estimate_second_order_scale(dist, 1e4) == 0.0
        assert math.isinf(dist.params.rho)

    @pytest.mark.parametrize("dist", [Burr(2), MixedPolyTail(), Frechet(1.5), HalfCauchy()],
                             ids=lambda d: d.name)
    def test_numeric_matches_analytic(self, dist):
        # finite-t quotient at x = 2 against the stored closed form
        t = 1e4
        analytic = dist.second_order_scale(t)
        numeric = estimate_second_order_scale(dist, t, x=2.0)
        assert numeric == pytest.approx(analytic, rel=0.05)

    def test_numeric_estimate_improves_with_t(self):
        dist = Burr(2)
        errs = [abs(estimate_second_order_scale(dist, t) / dist.second_order_scale(t) - 1.0)
                for t in (1e2, 1e4, 1e6)]
        assert errs[0] > errs[1] > errs[2] or errs[-1] < 1e-10

    def test_unknown_rho_unsupported(self):
        class Opaque(WeightDistribution):
            name = "opaque"
            params = TailParams(gamma=1.0, alpha=1.0, rho=None)

            def _quantile_u(self, t):
                return t

        with pytest.raises(SecondOrderUnavailable):
            estimate_second_order_scale(Opaque(), 100.0)
        with pytest.raises(SecondOrderUnavailable):
            second_order_scale(Opaque(), 100.0, allow_numeric=False)

    def test_dispatch_prefers_analytic(self):
        assert second_order_scale(Burr(2), 50.0) == Burr(2).second_order_scale(50.0)


class TestSpecGrammar:
    @pytest.mark.parametrize("spec", [
        "pareto:scale=2,alpha=1", "burr:alpha=2.5", "mixedpoly",
        "frechet:alpha=1.5", "halfcauchy",
    ])
    def test_round_trip(self, spec):
        dist = parse_distribution(spec)
        assert dist.spec_string() == spec
        assert parse_distribution(dist.spec_string()) == dist

    def test_eta_t0_overrides(self):
        dist = parse_distribution("burr:alpha=2,eta=0.1,t0=4")
        assert dist.params.eta == 0.1
        assert dist.params.t0 == 4.0
        assert parse_distribution(dist.spec_string()) == dist

    def test_errors(self):
        with pytest.raises(ValueError):
            parse_distribution("zipf:alpha=2")
        with pytest.raises(ValueError):
            parse_distribution("pareto:shape=2")
        with pytest.raises(ValueError):
            parse_distribution("burr:alpha=two")


class TestWeightVector:
    def test_validation(self):
        with pytest.raises(ValueError):
            WeightVector(np.array([]), 0.0)
        with pytest.raises(ValueError):
            WeightVector(np.array([2.0, -1.0]), 1.0)
        with pytest.raises(ValueError):
            WeightVector(np.array([1.0, 2.0]), 3.0)  # ascending

    def test_from_unsorted_sorts(self):
        wv = WeightVector.from_unsorted([1.0, 5.0, 3.0])
        assert np.array_equal(wv.values, [5.0, 3.0, 1.0])
        assert wv.total == 9.0

    def test_compensated_total(self):
        # fsum survives summands spanning 16 orders of magnitude
        values = np.sort(np.array([1e16, 1.0, 1.0, 1.0, 1.0]))[::-1]
        wv = WeightVector.from_sorted(values)
        assert wv.total == math.fsum(values)
        assert wv.total == 1e16 + 4.0

    def test_csv_round_trip(self, tmp_path):
        wv = sample_weights(Burr(2.5), 100, np.random.default_rng(17))
        path = tmp_path / "w.csv"
        write_weights_csv(wv, path)
        back = read_weights_csv(path)
        assert np.array_equal(back.values, wv.values)
        first = path.read_text().splitlines()
        assert first[0] == "weight"

    def test_csv_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("value\n1.0\n")
        with pytest.raises(ValueError):
            read_weights_csv(path)
