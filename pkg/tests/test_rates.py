import itertools
import math

import numpy as np
import pytest

from fmab.rates import (
    CONVEX_LIPSCHITZ,
    HARDNESS_TAGS,
    SMOOTH_CONVEX,
    STRONGLY_CONVEX_LIPSCHITZ,
    STRONGLY_CONVEX_SMOOTH,
    Exponential,
    HardnessFunction,
    Heuristic,
    InverseQuadratic,
    MaxOf,
    MixedExponentsError,
    Polynomial,
    RateConfigError,
    allocation_infimum,
    bfi_budget_bound,
    bfi_lower_bound,
    exponential_sum_bound,
    fmab_lower_bound,
    fmab_upper_bound,
    hardness_G,
    hardness_eval,
    rate_eval,
    rate_inverse,
    stochastic_regret_bound,
    vicinity_hitting_time,
)


def scan_inverse(rate, eps, k_max=10**7):
    k = 1
    while rate.eval(k) > eps:
        k += 1
        assert k < k_max
    return k


class TestRateEval:
    def test_polynomial(self):
        assert rate_eval(Polynomial(beta=1.0, r=2.0), 3) == pytest.approx(1 / 9)

    def test_exponential(self):
        assert rate_eval(Exponential(amp=1.0, tau=2.0), 2) == pytest.approx(math.exp(-1))

    def test_confidence_factor(self):
        g = Polynomial(beta=1.0, r=0.5, conf="log", delta=math.exp(-1))
        assert rate_eval(g, 4) == pytest.approx(0.5)

    def test_inverse_quadratic(self):
        assert rate_eval(InverseQuadratic(amp=2.0), 1) == pytest.approx(2 / 12)

    def test_heuristic(self):
        assert rate_eval(Heuristic(scale=8.0), 4) == pytest.approx(4.0)

    def test_max_of(self):
        g = MaxOf(Polynomial(beta=1.0, r=2.0), Polynomial(beta=0.5, r=0.5))
        assert rate_eval(g, 1) == pytest.approx(1.0)
        assert rate_eval(g, 100) == pytest.approx(0.05)

    def test_clipped_style_composite_rate(self):
        # max(L R^2 / k^2, sigma R / k^(1 - 1/alpha)) * log(1/delta), alpha = 2
        delta = math.exp(-1)
        g = MaxOf(
            Polynomial(beta=2.0, r=2.0, conf="log", delta=delta),
            Polynomial(beta=1.0, r=0.5, conf="log", delta=delta),
        )
        assert rate_eval(g, 1) == pytest.approx(2.0)
        assert rate_eval(g, 4) == pytest.approx(0.5)
        assert rate_inverse(g, 0.1) == 100

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError):
            rate_eval(Polynomial(beta=1.0, r=1.0), 0)

    def test_invalid_parameters(self):
        with pytest.raises(RateConfigError):
            Polynomial(beta=-1.0, r=1.0)
        with pytest.raises(RateConfigError):
            Polynomial(beta=1.0, r=0.0)
        with pytest.raises(RateConfigError):
            Heuristic(scale=0.0)

    def test_log_confidence_needs_positive_delta(self):
        with pytest.raises(RateConfigError):
            Polynomial(beta=1.0, r=0.5, conf="log", delta=0.0)

    def test_monotone_nonincreasing(self):
        rng = np.random.default_rng(0)
        rates = [
            Polynomial(beta=float(rng.uniform(0.1, 5)), r=float(rng.uniform(0.2, 3)))
            for _ in range(20)
        ]
        rates += [Exponential(amp=2.0, tau=3.0), InverseQuadratic(amp=4.0), Heuristic(scale=2.0)]
        for g in rates:
            values = [g.eval(k) for k in range(1, 200)]
            assert all(b <= a for a, b in zip(values, values[1:]))
            assert all(v > 0 for v in values)


class TestRateInverse:
    def test_polynomial_closed_form(self):
        assert rate_inverse(Polynomial(beta=1.0, r=0.5), 0.1) == 100

    def test_exponential(self):
        assert rate_inverse(Exponential(amp=1.0, tau=2.0), math.exp(-1)) == 2

    def test_eps_nonpositive(self):
        with pytest.raises(ValueError):
            rate_inverse(Polynomial(beta=1.0, r=1.0), 0.0)

    def test_agrees_with_linear_scan(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            kind = rng.integers(4)
            if kind == 0:
                g = Polynomial(beta=float(rng.uniform(0.1, 10)), r=float(rng.uniform(0.3, 2.5)))
            elif kind == 1:
                g = Exponential(amp=float(rng.uniform(0.1, 10)), tau=float(rng.uniform(0.5, 10)))
            elif kind == 2:
                g = InverseQuadratic(amp=float(rng.uniform(0.1, 50)))
            else:
                g = MaxOf(
                    Polynomial(beta=float(rng.uniform(0.1, 5)), r=float(rng.uniform(0.3, 2.0))),
                    Polynomial(beta=float(rng.uniform(0.1, 5)), r=float(rng.uniform(0.3, 2.0))),
                )
            eps = float(rng.uniform(0.005, 2.0))
            k = rate_inverse(g, eps)
            assert k == scan_inverse(g, eps)
            assert g.eval(k) <= eps
            if k > 1:
                assert g.eval(k - 1) > eps


class TestBfiBudget:
    def test_two_arm_worked_example(self):
        rates = [Polynomial(beta=1.0, r=0.5)] * 2
        assert bfi_budget_bound([0.0, 1.0], rates, 0.5) == 19

    def test_single_arm(self):
        assert bfi_budget_bound([0.0], [Polynomial(beta=1.0, r=1.0)], 1.0) == 3

    def test_requires_zero_gap(self):
        with pytest.raises(ValueError):
            bfi_budget_bound([0.5, 1.0], [Polynomial(beta=1.0, r=1.0)] * 2, 0.5)

    def test_requires_positive_eps(self):
        with pytest.raises(ValueError):
            bfi_budget_bound([0.0], [Polynomial(beta=1.0, r=1.0)], 0.0)


class TestFmabUpperBound:
    def test_sublinear_case(self):
        rates = [Polynomial(beta=1.0, r=0.5)] * 4
        assert fmab_upper_bound(rates, 100) == pytest.approx(20.0)

    def test_logarithmic_case(self):
        rates = [Polynomial(beta=1.0, r=1.0)] * 2
        assert fmab_upper_bound(rates, math.e**2) == pytest.approx(4.0)

    def test_summable_case(self):
        rates = [Polynomial(beta=1.0, r=2.0)] * 3
        assert fmab_upper_bound(rates, 1000) == pytest.approx(6.0)

    def test_mixed_exponents_rejected(self):
        with pytest.raises(MixedExponentsError):
            fmab_upper_bound([Polynomial(beta=1.0, r=0.5), Polynomial(beta=1.0, r=1.0)], 10)

    def test_holder_step_never_violated(self):
        # the inequality behind the sublinear bound: sum beta_i k_i^(1-r)
        # is at most (sum beta_i^(1/r))^r * tau^(1-r) whenever sum k_i = tau
        rng = np.random.default_rng(7)
        for _ in range(200):
            K = int(rng.integers(1, 6))
            r = float(rng.uniform(0.2, 0.9))
            betas = rng.uniform(0.1, 5.0, size=K)
            rates = [Polynomial(beta=float(b), r=r) for b in betas]
            tau = int(rng.integers(K, 200))
            cuts = np.sort(rng.integers(0, tau + 1, size=K - 1))
            ks = np.diff(np.concatenate([[0], cuts, [tau]]))
            lhs = float(sum(b * k ** (1 - r) for b, k in zip(betas, ks)))
            assert lhs <= fmab_upper_bound(rates, tau) * (1 + 1e-9)

    def test_log_case_allocation_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            K = int(rng.integers(1, 5))
            betas = rng.uniform(0.1, 5.0, size=K)
            rates = [Polynomial(beta=float(b), r=1.0) for b in betas]
            tau = int(rng.integers(K + 2, 300))
            ks = rng.integers(1, tau, size=K)
            lhs = float(sum(b * math.log(k) for b, k in zip(betas, ks) if k <= tau))
            assert lhs <= fmab_upper_bound(rates, tau) * (1 + 1e-9)

    def test_exponential_sum(self):
        rates = [Exponential(amp=1.0, tau=1.0)] * 2
        expected = 2.0 / (math.e - 1.0)
        assert exponential_sum_bound(rates) == pytest.approx(expected)


class TestHardness:
    def test_class_floor_values(self):
        h = HardnessFunction(tag=CONVEX_LIPSCHITZ, M=1.0, R=1.0)
        assert hardness_eval(h, 4) == pytest.approx(0.5)

    def test_prefix_sum(self):
        h = HardnessFunction(tag=CONVEX_LIPSCHITZ, M=1.0, R=1.0)
        assert hardness_G(h, 0) == 0.0
        expected = 1 + 2**-0.5 + 3**-0.5 + 0.5
        assert hardness_G(h, 4) == pytest.approx(expected)

    def test_missing_constants_rejected(self):
        with pytest.raises(ValueError):
            HardnessFunction(tag=SMOOTH_CONVEX, M=1.0)  # needs L and R

    def test_monotone(self):
        for tag, kwargs in (
            (CONVEX_LIPSCHITZ, dict(M=2.0, R=1.5)),
            (SMOOTH_CONVEX, dict(L=1.5, R=2.0)),
            (STRONGLY_CONVEX_LIPSCHITZ, dict(M=1.0, mu=0.5)),
            (STRONGLY_CONVEX_SMOOTH, dict(L=4.0, mu=1.0, R=1.0)),
        ):
            h = HardnessFunction(tag=tag, **kwargs)
            values = [h.eval(s) for s in range(1, 100)]
            assert all(b <= a for a, b in zip(values, values[1:]))


def compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


class TestLowerBounds:
    def test_concentration_value(self):
        h = HardnessFunction(tag=CONVEX_LIPSCHITZ, M=1.0, R=1.0)
        assert fmab_lower_bound(h, 4, 3) == pytest.approx(2.784457050376173, abs=1e-9)

    def test_single_arm(self):
        h = HardnessFunction(tag=SMOOTH_CONVEX, L=1.0, R=1.0)
        for T in (1, 5, 12):
            assert fmab_lower_bound(h, T, 1) == pytest.approx(hardness_G(h, T))

    def test_concentration_matches_exhaustive_search(self):
        for tag, kwargs in (
            (CONVEX_LIPSCHITZ, dict(M=1.0, R=1.0)),
            (STRONGLY_CONVEX_LIPSCHITZ, dict(M=1.0, mu=1.0)),
        ):
            h = HardnessFunction(tag=tag, **kwargs)
            for K in range(1, 5):
                for T in range(1, 17):
                    brute = min(
                        sum(hardness_G(h, k) for k in alloc)
                        for alloc in compositions(T, K)
                    )
                    assert fmab_lower_bound(h, T, K) == pytest.approx(brute, abs=1e-12)

    def test_dp_matches_exhaustive(self):
        h = HardnessFunction(tag=STRONGLY_CONVEX_SMOOTH, L=4.0, mu=1.0, R=1.0)
        for K in (2, 3):
            for T in (5, 9):
                brute = min(
                    sum(hardness_G(h, k) for k in alloc) for alloc in compositions(T, K)
                )
                assert allocation_infimum(h, T, K) == pytest.approx(brute, abs=1e-12)

    def test_logarithmic_growth_order(self):
        h = HardnessFunction(tag=STRONGLY_CONVEX_LIPSCHITZ, M=1.0, mu=1.0)
        T = 20_000
        ratio = fmab_lower_bound(h, 2 * T, 3) / fmab_lower_bound(h, T, 3)
        assert ratio == pytest.approx(math.log(2 * T) / math.log(T), abs=0.02)

    def test_bfi_lower(self):
        h = HardnessFunction(tag=CONVEX_LIPSCHITZ, M=1.0, R=1.0)
        assert bfi_lower_bound(h, 12, 3) == pytest.approx(0.5)
        with pytest.raises(ValueError):
            bfi_lower_bound(h, 2, 3)

    def test_vicinity_hitting_time(self):
        h = HardnessFunction(tag=CONVEX_LIPSCHITZ, M=1.0, R=1.0)
        assert vicinity_hitting_time(h, 0.1) == 100
        h2 = HardnessFunction(tag=STRONGLY_CONVEX_SMOOTH, L=4.0, mu=1.0, R=1.0)
        assert vicinity_hitting_time(h2, math.exp(-3)) == 6
        for tag, kwargs in (
            (CONVEX_LIPSCHITZ, dict(M=1.7, R=0.8)),
            (SMOOTH_CONVEX, dict(L=2.0, R=1.3)),
            (STRONGLY_CONVEX_LIPSCHITZ, dict(M=1.2, mu=0.7)),
        ):
            h = HardnessFunction(tag=tag, **kwargs)
            for eps in (0.01, 0.3, 5.0):
                t = vicinity_hitting_time(h, eps)
                assert h.eval(t) <= eps
                if t > 1:
                    assert h.eval(t - 1) > eps


class TestStochasticBounds:
    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            stochastic_regret_bound(SMOOTH_CONVEX, K=2, T=10, A=1.0, sigma=1.0, R=1.0, L=1.0, alpha=1.0)

    def test_known_tags(self):
        value = stochastic_regret_bound(
            STRONGLY_CONVEX_LIPSCHITZ, K=4, T=100, A=10.0, sigma=2.0, R=1.0, alpha=2.0
        )
        assert value == pytest.approx(math.sqrt(400) * 2.0 * math.log(4000))
        with pytest.raises(ValueError):
            stochastic_regret_bound(CONVEX_LIPSCHITZ, K=2, T=10, A=1.0, sigma=1.0, R=1.0)

    def test_all_hardness_tags_known(self):
        assert set(HARDNESS_TAGS) == {
            CONVEX_LIPSCHITZ, SMOOTH_CONVEX, STRONGLY_CONVEX_LIPSCHITZ, STRONGLY_CONVEX_SMOOTH,
        }
