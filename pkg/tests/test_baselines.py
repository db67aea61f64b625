import math

import numpy as np
import pytest
from scipy.optimize import brentq

from energy_contracts import (
    BracketExpansionError,
    Contract,
    LinearSearchConfig,
    ScenarioConfig,
    TypeProfile,
    bandwidth_mbps,
    build_type_ladder,
    complete_info_contract,
    complete_info_lambda,
    expected_complete_info_welfare,
    expected_social_welfare,
    golden_section_max,
    linear_dap_utility_derivative,
    linear_expected_dap_utility,
    linear_expected_social_welfare,
    linear_pricing_optimize,
    reference_gamma,
    social_welfare,
    solve,
    weighted_compositions,
)

LN2 = math.log(2.0)


class TestGoldenSection:
    def test_quadratic_peak(self):
        x = golden_section_max(lambda v: -((v - 1.7) ** 2), 0.0, 5.0, 1e-12)
        assert x == pytest.approx(1.7, abs=1e-10)

    def test_deterministic(self):
        f = lambda v: math.sin(v)
        assert golden_section_max(f, 0.0, 3.0, 1e-11) == golden_section_max(f, 0.0, 3.0, 1e-11)


class TestCompleteInfo:
    def test_unit_lambda_matches_root_oracle(self):
        # lam (1 + lam) = 1 / (2 ln 2) at T = gamma = W = 1
        oracle = brentq(lambda lam: lam * (1 + lam) - 1 / (2 * LN2), 0.0, 2.0, xtol=1e-14)
        assert complete_info_lambda(1.0, 1.0, 1.0) == pytest.approx(oracle, rel=1e-12)

    def test_empty_market(self):
        profile = TypeProfile((1.0, 2.0))
        sol = complete_info_contract([0, 0], profile, 1.0, 1.0)
        assert sol.welfare == 0.0
        assert sol.lam == 0.0
        np.testing.assert_array_equal(sol.q, np.zeros(2))

    def test_quantities_proportional_to_type(self):
        profile = TypeProfile((0.5, 1.0, 2.0))
        sol = complete_info_contract([1, 2, 1], profile, 1.3, 0.8)
        np.testing.assert_allclose(sol.q, sol.lam * profile.as_array(), rtol=1e-14)

    def test_full_surplus_extraction_exact(self):
        profile = TypeProfile((0.5, 1.0, 2.0))
        sol = complete_info_contract([2, 0, 1], profile, 0.7, 1.1)
        thetas = profile.as_array()
        assert np.all(sol.pi == sol.q * sol.q / thetas)

    def test_welfare_matches_direct_evaluation(self):
        profile = TypeProfile((0.5, 1.0, 2.0))
        counts = [1, 3, 2]
        sol = complete_info_contract(counts, profile, 1.3, 0.8)
        contract = Contract.from_arrays(sol.q, sol.pi)
        direct = social_welfare(counts, contract, profile, 1.3, 0.8)
        assert sol.welfare == pytest.approx(direct, rel=1e-12)

    def test_closed_form_matches_numeric_ascent(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            k = int(rng.integers(1, 5))
            profile = TypeProfile(tuple(np.cumsum(rng.uniform(0.2, 1.0, k)) + 0.2))
            counts = rng.integers(0, 4, size=k)
            if counts.sum() == 0:
                counts[0] = 1
            gamma, w = rng.uniform(0.2, 3.0), rng.uniform(0.3, 2.0)
            t_total = float(counts @ profile.as_array())

            # stationarity of w*log2(1 + gamma*lam*T) - lam^2*T in lam
            def welfare_slope(lam):
                return w * gamma * t_total / (LN2 * (1.0 + gamma * lam * t_total)) - 2.0 * lam * t_total

            lam_numeric = brentq(welfare_slope, 0.0, w * gamma / (2 * LN2) + 1.0, xtol=1e-14)
            lam_closed = complete_info_lambda(t_total, gamma, w)
            assert lam_closed == pytest.approx(lam_numeric, rel=1e-8)

    def test_dominates_screening_contract_per_realization(self):
        cfg = ScenarioConfig()
        profile = build_type_ladder(cfg)
        gamma, w = reference_gamma(cfg), bandwidth_mbps(cfg)
        res = solve(profile, gamma, w, cfg.n_eaps)
        for weighted in weighted_compositions(cfg.n_eaps, profile.k):
            counts = weighted.composition.counts
            upper = complete_info_contract(counts, profile, gamma, w).welfare
            attained = social_welfare(counts, res.contract, profile, gamma, w)
            assert upper >= attained - 1e-12


class TestExpectedCompleteInfoWelfare:
    def test_empty_market(self):
        profile = TypeProfile((1.0, 2.0))
        assert expected_complete_info_welfare(profile, 1.0, 1.0, 0) == 0.0

    def test_single_type_equals_direct(self):
        profile = TypeProfile((1.5,))
        n = 3
        expected = expected_complete_info_welfare(profile, 0.9, 1.2, n)
        direct = complete_info_contract([n], profile, 0.9, 1.2).welfare
        assert expected == pytest.approx(direct, rel=1e-14)

    def test_matches_per_composition_oracle(self):
        profile = TypeProfile((0.5, 1.0, 2.0))
        n, gamma, w = 3, 1.1, 0.9
        oracle = sum(
            wc.prob * complete_info_contract(wc.composition, profile, gamma, w).welfare
            for wc in weighted_compositions(n, profile.k)
        )
        assert expected_complete_info_welfare(profile, gamma, w, n) == pytest.approx(oracle, rel=1e-12)

    def test_monotone_in_gamma(self):
        cfg = ScenarioConfig()
        profile = build_type_ladder(cfg)
        w = bandwidth_mbps(cfg)
        values = [
            expected_complete_info_welfare(profile, g, w, cfg.n_eaps)
            for g in np.linspace(0.05, 0.5, 8)
        ]
        assert np.all(np.diff(values) >= -1e-12)


class TestLinearPricing:
    def test_zero_gamma_degenerates(self):
        profile = TypeProfile((1.0, 2.0))
        sol = linear_pricing_optimize(profile, 0.0, 1.0, 2)
        assert sol.price == 0.0
        assert sol.expected_dap_utility == 0.0
        np.testing.assert_array_equal(sol.q_response, np.zeros(2))

    def test_best_response_is_seller_optimal(self):
        profile = TypeProfile((0.5, 1.0, 2.0))
        sol = linear_pricing_optimize(profile, 1.2, 1.0, 2)
        for theta, q in zip(profile.thetas, sol.q_response):
            surplus = sol.price * q - q * q / theta
            for bump in (1e-4, -1e-4):
                q_alt = q + bump
                assert sol.price * q_alt - q_alt * q_alt / theta < surplus

    def test_derivative_vanishes_at_optimum(self):
        for gamma in (0.125, 0.8, 3.0):
            profile = TypeProfile((0.5, 1.0, 2.0))
            sol = linear_pricing_optimize(profile, gamma, 1.0, 2)
            assert abs(linear_dap_utility_derivative(sol.price, profile, gamma, 1.0, 2)) <= 1e-6

    def test_bracket_expansion_reaches_large_prices(self):
        profile = TypeProfile((1.0, 2.0))
        cfg = LinearSearchConfig(initial_p_max=0.01)
        sol = linear_pricing_optimize(profile, 50.0, 1.0, 2, cfg)
        assert sol.price > cfg.initial_p_max  # expansion had to grow the bracket
        assert abs(linear_dap_utility_derivative(sol.price, profile, 50.0, 1.0, 2)) <= 1e-6

    def test_expansion_cap_raises(self):
        profile = TypeProfile((1.0, 2.0))
        with pytest.raises(BracketExpansionError):
            linear_pricing_optimize(
                profile, 50.0, 1.0, 2, LinearSearchConfig(initial_p_max=1e-6, max_expansions=1)
            )

    def test_social_welfare_matches_per_composition_oracle(self):
        profile = TypeProfile((0.5, 1.0, 2.0))
        n, gamma, w, price = 3, 1.1, 0.9, 0.4
        q = price * profile.as_array() / 2.0
        contract = Contract.from_arrays(q, price * q)
        oracle = sum(
            wc.prob * social_welfare(wc.composition, contract, profile, gamma, w)
            for wc in weighted_compositions(n, profile.k)
        )
        value = linear_expected_social_welfare(price, profile, gamma, w, n)
        assert value == pytest.approx(oracle, rel=1e-12)

    def test_dap_utility_accounts_full_payment(self):
        # payment is price * response, so utility = social welfare minus the
        # sellers' retained surplus (price^2 theta / 4 each on average)
        profile = TypeProfile((0.5, 1.0, 2.0))
        n, gamma, w, price = 2, 0.9, 1.3, 0.6
        thetas = profile.as_array()
        retained = (n / profile.k) * (price**2 * thetas / 4.0).sum()
        diff = linear_expected_social_welfare(price, profile, gamma, w, n) - linear_expected_dap_utility(
            price, profile, gamma, w, n
        )
        assert diff == pytest.approx(retained, rel=1e-12)


class TestMechanismOrdering:
    def test_reference_scenario_ordering(self):
        cfg = ScenarioConfig()
        profile = build_type_ladder(cfg)
        gamma, w, n = reference_gamma(cfg), bandwidth_mbps(cfg), cfg.n_eaps
        res = solve(profile, gamma, w, n)
        assert res.converged
        contract_welfare = expected_social_welfare(res.contract.qs, profile, gamma, w, n)
        complete_welfare = expected_complete_info_welfare(profile, gamma, w, n)
        pricing = linear_pricing_optimize(profile, gamma, w, n)
        linear_welfare = linear_expected_social_welfare(pricing.price, profile, gamma, w, n)
        assert complete_welfare >= contract_welfare - 1e-8
        assert contract_welfare >= linear_welfare - 1e-8
