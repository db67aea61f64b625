"""Benchmark mechanisms flanking the screening contract: the full-information
optimum (upper bound) and a uniform per-unit energy price (lower benchmark).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .compositions import composition_table
from .market import LN2, TypeProfile

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Golden-section search for the maximizer of a unimodal f on [lo, hi].

    Shrinks the bracket to width <= tol and returns its midpoint. Fully
    deterministic for fixed inputs.
    """
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class CompleteInfoSolution:
    """Full-information optimum for one realized count vector.

    Every type contributes q_k = lam * theta_k and is paid exactly its energy
    cost (pi_k = q_k^2/theta_k), so the collector's utility equals the social
    welfare.
    """

    q: np.ndarray
    pi: np.ndarray
    lam: float
    welfare: float


def complete_info_lambda(t_total: float, gamma: float, bandwidth_w: float) -> float:
    """Shared multiplier: the positive root of

        gamma T lam^2 + lam - W gamma / (2 ln 2) = 0,   T = sum_k n_k theta_k.

    Zero when the market is empty or the link is worthless.
    """
    if t_total <= 0.0 or gamma <= 0.0:
        return 0.0
    disc = 1.0 + 2.0 * gamma * gamma * t_total * bandwidth_w / LN2
    return (-1.0 + math.sqrt(disc)) / (2.0 * gamma * t_total)


def complete_info_contract(
    counts, profile: TypeProfile, gamma: float, bandwidth_w: float
) -> CompleteInfoSolution:
    """Welfare-maximizing menu when the collector observes the realized type
    counts. First-order conditions give q_k proportional to theta_k."""
    n = np.asarray(getattr(counts, "counts", counts), dtype=float)
    thetas = profile.as_array()
    if n.size != thetas.size:
        raise ValueError("counts length does not match the type ladder")
    t_total = float(n @ thetas)
    lam = complete_info_lambda(t_total, gamma, bandwidth_w)
    q = lam * thetas
    pi = q * q / thetas
    welfare = bandwidth_w * math.log2(1.0 + gamma * lam * t_total) - lam * lam * t_total
    return CompleteInfoSolution(q, pi, lam, welfare)


def expected_complete_info_welfare(
    profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int
) -> float:
    """Expectation of the per-realization optima: the collector re-optimizes
    for every realized count vector it would observe."""
    counts, probs = composition_table(n_total, profile.k)
    t_total = counts @ profile.as_array()
    if gamma <= 0.0:
        return 0.0
    disc = 1.0 + 2.0 * gamma * gamma * bandwidth_w / LN2 * t_total
    lam = np.zeros_like(t_total)
    positive = t_total > 0.0
    lam[positive] = (np.sqrt(disc[positive]) - 1.0) / (2.0 * gamma * t_total[positive])
    welfare = bandwidth_w * np.log2(1.0 + gamma * lam * t_total) - lam * lam * t_total
    return float(probs @ welfare)


@dataclass(frozen=True)
class LinearPricingSolution:
    """Uniform price P per unit received power and the sellers' responses.

    A type-theta seller maximizes P q - q^2/theta, hence q = P theta / 2;
    participation is automatic since the surplus P^2 theta / 4 is nonnegative.
    """

    price: float
    expected_dap_utility: float
    q_response: np.ndarray


@dataclass(frozen=True)
class LinearSearchConfig:
    bracket_tol: float = 1e-10
    initial_p_max: float = 1.0
    max_expansions: int = 80


class BracketExpansionError(RuntimeError):
    """Raised when no finite price bracket contains the optimum."""


def linear_expected_dap_utility(
    price: float, profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int
) -> float:
    """Collector's expected utility at price P with best-responding sellers:

        E[ W log2(1 + gamma (P/2) sum_k n_k theta_k) ] - (P^2/2) (N/K) sum_k theta_k
    """
    counts, probs = composition_table(n_total, profile.k)
    thetas = profile.as_array()
    t_total = counts @ thetas
    rate = bandwidth_w * np.log2(1.0 + gamma * (price / 2.0) * t_total)
    payment = price * price / 2.0 * (n_total / profile.k) * thetas.sum()
    return float(probs @ rate) - payment


def linear_dap_utility_derivative(
    price: float, profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int
) -> float:
    """d/dP of linear_expected_dap_utility; used to certify the optimum."""
    counts, probs = composition_table(n_total, profile.k)
    thetas = profile.as_array()
    t_total = counts @ thetas
    rate_part = (bandwidth_w * gamma / (2.0 * LN2)) * (t_total / (1.0 + gamma * (price / 2.0) * t_total))
    return float(probs @ rate_part) - price * (n_total / profile.k) * thetas.sum()


def linear_expected_social_welfare(
    price: float, profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int
) -> float:
    """Expected total surplus at price P: the payment drops out and only half
    of the response cost remains, (P^2/4) (N/K) sum_k theta_k."""
    counts, probs = composition_table(n_total, profile.k)
    thetas = profile.as_array()
    t_total = counts @ thetas
    rate = bandwidth_w * np.log2(1.0 + gamma * (price / 2.0) * t_total)
    cost = price * price / 4.0 * (n_total / profile.k) * thetas.sum()
    return float(probs @ rate) - cost


def linear_pricing_optimize(
    profile: TypeProfile,
    gamma: float,
    bandwidth_w: float,
    n_total: int,
    search_cfg: LinearSearchConfig | None = None,
) -> LinearPricingSolution:
    """Price the collector would post: maximizes its expected utility over
    P >= 0 by golden-section search on an auto-expanded bracket."""
    cfg = search_cfg or LinearSearchConfig()
    thetas = profile.as_array()
    if gamma <= 0.0 or n_total == 0:
        return LinearPricingSolution(0.0, 0.0, np.zeros_like(thetas))

    def utility(p: float) -> float:
        return linear_expected_dap_utility(p, profile, gamma, bandwidth_w, n_total)

    hi = cfg.initial_p_max
    expansions = 0
    while utility(hi) >= utility(hi / 2.0):
        hi *= 2.0
        expansions += 1
        if expansions > cfg.max_expansions:
            raise BracketExpansionError(
                f"no price bracket found after {cfg.max_expansions} doublings (hi={hi:g})"
            )
    price = golden_section_max(utility, 0.0, hi, cfg.bracket_tol)
    return LinearPricingSolution(price, utility(price), price * thetas / 2.0)
