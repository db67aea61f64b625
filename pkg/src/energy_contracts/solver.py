"""Screening-contract solver under hidden seller types.

The collector's problem has K participation constraints and K(K-1)
truth-telling constraints. For an ascending type ladder those reduce to two
families of equalities: the bottom type's participation constraint binds, and
each type is exactly indifferent to the item one step below. Substituting the
resulting rewards into the expected utility leaves a smooth concave program in
the received-power vector q over the nonnegative orthant, solved here by
projected gradient ascent with a diagonal preconditioner and Armijo
backtracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .compositions import Composition, composition_table
from .market import LN2, Contract, TypeProfile

_MONO_RTOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """Iteration controls for the projected gradient ascent.

    grad_tol:       stop when the projected-gradient norm falls below this
    max_iters:      hard iteration cap
    backtrack_beta: step shrink factor of the Armijo line search, in (0, 1)
    backtrack_c:    sufficient-increase constant, in (0, 1)
    init_q:         optional starting point; defaults to a small positive vector
    """

    grad_tol: float = 1e-8
    max_iters: int = 10_000
    backtrack_beta: float = 0.5
    backtrack_c: float = 1e-4
    init_q: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.grad_tol <= 0.0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 < self.backtrack_beta < 1.0:
            raise ValueError("backtrack_beta must lie in (0, 1)")
        if not 0.0 < self.backtrack_c < 1.0:
            raise ValueError("backtrack_c must lie in (0, 1)")
        if self.init_q is not None:
            init = tuple(float(x) for x in self.init_q)
            if any(x < 0.0 for x in init):
                raise ValueError("init_q must be nonnegative")
            object.__setattr__(self, "init_q", init)


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one solve.

    kkt_residual is the projected-gradient norm at the returned point;
    monotone records whether the recovered menu has nondecreasing q and pi
    (guaranteed for uniformly distributed types, flagged rather than clamped
    otherwise).
    """

    contract: Contract
    objective: float
    iterations: int
    converged: bool
    kkt_residual: float
    monotone: bool


def reward_recovery(q: Sequence[float], profile: TypeProfile) -> np.ndarray:
    """Rewards pinned by the binding constraint structure:

        pi_1 = q_1^2 / theta_1
        pi_k = pi_{k-1} + (q_k^2 - q_{k-1}^2) / theta_k     for k >= 2

    The bottom type earns zero surplus and every type is indifferent to the
    item one step below.
    """
    q = np.asarray(q, dtype=float)
    thetas = profile.as_array()
    pi = np.empty_like(q)
    pi[0] = q[0] ** 2 / thetas[0]
    for k in range(1, q.size):
        pi[k] = pi[k - 1] + (q[k] ** 2 - q[k - 1] ** 2) / thetas[k]
    return pi


def quadratic_coefficients(profile: TypeProfile, comp: Composition | Sequence[int]) -> np.ndarray:
    """Coefficients D_k(n) that turn the reward bill into a quadratic form:
    with rewards from reward_recovery, sum_k n_k pi_k = sum_k D_k q_k^2 where

        D_k = n_k / theta_k + (1/theta_k - 1/theta_{k+1}) * sum_{i>k} n_i
        D_K = n_K / theta_K

    All D_k are nonnegative because the ladder is ascending.
    """
    n = np.asarray(getattr(comp, "counts", comp), dtype=float)
    thetas = profile.as_array()
    inv = 1.0 / thetas
    above = np.concatenate([np.cumsum(n[::-1])[::-1][1:], [0.0]])  # sum_{i>k} n_i
    coeffs = n * inv
    coeffs[:-1] += (inv[:-1] - inv[1:]) * above[:-1]
    return coeffs


def expected_quadratic_coefficients(profile: TypeProfile, n_total: int) -> np.ndarray:
    """E[D_k] under the uniform type distribution, using E[n_i] = N/K:

        E[D_k] = (N/K) [1/theta_k + (K-k)(1/theta_k - 1/theta_{k+1})]   k < K
        E[D_K] = (N/K) / theta_K
    """
    thetas = profile.as_array()
    k = profile.k
    inv = 1.0 / thetas
    coeffs = inv.copy()
    if k > 1:
        coeffs[:-1] += np.arange(k - 1, 0, -1) * (inv[:-1] - inv[1:])
    return (n_total / k) * coeffs


class _ReducedProblem:
    """Expected-utility objective in q alone, with the count table built once."""

    def __init__(self, profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int):
        counts, self.probs = composition_table(n_total, profile.k)
        self.counts = counts.astype(float)  # one upfront cast keeps the loop allocation-free
        self.exp_d = expected_quadratic_coefficients(profile, n_total)
        self.gamma = gamma
        self.w = bandwidth_w

    def value(self, q: np.ndarray) -> float:
        rate = self.w * np.log2(1.0 + self.gamma * (self.counts @ q))
        return float(self.probs @ rate - self.exp_d @ (q * q))

    def gradient(self, q: np.ndarray) -> np.ndarray:
        denom = 1.0 + self.gamma * (self.counts @ q)
        log_part = (self.w * self.gamma / LN2) * (self.counts.T @ (self.probs / denom))
        return log_part - 2.0 * self.exp_d * q

    def noise_floor(self, q: np.ndarray) -> float:
        # float resolution of the objective: its two parts can cancel, so the
        # line search cannot discriminate gains below this scale
        quad = abs(float(self.exp_d @ (q * q)))
        rate = abs(float(self.probs @ (self.w * np.log2(1.0 + self.gamma * (self.counts @ q)))))
        return 1e-13 * (quad + rate) + 1e-300


def reduced_objective(
    q: Sequence[float], profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int
) -> float:
    """Collector's expected utility after eliminating rewards:

        sum_n Phi(n) W log2(1 + gamma n.q)  -  sum_k E[D_k] q_k^2

    Only the log term needs enumeration; the reward bill is linear in counts
    so its expectation is exact in closed form. Equals
    expected_dap_utility(q, reward_recovery(q), ...) for every q >= 0.
    """
    q = np.asarray(q, dtype=float)
    if q.size != profile.k:
        raise ValueError(f"q must have length {profile.k}, got {q.size}")
    if q.size and q.min() < 0.0:
        raise ValueError("q must be nonnegative")
    return _ReducedProblem(profile, gamma, bandwidth_w, n_total).value(q)


def reduced_gradient(
    q: Sequence[float], profile: TypeProfile, gamma: float, bandwidth_w: float, n_total: int
) -> np.ndarray:
    """Analytic gradient of reduced_objective:

        d/dq_k = sum_n Phi(n) (W gamma / ln 2) n_k / (1 + gamma n.q) - 2 E[D_k] q_k
    """
    q = np.asarray(q, dtype=float)
    if q.size != profile.k:
        raise ValueError(f"q must have length {profile.k}, got {q.size}")
    return _ReducedProblem(profile, gamma, bandwidth_w, n_total).gradient(q)


def _projected_residual(q: np.ndarray, grad: np.ndarray) -> np.ndarray:
    # at an active bound only an inward (positive) gradient counts as violation
    return np.where(q > 0.0, grad, np.maximum(grad, 0.0))


def _is_nondecreasing(values: np.ndarray) -> bool:
    scale = float(np.abs(values).max()) if values.size else 0.0
    return bool(np.all(np.diff(values) >= -_MONO_RTOL * (scale + 1e-300)))


def solve(
    profile: TypeProfile,
    gamma: float,
    bandwidth_w: float,
    n_total: int,
    cfg: SolverConfig | None = None,
) -> SolveResult:
    """Maximize the reduced objective over q >= 0 and recover rewards.

    Projected gradient ascent, preconditioned by the inverse curvature of the
    quadratic reward term (1 / (2 E[D_k])), with Armijo backtracking. Near the
    optimum, where objective differences drop below float resolution, the
    trial step is accepted as-is; the iteration is then a contraction and the
    true projected-gradient norm remains the stopping rule.

    Monotonicity of the recovered menu is verified, not assumed: a violation
    (possible only off the uniform-type assumption) is flagged in the result
    rather than clamped away.
    """
    cfg = cfg or SolverConfig()
    k = profile.k
    if n_total == 0:
        contract = Contract.from_arrays(np.zeros(k), np.zeros(k))
        return SolveResult(contract, 0.0, 0, True, 0.0, True)

    problem = _ReducedProblem(profile, gamma, bandwidth_w, n_total)
    if cfg.init_q is not None:
        if len(cfg.init_q) != k:
            raise ValueError(f"init_q must have length {k}, got {len(cfg.init_q)}")
        q = np.asarray(cfg.init_q, dtype=float)
    else:
        q = np.full(k, 1e-3)

    precond = 1.0 / (2.0 * problem.exp_d)
    f = problem.value(q)
    alpha = 1.0
    residual = math.inf
    converged = False
    iterations = 0

    for iterations in range(cfg.max_iters + 1):
        grad = problem.gradient(q)
        residual = float(np.linalg.norm(_projected_residual(q, grad)))
        if residual <= cfg.grad_tol:
            converged = True
            break
        if iterations == cfg.max_iters:
            break
        direction = precond * grad
        floor = problem.noise_floor(q)
        step = min(alpha / cfg.backtrack_beta, 1.0)
        while True:
            candidate = np.maximum(q + step * direction, 0.0)
            f_cand = problem.value(candidate)
            gain = cfg.backtrack_c * float(grad @ (candidate - q))
            if gain <= floor or f_cand >= f + gain or step < 1e-20:
                break
            step *= cfg.backtrack_beta
        alpha = step
        q, f = candidate, f_cand

    pi = reward_recovery(q, profile)
    contract = Contract.from_arrays(q, pi)
    monotone = _is_nondecreasing(q) and _is_nondecreasing(pi)
    return SolveResult(contract, f, iterations, converged, residual, monotone)
