"""Physical scenario construction and the sweep driver.

Turns deployment parameters (path loss, distances, cost ranges) into the
discrete type ladder and SNR-slope range the market modules consume, runs
the three mechanisms across an SNR-slope grid, and cross-validates the exact
expectation sums with a seeded Monte Carlo estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import baselines
from .compositions import expected_social_welfare
from .market import Contract, TypeProfile
from .solver import SolveResult, SolverConfig, solve

# q is carried in mW or uW; theta scales with the square of the power unit
# and the SNR slope with its inverse, leaving every utility invariant.
POWER_UNIT_SCALE = {"mW": 1.0, "uW": 1e3}

RNG_ALGORITHM = "pcg64"  # numpy default_rng; recorded in run metadata


@dataclass(frozen=True)
class ScenarioConfig:
    """Deployment and market parameters; defaults reproduce the reference
    simulation setup.

    Distances in meters, noise in mW, bandwidth in Hz. Ranges are inclusive
    [low, high] pairs. power_unit selects the unit q is expressed in; "uW"
    keeps the solver numbers well scaled for these defaults.
    """

    n_eaps: int = 2
    k_types: int = 5
    a_range: tuple[float, float] = (0.1, 1.0)
    d_ms_range: tuple[float, float] = (5.0, 10.0)
    d_as_range: tuple[float, float] = (15.0, 25.0)
    path_loss_alpha: float = 2.0
    ref_atten_db: float = 30.0
    eta: float = 0.5
    bandwidth_hz: float = 1e6
    noise_mw: float = 1e-8
    rng_seed: int = 20260808
    power_unit: str = "uW"

    def __post_init__(self):
        if self.n_eaps < 0:
            raise ValueError("n_eaps must be nonnegative")
        if self.k_types < 1:
            raise ValueError("k_types must be at least 1")
        for name in ("a_range", "d_ms_range", "d_as_range"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo <= hi):
                raise ValueError(f"{name} must be a positive nonempty [low, high] pair")
        if self.path_loss_alpha <= 0.0:
            raise ValueError("path_loss_alpha must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.bandwidth_hz <= 0.0 or self.noise_mw <= 0.0:
            raise ValueError("bandwidth_hz and noise_mw must be positive")
        if self.power_unit not in POWER_UNIT_SCALE:
            raise ValueError(f"power_unit must be one of {sorted(POWER_UNIT_SCALE)}")


def channel_gain(distance_m: float, alpha: float = 2.0, ref_atten_db: float = 30.0) -> float:
    """Log-distance path loss: 10^(-ref/10) * d^(-alpha).

    The reference attenuation is taken at 1 m; the model is invalid closer in.
    """
    if distance_m < 1.0:
        raise ValueError(f"distance must be at least the 1 m reference, got {distance_m}")
    return 10.0 ** (-ref_atten_db / 10.0) * distance_m ** (-alpha)


def power_scale(cfg: ScenarioConfig) -> float:
    return POWER_UNIT_SCALE[cfg.power_unit]


def build_type_ladder(cfg: ScenarioConfig) -> TypeProfile:
    """K equally spaced quality values spanning the physically attainable
    range.

    The weakest type pairs the longest charger distance with the highest
    energy cost, the strongest the shortest distance with the lowest cost.
    A single type sits at the range midpoint.
    """
    scale = power_scale(cfg)
    g_far = channel_gain(cfg.d_ms_range[1], cfg.path_loss_alpha, cfg.ref_atten_db)
    g_near = channel_gain(cfg.d_ms_range[0], cfg.path_loss_alpha, cfg.ref_atten_db)
    theta_min = g_far**2 / cfg.a_range[1] * scale * scale
    theta_max = g_near**2 / cfg.a_range[0] * scale * scale
    if cfg.k_types == 1:
        return TypeProfile(((theta_min + theta_max) / 2.0,))
    return TypeProfile(tuple(np.linspace(theta_min, theta_max, cfg.k_types)))


def _gamma_at(cfg: ScenarioConfig, distance_m: float) -> float:
    gain = channel_gain(distance_m, cfg.path_loss_alpha, cfg.ref_atten_db)
    return cfg.eta * gain / cfg.noise_mw / power_scale(cfg)


def gamma_range(cfg: ScenarioConfig) -> tuple[float, float]:
    """SNR slope eta*G/N0 evaluated at the collector-distance endpoints
    (far end first, so the pair is ascending)."""
    return _gamma_at(cfg, cfg.d_as_range[1]), _gamma_at(cfg, cfg.d_as_range[0])


def reference_gamma(cfg: ScenarioConfig) -> float:
    """SNR slope at the midpoint collector distance; the single-point default."""
    return _gamma_at(cfg, 0.5 * (cfg.d_as_range[0] + cfg.d_as_range[1]))


def bandwidth_mbps(cfg: ScenarioConfig) -> float:
    """Bandwidth in the Mbps-valued rate units used by all utilities."""
    return cfg.bandwidth_hz / 1e6


def default_gamma_grid(cfg: ScenarioConfig, steps: int = 9) -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be at least 1")
    lo, hi = gamma_range(cfg)
    return np.linspace(lo, hi, steps)


class SweepError(RuntimeError):
    """A sweep point failed to solve; carries the offending SNR slope."""

    def __init__(self, gamma: float, reason: str):
        super().__init__(f"sweep aborted at gamma={gamma!r}: {reason}")
        self.gamma = gamma


@dataclass
class SweepResult:
    """Per-gamma expected social welfare of the three mechanisms plus the
    ratios of the two implementable ones to the full-information bound."""

    gamma_grid: np.ndarray
    welfare_contract: np.ndarray
    welfare_complete: np.ndarray
    welfare_linear: np.ndarray
    normalized_contract: np.ndarray
    normalized_linear: np.ndarray
    solve_results: list[SolveResult] = field(default_factory=list, repr=False)

    def rows(self) -> list[tuple[float, float, float, float, float, float]]:
        return [
            (
                float(self.gamma_grid[i]),
                float(self.welfare_contract[i]),
                float(self.welfare_complete[i]),
                float(self.welfare_linear[i]),
                float(self.normalized_contract[i]),
                float(self.normalized_linear[i]),
            )
            for i in range(len(self.gamma_grid))
        ]


def run_sweep(
    cfg: ScenarioConfig,
    gamma_grid=None,
    solver_cfg: SolverConfig | None = None,
) -> SweepResult:
    """Solve all three mechanisms at every grid point.

    Grid points must be positive. Any non-converged or non-monotone solve
    aborts the sweep with the failing gamma reported.
    """
    grid = default_gamma_grid(cfg) if gamma_grid is None else np.asarray(gamma_grid, dtype=float)
    if grid.size == 0 or grid.min() <= 0.0:
        raise ValueError("gamma grid must be nonempty and positive")
    profile = build_type_ladder(cfg)
    w = bandwidth_mbps(cfg)
    n = cfg.n_eaps

    contract_w = np.empty(grid.size)
    complete_w = np.empty(grid.size)
    linear_w = np.empty(grid.size)
    results: list[SolveResult] = []
    for i, gamma in enumerate(grid):
        res = solve(profile, gamma, w, n, solver_cfg)
        if not res.converged:
            raise SweepError(gamma, f"solver stopped at residual {res.kkt_residual:g}")
        if not res.monotone:
            raise SweepError(gamma, "recovered menu is not monotone")
        results.append(res)
        contract_w[i] = expected_social_welfare(res.contract.qs, profile, gamma, w, n)
        complete_w[i] = baselines.expected_complete_info_welfare(profile, gamma, w, n)
        pricing = baselines.linear_pricing_optimize(profile, gamma, w, n)
        linear_w[i] = baselines.linear_expected_social_welfare(pricing.price, profile, gamma, w, n)

    # an empty market has zero welfare under every mechanism; call the ratio 1
    positive = complete_w > 0.0
    normalized_contract = np.where(positive, contract_w / np.where(positive, complete_w, 1.0), 1.0)
    normalized_linear = np.where(positive, linear_w / np.where(positive, complete_w, 1.0), 1.0)
    return SweepResult(
        gamma_grid=grid,
        welfare_contract=contract_w,
        welfare_complete=complete_w,
        welfare_linear=linear_w,
        normalized_contract=normalized_contract,
        normalized_linear=normalized_linear,
        solve_results=results,
    )


def utility_curves(contract: Contract, profile: TypeProfile, probe_types) -> np.ndarray:
    """Utility table behind the self-reveal plots.

    Row t (for 1-based probe type t) holds pi_j - q_j^2/theta_t across all
    menu items j; a feasible menu peaks each row at its own index.
    """
    probes = [int(t) for t in probe_types]
    for t in probes:
        if not 1 <= t <= profile.k:
            raise ValueError(f"probe type {t} outside 1..{profile.k}")
    q = contract.qs
    pi = contract.pis
    thetas = profile.as_array()
    rows = [pi - q * q / thetas[t - 1] for t in probes]
    return np.array(rows).reshape(len(probes), profile.k)


def monte_carlo_expected_welfare(
    cfg: ScenarioConfig,
    contract: Contract,
    samples: int,
    rng_seed: int | None = None,
    gamma: float | None = None,
) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) of the expected social
    welfare of a menu under i.i.d. uniform type assignment.

    Exists purely to cross-validate the exact enumeration; uses numpy's
    seeded PCG64 generator so estimates are reproducible.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    profile = build_type_ladder(cfg)
    if len(contract) != profile.k:
        raise ValueError("contract length does not match the scenario ladder")
    gamma = reference_gamma(cfg) if gamma is None else gamma
    w = bandwidth_mbps(cfg)
    rng = np.random.default_rng(cfg.rng_seed if rng_seed is None else rng_seed)
    assignments = rng.integers(0, profile.k, size=(samples, cfg.n_eaps))
    q = contract.qs
    per_type_cost = q * q / profile.as_array()
    if cfg.n_eaps == 0:
        return 0.0, 0.0
    total_q = q[assignments].sum(axis=1)
    total_cost = per_type_cost[assignments].sum(axis=1)
    welfare = w * np.log2(1.0 + gamma * total_q) - total_cost
    estimate = float(welfare.mean())
    stderr = float(welfare.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return estimate, stderr
