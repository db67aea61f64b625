"""Independent feasibility verification for contract menus.

Everything here checks the full constraint set by direct evaluation, without
trusting the constraint reductions used inside the solver: all K
participation slacks, the complete K x K truth-telling matrix, menu
monotonicity, and the self-reveal property. A brute-force grid oracle bounds
the solver's optimality gap on small instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import LN2, Contract, TypeProfile
from .solver import reduced_objective, reward_recovery

DEFAULT_TOL = 1e-9


def check_ir(contract: Contract, profile: TypeProfile) -> np.ndarray:
    """Participation slacks pi_k - q_k^2/theta_k, one per type.

    Nonnegative (within tolerance) means every participating seller at least
    breaks even.
    """
    if len(contract) != profile.k:
        raise ValueError("contract length does not match the type ladder")
    q = contract.qs
    return contract.pis - q * q / profile.as_array()


def check_ic(contract: Contract, profile: TypeProfile) -> np.ndarray:
    """Truth-telling slack matrix.

    Entry [k, j] is the utility a type-k seller loses by taking item j
    instead of its own: (pi_k - q_k^2/theta_k) - (pi_j - q_j^2/theta_k).
    The diagonal is identically zero; nonnegative off-diagonal entries mean
    no seller gains by imitating another type.
    """
    if len(contract) != profile.k:
        raise ValueError("contract length does not match the type ladder")
    q = contract.qs
    pi = contract.pis
    thetas = profile.as_array()
    # utilities[k, j]: type k's utility under item j
    utilities = pi[None, :] - q[None, :] ** 2 / thetas[:, None]
    return np.diagonal(utilities)[:, None] - utilities


def check_self_reveal(contract: Contract, profile: TypeProfile, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Per-type flag: does each type's own item maximize its utility?

    Ties within tol count in favor of the designated item; the binding
    adjacent indifference of an optimal menu makes exact ties legitimate.
    """
    slacks = check_ic(contract, profile)
    return slacks.min(axis=1) >= -tol


def _nondecreasing(values: np.ndarray, tol: float) -> bool:
    return bool(values.size == 0 or np.all(np.diff(values) >= -tol))


@dataclass(frozen=True)
class FeasibilityReport:
    """Structured verdict over one menu, serializable for the CLI."""

    ir_slacks: np.ndarray
    ic_slack_matrix: np.ndarray
    monotone_q: bool
    monotone_pi: bool
    self_reveal: np.ndarray
    min_slack: float
    feasible: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "tol": self.tol,
            "feasible": self.feasible,
            "min_slack": self.min_slack,
            "monotone_q": self.monotone_q,
            "monotone_pi": self.monotone_pi,
            "self_reveal": [bool(b) for b in self.self_reveal],
            "ir_slacks": [float(s) for s in self.ir_slacks],
            "ic_slack_matrix": [[float(s) for s in row] for row in self.ic_slack_matrix],
        }


def verify_contract(contract: Contract, profile: TypeProfile, tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Run every check and aggregate the worst violation.

    Feasible means all participation slacks and all off-diagonal
    truth-telling slacks are >= -tol.
    """
    ir = check_ir(contract, profile)
    ic = check_ic(contract, profile)
    off_diag = ic[~np.eye(profile.k, dtype=bool)] if profile.k > 1 else np.array([])
    min_slack = float(min(ir.min(), off_diag.min() if off_diag.size else np.inf))
    feasible = min_slack >= -tol
    return FeasibilityReport(
        ir_slacks=ir,
        ic_slack_matrix=ic,
        monotone_q=_nondecreasing(contract.qs, tol),
        monotone_pi=_nondecreasing(contract.pis, tol),
        self_reveal=check_self_reveal(contract, profile, tol),
        min_slack=min_slack,
        feasible=feasible,
        tol=tol,
    )


@dataclass(frozen=True)
class GridConfig:
    """Controls for the exhaustive grid oracle.

    points_per_axis grid nodes per refinement level; the window shrinks
    around the incumbent until the grid step reaches target_step. q_upper
    overrides the per-type search bound (defaults to the analytic bound
    theta_k * W * gamma / (2 ln 2), which dominates any optimum).
    """

    points_per_axis: int = 21
    target_step: float = 1e-3
    q_upper: tuple[float, ...] | None = None
    max_refinements: int = 60


def brute_force_best_contract(
    profile: TypeProfile,
    gamma: float,
    bandwidth_w: float,
    n_total: int,
    grid_cfg: GridConfig | None = None,
) -> tuple[Contract, float]:
    """Exhaustive search over a refined q-grid, rewards from reward_recovery.

    An intentionally independent oracle for the solver; exponential in K, so
    it refuses anything beyond 3 types.
    """
    cfg = grid_cfg or GridConfig()
    k = profile.k
    if k > 3:
        raise ValueError(f"grid oracle supports at most 3 types, got {k}")
    if cfg.q_upper is not None:
        upper = np.asarray(cfg.q_upper, dtype=float)
    else:
        upper = profile.as_array() * bandwidth_w * gamma / (2.0 * LN2) * 1.05
    upper = np.maximum(upper, 10.0 * cfg.target_step)

    lo = np.zeros(k)
    hi = upper.copy()
    best_q = np.zeros(k)
    best_val = reduced_objective(best_q, profile, gamma, bandwidth_w, n_total)

    for _ in range(cfg.max_refinements):
        axes = [np.linspace(lo[i], hi[i], cfg.points_per_axis) for i in range(k)]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        values = np.array(
            [reduced_objective(point, profile, gamma, bandwidth_w, n_total) for point in mesh]
        )
        idx = int(values.argmax())
        if values[idx] > best_val:
            best_val = float(values[idx])
            best_q = mesh[idx]
        steps = (hi - lo) / (cfg.points_per_axis - 1)
        if steps.max() <= cfg.target_step:
            break
        lo = np.maximum(best_q - 2.0 * steps, 0.0)
        hi = best_q + 2.0 * steps

    contract = Contract.from_arrays(best_q, reward_recovery(best_q, profile))
    return contract, best_val
