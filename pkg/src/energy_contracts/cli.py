"""Command-line entry points: solve, sweep, curves, verify.

Configuration is a single JSON file with every physical default pre-populated,
so running without a config reproduces the reference setup. Outputs are CSV
tables (full round-trip float precision) plus a JSON manifest that echoes the
fully resolved configuration.

Exit codes: 0 success, 1 config error, 2 solver failure, 3 feasibility failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .feasibility import verify_contract
from .market import Contract, TypeProfile
from .scenario import (
    RNG_ALGORITHM,
    ScenarioConfig,
    SweepError,
    bandwidth_mbps,
    build_type_ladder,
    default_gamma_grid,
    gamma_range,
    reference_gamma,
    run_sweep,
    utility_curves,
)
from .solver import SolverConfig, solve

ENV_OUT_DIR = "ENERGY_CONTRACTS_OUTDIR"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_FEASIBILITY = 3

CONTRACT_COLUMNS = ["type_index", "theta", "q", "pi"]
SWEEP_COLUMNS = [
    "gamma",
    "welfare_contract",
    "welfare_complete",
    "welfare_linear",
    "normalized_contract",
    "normalized_linear",
]
CURVE_COLUMNS = ["probe_type", "item_index", "utility"]


class ConfigError(Exception):
    pass


def default_config() -> dict:
    """Fully populated configuration reproducing the reference setup."""
    return {
        "scenario": {
            "n_eaps": 2,
            "k_types": 5,
            "a_range": [0.1, 1.0],
            "d_ms_range": [5.0, 10.0],
            "d_as_range": [15.0, 25.0],
            "path_loss_alpha": 2.0,
            "ref_atten_db": 30.0,
            "eta": 0.5,
            "bandwidth_hz": 1_000_000.0,
            "noise_mw": 1e-08,
            "rng_seed": 20260808,
            "power_unit": "uW",
        },
        "solver": {
            "grad_tol": 1e-08,
            "max_iters": 10_000,
            "backtrack_beta": 0.5,
            "backtrack_c": 1e-4,
            "init_q": None,
        },
        "solve": {"gamma": None, "tol": 1e-09},
        "sweep": {"gamma_min": None, "gamma_max": None, "gamma_steps": 9},
        "curves": {"gamma": None, "probe_types": None},
    }


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def _merge_section(name: str, user: dict, defaults: dict, required: tuple[str, ...]) -> dict:
    unknown = sorted(set(user) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown field '{name}.{unknown[0]}'")
    for key in required:
        if key not in user:
            raise ConfigError(f"missing required field '{name}.{key}'")
    merged = dict(defaults)
    merged.update(user)
    return merged


def resolve_config(user: dict | None) -> dict:
    """Merge a user config onto the defaults with strict field checking.

    A provided file must declare the market size (scenario.n_eaps and
    scenario.k_types); everything else falls back to the defaults.
    """
    resolved = default_config()
    if user is None:
        return resolved
    unknown = sorted(set(user) - set(resolved))
    if unknown:
        raise ConfigError(f"unknown section '{unknown[0]}'")
    if "scenario" not in user:
        raise ConfigError("missing required field 'scenario'")
    required = {"scenario": ("n_eaps", "k_types")}
    for name in resolved:
        if name in user:
            if not isinstance(user[name], dict):
                raise ConfigError(f"section '{name}' must be a JSON object")
            resolved[name] = _merge_section(name, user[name], resolved[name], required.get(name, ()))
    return resolved


def scenario_from_config(cfg: dict) -> ScenarioConfig:
    sc = cfg["scenario"]
    try:
        return ScenarioConfig(
            n_eaps=int(sc["n_eaps"]),
            k_types=int(sc["k_types"]),
            a_range=tuple(sc["a_range"]),
            d_ms_range=tuple(sc["d_ms_range"]),
            d_as_range=tuple(sc["d_as_range"]),
            path_loss_alpha=float(sc["path_loss_alpha"]),
            ref_atten_db=float(sc["ref_atten_db"]),
            eta=float(sc["eta"]),
            bandwidth_hz=float(sc["bandwidth_hz"]),
            noise_mw=float(sc["noise_mw"]),
            rng_seed=int(sc["rng_seed"]),
            power_unit=str(sc["power_unit"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid scenario: {exc}") from exc


def solver_from_config(cfg: dict) -> SolverConfig:
    sv = cfg["solver"]
    try:
        return SolverConfig(
            grad_tol=float(sv["grad_tol"]),
            max_iters=int(sv["max_iters"]),
            backtrack_beta=float(sv["backtrack_beta"]),
            backtrack_c=float(sv["backtrack_c"]),
            init_q=None if sv["init_q"] is None else tuple(sv["init_q"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _fmt(cell) -> str:
    if isinstance(cell, (float, np.floating)):
        return repr(float(cell))
    return str(cell)


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_manifest(out_dir: Path, command: str, cfg: dict, outputs: list[str], extra: dict | None = None) -> None:
    manifest = {
        "tool_version": __version__,
        "command": command,
        "seed": cfg["scenario"]["rng_seed"],
        "rng_algorithm": RNG_ALGORITHM,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config_echo": cfg,
        "output_paths": sorted(outputs),
    }
    if extra:
        manifest.update(extra)
    _write_json(out_dir / "manifest.json", manifest)


def _contract_rows(profile: TypeProfile, contract: Contract):
    for idx, (theta, item) in enumerate(zip(profile.thetas, contract.items), start=1):
        yield idx, theta, item.q, item.pi


def _resolve_gamma(cfg_value, scenario: ScenarioConfig) -> float:
    gamma = reference_gamma(scenario) if cfg_value is None else float(cfg_value)
    if gamma <= 0.0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    return gamma


def _solve_once(cfg: dict, gamma_key: str):
    scenario = scenario_from_config(cfg)
    profile = build_type_ladder(scenario)
    gamma = _resolve_gamma(cfg[gamma_key]["gamma"], scenario)
    cfg[gamma_key]["gamma"] = gamma
    result = solve(profile, gamma, bandwidth_mbps(scenario), scenario.n_eaps, solver_from_config(cfg))
    return scenario, profile, gamma, result


def cmd_solve(cfg: dict, out_dir: Path) -> int:
    scenario, profile, gamma, result = _solve_once(cfg, "solve")
    tol = float(cfg["solve"]["tol"])
    report = verify_contract(result.contract, profile, tol)

    _write_csv(out_dir / "contract.csv", CONTRACT_COLUMNS, _contract_rows(profile, result.contract))
    payload = report.to_dict()
    payload["solver"] = {
        "gamma": gamma,
        "objective": result.objective,
        "iterations": result.iterations,
        "converged": result.converged,
        "kkt_residual": result.kkt_residual,
        "monotone": result.monotone,
    }
    _write_json(out_dir / "feasibility.json", payload)
    _write_json(out_dir / "config_echo.json", cfg)
    _write_manifest(out_dir, "solve", cfg, ["contract.csv", "feasibility.json", "config_echo.json"])

    if not result.converged:
        print(f"solver did not converge (residual {result.kkt_residual:g})", file=sys.stderr)
        return EXIT_SOLVER
    if not result.monotone or not report.feasible:
        print(f"contract failed feasibility (min slack {report.min_slack:g})", file=sys.stderr)
        return EXIT_FEASIBILITY
    print(f"solved {profile.k}-type menu at gamma={gamma:g}; objective {result.objective:.6g}")
    return EXIT_OK


def cmd_sweep(cfg: dict, out_dir: Path) -> int:
    scenario = scenario_from_config(cfg)
    sweep_cfg = cfg["sweep"]
    lo, hi = gamma_range(scenario)
    gamma_min = lo if sweep_cfg["gamma_min"] is None else float(sweep_cfg["gamma_min"])
    gamma_max = hi if sweep_cfg["gamma_max"] is None else float(sweep_cfg["gamma_max"])
    steps = int(sweep_cfg["gamma_steps"])
    if steps < 1:
        raise ConfigError("sweep.gamma_steps must be at least 1")
    if not 0.0 < gamma_min <= gamma_max:
        raise ConfigError(f"invalid gamma range [{gamma_min}, {gamma_max}]")
    sweep_cfg.update({"gamma_min": gamma_min, "gamma_max": gamma_max, "gamma_steps": steps})
    grid = np.linspace(gamma_min, gamma_max, steps)

    try:
        sweep = run_sweep(scenario, grid, solver_from_config(cfg))
    except SweepError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SOLVER

    _write_csv(out_dir / "sweep.csv", SWEEP_COLUMNS, sweep.rows())
    _write_json(out_dir / "config_echo.json", cfg)
    _write_manifest(out_dir, "sweep", cfg, ["sweep.csv", "config_echo.json"])
    print(f"swept {steps} gamma points over [{gamma_min:g}, {gamma_max:g}]")
    return EXIT_OK


def cmd_curves(cfg: dict, out_dir: Path) -> int:
    scenario, profile, gamma, result = _solve_once(cfg, "curves")
    if not result.converged:
        print(f"solver did not converge (residual {result.kkt_residual:g})", file=sys.stderr)
        return EXIT_SOLVER
    probes = cfg["curves"]["probe_types"]
    probes = list(range(1, profile.k + 1)) if probes is None else [int(t) for t in probes]
    cfg["curves"]["probe_types"] = probes
    try:
        table = utility_curves(result.contract, profile, probes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    rows = [
        (probe, item_idx + 1, table[row_idx, item_idx])
        for row_idx, probe in enumerate(probes)
        for item_idx in range(profile.k)
    ]
    _write_csv(out_dir / "curves.csv", CURVE_COLUMNS, rows)
    _write_csv(out_dir / "contract.csv", CONTRACT_COLUMNS, _contract_rows(profile, result.contract))
    _write_json(out_dir / "config_echo.json", cfg)
    _write_manifest(out_dir, "curves", cfg, ["curves.csv", "contract.csv", "config_echo.json"])
    print(f"wrote {len(rows)} utility rows for {len(probes)} probe types")
    return EXIT_OK


def read_contract_csv(path: str | Path) -> tuple[TypeProfile, Contract]:
    """Load a contract table; the theta column makes the file self-contained."""
    try:
        with open(path, newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != CONTRACT_COLUMNS:
                raise ConfigError(
                    f"{path}: expected columns {CONTRACT_COLUMNS}, got {reader.fieldnames}"
                )
            rows = [(float(r["theta"]), float(r["q"]), float(r["pi"])) for r in reader]
    except OSError as exc:
        raise ConfigError(f"cannot read contract {path}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"{path}: bad numeric value: {exc}") from exc
    if not rows:
        raise ConfigError(f"{path}: no contract rows")
    try:
        profile = TypeProfile(tuple(r[0] for r in rows))
        contract = Contract.from_arrays([r[1] for r in rows], [r[2] for r in rows])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return profile, contract


def cmd_verify(cfg: dict, out_dir: Path, contract_path: str) -> int:
    profile, contract = read_contract_csv(contract_path)
    report = verify_contract(contract, profile, float(cfg["solve"]["tol"]))
    _write_json(out_dir / "feasibility.json", report.to_dict())
    _write_manifest(out_dir, "verify", cfg, ["feasibility.json"], {"contract_path": str(contract_path)})
    if not report.feasible:
        print(f"contract infeasible (min slack {report.min_slack:g})", file=sys.stderr)
        return EXIT_FEASIBILITY
    print(f"contract feasible (min slack {report.min_slack:g})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="energy-contracts",
        description="Design and benchmark energy-reward contract menus for wireless-charging markets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config path (defaults to the built-in reference setup)")
        p.add_argument("--out", help=f"output directory (default ${ENV_OUT_DIR} or ./out)")
        p.add_argument("--seed", type=int, help="override scenario.rng_seed")

    p_solve = sub.add_parser("solve", help="solve the menu at one gamma and verify feasibility")
    common(p_solve)

    p_sweep = sub.add_parser("sweep", help="welfare comparison across a gamma grid")
    common(p_sweep)
    p_sweep.add_argument("--gamma-min", type=float, help="override sweep.gamma_min")
    p_sweep.add_argument("--gamma-max", type=float, help="override sweep.gamma_max")
    p_sweep.add_argument("--gamma-steps", type=int, help="override sweep.gamma_steps")

    p_curves = sub.add_parser("curves", help="per-type utility across all menu items")
    common(p_curves)

    p_verify = sub.add_parser("verify", help="verify an existing contract CSV")
    common(p_verify)
    p_verify.add_argument("--contract", required=True, help="contract CSV to verify")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        user = load_config(args.config) if args.config else None
        cfg = resolve_config(user)
        if args.seed is not None:
            cfg["scenario"]["rng_seed"] = args.seed
        if args.command == "sweep":
            for key in ("gamma_min", "gamma_max", "gamma_steps"):
                value = getattr(args, key)
                if value is not None:
                    cfg["sweep"][key] = value

        out_dir = Path(args.out or os.environ.get(ENV_OUT_DIR) or "out")
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.command == "solve":
            return cmd_solve(cfg, out_dir)
        if args.command == "sweep":
            return cmd_sweep(cfg, out_dir)
        if args.command == "curves":
            return cmd_curves(cfg, out_dir)
        return cmd_verify(cfg, out_dir, args.contract)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
