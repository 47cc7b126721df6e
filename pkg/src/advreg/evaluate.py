"""Benchmark harness: deploy models, attack them, score expected risk.

A scenario is one (train, test) pair plus two parameter settings: what the
defender *believes* (used to fit the game-equilibrium model) and what the
attacker *actually* does at test time. Every deployed algorithm is cloned
into n identical learners and attacked by its own optimal attacker; the
reported numbers are root-mean-square errors on clean features, attacked
features, and their beta-mixture (the expected risk under attack
probability beta).

Sweeps repeat scenarios over a lambda x beta grid with fresh seeded
train/test splits per repeat. Each (cell, repeat) derives its own RNG seed
from (base seed, cell indices, repeat), so cells can run concurrently and
the aggregate is independent of execution order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import FitConfig, cross_validate, fit_lasso, fit_ols, fit_ridge
from .data import (
    ConstantTarget,
    TargetSpec,
    build_target,
    concat_datasets,
    fit_standardizer,
    apply_standardizer,
    label_stats,
    split_train_test,
)
from .equilibrium import solve_equilibrium
from .exceptions import ConfigError, DimensionMismatch
from .game import GameParams, ThetaProfile, attacker_best_response, sq_norm

KNOWN_ALGORITHMS = ("lasso", "mlsg", "ols", "ridge")


def derive_seed(base, *parts):
    """Deterministic 64-bit mix of a base seed with stream labels."""
    h = int(base) & 0xFFFFFFFFFFFFFFFF
    for p in parts:
        p = int(p) & 0xFFFFFFFFFFFFFFFF
        h ^= (p + 0x9E3779B97F4A7C15 + ((h << 6) & 0xFFFFFFFFFFFFFFFF) + (h >> 2)) & 0xFFFFFFFFFFFFFFFF
        h &= 0xFFFFFFFFFFFFFFFF
    return h


# fixed stream labels so reordering computations cannot reshuffle draws
_STREAM_DEFENDER_TARGET = 1
_STREAM_ACTUAL_TARGET = 2
_STREAM_CV_RIDGE = 3
_STREAM_CV_LASSO = 4


@dataclass(eq=False)
class GameSetting:
    """One side's view of the game: effort price, attack probability, target."""

    lam: float
    beta: float
    target: TargetSpec | ConstantTarget = field(default_factory=TargetSpec)


@dataclass(eq=False)
class ScenarioConfig:
    n: int
    defender_estimates: GameSetting
    actual: GameSetting
    algorithms: tuple = KNOWN_ALGORITHMS
    seed: int = 0
    defender_knows_actual: bool = False
    standardize: bool = True
    theta_radius: float | None = None
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        bad = [a for a in self.algorithms if a not in KNOWN_ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; known: {KNOWN_ALGORITHMS}")


@dataclass(eq=False)
class EvalReport:
    results: dict
    metadata: dict

    def as_dict(self):
        return {"results": self.results, "metadata": self.metadata}


@dataclass(eq=False)
class SweepGrid:
    lambda_values: list
    beta_values: list
    cells: list          # cells[i][j] = {algo: {rmse_expected/clean/attacked}}
    repeats: int
    metadata: dict

    def csv_rows(self):
        """Rows sorted by (lambda, beta, algorithm), ready for the CSV writer."""
        rows = []
        for i, lam in enumerate(self.lambda_values):
            for j, beta in enumerate(self.beta_values):
                for algo, vals in self.cells[i][j].items():
                    rows.append(
                        (
                            float(lam),
                            float(beta),
                            algo,
                            vals["rmse_expected"],
                            vals["rmse_clean"],
                            vals["rmse_attacked"],
                        )
                    )
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
        return rows

    def as_dict(self):
        return {
            "lambda_values": [float(v) for v in self.lambda_values],
            "beta_values": [float(v) for v in self.beta_values],
            "repeats": self.repeats,
            "cells": [
                [
                    {algo: dict(vals) for algo, vals in cell.items()}
                    for cell in row
                ]
                for row in self.cells
            ],
            "metadata": self.metadata,
        }


CSV_HEADER = ["lambda", "beta", "algorithm", "rmse_expected", "rmse_clean", "rmse_attacked"]


def simulate_attack(thetas, X_test, z_test, lam):
    """Optimal manipulated features against the deployed profile."""
    profile = thetas if isinstance(thetas, ThetaProfile) else ThetaProfile(thetas)
    params = GameParams(n=profile.n, beta=1.0, lam=lam, z=z_test)
    return attacker_best_response(profile, X_test, params)


def expected_rmse(theta, X_clean, X_attacked, y, beta):
    """(expected, clean, attacked) RMSE for one model under attack prob beta."""
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    N = y.shape[0]
    sq_clean = sq_norm(X_clean @ theta - y)
    sq_att = sq_norm(X_attacked @ theta - y)
    rmse_clean = float(np.sqrt(sq_clean / N))
    rmse_att = float(np.sqrt(sq_att / N))
    rmse_exp = float(np.sqrt((beta * sq_att + (1.0 - beta) * sq_clean) / N))
    return rmse_exp, rmse_clean, rmse_att


def _resolve_target(target, rng):
    """Draw the per-run value of a ranged constant target; echo the draw."""
    if isinstance(target, ConstantTarget) and target.value_range is not None:
        lo, hi = target.value_range
        value = float(rng.uniform(float(lo), float(hi)))
        return ConstantTarget(value=value, mask=target.mask), value
    return target, None


def _target_meta(target, drawn=None):
    if isinstance(target, ConstantTarget):
        meta = {
            "kind": "constant",
            "value": target.value,
            "value_range": list(target.value_range) if target.value_range else None,
            "mask": list(target.mask) if target.mask is not None else None,
        }
        if drawn is not None:
            meta["drawn_value"] = drawn
        return meta
    return {
        "kind": "offset",
        "delta_scale": float(target.delta_scale),
        "mask": list(target.mask) if target.mask is not None else None,
        "clip_min": target.clip_min,
        "clip_max": target.clip_max,
    }


def _setting_meta(setting, drawn=None):
    return {
        "lambda": float(setting.lam),
        "beta": float(setting.beta),
        "target": _target_meta(setting.target, drawn),
    }


def run_scenario(train, test, cfg):
    """Fit every algorithm, attack each with the actual setting, score RMSEs."""
    if train.d != test.d:
        raise DimensionMismatch(f"train has {train.d} features, test has {test.d}")
    if cfg.standardize:
        std = fit_standardizer(train.X)
        X_tr = apply_standardizer(std, train.X)
        X_te = apply_standardizer(std, test.X)
    else:
        std = None
        X_tr, X_te = train.X.copy(), test.X.copy()
    y_tr, y_te = train.y, test.y
    sigma = label_stats(np.concatenate([y_tr, y_te]))[1]

    est = cfg.actual if cfg.defender_knows_actual else cfg.defender_estimates
    est_rng = np.random.default_rng(derive_seed(cfg.seed, _STREAM_DEFENDER_TARGET))
    est_target, est_drawn = _resolve_target(est.target, est_rng)
    z_hat = build_target(y_tr, est_target, sigma)

    act_rng = np.random.default_rng(derive_seed(cfg.seed, _STREAM_ACTUAL_TARGET))
    act_target, act_drawn = _resolve_target(cfg.actual.target, act_rng)
    z_test = build_target(y_te, act_target, sigma)

    thetas = {}
    diagnostics = {}
    for algo in cfg.algorithms:
        if algo == "mlsg":
            params = GameParams(
                n=cfg.n, beta=est.beta, lam=est.lam, z=z_hat,
                theta_radius=cfg.theta_radius,
            )
            sol = solve_equilibrium(X_tr, y_tr, params)
            thetas[algo] = sol.theta_star
            diagnostics[algo] = {
                "solver": sol.solver,
                "iterations": sol.iterations,
                "s_star": sol.s_star,
                "grad_norm": sol.grad_norm,
                "on_boundary": sol.on_boundary,
                "converged": sol.converged,
            }
        elif algo == "ols":
            thetas[algo] = fit_ols(X_tr, y_tr)
            diagnostics[algo] = {}
        elif algo == "ridge":
            alpha, errs = cross_validate(
                X_tr, y_tr, "ridge", cfg.fit, seed=derive_seed(cfg.seed, _STREAM_CV_RIDGE)
            )
            thetas[algo] = fit_ridge(X_tr, y_tr, alpha)
            diagnostics[algo] = {"alpha": alpha, "cv_errors": [float(e) for e in errs]}
        elif algo == "lasso":
            alpha, errs = cross_validate(
                X_tr, y_tr, "lasso", cfg.fit, seed=derive_seed(cfg.seed, _STREAM_CV_LASSO)
            )
            thetas[algo] = fit_lasso(X_tr, y_tr, alpha, cfg.fit)
            diagnostics[algo] = {"alpha": alpha, "cv_errors": [float(e) for e in errs]}

    results = {}
    for algo in sorted(thetas):
        theta = thetas[algo]
        profile = ThetaProfile.symmetric(theta, cfg.n)
        X_att = simulate_attack(profile, X_te, z_test, cfg.actual.lam)
        exp, clean, att = expected_rmse(theta, X_te, X_att, y_te, cfg.actual.beta)
        results[algo] = {
            "rmse_expected": exp,
            "rmse_clean": clean,
            "rmse_attacked": att,
            "theta": [float(t) for t in theta],
        }

    metadata = {
        "config": {
            "n": cfg.n,
            "seed": int(cfg.seed),
            "algorithms": list(cfg.algorithms),
            "defender_knows_actual": cfg.defender_knows_actual,
            "standardize": cfg.standardize,
            "theta_radius": cfg.theta_radius,
            "defender_estimates": _setting_meta(cfg.defender_estimates),
            "actual": _setting_meta(cfg.actual),
            "fit": cfg.fit.as_dict(),
        },
        "resolved": {
            "sigma": sigma,
            "sigma_source": "train_test_union_population",
            "rows_train": train.m,
            "rows_test": test.m,
            "defender_target": _target_meta(est_target, est_drawn),
            "actual_target": _target_meta(act_target, act_drawn),
            "label_standardized": False,
            "feature_standardization": "train_mean_std_population" if cfg.standardize else "none",
            "ridge_objective": "sse_plus_alpha_l2sq",
            "lasso_objective": "sse_plus_alpha_l1",
        },
        "diagnostics": diagnostics,
    }
    return EvalReport(results=results, metadata=metadata)


def _sweep_task(full, frac, cfg, lam, beta, seed):
    tr, te = split_train_test(full, frac, seed)
    cell_cfg = replace(
        cfg,
        seed=seed,
        actual=replace(cfg.actual, lam=float(lam), beta=float(beta)),
    )
    return run_scenario(tr, te, cell_cfg)


def run_sweep(train, test, cfg, lambda_grid, beta_grid, repeats, seed, jobs=None):
    """Grid of scenarios with per-repeat fresh splits; cell means per algorithm.

    The defender's estimates stay fixed across the grid unless
    cfg.defender_knows_actual is set, in which case they track each cell.
    """
    lambda_grid = [float(v) for v in lambda_grid]
    beta_grid = [float(v) for v in beta_grid]
    repeats = int(repeats)
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    if not lambda_grid or not beta_grid:
        raise ConfigError("lambda_grid and beta_grid must be non-empty")
    full = concat_datasets(train, test)
    frac = train.m / full.m

    tasks = [
        (i, j, r, derive_seed(seed, i, j, r))
        for i in range(len(lambda_grid))
        for j in range(len(beta_grid))
        for r in range(repeats)
    ]
    reports = {}
    if jobs is None or int(jobs) <= 1:
        for i, j, r, s in tasks:
            reports[(i, j, r)] = _sweep_task(full, frac, cfg, lambda_grid[i], beta_grid[j], s)
    else:
        with ThreadPoolExecutor(max_workers=int(jobs)) as pool:
            futures = {
                (i, j, r): pool.submit(
                    _sweep_task, full, frac, cfg, lambda_grid[i], beta_grid[j], s
                )
                for i, j, r, s in tasks
            }
            for key, fut in futures.items():
                reports[key] = fut.result()

    algos = sorted(cfg.algorithms)
    cells = []
    for i in range(len(lambda_grid)):
        row = []
        for j in range(len(beta_grid)):
            cell = {}
            for algo in algos:
                # canonical reduction order: repeat 0, 1, ...
                exp = [reports[(i, j, r)].results[algo]["rmse_expected"] for r in range(repeats)]
                cln = [reports[(i, j, r)].results[algo]["rmse_clean"] for r in range(repeats)]
                att = [reports[(i, j, r)].results[algo]["rmse_attacked"] for r in range(repeats)]
                cell[algo] = {
                    "rmse_expected": float(np.mean(exp)),
                    "rmse_clean": float(np.mean(cln)),
                    "rmse_attacked": float(np.mean(att)),
                }
            row.append(cell)
        cells.append(row)

    metadata = {
        "base_seed": int(seed),
        "repeats": repeats,
        "train_fraction": frac,
        "rows_total": full.m,
        "scenario": reports[(0, 0, 0)].metadata["config"],
        "seed_derivation": "hash_combine(base_seed, lambda_index, beta_index, repeat)",
    }
    return SweepGrid(
        lambda_values=lambda_grid,
        beta_values=beta_grid,
        cells=cells,
        repeats=repeats,
        metadata=metadata,
    )
