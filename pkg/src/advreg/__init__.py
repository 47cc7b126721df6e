"""Adversarial linear regression with multiple learners.

A test-time attacker shifts the feature matrix toward a target of its own
choosing at quadratic effort cost; several learners each hedge between
clean and manipulated data. This package provides the attacker's
closed-form best response, the unique symmetric equilibrium of the
learners' approximate game, classical baselines to benchmark against,
a scenario/sweep harness, and randomized numerical certificates for the
theory the solvers rely on.
"""

from .baselines import FitConfig, cross_validate, fit_lasso, fit_ols, fit_ridge
from .data import (
    ConstantTarget,
    Dataset,
    PrincipalComponents,
    Standardizer,
    TargetSpec,
    apply_standardizer,
    build_target,
    concat_datasets,
    fit_standardizer,
    invert_standardizer,
    label_stats,
    load_csv,
    pca_top_k,
    split_train_test,
)
from .equilibrium import (
    EquilibriumSolution,
    default_radius,
    equilibrium_gradient,
    equilibrium_objective,
    project_to_ball,
    solve_equilibrium,
    solve_equilibrium_bisection,
    solve_equilibrium_pgd,
)
from .evaluate import (
    CSV_HEADER,
    KNOWN_ALGORITHMS,
    EvalReport,
    GameSetting,
    ScenarioConfig,
    SweepGrid,
    derive_seed,
    expected_rmse,
    run_scenario,
    run_sweep,
    simulate_attack,
)
from .exceptions import (
    ConfigError,
    DimensionMismatch,
    EmptyFile,
    MaskOutOfRange,
    MaxItersExceeded,
    MaxSweepsExceeded,
    MissingLabelColumn,
    NoConvergence,
    NonFinite,
    NotPositiveDefinite,
    ParseError,
    SingularDesign,
    TooFewRows,
)
from .game import (
    AttackOperator,
    GameParams,
    ThetaProfile,
    approx_cost,
    approx_cost_gradient,
    attacker_best_response,
    attacker_cost,
    build_attack_operator,
    exact_game_cost,
    learner_cost,
    sq_norm,
)
from .linalg import pd_check, rank_one_inverse_update, solve_spd, sym_eig
from .serialize import csv_text, format_float, to_json, write_csv, write_json
from .synthetic import bundled_path, load_bundled, make_bundled, make_synthetic
from .verify import (
    ALL_CHECKS,
    CORE_CHECKS,
    ENVELOPE,
    CheckReport,
    RosenConfig,
    robust_disturbance,
    robust_inner_max,
    run_checks,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_CHECKS",
    "AttackOperator",
    "CORE_CHECKS",
    "CSV_HEADER",
    "CheckReport",
    "ConfigError",
    "ConstantTarget",
    "Dataset",
    "DimensionMismatch",
    "ENVELOPE",
    "EmptyFile",
    "EquilibriumSolution",
    "EvalReport",
    "FitConfig",
    "GameParams",
    "GameSetting",
    "KNOWN_ALGORITHMS",
    "MaskOutOfRange",
    "MaxItersExceeded",
    "MaxSweepsExceeded",
    "MissingLabelColumn",
    "NoConvergence",
    "NonFinite",
    "NotPositiveDefinite",
    "ParseError",
    "PrincipalComponents",
    "RosenConfig",
    "ScenarioConfig",
    "SingularDesign",
    "Standardizer",
    "SweepGrid",
    "TargetSpec",
    "ThetaProfile",
    "TooFewRows",
    "apply_standardizer",
    "approx_cost",
    "approx_cost_gradient",
    "attacker_best_response",
    "attacker_cost",
    "build_attack_operator",
    "build_target",
    "bundled_path",
    "concat_datasets",
    "cross_validate",
    "csv_text",
    "default_radius",
    "derive_seed",
    "equilibrium_gradient",
    "equilibrium_objective",
    "exact_game_cost",
    "expected_rmse",
    "fit_lasso",
    "fit_ols",
    "fit_ridge",
    "fit_standardizer",
    "format_float",
    "invert_standardizer",
    "label_stats",
    "learner_cost",
    "load_bundled",
    "load_csv",
    "make_bundled",
    "make_synthetic",
    "pca_top_k",
    "pd_check",
    "project_to_ball",
    "rank_one_inverse_update",
    "robust_disturbance",
    "robust_inner_max",
    "run_checks",
    "run_scenario",
    "run_sweep",
    "simulate_attack",
    "solve_equilibrium",
    "solve_equilibrium_bisection",
    "solve_equilibrium_pgd",
    "split_train_test",
    "sq_norm",
    "sym_eig",
    "to_json",
    "write_csv",
    "write_json",
]
