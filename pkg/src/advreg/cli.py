"""Command-line front end: train, attack, evaluate, sweep, verify.

Every command is seeded and every artifact is written with deterministic
serialization (17-significant-digit floats, sorted JSON keys), so a rerun
with the same inputs reproduces the same bytes. Each JSON artifact embeds
the resolved settings under a "config" key; feeding that file back through
--config replays the run.

Seed precedence: --seed flag, then the config file, then the ADVREG_SEED
environment variable, then 0.

Exit codes: 0 success, 2 bad flags or configuration, 3 data errors,
4 solver failures, 5 verification check failures.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from .baselines import FitConfig, cross_validate, fit_lasso, fit_ols, fit_ridge
from .data import (
    ConstantTarget,
    Standardizer,
    TargetSpec,
    apply_standardizer,
    build_target,
    fit_standardizer,
    invert_standardizer,
    label_stats,
    load_csv,
    split_train_test,
)
from .equilibrium import solve_equilibrium
from .evaluate import (
    CSV_HEADER,
    KNOWN_ALGORITHMS,
    GameSetting,
    ScenarioConfig,
    _resolve_target,
    _setting_meta,
    _target_meta,
    derive_seed,
    run_scenario,
    run_sweep,
)
from .exceptions import (
    ConfigError,
    DimensionMismatch,
    EmptyFile,
    MaskOutOfRange,
    MissingLabelColumn,
    NoConvergence,
    NonFinite,
    NotPositiveDefinite,
    ParseError,
    SingularDesign,
    TooFewRows,
)
from .game import GameParams, ThetaProfile, attacker_best_response, attacker_cost
from .serialize import to_json, write_csv, write_json
from .verify import ALL_CHECKS, CORE_CHECKS, run_checks

# seed streams shared with the scenario harness: the defender builds its
# estimated target on stream 1, the attacker materializes the real one on 2
_STREAM_DEFENDER_TARGET = 1
_STREAM_ACTUAL_TARGET = 2


def _say(args, msg):
    if not args.quiet:
        print(msg)


def _load_config(path):
    """Read a JSON config; an emitted artifact's embedded config replays it."""
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            cfg = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    if isinstance(cfg.get("config"), dict):
        cfg = cfg["config"]
    return cfg


def _pick(flag, cfg, key, default):
    if flag is not None:
        return flag
    val = cfg.get(key)
    return default if val is None else val


def _resolve_seed(flag_seed, cfg):
    if flag_seed is not None:
        return int(flag_seed)
    if cfg.get("seed") is not None:
        return int(cfg["seed"])
    env = os.environ.get("ADVREG_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"ADVREG_SEED must be an integer, got {env!r}") from exc
    return 0


def _parse_label(label):
    """Column index if the label looks like an integer, else column name."""
    if label is None or isinstance(label, int):
        return label
    try:
        return int(str(label))
    except ValueError:
        return str(label)


def _target_from_dict(d):
    if d is None:
        return TargetSpec()
    if not isinstance(d, dict):
        raise ConfigError(f"target must be a JSON object, got {d!r}")
    kind = d.get("kind", "offset")
    try:
        if kind == "constant":
            if d.get("value") is not None:
                return ConstantTarget(value=float(d["value"]), mask=d.get("mask"))
            vr = d.get("value_range")
            if vr is None:
                raise ConfigError("constant target needs value or value_range")
            return ConstantTarget(
                value_range=(float(vr[0]), float(vr[1])), mask=d.get("mask")
            )
        if kind != "offset":
            raise ConfigError(f"unknown target kind {kind!r}")
        return TargetSpec(
            delta_scale=float(d.get("delta_scale", 0.0)),
            mask=d.get("mask"),
            clip_min=None if d.get("clip_min") is None else float(d["clip_min"]),
            clip_max=None if d.get("clip_max") is None else float(d["clip_max"]),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"bad target spec {d!r}: {exc}") from exc


def _target_dict_from_flags(args, cfg):
    """Flags override the config's target wholesale; masks are config-only."""
    if getattr(args, "constant_value", None) is not None:
        return {"kind": "constant", "value": args.constant_value}
    offset_flags = (args.delta_scale, args.clip_min, args.clip_max)
    if any(v is not None for v in offset_flags):
        return {
            "kind": "offset",
            "delta_scale": 0.0 if args.delta_scale is None else args.delta_scale,
            "clip_min": args.clip_min,
            "clip_max": args.clip_max,
        }
    return cfg.get("target")


def _fit_from_dict(d):
    if d is None:
        return FitConfig()
    if not isinstance(d, dict):
        raise ConfigError(f"fit config must be a JSON object, got {d!r}")
    try:
        kwargs = {}
        for key in ("alpha", "cd_tol", "cd_max_sweeps", "cv_folds", "cv_alpha_grid"):
            if d.get(key) is not None:
                kwargs[key] = d[key]
        return FitConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad fit config {d!r}: {exc}") from exc


def _emit_json(args, doc):
    if args.out:
        write_json(args.out, doc)
        _say(args, f"wrote {args.out}")
    else:
        sys.stdout.write(to_json(doc))


# ---------------------------------------------------------------- train


def cmd_train(args):
    cfg = _load_config(args.config)
    dataset = _pick(args.dataset, cfg, "dataset", None)
    if dataset is None:
        raise ConfigError("train needs a dataset (--dataset or config)")
    label = _parse_label(_pick(args.label, cfg, "label", None))
    if label is None:
        raise ConfigError("train needs a label column (--label or config)")
    algorithm = _pick(args.algorithm, cfg, "algorithm", None)
    if algorithm not in KNOWN_ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {KNOWN_ALGORITHMS}, got {algorithm!r}")
    seed = _resolve_seed(args.seed, cfg)
    standardize = False if args.no_standardize else bool(cfg.get("standardize", True))
    n = int(_pick(args.n, cfg, "n", 5))
    lam = float(_pick(args.lam, cfg, "lambda", 1.0))
    beta = float(_pick(args.beta, cfg, "beta", 0.8))
    radius = _pick(args.radius, cfg, "theta_radius", None)
    radius = None if radius is None else float(radius)
    alpha = _pick(args.alpha, cfg, "alpha", None)
    alpha = None if alpha is None else float(alpha)
    fit = _fit_from_dict(cfg.get("fit"))
    target = _target_from_dict(_target_dict_from_flags(args, cfg))

    ds = load_csv(dataset, label)
    if standardize:
        std = fit_standardizer(ds.X)
        X = apply_standardizer(std, ds.X)
    else:
        std, X = None, ds.X
    y = ds.y

    diagnostics = {}
    echo_target = None
    if algorithm == "ols":
        theta = fit_ols(X, y)
    elif algorithm in ("ridge", "lasso"):
        if alpha is None:
            alpha_sel, errs = cross_validate(X, y, algorithm, fit, seed=seed)
            diagnostics["cv_errors"] = [float(e) for e in errs]
        else:
            alpha_sel = alpha
        diagnostics["alpha"] = float(alpha_sel)
        if algorithm == "ridge":
            theta = fit_ridge(X, y, alpha_sel)
        else:
            theta = fit_lasso(X, y, alpha_sel, fit)
    else:  # mlsg
        rng = np.random.default_rng(derive_seed(seed, _STREAM_DEFENDER_TARGET))
        target_r, drawn = _resolve_target(target, rng)
        sigma = label_stats(y)[1]
        z_hat = build_target(y, target_r, sigma)
        params = GameParams(n=n, beta=beta, lam=lam, z=z_hat, theta_radius=radius)
        sol = solve_equilibrium(X, y, params)
        theta = sol.theta_star
        diagnostics = {
            "solver": sol.solver,
            "iterations": sol.iterations,
            "s_star": sol.s_star,
            "grad_norm": sol.grad_norm,
            "on_boundary": sol.on_boundary,
            "converged": sol.converged,
            "sigma": sigma,
        }
        echo_target = _target_meta(target)
        if drawn is not None:
            # pin the drawn value so a --config replay refits the same model
            echo_target["value"] = drawn

    resolved = {
        "command": "train",
        "dataset": str(dataset),
        "label": label,
        "algorithm": algorithm,
        "seed": seed,
        "standardize": standardize,
        "n": n,
        "lambda": lam,
        "beta": beta,
        "theta_radius": radius,
        "alpha": alpha,
        "target": echo_target,
        "fit": fit.as_dict(),
    }
    model = {
        "algorithm": algorithm,
        "theta": [float(t) for t in theta],
        "preprocessing": {
            "standardize": standardize,
            "means": None if std is None else [float(v) for v in std.means],
            "stds": None if std is None else [float(v) for v in std.stds],
            "feature_names": list(ds.feature_names),
            "label_name": ds.label_name,
        },
        "config": resolved,
        "diagnostics": diagnostics,
    }
    write_json(args.out, model)
    _say(args, f"wrote {args.out}")
    return 0


# --------------------------------------------------------------- attack


def _load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            model = json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read model {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model {path} is not valid JSON: {exc}") from exc
    for key in ("algorithm", "theta", "preprocessing"):
        if key not in model:
            raise ConfigError(f"model {path} is missing {key!r}")
    return model


def _same_preprocessing(a, b):
    if bool(a.get("standardize")) != bool(b.get("standardize")):
        return False
    if list(a.get("feature_names", [])) != list(b.get("feature_names", [])):
        return False
    if a.get("label_name") != b.get("label_name"):
        return False
    if a.get("standardize"):
        return a.get("means") == b.get("means") and a.get("stds") == b.get("stds")
    return True


def _attacked_rows(path, ds, X_out):
    """Rebuild the test file's column order with manipulated feature values."""
    with open(path, newline="", encoding="utf-8") as f:
        header = [c.strip() for c in next(csv.reader(f))]
    col = {name: X_out[:, j] for j, name in enumerate(ds.feature_names)}
    rows = []
    for i in range(ds.m):
        rows.append(
            [ds.y[i] if name == ds.label_name else col[name][i] for name in header]
        )
    return header, rows


def cmd_attack(args):
    cfg = _load_config(args.config)
    model_paths = args.model if args.model else cfg.get("models")
    if not model_paths:
        raise ConfigError("attack needs at least one --model (or models in config)")
    models = [_load_model(p) for p in model_paths]
    prep = models[0]["preprocessing"]
    for path, model in zip(model_paths[1:], models[1:]):
        if not _same_preprocessing(prep, model["preprocessing"]):
            raise ConfigError(f"model {path} was trained with different preprocessing")

    test_path = _pick(args.test, cfg, "test", None)
    if test_path is None:
        raise ConfigError("attack needs a test CSV (--test or config)")
    label = _parse_label(_pick(args.label, cfg, "label", prep.get("label_name")))
    lam = float(_pick(args.lam, cfg, "lambda", 1.0))
    seed = _resolve_seed(args.seed, cfg)
    target = _target_from_dict(_target_dict_from_flags(args, cfg))

    ds = load_csv(test_path, label)
    if list(ds.feature_names) != list(prep.get("feature_names", [])):
        raise ConfigError("test feature columns do not match the model's training columns")
    thetas = np.array([m["theta"] for m in models], dtype=float)
    if thetas.ndim != 2 or thetas.shape[1] != ds.d:
        raise ConfigError("model coefficient lengths do not match the test features")

    if prep.get("standardize"):
        std = Standardizer(
            means=np.asarray(prep["means"], dtype=float),
            stds=np.asarray(prep["stds"], dtype=float),
        )
        X = apply_standardizer(std, ds.X)
    else:
        std, X = None, ds.X

    rng = np.random.default_rng(derive_seed(seed, _STREAM_ACTUAL_TARGET))
    target_r, drawn = _resolve_target(target, rng)
    sigma = label_stats(ds.y)[1]
    z = build_target(ds.y, target_r, sigma)

    profile = ThetaProfile(thetas)
    params = GameParams(n=profile.n, beta=1.0, lam=lam, z=z)
    X_att = attacker_best_response(profile, X, params)
    cost = attacker_cost(profile, X, X_att, params)
    shift = float(np.sqrt(np.sum((X_att - X) ** 2)))
    X_out = invert_standardizer(std, X_att) if std is not None else X_att

    header, rows = _attacked_rows(test_path, ds, X_out)
    write_csv(args.out, header, rows)
    _say(args, f"wrote {args.out}")

    echo_target = _target_meta(target)
    if drawn is not None:
        echo_target["value"] = drawn
    summary = {
        "config": {
            "command": "attack",
            "models": [str(p) for p in model_paths],
            "test": str(test_path),
            "label": label,
            "lambda": lam,
            "seed": seed,
            "target": echo_target,
        },
        "summary": {
            "attacker_cost": cost,
            "frobenius_shift": shift,
            "shift_space": "standardized" if std is not None else "original",
            "rows": ds.m,
            "n_models": profile.n,
            "algorithms": [m["algorithm"] for m in models],
            "sigma": sigma,
        },
    }
    summary_path = args.summary_out or (args.out + ".summary.json")
    write_json(summary_path, summary)
    _say(args, f"wrote {summary_path}")
    return 0


# ----------------------------------------------------- evaluate / sweep


def _scenario_from_config(cfg, seed):
    def setting(d):
        d = d or {}
        if not isinstance(d, dict):
            raise ConfigError(f"game setting must be a JSON object, got {d!r}")
        return GameSetting(
            lam=float(d.get("lambda", 1.0)),
            beta=float(d.get("beta", 0.5)),
            target=_target_from_dict(d.get("target")),
        )

    algorithms = cfg.get("algorithms")
    algorithms = tuple(algorithms) if algorithms else KNOWN_ALGORITHMS
    try:
        scen = ScenarioConfig(
            n=int(cfg.get("n", 5)),
            defender_estimates=setting(cfg.get("defender_estimates")),
            actual=setting(cfg.get("actual")),
            algorithms=algorithms,
            seed=seed,
            defender_knows_actual=bool(cfg.get("defender_knows_actual", False)),
            standardize=bool(cfg.get("standardize", True)),
            theta_radius=(
                None if cfg.get("theta_radius") is None else float(cfg["theta_radius"])
            ),
            fit=_fit_from_dict(cfg.get("fit")),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    echo = {
        "n": scen.n,
        "seed": seed,
        "algorithms": list(scen.algorithms),
        "defender_knows_actual": scen.defender_knows_actual,
        "standardize": scen.standardize,
        "theta_radius": scen.theta_radius,
        "defender_estimates": _setting_meta(scen.defender_estimates),
        "actual": _setting_meta(scen.actual),
        "fit": scen.fit.as_dict(),
    }
    return scen, echo


def _common_eval_inputs(args, cfg):
    dataset = _pick(args.dataset, cfg, "dataset", None)
    if dataset is None:
        raise ConfigError("need a dataset (--dataset or config)")
    label = _parse_label(_pick(args.label, cfg, "label", None))
    if label is None:
        raise ConfigError("need a label column (--label or config)")
    frac = float(_pick(args.train_fraction, cfg, "train_fraction", 0.5))
    if not 0.0 < frac < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {frac}")
    return dataset, label, frac


def cmd_evaluate(args):
    cfg = _load_config(args.config)
    dataset, label, frac = _common_eval_inputs(args, cfg)
    seed = _resolve_seed(args.seed, cfg)
    scen, echo = _scenario_from_config(cfg, seed)

    ds = load_csv(dataset, label)
    train, test = split_train_test(ds, frac, seed)
    report = run_scenario(train, test, scen)

    resolved = {
        "command": "evaluate",
        "dataset": str(dataset),
        "label": label,
        "train_fraction": frac,
        **echo,
    }
    _emit_json(args, {"config": resolved, "results": report.results,
                      "metadata": report.metadata})
    return 0


def cmd_sweep(args):
    cfg = _load_config(args.config)
    dataset, label, frac = _common_eval_inputs(args, cfg)
    seed = _resolve_seed(args.seed, cfg)
    scen, echo = _scenario_from_config(cfg, seed)
    lambda_grid = cfg.get("lambda_grid")
    beta_grid = cfg.get("beta_grid")
    if not lambda_grid or not beta_grid:
        raise ConfigError("sweep needs lambda_grid and beta_grid in the config")
    repeats = int(_pick(args.repeats, cfg, "repeats", 1))
    jobs = args.jobs if args.jobs is not None else cfg.get("jobs")

    ds = load_csv(dataset, label)
    train, test = split_train_test(ds, frac, seed)
    grid = run_sweep(train, test, scen, lambda_grid, beta_grid, repeats, seed, jobs=jobs)

    write_csv(args.out, CSV_HEADER, grid.csv_rows())
    _say(args, f"wrote {args.out}")
    # jobs is deliberately not echoed: worker count must never change output bytes
    resolved = {
        "command": "sweep",
        "dataset": str(dataset),
        "label": label,
        "train_fraction": frac,
        "lambda_grid": [float(v) for v in lambda_grid],
        "beta_grid": [float(v) for v in beta_grid],
        "repeats": repeats,
        **echo,
    }
    meta_path = args.out + ".meta.json"
    write_json(meta_path, {"config": resolved, "grid": grid.as_dict()})
    _say(args, f"wrote {meta_path}")
    return 0


# --------------------------------------------------------------- verify


def cmd_verify(args):
    cfg = _load_config(args.config)
    names = args.checks if args.checks is not None else cfg.get("checks")
    if names is None or names == "all":
        selected = list(ALL_CHECKS)
    elif names == "core":
        selected = list(CORE_CHECKS)
    elif isinstance(names, str):
        selected = [s.strip() for s in names.split(",") if s.strip()]
    else:
        selected = [str(s) for s in names]
    unknown = [s for s in selected if s not in ALL_CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks {unknown}; available: {sorted(ALL_CHECKS)}")
    trials = int(_pick(args.trials, cfg, "trials", 1000))
    seed = _resolve_seed(args.seed, cfg)

    reports = run_checks(selected, trials=trials, seed=seed)
    for rep in reports:
        status = "PASS" if rep.passed else "FAIL"
        _say(args, f"{status}  {rep.check_name:<24s} {rep.failures}/{rep.trials} failures"
                   f"  worst violation {rep.worst_violation:.3e}")
    doc = {
        "config": {"command": "verify", "checks": selected, "trials": trials, "seed": seed},
        "reports": [rep.as_dict() for rep in reports],
    }
    if args.out:
        write_json(args.out, doc)
        _say(args, f"wrote {args.out}")
    return 5 if any(not rep.passed for rep in reports) else 0


# ----------------------------------------------------------------- main


def build_parser():
    parser = argparse.ArgumentParser(
        prog="advreg",
        description="Adversarial linear regression: equilibrium models, "
                    "optimal data manipulation, benchmarks, and certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required, out_help):
        p.add_argument("--config", metavar="PATH",
                       help="JSON config; an emitted artifact's embedded config replays it")
        p.add_argument("--seed", type=int,
                       help="RNG seed (precedence: flag, config, ADVREG_SEED, 0)")
        p.add_argument("--quiet", action="store_true", help="suppress status lines")
        p.add_argument("--out", metavar="PATH", required=out_required, help=out_help)

    t = sub.add_parser("train", help="fit one model on a CSV and save it as JSON")
    common(t, True, "model JSON output path")
    t.add_argument("--dataset", metavar="CSV")
    t.add_argument("--label", help="label column name or 0-based index")
    t.add_argument("--algorithm", choices=sorted(KNOWN_ALGORITHMS))
    t.add_argument("--n", type=int, help="number of symmetric learners (mlsg)")
    t.add_argument("--lambda", dest="lam", type=float, help="attacker effort price")
    t.add_argument("--beta", type=float, help="attack probability the defender plans for")
    t.add_argument("--radius", type=float, help="coefficient norm bound (mlsg)")
    t.add_argument("--alpha", type=float, help="ridge/lasso penalty; omit to cross-validate")
    t.add_argument("--delta-scale", type=float,
                   help="attack target offset, in label standard deviations")
    t.add_argument("--clip-min", type=float)
    t.add_argument("--clip-max", type=float)
    t.add_argument("--constant-value", type=float, help="constant attack target value")
    t.add_argument("--no-standardize", action="store_true")
    t.set_defaults(func=cmd_train)

    a = sub.add_parser("attack", help="optimally manipulate a test CSV against saved models")
    common(a, True, "attacked CSV output path")
    a.add_argument("--model", action="append", metavar="JSON",
                   help="saved model; repeat to attack several at once")
    a.add_argument("--test", metavar="CSV")
    a.add_argument("--label", help="label column (default: from the model)")
    a.add_argument("--lambda", dest="lam", type=float, help="attacker effort price")
    a.add_argument("--delta-scale", type=float)
    a.add_argument("--clip-min", type=float)
    a.add_argument("--clip-max", type=float)
    a.add_argument("--constant-value", type=float)
    a.add_argument("--summary-out", metavar="PATH",
                   help="summary JSON path (default: <out>.summary.json)")
    a.set_defaults(func=cmd_attack)

    e = sub.add_parser("evaluate", help="run one train/attack/score scenario")
    common(e, False, "report JSON path (default: stdout)")
    e.add_argument("--dataset", metavar="CSV")
    e.add_argument("--label")
    e.add_argument("--train-fraction", type=float)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("sweep", help="scenario grid over lambda and beta, averaged over repeats")
    common(s, True, "grid CSV output path (metadata goes to <out>.meta.json)")
    s.add_argument("--dataset", metavar="CSV")
    s.add_argument("--label")
    s.add_argument("--train-fraction", type=float)
    s.add_argument("--repeats", type=int)
    s.add_argument("--jobs", type=int, help="worker threads (output bytes do not depend on this)")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run randomized numerical certificates")
    common(v, False, "report JSON path (optional)")
    v.add_argument("--checks", help='comma-separated names, "core", or "all" (default)')
    v.add_argument("--trials", type=int, help="random instances per check (default 1000)")
    v.set_defaults(func=cmd_verify)
    return parser


_DATA_ERRORS = (
    ParseError,
    MissingLabelColumn,
    EmptyFile,
    TooFewRows,
    MaskOutOfRange,
    DimensionMismatch,
    FileNotFoundError,
)
_SOLVER_ERRORS = (SingularDesign, NotPositiveDefinite, NoConvergence, NonFinite)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args) or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _SOLVER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
