"""Symmetric equilibrium of the decoupled learner game.

With every learner using the surrogate cost, the unique symmetric
equilibrium is the minimizer over the feasible ball of

    f(theta) = ||X theta - y||^2 + (kappa / 4) * (theta^T theta)^2,
    kappa = 2 * beta * (n + 1) * ||z - y||^2 / lam^2,

a strictly convex objective. Two independent solvers are provided and
cross-checked in the tests:

* `solve_equilibrium_bisection` — the stationarity condition
  (X^T X + (kappa/2) s I) theta = X^T y with s = theta^T theta reduces the
  problem to one scalar root-find; g(s) = ||theta(s)||^2 - s is strictly
  decreasing on [0, ||theta_OLS||^2], so bisection brackets the root, and a
  few safeguarded Newton steps polish it to near machine precision.
* `solve_equilibrium_pgd` — projected gradient descent with Armijo
  backtracking, the workhorse that also handles an active ball constraint.

When the unconstrained stationary point lies outside the ball, the
bisection result is only the radial projection (flagged `on_boundary`);
`solve_equilibrium` then defers to PGD, which is authoritative there.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import MaxItersExceeded, NonFinite, NotPositiveDefinite, SingularDesign
from .game import sq_norm
from .linalg import pd_check, solve_spd


@dataclass(eq=False)
class EquilibriumSolution:
    theta_star: np.ndarray
    s_star: float          # theta_star^T theta_star
    grad_norm: float       # ||gradient of f at theta_star||
    iterations: int
    solver: str            # "bisection" | "pgd"
    on_boundary: bool
    converged: bool = True


def _kappa(params, y):
    return 2.0 * params.beta * (params.n + 1) * sq_norm(params.z - y) / params.lam**2


def equilibrium_objective(theta, X, y, params):
    theta = np.asarray(theta, dtype=float)
    s = sq_norm(theta)
    return sq_norm(X @ theta - y) + 0.25 * _kappa(params, y) * s * s


def equilibrium_gradient(theta, X, y, params):
    theta = np.asarray(theta, dtype=float)
    X = np.asarray(X, dtype=float)
    return 2.0 * (X.T @ (X @ theta - y)) + _kappa(params, y) * sq_norm(theta) * theta


def project_to_ball(theta, radius):
    """Radial projection onto {v : ||v||_2 <= radius}; no-op inside."""
    theta = np.asarray(theta, dtype=float)
    nrm = float(np.sqrt(theta @ theta))
    if nrm <= radius:
        return theta.copy()
    return theta * (radius / nrm)


def default_radius(X, y):
    """Default feasible-ball radius: 10x the norm of the least-squares fit."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    theta = _ols(X.T @ X, X.T @ y)
    return 10.0 * float(np.sqrt(theta @ theta))


def _ols(XtX, Xty):
    try:
        return solve_spd(XtX, Xty)
    except NotPositiveDefinite as exc:
        raise SingularDesign("X^T X is not numerically positive definite") from exc


def _resolve_radius(X, y, params):
    if params.theta_radius is not None:
        return params.theta_radius
    return default_radius(X, y)


def solve_equilibrium_bisection(X, y, params, tol=1e-10):
    """Scalar-root solver for the symmetric equilibrium.

    Bisects g(s) = ||theta(s)||^2 - s on [0, ||theta_OLS||^2] until the
    bracket width drops below `tol`, then applies up to 4 safeguarded
    Newton steps (g' = -kappa * theta^T M^-1 theta - 1 <= -1, so Newton is
    well defined and stays in the bracket). If the resulting point lies
    outside the feasible ball it is radially projected and flagged
    `on_boundary`; the PGD solver is authoritative in that regime.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    XtX = X.T @ X
    Xty = X.T @ y
    if not pd_check(XtX):
        raise SingularDesign("X^T X is not numerically positive definite")
    radius = _resolve_radius(X, y, params)
    kappa = _kappa(params, y)
    if not np.isfinite(kappa):
        raise NonFinite("quartic coefficient overflowed")
    eye = np.eye(X.shape[1])

    theta_ols = _ols(XtX, Xty)
    if kappa == 0.0:
        # surrogate collapses to plain least squares
        return _finish(theta_ols, X, y, params, radius, 0, "bisection")

    def theta_of(s):
        th = solve_spd(XtX + (0.5 * kappa * s) * eye, Xty)
        if not np.all(np.isfinite(th)):
            raise NonFinite("bisection iterate is non-finite")
        return th

    lo, hi = 0.0, sq_norm(theta_ols)
    iters = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sq_norm(theta_of(mid)) - mid > 0.0:
            lo = mid
        else:
            hi = mid
        iters += 1
    s = 0.5 * (lo + hi)
    for _ in range(4):
        M = XtX + (0.5 * kappa * s) * eye
        th = solve_spd(M, Xty)
        g = sq_norm(th) - s
        if abs(g) <= 1e-15 * max(1.0, s):
            break
        gprime = -kappa * float(th @ solve_spd(M, th)) - 1.0
        step = s - g / gprime
        s = min(max(step, lo), hi)
        iters += 1
    theta = theta_of(s)
    return _finish(theta, X, y, params, radius, iters, "bisection")


def _finish(theta, X, y, params, radius, iters, solver, converged=True):
    nrm = float(np.sqrt(theta @ theta))
    on_boundary = nrm > radius * (1.0 + 1e-12)
    if on_boundary:
        theta = project_to_ball(theta, radius)
    grad = equilibrium_gradient(theta, X, y, params)
    return EquilibriumSolution(
        theta_star=theta,
        s_star=sq_norm(theta),
        grad_norm=float(np.sqrt(grad @ grad)),
        iterations=iters,
        solver=solver,
        on_boundary=on_boundary,
        converged=converged,
    )


def solve_equilibrium_pgd(X, y, params, tol=1e-8, max_iters=50000):
    """Projected gradient descent on f over the feasible ball.

    Armijo backtracking (c1 = 1e-4, shrink 0.5) starting from step
    1 / L_hat, where L_hat = 2 * (Gershgorin bound on X^T X) +
    6 * kappa * R^2 upper-bounds the curvature on the ball; accepted
    steps double on the next iteration so the step length adapts to the
    local curvature. Stops when the projected-gradient measure at the
    reference step falls below tol * (1 + ||2 X^T y||). Hitting
    `max_iters` returns the best iterate flagged `converged=False` and
    emits a MaxItersExceeded warning.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    XtX = X.T @ X
    Xty = X.T @ y
    if not pd_check(XtX):
        raise SingularDesign("X^T X is not numerically positive definite")
    radius = _resolve_radius(X, y, params)
    kappa = _kappa(params, y)
    if not np.isfinite(kappa):
        raise NonFinite("quartic coefficient overflowed")

    gersh = float(np.max(np.sum(np.abs(XtX), axis=1)))
    L_hat = 2.0 * gersh + 6.0 * kappa * radius * radius
    t_ref = 1.0 / L_hat
    gscale = 1.0 + float(np.sqrt((2.0 * Xty) @ (2.0 * Xty)))

    theta = project_to_ball(_ols(XtX, Xty), radius)
    f_cur = equilibrium_objective(theta, X, y, params)
    t = t_ref
    c1 = 1e-4
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        grad = equilibrium_gradient(theta, X, y, params)
        pg = (theta - project_to_ball(theta - t_ref * grad, radius)) / t_ref
        if float(np.sqrt(pg @ pg)) <= tol * gscale:
            converged = True
            iters -= 1
            break
        while True:
            cand = project_to_ball(theta - t * grad, radius)
            f_cand = equilibrium_objective(cand, X, y, params)
            decrease = float(grad @ (cand - theta))
            if np.isfinite(f_cand) and f_cand <= f_cur + c1 * decrease:
                break
            t *= 0.5
            if t < 1e-300:
                raise NonFinite("line search collapsed")
        theta, f_cur = cand, f_cand
        t *= 2.0
    if not converged:
        warnings.warn(
            f"projected gradient stopped at max_iters={max_iters}", MaxItersExceeded
        )
    sol = _finish(theta, X, y, params, radius, iters, "pgd", converged=converged)
    # boundary contact is legitimate here, not a hand-off signal
    nrm = float(np.sqrt(sol.theta_star @ sol.theta_star))
    sol.on_boundary = nrm >= radius * (1.0 - 1e-9)
    return sol


def solve_equilibrium(X, y, params, tol=1e-10, pgd_tol=1e-8, max_iters=50000):
    """Bisection first; fall back to PGD when the ball constraint binds."""
    sol = solve_equilibrium_bisection(X, y, params, tol=tol)
    if sol.on_boundary:
        return solve_equilibrium_pgd(X, y, params, tol=pgd_tol, max_iters=max_iters)
    return sol
