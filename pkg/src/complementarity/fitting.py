"""Learning the agents' linear policies.

The machine is fit by ordinary least squares. The human minimizes the
rank-weighted squared loss from :mod:`complementarity.objectives`; that
objective is not separable across instances, so it is fit by alternating
between ranking the current residuals and solving the weighted least-squares
problem those ranks induce.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import IllConditionedError, InvalidConfigError, StructuralError
from .objectives import RANK_MODES, RankMode, eval_rank_weighted, v_weights
from .synthgen import FeatureView

log = logging.getLogger(__name__)

# beyond this the normal equations are treated as singular and ridge_epsilon kicks in
SINGULAR_COND = 1e12
# after regularization anything worse than 1 / machine epsilon is unusable
MAX_COND = 1.0 / np.finfo(np.float64).eps


@dataclass(frozen=True)
class FitConfig:
    include_intercept: bool = False
    max_outer_iters: int = 100
    convergence_tol: float = 1e-8
    ridge_epsilon: float = 1e-10
    rank_mode: RankMode = "sorted"

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise InvalidConfigError("must be >= 1", "fit.max_outer_iters")
        if not self.convergence_tol > 0:
            raise InvalidConfigError("must be positive", "fit.convergence_tol")
        if not self.ridge_epsilon >= 0:
            raise InvalidConfigError("must be nonnegative", "fit.ridge_epsilon")
        if self.rank_mode not in RANK_MODES:
            raise InvalidConfigError(f"must be one of {RANK_MODES}", "fit.rank_mode")


@dataclass(frozen=True, eq=False)
class LinearPolicy:
    """``x -> x[view] @ coefficients + intercept``.

    ``converged``, ``objective`` and ``iterations`` are diagnostics filled in by
    :func:`fit_rank_weighted`; OLS fits leave the defaults.
    """

    coefficients: NDArray[np.float64]
    view: FeatureView
    intercept: float = 0.0
    converged: bool = True
    objective: float | None = None
    iterations: int = 0
    history: tuple[float, ...] = field(default=())

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=np.float64)
        if coef.ndim != 1 or coef.size != len(self.view):
            raise StructuralError(f"{coef.size} coefficients for a view of {len(self.view)} features")
        if not (np.all(np.isfinite(coef)) and np.isfinite(self.intercept)):
            raise StructuralError("policy parameters must be finite")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "intercept", float(self.intercept))


def predict(policy: LinearPolicy, X: ArrayLike) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    return policy.view.select(X) @ policy.coefficients + policy.intercept


def _design(X, y, view, cfg):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise StructuralError(f"design {X.shape} does not match target {y.shape}")
    view = view or FeatureView.full(X.shape[1])
    A = view.select(X)
    if cfg.include_intercept:
        A = np.column_stack([A, np.ones(A.shape[0])])
    if A.shape[0] < A.shape[1]:
        raise StructuralError(f"{A.shape[0]} rows cannot identify {A.shape[1]} parameters")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(y))):
        raise StructuralError("design matrix and target must be finite")
    return A, y, view


def _cond(G):
    s = np.linalg.svd(G, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else np.inf


def _solve_normal(A, y, weights, ridge_epsilon):
    """Solve ``(A' W A) c = A' W y``; add ``ridge_epsilon * I`` only if singular."""
    if weights is None:
        G = A.T @ A
        rhs = A.T @ y
    else:
        G = A.T @ (weights[:, None] * A)
        rhs = A.T @ (weights * y)
    cond = _cond(G)
    if not (np.isfinite(cond) and cond <= SINGULAR_COND):
        G = G + ridge_epsilon * np.eye(G.shape[0])
        cond = _cond(G)
        if not (np.isfinite(cond) and cond <= MAX_COND):
            raise IllConditionedError("normal equations are singular after regularization", cond)
    return scipy.linalg.solve(G, rhs, assume_a="sym")


def _policy(params, view, cfg, **diag):
    if cfg.include_intercept:
        return LinearPolicy(params[:-1], view, intercept=params[-1], **diag)
    return LinearPolicy(params, view, **diag)


def fit_ols(
    X: ArrayLike, y: ArrayLike, cfg: FitConfig | None = None, view: FeatureView | None = None
) -> LinearPolicy:
    """Least-squares fit of ``y`` on the ``view`` columns of ``X`` (all columns by default)."""
    cfg = cfg or FitConfig()
    A, y, view = _design(X, y, view, cfg)
    return _policy(_solve_normal(A, y, None, cfg.ridge_epsilon), view, cfg)


def fit_rank_weighted(
    X: ArrayLike,
    y: ArrayLike,
    a: float,
    b: float,
    cfg: FitConfig | None = None,
    view: FeatureView | None = None,
) -> LinearPolicy:
    """Approximate minimizer of the rank-weighted squared loss over linear policies.

    Starting from OLS, each outer iteration ranks the current squared
    residuals (ascending, stable), gives instance ``i`` the weight of its rank,
    and re-solves the weighted least-squares problem. Stops once the objective
    improves by less than ``cfg.convergence_tol``; the best iterate is
    returned. Running out of iterations sets ``converged=False`` instead of
    raising.
    """
    cfg = cfg or FitConfig()
    A, y, view = _design(X, y, view, cfg)
    n = y.size
    vw = v_weights(a, b, n)  # raises on negative weights

    ols = _solve_normal(A, y, None, cfg.ridge_epsilon)
    if np.all(vw.values == 1.0):
        # identical objective to OLS; return the same bits so downstream ties stay exact
        obj = float(np.mean((A @ ols - y) ** 2))
        return _policy(ols, view, cfg, objective=obj, history=(obj,))

    def objective(params):
        return eval_rank_weighted(A @ params, y, vw, cfg.rank_mode)

    params = ols
    best, best_obj = ols, objective(ols)
    history = [best_obj]
    prev_obj = best_obj
    converged = False
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        losses = (A @ params - y) ** 2
        if cfg.rank_mode == "sorted":
            weights = np.empty(n)
            weights[np.argsort(losses, kind="stable")] = vw.values
        else:
            weights = vw.values
        params = _solve_normal(A, y, weights, cfg.ridge_epsilon)
        obj = objective(params)
        if obj < best_obj:
            best, best_obj = params, obj
        history.append(min(history[-1], obj))
        if prev_obj - obj < cfg.convergence_tol:
            converged = True
            break
        prev_obj = obj
    if not converged:
        log.warning("rank-weighted fit did not converge in %d iterations", cfg.max_outer_iters)
    return _policy(
        best, view, cfg, converged=converged, objective=best_obj, iterations=it, history=tuple(history)
    )
