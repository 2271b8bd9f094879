"""Oracle-optimal convex weights for combining the two agents.

Weights are free per-instance variables chosen *with access to the true
targets*, so the result is an upper bound on what any human-ML combination
of these two predictors could achieve on the data, not a deployable router.

For instance ``i`` write ``delta_i = pred_h - pred_m`` and ``r_i = pred_m - y``;
the joint squared loss is the 1-d quadratic ``(w * delta_i + r_i)^2``.

* Under MSE the objective is separable and each weight has a closed form.
* Under a rank-weighted or blended objective the loss is an L-statistic of
  the per-instance losses. With the ranking held fixed every instance has a
  constant coefficient, so each weight again has a closed form; the solver
  alternates between ranking and that update from several starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .core import PredictionSet, WeightVector
from .errors import InvalidConfigError
from .objectives import EvaluationSpec, evaluate, loss_coefficients, weighted_loss

TieBreak = Literal["machine", "human", "half"]
TIE_BREAKS = ("machine", "human", "half")
TIE_WEIGHT = {"machine": 0.0, "human": 1.0, "half": 0.5}

GRID_ORACLE_MAX_N = 6
_GRID_CHUNK = 1 << 18


@dataclass(frozen=True)
class CombinerConfig:
    tie_break: TieBreak = "machine"
    max_iters: int = 200
    tol: float = 1e-9
    restarts: int = 5
    grid_resolution: float = 0.01
    step_size: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.tie_break not in TIE_BREAKS:
            raise InvalidConfigError(f"must be one of {TIE_BREAKS}", "combiner.tie_break")
        if self.max_iters < 1:
            raise InvalidConfigError("must be >= 1", "combiner.max_iters")
        if not self.tol > 0:
            raise InvalidConfigError("must be positive", "combiner.tol")
        if self.restarts < 1:
            raise InvalidConfigError("must be >= 1", "combiner.restarts")
        if not self.step_size > 0:
            raise InvalidConfigError("must be positive", "combiner.step_size")
        _grid_points(self.grid_resolution, "combiner.grid_resolution")


def _grid_points(resolution: float, field: str = "resolution") -> int:
    if not 0 < resolution <= 1:
        raise InvalidConfigError(f"must lie in (0, 1], got {resolution}", field)
    steps = round(1.0 / resolution)
    if abs(steps * resolution - 1.0) > 1e-12:
        raise InvalidConfigError(f"{resolution} does not divide 1 evenly", field)
    return steps + 1


def closed_form_weight(
    pred_h: float, pred_m: float, y: float, cfg: CombinerConfig | None = None
) -> float:
    """Human weight in ``[0, 1]`` minimizing ``(w * pred_h + (1 - w) * pred_m - y)^2``."""
    cfg = cfg or CombinerConfig()
    if pred_h == pred_m:
        return TIE_WEIGHT[cfg.tie_break]
    return min(1.0, max(0.0, (y - pred_m) / (pred_h - pred_m)))


def closed_form_weights(delta: NDArray, resid_m: NDArray, tie_break: TieBreak) -> NDArray:
    """Vectorized :func:`closed_form_weight` on ``delta = pred_h - pred_m``, ``resid_m = pred_m - y``."""
    w = np.full(delta.shape, TIE_WEIGHT[tie_break])
    moving = delta != 0
    w[moving] = np.clip(-resid_m[moving] / delta[moving], 0.0, 1.0)
    return w


def optimize_weights_mse(preds: PredictionSet, cfg: CombinerConfig | None = None) -> WeightVector:
    """Instance-wise closed form; exact because the squared loss is separable."""
    cfg = cfg or CombinerConfig()
    w = closed_form_weights(preds.pred_h - preds.pred_m, preds.pred_m - preds.y, cfg.tie_break)
    return WeightVector.from_human(w)


class _Problem:
    """Objective in weight space: ``sign * sum_k coef[k] * loss[k]``."""

    def __init__(self, preds: PredictionSet, spec: EvaluationSpec):
        self.delta = preds.pred_h - preds.pred_m
        self.resid = preds.pred_m - preds.y
        self.n = len(preds)
        self.sorted = spec.kind != "mse" and spec.rank_mode == "sorted"
        self.coef = spec.sign * loss_coefficients(spec, self.n)

    def losses(self, w):
        return (w * self.delta + self.resid) ** 2

    def __call__(self, w) -> float:
        return weighted_loss(self.losses(w), self.coef, "sorted" if self.sorted else "fixed_index")

    def instance_coef(self, w):
        """Coefficient each instance carries under the ranking induced by ``w``."""
        if not self.sorted:
            return self.coef
        c = np.empty(self.n)
        c[np.argsort(self.losses(w), kind="stable")] = self.coef
        return c


def _alternating_step(prob: _Problem, w: NDArray, tie_break: TieBreak) -> NDArray:
    c = prob.instance_coef(w)
    new = closed_form_weights(prob.delta, prob.resid, tie_break)
    # negative coefficient: the instance wants its loss as large as possible
    loss0 = prob.resid**2
    loss1 = (prob.delta + prob.resid) ** 2
    far = np.where(loss1 > loss0, 1.0, np.where(loss1 < loss0, 0.0, TIE_WEIGHT[tie_break] >= 1.0))
    new = np.where(c > 0, new, np.where(c < 0, far, TIE_WEIGHT[tie_break]))
    return new.astype(np.float64)


def _projected_gradient(prob: _Problem, w: NDArray, cfg: CombinerConfig) -> tuple[NDArray, float]:
    """Normalized projected subgradient descent with a 1/sqrt(k) schedule; returns best visited."""
    best, best_obj = w, prob(w)
    for k in range(cfg.max_iters):
        g = prob.instance_coef(w) * 2.0 * (w * prob.delta + prob.resid) * prob.delta
        scale = np.max(np.abs(g))
        if scale == 0:
            break
        w = np.clip(w - cfg.step_size / math.sqrt(k + 1) * g / scale, 0.0, 1.0)
        obj = prob(w)
        if obj < best_obj:
            best, best_obj = w, obj
    return best, best_obj


def _run_from(prob: _Problem, w: NDArray, cfg: CombinerConfig) -> tuple[NDArray, float]:
    """Alternate from ``w`` until a rank-consistent fixed point; polish with PGD if it cycles."""
    best, best_obj = w, prob(w)
    prev_obj = best_obj
    fixed_point = False
    for _ in range(cfg.max_iters):
        nxt = _alternating_step(prob, w, cfg.tie_break)
        obj = prob(nxt)
        # non-strict so the first step replaces an equally good start (tie-break takes effect)
        if obj <= best_obj:
            best, best_obj = nxt, obj
        if np.array_equal(nxt, w):
            fixed_point = True
            break
        if prev_obj - obj < cfg.tol:
            break
        w, prev_obj = nxt, obj
    if not fixed_point:
        w, obj = _projected_gradient(prob, best, cfg)
        if obj < best_obj:
            best, best_obj = w, obj
    return best, best_obj


def optimize_weights_general(
    preds: PredictionSet, spec: EvaluationSpec, cfg: CombinerConfig | None = None
) -> WeightVector:
    """Multi-start fixed-rank alternating minimization for rank-dependent objectives.

    Starts, in order: the MSE closed form, all-machine, all-human, all-half,
    then ``cfg.restarts`` uniform random vectors. The winner (ties go to the
    earlier start) is finally compared with the two constant policies so the
    result never scores worse than either agent alone.
    """
    cfg = cfg or CombinerConfig()
    prob = _Problem(preds, spec)
    n = prob.n
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    starts = [
        closed_form_weights(prob.delta, prob.resid, cfg.tie_break),
        np.zeros(n),
        np.ones(n),
        np.full(n, 0.5),
    ]
    starts += [rng.random(n) for _ in range(cfg.restarts)]

    best, best_obj = None, np.inf
    for start in starts:
        w, obj = _run_from(prob, start, cfg)
        if obj < best_obj:
            best, best_obj = w, obj
    for const in (np.zeros(n), np.ones(n)):
        obj = prob(const)
        if obj < best_obj:
            best, best_obj = const, obj
    return WeightVector.from_human(best)


def optimize_weights(
    preds: PredictionSet, spec: EvaluationSpec | None = None, cfg: CombinerConfig | None = None
) -> WeightVector:
    """Closed form for minimized MSE, the iterative solver for everything else."""
    spec = spec or EvaluationSpec.mse()
    if spec.kind == "mse" and spec.direction == "minimize":
        return optimize_weights_mse(preds, cfg)
    return optimize_weights_general(preds, spec, cfg)


def grid_oracle(
    preds: PredictionSet, spec: EvaluationSpec, resolution: float
) -> tuple[WeightVector, float]:
    """Exhaustive search over the product grid ``{0, r, 2r, ..., 1}^n``.

    Only meant as a test oracle: the cost grows like ``(1/r + 1)^n``, so
    ``n`` is capped at 6. Ties go to the first grid point in lexicographic
    order. Returns the best weights and their (unsigned) objective value.
    """
    n = len(preds)
    if n > GRID_ORACLE_MAX_N:
        raise InvalidConfigError(
            f"grid oracle is exponential in n; refusing n={n} > {GRID_ORACLE_MAX_N}", "n"
        )
    m = _grid_points(resolution)
    axis = np.linspace(0.0, 1.0, m)
    prob = _Problem(preds, spec)
    total = m**n
    best_idx, best_obj = 0, np.inf
    for start in range(0, total, _GRID_CHUNK):
        flat = np.arange(start, min(total, start + _GRID_CHUNK))
        W = axis[np.stack(np.unravel_index(flat, (m,) * n), axis=1)]
        L = (W * prob.delta + prob.resid) ** 2
        if prob.sorted:
            L = np.sort(L, axis=1, kind="stable")
        obj = L @ prob.coef
        k = int(np.argmin(obj))
        if obj[k] < best_obj:
            best_idx, best_obj = start + k, obj[k]
    w = axis[np.array(np.unravel_index(best_idx, (m,) * n))]
    weights = WeightVector.from_human(w)
    return weights, evaluate(preds.joint(weights), preds.y, spec)


def discretization_bound(preds: PredictionSet, spec: EvaluationSpec, resolution: float) -> float:
    """Upper bound on how far the grid optimum can sit above the continuous optimum.

    Moving each weight by at most ``resolution`` changes each loss by at most
    ``|delta| r (2 |e| + |delta| r)`` where ``|e|`` bounds the joint error; the
    sorted L-statistic is Lipschitz in the sup-norm of the losses with
    constant ``sum |coef|``.
    """
    delta = np.abs(preds.pred_h - preds.pred_m)
    worst_err = np.maximum(np.abs(preds.pred_h - preds.y), np.abs(preds.pred_m - preds.y))
    per_loss = delta * resolution * (2.0 * worst_err + delta * resolution)
    coef = loss_coefficients(spec, len(preds))
    return float(np.sum(np.abs(coef)) * np.max(per_loss))

