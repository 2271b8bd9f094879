"""Evaluation functions for scoring individual and joint policies.

Three losses are supported:

* ``mse``: plain mean squared error, the machine's objective.
* ``rank_weighted``: a rank-dependent (L-statistic) squared loss whose rank
  coefficients come from the derivative of a CPT probability-weighting
  function with fixed point ``a`` and curvature ``b``. This is the human's
  objective.
* ``blended``: ``theta * mse + (1 - theta) * rank_weighted``.

Every objective can be written as ``sum_k coef[k] * loss[k]`` where ``loss`` is
either sorted ascending (``rank_mode="sorted"``) or left in instance order
(``rank_mode="fixed_index"``). :func:`loss_coefficients` exposes that form;
the optimizers in :mod:`complementarity.combiner` work on it directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidConfigError, StructuralError

Kind = Literal["mse", "rank_weighted", "blended"]
Direction = Literal["minimize", "maximize"]
RankMode = Literal["sorted", "fixed_index"]

KINDS = ("mse", "rank_weighted", "blended")
DIRECTIONS = ("minimize", "maximize")
RANK_MODES = ("sorted", "fixed_index")


@dataclass(frozen=True)
class EvaluationSpec:
    """Which objective a policy is scored with.

    ``a`` and ``b`` are required for ``rank_weighted`` and ``blended``;
    ``theta`` only for ``blended``. Passing a parameter the kind does not use
    is an error rather than being silently ignored.
    """

    kind: Kind = "mse"
    a: float | None = None
    b: float | None = None
    theta: float | None = None
    direction: Direction = "minimize"
    rank_mode: RankMode = "sorted"
    allow_negative: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigError(f"must be one of {KINDS}, got {self.kind!r}", "kind")
        if self.direction not in DIRECTIONS:
            raise InvalidConfigError(
                f"must be one of {DIRECTIONS}, got {self.direction!r}", "direction"
            )
        if self.rank_mode not in RANK_MODES:
            raise InvalidConfigError(
                f"must be one of {RANK_MODES}, got {self.rank_mode!r}", "rank_mode"
            )
        needs_ab = self.kind in ("rank_weighted", "blended")
        needs_theta = self.kind == "blended"
        for name, needed in (("a", needs_ab), ("b", needs_ab), ("theta", needs_theta)):
            value = getattr(self, name)
            if needed and value is None:
                raise InvalidConfigError(f"required when kind={self.kind}", name)
            if not needed and value is not None:
                raise InvalidConfigError(f"not used when kind={self.kind}", name)
        if needs_ab:
            _check_ab(self.a, self.b)
        if needs_theta and not 0.0 <= self.theta <= 1.0:
            raise InvalidConfigError(f"must lie in [0, 1], got {self.theta}", "theta")

    @classmethod
    def mse(cls, **kwargs) -> EvaluationSpec:
        return cls(kind="mse", **kwargs)

    @classmethod
    def rank_weighted(cls, a: float, b: float, **kwargs) -> EvaluationSpec:
        return cls(kind="rank_weighted", a=a, b=b, **kwargs)

    @classmethod
    def blended(cls, a: float, b: float, theta: float, **kwargs) -> EvaluationSpec:
        return cls(kind="blended", a=a, b=b, theta=theta, **kwargs)

    @property
    def sign(self) -> float:
        """+1 when smaller is better, -1 otherwise."""
        return 1.0 if self.direction == "minimize" else -1.0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "a": self.a,
            "b": self.b,
            "theta": self.theta,
            "direction": self.direction,
            "rank_mode": self.rank_mode,
            "allow_negative": self.allow_negative,
        }


def _check_ab(a, b):
    if not 0.0 <= a <= 1.0:
        raise InvalidConfigError(f"must lie in [0, 1], got {a}", "a")
    if not b > 0.0:
        raise InvalidConfigError(f"must be positive, got {b}", "b")


@dataclass(frozen=True)
class VWeights:
    """Per-rank loss multipliers for a rank-weighted objective."""

    values: NDArray[np.float64]
    a: float
    b: float

    def __len__(self):
        return len(self.values)

    @property
    def has_negative(self) -> bool:
        return bool(np.any(self.values < 0))


def v_weights(a: float, b: float, n: int, allow_negative: bool = False) -> VWeights:
    """Rank coefficients ``v_1..v_n`` of the CPT-weighted squared loss.

    ``v_i = (3 - 3b) / (a^2 - a + 1) * (3 i^2 / n^2 - 2 (a + 1) i / n + a) + 1``

    For ``b = 1`` every coefficient is exactly 1.0. Weights can turn negative
    for ``b > 1`` (at ``a = 0.5`` once ``b > 1.5``); that breaks monotonicity of
    the implied weighting function, so it is rejected unless ``allow_negative``.
    """
    if n < 1:
        raise InvalidConfigError(f"must be >= 1, got {n}", "n")
    _check_ab(a, b)
    i = np.arange(1, n + 1, dtype=np.float64)
    scale = (3.0 - 3.0 * b) / (a * a - a + 1.0)
    values = scale * (3.0 * i**2 / n**2 - 2.0 * (a + 1.0) * i / n + a) + 1.0
    if not allow_negative:
        negative = np.flatnonzero(values < 0)
        if negative.size:
            k = int(negative[0]) + 1
            raise InvalidConfigError(
                f"negative rank weight v_{k} = {values[k - 1]:.6g} for a={a}, b={b}, n={n}, i={k}"
                " (pass allow_negative=True to explore this region)",
                "b",
            )
    values.setflags(write=False)
    return VWeights(values=values, a=float(a), b=float(b))


def _as_pair(preds: ArrayLike, y: ArrayLike) -> tuple[NDArray, NDArray]:
    preds = np.asarray(preds, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if preds.shape != y.shape or preds.ndim != 1:
        raise StructuralError(f"prediction/target shape mismatch: {preds.shape} vs {y.shape}")
    if preds.size == 0:
        raise StructuralError("need at least one instance")
    return preds, y


def eval_mse(preds: ArrayLike, y: ArrayLike) -> float:
    preds, y = _as_pair(preds, y)
    return float(np.mean((preds - y) ** 2))


def weighted_loss(losses: NDArray, coef: NDArray, rank_mode: RankMode = "sorted") -> float:
    """``sum_k coef[k] * losses[k]``, with losses sorted ascending first in sorted mode.

    The sort is stable so ties keep instance order.
    """
    if rank_mode == "sorted":
        losses = np.sort(losses, kind="stable")
    return float(losses @ coef)


def eval_rank_weighted(
    preds: ArrayLike, y: ArrayLike, vw: VWeights, rank_mode: RankMode = "sorted"
) -> float:
    preds, y = _as_pair(preds, y)
    n = preds.size
    if len(vw) != n:
        raise StructuralError(f"v-weights have length {len(vw)}, predictions {n}")
    return weighted_loss((preds - y) ** 2, vw.values / n, rank_mode)


def eval_blended(preds: ArrayLike, y: ArrayLike, spec: EvaluationSpec) -> float:
    if spec.kind != "blended":
        raise InvalidConfigError(f"expected a blended spec, got {spec.kind}", "kind")
    preds, y = _as_pair(preds, y)
    vw = v_weights(spec.a, spec.b, preds.size, spec.allow_negative)
    return spec.theta * eval_mse(preds, y) + (1.0 - spec.theta) * eval_rank_weighted(
        preds, y, vw, spec.rank_mode
    )


def evaluate(preds: ArrayLike, y: ArrayLike, spec: EvaluationSpec) -> float:
    """Score ``preds`` against ``y`` with the objective described by ``spec``."""
    if spec.kind == "mse":
        return eval_mse(preds, y)
    if spec.kind == "rank_weighted":
        preds, y = _as_pair(preds, y)
        vw = v_weights(spec.a, spec.b, preds.size, spec.allow_negative)
        return eval_rank_weighted(preds, y, vw, spec.rank_mode)
    return eval_blended(preds, y, spec)


def loss_coefficients(spec: EvaluationSpec, n: int) -> NDArray[np.float64]:
    """Per-rank (or per-index) coefficients so that the objective is ``weighted_loss(losses, coef)``.

    For the blended objective the two parts merge because the plain mean is
    invariant to reordering: ``coef[k] = (theta + (1 - theta) v_k) / n``.
    """
    if spec.kind == "mse":
        return np.full(n, 1.0 / n)
    v = v_weights(spec.a, spec.b, n, spec.allow_negative).values
    if spec.kind == "rank_weighted":
        return v / n
    return (spec.theta + (1.0 - spec.theta) * v) / n


def default_b_grid(a: float = 0.5, step: float = 0.25, n: int | None = None) -> list[float]:
    """``step, 2*step, ...`` up to the largest ``b`` whose v-weights stay nonnegative.

    With ``n`` omitted the continuum bound is used, which at ``a = 0.5`` is
    ``b <= 1.5``.
    """
    grid = []
    b = step
    while b <= 3.0 + 1e-12:
        if n is None:
            # the quadratic in t = i/n peaks on [0, 1] at one of the endpoints
            peak = max(a, 1.0 - a)
            ok = (3.0 - 3.0 * b) / (a * a - a + 1.0) * peak + 1.0 >= -1e-12 or b <= 1.0
        else:
            ok = not v_weights(a, b, n, allow_negative=True).has_negative
        if not ok:
            break
        grid.append(round(b, 12))
        b += step
    return grid
