"""Shared domain types and the complementarity metrics.

A joint decision is a per-instance convex combination of the two agents'
predictions::

    joint_i = w_h[i] * pred_h[i] + w_m[i] * pred_m[i],   w_h[i] + w_m[i] = 1

Two summary statistics describe how the weights are spread:

* ``c_across``: population variance of the weights across instances. Large
  when instances are routed wholesale to one agent or the other.
* ``c_within``: ``1 - mean((w_h - w_m)^2)``. Large when both agents
  contribute to the same decision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidConfigError, StructuralError
from .objectives import DIRECTIONS, Direction, EvaluationSpec, evaluate

SIMPLEX_TOL = 1e-12


def _frozen(a: ArrayLike, dtype=np.float64) -> NDArray:
    arr = np.array(a, dtype=dtype, copy=True)
    if arr.ndim != 1:
        raise StructuralError(f"expected a 1-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Aligned targets and the two agents' predictions for ``n`` instances."""

    instance_id: NDArray[np.int64]
    y: NDArray[np.float64]
    pred_h: NDArray[np.float64]
    pred_m: NDArray[np.float64]

    def __post_init__(self):
        ids = _frozen(self.instance_id, dtype=np.int64)
        arrays = {name: _frozen(getattr(self, name)) for name in ("y", "pred_h", "pred_m")}
        n = ids.size
        if n < 1:
            raise StructuralError("a prediction set needs at least one instance")
        for name, arr in arrays.items():
            if arr.size != n:
                raise StructuralError(f"{name} has length {arr.size}, instance_id has {n}")
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise StructuralError(f"{name}[{bad[0]}] is not finite")
        if np.unique(ids).size != n:
            raise StructuralError("instance_id values must be unique")
        object.__setattr__(self, "instance_id", ids)
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @classmethod
    def from_arrays(cls, y, pred_h, pred_m, instance_id=None) -> PredictionSet:
        y = np.asarray(y, dtype=np.float64)
        if instance_id is None:
            instance_id = np.arange(y.size)
        return cls(instance_id=instance_id, y=y, pred_h=pred_h, pred_m=pred_m)

    def __len__(self):
        return self.y.size

    def joint(self, w: WeightVector) -> NDArray[np.float64]:
        if len(w) != len(self):
            raise StructuralError(f"{len(w)} weights for {len(self)} instances")
        return w.w_h * self.pred_h + w.w_m * self.pred_m


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Per-instance convex weights. Both halves are stored as given.

    Invalid weights are rejected, never renormalized.
    """

    w_h: NDArray[np.float64]
    w_m: NDArray[np.float64]

    def __post_init__(self):
        w_h, w_m = _frozen(self.w_h), _frozen(self.w_m)
        if w_h.size != w_m.size:
            raise StructuralError(f"w_h has length {w_h.size}, w_m has {w_m.size}")
        if w_h.size < 1:
            raise StructuralError("a weight vector needs at least one instance")
        for name, arr in (("w_h", w_h), ("w_m", w_m)):
            bad = np.flatnonzero(~((arr >= 0.0) & (arr <= 1.0)))
            if bad.size:
                raise InvalidConfigError(f"{name}[{bad[0]}] = {arr[bad[0]]} is outside [0, 1]", name)
        off = np.flatnonzero(np.abs(w_h + w_m - 1.0) > SIMPLEX_TOL)
        if off.size:
            i = off[0]
            raise InvalidConfigError(
                f"w_h[{i}] + w_m[{i}] = {w_h[i] + w_m[i]!r} != 1", "w_h + w_m"
            )
        object.__setattr__(self, "w_h", w_h)
        object.__setattr__(self, "w_m", w_m)

    @classmethod
    def from_human(cls, w_h: ArrayLike) -> WeightVector:
        w_h = np.asarray(w_h, dtype=np.float64)
        return cls(w_h=w_h, w_m=1.0 - w_h)

    @classmethod
    def constant(cls, n: int, w_h: float) -> WeightVector:
        return cls.from_human(np.full(n, float(w_h)))

    def __len__(self):
        return self.w_h.size

    def swapped(self) -> WeightVector:
        return WeightVector(w_h=self.w_m, w_m=self.w_h)


def c_across(w: WeightVector) -> float:
    """Population variance of the machine weights (equal to that of the human weights)."""
    return float(np.mean((w.w_m - np.mean(w.w_m)) ** 2))


def c_within(w: WeightVector) -> float:
    return float(1.0 - np.mean((w.w_h - w.w_m) ** 2))


def check_complementarity(
    value_joint: float, value_h: float, value_m: float, direction: Direction = "minimize"
) -> bool:
    """Strict dominance of the joint value over both single agents. Ties do not count."""
    if direction not in DIRECTIONS:
        raise InvalidConfigError(f"must be one of {DIRECTIONS}", "direction")
    if direction == "minimize":
        return bool(value_joint < min(value_h, value_m))
    return bool(value_joint > max(value_h, value_m))


@dataclass(frozen=True)
class ComplementarityReport:
    c_across: float
    c_within: float
    value_joint: float
    value_h: float
    value_m: float
    complementary: bool
    n: int
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "c_across": self.c_across,
            "c_within": self.c_within,
            "value_joint": self.value_joint,
            "value_h": self.value_h,
            "value_m": self.value_m,
            "complementary": self.complementary,
            "n": self.n,
            "notes": list(self.notes),
        }


def summarize_report(
    preds: PredictionSet, w: WeightVector, spec: EvaluationSpec | None = None
) -> ComplementarityReport:
    """Score the joint, human-only and machine-only policies and compute both metrics."""
    spec = spec or EvaluationSpec.mse()
    if len(w) != len(preds):
        raise StructuralError(f"{len(w)} weights for {len(preds)} instances")
    value_joint = evaluate(preds.joint(w), preds.y, spec)
    value_h = evaluate(preds.pred_h, preds.y, spec)
    value_m = evaluate(preds.pred_m, preds.y, spec)
    notes = ()
    if len(preds) == 1:
        notes = ("single instance: c_across is 0 by construction",)
    return ComplementarityReport(
        c_across=c_across(w),
        c_within=c_within(w),
        value_joint=value_joint,
        value_h=value_h,
        value_m=value_m,
        complementary=check_complementarity(value_joint, value_h, value_m, spec.direction),
        n=len(preds),
        notes=notes,
    )
