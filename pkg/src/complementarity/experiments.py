"""Seeded, replicated parameter sweeps over the synthetic setups.

Three experiment kinds:

``overlap``
    Human and machine share ``z`` features and see ``(d - z) / 2`` exclusive
    ones each; both are OLS fits. Weights optimize test MSE.
``alpha``
    Human sees the first ``d - 1`` features, the machine only the last one,
    zeroed per row with probability ``1 - alpha``. Weights optimize test MSE.
``objective``
    Both agents see every feature. The machine is OLS; the human minimizes
    the rank-weighted loss with parameters ``(a, b)``. Weights optimize the
    blended objective with mixing ``theta``.

Replicate ``r`` of sweep point ``p`` draws everything from seeds derived from
``(seed, kind, p, r, purpose)``, so results do not depend on the order or
parallelism with which replicates run.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from .combiner import CombinerConfig, optimize_weights
from .core import PredictionSet, c_across, c_within
from .errors import ComplementarityError, ExperimentError, InvalidConfigError
from .fitting import FitConfig, fit_ols, fit_rank_weighted, predict
from .objectives import EvaluationSpec, default_b_grid, eval_mse, evaluate, v_weights
from .synthgen import (
    DgpConfig,
    FeatureView,
    _check_seed,
    alpha_mask,
    derive_seed,
    generate_dataset,
    overlap_split,
)

log = logging.getLogger(__name__)

ExperimentKind = Literal["overlap", "alpha", "objective"]
EXPERIMENT_KINDS = ("overlap", "alpha", "objective")
SWEEP_PARAMS = {"overlap": ("z",), "alpha": ("alpha",), "objective": ("a", "b", "theta")}
METRICS = ("c_across", "c_within", "loss_joint", "loss_h", "loss_m")
OBJECTIVE_METRICS = ("dG_h", "dG_m")

# tolerance for the dominance check applied to every replicate
DOMINANCE_TOL = 1e-9

_KIND_CODE = {"overlap": 0, "alpha": 1, "objective": 2}
# stream purposes within a replicate
_TRAIN, _TEST, _SPLIT, _MASK_TRAIN, _MASK_TEST, _COMBINER = range(6)


def _default_replicates(kind):
    return 5 if kind == "objective" else 200


@dataclass(frozen=True)
class ExperimentConfig:
    kind: ExperimentKind
    n_train: int = 8000
    n_test: int = 2000
    replicates: int | None = None
    seed: int = 0
    z_values: tuple[int, ...] = (0, 2, 4, 6, 8)
    alpha_values: tuple[float, ...] = tuple(round(0.1 * k, 10) for k in range(11))
    a: float = 0.5
    b_values: tuple[float, ...] = tuple(default_b_grid(0.5))
    theta_values: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    dgp: DgpConfig = field(default_factory=DgpConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    combiner: CombinerConfig = field(default_factory=CombinerConfig)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise InvalidConfigError(f"must be one of {EXPERIMENT_KINDS}, got {self.kind!r}", "kind")
        if self.replicates is None:
            object.__setattr__(self, "replicates", _default_replicates(self.kind))
        for name in ("n_train", "n_test", "replicates"):
            if getattr(self, name) < 1:
                raise InvalidConfigError("must be >= 1", name)
        _check_seed(self.seed)
        for name in ("z_values", "alpha_values", "b_values", "theta_values"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        d = self.dgp.d
        if self.kind == "overlap":
            if not self.z_values:
                raise InvalidConfigError("sweep list is empty", "overlap.z")
            for z in self.z_values:
                if not 0 <= z < d:
                    raise InvalidConfigError(f"z={z} must satisfy 0 <= z < d={d}", "overlap.z")
                if (d - z) % 2:
                    raise InvalidConfigError(
                        f"z={z}: d - z must be even so exclusive features split evenly (d={d})",
                        "overlap.z",
                    )
        elif self.kind == "alpha":
            if not self.alpha_values:
                raise InvalidConfigError("sweep list is empty", "alpha.values")
            if d < 2:
                raise InvalidConfigError("alpha experiment needs d >= 2", "dgp.d")
            for alpha in self.alpha_values:
                if not 0.0 <= alpha <= 1.0:
                    raise InvalidConfigError(f"{alpha} is outside [0, 1]", "alpha.values")
        else:
            if not self.b_values:
                raise InvalidConfigError("sweep list is empty", "objective.b")
            if not self.theta_values:
                raise InvalidConfigError("sweep list is empty", "objective.theta")
            for theta in self.theta_values:
                if not 0.0 <= theta <= 1.0:
                    raise InvalidConfigError(f"{theta} is outside [0, 1]", "objective.theta")
            for b in self.b_values:
                for n in (self.n_train, self.n_test):
                    try:
                        v_weights(self.a, b, n)
                    except InvalidConfigError as exc:
                        raise InvalidConfigError(str(exc), "objective.b") from None

    def sweep_points(self) -> list[dict]:
        if self.kind == "overlap":
            return [{"z": int(z)} for z in self.z_values]
        if self.kind == "alpha":
            return [{"alpha": float(a)} for a in self.alpha_values]
        return [
            {"a": float(self.a), "b": float(b), "theta": float(t)}
            for b, t in itertools.product(self.b_values, self.theta_values)
        ]


@dataclass(frozen=True)
class ReplicateRecord:
    params: dict
    replicate: int
    seed: int
    c_across: float
    c_within: float
    loss_joint: float
    loss_h: float
    loss_m: float
    dG_h: float | None = None
    dG_m: float | None = None

    def metric(self, name):
        return getattr(self, name)


@dataclass(frozen=True)
class PointSummary:
    params: dict
    replicates: int
    mean: dict
    std: dict


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    points: list[PointSummary]
    records: list[ReplicateRecord]

    @property
    def kind(self) -> str:
        return self.config.kind

    def means(self, metric: str) -> np.ndarray:
        return np.array([p.mean[metric] for p in self.points])

    def stds(self, metric: str) -> np.ndarray:
        return np.array([p.std[metric] for p in self.points])


def _data(dgp: DgpConfig, n: int, seed: int):
    return generate_dataset(replace(dgp, n=n, seed=seed))


def _mse_record(params, X_tr, y_tr, X_te, y_te, view_h, view_m, fit, combiner, seed, replicate):
    pol_h = fit_ols(X_tr, y_tr, fit, view_h)
    pol_m = fit_ols(X_tr, y_tr, fit, view_m)
    preds = PredictionSet.from_arrays(y_te, predict(pol_h, X_te), predict(pol_m, X_te))
    w = optimize_weights(preds, EvaluationSpec.mse(), combiner)
    return ReplicateRecord(
        params=params,
        replicate=replicate,
        seed=seed,
        c_across=c_across(w),
        c_within=c_within(w),
        loss_joint=eval_mse(preds.joint(w), preds.y),
        loss_h=eval_mse(preds.pred_h, preds.y),
        loss_m=eval_mse(preds.pred_m, preds.y),
    )


def run_replicate_overlap(
    z: int,
    dgp: DgpConfig,
    fit: FitConfig,
    combiner: CombinerConfig,
    replicate_seed: int,
    n_train: int = 8000,
    n_test: int = 2000,
    replicate: int = 0,
) -> ReplicateRecord:
    X_tr, y_tr = _data(dgp, n_train, derive_seed(replicate_seed, _TRAIN))
    X_te, y_te = _data(dgp, n_test, derive_seed(replicate_seed, _TEST))
    view_h, view_m = overlap_split(dgp.d, z, derive_seed(replicate_seed, _SPLIT))
    combiner = replace(combiner, seed=derive_seed(replicate_seed, _COMBINER))
    return _mse_record(
        {"z": int(z)}, X_tr, y_tr, X_te, y_te, view_h, view_m, fit, combiner, replicate_seed, replicate
    )


def run_replicate_alpha(
    alpha: float,
    dgp: DgpConfig,
    fit: FitConfig,
    combiner: CombinerConfig,
    replicate_seed: int,
    n_train: int = 8000,
    n_test: int = 2000,
    replicate: int = 0,
) -> ReplicateRecord:
    d = dgp.d
    X_tr, y_tr = _data(dgp, n_train, derive_seed(replicate_seed, _TRAIN))
    X_te, y_te = _data(dgp, n_test, derive_seed(replicate_seed, _TEST))
    # the target keeps using the unmasked feature; only the machine's copy is degraded
    X_tr[:, d - 1] = alpha_mask(X_tr[:, d - 1], alpha, derive_seed(replicate_seed, _MASK_TRAIN))
    X_te[:, d - 1] = alpha_mask(X_te[:, d - 1], alpha, derive_seed(replicate_seed, _MASK_TEST))
    view_h = FeatureView(tuple(range(d - 1)))
    view_m = FeatureView((d - 1,))
    combiner = replace(combiner, seed=derive_seed(replicate_seed, _COMBINER))
    return _mse_record(
        {"alpha": float(alpha)}, X_tr, y_tr, X_te, y_te, view_h, view_m, fit, combiner,
        replicate_seed, replicate,
    )


def run_replicate_objective(
    a: float,
    b: float,
    theta: float,
    dgp: DgpConfig,
    fit: FitConfig,
    combiner: CombinerConfig,
    replicate_seed: int,
    n_train: int = 8000,
    n_test: int = 2000,
    replicate: int = 0,
) -> ReplicateRecord:
    X_tr, y_tr = _data(dgp, n_train, derive_seed(replicate_seed, _TRAIN))
    X_te, y_te = _data(dgp, n_test, derive_seed(replicate_seed, _TEST))
    pol_m = fit_ols(X_tr, y_tr, fit)
    pol_h = fit_rank_weighted(X_tr, y_tr, a, b, fit)
    preds = PredictionSet.from_arrays(y_te, predict(pol_h, X_te), predict(pol_m, X_te))
    spec = EvaluationSpec.blended(a, b, theta, rank_mode=fit.rank_mode)
    combiner = replace(combiner, seed=derive_seed(replicate_seed, _COMBINER))
    w = optimize_weights(preds, spec, combiner)
    g_joint = evaluate(preds.joint(w), preds.y, spec)
    return ReplicateRecord(
        params={"a": float(a), "b": float(b), "theta": float(theta)},
        replicate=replicate,
        seed=replicate_seed,
        c_across=c_across(w),
        c_within=c_within(w),
        loss_joint=eval_mse(preds.joint(w), preds.y),
        loss_h=eval_mse(preds.pred_h, preds.y),
        loss_m=eval_mse(preds.pred_m, preds.y),
        dG_h=g_joint - evaluate(preds.pred_h, preds.y, spec),
        dG_m=g_joint - evaluate(preds.pred_m, preds.y, spec),
    )


def replicate_seed(cfg: ExperimentConfig, point: int, replicate: int) -> int:
    return derive_seed(cfg.seed, _KIND_CODE[cfg.kind], point, replicate)


def _run_one(cfg: ExperimentConfig, point: int, params: dict, r: int) -> ReplicateRecord:
    seed = replicate_seed(cfg, point, r)
    common = dict(n_train=cfg.n_train, n_test=cfg.n_test, replicate=r)
    try:
        if cfg.kind == "overlap":
            rec = run_replicate_overlap(params["z"], cfg.dgp, cfg.fit, cfg.combiner, seed, **common)
        elif cfg.kind == "alpha":
            rec = run_replicate_alpha(params["alpha"], cfg.dgp, cfg.fit, cfg.combiner, seed, **common)
        else:
            rec = run_replicate_objective(
                params["a"], params["b"], params["theta"], cfg.dgp, cfg.fit, cfg.combiner, seed,
                **common,
            )
        _check_dominance(rec)
    except (ComplementarityError, ArithmeticError, ValueError) as exc:
        raise ExperimentError(
            f"sweep point {point} {params}, replicate {r}, seed {seed}: {exc}"
        ) from exc
    return rec


def _check_dominance(rec: ReplicateRecord):
    if rec.dG_h is not None:
        if rec.dG_h > DOMINANCE_TOL or rec.dG_m > DOMINANCE_TOL:
            raise ExperimentError(
                f"joint policy worse than a single agent (dG_h={rec.dG_h}, dG_m={rec.dG_m})"
            )
    elif rec.loss_joint > min(rec.loss_h, rec.loss_m) + DOMINANCE_TOL:
        raise ExperimentError(
            f"joint loss {rec.loss_joint} exceeds min(loss_h={rec.loss_h}, loss_m={rec.loss_m})"
        )


def _summarize(params: dict, records: list[ReplicateRecord], kind: str) -> PointSummary:
    names = METRICS + (OBJECTIVE_METRICS if kind == "objective" else ())
    mean, std = {}, {}
    for name in names:
        values = np.array([rec.metric(name) for rec in records], dtype=np.float64)
        mean[name] = float(np.mean(values))
        std[name] = float(np.std(values))
    return PointSummary(params=params, replicates=len(records), mean=mean, std=std)


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Run every replicate of every sweep point and aggregate mean / population std.

    ``threads`` only changes wall-clock time; results are identical for any value.
    """
    if threads < 1:
        raise InvalidConfigError("must be >= 1", "threads")
    points = cfg.sweep_points()
    tasks = [(p, params, r) for p, params in enumerate(points) for r in range(cfg.replicates)]
    log.info("%s sweep: %d points x %d replicates", cfg.kind, len(points), cfg.replicates)
    if threads == 1:
        records = [_run_one(cfg, p, params, r) for p, params, r in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda t: _run_one(cfg, *t), tasks))
    summaries = [
        _summarize(params, records[p * cfg.replicates : (p + 1) * cfg.replicates], cfg.kind)
        for p, params in enumerate(points)
    ]
    return ExperimentResult(config=cfg, points=summaries, records=records)
