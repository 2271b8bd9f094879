"""Synthetic linear-Gaussian data and the feature-access manipulations.

Features are i.i.d. standard normal, the target is ``y = X @ beta + eps`` with
``eps ~ N(0, noise_sd^2)``. Randomness is derived from integer seeds through
:class:`numpy.random.SeedSequence` so every (experiment, point, replicate,
purpose) tuple gets an independent stream regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidConfigError, StructuralError

MAX_SEED = 2**64 - 1


def _check_seed(seed):
    if not 0 <= int(seed) <= MAX_SEED:
        raise InvalidConfigError(f"must be an unsigned 64-bit integer, got {seed}", "seed")


def derive_seed(root: int, *keys: int) -> int:
    """Child seed for ``keys`` under ``root``; distinct key tuples give independent streams."""
    _check_seed(root)
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed: int) -> np.random.Generator:
    _check_seed(seed)
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


@dataclass(frozen=True)
class DgpConfig:
    n: int = 1000
    seed: int = 0
    d: int = 10
    noise_sd: float = 1.0
    beta: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.d < 1:
            raise InvalidConfigError(f"must be >= 1, got {self.d}", "dgp.d")
        if not (self.noise_sd >= 0 and np.isfinite(self.noise_sd)):
            raise InvalidConfigError(f"must be a finite nonnegative number, got {self.noise_sd}", "dgp.noise_sd")
        if self.beta is None:
            object.__setattr__(self, "beta", (1.0,) * self.d)
        else:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.beta) != self.d:
            raise InvalidConfigError(f"has length {len(self.beta)}, expected d={self.d}", "dgp.beta")
        _check_seed(self.seed)

    @property
    def beta_array(self) -> NDArray[np.float64]:
        return np.asarray(self.beta, dtype=np.float64)


@dataclass(frozen=True)
class FeatureView:
    """Sorted, duplicate-free set of column indices an agent can observe."""

    indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx):
            raise InvalidConfigError(f"duplicate feature indices in {idx}", "view")
        if any(i < 0 for i in idx):
            raise InvalidConfigError(f"negative feature index in {idx}", "view")
        if not idx:
            raise InvalidConfigError("a feature view cannot be empty", "view")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    @classmethod
    def full(cls, d: int) -> FeatureView:
        return cls(tuple(range(d)))

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def select(self, X: NDArray) -> NDArray:
        X = np.asarray(X)
        if X.ndim != 2:
            raise StructuralError(f"feature matrix must be 2-d, got shape {X.shape}")
        if self.indices[-1] >= X.shape[1]:
            raise StructuralError(
                f"view needs column {self.indices[-1]} but the matrix has {X.shape[1]} columns"
            )
        if self.indices == tuple(range(X.shape[1])):
            return X
        return X[:, list(self.indices)]


def generate_dataset(cfg: DgpConfig) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Draw ``(X, y)`` with ``cfg.n`` rows. Bit-identical for a given seed."""
    if cfg.n < 1:
        raise StructuralError(f"need n >= 1 rows, got {cfg.n}")
    rng = rng_for(cfg.seed)
    X = rng.standard_normal((cfg.n, cfg.d))
    eps = rng.standard_normal(cfg.n)
    y = X @ cfg.beta_array
    if cfg.noise_sd > 0:
        y = y + cfg.noise_sd * eps
    return X, y


def overlap_split(d: int, z: int, seed: int) -> tuple[FeatureView, FeatureView]:
    """Human and machine views sharing ``z`` features, each with ``(d - z) / 2`` exclusive ones."""
    if not 0 <= z < d:
        raise InvalidConfigError(f"need 0 <= z < d (d={d}), got z={z}", "overlap.z")
    if (d - z) % 2:
        raise InvalidConfigError(
            f"d - z must be even so the exclusive features split evenly (d={d}, z={z})",
            "overlap.z",
        )
    k = (d - z) // 2
    perm = rng_for(seed).permutation(d)
    shared = perm[:z].tolist()
    only_h = perm[z : z + k].tolist()
    only_m = perm[z + k :].tolist()
    return FeatureView(tuple(shared + only_h)), FeatureView(tuple(shared + only_m))


def alpha_mask(column: ArrayLike, alpha: float, seed: int) -> NDArray[np.float64]:
    """Keep each entry independently with probability ``alpha``; zero it otherwise."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidConfigError(f"must lie in [0, 1], got {alpha}", "alpha")
    column = np.asarray(column, dtype=np.float64)
    if not np.all(np.isfinite(column)):
        raise StructuralError("column contains non-finite values")
    keep = rng_for(seed).random(column.shape) < alpha
    return np.where(keep, column, 0.0)
