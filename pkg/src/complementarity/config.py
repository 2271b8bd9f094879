"""Experiment configuration files.

The format is flat ``key = value`` lines with dotted section names::

    # feature-overlap sweep with 50 replicates
    kind = overlap
    replicates = 50
    overlap.z = 0, 2, 4, 6, 8
    dgp.noise_sd = 1.0

Lists are comma separated, booleans are ``true``/``false``, ``#`` starts a
comment. Every key is listed in :data:`KEYS`; unknown or duplicated keys are
errors, and so are sweep keys belonging to a different experiment kind.
"""

from __future__ import annotations

from pathlib import Path

from .combiner import CombinerConfig
from .errors import InvalidConfigError
from .experiments import ExperimentConfig
from .fitting import FitConfig
from .synthgen import DgpConfig


def _int(v):
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, int):
        return v
    if isinstance(v, float) and v.is_integer():
        return int(v)
    return int(str(v).strip())


def _float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    return float(v) if isinstance(v, (int, float)) else float(str(v).strip())


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("true", "yes", "1"):
        return True
    if s in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {v!r}")


def _str(v):
    return str(v).strip()


def _list(item):
    def parse(v):
        if isinstance(v, (list, tuple)):
            return tuple(item(x) for x in v)
        parts = [p for p in str(v).split(",") if p.strip()]
        return tuple(item(p) for p in parts)

    return parse


# key -> (parser, section, attribute, kinds it applies to or None for all)
KEYS = {
    "kind": (_str, None, "kind", None),
    "n_train": (_int, None, "n_train", None),
    "n_test": (_int, None, "n_test", None),
    "replicates": (_int, None, "replicates", None),
    "seed": (_int, None, "seed", None),
    "overlap.z": (_list(_int), None, "z_values", "overlap"),
    "alpha.values": (_list(_float), None, "alpha_values", "alpha"),
    "objective.a": (_float, None, "a", "objective"),
    "objective.b": (_list(_float), None, "b_values", "objective"),
    "objective.theta": (_list(_float), None, "theta_values", "objective"),
    "dgp.d": (_int, "dgp", "d", None),
    "dgp.noise_sd": (_float, "dgp", "noise_sd", None),
    "dgp.beta": (_list(_float), "dgp", "beta", None),
    "fit.include_intercept": (_bool, "fit", "include_intercept", None),
    "fit.max_outer_iters": (_int, "fit", "max_outer_iters", None),
    "fit.convergence_tol": (_float, "fit", "convergence_tol", None),
    "fit.ridge_epsilon": (_float, "fit", "ridge_epsilon", None),
    "fit.rank_mode": (_str, "fit", "rank_mode", None),
    "combiner.tie_break": (_str, "combiner", "tie_break", None),
    "combiner.max_iters": (_int, "combiner", "max_iters", None),
    "combiner.tol": (_float, "combiner", "tol", None),
    "combiner.restarts": (_int, "combiner", "restarts", None),
    "combiner.grid_resolution": (_float, "combiner", "grid_resolution", None),
    "combiner.step_size": (_float, "combiner", "step_size", None),
}

_SECTIONS = {"dgp": DgpConfig, "fit": FitConfig, "combiner": CombinerConfig}


def parse_text(text: str) -> dict[str, str]:
    """Split config text into a ``{key: raw value}`` mapping."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise InvalidConfigError(f"line {lineno}: duplicate key", key)
        raw[key] = value
    return raw


def config_from_dict(values: dict) -> ExperimentConfig:
    """Build and validate an :class:`ExperimentConfig` from flat dotted keys."""
    unknown = sorted(set(values) - set(KEYS))
    if unknown:
        raise InvalidConfigError(f"unknown key (valid keys: {', '.join(KEYS)})", unknown[0])
    if "kind" not in values:
        raise InvalidConfigError("missing required key", "kind")
    top, sections = {}, {name: {} for name in _SECTIONS}
    kind = _str(values["kind"])
    for key, value in values.items():
        parser, section, attr, applies = KEYS[key]
        if applies is not None and applies != kind:
            raise InvalidConfigError(f"only valid when kind = {applies}", key)
        try:
            parsed = parser(value)
        except (TypeError, ValueError) as exc:
            raise InvalidConfigError(f"cannot parse {value!r}: {exc}", key) from None
        (sections[section] if section else top)[attr] = parsed
    try:
        built = {name: cls(**sections[name]) for name, cls in _SECTIONS.items()}
        return ExperimentConfig(**top, **built)
    except TypeError as exc:
        raise InvalidConfigError(str(exc)) from None


def load_config(path: str | Path) -> ExperimentConfig:
    return config_from_dict(parse_text(Path(path).read_text()))


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Flat dotted-key echo of every setting that applies to ``cfg.kind``."""
    out = {}
    for key, (_, section, attr, applies) in KEYS.items():
        if applies is not None and applies != cfg.kind:
            continue
        value = getattr(getattr(cfg, section) if section else cfg, attr)
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def config_to_text(cfg: ExperimentConfig) -> str:
    lines = []
    for key, value in config_to_dict(cfg).items():
        if isinstance(value, list):
            value = ", ".join(repr(v) for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"

