"""Flat-file formats: predictions, weights, results, plot panels and the run manifest.

Floats are written with ``repr``, the shortest decimal string that parses back
to the same double, so every CSV round-trips bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import SIMPLEX_TOL, PredictionSet, WeightVector
from .errors import StructuralError
from .experiments import METRICS, OBJECTIVE_METRICS, SWEEP_PARAMS, ExperimentResult

PREDICTIONS_HEADER = ["instance_id", "y", "pred_h", "pred_m"]
WEIGHTS_HEADER = ["instance_id", "w_h", "w_m"]
MANIFEST_NAME = "manifest.json"

FIGURES = {
    "fig2": ("overlap", {"c_across": ["c_across"], "c_within": ["c_within"],
                         "loss": ["loss_joint", "loss_h", "loss_m"]}),
    "fig3": ("alpha", {"c_across": ["c_across"], "c_within": ["c_within"],
                       "loss": ["loss_joint", "loss_h", "loss_m"]}),
    "fig4": ("objective", {"c_across": ["c_across"], "c_within": ["c_within"],
                           "dG_h": ["dG_h"], "dG_m": ["dG_m"]}),
}
# x (and y) axes of each figure's panels
FIGURE_AXES = {"fig2": ["z"], "fig3": ["alpha"], "fig4": ["b", "theta"]}


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_rows(path: Path, header: list[str], rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def _read_rows(path: Path, header: list[str]):
    """Yield ``(row_number, row)`` after checking the header matches exactly."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        found = next(reader, None)
        if found is None:
            raise StructuralError(f"{path}: empty file")
        if [h.strip() for h in found] != header:
            raise StructuralError(f"{path}: header must be {','.join(header)}, got {','.join(found)}")
        for number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise StructuralError(f"{path}: row {number} has {len(row)} columns, expected {len(header)}")
            yield number, row


def _number(path, number, column, text, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise StructuralError(f"{path}: row {number}, column {column}: cannot parse {text!r}") from None
    if kind is float and not math.isfinite(value):
        raise StructuralError(f"{path}: row {number}, column {column}: value {text!r} is not finite")
    return value


def read_predictions(path) -> PredictionSet:
    cols = {name: [] for name in PREDICTIONS_HEADER}
    for number, row in _read_rows(path, PREDICTIONS_HEADER):
        for name, text in zip(PREDICTIONS_HEADER, row):
            kind = int if name == "instance_id" else float
            cols[name].append(_number(path, number, name, text.strip(), kind))
    if not cols["y"]:
        raise StructuralError(f"{path}: no data rows")
    return PredictionSet(
        instance_id=np.array(cols["instance_id"], dtype=np.int64),
        y=cols["y"], pred_h=cols["pred_h"], pred_m=cols["pred_m"],
    )


def write_predictions(path, preds: PredictionSet) -> Path:
    return _write_rows(path, PREDICTIONS_HEADER, zip(preds.instance_id, preds.y, preds.pred_h, preds.pred_m))


def write_weights(path, instance_id, w: WeightVector) -> Path:
    return _write_rows(path, WEIGHTS_HEADER, zip(instance_id, w.w_h, w.w_m))


def read_weights(path) -> tuple[np.ndarray, WeightVector]:
    ids, w_h, w_m = [], [], []
    for number, row in _read_rows(path, WEIGHTS_HEADER):
        ids.append(_number(path, number, "instance_id", row[0].strip(), int))
        h = _number(path, number, "w_h", row[1].strip())
        m = _number(path, number, "w_m", row[2].strip())
        if not (0.0 <= h <= 1.0 and 0.0 <= m <= 1.0 and abs(h + m - 1.0) <= SIMPLEX_TOL):
            raise StructuralError(
                f"{path}: row {number} violates the weight simplex (w_h={h!r}, w_m={m!r})"
            )
        w_h.append(h)
        w_m.append(m)
    if not ids:
        raise StructuralError(f"{path}: no data rows")
    return np.array(ids, dtype=np.int64), WeightVector(w_h=w_h, w_m=w_m)


def results_header(kind: str) -> list[str]:
    cols = ["kind", *SWEEP_PARAMS[kind], "replicates"]
    metrics = METRICS + (OBJECTIVE_METRICS if kind == "objective" else ())
    for m in metrics:
        cols += [f"{m}_mean", f"{m}_std"]
    return cols


def write_results(path, result: ExperimentResult) -> Path:
    kind = result.kind
    metrics = METRICS + (OBJECTIVE_METRICS if kind == "objective" else ())
    rows = []
    for p in result.points:
        row = [kind, *(p.params[k] for k in SWEEP_PARAMS[kind]), p.replicates]
        for m in metrics:
            row += [p.mean[m], p.std[m]]
        rows.append(row)
    return _write_rows(path, results_header(kind), rows)


def write_replicates(path, result: ExperimentResult) -> Path:
    kind = result.kind
    metrics = METRICS + (OBJECTIVE_METRICS if kind == "objective" else ())
    header = ["kind", *SWEEP_PARAMS[kind], "replicate", "seed", *metrics]
    rows = (
        [kind, *(rec.params[k] for k in SWEEP_PARAMS[kind]), rec.replicate, rec.seed,
         *(rec.metric(m) for m in metrics)]
        for rec in result.records
    )
    return _write_rows(path, header, rows)


def read_results(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def plot_panels(rows: list[dict], figure: str) -> dict[str, list[list]]:
    """Long-format panel tables ``axes..., metric, mean, std`` for one figure."""
    if figure not in FIGURES:
        raise StructuralError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    kind, panels = FIGURES[figure]
    axes = FIGURE_AXES[figure]
    if not rows:
        raise StructuralError("results file has no rows")
    needed = ["kind", *axes] + [f"{m}_{s}" for ms in panels.values() for m in ms for s in ("mean", "std")]
    missing = [c for c in needed if c not in rows[0]]
    if missing:
        raise StructuralError(f"{figure} needs columns missing from results: {', '.join(missing)}")
    bad = {r["kind"] for r in rows} - {kind}
    if bad:
        raise StructuralError(f"{figure} plots kind={kind} results, found kind={', '.join(sorted(bad))}")
    out = {}
    for panel, metrics in panels.items():
        table = []
        for r in rows:
            for m in metrics:
                table.append([*(float(r[a]) for a in axes), m, float(r[f"{m}_mean"]), float(r[f"{m}_std"])])
        out[panel] = table
    return out


def write_plot_data(rows: list[dict], figure: str, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    header = [*FIGURE_AXES[figure], "metric", "mean", "std"]
    return [
        _write_rows(out_dir / f"{figure}_{panel}.csv", header, table)
        for panel, table in plot_panels(rows, figure).items()
    ]


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir, command: str, config: dict, seed, started: str, outputs) -> Path:
    out_dir = Path(out_dir)
    manifest = {
        "tool": "complementarity",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "started": started,
        "finished": now(),
        "files": {Path(p).name: sha256(p) for p in outputs},
    }
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path
