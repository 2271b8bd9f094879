"""Command-line entry point.

Subcommands::

    complementarity simulate --config exp.cfg --out runs/exp1 [--threads N]
    complementarity analyze predictions.csv --out runs/a [--spec-kind blended --a 0.5 --b 0.5 --theta 0.5]
    complementarity metrics weights.csv
    complementarity plot-data results.csv --figure fig2 --out runs/exp1/plots

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .combiner import TIE_BREAKS, CombinerConfig, optimize_weights
from .config import config_to_dict, load_config
from .core import c_across, c_within, summarize_report
from .errors import InvalidConfigError, StructuralError
from .experiments import run_experiment
from .objectives import KINDS, RANK_MODES, EvaluationSpec
from . import io

log = logging.getLogger("complementarity")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

METRIC_DEFINITIONS = {
    "c_across": "population variance of the per-instance weights, (1/n) sum (w_m[i] - mean(w_m))^2",
    "c_within": "1 - (1/n) sum (w_h[i] - w_m[i])^2",
    "complementary": "value_joint strictly better than both value_h and value_m under direction",
    "weights": "oracle weights: optimized with access to the true targets (an upper bound, not a router)",
}


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = io.now()
    result = run_experiment(cfg, threads=args.threads)
    outputs = [
        io.write_results(out / "results.csv", result),
        io.write_replicates(out / "replicates.csv", result),
    ]
    io.write_manifest(out, "simulate", config_to_dict(cfg), cfg.seed, started, outputs)
    log.info("wrote %d sweep points to %s", len(result.points), out)
    return EXIT_OK


def spec_from_args(args) -> EvaluationSpec:
    kind = args.spec_kind
    needs_ab = kind in ("rank_weighted", "blended")
    for name in ("a", "b", "theta"):
        used = needs_ab if name != "theta" else kind == "blended"
        if used and getattr(args, name) is None:
            raise InvalidConfigError(f"--{name} is required with --spec-kind {kind}", name)
        if not used and getattr(args, name) is not None:
            raise InvalidConfigError(f"--{name} is not used with --spec-kind {kind}", name)
    return EvaluationSpec(
        kind=kind, a=args.a, b=args.b, theta=args.theta, rank_mode=args.rank_mode,
        allow_negative=args.allow_negative,
    )


def cmd_analyze(args) -> int:
    spec = spec_from_args(args)
    combiner = CombinerConfig(tie_break=args.tie_break)
    preds = io.read_predictions(args.predictions)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = io.now()
    w = optimize_weights(preds, spec, combiner)
    report = summarize_report(preds, w, spec)
    weights_path = io.write_weights(out / "weights.csv", preds.instance_id, w)
    body = report.to_dict() | {"spec": spec.to_dict(), "definitions": METRIC_DEFINITIONS}
    report_path = out / "report.json"
    report_path.write_text(json.dumps(body, indent=2) + "\n")
    config = {"predictions": str(args.predictions), "spec": spec.to_dict(), "tie_break": args.tie_break}
    io.write_manifest(out, "analyze", config, combiner.seed, started, [weights_path, report_path])
    return EXIT_OK


def cmd_metrics(args) -> int:
    _, w = io.read_weights(args.weights)
    print(json.dumps({"c_across": c_across(w), "c_within": c_within(w)}))
    return EXIT_OK


def cmd_plot_data(args) -> int:
    rows = io.read_results(args.results)
    panels = io.plot_panels(rows, args.figure)  # validate before touching the output dir
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = io.now()
    paths = io.write_plot_data(rows, args.figure, out)
    config = {"results": str(args.results), "figure": args.figure, "panels": list(panels)}
    io.write_manifest(out, "plot-data", config, None, started, paths)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="complementarity", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a synthetic experiment sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="oracle weights and report for a predictions CSV")
    p.add_argument("predictions")
    p.add_argument("--out", required=True)
    p.add_argument("--spec-kind", choices=KINDS, default="mse")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--theta", type=float)
    p.add_argument("--tie-break", choices=TIE_BREAKS, default="machine")
    p.add_argument("--rank-mode", choices=RANK_MODES, default="sorted")
    p.add_argument("--allow-negative", action="store_true",
                   help="accept negative rank weights (outside the monotone weighting region)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("metrics", help="print c_across and c_within for a weights CSV")
    p.add_argument("weights")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("plot-data", help="long-format panel tables for a figure")
    p.add_argument("results")
    p.add_argument("--figure", choices=sorted(io.FIGURES), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InvalidConfigError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
