import csv
import json

import numpy as np
import pytest

from complementarity import io
from complementarity.cli import main
from complementarity.config import config_from_dict, config_to_text, load_config, parse_text
from complementarity.core import PredictionSet, c_across, c_within, summarize_report
from complementarity.combiner import optimize_weights
from complementarity.errors import InvalidConfigError
from complementarity.experiments import ExperimentConfig

SMALL_OVERLAP = """\
# tiny overlap sweep
kind = overlap
n_train = 400
n_test = 200
replicates = 2
seed = 11
overlap.z = 0, 2, 4, 6, 8
"""


def _write(path, text):
    path.write_text(text)
    return path


def _write_csv(path, header, rows):
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _metrics(capsys, path):
    capsys.readouterr()
    assert main(["metrics", str(path)]) == 0
    return json.loads(capsys.readouterr().out)


class TestConfigParsing:
    def test_parse_text(self):
        raw = parse_text("a = 1  # trailing\n\n# only a comment\nb.c = x, y\n")
        assert raw == {"a": "1", "b.c": "x, y"}

    def test_build(self):
        cfg = config_from_dict(parse_text(SMALL_OVERLAP + "dgp.noise_sd = 0.5\nfit.include_intercept = true\n"))
        assert cfg.kind == "overlap" and cfg.n_train == 400 and cfg.replicates == 2
        assert cfg.z_values == (0, 2, 4, 6, 8)
        assert cfg.dgp.noise_sd == 0.5
        assert cfg.fit.include_intercept is True

    def test_defaults_fill_in(self):
        cfg = config_from_dict({"kind": "objective"})
        assert cfg == ExperimentConfig(kind="objective")

    @pytest.mark.parametrize(
        "text, field",
        [
            ("kind = overlap\nbogus = 1\n", "bogus"),
            ("kind = overlap\nseed = 1\nseed = 2\n", "seed"),
            ("kind = overlap\nalpha.values = 0.5\n", "alpha.values"),
            ("kind = overlap\nreplicates = many\n", "replicates"),
            ("replicates = 3\n", "kind"),
            ("kind = overlap\noverlap.z = 9\n", "overlap.z"),
        ],
    )
    def test_errors_name_field(self, text, field):
        with pytest.raises(InvalidConfigError) as info:
            config_from_dict(parse_text(text))
        assert info.value.field == field

    def test_malformed_line(self):
        with pytest.raises(InvalidConfigError, match="line 2"):
            parse_text("kind = overlap\njust words\n")

    @pytest.mark.parametrize("kind", ["overlap", "alpha", "objective"])
    def test_text_round_trip(self, kind, tmp_path):
        cfg = ExperimentConfig(kind=kind, replicates=3, seed=4)
        assert load_config(_write(tmp_path / "c.cfg", config_to_text(cfg))) == cfg


class TestSimulate:
    def test_outputs_and_manifest(self, tmp_path):
        cfg_path = _write(tmp_path / "exp.cfg", SMALL_OVERLAP)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
        rows = io.read_results(out / "results.csv")
        assert [int(r["z"]) for r in rows] == [0, 2, 4, 6, 8]
        assert all(int(r["replicates"]) == 2 for r in rows)
        with (out / "replicates.csv").open() as fh:
            assert sum(1 for _ in fh) == 1 + 5 * 2

        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["seed"] == 11
        for name, digest in manifest["files"].items():
            assert io.sha256(out / name) == digest
        assert config_from_dict(manifest["config"]) == load_config(cfg_path)

    def test_byte_identical_reruns(self, tmp_path):
        cfg_path = _write(tmp_path / "exp.cfg", SMALL_OVERLAP)
        outs = [tmp_path / "a", tmp_path / "b"]
        for out, threads in zip(outs, ("1", "3")):
            assert main(["simulate", "--config", str(cfg_path), "--out", str(out), "--threads", threads]) == 0
        for name in ("results.csv", "replicates.csv"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_odd_remainder_exit_2(self, tmp_path, capsys):
        cfg_path = _write(tmp_path / "bad.cfg", "kind = overlap\noverlap.z = 9\n")
        assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 2
        assert "even" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o")]) == 2

    def test_objective_columns(self, tmp_path):
        text = "kind = objective\nn_train = 300\nn_test = 100\nreplicates = 1\nobjective.b = 0.5, 1.0\nobjective.theta = 0.5\n"
        out = tmp_path / "obj"
        assert main(["simulate", "--config", str(_write(tmp_path / "o.cfg", text)), "--out", str(out)]) == 0
        rows = io.read_results(out / "results.csv")
        assert len(rows) == 2
        assert {"b", "theta", "dG_h_mean", "dG_m_mean"} <= set(rows[0])


class TestAnalyze:
    def test_human_exact(self, tmp_path):
        y = [1.0, -2.0, 3.5]
        path = _write_csv(tmp_path / "p.csv", io.PREDICTIONS_HEADER,
                          [[i, v, v, v + 1.0] for i, v in enumerate(y)])
        out = tmp_path / "a"
        assert main(["analyze", str(path), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["value_joint"] == 0.0
        assert report["complementary"] is False
        assert "oracle" in report["definitions"]["weights"]

    def test_bracket_example(self, tmp_path, capsys):
        # instances 0, 1 are solved exactly by the machine, 2, 3 by the human
        rows = [[0, 1.0, 5.0, 1.0], [1, 2.0, -4.0, 2.0], [2, 3.0, 3.0, 9.0], [3, 4.0, 4.0, 0.0]]
        out = tmp_path / "a"
        assert main(["analyze", str(_write_csv(tmp_path / "p.csv", io.PREDICTIONS_HEADER, rows)),
                     "--out", str(out)]) == 0
        _, w = io.read_weights(out / "weights.csv")
        np.testing.assert_array_equal(w.w_h, [0.0, 0.0, 1.0, 1.0])
        assert _metrics(capsys, out / "weights.csv") == {"c_across": 0.25, "c_within": 0.0}

    def test_matches_library(self, tmp_path, capsys):
        rng = np.random.default_rng(21)
        y, ph, pm = rng.normal(size=(3, 100))
        preds = PredictionSet.from_arrays(y, ph, pm)
        path = tmp_path / "p.csv"
        io.write_predictions(path, preds)
        out = tmp_path / "a"
        assert main(["analyze", str(path), "--out", str(out)]) == 0
        expected = summarize_report(preds, optimize_weights(preds))
        report = json.loads((out / "report.json").read_text())
        for key in ("c_across", "c_within", "value_joint", "value_h", "value_m"):
            assert report[key] == pytest.approx(getattr(expected, key), abs=1e-12)
        got = _metrics(capsys, out / "weights.csv")
        assert got["c_across"] == pytest.approx(report["c_across"], abs=1e-12)
        assert got["c_within"] == pytest.approx(report["c_within"], abs=1e-12)
        manifest = json.loads((out / "manifest.json").read_text())
        assert set(manifest["files"]) == {"weights.csv", "report.json"}

    def test_blended_spec(self, tmp_path):
        rng = np.random.default_rng(22)
        path = tmp_path / "p.csv"
        io.write_predictions(path, PredictionSet.from_arrays(*rng.normal(size=(3, 40))))
        out = tmp_path / "a"
        args = ["analyze", str(path), "--out", str(out), "--spec-kind", "blended",
                "--a", "0.5", "--b", "0.5", "--theta", "0.5"]
        assert main(args) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["spec"]["kind"] == "blended"
        assert report["value_joint"] <= min(report["value_h"], report["value_m"]) + 1e-12

    @pytest.mark.parametrize(
        "extra",
        [["--spec-kind", "blended", "--a", "0.5", "--b", "0.5"], ["--theta", "0.5"],
         ["--spec-kind", "rank_weighted", "--a", "0.5", "--b", "2.0"]],
    )
    def test_bad_spec_exit_2(self, tmp_path, extra):
        path = _write_csv(tmp_path / "p.csv", io.PREDICTIONS_HEADER, [[0, 1.0, 2.0, 3.0]] * 1)
        assert main(["analyze", str(path), "--out", str(tmp_path / "a"), *extra]) == 2

    def test_wrong_header_exit_2(self, tmp_path, capsys):
        path = _write_csv(tmp_path / "p.csv", ["id", "y", "h", "m"], [[0, 1.0, 2.0, 3.0]])
        assert main(["analyze", str(path), "--out", str(tmp_path / "a")]) == 2
        assert "header" in capsys.readouterr().err

    def test_non_finite_exit_2(self, tmp_path, capsys):
        rows = [[0, 1.0, 2.0, 3.0], [1, 1.0, "nan", 3.0]]
        path = _write_csv(tmp_path / "p.csv", io.PREDICTIONS_HEADER, rows)
        assert main(["analyze", str(path), "--out", str(tmp_path / "a")]) == 2
        err = capsys.readouterr().err
        assert "row 2" in err and "pred_h" in err

    def test_duplicate_ids_exit_2(self, tmp_path):
        path = _write_csv(tmp_path / "p.csv", io.PREDICTIONS_HEADER, [[0, 1.0, 2.0, 3.0]] * 2)
        assert main(["analyze", str(path), "--out", str(tmp_path / "a")]) == 2


class TestMetrics:
    @pytest.mark.parametrize(
        "w_h, expected",
        [
            ([0.0] * 4, {"c_across": 0.0, "c_within": 0.0}),
            ([0.0, 0.0, 1.0, 1.0], {"c_across": 0.25, "c_within": 0.0}),
            ([0.3] * 4, {"c_across": 0.0, "c_within": 0.84}),
            ([0.5], {"c_across": 0.0, "c_within": 1.0}),
        ],
    )
    def test_worked_examples(self, tmp_path, capsys, w_h, expected):
        path = _write_csv(tmp_path / "w.csv", io.WEIGHTS_HEADER, [[i, h, 1 - h] for i, h in enumerate(w_h)])
        got = _metrics(capsys, path)
        assert got["c_across"] == pytest.approx(expected["c_across"], abs=1e-12)
        assert got["c_within"] == pytest.approx(expected["c_within"], abs=1e-12)

    def test_simplex_violation_exit_2(self, tmp_path, capsys):
        path = _write_csv(tmp_path / "w.csv", io.WEIGHTS_HEADER, [[0, 0.5, 0.5], [1, 0.6, 0.5]])
        assert main(["metrics", str(path)]) == 2
        assert "row 2" in capsys.readouterr().err

    def test_agrees_with_core(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        w_h = rng.random(50)
        path = _write_csv(tmp_path / "w.csv", io.WEIGHTS_HEADER,
                          [[i, repr(float(h)), repr(float(1 - h))] for i, h in enumerate(w_h)])
        _, w = io.read_weights(path)
        assert _metrics(capsys, path) == {"c_across": c_across(w), "c_within": c_within(w)}


@pytest.fixture(scope="module")
def overlap_results(tmp_path_factory):
    root = tmp_path_factory.mktemp("sim")
    cfg_path = _write(root / "exp.cfg", SMALL_OVERLAP)
    assert main(["simulate", "--config", str(cfg_path), "--out", str(root / "run")]) == 0
    return root / "run" / "results.csv"


@pytest.fixture(scope="module")
def objective_results(tmp_path_factory):
    root = tmp_path_factory.mktemp("obj")
    text = "kind = objective\nn_train = 300\nn_test = 100\nreplicates = 1\nobjective.b = 0.5, 1.0\nobjective.theta = 0.0, 1.0\n"
    assert main(["simulate", "--config", str(_write(root / "o.cfg", text)), "--out", str(root / "run")]) == 0
    return root / "run" / "results.csv"


class TestPlotData:
    def test_fig2_panels(self, overlap_results, tmp_path):
        out = tmp_path / "plots"
        assert main(["plot-data", str(overlap_results), "--figure", "fig2", "--out", str(out)]) == 0
        names = sorted(p.name for p in out.glob("fig2_*.csv"))
        assert names == ["fig2_c_across.csv", "fig2_c_within.csv", "fig2_loss.csv"]
        with (out / "fig2_loss.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 15
        assert {r["metric"] for r in rows} == {"loss_joint", "loss_h", "loss_m"}
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["files"]) == 3

    def test_fig4_panels(self, objective_results, tmp_path):
        out = tmp_path / "plots"
        assert main(["plot-data", str(objective_results), "--figure", "fig4", "--out", str(out)]) == 0
        assert len(list(out.glob("fig4_*.csv"))) == 4
        with (out / "fig4_c_across.csv").open() as fh:
            header = next(csv.reader(fh))
        assert header == ["b", "theta", "metric", "mean", "std"]

    def test_missing_column_exit_2(self, objective_results, tmp_path, capsys):
        with objective_results.open() as fh:
            rows = list(csv.DictReader(fh))
        header = [c for c in rows[0] if c != "theta"]
        path = _write_csv(tmp_path / "r.csv", header, [[r[c] for c in header] for r in rows])
        assert main(["plot-data", str(path), "--figure", "fig4", "--out", str(tmp_path / "p")]) == 2
        assert "theta" in capsys.readouterr().err

    def test_wrong_kind_exit_2(self, overlap_results, tmp_path):
        assert main(["plot-data", str(overlap_results), "--figure", "fig3", "--out", str(tmp_path / "p")]) == 2

    def test_unknown_figure_is_usage_error(self, overlap_results, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["plot-data", str(overlap_results), "--figure", "fig9", "--out", str(tmp_path / "p")])
        assert info.value.code == 2
