# Copyright © 2026, abuse-prosody Contributors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Subcommands run through main(), from a synthetic corpus to reports."""

import csv
import json
import os

import numpy as np
import pytest
import yaml

from abuse_prosody.audio_io import write_wav
from abuse_prosody.cli import RunConfig, build_run_config, load_config_file, main
from abuse_prosody.dataset import Dataset
from abuse_prosody.errors import ConfigError
from abuse_prosody.models import save_model, train_model
from abuse_prosody.reports import REPORT_COLUMNS

from conftest import sine


def _rows(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestRunConfig:
    """Defaults, config file and flag precedence."""

    def test_flags_override_file(self):
        cfg = build_run_config({"reps": 2, "seed": None}, {"reps": 7, "seed": 5, "classifier": "logistic"})
        assert cfg.reps == 2
        assert cfg.seed == 5
        assert cfg.classifiers == ("logistic",)

    def test_defaults(self):
        cfg = build_run_config({})
        assert cfg.reps == 5
        assert cfg.classifiers == ("forest",)
        assert cfg.strict

    @pytest.mark.parametrize(
        "value, expected",
        [
            ("both", ("forest", "logistic")),
            ("forest,logistic", ("forest", "logistic")),
            ("logistic, forest, logistic", ("logistic", "forest")),
            (["logistic"], ("logistic",)),
        ],
    )
    def test_classifier_lists(self, value, expected):
        assert build_run_config({"classifiers": value}).classifiers == expected

    def test_string_values_are_coerced(self):
        cfg = build_run_config({}, {"reps": "3", "strict": "false", "formats": "csv,md", "languages": "a, b"})
        assert cfg.reps == 3
        assert cfg.strict is False
        assert cfg.formats == ("csv", "md")
        assert cfg.languages == ("a", "b")

    def test_config_file_keys_mirror_flags(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("n-estimators: 20\nworkers: 1\nextraction:\n  hop_ms: 20\n")
        cfg = build_run_config({}, load_config_file(path))
        assert cfg.n_estimators == 20
        assert cfg.extraction.hop_ms == 20.0

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("repetitions: 5\n")
        with pytest.raises(ConfigError, match="repetitions"):
            load_config_file(path)

    @pytest.mark.parametrize(
        "values",
        [{"classifiers": ("svm",)}, {"classifiers": ()}, {"reps": 0}, {"workers": 0}, {"top_k": 0}, {"formats": ("pdf",)}],
    )
    def test_invalid_values(self, values):
        with pytest.raises(ConfigError):
            RunConfig(**values)

    def test_uncoercible_value(self):
        with pytest.raises(ConfigError, match="reps"):
            build_run_config({}, {"reps": "many"})

    def test_workers_from_environment(self, monkeypatch):
        monkeypatch.setenv("ABUSE_PROSODY_WORKERS", "3")
        assert build_run_config({}).workers == 3
        assert build_run_config({}, {"workers": 2}).workers == 2
        assert build_run_config({"workers": 1}).workers == 1

    def test_unset_or_zero_environment_uses_every_cpu(self, monkeypatch):
        monkeypatch.setenv("ABUSE_PROSODY_WORKERS", "0")
        assert build_run_config({}).workers == (os.cpu_count() or 1)
        monkeypatch.delenv("ABUSE_PROSODY_WORKERS")
        assert build_run_config({}).workers == (os.cpu_count() or 1)

    def test_non_numeric_environment(self, monkeypatch):
        monkeypatch.setenv("ABUSE_PROSODY_WORKERS", "lots")
        with pytest.raises(ConfigError, match="ABUSE_PROSODY_WORKERS"):
            build_run_config({})
        assert build_run_config({"workers": 2}).workers == 2

    def test_classifier_key_in_config_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("classifier: both\n")
        assert build_run_config({}, load_config_file(path)).classifiers == ("forest", "logistic")


class TestCommandErrors:
    def test_missing_manifest_flag(self, tmp_path, capsys):
        assert main(["extract", "--out", str(tmp_path)]) == 1
        payload = yaml.safe_load(capsys.readouterr().out)
        assert payload["status"] == "error"
        assert payload["error_type"] == "ConfigError"
        assert (tmp_path / "error_logging.yaml").exists()

    def test_unreadable_manifest(self, tmp_path, capsys):
        assert main(["extract", "--manifest", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1
        assert "FileNotFoundError" in capsys.readouterr().out

    def test_bad_config_file(self, tmp_path):
        config = tmp_path / "run.yaml"
        config.write_text("reps: [1, 2\n")
        assert main(["experiment", "--config", str(config), "--out", str(tmp_path)]) == 1

    def test_error_log_follows_config_file_out(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        config = tmp_path / "run.yaml"
        config.write_text(f"out: {tmp_path / 'from-file'}\nreps: 0\n")
        assert main(["experiment", "--config", str(config)]) == 1
        assert "reps must be" in capsys.readouterr().out
        assert (tmp_path / "from-file" / "error_logging.yaml").exists()
        assert not (tmp_path / "runs").exists()

    def test_bad_worker_environment_is_reported(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("ABUSE_PROSODY_WORKERS", "lots")
        assert main(["stats", "--out", str(tmp_path)]) == 1
        payload = yaml.safe_load(capsys.readouterr().out)
        assert payload["error_type"] == "ConfigError"
        assert "ABUSE_PROSODY_WORKERS" in payload["message"]


def _write_manifest(tmp_path, rows):
    path = tmp_path / "manifest.csv"
    lines = ["id,path,language,label,split"] + [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestExtractModes:
    """Strict and lenient handling of recordings that cannot be read."""

    @pytest.fixture
    def manifest(self, tmp_path):
        (tmp_path / "ok.wav").write_bytes(write_wav(sine(220.0, duration_s=1.0, amplitude=0.3)))
        return _write_manifest(
            tmp_path,
            [
                ("ok", "ok.wav", "hindi", "abusive", "train"),
                ("gone", "missing.wav", "hindi", "non_abusive", "train"),
            ],
        )

    def test_lenient_skips_and_logs(self, manifest, tmp_path):
        out = tmp_path / "out"
        assert main(["extract", "--manifest", str(manifest), "--out", str(out), "--lenient", "--workers", "1"]) == 0
        assert [row["id"] for row in _rows(out / "features.csv")] == ["ok"]
        events = [json.loads(line) for line in (out / "run_log.jsonl").read_text().splitlines()]
        skipped = [event for event in events if event["event"] == "skipped"]
        assert [event["recording_id"] for event in skipped] == ["gone"]

    def test_strict_fails(self, manifest, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["extract", "--manifest", str(manifest), "--out", str(out), "--workers", "1"]) == 1
        assert "ExtractionError" in capsys.readouterr().out
        assert not (out / "features.csv").exists()
        assert (out / "error_logging.yaml").exists()

    def test_invalid_rows_fail_in_strict_mode(self, tmp_path):
        manifest = _write_manifest(tmp_path, [("a", "a.wav", "hindi", "furious", "train")])
        assert main(["extract", "--manifest", str(manifest), "--out", str(tmp_path / "out")]) == 1


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Two-language corpus taken through every subcommand once."""
    root = tmp_path_factory.mktemp("pipeline")
    corpus, work = root / "corpus", root / "work"
    assert main([
        "synth", "--out", str(corpus), "--languages", "hindi,tamil", "--clips", "8", "--duration", "1.5",
        "--seed", "3",
    ]) == 0
    common = ["--out", str(work), "--workers", "1", "--seed", "3"]
    assert main(["extract", "--manifest", str(corpus / "manifest.csv")] + common) == 0
    assert main(["experiment", "--n-estimators", "5", "--reps", "1"] + common) == 0
    assert main(["stats"] + common) == 0
    assert main(["attribution", "--shuffles", "2"] + common) == 0
    return corpus, work


class TestPipeline:
    def test_synth_layout(self, pipeline):
        corpus, _ = pipeline
        rows = _rows(corpus / "manifest.csv")
        assert len(rows) == 16
        assert (corpus / "audio" / "tamil" / "tamil_0007.wav").exists()
        for language in ("hindi", "tamil"):
            splits = [row["split"] for row in rows if row["language"] == language and row["label"] == "abusive"]
            assert sorted(splits) == ["test", "train", "train", "train"]

    def test_feature_store(self, pipeline):
        _, work = pipeline
        rows = _rows(work / "features.csv")
        assert len(rows) == 16
        assert len(rows[0]) == 4 + 54
        assert (work / "features.schema.yaml").exists()

    def test_experiment_reports(self, pipeline):
        _, work = pipeline
        results = _rows(work / "results.csv")
        assert len(results) == 1 + 2 + 2 + 4
        assert {row["kind"] for row in results} == {"single", "multi_test", "multi_train", "all"}
        heatmap = _rows(work / "heatmap_forest.csv")
        assert [row["train\\test"] for row in heatmap] == ["all-but-test", "hindi", "tamil"]
        assert {row["condition"] for row in _rows(work / "scores.csv")} == {"single", "multi_test", "multi_train", "all"}
        model = json.loads((work / "model_forest.json").read_text())
        assert model["classifier"] == "forest"
        assert len(model["feature_names"]) == 54
        assert not (work / "model_logistic.json").exists()

    def test_stats_reports(self, pipeline):
        _, work = pipeline
        tests = _rows(work / "feature_tests.csv")
        assert len(tests) == 2 * 54
        assert (work / "important_features.csv").exists()

    def test_attribution_report(self, pipeline):
        _, work = pipeline
        importance = _rows(work / "importance.csv")
        assert [int(row["rank"]) for row in importance] == list(range(1, 55))
        schema = yaml.safe_load((work / "schema.yaml").read_text())
        assert {"results.csv", "feature_tests.csv", "importance.csv"} <= set(schema)

    def test_attribution_compared_with_tests(self, pipeline):
        _, work = pipeline
        rows = _rows(work / "attribution_vs_tests.csv")
        assert list(rows[0]) == list(REPORT_COLUMNS["attribution_vs_tests.csv"])
        assert sum(row["in_top_k"] == "true" for row in rows) == 10
        important = {row["feature"] for row in _rows(work / "important_features.csv")}
        assert {row["feature"] for row in rows if row["important_by_tests"] == "true"} == important
        assert all(row["in_top_k"] == "true" or row["important_by_tests"] == "true" for row in rows)
        ranks = [int(row["importance_rank"]) for row in rows]
        assert ranks == sorted(ranks)

    def test_run_summary_and_log(self, pipeline):
        _, work = pipeline
        summary = yaml.safe_load((work / "run_summary.yaml").read_text())
        assert summary["command"] == "attribution"
        assert summary["seed"] == 3
        assert "importance.csv" in summary["artifacts"]
        events = [json.loads(line)["event"] for line in (work / "run_log.jsonl").read_text().splitlines()]
        assert events.count("start") == 4 and events.count("finished") == 4

    def test_extract_is_reproducible(self, pipeline, tmp_path):
        corpus, work = pipeline
        again = tmp_path / "again"
        assert main(["extract", "--manifest", str(corpus / "manifest.csv"), "--out", str(again), "--workers", "2"]) == 0
        assert (again / "features.csv").read_bytes() == (work / "features.csv").read_bytes()

    def test_attribution_rejects_foreign_model(self, pipeline, tmp_path, capsys):
        _, work = pipeline
        rng = np.random.default_rng(0)
        data = Dataset(
            rng.standard_normal((20, 3)), np.tile([0, 1], 10), np.array(["x"] * 20), feature_names=("a", "b", "c")
        )
        model_path = save_model(train_model("logistic", data), tmp_path / "model.json")
        code = main([
            "attribution", "--model", str(model_path), "--store", str(work / "features.csv"), "--out", str(tmp_path),
        ])
        assert code == 1
        assert "SchemaMismatch" in capsys.readouterr().out

    def test_both_classifiers_in_one_run(self, pipeline, tmp_path):
        _, work = pipeline
        store = str(work / "features.csv")
        common = ["--store", store, "--out", str(tmp_path), "--workers", "1", "--seed", "3"]
        assert main(["experiment", "--classifier", "both", "--n-estimators", "5", "--reps", "1"] + common) == 0

        results = _rows(tmp_path / "results.csv")
        assert len(results) == 2 * 9
        assert {row["classifier"] for row in results} == {"forest", "logistic"}
        scores = _rows(tmp_path / "scores.csv")
        assert {(row["classifier"], row["condition"]) for row in scores} == {
            (classifier, condition)
            for classifier in ("forest", "logistic")
            for condition in ("single", "multi_test", "multi_train", "all")
        }
        for classifier in ("forest", "logistic"):
            heatmap = _rows(tmp_path / f"heatmap_{classifier}.csv")
            assert [row["train\\test"] for row in heatmap] == ["all-but-test", "hindi", "tamil"]
            model = json.loads((tmp_path / f"model_{classifier}.json").read_text())
            assert model["classifier"] == classifier

        assert main(["attribution", "--classifier", "logistic", "--shuffles", "2"] + common) == 0
        assert len(_rows(tmp_path / "importance.csv")) == 54
        summary = yaml.safe_load((tmp_path / "run_summary.yaml").read_text())
        assert summary["config"]["classifiers"] == ["logistic"]

    def test_forest_results_match_single_classifier_run(self, pipeline, tmp_path):
        _, work = pipeline
        common = ["--store", str(work / "features.csv"), "--out", str(tmp_path), "--workers", "1", "--seed", "3"]
        assert main(["experiment", "--classifier", "logistic,forest", "--n-estimators", "5", "--reps", "1"] + common) == 0
        forest = [row for row in _rows(tmp_path / "results.csv") if row["classifier"] == "forest"]
        assert forest == _rows(work / "results.csv")


def _score(rows, condition):
    (row,) = [row for row in rows if row["condition"] == condition]
    return float(row["mean_uar"])


@pytest.mark.slow
def test_synthetic_corpus_end_to_end(tmp_path):
    corpus, work = tmp_path / "corpus", tmp_path / "work"
    assert main(["synth", "--out", str(corpus), "--clips", "100"]) == 0
    assert main(["extract", "--manifest", str(corpus / "manifest.csv"), "--out", str(work)]) == 0
    assert main(["experiment", "--out", str(work), "--reps", "1", "--n-estimators", "50"]) == 0
    assert main(["stats", "--out", str(work)]) == 0
    assert main(["attribution", "--out", str(work)]) == 0

    multi_train = [row for row in _rows(work / "results.csv") if row["kind"] == "multi_train"]
    assert len(multi_train) == 10
    assert all(float(row["mean_uar"]) > 0.9 for row in multi_train)

    important = [row["feature"] for row in _rows(work / "important_features.csv")]
    assert "loudness_mean" in important
    assert "voiced_segments_per_sec" in important

    top = [row["feature"] for row in _rows(work / "importance.csv")[:3]]
    assert "loudness_mean" in top


@pytest.mark.full_data
@pytest.mark.skipif(not os.getenv("ABUSE_PROSODY_MANIFEST"), reason="set ABUSE_PROSODY_MANIFEST to a corpus manifest")
def test_full_corpus(tmp_path):
    manifest = os.environ["ABUSE_PROSODY_MANIFEST"]
    assert main(["extract", "--manifest", manifest, "--out", str(tmp_path), "--lenient"]) == 0
    assert main(["experiment", "--out", str(tmp_path), "--classifier", "forest"]) == 0
    assert main(["stats", "--out", str(tmp_path)]) == 0

    scores = _rows(tmp_path / "scores.csv")
    assert _score(scores, "all") >= 0.70
    assert _score(scores, "multi_train") >= 0.68

    loudness = [row for row in _rows(tmp_path / "feature_tests.csv") if row["feature"] == "loudness_mean"]
    assert sum(float(row["cles"]) > 0.5 for row in loudness) >= 9
