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

import csv

import numpy as np
import yaml

from abuse_prosody.harness import FeatureImportance, HeatmapTable
from abuse_prosody.reports import (
    REPORT_COLUMNS,
    classifier_artifact,
    write_attribution_comparison,
    write_heatmap,
    write_importance,
    write_report_schema,
    write_table,
)
from abuse_prosody.stats import AnalysisReport, ImportanceVerdict


def test_csv_only_by_default(tmp_path):
    written = write_table(tmp_path / "t.csv", ["a", "b"], [["1", "2"]])
    assert written == [tmp_path / "t.csv"]
    assert (tmp_path / "t.csv").read_text() == "a,b\n1,2\n"


def test_markdown_copy_on_request(tmp_path):
    written = write_table(tmp_path / "t.csv", ["a", "b"], [["1", "2"]], formats=("csv", "md"))
    assert [path.name for path in written] == ["t.csv", "t.md"]
    lines = (tmp_path / "t.md").read_text().splitlines()
    assert lines[0].startswith("| a") and "1" in lines[2]


def test_importance_columns(tmp_path):
    items = [FeatureImportance(1, "loudness_mean", 0.25, 0.01), FeatureImportance(2, "f0_mean", 0.0, 0.0)]
    (path,) = write_importance(items, tmp_path)
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == list(REPORT_COLUMNS["importance.csv"])
    assert [row["feature"] for row in rows] == ["loudness_mean", "f0_mean"]
    assert float(rows[0]["importance"]) == 0.25


def test_schema_merges_with_existing_file(tmp_path):
    write_report_schema(tmp_path, ["results.csv"])
    path = write_report_schema(tmp_path, ["importance.csv"])
    schema = yaml.safe_load(path.read_text())
    assert set(schema) == {"results.csv", "importance.csv"}
    assert "mean_uar" in schema["results.csv"]


def test_classifier_artifact_names():
    assert classifier_artifact("heatmap.csv", "forest") == "heatmap_forest.csv"
    assert classifier_artifact("model.json", "logistic") == "model_logistic.json"


def test_heatmap_under_a_classifier_name(tmp_path):
    table = HeatmapTable(["all-but-test", "a"], ["a", "all-but-train"], np.array([[0.5, 0.75], [0.9, 0.6]]))
    (path,) = write_heatmap(table, tmp_path, name="heatmap_logistic.csv")
    assert path.name == "heatmap_logistic.csv"
    assert path.read_text().splitlines()[1] == "all-but-test,0.500000,0.750000"


def test_attribution_comparison_covers_both_sets(tmp_path):
    names = ["loudness_mean", "f0_mean", "jitter_mean", "mfcc1_mean"]
    importances = [FeatureImportance(rank, name, 0.1 / rank, 0.0) for rank, name in enumerate(names, start=1)]
    report = AnalysisReport(
        results=[],
        verdicts=[
            ImportanceVerdict("loudness_mean", ("a", "b"), True),
            ImportanceVerdict("f0_mean", ("a",), False),
            ImportanceVerdict("jitter_mean", (), False),
            ImportanceVerdict("mfcc1_mean", ("a", "b"), True),
        ],
        languages=["a", "b"],
    )
    (path,) = write_attribution_comparison(importances, report, 2, tmp_path)
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert path.name == "attribution_vs_tests.csv"
    assert [row["feature"] for row in rows] == ["loudness_mean", "f0_mean", "mfcc1_mean"]
    assert [row["in_top_k"] for row in rows] == ["true", "true", "false"]
    assert [row["important_by_tests"] for row in rows] == ["true", "false", "true"]
    assert rows[0]["meaningful_languages"] == "a;b"
    assert rows[2]["importance_rank"] == "4"
