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

"""CSV (and optional Markdown) report emitters plus the schema file describing them."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

import yaml

from .config import (
    ATTRIBUTION_COMPARISON_NAME,
    FEATURE_TESTS_NAME,
    HEATMAP_NAME,
    IMPORTANCE_NAME,
    IMPORTANT_FEATURES_NAME,
    REPORT_SCHEMA_NAME,
    RESULTS_NAME,
    SCORES_NAME,
)
from .harness import FeatureImportance, HeatmapTable, ResultsStore, ScoreRow
from .stats import AnalysisReport, FeatureSummaryRow

REPORT_FORMATS = ("csv", "md")

REPORT_COLUMNS: Dict[str, Dict[str, str]] = {
    RESULTS_NAME: {
        "classifier": "forest or logistic",
        "condition": "cell label: single:<train>-><test>, multi_test:<train>, multi_train:<excluded>, all",
        "kind": "single, multi_test, multi_train or all",
        "train_languages": "training languages joined by ';'",
        "test_languages": "test languages joined by ';'",
        "repetitions": "number of repetitions averaged",
        "mean_uar": "mean unweighted average recall over repetitions",
        "mean_f1": "mean F1 of the abusive class over repetitions",
        "uar_per_repetition": "UAR of each repetition joined by ';'",
        "f1_per_repetition": "F1 of each repetition joined by ';'",
    },
    HEATMAP_NAME: {
        "train\\test": "row label: all-but-test, then training languages alphabetically",
        "<language>": "mean UAR when testing on this language",
        "all-but-train": "mean UAR when testing on every language except the row's",
    },
    SCORES_NAME: {
        "classifier": "forest or logistic",
        "condition": "single, multi_test, multi_train or all",
        "mean_uar": "UAR averaged over the condition's cells",
        "mean_f1": "F1 averaged over the condition's cells",
        "n_cells": "number of cells averaged",
    },
    FEATURE_TESTS_NAME: {
        "feature": "canonical feature name",
        "language": "language the test ran in",
        "n_abusive": "abusive rows tested",
        "n_non_abusive": "non-abusive rows tested",
        "u": "Mann-Whitney U of the abusive sample",
        "p": "two-sided p-value",
        "p_adj": "Holm-adjusted p-value within the language",
        "cles": "P(abusive > non-abusive), ties counted one half",
        "meaningful": "p_adj < alpha and max(cles, 1 - cles) > threshold",
        "degenerate": "all pooled values identical (p fixed at 1)",
    },
    IMPORTANT_FEATURES_NAME: {
        "feature": "important feature (meaningful in every language, none skipped)",
        "non_abusive_m": "mean over non-abusive rows",
        "non_abusive_q1": "first quartile over non-abusive rows",
        "non_abusive_median": "median over non-abusive rows",
        "non_abusive_q3": "third quartile over non-abusive rows",
        "abusive_m": "mean over abusive rows",
        "abusive_q1": "first quartile over abusive rows",
        "abusive_median": "median over abusive rows",
        "abusive_q3": "third quartile over abusive rows",
        "mean_cles": "CLES averaged over languages",
    },
    IMPORTANCE_NAME: {
        "rank": "1 = largest mean UAR drop",
        "feature": "canonical feature name",
        "importance": "baseline UAR minus mean UAR with the column shuffled",
        "std": "standard deviation of the drop over shuffles",
    },
    ATTRIBUTION_COMPARISON_NAME: {
        "feature": "feature in the permutation top-k or important by the per-language tests",
        "importance_rank": "rank in importance.csv",
        "importance": "baseline UAR minus mean UAR with the column shuffled",
        "in_top_k": "importance_rank <= k",
        "important_by_tests": "meaningful in every language, none skipped",
        "meaningful_languages": "languages where the feature is meaningful, joined by ';'",
    },
}


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def classifier_artifact(name: str, classifier: str) -> str:
    """heatmap.csv, forest -> heatmap_forest.csv"""
    path = Path(name)
    return f"{path.stem}_{classifier}{path.suffix}"


def _markdown(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    lines += ["| " + " | ".join(row) + " |" for row in rows]
    return "\n".join(lines) + "\n"


def write_table(
    path: Path,
    header: Sequence[str],
    rows: Iterable[Sequence[str]],
    formats: Sequence[str] = ("csv",),
) -> List[Path]:
    """Write one table as CSV, and as Markdown next to it when "md" is requested."""
    rows = [list(row) for row in rows]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    written = [path]
    if "md" in formats:
        md_path = path.with_suffix(".md")
        md_path.write_text(_markdown(header, rows), encoding="utf-8")
        written.append(md_path)
    return written


def write_results(results: ResultsStore, out_dir: Path, formats: Sequence[str] = ("csv",)) -> List[Path]:
    header = list(REPORT_COLUMNS[RESULTS_NAME])
    rows = [
        [
            result.classifier,
            result.condition.label,
            result.condition.kind.value,
            ";".join(result.condition.train_languages),
            ";".join(result.condition.test_languages),
            str(len(result.repetitions)),
            _fmt(result.mean_uar),
            _fmt(result.mean_f1),
            ";".join(_fmt(score) for score, _ in result.repetitions),
            ";".join(_fmt(score) for _, score in result.repetitions),
        ]
        for result in results.results
    ]
    return write_table(out_dir / RESULTS_NAME, header, rows, formats)


def write_heatmap(
    table: HeatmapTable,
    out_dir: Path,
    formats: Sequence[str] = ("csv",),
    name: str = HEATMAP_NAME,
) -> List[Path]:
    header = ["train\\test"] + table.col_labels
    rows = [
        [label] + [_fmt(value) for value in table.grid[i]]
        for i, label in enumerate(table.row_labels)
    ]
    return write_table(out_dir / name, header, rows, formats)


def write_scores(scores: Sequence[ScoreRow], out_dir: Path, formats: Sequence[str] = ("csv",)) -> List[Path]:
    rows = [
        [row.classifier, row.condition, _fmt(row.mean_uar), _fmt(row.mean_f1), str(row.n_cells)]
        for row in scores
    ]
    return write_table(out_dir / SCORES_NAME, list(REPORT_COLUMNS[SCORES_NAME]), rows, formats)


def write_feature_tests(report: AnalysisReport, out_dir: Path, formats: Sequence[str] = ("csv",)) -> List[Path]:
    rows = [
        [
            result.feature_name,
            result.language,
            str(result.n_abusive),
            str(result.n_non_abusive),
            f"{result.u_statistic:.1f}",
            f"{result.p_value:.6g}",
            f"{result.p_adjusted:.6g}",
            _fmt(result.cles),
            str(result.meaningful).lower(),
            str(result.degenerate).lower(),
        ]
        for result in report.results
    ]
    return write_table(out_dir / FEATURE_TESTS_NAME, list(REPORT_COLUMNS[FEATURE_TESTS_NAME]), rows, formats)


def write_important_features(
    summary: Sequence[FeatureSummaryRow],
    out_dir: Path,
    formats: Sequence[str] = ("csv",),
) -> List[Path]:
    rows = []
    for row in summary:
        cells = [row.feature_name]
        for part in (row.non_abusive, row.abusive):
            cells += [_fmt(part.mean), _fmt(part.q1), _fmt(part.median), _fmt(part.q3)]
        cells.append(_fmt(row.mean_cles))
        rows.append(cells)
    return write_table(
        out_dir / IMPORTANT_FEATURES_NAME, list(REPORT_COLUMNS[IMPORTANT_FEATURES_NAME]), rows, formats
    )


def write_importance(
    importances: Sequence[FeatureImportance],
    out_dir: Path,
    formats: Sequence[str] = ("csv",),
) -> List[Path]:
    rows = [
        [str(item.rank), item.feature_name, _fmt(item.importance), _fmt(item.std)]
        for item in importances
    ]
    return write_table(out_dir / IMPORTANCE_NAME, list(REPORT_COLUMNS[IMPORTANCE_NAME]), rows, formats)


def write_attribution_comparison(
    importances: Sequence[FeatureImportance],
    report: AnalysisReport,
    top_k: int,
    out_dir: Path,
    formats: Sequence[str] = ("csv",),
) -> List[Path]:
    """Permutation top-k next to the features the per-language tests call important.

    Rows cover the union of both sets in importance order.
    """
    important = set(report.important_features)
    meaningful = {verdict.feature_name: verdict.meaningful_in for verdict in report.verdicts}
    rows = [
        [
            item.feature_name,
            str(item.rank),
            _fmt(item.importance),
            str(item.rank <= top_k).lower(),
            str(item.feature_name in important).lower(),
            ";".join(meaningful.get(item.feature_name, ())),
        ]
        for item in importances
        if item.rank <= top_k or item.feature_name in important
    ]
    return write_table(
        out_dir / ATTRIBUTION_COMPARISON_NAME, list(REPORT_COLUMNS[ATTRIBUTION_COMPARISON_NAME]), rows, formats
    )


def write_report_schema(out_dir: Path, report_names: Iterable[str]) -> Path:
    """Document the columns of every report in out_dir; merges with an existing schema file."""
    path = out_dir / REPORT_SCHEMA_NAME
    schema: Dict[str, Dict[str, str]] = {}
    if path.exists():
        with open(path, "r", encoding="utf-8") as f:
            schema = yaml.safe_load(f) or {}
    for name in report_names:
        schema[name] = REPORT_COLUMNS[name]
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(dict(sorted(schema.items())), f, sort_keys=False, allow_unicode=True)
    return path
