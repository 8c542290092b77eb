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

"""Multilingual / cross-lingual experiment protocol and its metrics."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_SEED, DEFAULT_THRESHOLD, N_SHUFFLES, REPETITIONS
from .dataset import ABUSIVE
from .errors import EmptyInput, HarnessError, IncompleteResults, LeakageError, MissingSplit
from .features import FEATURE_NAMES
from .models import Model, predict, train_model
from .store import FeatureStore

ALL_BUT_TEST = "all-but-test"
ALL_BUT_TRAIN = "all-but-train"


class ConditionKind(str, Enum):
    SINGLE = "single"
    MULTI_TEST = "multi_test"
    MULTI_TRAIN = "multi_train"
    ALL = "all"


@dataclass(frozen=True)
class Condition:
    kind: ConditionKind
    train_languages: Tuple[str, ...]
    test_languages: Tuple[str, ...]
    # the language that names the cell: train language for single/multi_test, excluded one for multi_train
    language: Optional[str] = None
    test_language: Optional[str] = None

    @property
    def label(self) -> str:
        if self.kind is ConditionKind.SINGLE:
            return f"single:{self.language}->{self.test_language}"
        if self.kind is ConditionKind.MULTI_TEST:
            return f"multi_test:{self.language}"
        if self.kind is ConditionKind.MULTI_TRAIN:
            return f"multi_train:{self.language}"
        return "all"


@dataclass(frozen=True)
class ExperimentSpec:
    """One trained model per repetition, scored on every condition that shares its training set."""

    name: str
    train_languages: Tuple[str, ...]
    conditions: Tuple[Condition, ...]
    classifier: str = "forest"
    repetitions: int = REPETITIONS
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    condition: Condition
    # (uar, f1) per repetition
    repetitions: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def classifier(self) -> str:
        return self.spec.classifier

    @property
    def mean_uar(self) -> float:
        return float(np.mean([uar_score for uar_score, _ in self.repetitions])) if self.repetitions else 0.0

    @property
    def mean_f1(self) -> float:
        return float(np.mean([f1_score for _, f1_score in self.repetitions])) if self.repetitions else 0.0


def build_conditions(
    languages: Sequence[str],
    classifier: str = "forest",
    repetitions: int = REPETITIONS,
    seed: int = DEFAULT_SEED,
) -> List[ExperimentSpec]:
    """Single-language, leave-one-language-out and all-language training specs (2n + 1 of them)."""
    unique = sorted(set(languages))
    if len(unique) != len(languages):
        print(f"Warning: dropped {len(languages) - len(unique)} duplicate language name(s)")
    if len(unique) < 2:
        raise ValueError(f"need at least 2 languages, got {unique}")
    everything = tuple(unique)

    specs: List[ExperimentSpec] = []
    for language in unique:
        others = tuple(other for other in unique if other != language)
        conditions = [
            Condition(ConditionKind.SINGLE, (language,), (test,), language, test) for test in unique
        ]
        conditions.append(Condition(ConditionKind.MULTI_TEST, (language,), others, language))
        specs.append(
            ExperimentSpec(f"train:{language}", (language,), tuple(conditions), classifier, repetitions, seed)
        )
    for language in unique:
        others = tuple(other for other in unique if other != language)
        condition = Condition(ConditionKind.MULTI_TRAIN, others, (language,), language)
        specs.append(ExperimentSpec(f"train:all-but:{language}", others, (condition,), classifier, repetitions, seed))
    condition = Condition(ConditionKind.ALL, everything, everything)
    specs.append(ExperimentSpec("train:all", everything, (condition,), classifier, repetitions, seed))
    return specs


def count_cells(specs: Iterable[ExperimentSpec]) -> int:
    return sum(len(spec.conditions) for spec in specs)


def _check_pair(y_true: Sequence[int], y_pred: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    truth = np.asarray(y_true)
    pred = np.asarray(y_pred)
    if truth.size == 0:
        raise EmptyInput("cannot score an empty prediction set")
    if truth.shape != pred.shape:
        raise ValueError(f"y_true has {truth.size} entries, y_pred has {pred.size}")
    return truth, pred


def uar(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    """Unweighted average recall over the classes present in y_true."""
    truth, pred = _check_pair(y_true, y_pred)
    recalls = [float(np.mean(pred[truth == label] == label)) for label in np.unique(truth)]
    return float(np.mean(recalls))


def f1(y_true: Sequence[int], y_pred: Sequence[int], positive: int = ABUSIVE) -> float:
    truth, pred = _check_pair(y_true, y_pred)
    true_pos = float(np.sum((pred == positive) & (truth == positive)))
    predicted = float(np.sum(pred == positive))
    actual = float(np.sum(truth == positive))
    precision = true_pos / predicted if predicted else 0.0
    recall = true_pos / actual if actual else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def check_leakage(train_ids: Iterable[str], test_ids: Iterable[str]) -> None:
    overlap = sorted(set(train_ids) & set(test_ids))
    if overlap:
        preview = ", ".join(overlap[:5])
        raise LeakageError(f"{len(overlap)} row id(s) appear in both train and test: {preview}")


def repetition_seed(seed: int, repetition: int) -> int:
    return int(np.random.SeedSequence([seed, repetition]).generate_state(1)[0])


def run_experiment(
    spec: ExperimentSpec,
    store: FeatureStore,
    classifier_params: Optional[Dict[str, Any]] = None,
    threshold: float = DEFAULT_THRESHOLD,
) -> List[ExperimentResult]:
    """Train spec.repetitions models and score each condition; one result per condition."""
    train = store.select(spec.train_languages, "train")
    tests = [store.select(condition.test_languages, "test") for condition in spec.conditions]
    for test in tests:
        check_leakage(train.ids, test.ids)

    results = [ExperimentResult(spec, condition) for condition in spec.conditions]
    for repetition in range(spec.repetitions):
        model = train_model(
            spec.classifier, train, seed=repetition_seed(spec.seed, repetition), **(classifier_params or {})
        )
        for result, test in zip(results, tests):
            y_pred = predict(model, test.X, threshold)
            result.repetitions.append((uar(test.y, y_pred), f1(test.y, y_pred)))
    return results


def _run_spec_job(job: Tuple[ExperimentSpec, FeatureStore, Optional[Dict[str, Any]]]) -> List[ExperimentResult]:
    spec, store, params = job
    try:
        return run_experiment(spec, store, params)
    except (MissingSplit, LeakageError, EmptyInput) as exc:
        raise type(exc)(f"{spec.name}: {exc}") from exc


class ResultsStore:
    """Completed results keyed by condition label; arrival order never matters."""

    def __init__(self) -> None:
        self._results: Dict[Tuple[str, str], ExperimentResult] = {}

    def add(self, result: ExperimentResult) -> None:
        key = (result.classifier, result.condition.label)
        if key in self._results:
            raise HarnessError(f"duplicate result for {key[0]} {key[1]}")
        self._results[key] = result

    def extend(self, results: Iterable[ExperimentResult]) -> None:
        for result in results:
            self.add(result)

    def get(self, label: str, classifier: str = "forest") -> Optional[ExperimentResult]:
        return self._results.get((classifier, label))

    def __len__(self) -> int:
        return len(self._results)

    @property
    def classifiers(self) -> List[str]:
        return sorted({classifier for classifier, _ in self._results})

    @property
    def results(self) -> List[ExperimentResult]:
        return [self._results[key] for key in sorted(self._results)]


def run_experiments(
    specs: Sequence[ExperimentSpec],
    store: FeatureStore,
    workers: int = 1,
    classifier_params: Optional[Dict[str, Any]] = None,
    on_result: Optional[Callable[[ExperimentSpec, List[ExperimentResult]], None]] = None,
) -> ResultsStore:
    """Run every spec, inline or on a bounded process pool."""
    results = ResultsStore()
    jobs = [(spec, store, classifier_params) for spec in specs]

    def collect(outcomes: Iterable[List[ExperimentResult]]) -> None:
        for spec, spec_results in zip(specs, outcomes):
            results.extend(spec_results)
            scores = ", ".join(f"{r.condition.label} UAR {r.mean_uar:.3f}" for r in spec_results[:3])
            print(f"{spec.name}: {scores}{' ...' if len(spec_results) > 3 else ''}")
            if on_result is not None:
                on_result(spec, spec_results)

    if workers <= 1 or len(jobs) <= 1:
        collect(map(_run_spec_job, jobs))
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            collect(pool.map(_run_spec_job, jobs))
    return results


@dataclass
class HeatmapTable:
    row_labels: List[str]
    col_labels: List[str]
    grid: np.ndarray

    def cell(self, row: str, col: str) -> float:
        return float(self.grid[self.row_labels.index(row), self.col_labels.index(col)])


def assemble_heatmap(
    results: ResultsStore,
    languages: Optional[Sequence[str]] = None,
    classifier: str = "forest",
) -> HeatmapTable:
    """Mean-UAR grid: first row all-but-test, then one row per training language;
    one column per test language, then all-but-train. The corner holds the all condition.
    """
    if languages is None:
        languages = sorted(
            {r.condition.language for r in results.results if r.condition.kind is ConditionKind.SINGLE}
        )
    languages = sorted(languages)
    rows = [ALL_BUT_TEST] + languages
    cols = languages + [ALL_BUT_TRAIN]

    def label_for(row: str, col: str) -> str:
        if row == ALL_BUT_TEST and col == ALL_BUT_TRAIN:
            return "all"
        if row == ALL_BUT_TEST:
            return f"multi_train:{col}"
        if col == ALL_BUT_TRAIN:
            return f"multi_test:{row}"
        return f"single:{row}->{col}"

    grid = np.full((len(rows), len(cols)), np.nan)
    missing = []
    for i, row in enumerate(rows):
        for j, col in enumerate(cols):
            result = results.get(label_for(row, col), classifier)
            if result is None:
                missing.append(label_for(row, col))
            else:
                grid[i, j] = result.mean_uar
    if missing:
        raise IncompleteResults(missing)
    return HeatmapTable(rows, cols, grid)


@dataclass(frozen=True)
class ScoreRow:
    classifier: str
    condition: str
    mean_uar: float
    mean_f1: float
    n_cells: int


def summarize_scores(results: ResultsStore) -> List[ScoreRow]:
    """Per classifier and condition kind: UAR and F1 averaged over the kind's cells."""
    rows = []
    for classifier in results.classifiers:
        for kind in ConditionKind:
            cells = [
                r for r in results.results if r.classifier == classifier and r.condition.kind is kind
            ]
            if not cells:
                continue
            rows.append(
                ScoreRow(
                    classifier=classifier,
                    condition=kind.value,
                    mean_uar=float(np.mean([r.mean_uar for r in cells])),
                    mean_f1=float(np.mean([r.mean_f1 for r in cells])),
                    n_cells=len(cells),
                )
            )
    return rows


@dataclass(frozen=True)
class FeatureImportance:
    rank: int
    feature_name: str
    importance: float
    std: float


def permutation_importance(
    model: Model,
    X: np.ndarray,
    y: np.ndarray,
    n_shuffles: int = N_SHUFFLES,
    seed: int = DEFAULT_SEED,
    feature_names: Sequence[str] = FEATURE_NAMES,
    threshold: float = DEFAULT_THRESHOLD,
) -> List[FeatureImportance]:
    """Mean UAR drop when one column is shuffled, ranked descending (ties keep column order)."""
    X = np.array(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] == 0:
        raise EmptyInput("permutation importance needs at least one row")
    if len(feature_names) != X.shape[1]:
        raise ValueError(f"{len(feature_names)} feature names for {X.shape[1]} columns")
    if n_shuffles < 1:
        raise ValueError(f"n_shuffles must be >= 1, got {n_shuffles}")

    rng = np.random.default_rng(seed)
    baseline = uar(y, predict(model, X, threshold))
    drops = np.zeros((X.shape[1], n_shuffles))
    for j in range(X.shape[1]):
        original = X[:, j].copy()
        for s in range(n_shuffles):
            X[:, j] = rng.permutation(original)
            drops[j, s] = baseline - uar(y, predict(model, X, threshold))
        X[:, j] = original

    importance = drops.mean(axis=1)
    order = sorted(range(X.shape[1]), key=lambda j: -importance[j])
    return [
        FeatureImportance(rank, feature_names[j], float(importance[j]), float(drops[j].std()))
        for rank, j in enumerate(order, start=1)
    ]
