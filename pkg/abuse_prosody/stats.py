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

"""Per-feature Mann-Whitney U analysis with Holm correction and CLES."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm, rankdata

from .config import ALPHA, CLES_THRESHOLD, EXACT_U_MAX_PRODUCT
from .dataset import ABUSIVE, NON_ABUSIVE, Dataset
from .errors import InsufficientData

MIN_ROWS_PER_CLASS = 2


@dataclass(frozen=True)
class MannWhitneyResult:
    u: float
    p_value: float
    method: str  # "exact", "normal" or "degenerate"

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


@lru_cache(maxsize=256)
def u_distribution(n_a: int, n_b: int) -> np.ndarray:
    """Number of rank arrangements giving U = 0..n_a*n_b for tie-free samples.

    Coefficients of the Gaussian binomial [n_a + n_b choose n_a]_q, built
    one factor (1 - q^(n_b+i)) / (1 - q^i) at a time.
    """
    size = n_a * n_b + 1
    counts = np.zeros(size + n_a + n_b, dtype=np.int64)
    counts[0] = 1
    for i in range(1, n_a + 1):
        shift = n_b + i
        counts[shift:] -= counts[:-shift].copy()
        for residue in range(i):
            counts[residue::i] = np.cumsum(counts[residue::i])
    return counts[:size]


def exact_u_p_value(u: float, n_a: int, n_b: int) -> float:
    counts = u_distribution(n_a, n_b)
    total = float(counts.sum())
    k = int(round(u))
    lower = counts[:k + 1].sum() / total
    upper = counts[k:].sum() / total
    return float(min(1.0, 2.0 * min(lower, upper)))


def normal_u_p_value(u: float, n_a: int, n_b: int, tie_counts: Optional[np.ndarray] = None) -> float:
    """Two-sided normal approximation with tie-corrected variance and continuity correction."""
    n = n_a + n_b
    mu = n_a * n_b / 2.0
    tie_term = 0.0
    if tie_counts is not None and n > 1:
        t = np.asarray(tie_counts, dtype=np.float64)
        tie_term = float(np.sum(t ** 3 - t)) / (n * (n - 1))
    variance = n_a * n_b / 12.0 * ((n + 1) - tie_term)
    if variance <= 0.0:
        return 1.0
    z = max(0.0, abs(u - mu) - 0.5) / np.sqrt(variance)
    return float(min(1.0, 2.0 * norm.sf(z)))


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> MannWhitneyResult:
    """U for sample a from pooled midranks, with a two-sided p-value.

    Exact when n_a * n_b <= 400 and there are no ties, normal approximation
    otherwise. All-identical pooled values give p = 1 and method "degenerate".
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n_a, n_b = a.size, b.size
    if n_a < 1 or n_b < 1:
        raise ValueError(f"both samples must be nonempty (got {n_a} and {n_b})")

    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u = float(ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)
    if np.all(pooled == pooled[0]):
        return MannWhitneyResult(u=u, p_value=1.0, method="degenerate")

    _, tie_counts = np.unique(pooled, return_counts=True)
    has_ties = bool(np.any(tie_counts > 1))
    if n_a * n_b <= EXACT_U_MAX_PRODUCT and not has_ties:
        return MannWhitneyResult(u=u, p_value=exact_u_p_value(u, n_a, n_b), method="exact")
    return MannWhitneyResult(u=u, p_value=normal_u_p_value(u, n_a, n_b, tie_counts), method="normal")


def holm_correction(p_values: Sequence[float]) -> np.ndarray:
    """Step-down Bonferroni-Holm adjusted p-values, in input order."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        return p.copy()
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = p.size
    order = np.argsort(p, kind="stable")
    scaled = (m - np.arange(m)) * p[order]
    adjusted_sorted = np.minimum(np.maximum.accumulate(scaled), 1.0)
    adjusted = np.empty(m)
    adjusted[order] = adjusted_sorted
    return adjusted


def cles(a: Sequence[float], b: Sequence[float]) -> float:
    """P(random a > random b), ties counted one half."""
    a = np.asarray(a, dtype=np.float64)
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    below = np.searchsorted(b, a, side="left")
    at_or_below = np.searchsorted(b, a, side="right")
    greater = float(below.sum())
    ties = float((at_or_below - below).sum())
    return (2.0 * greater + ties) / (2.0 * a.size * b.size)


@dataclass(frozen=True)
class FeatureTestResult:
    feature_name: str
    language: str
    u_statistic: float
    p_value: float
    p_adjusted: float
    # oriented as P(abusive > non-abusive)
    cles: float
    meaningful: bool
    degenerate: bool = False
    n_abusive: int = 0
    n_non_abusive: int = 0

    @property
    def effect(self) -> float:
        return max(self.cles, 1.0 - self.cles)


@dataclass(frozen=True)
class ImportanceVerdict:
    feature_name: str
    meaningful_in: Tuple[str, ...]
    important: bool


@dataclass
class AnalysisReport:
    results: List[FeatureTestResult]
    verdicts: List[ImportanceVerdict]
    languages: List[str]
    skipped: Dict[str, str] = field(default_factory=dict)

    @property
    def important_features(self) -> List[str]:
        return [verdict.feature_name for verdict in self.verdicts if verdict.important]

    @property
    def meaningful_counts(self) -> Dict[str, int]:
        counts = {language: 0 for language in self.languages}
        for result in self.results:
            if result.meaningful:
                counts[result.language] += 1
        return counts

    def for_language(self, language: str) -> List[FeatureTestResult]:
        return [result for result in self.results if result.language == language]


def is_meaningful(p_adjusted: float, cles_value: float, alpha: float = ALPHA, threshold: float = CLES_THRESHOLD) -> bool:
    return p_adjusted < alpha and max(cles_value, 1.0 - cles_value) > threshold


def analyze_language(
    X: np.ndarray,
    y: np.ndarray,
    language: str,
    feature_names: Sequence[str],
    alpha: float = ALPHA,
    cles_threshold: float = CLES_THRESHOLD,
) -> List[FeatureTestResult]:
    abusive = X[y == ABUSIVE]
    calm = X[y == NON_ABUSIVE]
    if abusive.shape[0] < MIN_ROWS_PER_CLASS or calm.shape[0] < MIN_ROWS_PER_CLASS:
        raise InsufficientData(
            f"language {language!r} has {abusive.shape[0]} abusive and {calm.shape[0]} non-abusive rows; "
            f"need at least {MIN_ROWS_PER_CLASS} of each"
        )

    tests = [mann_whitney_u(abusive[:, j], calm[:, j]) for j in range(X.shape[1])]
    effects = [cles(abusive[:, j], calm[:, j]) for j in range(X.shape[1])]
    # Holm family: every feature tested within this language
    adjusted = holm_correction([test.p_value for test in tests])
    return [
        FeatureTestResult(
            feature_name=name,
            language=language,
            u_statistic=test.u,
            p_value=test.p_value,
            p_adjusted=float(p_adj),
            cles=effect,
            meaningful=is_meaningful(float(p_adj), effect, alpha, cles_threshold),
            degenerate=test.degenerate,
            n_abusive=int(abusive.shape[0]),
            n_non_abusive=int(calm.shape[0]),
        )
        for name, test, effect, p_adj in zip(feature_names, tests, effects, adjusted)
    ]


def analyze_features(
    data: Dataset,
    alpha: float = ALPHA,
    cles_threshold: float = CLES_THRESHOLD,
) -> AnalysisReport:
    """Run the per-language tests and derive the important-feature verdicts.

    Languages without two rows of each class are skipped and listed in
    report.skipped; a feature is important when it is meaningful in every
    language that was analyzed and no language was skipped.
    """
    results: List[FeatureTestResult] = []
    analyzed: List[str] = []
    skipped: Dict[str, str] = {}
    for language in data.languages:
        mask = data.groups == language
        try:
            results += analyze_language(
                data.X[mask], data.y[mask], language, data.feature_names, alpha, cles_threshold
            )
        except InsufficientData as exc:
            print(f"Warning: skipping {language}: {exc}")
            skipped[language] = str(exc)
            continue
        analyzed.append(language)

    if not analyzed:
        raise InsufficientData("no language has enough rows of both classes to analyze")

    meaningful_in: Dict[str, List[str]] = {name: [] for name in data.feature_names}
    for result in results:
        if result.meaningful:
            meaningful_in[result.feature_name].append(result.language)
    verdicts = [
        ImportanceVerdict(
            feature_name=name,
            meaningful_in=tuple(meaningful_in[name]),
            important=not skipped and len(meaningful_in[name]) == len(analyzed),
        )
        for name in data.feature_names
    ]
    return AnalysisReport(results=results, verdicts=verdicts, languages=analyzed, skipped=skipped)


@dataclass(frozen=True)
class ClassSummary:
    mean: float
    q1: float
    median: float
    q3: float


@dataclass(frozen=True)
class FeatureSummaryRow:
    feature_name: str
    non_abusive: ClassSummary
    abusive: ClassSummary
    mean_cles: float


def _class_summary(values: np.ndarray) -> ClassSummary:
    q1, median, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return ClassSummary(float(values.mean()), float(q1), float(median), float(q3))


def summarize_features(
    data: Dataset,
    report: AnalysisReport,
    feature_names: Optional[Sequence[str]] = None,
) -> List[FeatureSummaryRow]:
    """Per-class mean and quartiles pooled over languages, with the mean CLES across languages.

    Defaults to the report's important features.
    """
    names = list(feature_names) if feature_names is not None else report.important_features
    in_scope = np.isin(data.groups, report.languages)
    rows = []
    for name in names:
        j = data.feature_names.index(name)
        column = data.X[in_scope, j]
        labels = data.y[in_scope]
        effects = [result.cles for result in report.results if result.feature_name == name]
        rows.append(
            FeatureSummaryRow(
                feature_name=name,
                non_abusive=_class_summary(column[labels == NON_ABUSIVE]),
                abusive=_class_summary(column[labels == ABUSIVE]),
                mean_cles=float(np.mean(effects)) if effects else 0.5,
            )
        )
    return rows
