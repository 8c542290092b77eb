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

"""Random forest of CART trees grown on Gini impurity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .config import DEFAULT_SEED, MIN_SAMPLES_SPLIT, N_ESTIMATORS
from .dataset import Dataset, require_both_classes

LEAF = -1
_GAIN_EPS = 1e-12


@dataclass
class DecisionTree:
    """Flat node arrays; node 0 is the root and leaves have feature == LEAF.

    Rows with x[feature] <= threshold go left.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    # (n_nodes, 2) class probabilities (non-abusive, abusive)
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row, walking all rows down one level at a time."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.feature[node] != LEAF
        while active.any():
            idx = rows[active]
            current = node[idx]
            go_left = X[idx, self.feature[current]] <= self.threshold[current]
            node[idx] = np.where(go_left, self.left[current], self.right[current])
            active[idx] = self.feature[node[idx]] != LEAF
        return node

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X), 1]


@dataclass
class ForestModel:
    trees: List[DecisionTree]
    n_features: int
    feature_names: Tuple[str, ...]
    n_estimators: int = N_ESTIMATORS
    max_features: int = 7
    max_depth: Optional[int] = None
    min_samples_split: int = MIN_SAMPLES_SPLIT
    seed: int = DEFAULT_SEED

    classifier = "forest"

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict_proba(X)
        return total / len(self.trees)


def _gini(positives: np.ndarray, counts: np.ndarray) -> np.ndarray:
    p = positives / counts
    return 2.0 * p * (1.0 - p)


def _best_threshold(values: np.ndarray, labels: np.ndarray) -> Optional[Tuple[float, float]]:
    """Best (gain, threshold) over midpoints between sorted distinct values of one feature."""
    order = np.argsort(values, kind="stable")
    xs = values[order]
    ys = labels[order]
    n = xs.size
    distinct = xs[1:] > xs[:-1]
    if not distinct.any():
        return None

    left_n = np.arange(1, n, dtype=np.float64)
    right_n = n - left_n
    left_pos = np.cumsum(ys)[:-1].astype(np.float64)
    right_pos = ys.sum() - left_pos
    parent = _gini(np.array([ys.sum()], dtype=np.float64), np.array([float(n)]))[0]
    child = (left_n * _gini(left_pos, left_n) + right_n * _gini(right_pos, right_n)) / n
    gain = np.where(distinct, parent - child, -np.inf)

    best = float(gain.max())
    # the first maximum sits at the lowest threshold
    i = int(np.flatnonzero(gain >= best - _GAIN_EPS)[0])
    low, high = xs[i], xs[i + 1]
    threshold = (low + high) / 2.0
    if threshold >= high:
        threshold = low
    return float(gain[i]), float(threshold)


def _leaf_value(labels: np.ndarray) -> np.ndarray:
    p = float(labels.mean())
    return np.array([1.0 - p, p])


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    max_features: int,
    max_depth: Optional[int] = None,
    min_samples_split: int = MIN_SAMPLES_SPLIT,
) -> DecisionTree:
    """Grow one unpruned CART tree on (X, y) without recursion."""
    n_features = X.shape[1]
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[np.ndarray] = []

    def new_node(labels: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(_leaf_value(labels))
        return len(feature) - 1

    root = new_node(y)
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        labels = y[rows]
        positives = labels.sum()
        if positives == 0 or positives == rows.size or rows.size < min_samples_split:
            continue
        if max_depth is not None and depth >= max_depth:
            continue

        # At least max_features candidates; keep drawing while no valid split was found.
        best: Optional[Tuple[float, int, float]] = None
        for evaluated, f in enumerate(rng.permutation(n_features), start=1):
            found = _best_threshold(X[rows, f], labels)
            if found is not None:
                gain, thr = found
                if (
                    best is None
                    or gain > best[0] + _GAIN_EPS
                    or (abs(gain - best[0]) <= _GAIN_EPS and (f, thr) < (best[1], best[2]))
                ):
                    best = (gain, int(f), thr)
            if evaluated >= max_features and best is not None:
                break
        if best is None:
            continue

        _, f, thr = best
        go_left = X[rows, f] <= thr
        left_rows, right_rows = rows[go_left], rows[~go_left]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(y[left_rows])
        right[node] = new_node(y[right_rows])
        stack.append((right[node], right_rows, depth + 1))
        stack.append((left[node], left_rows, depth + 1))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.vstack(value),
    )


def default_max_features(n_features: int) -> int:
    return max(1, int(math.floor(math.sqrt(n_features))))


def train_forest(
    data: Dataset,
    n_estimators: int = N_ESTIMATORS,
    max_depth: Optional[int] = None,
    min_samples_split: int = MIN_SAMPLES_SPLIT,
    max_features: Optional[int] = None,
    seed: int = DEFAULT_SEED,
) -> ForestModel:
    """Bagged CART ensemble; tree i draws its bootstrap and candidates from SeedSequence([seed, i])."""
    require_both_classes(data.y)
    if n_estimators < 1:
        raise ValueError(f"n_estimators must be >= 1, got {n_estimators}")
    if len(data) < 2:
        raise ValueError("need at least 2 rows to train a forest")
    max_features = max_features or default_max_features(data.n_features)

    n_rows = len(data)
    trees = []
    for tree_idx in range(n_estimators):
        rng = np.random.default_rng(np.random.SeedSequence([seed, tree_idx]))
        sample = rng.integers(0, n_rows, size=n_rows)
        trees.append(
            grow_tree(
                data.X[sample],
                data.y[sample],
                rng,
                max_features=max_features,
                max_depth=max_depth,
                min_samples_split=min_samples_split,
            )
        )
    return ForestModel(
        trees=trees,
        n_features=data.n_features,
        feature_names=tuple(data.feature_names),
        n_estimators=n_estimators,
        max_features=max_features,
        max_depth=max_depth,
        min_samples_split=min_samples_split,
        seed=seed,
    )
