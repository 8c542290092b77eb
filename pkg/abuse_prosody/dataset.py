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

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import SingleClassData
from .features import FEATURE_NAMES

ABUSIVE = 1
NON_ABUSIVE = 0


@dataclass
class Dataset:
    """Feature matrix with binary labels (1 = abusive) and a language tag per row."""

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    ids: Optional[np.ndarray] = None
    feature_names: Tuple[str, ...] = field(default=FEATURE_NAMES)

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        self.groups = np.asarray(self.groups, dtype=object)
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-D, got shape {self.X.shape}")
        n_rows = self.X.shape[0]
        if self.y.shape != (n_rows,) or self.groups.shape != (n_rows,):
            raise ValueError(
                f"row counts differ: X has {n_rows}, y has {self.y.size}, groups has {self.groups.size}"
            )
        if self.ids is None:
            self.ids = np.array([str(i) for i in range(n_rows)], dtype=object)
        else:
            self.ids = np.asarray(self.ids, dtype=object)
        if len(self.feature_names) != self.X.shape[1]:
            raise ValueError(f"{len(self.feature_names)} feature names for {self.X.shape[1]} columns")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains non-finite values")
        if not np.isin(self.y, (NON_ABUSIVE, ABUSIVE)).all():
            raise ValueError("labels must be 0 (non-abusive) or 1 (abusive)")

    def __len__(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    @property
    def languages(self) -> list[str]:
        return sorted(set(self.groups.tolist()))

    def subset(self, mask: np.ndarray) -> "Dataset":
        return Dataset(self.X[mask], self.y[mask], self.groups[mask], self.ids[mask], self.feature_names)

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            raise ValueError("nothing to concatenate")
        return cls(
            np.vstack([part.X for part in parts]),
            np.concatenate([part.y for part in parts]),
            np.concatenate([part.groups for part in parts]),
            np.concatenate([part.ids for part in parts]),
            parts[0].feature_names,
        )


def require_both_classes(y: np.ndarray) -> None:
    present = np.unique(y)
    if present.size < 2:
        label = "none" if present.size == 0 else str(int(present[0]))
        raise SingleClassData(f"training data needs both classes; only class {label} present in {len(y)} rows")
