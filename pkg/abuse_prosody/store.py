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

"""Dataset manifests and the CSV feature store."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .dataset import ABUSIVE, NON_ABUSIVE, Dataset
from .errors import ManifestError, MissingSplit, SchemaMismatch
from .features import FEATURE_NAMES

MANIFEST_COLUMNS = ("id", "path", "language", "label", "split")
STORE_META_COLUMNS = ("id", "language", "label", "split")
LABELS = {"abusive": ABUSIVE, "non_abusive": NON_ABUSIVE}
LABEL_NAMES = {value: name for name, value in LABELS.items()}
SPLITS = ("train", "test")


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    path: Path
    language: str
    label: str
    split: str
    line: int = 0

    @property
    def label_value(self) -> int:
        return LABELS[self.label]


def _normalize_label(raw: str) -> Optional[str]:
    label = raw.strip().casefold().replace("-", "_").replace(" ", "_")
    return label if label in LABELS else None


def validate_manifest(
    data: bytes | str,
    base_dir: Optional[Path] = None,
) -> Tuple[List[ManifestRecord], List[str]]:
    """Parse manifest CSV text into records plus one problem string per rejected row."""
    text = data.decode("utf-8-sig") if isinstance(data, bytes) else data
    reader = csv.DictReader(io.StringIO(text))
    header = [name.strip() for name in (reader.fieldnames or [])]
    missing = [column for column in MANIFEST_COLUMNS if column not in header]
    if missing:
        raise ManifestError([f"line 1: missing column(s) {', '.join(missing)}; expected {','.join(MANIFEST_COLUMNS)}"])
    reader.fieldnames = header

    records: List[ManifestRecord] = []
    problems: List[str] = []
    first_line: Dict[str, int] = {}
    for line, row in enumerate(reader, start=2):
        values = {key: (row.get(key) or "").strip() for key in MANIFEST_COLUMNS}
        errors = [f"empty {key}" for key in ("id", "path", "language") if not values[key]]
        label = _normalize_label(values["label"])
        if label is None:
            errors.append(f"label {values['label']!r} is not abusive or non_abusive")
        split = values["split"].casefold()
        if split not in SPLITS:
            errors.append(f"split {values['split']!r} is not train or test")
        record_id = values["id"]
        if record_id and record_id in first_line:
            errors.append(f"duplicate id {record_id!r} (lines {first_line[record_id]} and {line})")
        if errors:
            problems.append(f"line {line}: " + "; ".join(errors))
            continue
        first_line[record_id] = line
        path = Path(values["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        records.append(ManifestRecord(record_id, path, values["language"], label, split, line))
    return records, problems


def parse_manifest(
    data: bytes | str,
    base_dir: Optional[Path] = None,
    strict: bool = True,
) -> List[ManifestRecord]:
    """Strict mode fails on the first invalid manifest; lenient mode prints and skips bad rows."""
    records, problems = validate_manifest(data, base_dir)
    if problems and strict:
        raise ManifestError(problems)
    for problem in problems:
        print(f"Skipping manifest row, {problem}")
    return records


def read_manifest(path: str | Path, strict: bool = True) -> List[ManifestRecord]:
    path = Path(path)
    return parse_manifest(path.read_bytes(), base_dir=path.parent, strict=strict)


def write_manifest(records: Iterable[ManifestRecord], path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for record in records:
            try:
                shown = record.path.relative_to(path.parent)
            except ValueError:
                shown = record.path
            writer.writerow([record.id, shown.as_posix(), record.language, record.label, record.split])
    return path


@dataclass
class FeatureStore:
    ids: np.ndarray
    languages_column: np.ndarray
    labels: np.ndarray
    splits: np.ndarray
    X: np.ndarray
    feature_names: Tuple[str, ...] = FEATURE_NAMES

    def __post_init__(self) -> None:
        self.ids = np.asarray(self.ids, dtype=object)
        self.languages_column = np.asarray(self.languages_column, dtype=object)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.splits = np.asarray(self.splits, dtype=object)
        self.X = np.asarray(self.X, dtype=np.float64).reshape(len(self.ids), len(self.feature_names))
        if len(set(self.ids.tolist())) != len(self.ids):
            raise SchemaMismatch("feature store ids are not unique")

    def __len__(self) -> int:
        return int(self.ids.size)

    @property
    def languages(self) -> List[str]:
        return sorted(set(self.languages_column.tolist()))

    @property
    def dataset(self) -> Dataset:
        return Dataset(self.X, self.labels, self.languages_column, self.ids, self.feature_names)

    def select(self, languages: Sequence[str], split: Optional[str] = None) -> Dataset:
        """Rows of the given languages (and split); every language must contribute rows."""
        mask = np.zeros(len(self), dtype=bool)
        for language in languages:
            rows = self.languages_column == language
            if split is not None:
                rows &= self.splits == split
            if not rows.any():
                raise MissingSplit(f"no {split or 'any'} rows for language {language!r}")
            mask |= rows
        return self.dataset.subset(mask)


def _format_value(value: float) -> str:
    return repr(float(value))


def write_feature_store(
    store: FeatureStore,
    path: str | Path,
    extraction: Optional[Dict[str, Any]] = None,
) -> Tuple[Path, Path]:
    """Write the CSV store and its schema sidecar (column order and extraction parameters)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(list(STORE_META_COLUMNS) + list(store.feature_names))
        for i in range(len(store)):
            writer.writerow(
                [store.ids[i], store.languages_column[i], LABEL_NAMES[int(store.labels[i])], store.splits[i]]
                + [_format_value(value) for value in store.X[i]]
            )

    schema_path = path.with_suffix(".schema.yaml")
    schema = {
        "columns": list(STORE_META_COLUMNS) + list(store.feature_names),
        "labels": sorted(LABELS),
        "splits": list(SPLITS),
        "n_features": len(store.feature_names),
        "extraction": extraction or {},
    }
    with open(schema_path, "w", encoding="utf-8") as f:
        yaml.safe_dump(schema, f, sort_keys=False)
    return path, schema_path


def read_feature_store(path: str | Path) -> FeatureStore:
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise SchemaMismatch(f"{path} is empty") from exc
        if tuple(header[:len(STORE_META_COLUMNS)]) != STORE_META_COLUMNS:
            raise SchemaMismatch(
                f"{path}: header must start with {','.join(STORE_META_COLUMNS)}, got {','.join(header[:4])}"
            )
        names = tuple(header[len(STORE_META_COLUMNS):])
        ids, languages, labels, splits, rows = [], [], [], [], []
        for line, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaMismatch(f"{path} line {line}: {len(row)} columns, header has {len(header)}")
            label = _normalize_label(row[2])
            if label is None or row[3] not in SPLITS:
                raise SchemaMismatch(f"{path} line {line}: bad label {row[2]!r} or split {row[3]!r}")
            try:
                values = [float(value) for value in row[len(STORE_META_COLUMNS):]]
            except ValueError as exc:
                raise SchemaMismatch(f"{path} line {line}: {exc}") from exc
            ids.append(row[0])
            languages.append(row[1])
            labels.append(LABELS[label])
            splits.append(row[3])
            rows.append(values)
    if not ids:
        raise SchemaMismatch(f"{path} has a header but no rows")
    return FeatureStore(ids, languages, labels, splits, np.asarray(rows), names)
