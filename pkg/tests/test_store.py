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

"""Manifest parsing and the CSV feature store."""

from pathlib import Path

import numpy as np
import pytest
import yaml

from abuse_prosody.errors import ManifestError, MissingSplit, SchemaMismatch
from abuse_prosody.features import FEATURE_NAMES
from abuse_prosody.store import (
    FeatureStore,
    ManifestRecord,
    parse_manifest,
    read_feature_store,
    read_manifest,
    validate_manifest,
    write_feature_store,
    write_manifest,
)
from abuse_prosody.synth import synthetic_feature_store

HEADER = "id,path,language,label,split\n"


class TestManifest:
    def test_three_rows(self):
        text = HEADER + "a,a.wav,hindi,abusive,train\nb,b.wav,hindi,non_abusive,train\nc,c.wav,tamil,abusive,test\n"
        records = parse_manifest(text)
        assert [record.id for record in records] == ["a", "b", "c"]
        assert [record.label_value for record in records] == [1, 0, 1]
        assert records[2].split == "test"
        assert records[0].line == 2

    def test_label_case_and_separators_fold(self):
        text = HEADER + "a,a.wav,hindi,Abusive,train\nb,b.wav,hindi,Non-Abusive,TEST\nc,c.wav,hindi,non abusive,train\n"
        records = parse_manifest(text)
        assert [record.label for record in records] == ["abusive", "non_abusive", "non_abusive"]
        assert records[1].split == "test"

    def test_duplicate_id_names_both_lines(self):
        text = HEADER + "a,a.wav,hindi,abusive,train\nb,b.wav,hindi,abusive,train\na,c.wav,hindi,abusive,test\n"
        with pytest.raises(ManifestError) as excinfo:
            parse_manifest(text)
        assert "duplicate id 'a' (lines 2 and 4)" in str(excinfo.value)

    def test_missing_column(self):
        with pytest.raises(ManifestError, match="split"):
            parse_manifest("id,path,language,label\na,a.wav,hindi,abusive\n")

    def test_lenient_skips_bad_rows(self, capsys):
        text = HEADER + "a,a.wav,hindi,abusive,train\nb,b.wav,hindi,angry,train\nc,c.wav,hindi,abusive,dev\n"
        records = parse_manifest(text, strict=False)
        assert [record.id for record in records] == ["a"]
        out = capsys.readouterr().out
        assert "line 3" in out and "line 4" in out

    def test_problems_are_collected(self):
        text = HEADER + ",a.wav,,abusive,train\n"
        records, problems = validate_manifest(text)
        assert records == []
        assert problems == ["line 2: empty id; empty language"]

    def test_relative_paths_resolve_against_manifest(self, tmp_path):
        manifest = tmp_path / "data" / "manifest.csv"
        manifest.parent.mkdir()
        manifest.write_text(HEADER + "a,clips/a.wav,hindi,abusive,train\nb,/abs/b.wav,hindi,abusive,train\n")
        records = read_manifest(manifest)
        assert records[0].path == tmp_path / "data" / "clips" / "a.wav"
        assert records[1].path == Path("/abs/b.wav")

    def test_utf8_bom_is_accepted(self):
        data = ("\ufeff" + HEADER + "a,a.wav,hindi,abusive,train\n").encode("utf-8")
        assert len(parse_manifest(data)) == 1

    def test_write_then_read(self, tmp_path):
        records = [
            ManifestRecord("x1", tmp_path / "audio" / "x1.wav", "odia", "abusive", "train"),
            ManifestRecord("x2", tmp_path / "audio" / "x2.wav", "odia", "non_abusive", "test"),
        ]
        path = write_manifest(records, tmp_path / "manifest.csv")
        assert "audio/x1.wav" in path.read_text()
        reread = read_manifest(path)
        assert [(r.id, r.path, r.label, r.split) for r in reread] == [(r.id, r.path, r.label, r.split) for r in records]


@pytest.fixture
def small_store():
    return synthetic_feature_store(languages=("hindi", "tamil"), rows_per_class=10, seed=3)


class TestFeatureStore:
    """Round trip and selection of the feature table."""

    def test_round_trip_is_exact(self, small_store, tmp_path):
        path, _ = write_feature_store(small_store, tmp_path / "features.csv")
        restored = read_feature_store(path)
        np.testing.assert_array_equal(restored.X, small_store.X)
        assert restored.ids.tolist() == small_store.ids.tolist()
        assert restored.feature_names == FEATURE_NAMES
        np.testing.assert_array_equal(restored.labels, small_store.labels)

    def test_schema_sidecar(self, small_store, tmp_path):
        _, schema_path = write_feature_store(small_store, tmp_path / "features.csv", extraction={"hop_ms": 10.0})
        assert schema_path.name == "features.schema.yaml"
        schema = yaml.safe_load(schema_path.read_text())
        assert schema["n_features"] == 54
        assert schema["columns"][:4] == ["id", "language", "label", "split"]
        assert schema["extraction"] == {"hop_ms": 10.0}

    def test_write_is_deterministic(self, small_store, tmp_path):
        first, _ = write_feature_store(small_store, tmp_path / "a.csv")
        second, _ = write_feature_store(small_store, tmp_path / "b.csv")
        assert first.read_bytes() == second.read_bytes()

    def test_bad_header(self, tmp_path):
        path = tmp_path / "features.csv"
        path.write_text("name,language,label,split,loudness_mean\n")
        with pytest.raises(SchemaMismatch):
            read_feature_store(path)

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "features.csv"
        path.write_text("id,language,label,split,loudness_mean\na,hindi,abusive,train\n")
        with pytest.raises(SchemaMismatch, match="line 2"):
            read_feature_store(path)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "features.csv"
        path.write_text("id,language,label,split,loudness_mean\na,hindi,abusive,train,loud\n")
        with pytest.raises(SchemaMismatch):
            read_feature_store(path)

    def test_duplicate_ids(self):
        with pytest.raises(SchemaMismatch):
            FeatureStore(["a", "a"], ["x", "x"], [0, 1], ["train", "test"], np.zeros((2, 1)), ("loudness_mean",))

    def test_select_by_language_and_split(self, small_store):
        data = small_store.select(["tamil"], "train")
        assert len(data) == 14
        assert set(data.groups.tolist()) == {"tamil"}

    def test_select_missing_split(self, small_store):
        small_store.splits[small_store.languages_column == "hindi"] = "train"
        with pytest.raises(MissingSplit, match="hindi"):
            small_store.select(["hindi", "tamil"], "test")

    def test_languages_sorted(self, small_store):
        assert small_store.languages == ["hindi", "tamil"]
