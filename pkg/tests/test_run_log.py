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

import hashlib
import json

import yaml

from abuse_prosody.errors import MissingSplit, format_command_error
from abuse_prosody.run_log import RunLog, file_sha256, write_run_summary


def test_events_are_appended_as_jsonl(tmp_path):
    log = RunLog(str(tmp_path), "extract")
    first = log.event("start", config={"seed": 7})
    second = log.event("skipped", recording_id="clip-3", reason="EmptyPayload: no samples")

    entries = [json.loads(line) for line in (tmp_path / "run_log.jsonl").read_text().splitlines()]
    assert [entry["id"] for entry in entries] == [first, second]
    assert {entry["run_id"] for entry in entries} == {log.run_id}
    assert entries[0]["config"] == {"seed": 7}
    assert entries[1] == {
        "recording_id": "clip-3",
        "reason": "EmptyPayload: no samples",
        "id": second,
        "run_id": log.run_id,
        "timestamp": entries[1]["timestamp"],
        "command": "extract",
        "event": "skipped",
    }


def test_reserved_keys_cannot_be_overridden(tmp_path):
    log = RunLog(str(tmp_path), "extract")
    entry_id = log.event("extracted", id="clip-9", command="other")
    entry = json.loads((tmp_path / "run_log.jsonl").read_text())
    assert entry["id"] == entry_id
    assert entry["command"] == "extract"


def test_non_json_values_are_stringified(tmp_path):
    log = RunLog(str(tmp_path), "stats")
    log.event("analyzed", path=tmp_path / "features.csv")
    entry = json.loads((tmp_path / "run_log.jsonl").read_text())
    assert entry["path"] == str(tmp_path / "features.csv")


def test_unwritable_log_is_swallowed(tmp_path):
    blocker = tmp_path / "not-a-dir"
    blocker.write_text("file")
    log = RunLog(str(blocker), "experiment")
    assert log.event("start")


def test_run_summary_hashes_artifacts(tmp_path):
    artifact = tmp_path / "results.csv"
    artifact.write_text("classifier,condition\n")
    path = write_run_summary(tmp_path, "experiment", {"seed": 11, "reps": 5}, [artifact], 1.23456)

    summary = yaml.safe_load(path.read_text())
    assert summary["command"] == "experiment"
    assert summary["seed"] == 11
    assert summary["wall_time_s"] == 1.235
    assert summary["artifacts"] == {"results.csv": hashlib.sha256(artifact.read_bytes()).hexdigest()}
    assert file_sha256(artifact) == summary["artifacts"]["results.csv"]


class TestFormatCommandError:
    """Structured payloads for failed commands."""

    def test_domain_error_has_no_traceback(self, tmp_path):
        payload = format_command_error("experiment", MissingSplit("hindi has no test rows"), {"reps": 5}, str(tmp_path))
        assert payload["status"] == "error"
        assert payload["error_type"] == "MissingSplit"
        assert payload["args"] == {"reps": "5"}
        assert "traceback" not in payload
        assert "error_logging.yaml" in payload["guidance"]

    def test_unexpected_error_keeps_traceback(self):
        try:
            raise ValueError("bad")
        except ValueError as exc:
            payload = format_command_error("stats", exc)
        assert "traceback" in payload
        assert "guidance" not in payload

    def test_error_log_accumulates_documents(self, tmp_path):
        format_command_error("extract", ValueError("first"), log_dir=str(tmp_path))
        format_command_error("extract", ValueError("second"), log_dir=str(tmp_path))
        text = (tmp_path / "error_logging.yaml").read_text()
        documents = list(yaml.safe_load_all(text))
        assert text.startswith("---")
        assert [doc["message"] for doc in documents] == ["first", "second"]
