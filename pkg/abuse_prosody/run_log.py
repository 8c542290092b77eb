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
import os
import uuid
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml

from .config import RUN_LOG_NAME, RUN_SUMMARY_NAME


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


class RunLog:
    """Append-only JSONL event log for one command invocation.

    Errors are swallowed so a full disk never aborts an experiment run.
    """

    def __init__(self, log_dir: str, command: str):
        self.log_dir = log_dir
        self.command = command
        self.run_id = str(uuid.uuid4())
        self.path = os.path.join(log_dir, RUN_LOG_NAME)

    def event(self, event: str, **fields: Any) -> str:
        entry_id = str(uuid.uuid4())
        entry: Dict[str, Any] = dict(fields)
        # reserved keys win over caller fields
        entry.update({
            "id": entry_id,
            "run_id": self.run_id,
            "timestamp": _now_iso(),
            "command": self.command,
            "event": event,
        })
        try:
            os.makedirs(self.log_dir, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(entry, default=str) + "\n")
        except Exception:
            pass
        return entry_id


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_run_summary(
    out_dir: Path,
    command: str,
    config: Dict[str, Any],
    artifacts: Iterable[Path],
    wall_time_s: float,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write run_summary.yaml: config echo, seed, wall time and artifact hashes."""
    summary: Dict[str, Any] = {
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "wall_time_s": round(wall_time_s, 3),
        "artifacts": {
            Path(path).name: file_sha256(Path(path))
            for path in sorted(artifacts, key=lambda item: Path(item).name)
        },
    }
    if extra:
        summary.update(extra)
    path = Path(out_dir) / RUN_SUMMARY_NAME
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(summary, f, sort_keys=False, allow_unicode=True)
    return path
