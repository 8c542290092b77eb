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

from typing import Any, Dict, Optional
import os
import traceback
import uuid
from datetime import datetime, timezone

import yaml

from .config import ERROR_LOG_NAME


class AbuseProsodyError(Exception):
    """Base class for every error raised by this package."""


class AudioError(AbuseProsodyError):
    pass


class MalformedHeader(AudioError):
    pass


class UnsupportedEncoding(AudioError):
    pass


class EmptyPayload(AudioError):
    pass


class SignalTooShort(AudioError):
    pass


class ModelError(AbuseProsodyError):
    pass


class SingleClassData(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class SchemaMismatch(ModelError):
    pass


class StatsError(AbuseProsodyError):
    pass


class InsufficientData(StatsError):
    pass


class HarnessError(AbuseProsodyError):
    pass


class EmptyInput(HarnessError):
    pass


class MissingSplit(HarnessError):
    pass


class LeakageError(HarnessError):
    pass


class IncompleteResults(HarnessError):
    def __init__(self, missing: list[str]):
        self.missing = list(missing)
        preview = ", ".join(self.missing[:10])
        more = f" (+{len(self.missing) - 10} more)" if len(self.missing) > 10 else ""
        super().__init__(f"{len(self.missing)} heatmap cells have no result: {preview}{more}")


class ManifestError(AbuseProsodyError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("Invalid manifest:\n" + "\n".join(self.problems))


class ExtractionError(AbuseProsodyError):
    def __init__(self, failures: Dict[str, str]):
        self.failures = dict(failures)
        details = "\n".join(f"{record_id}: {message}" for record_id, message in self.failures.items())
        super().__init__(f"{len(self.failures)} recording(s) failed to extract:\n{details}")


class ConfigError(AbuseProsodyError):
    pass


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def _log_error(log_dir: Optional[str], command: str, exc: BaseException, args: Optional[Dict[str, Any]] = None) -> None:
    """Append a structured error entry to <log_dir>/error_logging.yaml."""
    if not log_dir:
        return
    entry = {
        "id": str(uuid.uuid4()),
        "timestamp": _now_iso(),
        "command": command,
        "args": args or {},
        "error_type": type(exc).__name__,
        "message": str(exc),
        "traceback": traceback.format_exc(),
    }
    log_path = os.path.join(log_dir, ERROR_LOG_NAME)
    try:
        os.makedirs(log_dir, exist_ok=True)
        with open(log_path, "a", encoding="utf-8") as f:
            yaml.safe_dump(entry, f, explicit_start=True, sort_keys=False, allow_unicode=True)
    except Exception:
        # Never raise from logging
        pass


def format_command_error(
    command: str,
    exc: BaseException,
    args: Optional[Dict[str, Any]] = None,
    log_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """Return a structured error payload for a failed command and log it.

    Domain errors carry no traceback in the payload; anything else is a bug and keeps it.
    """
    _log_error(log_dir, command, exc, args)

    payload: Dict[str, Any] = {
        "status": "error",
        "command": command,
        "error_type": type(exc).__name__,
        "message": str(exc),
        "args": {key: str(value) for key, value in (args or {}).items()},
    }
    if not isinstance(exc, AbuseProsodyError):
        payload["traceback"] = traceback.format_exc()
    if log_dir:
        payload["guidance"] = (
            f"Details were appended to {os.path.join(log_dir, ERROR_LOG_NAME)}; "
            "the run log in the same directory lists every record processed before the failure."
        )
    return payload
