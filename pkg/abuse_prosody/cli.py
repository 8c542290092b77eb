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

"""Command-line entry point: extract, experiment, stats, attribution and synth."""

from __future__ import annotations

import argparse
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .audio_io import read_wav
from .config import (
    ATTRIBUTION_COMPARISON_NAME,
    DEFAULT_SEED,
    FEATURE_STORE_NAME,
    FEATURE_TESTS_NAME,
    HEATMAP_NAME,
    IMPORTANCE_NAME,
    IMPORTANT_FEATURES_NAME,
    MODEL_NAME,
    N_ESTIMATORS,
    N_SHUFFLES,
    REPETITIONS,
    RESULTS_NAME,
    SCORES_NAME,
    TOP_K,
    WORKERS_ENV,
)
from .errors import (
    ConfigError,
    ExtractionError,
    InsufficientData,
    ManifestError,
    SchemaMismatch,
    format_command_error,
)
from .features import FEATURE_NAMES, ExtractionConfig, extract_features
from .harness import (
    ResultsStore,
    assemble_heatmap,
    build_conditions,
    count_cells,
    permutation_importance,
    repetition_seed,
    run_experiments,
    summarize_scores,
)
from .models import CLASSIFIERS, load_model, save_model, train_model
from .reports import (
    REPORT_FORMATS,
    classifier_artifact,
    write_attribution_comparison,
    write_feature_tests,
    write_heatmap,
    write_importance,
    write_important_features,
    write_report_schema,
    write_results,
    write_scores,
)
from .run_log import RunLog, write_run_summary
from .stats import analyze_features, summarize_features
from .store import FeatureStore, ManifestRecord, read_feature_store, validate_manifest, write_feature_store
from .synth import DEFAULT_LANGUAGES, generate_corpus

COMMANDS = ("extract", "experiment", "stats", "attribution", "synth")


@dataclass
class RunConfig:
    manifest: Optional[str] = None
    store: Optional[str] = None
    model: Optional[str] = None
    out: str = "runs"
    classifiers: Tuple[str, ...] = ("forest",)
    reps: int = REPETITIONS
    seed: int = DEFAULT_SEED
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    strict: bool = True
    n_estimators: int = N_ESTIMATORS
    shuffles: int = N_SHUFFLES
    top_k: int = TOP_K
    formats: Tuple[str, ...] = ("csv",)
    languages: Tuple[str, ...] = DEFAULT_LANGUAGES
    clips: int = 100
    duration: float = 2.0
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)

    def __post_init__(self) -> None:
        if not self.classifiers:
            raise ConfigError("classifier needs at least one name")
        unknown = [name for name in self.classifiers if name not in CLASSIFIERS]
        if unknown:
            raise ConfigError(
                f"classifier must be one of {', '.join(CLASSIFIERS)} or both, got {', '.join(map(repr, unknown))}"
            )
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.top_k < 1:
            raise ConfigError(f"top-k must be >= 1, got {self.top_k}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        unknown = [fmt for fmt in self.formats if fmt not in REPORT_FORMATS]
        if unknown:
            raise ConfigError(f"unknown report format(s) {', '.join(unknown)}; choose from {', '.join(REPORT_FORMATS)}")

    @property
    def out_dir(self) -> Path:
        return Path(self.out)

    @property
    def store_path(self) -> Path:
        return Path(self.store) if self.store else self.out_dir / FEATURE_STORE_NAME

    @property
    def model_path(self) -> Path:
        """--model if given, else the saved model of the first configured classifier."""
        if self.model:
            return Path(self.model)
        return self.out_dir / classifier_artifact(MODEL_NAME, self.classifiers[0])

    def classifier_params(self, classifier: str) -> Dict[str, Any]:
        return {"n_estimators": self.n_estimators} if classifier == "forest" else {}

    def as_dict(self) -> Dict[str, Any]:
        values = {item.name: getattr(self, item.name) for item in fields(self)}
        values["classifiers"] = list(self.classifiers)
        values["formats"] = list(self.formats)
        values["languages"] = list(self.languages)
        values["extraction"] = self.extraction.as_dict()
        return values


def _split_list(value: Any) -> Tuple[str, ...]:
    if isinstance(value, str):
        return tuple(item.strip() for item in value.split(",") if item.strip())
    return tuple(str(item) for item in value)


def _classifier_list(value: Any) -> Tuple[str, ...]:
    """'forest', 'forest,logistic' or 'both'; duplicates keep their first position."""
    names: List[str] = []
    for name in _split_list(value):
        for expanded in CLASSIFIERS if name == "both" else (name,):
            if expanded not in names:
                names.append(expanded)
    return tuple(names)


def _to_bool(value: Any) -> bool:
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"not a boolean: {value!r}")
        return lowered in ("true", "yes", "1")
    return bool(value)


# config-file keys that differ from the RunConfig field they set
_ALIASES = {"classifier": "classifiers"}

_COERCE: Dict[str, Callable[[Any], Any]] = {
    "manifest": str,
    "store": str,
    "model": str,
    "out": str,
    "classifiers": _classifier_list,
    "reps": int,
    "seed": int,
    "workers": int,
    "strict": _to_bool,
    "n_estimators": int,
    "shuffles": int,
    "top_k": int,
    "formats": _split_list,
    "languages": _split_list,
    "clips": int,
    "duration": float,
    "extraction": ExtractionConfig.from_dict,
}


def load_config_file(path: str | Path) -> Dict[str, Any]:
    """Read a YAML key-value config; keys mirror the long CLI flags."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            values = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(values, dict):
        raise ConfigError(f"config file {path} must hold a key-value mapping")
    values = {str(key).replace("-", "_"): value for key, value in values.items()}
    values = {_ALIASES.get(key, key): value for key, value in values.items()}
    unknown = sorted(set(values) - set(_COERCE))
    if unknown:
        raise ConfigError(f"unknown config key(s) in {path}: {', '.join(unknown)}")
    return values


def _workers_from_env() -> int:
    """Worker count from the environment; 0 when unset, empty or 0."""
    raw = os.getenv(WORKERS_ENV, "").strip()
    if not raw:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc


def build_run_config(overrides: Dict[str, Any], file_values: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Defaults, then ABUSE_PROSODY_WORKERS, then config-file values, then command-line flags."""
    merged = dict(file_values or {})
    merged.update({key: value for key, value in overrides.items() if value is not None})
    merged = {_ALIASES.get(key, key): value for key, value in merged.items()}
    if merged.get("workers") is None:
        workers = _workers_from_env()
        if workers:
            merged["workers"] = workers
    coerced = {}
    for key, value in merged.items():
        try:
            coerced[key] = _COERCE[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: cannot use {value!r}: {exc}") from exc
    return RunConfig(**coerced)


def _extract_job(job: Tuple[str, str, Dict[str, Any]]) -> Tuple[str, Optional[List[float]], Tuple[str, ...], str]:
    record_id, path, extraction = job
    try:
        vector = extract_features(read_wav(path), ExtractionConfig(**extraction))
    except Exception as exc:
        return record_id, None, (), f"{type(exc).__name__}: {exc}"
    return record_id, vector.values.tolist(), vector.flags, ""


def cmd_extract(cfg: RunConfig, log: RunLog) -> List[Path]:
    if not cfg.manifest:
        raise ConfigError("extract needs --manifest")
    manifest_path = Path(cfg.manifest)
    records, problems = validate_manifest(manifest_path.read_bytes(), base_dir=manifest_path.parent)
    if problems:
        if cfg.strict:
            raise ManifestError(problems)
        for problem in problems:
            print(f"Skipping manifest row, {problem}")
            log.event("skipped", reason=problem)

    jobs = [(record.id, str(record.path), cfg.extraction.as_dict()) for record in records]
    if cfg.workers <= 1 or len(jobs) <= 1:
        outcomes = list(map(_extract_job, jobs))
    else:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            outcomes = list(pool.map(_extract_job, jobs, chunksize=8))

    kept: List[ManifestRecord] = []
    rows: List[List[float]] = []
    failures: Dict[str, str] = {}
    for record, (record_id, values, flags, error) in zip(records, outcomes):
        if values is None:
            failures[record_id] = error
            print(f"Failed to extract {record_id}: {error}")
            log.event("skipped", recording_id=record_id, path=str(record.path), reason=error)
            continue
        if flags:
            log.event("flagged", recording_id=record_id, flags=list(flags))
        log.event("extracted", recording_id=record_id)
        kept.append(record)
        rows.append(values)
    if failures and cfg.strict:
        raise ExtractionError(failures)
    if not kept:
        raise ExtractionError(failures or {"manifest": "no records to extract"})

    store = FeatureStore(
        ids=[record.id for record in kept],
        languages_column=[record.language for record in kept],
        labels=[record.label_value for record in kept],
        splits=[record.split for record in kept],
        X=np.asarray(rows),
        feature_names=FEATURE_NAMES,
    )
    store_path, schema_path = write_feature_store(
        store, cfg.out_dir / FEATURE_STORE_NAME, extraction=cfg.extraction.as_dict()
    )
    print(f"Extracted {len(kept)} of {len(records)} recordings into {store_path}")
    return [store_path, schema_path]


def cmd_experiment(cfg: RunConfig, log: RunLog) -> List[Path]:
    store = read_feature_store(cfg.store_path)

    def on_result(spec, spec_results) -> None:
        log.event(
            "trained",
            classifier=spec.classifier,
            spec=spec.name,
            cells={result.condition.label: round(result.mean_uar, 6) for result in spec_results},
        )

    results = ResultsStore()
    for classifier in cfg.classifiers:
        specs = build_conditions(store.languages, classifier, cfg.reps, cfg.seed)
        print(f"Running {len(specs)} training specs ({count_cells(specs)} cells) with {classifier}")
        results.extend(
            run_experiments(specs, store, cfg.workers, cfg.classifier_params(classifier), on_result).results
        )
    scores = summarize_scores(results)

    artifacts = write_results(results, cfg.out_dir, cfg.formats)
    for classifier in cfg.classifiers:
        heatmap = assemble_heatmap(results, store.languages, classifier)
        artifacts += write_heatmap(heatmap, cfg.out_dir, cfg.formats, classifier_artifact(HEATMAP_NAME, classifier))
    artifacts += write_scores(scores, cfg.out_dir, cfg.formats)
    for row in scores:
        print(f"{row.classifier} {row.condition}: UAR {row.mean_uar:.3f} F1 {row.mean_f1:.3f}")

    # first repetition of the all-language model, kept for attribution
    train = store.select(store.languages, "train")
    for classifier in cfg.classifiers:
        model = train_model(classifier, train, seed=repetition_seed(cfg.seed, 0), **cfg.classifier_params(classifier))
        artifacts.append(save_model(model, cfg.out_dir / classifier_artifact(MODEL_NAME, classifier)))
    artifacts.append(write_report_schema(cfg.out_dir, [RESULTS_NAME, HEATMAP_NAME, SCORES_NAME]))
    return artifacts


def cmd_stats(cfg: RunConfig, log: RunLog) -> List[Path]:
    store = read_feature_store(cfg.store_path)
    report = analyze_features(store.dataset)
    for language, reason in report.skipped.items():
        log.event("skipped", language=language, reason=reason)
    summary = summarize_features(store.dataset, report)

    artifacts = write_feature_tests(report, cfg.out_dir, cfg.formats)
    artifacts += write_important_features(summary, cfg.out_dir, cfg.formats)
    artifacts.append(write_report_schema(cfg.out_dir, [FEATURE_TESTS_NAME, IMPORTANT_FEATURES_NAME]))
    for language, count in report.meaningful_counts.items():
        print(f"{language}: {count} meaningful features")
    print(f"Important features: {', '.join(report.important_features) or 'none'}")
    log.event("analyzed", meaningful_counts=report.meaningful_counts, important=report.important_features)
    return artifacts


def cmd_attribution(cfg: RunConfig, log: RunLog) -> List[Path]:
    model = load_model(cfg.model_path)
    store = read_feature_store(cfg.store_path)
    if model.n_features != len(store.feature_names):
        raise SchemaMismatch(
            f"model expects {model.n_features} features, store {cfg.store_path} has {len(store.feature_names)}"
        )
    if tuple(model.feature_names) != tuple(store.feature_names):
        raise SchemaMismatch("model and store list the same number of features under different names")

    test = store.select(store.languages, "test")
    importances = permutation_importance(
        model, test.X, test.y, n_shuffles=cfg.shuffles, seed=cfg.seed, feature_names=store.feature_names
    )
    for item in importances[:5]:
        print(f"{item.rank:2d}. {item.feature_name}: {item.importance:+.4f}")
    log.event("attributed", top=[item.feature_name for item in importances[:10]])
    artifacts = write_importance(importances, cfg.out_dir, cfg.formats)
    reports = [IMPORTANCE_NAME]
    try:
        report = analyze_features(store.dataset)
    except InsufficientData as exc:
        print(f"Skipping the comparison with the per-language tests: {exc}")
        log.event("skipped", report=ATTRIBUTION_COMPARISON_NAME, reason=str(exc))
    else:
        artifacts += write_attribution_comparison(importances, report, cfg.top_k, cfg.out_dir, cfg.formats)
        reports.append(ATTRIBUTION_COMPARISON_NAME)
        top = {item.feature_name for item in importances[: cfg.top_k]}
        overlap = [name for name in report.important_features if name in top]
        print(f"{len(overlap)} of {len(report.important_features)} test-important features in the top {cfg.top_k}")
        log.event("compared", top_k=cfg.top_k, overlap=overlap, important=report.important_features)
    artifacts.append(write_report_schema(cfg.out_dir, reports))
    return artifacts


def cmd_synth(cfg: RunConfig, log: RunLog) -> List[Path]:
    manifest_path, records = generate_corpus(
        cfg.out_dir, cfg.languages, cfg.clips, cfg.duration, cfg.seed
    )
    log.event("synthesized", clips=len(records), languages=list(cfg.languages))
    return [manifest_path]


HANDLERS: Dict[str, Callable[[RunConfig, RunLog], List[Path]]] = {
    "extract": cmd_extract,
    "experiment": cmd_experiment,
    "stats": cmd_stats,
    "attribution": cmd_attribution,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abuse-prosody",
        description="Abusive speech detection from acoustic and prosodic features.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", help="YAML file whose keys mirror these flags; flags win")
        sub.add_argument("--out")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--workers", type=int)
        sub.add_argument("--formats", help="comma separated: csv,md")
        if command == "extract":
            sub.add_argument("--manifest")
            mode = sub.add_mutually_exclusive_group()
            mode.add_argument("--strict", dest="strict", action="store_const", const=True)
            mode.add_argument("--lenient", dest="strict", action="store_const", const=False)
        if command in ("experiment", "stats", "attribution"):
            sub.add_argument("--store")
        if command == "experiment":
            sub.add_argument(
                "--classifier",
                dest="classifiers",
                help=f"comma separated: {','.join(CLASSIFIERS)}, or both",
            )
            sub.add_argument("--reps", type=int)
            sub.add_argument("--n-estimators", dest="n_estimators", type=int)
        if command == "attribution":
            sub.add_argument("--model", help="saved model; default model_<classifier>.json in --out")
            sub.add_argument("--classifier", dest="classifiers", choices=CLASSIFIERS)
            sub.add_argument("--shuffles", type=int)
            sub.add_argument("--top-k", dest="top_k", type=int, help="ranks compared with the per-language tests")
        if command == "synth":
            sub.add_argument("--languages", help="comma separated language names")
            sub.add_argument("--clips", type=int, help="clips per language")
            sub.add_argument("--duration", type=float, help="seconds per clip")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    overrides = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    out_dir = overrides.get("out") or RunConfig.out

    try:
        file_values = load_config_file(args.config) if args.config else {}
        # errors from here on land next to the run's outputs
        out_dir = str(overrides.get("out") or file_values.get("out") or RunConfig.out)
        cfg = build_run_config(overrides, file_values)
        out_dir = cfg.out
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        log = RunLog(out_dir, command)
        log.event("start", config=cfg.as_dict())
        started = time.perf_counter()
        artifacts = HANDLERS[command](cfg, log)
        wall_time = time.perf_counter() - started
        summary_path = write_run_summary(cfg.out_dir, command, cfg.as_dict(), artifacts, wall_time)
        log.event("finished", artifacts=[path.name for path in artifacts], wall_time_s=round(wall_time, 3))
        print(f"Wrote {len(artifacts)} artifact(s) and {summary_path}")
        return 0
    except Exception as exc:
        payload = format_command_error(command, exc, args=overrides, log_dir=str(out_dir))
        print(yaml.safe_dump(payload, sort_keys=False, allow_unicode=True))
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
