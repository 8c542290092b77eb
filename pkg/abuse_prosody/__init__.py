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

from .audio_io import AudioBuffer, FrameSequence, frame_signal, load_wav, read_wav, resample, write_wav
from .contours import (
    ContourSet,
    compute_f0,
    compute_flux,
    compute_formants,
    compute_jitter_shimmer,
    compute_loudness,
    compute_mfcc,
    compute_rms_db,
)
from .dataset import Dataset
from .features import (
    FEATURE_NAMES,
    IMPORTANT_FEATURE_NAMES,
    ExtractionConfig,
    FeatureVector,
    compute_contours,
    extract_features,
)
from .functionals import (
    FunctionalSummary,
    LoudnessDynamics,
    Segment,
    VoicingSummary,
    apply_functionals,
    loudness_dynamics,
    segment_voicing,
)
from .forest import ForestModel, train_forest
from .logistic import LogisticModel, logistic_objective, train_logistic
from .models import load_model, predict, predict_proba, save_model, train_model
from .stats import (
    AnalysisReport,
    FeatureTestResult,
    ImportanceVerdict,
    analyze_features,
    cles,
    holm_correction,
    mann_whitney_u,
    summarize_features,
)
from .harness import (
    Condition,
    ConditionKind,
    ExperimentResult,
    ExperimentSpec,
    HeatmapTable,
    ResultsStore,
    assemble_heatmap,
    build_conditions,
    f1,
    permutation_importance,
    run_experiment,
    run_experiments,
    summarize_scores,
    uar,
)
from .store import FeatureStore, ManifestRecord, parse_manifest, read_feature_store, write_feature_store
from .synth import generate_corpus, synthetic_feature_store

__all__ = [
    "analyze_features",
    "AnalysisReport",
    "apply_functionals",
    "assemble_heatmap",
    "AudioBuffer",
    "build_conditions",
    "cles",
    "compute_contours",
    "compute_f0",
    "compute_flux",
    "compute_formants",
    "compute_jitter_shimmer",
    "compute_loudness",
    "compute_mfcc",
    "compute_rms_db",
    "Condition",
    "ConditionKind",
    "ContourSet",
    "Dataset",
    "ExperimentResult",
    "ExperimentSpec",
    "extract_features",
    "ExtractionConfig",
    "f1",
    "FEATURE_NAMES",
    "FeatureStore",
    "FeatureTestResult",
    "FeatureVector",
    "ForestModel",
    "frame_signal",
    "FrameSequence",
    "FunctionalSummary",
    "generate_corpus",
    "HeatmapTable",
    "holm_correction",
    "IMPORTANT_FEATURE_NAMES",
    "ImportanceVerdict",
    "load_model",
    "load_wav",
    "logistic_objective",
    "LogisticModel",
    "loudness_dynamics",
    "LoudnessDynamics",
    "ManifestRecord",
    "mann_whitney_u",
    "parse_manifest",
    "permutation_importance",
    "predict",
    "predict_proba",
    "read_feature_store",
    "read_wav",
    "resample",
    "ResultsStore",
    "run_experiment",
    "run_experiments",
    "save_model",
    "Segment",
    "segment_voicing",
    "summarize_features",
    "summarize_scores",
    "synthetic_feature_store",
    "train_forest",
    "train_logistic",
    "train_model",
    "uar",
    "VoicingSummary",
    "write_feature_store",
    "write_wav",
]
