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

# Audio front end
CANONICAL_SAMPLE_RATE = 16000
SPECTRAL_FRAME_MS = 25.0
PITCH_FRAME_MS = 60.0
HOP_MS = 10.0
SPECTRAL_WINDOW = "hann"
PITCH_WINDOW = "rect"

# Pitch and voicing
F0_MIN_HZ = 55.0
F0_MAX_HZ = 1000.0
F0_REFERENCE_HZ = 27.5
VOICING_THRESHOLD = 0.45
SILENCE_FLOOR_DBFS = -60.0
# A later autocorrelation peak is preferred over the first one only when it is
# this much stronger; keeps octave errors down on clean periodic input.
OCTAVE_PREFERENCE = 0.9

# Spectral descriptors
N_MEL_BANDS = 26
MEL_FMIN_HZ = 20.0
MEL_FMAX_HZ = 8000.0
LOUDNESS_EXPONENT = 0.33
N_MFCC = 4
RMS_FLOOR_DB = -120.0

# Formants
LPC_ORDER = 18
PRE_EMPHASIS = 0.97
FORMANT_MAX_BANDWIDTH_HZ = 400.0
FORMANT_MIN_HZ = 90.0
FORMANT_MAX_HZ = 5500.0
N_FORMANTS = 3

# Loudness dynamics
PEAK_RELATIVE_THRESHOLD = 0.1

# Random forest defaults
N_ESTIMATORS = 100
MIN_SAMPLES_SPLIT = 2

# Logistic regression defaults
L2_STRENGTH = 1.0
MAX_ITER = 1000
TOLERANCE = 1e-6

# Statistics
ALPHA = 0.05
CLES_THRESHOLD = 0.672
EXACT_U_MAX_PRODUCT = 400

# Protocol
REPETITIONS = 5
DEFAULT_SEED = 20230820
DEFAULT_THRESHOLD = 0.5
N_SHUFFLES = 10
# permutation ranks compared against the per-language test verdicts
TOP_K = 10
TRAIN_FRACTION = 0.7
# default worker count when --workers is not given; 0 or unset means one per CPU
WORKERS_ENV = "ABUSE_PROSODY_WORKERS"

# Output artifacts
FEATURE_STORE_NAME = "features.csv"
FEATURE_SCHEMA_NAME = "features.schema.yaml"
RESULTS_NAME = "results.csv"
# written once per classifier as <stem>_<classifier><suffix>
HEATMAP_NAME = "heatmap.csv"
SCORES_NAME = "scores.csv"
MODEL_NAME = "model.json"
FEATURE_TESTS_NAME = "feature_tests.csv"
IMPORTANT_FEATURES_NAME = "important_features.csv"
IMPORTANCE_NAME = "importance.csv"
ATTRIBUTION_COMPARISON_NAME = "attribution_vs_tests.csv"
REPORT_SCHEMA_NAME = "schema.yaml"
RUN_SUMMARY_NAME = "run_summary.yaml"
RUN_LOG_NAME = "run_log.jsonl"
ERROR_LOG_NAME = "error_logging.yaml"
MANIFEST_NAME = "manifest.csv"
