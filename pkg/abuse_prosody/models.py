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

"""Classifier dispatch, prediction and JSON model files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Literal, Union

import numpy as np

from .config import DEFAULT_SEED, DEFAULT_THRESHOLD
from .dataset import Dataset
from .errors import DimensionMismatch, SchemaMismatch
from .forest import DecisionTree, ForestModel, train_forest
from .logistic import LogisticModel, train_logistic

Model = Union[ForestModel, LogisticModel]
ClassifierName = Literal["forest", "logistic"]
CLASSIFIERS: tuple[str, ...] = ("forest", "logistic")

MODEL_FORMAT = "abuse-prosody-model"
MODEL_FORMAT_VERSION = 1


def train_model(classifier: str, data: Dataset, seed: int = DEFAULT_SEED, **params: Any) -> Model:
    if classifier == "forest":
        return train_forest(data, seed=seed, **params)
    if classifier == "logistic":
        return train_logistic(data, seed=seed, **params)
    raise ValueError(f"Unknown classifier {classifier!r}; expected one of {', '.join(CLASSIFIERS)}")


def _check_columns(model: Model, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"model expects {model.n_features} feature columns, input has "
            f"{X.shape[1] if X.ndim == 2 else X.shape}"
        )
    return X


def predict_proba(model: Model, X: np.ndarray) -> np.ndarray:
    """Probability of the abusive class for every row."""
    X = _check_columns(model, X)
    return np.clip(model.predict_proba(X), 0.0, 1.0)


def predict(model: Model, X: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    # a probability exactly at the threshold is labelled abusive
    return (predict_proba(model, X) >= threshold).astype(np.int64)


def model_to_dict(model: Model) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "format": MODEL_FORMAT,
        "version": MODEL_FORMAT_VERSION,
        "classifier": model.classifier,
        "n_features": model.n_features,
        "feature_names": list(model.feature_names),
        "seed": int(model.seed),
    }
    if isinstance(model, ForestModel):
        payload["hyperparameters"] = {
            "n_estimators": model.n_estimators,
            "max_depth": model.max_depth,
            "min_samples_split": model.min_samples_split,
            "max_features": model.max_features,
        }
        payload["trees"] = [
            {
                "feature": tree.feature.tolist(),
                "threshold": tree.threshold.tolist(),
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "value": tree.value.tolist(),
            }
            for tree in model.trees
        ]
    else:
        payload["hyperparameters"] = {
            "l2_strength": model.l2_strength,
            "max_iter": model.max_iter,
            "tol": model.tol,
        }
        payload["weights"] = model.weights.tolist()
        payload["bias"] = model.bias
        payload["standardization"] = {"mean": model.mean.tolist(), "std": model.std.tolist()}
        payload["converged"] = model.converged
        payload["n_iter"] = model.n_iter
    return payload


def model_from_dict(payload: Dict[str, Any]) -> Model:
    if payload.get("format") != MODEL_FORMAT:
        raise SchemaMismatch(f"not a model file (format={payload.get('format')!r})")
    if payload.get("version") != MODEL_FORMAT_VERSION:
        raise SchemaMismatch(f"unsupported model version {payload.get('version')!r}")

    names = tuple(payload["feature_names"])
    hyper = payload["hyperparameters"]
    classifier = payload.get("classifier")
    if classifier == "forest":
        trees = [
            DecisionTree(
                feature=np.asarray(tree["feature"], dtype=np.int64),
                threshold=np.asarray(tree["threshold"], dtype=np.float64),
                left=np.asarray(tree["left"], dtype=np.int64),
                right=np.asarray(tree["right"], dtype=np.int64),
                value=np.asarray(tree["value"], dtype=np.float64).reshape(-1, 2),
            )
            for tree in payload["trees"]
        ]
        return ForestModel(
            trees=trees,
            n_features=int(payload["n_features"]),
            feature_names=names,
            n_estimators=int(hyper["n_estimators"]),
            max_features=int(hyper["max_features"]),
            max_depth=hyper.get("max_depth"),
            min_samples_split=int(hyper["min_samples_split"]),
            seed=int(payload["seed"]),
        )
    if classifier == "logistic":
        return LogisticModel(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            mean=np.asarray(payload["standardization"]["mean"], dtype=np.float64),
            std=np.asarray(payload["standardization"]["std"], dtype=np.float64),
            feature_names=names,
            l2_strength=float(hyper["l2_strength"]),
            max_iter=int(hyper["max_iter"]),
            tol=float(hyper["tol"]),
            seed=int(payload["seed"]),
            converged=bool(payload.get("converged", True)),
            n_iter=int(payload.get("n_iter", 0)),
        )
    raise SchemaMismatch(f"unknown classifier {classifier!r} in model file")


def save_model(model: Model, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(model_to_dict(model), f, sort_keys=True)
        f.write("\n")
    return path


def load_model(path: str | Path) -> Model:
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise SchemaMismatch(f"Expected {path} to contain a JSON object")
    return model_from_dict(payload)
