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

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import expit

from .config import DEFAULT_SEED, L2_STRENGTH, MAX_ITER, TOLERANCE
from .dataset import Dataset, require_both_classes

ARMIJO_C = 1e-4
MIN_STEP = 1e-16


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    std: np.ndarray
    feature_names: Tuple[str, ...]
    l2_strength: float = L2_STRENGTH
    max_iter: int = MAX_ITER
    tol: float = TOLERANCE
    seed: int = DEFAULT_SEED
    converged: bool = True
    n_iter: int = 0

    classifier = "logistic"

    @property
    def n_features(self) -> int:
        return int(self.weights.size)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return ((X - self.mean) / self.std) @ self.weights + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return expit(self.decision_function(X))


def standardization(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Column means and population stds; zero-variance columns get std 1."""
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def logistic_objective(params: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> Tuple[float, np.ndarray]:
    """Mean negative log-likelihood plus l2 / (2N) * ||w||^2, and its gradient.

    params is (w_1..w_d, bias); the bias is not regularized.
    """
    n = X.shape[0]
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + e^z) - y z, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 / n * np.dot(w, w))
    residual = expit(z) - y
    grad = np.empty_like(params)
    grad[:-1] = X.T @ residual / n + l2 / n * w
    grad[-1] = residual.mean()
    return loss, grad


def train_logistic(
    data: Dataset,
    l2_strength: float = L2_STRENGTH,
    max_iter: int = MAX_ITER,
    tol: float = TOLERANCE,
    seed: int = DEFAULT_SEED,
) -> LogisticModel:
    """Gradient descent with Armijo backtracking on the standardized features.

    The problem is convex and started from zero, so the seed only travels
    with the model. Hitting max_iter leaves converged == False.
    """
    require_both_classes(data.y)
    mean, std = standardization(data.X)
    Z = (data.X - mean) / std
    y = data.y.astype(np.float64)

    params = np.zeros(Z.shape[1] + 1)
    loss, grad = logistic_objective(params, Z, y, l2_strength)
    step = 1.0
    converged = False
    n_iter = 0
    while n_iter < max_iter:
        grad_sq = float(np.dot(grad, grad))
        if np.sqrt(grad_sq) < tol:
            converged = True
            break
        while step >= MIN_STEP:
            candidate = params - step * grad
            candidate_loss, candidate_grad = logistic_objective(candidate, Z, y, l2_strength)
            if candidate_loss <= loss - ARMIJO_C * step * grad_sq:
                break
            step *= 0.5
        else:
            # no step decreases the loss any further
            break
        params, loss, grad = candidate, candidate_loss, candidate_grad
        step *= 2.0
        n_iter += 1
    else:
        converged = bool(np.sqrt(np.dot(grad, grad)) < tol)

    if not converged:
        print(f"Warning: logistic regression stopped after {n_iter} iterations without reaching tol={tol}")
    return LogisticModel(
        weights=params[:-1],
        bias=float(params[-1]),
        mean=mean,
        std=std,
        feature_names=tuple(data.feature_names),
        l2_strength=l2_strength,
        max_iter=max_iter,
        tol=tol,
        seed=seed,
        converged=converged,
        n_iter=n_iter,
    )
