"""Linear one-vs-rest classifier trained by stochastic gradient descent.

The weight updates run inside numba-compiled kernels: replay-heavy
configurations apply thousands of sequential updates per queried instance,
which is far too slow in interpreted numpy.  A batch of n updates through
``update_many`` is bitwise identical to n single ``update`` calls because
both paths execute the same kernel loop.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..core import ContractError, Instance, IncrementalClassifier, LabeledInstance


@njit(cache=True)
def _train_hinge(weights, xs, ys, lr):
    n_classes, n_w = weights.shape
    for i in range(xs.shape[0]):
        y = ys[i]
        for c in range(n_classes):
            target = 1.0 if c == y else -1.0
            margin = 0.0
            for j in range(n_w):
                margin += weights[c, j] * xs[i, j]
            if target * margin < 1.0:
                step = lr * target
                for j in range(n_w):
                    weights[c, j] += step * xs[i, j]


@njit(cache=True)
def _train_logistic(weights, xs, ys, lr):
    n_classes, n_w = weights.shape
    for i in range(xs.shape[0]):
        y = ys[i]
        for c in range(n_classes):
            target = 1.0 if c == y else 0.0
            margin = 0.0
            for j in range(n_w):
                margin += weights[c, j] * xs[i, j]
            if margin >= 0.0:
                prob = 1.0 / (1.0 + np.exp(-margin))
            else:
                e = np.exp(margin)
                prob = e / (1.0 + e)
            step = lr * (prob - target)
            for j in range(n_w):
                weights[c, j] -= step * xs[i, j]


@njit(cache=True)
def _margins(weights, x_aug):
    n_classes, n_w = weights.shape
    out = np.empty(n_classes)
    for c in range(n_classes):
        m = 0.0
        for j in range(n_w):
            m += weights[c, j] * x_aug[j]
        out[c] = m
    return out


class LinearSgdClassifier(IncrementalClassifier):
    """One weight vector (plus bias) per class, hinge or logistic loss.

    Prediction scores come from the per-class margins: a softmax for the
    logistic loss, and min-shifted normalized margins for the hinge loss
    (uniform when all margins coincide).
    """

    def __init__(
        self,
        class_count: int,
        n_features: int,
        learning_rate: float = 0.01,
        loss: str = "hinge",
    ):
        if class_count < 2:
            raise ContractError("need at least two classes")
        if loss not in ("hinge", "logistic"):
            raise ContractError(f"unknown loss {loss!r}")
        if learning_rate <= 0.0:
            raise ContractError("learning_rate must be positive")
        self.class_count = class_count
        self.n_features = n_features
        self.learning_rate = learning_rate
        self.loss = loss
        self.weights = np.zeros((class_count, n_features + 1))

    def _augment(self, features: np.ndarray) -> np.ndarray:
        x = np.empty(self.n_features + 1)
        x[: self.n_features] = features
        x[self.n_features] = 1.0
        return x

    def update(self, labeled: LabeledInstance) -> None:
        xs = self._augment(labeled.features).reshape(1, -1)
        ys = np.array([labeled.label], dtype=np.int64)
        self._train(xs, ys)

    def update_many(self, features: np.ndarray, labels: np.ndarray) -> None:
        """Apply sequential updates for each row of an (n, d) feature batch."""
        n = features.shape[0]
        xs = np.empty((n, self.n_features + 1))
        xs[:, : self.n_features] = features
        xs[:, self.n_features] = 1.0
        self._train(xs, labels.astype(np.int64))

    def _train(self, xs: np.ndarray, ys: np.ndarray) -> None:
        for y in ys:
            if not 0 <= y < self.class_count:
                raise ContractError(f"label {y} outside [0, {self.class_count})")
        if self.loss == "hinge":
            _train_hinge(self.weights, xs, ys, self.learning_rate)
        else:
            _train_logistic(self.weights, xs, ys, self.learning_rate)

    def predict(self, instance: Instance) -> np.ndarray:
        margins = _margins(self.weights, self._augment(instance.features))
        if self.loss == "logistic":
            shifted = np.exp(margins - margins.max())
            return shifted / shifted.sum()
        scores = margins - margins.min()
        total = scores.sum()
        if total <= 0.0:
            return np.full(self.class_count, 1.0 / self.class_count)
        return scores / total

    def clone_model(self) -> "LinearSgdClassifier":
        clone = LinearSgdClassifier(
            self.class_count, self.n_features, self.learning_rate, self.loss
        )
        clone.weights = self.weights.copy()
        return clone
