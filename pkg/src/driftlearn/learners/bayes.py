"""Incremental Gaussian naive Bayes."""

from __future__ import annotations

import math

import numpy as np

from ..core import ContractError, Instance, IncrementalClassifier, LabeledInstance

VARIANCE_FLOOR = 1e-6


class GaussianNaiveBayes(IncrementalClassifier):
    """Naive Bayes with per-class Gaussian feature models.

    Means and variances are maintained with Welford's online update, so a
    single pass over the stream suffices and numeric drift stays bounded.
    Variances are floored at ``VARIANCE_FLOOR`` to keep constant features
    from producing degenerate likelihoods.
    """

    def __init__(self, class_count: int, n_features: int):
        if class_count < 2:
            raise ContractError("need at least two classes")
        self.class_count = class_count
        self.n_features = n_features
        self._counts = np.zeros(class_count, dtype=np.int64)
        self._means = np.zeros((class_count, n_features))
        self._m2 = np.zeros((class_count, n_features))

    def update(self, labeled: LabeledInstance) -> None:
        y = labeled.label
        if not 0 <= y < self.class_count:
            raise ContractError(f"label {y} outside [0, {self.class_count})")
        x = labeled.features
        self._counts[y] += 1
        delta = x - self._means[y]
        self._means[y] += delta / self._counts[y]
        self._m2[y] += delta * (x - self._means[y])

    def predict(self, instance: Instance) -> np.ndarray:
        total = self._counts.sum()
        if total == 0:
            return np.full(self.class_count, 1.0 / self.class_count)
        x = instance.features
        log_post = np.full(self.class_count, -np.inf)
        seen = self._counts > 0
        counts_seen = self._counts[seen]
        variances = np.maximum(self._m2[seen] / counts_seen[:, None], VARIANCE_FLOOR)
        diff = x[None, :] - self._means[seen]
        log_lik = -0.5 * np.sum(
            np.log(2.0 * math.pi * variances) + diff * diff / variances, axis=1
        )
        log_post[seen] = np.log(counts_seen / total) + log_lik
        # Exponentiate around the max so extreme log-likelihoods stay finite.
        shifted = np.exp(log_post - log_post.max())
        return shifted / shifted.sum()

    def clone_model(self) -> "GaussianNaiveBayes":
        clone = GaussianNaiveBayes(self.class_count, self.n_features)
        clone._counts = self._counts.copy()
        clone._means = self._means.copy()
        clone._m2 = self._m2.copy()
        return clone
