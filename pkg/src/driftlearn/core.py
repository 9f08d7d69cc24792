"""Shared types and utilities for streaming learners.

Instances carry dense float features plus their arrival index.  Predictions
are plain numpy score vectors over a fixed class count; helpers here keep the
argmax and normalization conventions in one place.  Randomness is organized
around one root seed per run, from which each component (stream, query
strategy, replay sampler, ...) derives its own labeled substream so that
adding draws to one component never perturbs another.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np


class ContractError(ValueError):
    """Raised when a caller violates a documented interface contract."""


@dataclass(frozen=True, slots=True)
class Instance:
    """An unlabeled stream element."""

    features: np.ndarray
    arrival_index: int = 0


@dataclass(frozen=True, slots=True)
class LabeledInstance:
    """A stream element together with its class label."""

    instance: Instance
    label: int

    @property
    def features(self) -> np.ndarray:
        return self.instance.features


def make_instance(features, arrival_index: int = 0) -> Instance:
    """Build an Instance from any sequence of finite feature values."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractError(f"features must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractError("features must be finite")
    return Instance(arr, arrival_index)


def argmax_label(scores: np.ndarray) -> int:
    """Index of the highest score; ties resolve to the smallest index."""
    if len(scores) == 0:
        raise ContractError("cannot take argmax of an empty score vector")
    return int(np.argmax(scores))


def normalize_scores(scores: np.ndarray) -> np.ndarray:
    """Scale non-negative scores to sum to one; all-zero becomes uniform."""
    total = scores.sum()
    if total <= 0.0:
        return np.full(len(scores), 1.0 / len(scores))
    return scores / total


# Registry of component labels used to derive independent substreams from a
# single root seed.  The spawn keys are part of the reproducibility contract:
# reordering or renumbering them changes every downstream result.
_COMPONENT_KEYS = {
    "stream": 0,
    "query": 1,
    "replay": 2,
    "learner": 3,
    "evaluation": 4,
    "shadow": 5,
}


def make_rng(root_seed: int, component: str) -> np.random.Generator:
    """Derive the PCG64 substream for one named component of a run.

    The same (root_seed, component) pair always yields an identical stream,
    and distinct components are statistically independent.
    """
    try:
        key = _COMPONENT_KEYS[component]
    except KeyError:
        raise ContractError(f"unknown rng component {component!r}") from None
    seq = np.random.SeedSequence(entropy=root_seed, spawn_key=(key,))
    return np.random.Generator(np.random.PCG64(seq))


def draw_uniform(rng: np.random.Generator) -> float:
    """Uniform draw strictly inside (0, 1)."""
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


class IncrementalClassifier(abc.ABC):
    """Contract for classifiers trained one labeled instance at a time.

    ``predict`` must never mutate model state, and ``update`` is
    order-sensitive: streams are processed in arrival order.
    """

    class_count: int

    @abc.abstractmethod
    def update(self, labeled: LabeledInstance) -> None:
        """Absorb one labeled instance."""

    @abc.abstractmethod
    def predict(self, instance: Instance) -> np.ndarray:
        """Score vector over classes, summing to one."""

    @abc.abstractmethod
    def clone_model(self) -> "IncrementalClassifier":
        """Deep, independent copy of the current model state."""
