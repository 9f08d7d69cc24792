"""Synthetic drifting streams and file-backed streams.

A stream is an iterable of LabeledInstance built from one or more concepts.
Concept families: linearly separated subspaces (SEA), symbolic rules over
three nominal attributes (STAGGER), Gaussian clusters labeled by their
nearest centroid (RBF), a random decision tree (TREE), and a rotating
hyperplane whose signed margin is banded into classes (HYPER).

Concept drift is modeled by mixing a concept with its successor: at time t
the successor is sampled with probability f(t) = 1 / (1 + exp(-s (t - t0))),
where the slope s is 4 / width so the transition essentially completes
within one width on each side of its center t0.

Streams are single-use iterators; rebuild via the factory for another pass.
A fixed root seed reproduces the stream bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from statistics import NormalDist

import numpy as np

from .core import ContractError, Instance, LabeledInstance, draw_uniform, make_instance, make_rng

SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)
RBF_CENTROIDS = 50
RBF_SPREAD = 0.1
TREE_DEPTH = 5
HYPERPLANE_FLIP_PROBABILITY = 0.1


def sigmoid_probability(t: int, center: int, width: int) -> float:
    """Probability of sampling the successor concept at time t.

    Width 0 degenerates to a step: 0 before the center, 1 after, 0.5 at it.
    """
    if width < 0:
        raise ContractError(f"width must be >= 0, got {width}")
    if width == 0:
        if t < center:
            return 0.0
        return 0.5 if t == center else 1.0
    z = 4.0 / width * (t - center)
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


class SeaConcept:
    """Three uniform features on [0, 10); class 1 iff x0 + x1 <= threshold."""

    n_features = 3
    class_count = 2

    def __init__(self, threshold: float):
        self.threshold = threshold

    def sample_features(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random(3) * 10.0

    def classify(self, features: np.ndarray) -> int:
        return 1 if features[0] + features[1] <= self.threshold else 0

    def advance(self, rng: np.random.Generator) -> None:
        pass


class StaggerConcept:
    """Symbolic rules over integer-coded size, color, and shape attributes.

    rule 0: size = small and color = red
    rule 1: color = green or shape = circle
    rule 2: size = medium or size = large
    """

    n_features = 3
    class_count = 2

    def __init__(self, rule: int):
        if rule not in (0, 1, 2):
            raise ContractError(f"rule must be 0, 1, or 2, got {rule}")
        self.rule = rule

    def sample_features(self, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, 3, size=3).astype(np.float64)

    def classify(self, features: np.ndarray) -> int:
        size, color, shape = features[0], features[1], features[2]
        if self.rule == 0:
            hit = size == 0 and color == 0
        elif self.rule == 1:
            hit = color == 1 or shape == 0
        else:
            hit = size >= 1
        return int(hit)

    def advance(self, rng: np.random.Generator) -> None:
        pass


class RbfConcept:
    """Gaussian clusters around random centroids, labeled by proximity.

    Points are a weighted centroid choice plus isotropic Gaussian spread;
    the label is the class of the nearest centroid, so the labeling rule
    stays a pure function of the emitted features.
    """

    def __init__(self, n_features: int, class_count: int, rng: np.random.Generator):
        self.n_features = n_features
        self.class_count = class_count
        self.centroids = rng.random((RBF_CENTROIDS, n_features))
        classes = rng.integers(0, class_count, size=RBF_CENTROIDS)
        # Pin the first few centroids so every class is represented.
        classes[:class_count] = np.arange(class_count)
        self.classes = classes
        weights = rng.random(RBF_CENTROIDS)
        self._cumulative = np.cumsum(weights / weights.sum())

    def sample_features(self, rng: np.random.Generator) -> np.ndarray:
        idx = int(np.searchsorted(self._cumulative, rng.random()))
        idx = min(idx, RBF_CENTROIDS - 1)
        return self.centroids[idx] + rng.normal(0.0, RBF_SPREAD, self.n_features)

    def classify(self, features: np.ndarray) -> int:
        deltas = self.centroids - features[None, :]
        nearest = int(np.argmin((deltas * deltas).sum(axis=1)))
        return int(self.classes[nearest])

    def advance(self, rng: np.random.Generator) -> None:
        pass


class RandomTreeConcept:
    """Labels assigned by a fixed random binary decision tree on [0, 1)^d."""

    def __init__(
        self, n_features: int, class_count: int, rng: np.random.Generator, depth: int = TREE_DEPTH
    ):
        self.n_features = n_features
        self.class_count = class_count
        internal = 2 ** depth - 1
        self._features = rng.integers(0, n_features, size=internal)
        self._thresholds = rng.random(internal)
        self._leaf_classes = rng.integers(0, class_count, size=2 ** depth)
        self._depth = depth

    def sample_features(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random(self.n_features)

    def classify(self, features: np.ndarray) -> int:
        node = 0
        for _ in range(self._depth):
            if features[self._features[node]] <= self._thresholds[node]:
                node = 2 * node + 1
            else:
                node = 2 * node + 2
        return int(self._leaf_classes[node - (2 ** self._depth - 1)])

    def advance(self, rng: np.random.Generator) -> None:
        pass


class HyperplaneConcept:
    """Rotating hyperplane with the signed margin banded into classes.

    The margin w . x - sum(w)/2 on uniform features is approximately normal;
    band edges at the normal quantiles split it into class_count regions of
    roughly equal mass (two classes reduce to the margin's sign).  Each
    emitted instance nudges every weight by the rotation rate along its
    current direction, and each direction reverses with a fixed probability.
    """

    def __init__(
        self,
        n_features: int,
        class_count: int,
        rng: np.random.Generator,
        rotation_rate: float = 0.0,
        flip_probability: float = HYPERPLANE_FLIP_PROBABILITY,
    ):
        self.n_features = n_features
        self.class_count = class_count
        self.rotation_rate = rotation_rate
        self.flip_probability = flip_probability
        self.weights = rng.random(n_features)
        self._directions = np.ones(n_features)
        self._quantiles = [
            NormalDist().inv_cdf(k / class_count) for k in range(1, class_count)
        ]

    def sample_features(self, rng: np.random.Generator) -> np.ndarray:
        return rng.random(self.n_features)

    def classify(self, features: np.ndarray) -> int:
        margin = float(self.weights @ features) - 0.5 * float(self.weights.sum())
        sigma = math.sqrt(float((self.weights * self.weights).sum()) / 12.0)
        if sigma <= 0.0:
            return 0
        z = margin / sigma
        label = 0
        for edge in self._quantiles:
            if z > edge:
                label += 1
        return label

    def advance(self, rng: np.random.Generator) -> None:
        if self.rotation_rate == 0.0:
            return
        self.weights += self.rotation_rate * self._directions
        flips = rng.random(self.n_features) < self.flip_probability
        self._directions[flips] *= -1.0


class DriftingStream:
    """Concept sequence with sigmoid transitions and optional label noise.

    Label noise flips an emitted label to a uniformly random other class
    with the configured probability.  The stream advances past a transition
    once its mixture probability has saturated (4 widths past the center).
    """

    def __init__(
        self,
        concepts: list,
        transitions: list[tuple[int, int]],
        length: int,
        noise_rate: float,
        rng: np.random.Generator,
        name: str = "stream",
    ):
        if len(concepts) != len(transitions) + 1:
            raise ContractError("need exactly one more concept than transitions")
        if not 0.0 <= noise_rate < 1.0:
            raise ContractError(f"noise_rate must lie in [0, 1), got {noise_rate}")
        first = concepts[0]
        for concept in concepts[1:]:
            if (
                concept.n_features != first.n_features
                or concept.class_count != first.class_count
            ):
                raise ContractError("all concepts in a stream must share their shape")
        self.concepts = concepts
        self.transitions = sorted(transitions)
        self.length = length
        self.noise_rate = noise_rate
        self.name = name
        self._rng = rng
        self._consumed = False

    @property
    def n_features(self) -> int:
        return self.concepts[0].n_features

    @property
    def class_count(self) -> int:
        return self.concepts[0].class_count

    @property
    def drift_schedule(self) -> list[tuple[int, int]]:
        return list(self.transitions)

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        if self._consumed:
            raise ContractError("stream already consumed; rebuild it for another pass")
        self._consumed = True
        rng = self._rng
        active = 0
        for t in range(self.length):
            while active < len(self.transitions):
                center, width = self.transitions[active]
                if t > center + 4 * width:
                    active += 1
                else:
                    break
            concept = self.concepts[active]
            if active < len(self.transitions):
                center, width = self.transitions[active]
                if rng.random() < sigmoid_probability(t, center, width):
                    concept = self.concepts[active + 1]
            features = concept.sample_features(rng)
            label = concept.classify(features)
            if self.noise_rate > 0.0 and draw_uniform(rng) < self.noise_rate:
                label = (label + int(rng.integers(1, self.class_count))) % self.class_count
            self.concepts[active].advance(rng)
            yield LabeledInstance(Instance(features, t), label)


@dataclass(frozen=True)
class StreamRecipe:
    """Blueprint for one synthetic benchmark stream."""

    family: str
    length: int
    n_features: int
    class_count: int
    drift_width: int = 0
    drift_count: int = 0
    noise: float = 0.0
    rotation_rate: float = 0.0


PRESETS: dict[str, StreamRecipe] = {
    "rbf1": StreamRecipe("rbf", 1_000_000, 15, 5, 100, 3, 0.05),
    "rbf2": StreamRecipe("rbf", 1_000_000, 15, 5, 10_000, 3, 0.05),
    "rbf3": StreamRecipe("rbf", 1_200_000, 15, 5, 50_000, 2, 0.05),
    "rbf4": StreamRecipe("rbf", 1_200_000, 15, 5, 100_000, 2, 0.05),
    "tree1": StreamRecipe("tree", 1_000_000, 15, 5, 100, 3, 0.0),
    "tree2": StreamRecipe("tree", 1_000_000, 15, 5, 10_000, 3, 0.0),
    "tree3": StreamRecipe("tree", 1_200_000, 15, 5, 50_000, 2, 0.0),
    "tree4": StreamRecipe("tree", 1_200_000, 15, 5, 100_000, 2, 0.0),
    "sea1": StreamRecipe("sea", 600_000, 3, 2, 100, 3, 0.05),
    "sea2": StreamRecipe("sea", 600_000, 3, 2, 10_000, 3, 0.05),
    "stag1": StreamRecipe("stagger", 600_000, 3, 2, 100, 3, 0.0),
    "stag2": StreamRecipe("stagger", 600_000, 3, 2, 10_000, 3, 0.0),
    "hyper1": StreamRecipe("hyper", 500_000, 15, 5, 0, 0, 0.05, rotation_rate=0.001),
    "hyper2": StreamRecipe("hyper", 500_000, 15, 5, 0, 0, 0.05, rotation_rate=0.01),
}


def make_stream(name: str, seed: int, length: int | None = None) -> DriftingStream:
    """Instantiate a preset stream; length overrides scale the drift layout."""
    key = name.lower()
    if key not in PRESETS:
        raise ContractError(f"unknown stream preset {name!r}")
    recipe = PRESETS[key]
    if length is not None:
        recipe = replace(recipe, length=length)
    return build_stream(recipe, seed, name=key)


def build_stream(recipe: StreamRecipe, seed: int, name: str = "custom") -> DriftingStream:
    rng = make_rng(seed, "stream")
    k = recipe.drift_count
    segments = k + 1
    if recipe.family == "sea":
        concepts = [SeaConcept(SEA_THRESHOLDS[i % len(SEA_THRESHOLDS)]) for i in range(segments)]
    elif recipe.family == "stagger":
        concepts = [StaggerConcept(i % 3) for i in range(segments)]
    elif recipe.family == "rbf":
        concepts = [
            RbfConcept(recipe.n_features, recipe.class_count, rng) for _ in range(segments)
        ]
    elif recipe.family == "tree":
        concepts = [
            RandomTreeConcept(recipe.n_features, recipe.class_count, rng)
            for _ in range(segments)
        ]
    elif recipe.family == "hyper":
        if k:
            raise ContractError("hyperplane streams drift by rotation, not transitions")
        concepts = [
            HyperplaneConcept(
                recipe.n_features, recipe.class_count, rng, rotation_rate=recipe.rotation_rate
            )
        ]
    else:
        raise ContractError(f"unknown stream family {recipe.family!r}")
    transitions = [
        (round(recipe.length * (i + 1) / segments), recipe.drift_width) for i in range(k)
    ]
    return DriftingStream(concepts, transitions, recipe.length, recipe.noise, rng, name=name)


class FileStream:
    """Finite stream materialized from a file."""

    def __init__(self, items: list[LabeledInstance], class_count: int, name: str):
        if not items:
            raise ContractError("file stream holds no instances")
        self._items = items
        self.class_count = class_count
        self.n_features = len(items[0].features)
        self.length = len(items)
        self.name = name
        self.drift_schedule: list[tuple[int, int]] = []

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        return iter(self._items)


def read_delimited(
    path: str,
    *,
    delimiter: str = ",",
    label_column: int = -1,
    class_count: int | None = None,
) -> FileStream:
    """Delimited text, one instance per line, integer labels in one column.

    Lines starting with '#' and blank lines are skipped.  When class_count
    is not given it is inferred as max(label) + 1.
    """
    items: list[LabeledInstance] = []
    max_label = -1
    n_features = None
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(delimiter)
            col = label_column if label_column >= 0 else len(parts) + label_column
            if not 0 <= col < len(parts):
                raise ContractError(f"line {line_no}: label column out of range")
            try:
                label = int(parts[col])
                features = [float(p) for i, p in enumerate(parts) if i != col]
            except ValueError as exc:
                raise ContractError(f"line {line_no}: malformed row ({exc})") from None
            if label < 0:
                raise ContractError(f"line {line_no}: labels must be non-negative")
            if n_features is None:
                n_features = len(features)
            elif len(features) != n_features:
                raise ContractError(f"line {line_no}: expected {n_features} features")
            max_label = max(max_label, label)
            items.append(
                LabeledInstance(make_instance(features, arrival_index=len(items)), label)
            )
    inferred = max_label + 1
    if class_count is None:
        class_count = max(inferred, 2)
    elif inferred > class_count:
        raise ContractError(f"found label {max_label} but class_count is {class_count}")
    return FileStream(items, class_count, name=path)


def read_attribute_relation(path: str) -> FileStream:
    """Attribute-relation formatted file: @relation / @attribute / @data.

    Numeric attributes parse as floats; nominal attributes are encoded by
    their position in the declared value list.  The last attribute is the
    class and must be nominal; a data token outside its declared values is
    an error.
    """
    attributes: list[list[str] | None] = []
    items: list[LabeledInstance] = []
    in_data = False
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            lower = line.lower()
            if not in_data:
                if lower.startswith("@relation"):
                    continue
                if lower.startswith("@attribute"):
                    rest = line[len("@attribute"):].strip()
                    if "{" in rest:
                        values = rest[rest.index("{") + 1 : rest.rindex("}")]
                        attributes.append([v.strip() for v in values.split(",")])
                    else:
                        attributes.append(None)
                    continue
                if lower.startswith("@data"):
                    if len(attributes) < 2:
                        raise ContractError("need at least one feature and a class attribute")
                    if attributes[-1] is None:
                        raise ContractError("class attribute must be nominal")
                    in_data = True
                    continue
                raise ContractError(f"line {line_no}: unexpected header line")
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != len(attributes):
                raise ContractError(
                    f"line {line_no}: expected {len(attributes)} values, got {len(parts)}"
                )
            features = []
            for value, spec in zip(parts[:-1], attributes[:-1]):
                if spec is None:
                    try:
                        features.append(float(value))
                    except ValueError:
                        raise ContractError(f"line {line_no}: malformed numeric value {value!r}") from None
                else:
                    if value not in spec:
                        raise ContractError(f"line {line_no}: unknown token {value!r}")
                    features.append(float(spec.index(value)))
            class_values = attributes[-1]
            if parts[-1] not in class_values:
                raise ContractError(f"line {line_no}: unknown class token {parts[-1]!r}")
            label = class_values.index(parts[-1])
            items.append(
                LabeledInstance(make_instance(features, arrival_index=len(items)), label)
            )
    if not in_data:
        raise ContractError("no @data section found")
    return FileStream(items, len(attributes[-1]), name=path)
