import math

import numpy as np
import pytest

from driftlearn.core import ContractError, make_rng
from driftlearn.streams import (
    DriftingStream,
    HyperplaneConcept,
    PRESETS,
    RandomTreeConcept,
    RbfConcept,
    SeaConcept,
    StaggerConcept,
    StreamRecipe,
    build_stream,
    make_stream,
    read_attribute_relation,
    read_delimited,
    sigmoid_probability,
)


# -------------------------------------------------------------------- sigmoid


def test_sigmoid_is_half_at_center():
    assert sigmoid_probability(1000, 1000, 200) == pytest.approx(0.5)
    assert sigmoid_probability(1000, 1000, 0) == pytest.approx(0.5)


def test_sigmoid_one_width_past_center():
    # slope 4/width puts t0 + width at 1/(1 + e^-4)
    assert sigmoid_probability(1100, 1000, 100) == pytest.approx(
        0.9820137900379085, rel=1e-12
    )
    assert sigmoid_probability(900, 1000, 100) == pytest.approx(
        1.0 - 0.9820137900379085, rel=1e-12
    )


def test_sigmoid_zero_width_is_a_step():
    assert sigmoid_probability(999, 1000, 0) == 0.0
    assert sigmoid_probability(1001, 1000, 0) == 1.0


def test_sigmoid_monotone_and_bounded():
    values = [sigmoid_probability(t, 500, 50) for t in range(0, 1000, 10)]
    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(a <= b for a, b in zip(values, values[1:]))
    with pytest.raises(ContractError):
        sigmoid_probability(0, 0, -1)


# ------------------------------------------------------------------- concepts


def test_sea_rule_and_purity():
    concept = SeaConcept(8.0)
    rng = make_rng(1, "stream")
    for _ in range(10_000):
        x = concept.sample_features(rng)
        assert np.all((0.0 <= x) & (x < 10.0))
        assert concept.classify(x) == int(x[0] + x[1] <= 8.0)


def test_stagger_rules():
    # attributes coded 0..2; rules transcribed independently
    rng = make_rng(2, "stream")
    rules = {
        0: lambda s, c, h: s == 0 and c == 0,
        1: lambda s, c, h: c == 1 or h == 0,
        2: lambda s, c, h: s in (1, 2),
    }
    for rule_id, rule in rules.items():
        concept = StaggerConcept(rule_id)
        for _ in range(2000):
            x = concept.sample_features(rng)
            assert concept.classify(x) == int(rule(x[0], x[1], x[2]))
    with pytest.raises(ContractError):
        StaggerConcept(3)


def test_rbf_labels_are_pure_functions_of_features():
    rng = make_rng(3, "stream")
    concept = RbfConcept(5, 3, rng)
    assert {int(c) for c in concept.classes} >= {0, 1, 2}  # every class present
    for _ in range(2000):
        x = concept.sample_features(rng)
        label = concept.classify(x)
        # nearest-centroid recomputation with independent arithmetic
        dists = [float(((c - x) ** 2).sum()) for c in concept.centroids]
        assert label == int(concept.classes[int(np.argmin(dists))])


def test_random_tree_is_deterministic_function():
    rng = make_rng(4, "stream")
    concept = RandomTreeConcept(4, 3, rng)
    x = concept.sample_features(rng)
    assert concept.classify(x) == concept.classify(x)
    labels = {concept.classify(concept.sample_features(rng)) for _ in range(2000)}
    assert labels <= set(range(3))
    assert len(labels) >= 2


def test_hyperplane_two_class_reduces_to_margin_sign():
    rng = make_rng(5, "stream")
    concept = HyperplaneConcept(3, 2, rng)
    for _ in range(2000):
        x = concept.sample_features(rng)
        margin = float(concept.weights @ x) - 0.5 * float(concept.weights.sum())
        assert concept.classify(x) == int(margin > 0)


def test_hyperplane_rotation_moves_boundary_monotonically():
    rng = make_rng(6, "stream")
    concept = HyperplaneConcept(2, 2, rng, rotation_rate=0.01, flip_probability=0.0)
    angles = []
    for _ in range(200):
        w = concept.weights
        angles.append(math.atan2(w[1], w[0]))
        concept.advance(rng)
    deltas = [b - a for a, b in zip(angles, angles[1:])]
    assert all(d <= 0 for d in deltas) or all(d >= 0 for d in deltas)
    assert abs(angles[-1] - angles[0]) > 0.0


def test_hyperplane_class_bands_cover_all_classes():
    rng = make_rng(7, "stream")
    concept = HyperplaneConcept(15, 5, rng)
    labels = [concept.classify(concept.sample_features(rng)) for _ in range(20_000)]
    counts = np.bincount(labels, minlength=5)
    assert np.all(counts > 0)
    # quantile banding aims at roughly equal mass
    assert counts.min() / counts.max() > 0.5


# -------------------------------------------------------------------- streams


def test_stream_determinism():
    a = [(tuple(item.features), item.label) for item in make_stream("SEA1", 9, length=2000)]
    b = [(tuple(item.features), item.label) for item in make_stream("SEA1", 9, length=2000)]
    assert a == b


def test_stream_is_single_use():
    stream = make_stream("SEA1", 1, length=100)
    list(stream)
    with pytest.raises(ContractError):
        list(stream)


def test_noise_free_single_concept_stream_is_pure():
    concept = SeaConcept(8.0)
    stream = DriftingStream([concept], [], 5000, 0.0, make_rng(8, "stream"))
    for item in stream:
        assert item.label == concept.classify(item.features)


def test_noise_rate_within_three_sigma():
    concept = SeaConcept(8.0)
    noise = 0.05
    n = 20_000
    stream = DriftingStream([concept], [], n, noise, make_rng(9, "stream"))
    flips = sum(item.label != concept.classify(item.features) for item in stream)
    sigma = math.sqrt(n * noise * (1 - noise))
    assert abs(flips - n * noise) < 3 * sigma


def test_noise_flips_to_a_different_class():
    rng = make_rng(10, "stream")
    concept = RbfConcept(4, 5, rng)
    stream = DriftingStream([concept], [], 5000, 0.3, make_rng(11, "stream"))
    labels = set()
    for item in stream:
        labels.add(item.label)
        assert 0 <= item.label < 5
    assert len(labels) == 5


def test_transition_mixture_follows_sigmoid():
    """Around a width-100 transition the new-concept fraction tracks f(t)."""
    center, width, n = 5000, 100, 10_000
    old = SeaConcept(100.0)  # always label 1 (x0 + x1 < 20 <= 100)
    new = SeaConcept(-1.0)  # always label 0
    stream = DriftingStream([old, new], [(center, width)], n, 0.0, make_rng(12, "stream"))
    window = 50
    observed = {}
    for item in stream:
        t = item.instance.arrival_index
        bucket = (t - center) // window
        if -10 <= bucket < 10:
            hits, total = observed.get(bucket, (0, 0))
            observed[bucket] = (hits + (item.label == 0), total + 1)
    for bucket, (hits, total) in observed.items():
        t_mid = center + bucket * window + window // 2
        expected = sigmoid_probability(t_mid, center, width)
        sigma = math.sqrt(max(expected * (1 - expected), 1e-9) / total)
        spread = max(4 * sigma, 0.06)  # sigmoid curvature across the bucket
        assert abs(hits / total - expected) < spread


def test_stream_advances_past_saturated_transition():
    # after t0 + 4w the old concept is dropped entirely
    old = SeaConcept(100.0)
    new = SeaConcept(-1.0)
    stream = DriftingStream([old, new], [(1000, 50)], 3000, 0.0, make_rng(13, "stream"))
    for item in stream:
        if item.instance.arrival_index > 1000 + 4 * 50 + 50:
            assert item.label == 0


def test_drift_centers_evenly_spaced():
    stream = make_stream("SEA1", 1)
    assert stream.drift_schedule == [(150_000, 100), (300_000, 100), (450_000, 100)]
    scaled = make_stream("SEA1", 1, length=100_000)
    assert scaled.drift_schedule == [(25_000, 100), (50_000, 100), (75_000, 100)]


def test_preset_table():
    expected = {
        "rbf1": ("rbf", 1_000_000, 15, 5, 100, 3, 0.05),
        "rbf2": ("rbf", 1_000_000, 15, 5, 10_000, 3, 0.05),
        "rbf3": ("rbf", 1_200_000, 15, 5, 50_000, 2, 0.05),
        "rbf4": ("rbf", 1_200_000, 15, 5, 100_000, 2, 0.05),
        "tree1": ("tree", 1_000_000, 15, 5, 100, 3, 0.0),
        "tree2": ("tree", 1_000_000, 15, 5, 10_000, 3, 0.0),
        "tree3": ("tree", 1_200_000, 15, 5, 50_000, 2, 0.0),
        "tree4": ("tree", 1_200_000, 15, 5, 100_000, 2, 0.0),
        "sea1": ("sea", 600_000, 3, 2, 100, 3, 0.05),
        "sea2": ("sea", 600_000, 3, 2, 10_000, 3, 0.05),
        "stag1": ("stagger", 600_000, 3, 2, 100, 3, 0.0),
        "stag2": ("stagger", 600_000, 3, 2, 10_000, 3, 0.0),
    }
    for name, (family, length, d, c, width, drifts, noise) in expected.items():
        recipe = PRESETS[name]
        assert recipe.family == family
        assert recipe.length == length
        assert recipe.n_features == d
        assert recipe.class_count == c
        assert recipe.drift_width == width
        assert recipe.drift_count == drifts
        assert recipe.noise == noise
    assert PRESETS["hyper1"].rotation_rate == 0.001
    assert PRESETS["hyper2"].rotation_rate == 0.01
    assert PRESETS["hyper1"].length == 500_000
    assert PRESETS["hyper1"].n_features == 15
    assert PRESETS["hyper1"].class_count == 5
    assert PRESETS["hyper1"].noise == 0.05


def test_make_stream_unknown_preset():
    with pytest.raises(ContractError):
        make_stream("nope", 1)


def test_build_stream_validation():
    with pytest.raises(ContractError):
        build_stream(StreamRecipe("hyper", 1000, 3, 2, drift_count=2), 1)
    with pytest.raises(ContractError):
        build_stream(StreamRecipe("mystery", 1000, 3, 2), 1)


def test_stream_shape_mismatch_rejected():
    rbf = RbfConcept(4, 2, make_rng(14, "stream"))
    with pytest.raises(ContractError):
        DriftingStream([SeaConcept(8.0), rbf], [(10, 0)], 100, 0.0, make_rng(1, "stream"))
    with pytest.raises(ContractError):
        DriftingStream([SeaConcept(8.0)], [(10, 0)], 100, 0.0, make_rng(1, "stream"))


# --------------------------------------------------------------- file streams


def test_read_delimited(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("# comment\n1.0,2.0,0\n3.0,4.0,1\n\n5.0,6.0,1\n")
    stream = read_delimited(str(path))
    items = list(stream)
    assert len(items) == 3
    assert stream.class_count == 2
    assert stream.n_features == 2
    assert [item.label for item in items] == [0, 1, 1]
    assert list(items[0].features) == [1.0, 2.0]
    # file streams are re-iterable
    assert len(list(stream)) == 3


def test_read_delimited_label_column_and_class_count(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("2;1.5;2.5\n0;3.5;4.5\n")
    stream = read_delimited(str(path), delimiter=";", label_column=0, class_count=4)
    items = list(stream)
    assert [item.label for item in items] == [2, 0]
    assert stream.class_count == 4
    assert list(items[0].features) == [1.5, 2.5]


def test_read_delimited_errors_name_the_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1.0,2.0,0\n1.0,oops,1\n")
    with pytest.raises(ContractError, match="line 2"):
        read_delimited(str(path))
    path.write_text("1.0,2.0,0\n1.0,1\n")
    with pytest.raises(ContractError, match="line 2"):
        read_delimited(str(path))
    path.write_text("1.0,2.0,5\n")
    with pytest.raises(ContractError):
        read_delimited(str(path), class_count=2)


def test_read_attribute_relation(tmp_path):
    path = tmp_path / "data.arff"
    path.write_text(
        "% generated\n"
        "@RELATION toy\n"
        "@ATTRIBUTE width NUMERIC\n"
        "@ATTRIBUTE color {red, green, blue}\n"
        "@ATTRIBUTE class {no, yes}\n"
        "@DATA\n"
        "1.5, green, yes\n"
        "2.5, red, no\n"
    )
    stream = read_attribute_relation(str(path))
    items = list(stream)
    assert stream.class_count == 2
    assert stream.n_features == 2
    assert list(items[0].features) == [1.5, 1.0]
    assert items[0].label == 1
    assert items[1].label == 0


def test_read_attribute_relation_errors(tmp_path):
    path = tmp_path / "bad.arff"
    path.write_text(
        "@relation toy\n@attribute a numeric\n@attribute class {x, y}\n@data\n1.0, z\n"
    )
    with pytest.raises(ContractError, match="line 5"):
        read_attribute_relation(str(path))
    path.write_text("@relation toy\n@attribute a numeric\n@attribute b numeric\n@data\n1, 2\n")
    with pytest.raises(ContractError, match="nominal"):
        read_attribute_relation(str(path))
    path.write_text("@relation toy\n@attribute a numeric\n")
    with pytest.raises(ContractError, match="@data"):
        read_attribute_relation(str(path))
