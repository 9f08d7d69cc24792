import numpy as np
import pytest

from driftlearn.core import (
    ContractError,
    Instance,
    LabeledInstance,
    argmax_label,
    draw_uniform,
    make_instance,
    make_rng,
    normalize_scores,
)


def test_make_instance_accepts_sequences():
    inst = make_instance([1.0, 2.5, -3.0], arrival_index=7)
    assert inst.features.dtype == np.float64
    assert inst.arrival_index == 7
    assert list(inst.features) == [1.0, 2.5, -3.0]


def test_make_instance_rejects_bad_shapes_and_values():
    with pytest.raises(ContractError):
        make_instance([[1.0, 2.0]])
    with pytest.raises(ContractError):
        make_instance([1.0, float("nan")])
    with pytest.raises(ContractError):
        make_instance([float("inf")])


def test_labeled_instance_exposes_features():
    labeled = LabeledInstance(make_instance([0.5, 0.5]), 1)
    assert labeled.label == 1
    assert list(labeled.features) == [0.5, 0.5]


def test_argmax_ties_resolve_to_smallest_index():
    assert argmax_label(np.array([0.2, 0.5, 0.3])) == 1
    assert argmax_label(np.array([0.4, 0.4, 0.2])) == 0
    assert argmax_label(np.array([1.0])) == 0
    with pytest.raises(ContractError):
        argmax_label(np.array([]))


def test_normalize_scores():
    out = normalize_scores(np.array([1.0, 3.0]))
    assert np.allclose(out, [0.25, 0.75])
    uniform = normalize_scores(np.zeros(4))
    assert np.allclose(uniform, 0.25)


def test_make_rng_is_deterministic_per_component():
    a = make_rng(42, "stream").random(5)
    b = make_rng(42, "stream").random(5)
    assert np.array_equal(a, b)


def test_make_rng_components_are_distinct():
    draws = {name: make_rng(42, name).random() for name in
             ("stream", "query", "replay", "learner", "evaluation", "shadow")}
    assert len(set(draws.values())) == len(draws)


def test_make_rng_rejects_unknown_component():
    with pytest.raises(ContractError):
        make_rng(1, "nope")


def test_draw_uniform_stays_in_open_interval():
    rng = make_rng(3, "query")
    draws = [draw_uniform(rng) for _ in range(10_000)]
    assert all(0.0 < u < 1.0 for u in draws)
    # uniform moments
    assert abs(np.mean(draws) - 0.5) < 0.02


def test_draw_uniform_mean_large_sample():
    rng = make_rng(11, "replay")
    mean = np.mean([draw_uniform(rng) for _ in range(1_000_000)])
    assert abs(mean - 0.5) < 0.01
