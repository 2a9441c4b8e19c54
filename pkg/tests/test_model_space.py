"""Candidate registry: shapes, boxes, gradients, evaluation."""

import numpy as np
import pytest

import levysel as lv
from levysel.models import grad_or_fd


def test_registry_contents():
    assert lv.available_candidates() == [
        "Drift1",
        "Drift2",
        "Drift3",
        "Scale1",
        "Scale2",
        "Scale3",
        "Scale4",
    ]
    assert lv.registry("Scale3").dim == 2
    assert lv.registry("Scale4").dim == 3
    assert lv.registry("Drift3").dim == 2


def test_unknown_candidate_lists_available():
    with pytest.raises(lv.UsageError, match="Scale1"):
        lv.registry("Scale9")


def test_resolve_candidates_mixes_names_and_objects():
    s2 = lv.registry("Scale2")
    out = lv.resolve_candidates([s2, "Drift1"])
    assert out[0] is s2
    assert out[1].name == "Drift1"


def test_candidate_evaluations_at_known_points():
    x = np.array([0.0, 1.0, 2.0])
    assert np.allclose(lv.registry("Scale1")(x, [3.0]), [3.0, 3.0, 3.0])
    assert np.allclose(lv.registry("Scale2")(x, [3.0]), [3.0, 1.5, 0.6])
    assert np.allclose(lv.registry("Scale3")(x, [3.0, 1.0]), [3.0, 2.0, 1.4])
    assert np.allclose(lv.registry("Scale4")(x, [3.0, 1.0, 2.0]), [3.0, 3.0, 2.6])
    assert np.allclose(lv.registry("Drift1")(x, [0.7]), [-0.7, -0.7, -0.7])
    assert np.allclose(lv.registry("Drift2")(x, [0.5]), [0.0, -0.5, -1.0])
    assert np.allclose(lv.registry("Drift3")(x, [0.5, 0.2]), [-0.2, -0.7, -1.2])


def test_true_model_sits_inside_candidate_family():
    """Scale2 at gamma=3 and Drift2 at alpha=1/2 are the generating model."""
    x = np.linspace(-3, 3, 41)
    assert np.allclose(lv.registry("Scale2")(x, [lv.TRUE_GAMMA]), 3.0 / (1.0 + x * x))
    assert np.allclose(lv.registry("Drift2")(x, [lv.TRUE_ALPHA]), -0.5 * x)
    assert np.allclose([lv.TRUE_MODEL.scale(v) for v in x], 3.0 / (1.0 + x * x))
    assert np.allclose([lv.TRUE_MODEL.drift(v) for v in x], -0.5 * x)


def test_larger_families_reproduce_true_scale():
    """Scale3 and Scale4 contain the true scale on their parameter boxes."""
    x = np.linspace(-3, 3, 41)
    truth = 3.0 / (1.0 + x * x)
    assert np.allclose(lv.registry("Scale3")(x, [3.0, 0.0]), truth)
    assert np.allclose(lv.registry("Scale4")(x, [3.0, 0.0, 0.0]), truth)
    assert np.allclose(lv.registry("Drift3")(x, [0.5, 0.0]), -0.5 * x)


def test_true_parameters_interior_to_boxes():
    for name, theta in [
        ("Scale2", [3.0]),
        ("Scale3", [3.0, 0.0]),
        ("Scale4", [3.0, 0.0, 0.0]),
        ("Drift2", [0.5]),
        ("Drift3", [0.5, 0.0]),
    ]:
        coef = lv.registry(name)
        assert coef.contains(theta)
        assert not coef.boundary_hit(theta)


def test_box_clip_and_boundary_detection():
    s1 = lv.registry("Scale1")
    assert np.allclose(s1.clip([25.0]), [20.0])
    assert np.allclose(s1.clip([-3.0]), [0.01])
    assert s1.boundary_hit([20.0])
    assert s1.boundary_hit([0.0100001])
    assert not s1.boundary_hit([10.0])


def test_analytic_gradients_match_finite_differences():
    rng = np.random.default_rng(2024)
    x = rng.normal(size=25)
    for name in lv.available_candidates():
        coef = lv.registry(name)
        theta = np.empty(coef.dim)
        theta[0] = rng.uniform(1.0, 4.0)
        if coef.dim > 1:
            theta[1:] = rng.uniform(-1.0, 1.0, size=coef.dim - 1)
        analytic = grad_or_fd(coef, x, theta)
        stripped = lv.Coefficient(coef.name, coef.dim, coef.box, coef.eval_fn, None)
        fd = grad_or_fd(stripped, x, theta)
        assert analytic.shape == (coef.dim, x.size)
        assert np.allclose(analytic, fd, rtol=1e-6, atol=1e-8), name


def test_coefficient_rejects_bad_boxes():
    with pytest.raises(ValueError):
        lv.Coefficient("bad", 1, np.array([[1.0, 1.0]]), lambda x, t: x)
    with pytest.raises(ValueError):
        lv.Coefficient("bad", 2, np.array([[0.0, 1.0]]), lambda x, t: x)
    with pytest.raises(ValueError):
        lv.Coefficient("bad", 0, np.zeros((0, 2)), lambda x, t: x)


def test_scale_positive_on_positive_leading_box():
    """With the leading coordinate at its positive floor and x moderate, every
    scale family stays positive somewhere around the origin."""
    x = np.linspace(-0.5, 0.5, 11)
    for name in ("Scale1", "Scale2", "Scale3", "Scale4"):
        coef = lv.registry(name)
        theta = np.full(coef.dim, 0.0)
        theta[0] = 0.5
        assert (coef(x, theta) > 0).all(), name


def test_coefficients_pickle():
    import pickle

    for name in lv.available_candidates():
        coef = lv.registry(name)
        again = pickle.loads(pickle.dumps(coef))
        x = np.array([0.3, -1.2])
        theta = np.full(coef.dim, 0.8)
        assert np.allclose(again(x, theta), coef(x, theta))
