"""Criterion arithmetic on a synthetic fit (hand-frozen expectations) and the
Laplace behaviour of the quadrature free energies."""

import math

import numpy as np
import pytest

import levysel as lv
from levysel import criteria
from levysel.criteria import DriftCriterion as DC
from levysel.criteria import ScaleCriterion as SC


def synthetic_fit(gamma_gamma=2.0, nu4=0.06):
    """-2 h1 = 200, -2 h2 = 20, p_gamma = p_alpha = 1."""
    return lv.FitResult(
        scale_name="syn-scale",
        gamma_hat=np.array([3.0]),
        h1_value=-100.0,
        gamma_gamma_hat=np.array([[gamma_gamma]]),
        w_gamma_hat=np.array([[0.03]]),
        nu2_hat=1.0,
        nu4_hat=nu4,
        converged={"scale": True, "drift": True},
        boundary_hit={"scale": False, "drift": False},
        drift_name="syn-drift",
        alpha_hat=np.array([0.5]),
        h2_value=-10.0,
    )


META = lv.PathMeta(n=5000, h=0.01)  # T_n = 50


def test_scale_criteria_frozen_values():
    fit = synthetic_fit()
    expect = {
        SC.FAIC1: 202.0,
        SC.GQAIC1: 203.0,  # 200 + (2/h) tr([[2]]^-1 [[0.03]]) = 200 + 200 * 0.015
        SC.GQAIC1_SCALAR: 206.0,  # 200 + (1/0.01) * 0.06
        SC.GQAIC1_MOD: 205.0,  # 200 + (0.06/0.01 - 1)
        SC.GQBIC1: 591.2023005428146,  # 200 + 100 log 50
        SC.GQBIC1_SHARP: 208.51719319141623,  # 200 + log 5000
        SC.GQAIC1_TRUNC: 203.0,  # lambda_min = 2 clears b_n, same as GQAIC1
    }
    for kind, val in expect.items():
        assert lv.scale_criterion(fit, kind, META) == pytest.approx(val, rel=1e-12)


def test_drift_criteria_frozen_values():
    fit = synthetic_fit()
    assert lv.drift_criterion(fit, DC.GQAIC2, META) == pytest.approx(22.0)
    assert lv.drift_criterion(fit, DC.FAIC2, META) == pytest.approx(22.0)
    assert lv.drift_criterion(fit, DC.GQBIC2, META) == pytest.approx(
        23.912023005428146, rel=1e-12
    )


def test_truncation_threshold_and_flag():
    assert criteria.trunc_threshold(META) == pytest.approx(0.20912791051825463, rel=1e-12)
    with pytest.raises(ValueError):
        criteria.trunc_threshold(META, kappa=1.0)

    healthy = synthetic_fit(gamma_gamma=2.0)
    value, flags = lv.scale_criterion_detail(healthy, SC.GQAIC1_TRUNC, META)
    assert value == pytest.approx(203.0) and not flags["truncation_fired"]

    flat = synthetic_fit(gamma_gamma=0.1)  # below b_n = 50^-0.4
    value, flags = lv.scale_criterion_detail(flat, SC.GQAIC1_TRUNC, META)
    assert value == pytest.approx(200.0) and flags["truncation_fired"]


def test_string_labels_coerce_to_enums():
    fit = synthetic_fit()
    assert lv.scale_criterion(fit, "gqbic1", META) == pytest.approx(591.2023005428146)
    assert lv.drift_criterion(fit, "faic2", META) == pytest.approx(22.0)
    with pytest.raises(ValueError):
        lv.scale_criterion(fit, "gqbic2", META)  # drift label in the scale slot


def test_modified_penalty_helper():
    assert lv.modified_scale_penalty(synthetic_fit(), META) == pytest.approx(5.0)


def test_gqbic_and_faic_share_the_goodness_term():
    """Criteria differ only through their penalties, never through -2 h1."""
    fit = synthetic_fit()
    gap = lv.scale_criterion(fit, SC.GQBIC1, META) - lv.scale_criterion(fit, SC.FAIC1, META)
    assert gap == pytest.approx((1 / META.h) * math.log(META.t_n) - 2.0, rel=1e-12)


def test_singular_gamma_suggests_truncation():
    fit = synthetic_fit(gamma_gamma=0.0)
    with pytest.raises(lv.SingularMatrixError, match="gqaic1_trunc"):
        lv.scale_criterion(fit, SC.GQAIC1, META)


def test_drift_criterion_requires_drift_stage(path_gaussian_short):
    fit = lv.scale_stage(path_gaussian_short, lv.registry("Scale2"))
    with pytest.raises(lv.UsageError):
        lv.drift_criterion(fit, DC.GQAIC2, META)


def test_free_energy_rejects_three_parameters(path_gaussian_short):
    with pytest.raises(lv.UsageError):
        lv.free_energy_scale(path_gaussian_short, lv.registry("Scale4"), b=1.0)
    model = lv.CandidateModel("m", lv.registry("Scale2"), lv.registry("Drift3"))
    # Drift3 has 2 parameters so this must be fine; Scale4 above has 3.
    lv.free_energy_drift(path_gaussian_short, model, np.array([3.0]))


def test_free_energy_rejects_nonpositive_temperature(path_gaussian_short):
    with pytest.raises(ValueError):
        lv.free_energy_scale(path_gaussian_short, lv.registry("Scale2"), b=0.0)


def test_free_energy_tight_box_collapses_to_plugin(path_gaussian_short):
    """Integrating a uniform prior over a sliver around gamma_hat returns the
    plug-in value -h1(gamma_hat)/n up to the sliver's width effects."""
    path = path_gaussian_short
    scale = lv.registry("Scale2")
    fit = lv.fit_scale(path, scale)
    g = fit.theta[0]
    eps = 1e-7
    box = np.array([[g - eps, g + eps]])
    fe = lv.free_energy_scale(path, scale, b=1.0, box=box, center=fit.theta)
    assert fe == pytest.approx(-fit.value / path.n, rel=1e-9)


def test_free_energy_node_count_stability(path_gaussian_short):
    path = path_gaussian_short
    scale = lv.registry("Scale2")
    a = lv.free_energy_scale(path, scale, b=1.0, nodes=64)
    b = lv.free_energy_scale(path, scale, b=1.0, nodes=128)
    assert a == pytest.approx(b, abs=1e-8)


def test_free_energy_expansions_track_penalties():
    """On a longer path both free energies approach plug-in + half-log penalty."""
    path = lv.euler_path(lv.TRUE_MODEL, lv.case_noise("gaussian"), 2000, 0.01, lv.RngStream(41, 0))
    scale = lv.registry("Scale2")
    model = lv.CandidateModel("m", scale, lv.registry("Drift2"))
    sfit = lv.fit_scale(path, scale)
    t_n = path.t_n

    fe1 = lv.free_energy_scale(path, scale, b=path.h)
    target1 = -sfit.value / path.n + (1 / (2 * t_n)) * math.log(t_n)
    assert t_n * abs(fe1 - target1) < 5.0

    dfit = lv.fit_drift(path, model, sfit.theta)
    fe2 = lv.free_energy_drift(path, model, sfit.theta)
    target2 = -dfit.value / t_n + (1 / (2 * t_n)) * math.log(t_n)
    assert t_n * abs(fe2 - target2) < 5.0
