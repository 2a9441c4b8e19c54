"""Two-stage estimator against closed forms, plug-in matrix identities, and
the normal confidence intervals."""

import math

import numpy as np
import pytest
from scipy import stats

import levysel as lv


def _gaussian_walk(rng, n=400, h=0.01, sd=0.3, offset=1.0):
    return lv.SamplePath(h=h, values=np.cumsum(rng.normal(scale=sd, size=n + 1)) + offset)


def test_scale1_closed_form():
    """Constant scale has the explicit maximizer sqrt(mean(dx^2)/h)."""
    rng = np.random.default_rng(31)
    s1 = lv.registry("Scale1")
    for _ in range(20):
        path = _gaussian_walk(rng, n=int(rng.integers(50, 400)))
        dx = path.increments()
        expect = math.sqrt(float(np.mean(dx * dx)) / path.h)
        fit = lv.fit_scale(path, s1)
        assert fit.theta[0] == pytest.approx(expect, rel=1e-6)
        assert fit.converged


def test_drift2_closed_form(path_case_i_short):
    """Linear drift given gamma_hat solves a one-dimensional normal equation."""
    path = path_case_i_short
    model = lv.CandidateModel("Scale2*Drift2", lv.registry("Scale2"), lv.registry("Drift2"))
    gamma_hat = lv.fit_scale(path, model.scale).theta
    df = lv.fit_drift(path, model, gamma_hat)
    x = path.state_values()
    s = lv.scale_squares(path, model.scale, gamma_hat)
    dx = path.increments()
    expect = -np.sum(x * dx / s) / (path.h * np.sum(x * x / s))
    assert df.theta[0] == pytest.approx(expect, rel=1e-6)


def test_scale1_information_matrix_exact():
    """For S = gamma^2 the normalized curvature is 2/gamma^2 on any path."""
    rng = np.random.default_rng(32)
    path = _gaussian_walk(rng)
    fit = lv.scale_stage(path, lv.registry("Scale1"))
    assert fit.gamma_gamma_hat.shape == (1, 1)
    assert fit.gamma_gamma_hat[0, 0] == pytest.approx(2.0 / fit.gamma_hat[0] ** 2, rel=1e-10)


def test_nu_hats_match_brute_force():
    rng = np.random.default_rng(33)
    path = _gaussian_walk(rng, n=80)
    scale = lv.registry("Scale2")
    gamma = np.array([2.0])
    nu2, nu4 = lv.nu_hats(path, scale, gamma, 1e-10)
    s = lv.scale_squares(path, scale, gamma)
    dx = path.increments()
    q = dx * dx / s
    assert nu2 == pytest.approx(float(q.sum()) / path.t_n, rel=1e-12)
    assert nu4 == pytest.approx(float((q * q).sum()) / path.t_n, rel=1e-12)


def test_boundary_flag_on_degenerate_path():
    """A constant path drives the scale to the lower box edge."""
    path = lv.SamplePath(h=0.01, values=np.full(101, 4.0))
    fit = lv.fit_scale(path, lv.registry("Scale1"))
    assert fit.boundary_hit
    assert fit.theta[0] == pytest.approx(lv.registry("Scale1").box[0, 0])


def test_fit_is_deterministic(path_case_i_short):
    model = lv.CandidateModel("m", lv.registry("Scale3"), lv.registry("Drift3"))
    a = lv.fit_model(path_case_i_short, model)
    b = lv.fit_model(path_case_i_short, model)
    assert np.array_equal(a.gamma_hat, b.gamma_hat)
    assert np.array_equal(a.alpha_hat, b.alpha_hat)
    assert a.h1_value == b.h1_value and a.h2_value == b.h2_value


def test_confidence_interval_uses_normal_quantile(path_case_i_short):
    path = path_case_i_short
    model = lv.CandidateModel("m", lv.registry("Scale2"), lv.registry("Drift2"))
    fit = lv.fit_model(path, model)
    ci = lv.confidence_interval(fit, path.meta, level=0.95)
    theta = np.concatenate([fit.alpha_hat, fit.gamma_hat])
    half = 0.5 * (ci.upper - ci.lower)
    implied = half / np.sqrt(np.diag(fit.v_hat) / path.t_n)
    assert np.allclose(implied, 1.959964, atol=1e-6)
    assert np.allclose(0.5 * (ci.upper + ci.lower), theta, rtol=1e-12)
    assert not ci.degenerate.any()

    wide = lv.confidence_interval(fit, path.meta, level=0.99)
    assert (wide.upper - wide.lower > ci.upper - ci.lower).all()
    z99 = float(stats.norm.ppf(0.995))
    z95 = float(stats.norm.ppf(0.975))
    assert 0.5 * (wide.upper - wide.lower)[0] == pytest.approx(half[0] * z99 / z95, rel=1e-9)


def test_confidence_interval_requires_full_fit(path_case_i_short):
    fit = lv.scale_stage(path_case_i_short, lv.registry("Scale2"))
    with pytest.raises(lv.NumericalError):
        lv.confidence_interval(fit, path_case_i_short.meta)


def test_confidence_interval_rejects_bad_level(path_case_i_short):
    model = lv.CandidateModel("m", lv.registry("Scale2"), lv.registry("Drift2"))
    fit = lv.fit_model(path_case_i_short, model)
    with pytest.raises(ValueError):
        lv.confidence_interval(fit, path_case_i_short.meta, level=1.0)


def test_scale_noise_variance_identity():
    """W_gamma tracks ((nu4_hat + 3h)/2) Gamma_gamma once jumps and the
    Gaussian bridge term are both in play; 15% slack at n=10^4."""
    path = lv.euler_path(
        lv.TRUE_MODEL, lv.case_noise("i"), 10_000, 0.01, lv.RngStream(34, 0)
    )
    fit = lv.scale_stage(path, lv.registry("Scale2"))
    ratio = 2.0 * fit.w_gamma_hat[0, 0] / fit.gamma_gamma_hat[0, 0]
    assert ratio == pytest.approx(fit.nu4_hat, rel=0.15)
    assert fit.nu2_hat == pytest.approx(1.0, rel=0.10)
    assert fit.nu4_hat == pytest.approx(0.03 + 3 * path.h, rel=0.35)


def test_two_stage_recovers_truth_gaussian():
    """40 short Wiener-driven replications: averaged estimates sit near
    (gamma, alpha) = (3, 0.5) and every stage converges."""
    model = lv.CandidateModel("m", lv.registry("Scale2"), lv.registry("Drift2"))
    noise = lv.case_noise("gaussian")
    gammas, alphas = [], []
    for r in range(40):
        path = lv.euler_path(lv.TRUE_MODEL, noise, 2000, 0.01, lv.replication_stream(35, r))
        fit = lv.fit_model(path, model)
        assert fit.converged["scale"] and fit.converged["drift"]
        gammas.append(fit.gamma_hat[0])
        alphas.append(fit.alpha_hat[0])
    assert np.mean(gammas) == pytest.approx(3.0, abs=0.1)
    assert np.mean(alphas) == pytest.approx(0.5, abs=0.3)
    assert np.std(gammas) < 0.3


def test_singular_information_raises():
    """A path pinned at one state gives a rank-one two-parameter scale block."""
    values = np.r_[np.full(60, 1.0), 2.0]
    path = lv.SamplePath(h=0.01, values=values)
    model = lv.CandidateModel("m", lv.registry("Scale3"), lv.registry("Drift2"))
    with pytest.raises(lv.SingularMatrixError, match="singular"):
        lv.empirical_matrices(path, model, np.array([2.0, 1.0]), np.array([0.5]))
