"""Weighted log-concave maximum likelihood: closed-form oracles, an
independent reference maximizer, invariances, consistency, and the
serialization round trips."""

from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.stats as st

from logconmix.errors import DegenerateSampleError
from logconmix.logcon import (FitOptions, WeightedSample, cdf,
                              eval_log_density, fit_from_dict, fit_to_dict,
                              fit_weighted_logconcave, load_fit_json,
                              load_weighted_csv, objective, save_fit_json)

from conftest import (independent_integral, independent_objective,
                      random_small_sample, reference_concave_mle)

# Two points {0, 1} with weights (0.3, 0.7): the maximizer is the exponential
# tilt c * e^(beta x) on [0, 1] whose mean matches the weighted mean 0.7.
# beta solves 1/(1 - e^-beta) - 1/beta = 0.7 (mpmath findroot, dps=40).
TILT_BETA = 2.6721038552733855446
TILT_PHI = (-1.617627135687183905, 1.0544767195862016397)
TILT_OBJECTIVE = 0.25284556300418597627


def test_two_points_equal_weights_give_uniform_density():
    for x1, x2 in [(0.0, 1.0), (-2.0, 3.0), (1.25, 1.375)]:
        sample = WeightedSample(np.array([x1, x2]), np.array([0.5, 0.5]))
        fit = fit_weighted_logconcave(sample)
        span = x2 - x1
        assert fit.converged
        np.testing.assert_allclose(fit.phi, -math.log(span), atol=1e-10)
        assert fit.objective == pytest.approx(-math.log(span), abs=1e-10)


def test_two_points_unequal_weights_match_tilt_oracle():
    sample = WeightedSample(np.array([0.0, 1.0]), np.array([0.3, 0.7]))
    fit = fit_weighted_logconcave(sample)
    assert fit.converged
    np.testing.assert_allclose(fit.knots, [0.0, 1.0], atol=0)
    np.testing.assert_allclose(fit.phi, TILT_PHI, atol=1e-8)
    assert fit.objective == pytest.approx(TILT_OBJECTIVE, abs=1e-10)
    # independent restatement: the fitted slope is the tilt rate and the
    # fitted density has mean exactly 0.7 (first-moment stationarity)
    slope = (fit.phi[1] - fit.phi[0]) / (fit.knots[1] - fit.knots[0])
    assert slope == pytest.approx(TILT_BETA, abs=1e-7)
    mean = 1.0 / (1.0 - math.exp(-slope)) - 1.0 / slope
    assert mean == pytest.approx(0.7, abs=1e-9)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_small_samples_match_reference_maximizer(m, rng):
    for _ in range(8):
        pts, w = random_small_sample(rng, m)
        fit = fit_weighted_logconcave(WeightedSample(pts, w))
        ref_phi, ref_obj = reference_concave_mle(pts, w)
        # the reference maximizer is generic; agreement to 1e-6 on the
        # objective pins both implementations to the same optimum
        assert fit.objective == pytest.approx(ref_obj, abs=1e-6)
        phi_at_points = eval_log_density(fit, pts)
        assert independent_objective(pts, w, phi_at_points) >= ref_obj - 1e-6


def test_fitted_density_is_normalized(rng):
    for n in (5, 25, 120):
        pts = np.sort(rng.normal(0.0, 1.5, n))
        w = rng.uniform(0.2, 1.0, n)
        sample = WeightedSample(pts, w / w.sum())
        fit = fit_weighted_logconcave(sample)
        assert abs(independent_integral(fit.knots, fit.phi) - 1.0) <= 1e-8


def test_fitted_phi_is_concave(rng):
    for n in (6, 40, 150):
        pts = np.sort(rng.standard_t(4, n) + rng.uniform(-1, 1))
        sample = WeightedSample.from_observations(pts)
        fit = fit_weighted_logconcave(sample)
        slopes = np.diff(fit.phi) / np.diff(fit.knots)
        assert np.all(np.diff(slopes) <= 1e-9)


def test_objective_function_matches_independent_form(rng):
    pts, w = random_small_sample(rng, 9)
    sample = WeightedSample(pts, w)
    fit = fit_weighted_logconcave(sample)
    got = objective(sample, fit.knots, fit.phi)
    # the public objective evaluates knots that are a subset of the points
    assert got == pytest.approx(fit.objective, abs=1e-12)


def test_affine_equivariance(rng):
    pts = np.sort(rng.normal(2.0, 1.0, 40))
    w = rng.uniform(0.5, 1.5, 40)
    w /= w.sum()
    base = fit_weighted_logconcave(WeightedSample(pts, w))
    for a, b in [(2.0, -3.0), (0.25, 1.0), (7.5, 0.0)]:
        moved = fit_weighted_logconcave(WeightedSample(a * pts + b, w))
        np.testing.assert_allclose(moved.knots, a * base.knots + b,
                                   rtol=1e-9, atol=1e-9)
        np.testing.assert_allclose(moved.phi, base.phi - math.log(a),
                                   atol=1e-6)


def test_permutation_invariance_via_from_observations(rng):
    pts = rng.normal(0.0, 1.0, 30)
    w = rng.uniform(0.5, 1.5, 30)
    perm = rng.permutation(30)
    f1 = fit_weighted_logconcave(WeightedSample.from_observations(pts, w))
    f2 = fit_weighted_logconcave(
        WeightedSample.from_observations(pts[perm], w[perm]))
    np.testing.assert_allclose(f1.knots, f2.knots, atol=1e-12)
    np.testing.assert_allclose(f1.phi, f2.phi, atol=1e-10)


def test_duplicate_points_merge_weights():
    merged = fit_weighted_logconcave(
        WeightedSample.from_observations(np.array([0.0, 0.0, 1.0])))
    explicit = fit_weighted_logconcave(
        WeightedSample(np.array([0.0, 1.0]), np.array([2.0 / 3.0, 1.0 / 3.0])))
    np.testing.assert_allclose(merged.knots, explicit.knots, atol=0)
    np.testing.assert_allclose(merged.phi, explicit.phi, atol=1e-9)


def test_from_observations_normalizes_weights():
    s = WeightedSample.from_observations(np.array([0.0, 1.0]),
                                         np.array([2.0, 2.0]))
    np.testing.assert_allclose(s.weights, [0.5, 0.5], atol=0)
    s2 = WeightedSample.from_observations(np.array([3.0, 1.0, 2.0]))
    np.testing.assert_allclose(s2.points, [1.0, 2.0, 3.0], atol=0)
    np.testing.assert_allclose(s2.weights, 1.0 / 3.0, atol=1e-15)


def test_consistency_on_gaussian_sample():
    # with n = 2000 equal-weight draws the fitted CDF tracks the truth
    draws = st.norm(0.0, 1.0).rvs(size=2000, random_state=7)
    fit = fit_weighted_logconcave(WeightedSample.from_observations(draws))
    xs = np.linspace(-2.5, 2.5, 41)
    gap = np.max(np.abs(cdf(fit, xs) - st.norm(0.0, 1.0).cdf(xs)))
    assert gap <= 0.1


def test_cdf_properties():
    fit = fit_weighted_logconcave(
        WeightedSample(np.array([0.0, 1.0]), np.array([0.5, 0.5])))
    xs = np.array([-1.0, 0.0, 0.25, 0.5, 1.0, 2.0])
    vals = cdf(fit, xs)
    np.testing.assert_allclose(vals, [0.0, 0.0, 0.25, 0.5, 1.0, 1.0],
                               atol=1e-9)
    assert np.all(np.diff(vals) >= -1e-12)


def test_eval_log_density_interpolates_and_vanishes_outside():
    fit = fit_weighted_logconcave(
        WeightedSample(np.array([0.0, 2.0]), np.array([0.5, 0.5])))
    inside = eval_log_density(fit, np.array([0.0, 1.0, 2.0]))
    np.testing.assert_allclose(inside, -math.log(2.0), atol=1e-9)
    outside = eval_log_density(fit, np.array([-0.1, 2.1]))
    assert np.all(outside == -np.inf)


def test_warm_start_returns_same_optimum(rng):
    pts = np.sort(rng.normal(0, 1, 60))
    sample = WeightedSample.from_observations(pts)
    cold = fit_weighted_logconcave(sample)
    warm = fit_weighted_logconcave(sample, init=cold)
    assert warm.converged
    np.testing.assert_allclose(warm.phi, cold.phi, atol=1e-8)
    np.testing.assert_allclose(warm.knots, cold.knots, atol=1e-12)


def test_iteration_cap_reports_non_convergence(rng):
    pts = np.sort(rng.normal(0, 1, 200))
    sample = WeightedSample.from_observations(pts)
    fit = fit_weighted_logconcave(sample, FitOptions(max_outer_iters=1))
    assert not fit.converged
    assert fit.kkt_residual > 1e-8


def test_kkt_residual_small_at_reported_optimum(rng):
    pts = np.sort(rng.normal(0, 2, 80))
    fit = fit_weighted_logconcave(WeightedSample.from_observations(pts))
    assert fit.converged
    assert fit.kkt_residual <= 1e-8


def test_weighted_sample_validation():
    with pytest.raises(ValueError):
        WeightedSample(np.array([0.0, 1.0]), np.array([0.5, -0.5]))
    with pytest.raises(ValueError):
        WeightedSample(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        WeightedSample(np.array([0.0, 1.0]), np.array([0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        WeightedSample(np.array([0.0, 1.0]), np.array([0.7, 0.7]))  # sum != 1
    with pytest.raises(DegenerateSampleError):
        fit_weighted_logconcave(
            WeightedSample.from_observations(np.array([1.0])))
    with pytest.raises(DegenerateSampleError):
        fit_weighted_logconcave(
            WeightedSample.from_observations(np.array([2.0, 2.0, 2.0])))


def test_fit_options_validation():
    with pytest.raises(ValueError):
        FitOptions(tol_kkt=0.0)
    with pytest.raises(ValueError):
        FitOptions(max_outer_iters=0)
    with pytest.raises(ValueError):
        FitOptions(armijo_c=1.5)


def test_dict_round_trip(rng):
    pts, w = random_small_sample(rng, 6)
    fit = fit_weighted_logconcave(WeightedSample(pts, w))
    doc = fit_to_dict(fit)
    back = fit_from_dict(doc)
    np.testing.assert_array_equal(back.knots, fit.knots)
    np.testing.assert_array_equal(back.phi, fit.phi)
    assert back.objective == fit.objective
    assert back.converged == fit.converged


def test_json_file_round_trip(tmp_path, rng):
    pts, w = random_small_sample(rng, 5)
    fit = fit_weighted_logconcave(WeightedSample(pts, w))
    path = tmp_path / "fit.json"
    save_fit_json(fit, str(path))
    back = load_fit_json(str(path))
    np.testing.assert_array_equal(back.knots, fit.knots)
    np.testing.assert_array_equal(back.phi, fit.phi)


def test_load_weighted_csv(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("x,weight\n0.0,0.25\n1.0,0.75\n", encoding="utf-8")
    sample = load_weighted_csv(str(path))
    np.testing.assert_allclose(sample.points, [0.0, 1.0], atol=0)
    np.testing.assert_allclose(sample.weights, [0.25, 0.75], atol=0)


def test_support_property():
    fit = fit_weighted_logconcave(
        WeightedSample(np.array([-1.0, 0.5, 2.0]),
                       np.array([0.25, 0.5, 0.25])))
    assert fit.support == (-1.0, 2.0)
