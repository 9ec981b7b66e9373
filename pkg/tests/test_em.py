"""EM for the two-component mixture with a known null component: hand-checked
E/M steps, monotone likelihood traces, fixed-point structure, degenerate
exits, and the posterior/summary helpers."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from logconmix.em import (EmConfig, classification_error, e_step,
                          em_result_to_dict, estimate_mu, m_step_f, m_step_p,
                          posterior_unknown, run_em)
from logconmix.errors import ComponentCollapsedError, ZeroMixtureDensityError
from logconmix.families import (Normal, ShiftedExponential, Uniform,
                                log_pdf_known, sample_known, sample_mixture)


def test_e_step_hand_value():
    # omega = (1-p) f0 / ((1-p) f0 + p f); with p = 0.4, f0 = 2, f = 0.25:
    # omega = 1.2 / (1.2 + 0.1) = 12/13
    om = e_step(0.4, np.array([2.0]), np.array([0.25]))
    assert om[0] == pytest.approx(12.0 / 13.0, rel=1e-15)


def test_e_step_vector_and_zero_null_component():
    om = e_step(0.5, np.array([1.0, 0.0, 2.0]), np.array([1.0, 3.0, 0.0]))
    # f0 = 0 with f > 0 pins the point to the unknown component
    np.testing.assert_allclose(om, [0.5, 0.0, 1.0], atol=1e-15)


def test_e_step_rejects_jointly_vanishing_densities():
    with pytest.raises(ZeroMixtureDensityError, match="1"):
        e_step(0.5, np.array([1.0, 0.0]), np.array([1.0, 0.0]))


def test_m_step_p_is_mean_unknown_mass():
    assert m_step_p(np.array([1.0, 0.5, 0.0, 0.9])) == pytest.approx(
        (0.0 + 0.5 + 1.0 + 0.1) / 4.0, rel=1e-15)


def test_m_step_f_fits_reweighted_sample():
    pts = np.array([0.0, 1.0, 2.0])
    omega = np.array([0.5, 0.5, 0.5])   # equal unknown mass everywhere
    fit = m_step_f(pts, omega)
    from conftest import independent_integral
    assert abs(independent_integral(fit.knots, fit.phi) - 1.0) <= 1e-8
    slopes = np.diff(fit.phi) / np.diff(fit.knots)
    assert np.all(np.diff(slopes) <= 1e-9)


def test_m_step_f_raises_when_unknown_mass_collapses():
    pts = np.array([0.0, 1.0, 2.0])
    omega = np.ones(3) - 1e-9
    with pytest.raises(ComponentCollapsedError):
        m_step_f(pts, omega)


def test_run_em_mixture_recovery_and_invariants():
    f0 = Normal(0.0, 2.0)
    values, labels = sample_mixture(f0, ShiftedExponential(1.0, 2.0),
                                    0.4, 500, 17)
    result = run_em(values, f0)
    assert result.converged
    assert result.degenerate is None
    # the trace the result carries is nondecreasing
    trace = np.asarray(result.loglik_trace)
    assert trace.size >= 2
    assert np.all(np.diff(trace) >= -1e-8)
    # fixed-point structure: p_hat is exactly the mean unknown mass
    assert result.p_hat == pytest.approx(float(np.mean(1.0 - result.omega)),
                                         abs=1e-12)
    assert 0.2 <= result.p_hat <= 0.6
    assert np.all((result.omega >= 0.0) & (result.omega <= 1.0))
    # identifiability report rides along (Normal f0 with a compact fit)
    assert result.identifiability.verdict == "ConditionHolds"
    # membership score against the truth is small for this easy mixture
    assert classification_error(result.omega, labels) <= 0.2


def test_run_em_posterior_complements_omega():
    f0 = Normal(0.0, 2.0)
    values, _ = sample_mixture(f0, ShiftedExponential(1.0, 2.0), 0.4, 300, 3)
    result = run_em(values, f0)
    post = posterior_unknown(result, values, f0)
    np.testing.assert_allclose(post, 1.0 - result.omega, atol=1e-10)
    scalar = posterior_unknown(result, float(values[0]), f0)
    assert scalar == pytest.approx(post[0], abs=1e-12)


def test_run_em_flat_init_still_monotone():
    f0 = Normal(0.0, 2.0)
    values, _ = sample_mixture(f0, Normal(3.0, 1.0), 0.5, 300, 11)
    result = run_em(values, f0, EmConfig(init="flat"))
    trace = np.asarray(result.loglik_trace)
    assert np.all(np.diff(trace) >= -1e-8)
    assert result.p_hat == pytest.approx(float(np.mean(1.0 - result.omega)),
                                         abs=1e-12)


def test_run_em_all_known_exit():
    # a vanishing initial unknown mass collapses immediately: everything is
    # attributed to f0 and the result is flagged
    x = sample_known(Normal(0.0, 2.0), 200, 1)
    result = run_em(x, Normal(0.0, 2.0), EmConfig(init="flat", p_init=1e-7))
    assert result.degenerate == "AllKnown"
    assert result.p_hat == 0.0
    assert np.all(result.omega == 1.0)
    assert len(result.loglik_trace) == 1


def test_run_em_all_unknown_exit():
    # data far outside f0's effective range pushes all mass to the unknown
    # component
    rng = np.random.default_rng(3)
    far = rng.normal(50.0, 1.0, 300)
    result = run_em(far, Normal(0.0, 1.0))
    assert result.degenerate == "AllUnknown"
    assert result.p_hat == pytest.approx(1.0, abs=1e-9)


def test_estimate_mu_hand_value():
    # weights (1 - omega) / sum(1 - omega) = (0.5, 0.8)/1.3 on points (1, 2):
    # mu = (0.5 * 1 + 0.8 * 2) / 1.3 = 21/13
    got = estimate_mu(np.array([1.0, 2.0]), np.array([0.5, 0.2]))
    assert got == pytest.approx(21.0 / 13.0, rel=1e-15)


def test_classification_error_is_mean_squared_gap():
    assert classification_error(np.array([1.0, 0.0]),
                                np.array([1.0, 0.0])) == 0.0
    assert classification_error(np.array([0.5, 0.5]),
                                np.array([1.0, 0.0])) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        classification_error(np.array([0.5]), np.array([1.0, 0.0]))


def test_em_result_serializes_to_json():
    f0 = Uniform(0.0, 1.0)
    rng = np.random.default_rng(9)
    values = rng.uniform(0.0, 1.0, 150) ** 2   # skewed toward 0
    result = run_em(values, f0)
    doc = em_result_to_dict(result)
    text = json.dumps(doc)   # must not choke on numpy scalars
    assert set(doc) >= {"p_hat", "omega", "fit", "loglik_trace",
                        "iterations", "converged", "degenerate",
                        "identifiability"}
    back = json.loads(text)
    assert back["p_hat"] == pytest.approx(result.p_hat, rel=1e-15)
    assert back["identifiability"]["verdict"] == result.identifiability.verdict


def test_em_config_validation():
    with pytest.raises(ValueError):
        EmConfig(p_init=0.0)
    with pytest.raises(ValueError):
        EmConfig(p_init=1.0)
    with pytest.raises(ValueError):
        EmConfig(max_iters=0)
    with pytest.raises(ValueError):
        EmConfig(tol_loglik=-1e-9)
    with pytest.raises(ValueError):
        EmConfig(init="random")


def test_run_em_rejects_empty_and_degenerate_input():
    with pytest.raises(Exception):
        run_em(np.array([]), Normal(0.0, 1.0))
    with pytest.raises(Exception):
        run_em(np.array([1.0]), Normal(0.0, 1.0))
