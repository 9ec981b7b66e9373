"""EM estimation of the two-component mixture (1-p) f0 + p f.

f0 is a fully known density; f is estimated nonparametrically under the
log-concavity constraint. The E-step computes posterior membership
probabilities for the known component,

    omega_i = (1-p) f0(x_i) / ((1-p) f0(x_i) + p f(x_i)),

the M-step updates p to the mean posterior mass of the unknown component
and refits f by a weighted log-concave MLE with weights proportional to
1 - omega. Each cycle cannot decrease the observed-data log-likelihood;
iteration stops when the likelihood gain falls below a relative tolerance.

Initialization matters more here than in textbook EM: the empirical
likelihood typically has a spurious maximum at the boundary p = 1, where a
single log-concave density imitates the whole mixture, and seeding f with
a fit of the pooled sample lands in that basin. The default
``init='pilot'`` therefore seeds the responsibilities from a density-ratio
pilot,

    omega0_i = min(1, r * f0(x_i) / h(x_i)),

with h a Gaussian kernel estimate of the mixture density (Silverman's
bandwidth) and r a proxy for 1 - p — the construction used for local
false-discovery rates. Pilot values above 0.9 are rounded up to 1 so that
clearly-null points contribute nothing to the initial f. The EM pass runs
twice: first with r = 1 (maximal separation), then re-seeded with
r = 1 - p_hat from the first pass; the second pass holds p clamped at its
starting value for a short warm-up so the refit of f settles before the
pair moves jointly (see ``_em_pass``), and the result carries the second
pass's trace and the combined iteration count. ``init='flat'`` instead
uses the
classical single-pass start omega0 = 1 - p_init everywhere, which makes
f^(0) the unweighted log-concave MLE of the full sample.

Degenerate exits: when the posterior mass of one component collapses below
``min_component_mass`` per observation, the result is pinned to the
surviving boundary model (p=0 when everything is attributed to f0, p=1
when nothing is) and flagged, instead of raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import (AllWeightsKnownError, ComponentCollapsedError,
                     DegenerateSampleError, ZeroMixtureDensityError)
from .families import KnownComponent, log_pdf_known
from .identifiability import (IdentifiabilityReport, check_identifiability,
                              report_to_dict)
from .logcon import (FitOptions, LogConcaveFit, WeightedSample,
                     eval_log_density, fit_to_dict, fit_weighted_logconcave)

__all__ = [
    "EmConfig", "EmResult", "e_step", "m_step_p", "m_step_f", "run_em",
    "posterior_unknown", "estimate_mu", "classification_error",
    "em_result_to_dict",
]

_P_POLISH_TOL = 1e-15
_P_POLISH_MAX = 2000
_PILOT_ROUND_UP = 0.9
_PILOT_CLAMP_ITERS = 50
_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class EmConfig:
    """Tuning knobs for :func:`run_em`."""

    p_init: float = 0.5
    max_iters: int = 500
    tol_loglik: float = 1e-8
    min_component_mass: float = 1e-6
    fit_options: FitOptions = field(default_factory=FitOptions)
    init: str = "pilot"

    def __post_init__(self) -> None:
        if not (0.0 < self.p_init < 1.0):
            raise ValueError(f"p_init must lie in (0, 1), got {self.p_init}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.tol_loglik > 0.0):
            raise ValueError("tol_loglik must be positive")
        if not (0.0 < self.min_component_mass < 0.5):
            raise ValueError("min_component_mass must lie in (0, 0.5)")
        if self.init not in ("pilot", "flat"):
            raise ValueError(f"init must be 'pilot' or 'flat', got {self.init!r}")


@dataclass(frozen=True)
class EmResult:
    p_hat: float
    omega: np.ndarray
    fit: LogConcaveFit
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    degenerate: Optional[str]
    identifiability: IdentifiabilityReport


def e_step(p: float, f0_values: np.ndarray, f_values: np.ndarray) -> np.ndarray:
    """Posterior probability that each observation came from f0.

    Points where both densities vanish make the mixture likelihood zero and
    raise :class:`ZeroMixtureDensityError`. Points where only f0 vanishes
    are attributed entirely to the unknown component (omega = 0) even when
    p has shrunk to 0.
    """
    f0v = np.asarray(f0_values, dtype=float)
    fv = np.asarray(f_values, dtype=float)
    num = (1.0 - p) * f0v
    den = num + p * fv
    zero = den <= 0.0
    if np.any(zero):
        dead = zero & ~((f0v == 0.0) & (fv > 0.0))
        if np.any(dead):
            i = int(np.flatnonzero(dead)[0])
            raise ZeroMixtureDensityError(
                f"mixture density is zero at observation index {i}: "
                f"f0={f0v[i]:g}, f={fv[i]:g}, p={p:g}")
    omega = np.zeros_like(den)
    ok = ~zero
    omega[ok] = num[ok] / den[ok]
    return omega


def m_step_p(omega: np.ndarray) -> float:
    """Updated mixing proportion: mean posterior mass of the unknown part."""
    om = np.asarray(omega, dtype=float)
    if om.size == 0:
        raise ValueError("omega must be non-empty")
    return float(np.mean(1.0 - om))


def m_step_f(points: Sequence[float], omega: np.ndarray,
             options: Optional[FitOptions] = None,
             min_component_mass: float = 1e-6,
             init: Optional[LogConcaveFit] = None) -> LogConcaveFit:
    """Weighted log-concave refit of the unknown component.

    Weights are proportional to 1 - omega. Raises
    :class:`ComponentCollapsedError` when the total unknown-component mass
    is below ``min_component_mass`` per observation, which would make the
    weighted sample meaningless.
    """
    x = np.asarray(points, dtype=float)
    om = np.asarray(omega, dtype=float)
    residual = 1.0 - om
    total = float(np.sum(residual))
    if total < min_component_mass * x.size:
        raise ComponentCollapsedError(
            f"unknown-component mass {total:g} is below "
            f"{min_component_mass:g} per observation ({x.size} observations)")
    sample = WeightedSample.from_observations(x, residual)
    return fit_weighted_logconcave(sample, options=options, init=init)


def _loglik(p: float, f0_values: np.ndarray, f_values: np.ndarray) -> float:
    den = (1.0 - p) * f0_values + p * f_values
    if np.any(den <= 0.0):
        i = int(np.flatnonzero(den <= 0.0)[0])
        raise ZeroMixtureDensityError(
            f"mixture density is zero at observation index {i}")
    return float(np.sum(np.log(den)))


def _silverman_bandwidth(x: np.ndarray) -> float:
    sd = float(np.std(x, ddof=1))
    iqr = float(np.percentile(x, 75) - np.percentile(x, 25))
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    if spread <= 0.0:
        spread = max(float(np.ptp(x)), 1.0)
    return 0.9 * spread * x.size ** (-0.2)


def _gaussian_kde_at_points(x: np.ndarray) -> np.ndarray:
    """Kernel estimate of the data density, evaluated at the data points.
    Chunked so that n around 10^4 stays within memory."""
    h = _silverman_bandwidth(x)
    out = np.empty_like(x)
    step = max(1, int(2.0e6 // max(1, x.size)))
    for start in range(0, x.size, step):
        block = x[start:start + step, None]
        z = (block - x[None, :]) / h
        out[start:start + step] = np.exp(-0.5 * z * z).mean(axis=1)
    return out / (h * _SQRT_2PI)


def _pilot_omega(f0_values: np.ndarray, kde_values: np.ndarray,
                 r: float) -> np.ndarray:
    """Density-ratio starting responsibilities min(1, r*f0/h).

    With h a kernel estimate of the observed density and r an estimate of
    the null proportion, r*f0/h is exactly the estimated posterior null
    probability of each observation. Values above the round-up threshold
    are hardened to exactly 1: near-1 soft values carry kernel-estimation
    noise that would bleed a sliver of every null observation into the
    unknown component and seed the spurious boundary basin.
    """
    omega = np.zeros_like(f0_values)
    ok = f0_values > 0.0
    omega[ok] = np.clip(r * f0_values[ok] / kde_values[ok], 0.0, 1.0)
    return np.where(omega >= _PILOT_ROUND_UP, 1.0, omega)


@dataclass
class _EmState:
    p: float
    omega: np.ndarray
    fit: LogConcaveFit
    f_values: np.ndarray
    trace: List[float]
    iterations: int
    converged: bool
    degenerate: Optional[str]


def _em_pass(x: np.ndarray, f0_values: np.ndarray, omega0: np.ndarray,
             cfg: EmConfig, clamp_iters: int = 0) -> _EmState:
    """One full EM run from starting responsibilities omega0.

    For the first ``clamp_iters`` iterations the mixing proportion is held
    at its starting value and only the unknown component is refit. Holding
    p lets the density consolidate onto the signal region before the pair
    (p, f) moves jointly; each clamped iteration is an EM step in f alone,
    so the likelihood trace stays nondecreasing through the release. The
    convergence test is suspended while clamped.
    """
    n = x.size
    try:
        fit = m_step_f(x, omega0, options=cfg.fit_options,
                       min_component_mass=cfg.min_component_mass)
    except ComponentCollapsedError:
        # Everything was attributed to f0 at the start; report the boundary
        # model. The fit slot still needs a density, so use the pooled MLE.
        fit = fit_weighted_logconcave(WeightedSample.from_observations(x),
                                      options=cfg.fit_options)
        f_values = np.exp(eval_log_density(fit, x))
        trace = [_loglik(0.0, f0_values, f_values)]
        return _EmState(p=0.0, omega=np.ones(n), fit=fit, f_values=f_values,
                        trace=trace, iterations=0, converged=True,
                        degenerate="AllKnown")
    p = m_step_p(omega0)
    f_values = np.exp(eval_log_density(fit, x))
    omega = np.asarray(omega0, dtype=float)
    loglik = _loglik(p, f0_values, f_values)
    trace = [loglik]
    converged = False
    degenerate: Optional[str] = None
    iterations = 0

    for _ in range(cfg.max_iters):
        iterations += 1
        omega = e_step(p, f0_values, f_values)
        unknown_mass = float(np.sum(1.0 - omega))
        if unknown_mass < cfg.min_component_mass * n:
            degenerate = "AllKnown"
            p = 0.0
            omega = np.ones_like(omega)
            converged = True
            break
        if n - unknown_mass < cfg.min_component_mass * n:
            degenerate = "AllUnknown"
            omega = np.zeros_like(omega)
            fit = m_step_f(x, omega, options=cfg.fit_options,
                           min_component_mass=cfg.min_component_mass,
                           init=fit)
            f_values = np.exp(eval_log_density(fit, x))
            p = 1.0
            converged = True
            break
        if iterations > clamp_iters:
            p = m_step_p(omega)
        fit = m_step_f(x, omega, options=cfg.fit_options,
                       min_component_mass=cfg.min_component_mass, init=fit)
        f_values = np.exp(eval_log_density(fit, x))
        new_loglik = _loglik(p, f0_values, f_values)
        trace.append(new_loglik)
        done = abs(new_loglik - loglik) <= cfg.tol_loglik * (1.0 + abs(loglik))
        loglik = new_loglik
        if done and iterations > clamp_iters:
            converged = True
            break

    return _EmState(p=p, omega=omega, fit=fit, f_values=f_values, trace=trace,
                    iterations=iterations, converged=converged,
                    degenerate=degenerate)


def run_em(points: Sequence[float], f0: KnownComponent,
           config: Optional[EmConfig] = None) -> EmResult:
    """Fit the mixture by EM with a weighted log-concave M-step.

    Each M-step warm-starts the active-set solver from the previous fit,
    which keeps M-steps cheap and preserves the never-decreasing likelihood
    even if the inner solver stops early. See the module docstring for the
    two initialization strategies.
    """
    cfg = config if config is not None else EmConfig()
    x = np.asarray(points, dtype=float).ravel()
    if x.size and not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    if np.unique(x).size < 4:
        raise DegenerateSampleError(
            f"need at least 4 distinct observations, got {np.unique(x).size}")

    f0_values = np.exp(log_pdf_known(f0, x))

    if cfg.init == "flat":
        omega0 = np.full(x.shape, 1.0 - cfg.p_init)
        state = _em_pass(x, f0_values, omega0, cfg)
        iterations = state.iterations
    else:
        kde_values = _gaussian_kde_at_points(x)
        first = _em_pass(x, f0_values,
                         _pilot_omega(f0_values, kde_values, 1.0), cfg)
        iterations = first.iterations
        state = first
        if first.degenerate is None:
            omega1 = _pilot_omega(f0_values, kde_values, 1.0 - first.p)
            state = _em_pass(x, f0_values, omega1, cfg,
                             clamp_iters=_PILOT_CLAMP_ITERS)
            iterations += state.iterations

    p = state.p
    omega = state.omega
    trace = state.trace
    if state.degenerate is None:
        # Polish p to its fixed point under the final fit so that
        # p_hat == mean(1 - omega) holds exactly on the returned result.
        for _ in range(_P_POLISH_MAX):
            omega = e_step(p, f0_values, state.f_values)
            p_new = m_step_p(omega)
            shift = abs(p_new - p)
            p = p_new
            if shift <= _P_POLISH_TOL:
                break
        trace = trace + [_loglik(p, f0_values, state.f_values)]

    report = check_identifiability(f0, state.fit)
    return EmResult(p_hat=float(p), omega=omega, fit=state.fit,
                    loglik_trace=np.asarray(trace, dtype=float),
                    iterations=iterations, converged=state.converged,
                    degenerate=state.degenerate, identifiability=report)


def posterior_unknown(result: EmResult, points: Union[float, Sequence[float]],
                      f0: KnownComponent) -> Union[float, np.ndarray]:
    """Posterior probability that a point came from the unknown component.

    Evaluates p f(x) / ((1-p) f0(x) + p f(x)) at the fitted parameters.
    Raises :class:`ZeroMixtureDensityError` where the fitted mixture density
    is zero (outside both supports).
    """
    scalar = np.isscalar(points)
    x = np.atleast_1d(np.asarray(points, dtype=float))
    f0v = np.exp(log_pdf_known(f0, x))
    fv = np.exp(eval_log_density(result.fit, x))
    num = result.p_hat * fv
    den = (1.0 - result.p_hat) * f0v + num
    if np.any(den <= 0.0):
        i = int(np.flatnonzero(den <= 0.0)[0])
        raise ZeroMixtureDensityError(
            f"fitted mixture density is zero at x={x[i]:g}")
    out = num / den
    return float(out[0]) if scalar else out


def estimate_mu(points: Sequence[float], omega: np.ndarray) -> float:
    """Posterior-weighted mean of the unknown component,
    sum (1-omega_i) x_i / sum (1-omega_i)."""
    x = np.asarray(points, dtype=float)
    residual = 1.0 - np.asarray(omega, dtype=float)
    total = float(np.sum(residual))
    if total <= 0.0:
        raise AllWeightsKnownError(
            "all posterior mass is on the known component; "
            "the unknown-component mean is undefined")
    return float(np.dot(residual, x) / total)


def classification_error(omega_hat: np.ndarray, labels: np.ndarray) -> float:
    """Mean squared gap between estimated and true membership,
    mean((omega_hat_i - w_i)^2) with w_i = 1 for points drawn from f0."""
    om = np.asarray(omega_hat, dtype=float)
    w = np.asarray(labels, dtype=float)
    if om.shape != w.shape:
        raise ValueError(f"shape mismatch: {om.shape} vs {w.shape}")
    return float(np.mean((om - w) ** 2))


def em_result_to_dict(result: EmResult) -> dict:
    return {
        "p_hat": result.p_hat,
        "iterations": result.iterations,
        "converged": result.converged,
        "degenerate": result.degenerate,
        "loglik_trace": [float(v) for v in result.loglik_trace],
        "omega": [float(v) for v in result.omega],
        "fit": fit_to_dict(result.fit),
        "identifiability": report_to_dict(result.identifiability),
    }
