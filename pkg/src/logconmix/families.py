"""Density families for the two mixture components.

The known component ``f0`` is one of five fully specified families: Normal,
Uniform, Exponential (rate parametrization), Student-t, or a Tabulated
density given as a grid of (x, log density) pairs with linear interpolation
of the log density between grid points.

The unknown component only needs to be sampled (for the simulation
benchmarks) and evaluated (for test oracles); the estimator itself never sees
these specs. Shifted exponential, Beta(1,5), shifted chi-square(3) and
shifted t(5) cover the benchmark models alongside the normal family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .rng import RngSeed, make_rng

__all__ = [
    "Normal", "Uniform", "Exponential", "StudentT", "Tabulated",
    "ShiftedExponential", "Beta15", "ShiftedChiSq3", "ShiftedT5",
    "KnownComponent", "UnknownComponent",
    "log_pdf_known", "sample_known", "support_known",
    "log_pdf_unknown", "sample_unknown",
    "sample_mixture", "load_tabulated_csv",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma) and math.isfinite(self.mu)):
            raise ValueError(f"Normal requires finite mu and sigma > 0, got {self}")


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ValueError(f"Uniform requires finite a < b, got {self}")


@dataclass(frozen=True)
class Exponential:
    """Exponential with density rate * exp(-rate * x) on [0, inf)."""
    rate: float

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValueError(f"Exponential requires rate > 0, got {self}")


@dataclass(frozen=True)
class StudentT:
    df: float

    def __post_init__(self):
        if not (self.df > 0.0 and math.isfinite(self.df)):
            raise ValueError(f"StudentT requires df > 0, got {self}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear log-density on a strictly ascending grid.

    The density is exp of the interpolated log density inside
    [grid[0], grid[-1]] and zero outside. The trapezoid integral of the
    density over the grid must equal 1 within 1e-3; construction fails
    otherwise.
    """

    grid: np.ndarray
    log_density: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        logf = np.asarray(self.log_density, dtype=float)
        if grid.ndim != 1 or logf.ndim != 1 or grid.size != logf.size:
            raise ValueError("Tabulated requires 1-D grid and log_density of equal length")
        if grid.size < 2:
            raise ValueError("Tabulated requires at least 2 grid points")
        if not np.all(np.isfinite(grid)):
            raise ValueError("Tabulated grid values must be finite")
        if not np.all(np.diff(grid) > 0.0):
            raise ValueError("Tabulated grid must be strictly ascending")
        if not np.all(np.isfinite(logf)):
            raise ValueError("Tabulated log_density values must be finite")
        dens = np.exp(logf)
        total = float(np.trapezoid(dens, grid))
        if abs(total - 1.0) > 1e-3:
            raise ValueError(
                f"Tabulated density integrates to {total:.6g} by trapezoid rule; "
                f"must be 1 within 1e-3")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "log_density", logf)
        # cumulative trapezoid masses, rescaled to end at exactly 1 for sampling
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))))
        object.__setattr__(self, "_cdf_grid", cum / cum[-1])

    def cdf(self, x) -> np.ndarray:
        """Trapezoid-grid CDF with linear interpolation between grid points."""
        return np.interp(np.asarray(x, dtype=float), self.grid, self._cdf_grid,
                         left=0.0, right=1.0)


@dataclass(frozen=True)
class ShiftedExponential:
    rate: float
    shift: float = 0.0

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate) and math.isfinite(self.shift)):
            raise ValueError(f"ShiftedExponential requires rate > 0 and finite shift, got {self}")


@dataclass(frozen=True)
class Beta15:
    """Beta(1, 5): density 5 (1 - x)^4 on [0, 1]."""


@dataclass(frozen=True)
class ShiftedChiSq3:
    shift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.shift):
            raise ValueError(f"ShiftedChiSq3 requires finite shift, got {self}")


@dataclass(frozen=True)
class ShiftedT5:
    shift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.shift):
            raise ValueError(f"ShiftedT5 requires finite shift, got {self}")


KnownComponent = Union[Normal, Uniform, Exponential, StudentT, Tabulated]
UnknownComponent = Union[Normal, ShiftedExponential, Beta15, ShiftedChiSq3, ShiftedT5]


def _student_t_log_pdf(x: np.ndarray, df: float) -> np.ndarray:
    const = (math.lgamma(0.5 * (df + 1.0)) - math.lgamma(0.5 * df)
             - 0.5 * math.log(df * math.pi))
    return const - 0.5 * (df + 1.0) * np.log1p(x * x / df)


def log_pdf_known(spec: KnownComponent, x) -> np.ndarray:
    """Log density of the known component; -inf outside its support."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Normal):
        z = (x - spec.mu) / spec.sigma
        return -0.5 * z * z - math.log(spec.sigma) - _LOG_SQRT_2PI
    if isinstance(spec, Uniform):
        out = np.full(x.shape, -np.inf)
        inside = (x >= spec.a) & (x <= spec.b)
        out[inside] = -math.log(spec.b - spec.a)
        return out
    if isinstance(spec, Exponential):
        out = np.full(x.shape, -np.inf)
        inside = x >= 0.0
        out[inside] = math.log(spec.rate) - spec.rate * x[inside]
        return out
    if isinstance(spec, StudentT):
        return _student_t_log_pdf(x, spec.df)
    if isinstance(spec, Tabulated):
        out = np.full(x.shape, -np.inf)
        inside = (x >= spec.grid[0]) & (x <= spec.grid[-1])
        out[inside] = np.interp(x[inside], spec.grid, spec.log_density)
        return out
    raise TypeError(f"unknown known-component spec: {spec!r}")


def support_known(spec: KnownComponent) -> Tuple[float, float]:
    """Support interval of the known component (may be unbounded)."""
    if isinstance(spec, (Normal, StudentT)):
        return (-np.inf, np.inf)
    if isinstance(spec, Uniform):
        return (spec.a, spec.b)
    if isinstance(spec, Exponential):
        return (0.0, np.inf)
    if isinstance(spec, Tabulated):
        return (float(spec.grid[0]), float(spec.grid[-1]))
    raise TypeError(f"unknown known-component spec: {spec!r}")


def sample_known(spec: KnownComponent, n: int, seed: RngSeed) -> np.ndarray:
    if n < 1:
        raise ValueError(f"need n >= 1 draws, got {n}")
    rng = make_rng(seed)
    return _draw_known(spec, n, rng)


def _draw_known(spec: KnownComponent, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, Normal):
        return rng.normal(spec.mu, spec.sigma, size=n)
    if isinstance(spec, Uniform):
        return rng.uniform(spec.a, spec.b, size=n)
    if isinstance(spec, Exponential):
        return rng.exponential(1.0 / spec.rate, size=n)
    if isinstance(spec, StudentT):
        return rng.standard_t(spec.df, size=n)
    if isinstance(spec, Tabulated):
        u = rng.random(size=n)
        cdf = spec._cdf_grid
        idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, len(cdf) - 2)
        frac = (u - cdf[idx]) / (cdf[idx + 1] - cdf[idx])
        return spec.grid[idx] + frac * (spec.grid[idx + 1] - spec.grid[idx])
    raise TypeError(f"unknown known-component spec: {spec!r}")


def log_pdf_unknown(spec: UnknownComponent, x) -> np.ndarray:
    """Log density of an unknown-component spec (used by tests and oracles)."""
    x = np.asarray(x, dtype=float)
    if isinstance(spec, Normal):
        return log_pdf_known(spec, x)
    if isinstance(spec, ShiftedExponential):
        out = np.full(x.shape, -np.inf)
        y = x - spec.shift
        inside = y >= 0.0
        out[inside] = math.log(spec.rate) - spec.rate * y[inside]
        return out
    if isinstance(spec, Beta15):
        out = np.full(x.shape, -np.inf)
        inside = (x >= 0.0) & (x < 1.0)
        out[inside] = math.log(5.0) + 4.0 * np.log1p(-x[inside])
        return out
    if isinstance(spec, ShiftedChiSq3):
        out = np.full(x.shape, -np.inf)
        y = x - spec.shift
        inside = y > 0.0
        out[inside] = 0.5 * np.log(y[inside]) - 0.5 * y[inside] - 0.5 * math.log(2.0 * math.pi)
        return out
    if isinstance(spec, ShiftedT5):
        return _student_t_log_pdf(x - spec.shift, 5.0)
    raise TypeError(f"unknown unknown-component spec: {spec!r}")


def _draw_unknown(spec: UnknownComponent, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(spec, Normal):
        return rng.normal(spec.mu, spec.sigma, size=n)
    if isinstance(spec, ShiftedExponential):
        return spec.shift + rng.exponential(1.0 / spec.rate, size=n)
    if isinstance(spec, Beta15):
        # inverse CDF of Beta(1, 5): F(x) = 1 - (1 - x)^5
        return 1.0 - (1.0 - rng.random(size=n)) ** 0.2
    if isinstance(spec, ShiftedChiSq3):
        # chi-square(3) == Gamma(shape 3/2, scale 2)
        return spec.shift + rng.gamma(1.5, 2.0, size=n)
    if isinstance(spec, ShiftedT5):
        return spec.shift + rng.standard_t(5.0, size=n)
    raise TypeError(f"unknown unknown-component spec: {spec!r}")


def sample_unknown(spec: UnknownComponent, n: int, seed: RngSeed) -> np.ndarray:
    if n < 1:
        raise ValueError(f"need n >= 1 draws, got {n}")
    return _draw_unknown(spec, n, make_rng(seed))


def sample_mixture(f0: KnownComponent, f: UnknownComponent, p: float, n: int,
                   seed: RngSeed) -> Tuple[np.ndarray, np.ndarray]:
    """Draw n observations from (1-p) f0 + p f.

    Returns ``(values, labels)`` with ``labels[i] = 1`` when observation i
    came from the known component f0. The draw order is fixed (labels, then
    one block from each component), so results depend only on the seed.
    """
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"mixing proportion must lie in [0, 1], got {p}")
    if n < 1:
        raise ValueError(f"need n >= 1 draws, got {n}")
    rng = make_rng(seed)
    labels = (rng.random(size=n) < (1.0 - p)).astype(np.int64)
    from_known = _draw_known(f0, n, rng)
    from_unknown = _draw_unknown(f, n, rng)
    values = np.where(labels == 1, from_known, from_unknown)
    return values, labels


def load_tabulated_csv(path) -> Tabulated:
    """Read a tabulated density from CSV with header ``x,log_density``."""
    import csv

    xs = []
    logs = []
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["x", "log_density"]:
            raise ValueError(f"{path}: expected header 'x,log_density', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ValueError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
            try:
                xs.append(float(row[0]))
                logs.append(float(row[1]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric field in {row[:2]}") from None
    if len(xs) < 2:
        raise ValueError(f"{path}: need at least 2 grid rows, got {len(xs)}")
    return Tabulated(np.asarray(xs), np.asarray(logs))
