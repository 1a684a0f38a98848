"""Least-squares lines and R^2 between effect size and an outcome."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, ValidationError

MIN_POINTS = 3


def _as_pair(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("x and y must be 1-D and of equal length")
    if x.size < 2:
        raise InsufficientDataError("need at least 2 points")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValidationError("x and y must be finite")
    return x, y


def _constant(v) -> bool:
    # exact test; centring a constant vector can leave rounding residue
    return bool(v.min() == v.max())


def _moments(x, y):
    xc = x - x.mean()
    yc = y - y.mean()
    return float(xc @ xc), float(yc @ yc), float(xc @ yc)


def ols_fit(x, y) -> tuple[float, float]:
    """Slope and intercept of the least-squares line of ``y`` on ``x``."""
    x, y = _as_pair(x, y)
    if _constant(x):
        raise ValidationError("zero variance in x")
    sxx, _, sxy = _moments(x, y)
    slope = sxy / sxx
    return slope, float(y.mean() - slope * x.mean())


def pearson_r(x, y) -> tuple[float, bool]:
    """Pearson correlation and a flag set when either side has zero variance
    (the correlation is then reported as 0)."""
    x, y = _as_pair(x, y)
    if _constant(x) or _constant(y):
        return 0.0, True
    sxx, syy, sxy = _moments(x, y)
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r)), False


def r_squared(x, y) -> float:
    r, _ = pearson_r(x, y)
    return r * r


@dataclass(frozen=True)
class CorrelationSummary:
    n_points: int
    slope: float
    intercept: float
    pearson_r: float
    r_squared: float
    zero_variance: bool = False

    def as_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "slope": self.slope,
            "intercept": self.intercept,
            "pearson_r": self.pearson_r,
            "r_squared": self.r_squared,
            "zero_variance": self.zero_variance,
        }


def correlate(x, y, min_points: int = MIN_POINTS) -> CorrelationSummary:
    """OLS line and R^2 of outcome ``y`` on effect size ``x``.

    Raises when fewer than ``min_points`` points are given. Zero variance in
    either variable gives r = R^2 = 0 with ``zero_variance`` set; with zero
    variance in x the line is flat at the outcome mean.
    """
    x = np.asarray(x, dtype=float)
    if x.size < min_points:
        raise InsufficientDataError(f"correlation needs at least {min_points} points, got {x.size}")
    r, flat = pearson_r(x, y)
    y = np.asarray(y, dtype=float)
    try:
        slope, intercept = ols_fit(x, y)
    except ValidationError:
        slope, intercept = 0.0, float(y.mean())
    return CorrelationSummary(int(x.size), slope, intercept, r, r * r, flat)
