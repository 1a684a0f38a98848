"""Learning curves and the two slope statistics fitted to them.

A curve trains on nested prefixes of one seeded, class-interleaved ordering
of the training side and scores each model on that prefix (train error)
and on the fixed validation side (validation error).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ValidationError
from .ingest import SplitPair, ceil_count
from .learners import LearnerSpec, evaluate, train

log = logging.getLogger(__name__)

DEFAULT_FRACTIONS = tuple(i / 10 for i in range(1, 11))


@dataclass(frozen=True)
class CurvePoint:
    n_train: int
    train_error: float
    valid_error: float


@dataclass(frozen=True)
class LearningCurve:
    points: tuple[CurvePoint, ...]
    spec: LearnerSpec | None = None
    subset_id: int | str = 0
    seed: int = 0

    def __post_init__(self):
        if len(self.points) < 3:
            raise InsufficientDataError(f"a curve needs at least 3 points, got {len(self.points)}")
        sizes = [p.n_train for p in self.points]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValidationError("curve n_train values must be strictly increasing")

    @property
    def n_train(self) -> np.ndarray:
        return np.array([p.n_train for p in self.points], dtype=float)

    @property
    def train_error(self) -> np.ndarray:
        return np.array([p.train_error for p in self.points])

    @property
    def valid_error(self) -> np.ndarray:
        return np.array([p.valid_error for p in self.points])


@dataclass(frozen=True)
class LogFit:
    a: float
    b: float
    residual_sse: float


@dataclass(frozen=True)
class GapFit:
    slope: float
    intercept: float
    residual_sse: float


def _line_fit(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValidationError("singular design: all regressor values are equal")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - intercept - slope * x
    return slope, intercept, float(resid @ resid)


def fit_log_model(curve: LearningCurve) -> LogFit:
    """Least squares of validation error on ``a + b * ln(n_train)``."""
    b, a, sse = _line_fit(np.log(curve.n_train), curve.valid_error)
    return LogFit(a, b, sse)


def fit_gap_slope(curve: LearningCurve) -> GapFit:
    """Least squares of ``valid_error - train_error`` on ``n_train``."""
    slope, intercept, sse = _line_fit(curve.n_train, curve.valid_error - curve.train_error)
    return GapFit(slope, intercept, sse)


def stratified_order(indices, labels, seed: int) -> np.ndarray:
    """Seeded ordering of ``indices`` whose prefixes keep the class mix.

    Each class is shuffled, then members are interleaved by their relative
    position within their class; ties go to the positive class first.
    """
    idx = np.asarray(indices, dtype=np.intp)
    lab = np.asarray(labels)
    rng = np.random.default_rng(seed)
    keys, cls, items = [], [], []
    for c in (1, 0):
        members = idx[lab == c]
        members = members[rng.permutation(members.size)]
        k = members.size
        keys.append((np.arange(k) + 0.5) / max(k, 1))
        cls.append(np.full(k, 1 - c))
        items.append(members)
    keys, cls, items = (np.concatenate(v) for v in (keys, cls, items))
    return items[np.lexsort((cls, keys))]


def training_slices(order, fractions):
    """Yield ``(fraction, prefix)`` for each fraction of the ordering."""
    n = len(order)
    for f in fractions:
        yield f, order[: ceil_count(f, n)]


def compute_learning_curve(
    spec: LearnerSpec,
    X,
    y,
    split: SplitPair,
    fractions=DEFAULT_FRACTIONS,
    seed: int = 0,
    subset_id: int | str = 0,
) -> LearningCurve:
    """Train ``spec`` on growing prefixes of the training side of ``split``.

    ``X`` and ``y`` are indexed by the split's row indices. Fractions whose
    prefix has fewer than 2 rows or a single class are skipped.
    """
    fr = [float(f) for f in fractions]
    if any(not 0.0 < f <= 1.0 for f in fr):
        raise ValidationError("fractions must lie in (0, 1]")
    if any(b <= a for a, b in zip(fr, fr[1:])):
        raise ValidationError("fractions must be strictly increasing")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    train_idx = np.asarray(split.train_indices, dtype=np.intp)
    valid_idx = np.asarray(split.valid_indices, dtype=np.intp)
    seeds = np.random.SeedSequence(seed & 0xFFFFFFFFFFFFFFFF).generate_state(len(fr) + 1, dtype=np.uint64)
    order = stratified_order(train_idx, y[train_idx], int(seeds[0]))
    X_valid, y_valid = X[valid_idx], y[valid_idx]
    points = []
    last_n = 0
    for i, (f, rows) in enumerate(training_slices(order, fr)):
        y_tr = y[rows]
        if rows.size < 2 or rows.size <= last_n or y_tr.min() == y_tr.max():
            log.info("curve %s/%s: skipping fraction %.3g (n=%d)", subset_id, spec.family, f, rows.size)
            continue
        model = train(spec, X[rows], y_tr, seed=int(seeds[i + 1]))
        points.append(
            CurvePoint(
                int(rows.size),
                evaluate(model, X[rows], y_tr).error,
                evaluate(model, X_valid, y_valid).error,
            )
        )
        last_n = rows.size
    return LearningCurve(tuple(points), spec, subset_id, seed)


def curve_rows(curve: LearningCurve, family: str | None = None) -> list[dict]:
    fam = family or (curve.spec.family if curve.spec else "")
    return [
        {
            "subset": curve.subset_id,
            "family": fam,
            "n_train": p.n_train,
            "train_error": p.train_error,
            "valid_error": p.valid_error,
        }
        for p in curve.points
    ]

