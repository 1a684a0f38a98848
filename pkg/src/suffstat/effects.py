"""Effect sizes between the two label groups of a dataset.

Numeric features use Cohen's d with a pooled sample standard deviation.
Categorical features use one-vs-rest odds ratios per level; ``|ln OR|`` is
averaged over levels and mapped onto the d scale with the logistic
conversion ``d = ln(OR) * sqrt(3) / pi`` so that both kinds can be averaged
into one dataset-level score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabelError, InsufficientDataError, ValidationError
from .ingest import CATEGORICAL, NUMERIC, EncodedMatrix

LOGIT_TO_D = math.sqrt(3.0) / math.pi
DEFAULT_CAP = 10.0


@dataclass(frozen=True)
class GroupStats:
    mean: float
    sd: float
    n: int

    @classmethod
    def of(cls, values) -> "GroupStats":
        v = np.asarray(values, dtype=float)
        if v.size < 2:
            raise InsufficientDataError(f"group needs at least 2 values, got {v.size}")
        return cls(float(v.mean()), float(v.std(ddof=1)), int(v.size))


def pooled_sd(g1: GroupStats, g2: GroupStats) -> float:
    dof = g1.n + g2.n - 2
    if dof <= 0:
        raise InsufficientDataError("pooled sd undefined for n1 + n2 <= 2")
    return math.sqrt(((g1.n - 1) * g1.sd**2 + (g2.n - 1) * g2.sd**2) / dof)


def cohens_d(group1, group2) -> float:
    """Standardized mean difference ``(mean1 - mean2) / pooled_sd``.

    With zero pooled sd the result is 0 for equal means and a signed
    infinity otherwise.
    """
    g1, g2 = GroupStats.of(group1), GroupStats.of(group2)
    diff = g1.mean - g2.mean
    s = pooled_sd(g1, g2)
    if s == 0.0:
        if diff == 0.0:
            return 0.0
        return math.copysign(math.inf, diff)
    return diff / s


def odds(p: float) -> float:
    if p == 1.0:
        raise ValidationError("odds are infinite at p = 1")
    if not 0.0 <= p < 1.0:
        raise ValidationError(f"probability must lie in [0, 1), got {p}")
    return p / (1.0 - p)


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 counts; rows are label groups, columns are level present/absent."""

    cells: tuple[tuple[float, float], tuple[float, float]]
    correction_applied: bool = False

    def __post_init__(self):
        if len(self.cells) != 2 or any(len(r) != 2 for r in self.cells):
            raise ValidationError("contingency table must be 2x2")
        if any(c < 0 for r in self.cells for c in r):
            raise ValidationError("contingency counts must be non-negative")

    @classmethod
    def from_counts(cls, cells) -> "ContingencyTable":
        (a, b), (c, d) = cells
        return cls(((float(a), float(b)), (float(c), float(d))))

    def corrected(self) -> "ContingencyTable":
        """Haldane-Anscombe: add 0.5 to every cell if any cell is zero."""
        if self.correction_applied or all(c > 0 for r in self.cells for c in r):
            return self
        return ContingencyTable(
            tuple(tuple(c + 0.5 for c in r) for r in self.cells), correction_applied=True
        )

    def swapped(self) -> "ContingencyTable":
        return ContingencyTable((self.cells[1], self.cells[0]), self.correction_applied)


def odds_ratio(table) -> float:
    """Odds in group 1 over odds in group 2, ``a*d / (b*c)``."""
    if not isinstance(table, ContingencyTable):
        table = ContingencyTable.from_counts(table)
    (a, b), (c, d) = table.corrected().cells
    return (a * d) / (b * c)


def level_table(codes: np.ndarray, labels: np.ndarray, level) -> ContingencyTable:
    pos = labels == 1
    present = codes == level
    a = np.count_nonzero(pos & present)
    b = np.count_nonzero(pos & ~present)
    c = np.count_nonzero(~pos & present)
    d = np.count_nonzero(~pos & ~present)
    return ContingencyTable.from_counts(((a, b), (c, d)))


def _check_labels(labels) -> np.ndarray:
    lab = np.asarray(labels)
    if not (np.any(lab == 1) and np.any(lab == 0)):
        raise DegenerateLabelError("labels must contain both classes")
    return lab


def mean_abs_log_or(feature_codes, labels) -> float:
    """Mean over observed levels of |ln OR| for the level-vs-rest table.

    A single observed level has no contrast and yields 0.
    """
    lab = _check_labels(labels)
    codes = np.asarray(feature_codes)
    levels = np.unique(codes)
    if levels.size < 2:
        return 0.0
    logs = [abs(math.log(odds_ratio(level_table(codes, lab, lv)))) for lv in levels]
    return float(np.mean(logs))


def categorical_effect_magnitude(feature_codes, labels) -> float:
    """Categorical effect on the d scale: ``mean |ln OR| * sqrt(3) / pi``."""
    return mean_abs_log_or(feature_codes, labels) * LOGIT_TO_D


@dataclass(frozen=True)
class FeatureEffect:
    name: str
    kind: str
    raw: float  # signed d, or mean |ln OR| for categorical features
    magnitude: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class EffectReport:
    per_feature: tuple[FeatureEffect, ...]
    average: float
    label_name: str = ""
    excluded: tuple[tuple[str, str], ...] = field(default_factory=tuple)

    def magnitudes(self) -> dict[str, float]:
        return {f.name: f.magnitude for f in self.per_feature}


def feature_effect(name: str, kind: str, column, labels, cap: float = DEFAULT_CAP) -> FeatureEffect:
    lab = _check_labels(labels)
    col = np.asarray(column, dtype=float)
    if kind == NUMERIC:
        d = cohens_d(col[lab == 1], col[lab == 0])
        if math.isinf(d):
            return FeatureEffect(name, kind, d, cap, ("clamped",))
        mag = abs(d)
        if mag > cap:
            return FeatureEffect(name, kind, d, cap, ("clamped",))
        return FeatureEffect(name, kind, d, mag)
    if kind == CATEGORICAL:
        codes = col.astype(np.int64)
        flags = ("single_level",) if np.unique(codes).size < 2 else ()
        raw = mean_abs_log_or(codes, lab)
        mag = raw * LOGIT_TO_D
        if mag > cap:
            return FeatureEffect(name, kind, raw, cap, flags + ("clamped",))
        return FeatureEffect(name, kind, raw, mag, flags)
    raise ValidationError(f"unknown feature kind {kind!r}")


def average_effect_size(
    matrix: EncodedMatrix, labels, label_name: str = "", cap: float = DEFAULT_CAP
) -> EffectReport:
    """Per-feature effect magnitudes and their arithmetic mean.

    Features whose statistic cannot be computed (a label group with fewer
    than two rows) are listed in ``excluded`` and left out of the mean.
    """
    lab = _check_labels(labels)
    if matrix.values.shape[1] == 0:
        raise ValidationError("no feature columns")
    if matrix.values.shape[0] != lab.shape[0]:
        raise ValidationError("labels do not align with matrix rows")
    effects, excluded = [], []
    for j, col in enumerate(matrix.schema.columns):
        try:
            effects.append(feature_effect(col.name, col.kind, matrix.values[:, j], lab, cap))
        except InsufficientDataError as exc:
            excluded.append((col.name, str(exc)))
    if not effects:
        raise InsufficientDataError("every feature was excluded")
    # fsum keeps the mean independent of feature order
    average = math.fsum(e.magnitude for e in effects) / len(effects)
    return EffectReport(tuple(effects), average, label_name, tuple(excluded))


def effect_report_rows(report: EffectReport) -> list[dict]:
    """Flat records (feature, kind, raw, magnitude, flags) for reporting."""
    rows = [
        {
            "feature": e.name,
            "kind": e.kind,
            "raw": e.raw,
            "magnitude": e.magnitude,
            "flags": ";".join(e.flags),
        }
        for e in report.per_feature
    ]
    for name, reason in report.excluded:
        rows.append({"feature": name, "kind": "", "raw": None, "magnitude": None, "flags": "excluded:" + reason})
    return rows


__all__ = [
    "GroupStats",
    "ContingencyTable",
    "FeatureEffect",
    "EffectReport",
    "pooled_sd",
    "cohens_d",
    "odds",
    "odds_ratio",
    "categorical_effect_magnitude",
    "average_effect_size",
    "effect_report_rows",
    "LOGIT_TO_D",
]
