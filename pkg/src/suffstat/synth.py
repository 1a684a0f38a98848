"""Synthetic binary-classification data with known per-feature effect sizes.

Numeric features are unit-variance Gaussians whose class-1 mean is the
target Cohen's d. Categorical features are binary with presence
probability 0.5 in class 0 and ``OR / (1 + OR)`` in class 1, so the
population odds ratio equals the target.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .ingest import CATEGORICAL, NUMERIC, Column, EncodedMatrix, FeatureSchema

LABEL_COLUMN = "label"
PRESENT, ABSENT = "yes", "no"


@dataclass(frozen=True)
class SynthFeature:
    kind: str
    target: float

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValidationError(f"feature kind must be numeric or categorical, got {self.kind!r}")
        if not math.isfinite(self.target):
            raise ValidationError("feature target must be finite")
        if self.kind == CATEGORICAL and not self.target > 0:
            raise ValidationError(f"odds-ratio target must be > 0, got {self.target}")


@dataclass(frozen=True)
class SynthSpec:
    n_rows: int
    balance: float = 0.5
    features: tuple[SynthFeature, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.n_rows, int) or self.n_rows < 4:
            raise ValidationError(f"n_rows must be an integer >= 4, got {self.n_rows!r}")
        if not 0.0 < self.balance < 1.0:
            raise ValidationError(f"balance must lie in (0, 1), got {self.balance}")
        if not self.features:
            raise ValidationError("at least one feature is required")

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthSpec":
        """Build from ``{"n_rows", "balance", "seed", "features": [{"kind", "target"}]}``."""
        if not isinstance(doc, dict):
            raise ValidationError("spec must be a JSON object")
        unknown = set(doc) - {"n_rows", "balance", "seed", "features"}
        if unknown:
            raise ValidationError(f"unknown spec fields: {sorted(unknown)}")
        if "n_rows" not in doc:
            raise ValidationError("field n_rows: required")
        feats = []
        for i, f in enumerate(doc.get("features", [])):
            try:
                feats.append(SynthFeature(str(f["kind"]), float(f["target"])))
            except (KeyError, TypeError) as exc:
                raise ValidationError(f"field features[{i}]: needs kind and target ({exc})") from None
            except ValidationError as exc:
                raise ValidationError(f"field features[{i}]: {exc}") from None
        return cls(doc["n_rows"], float(doc.get("balance", 0.5)), tuple(feats), int(doc.get("seed", 0)))

    @classmethod
    def from_json(cls, text: str) -> "SynthSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"spec is not valid JSON: {exc}") from None
        return cls.from_dict(doc)


def _labels(n1: int, n0: int) -> np.ndarray:
    return np.concatenate([np.ones(n1, dtype=np.int8), np.zeros(n0, dtype=np.int8)])


def presence_probability(or_target: float) -> float:
    return or_target / (1.0 + or_target)


def _draw(kind, target, n1, n0, rng):
    if kind == NUMERIC:
        return np.concatenate([rng.standard_normal(n1) + target, rng.standard_normal(n0)])
    p1 = presence_probability(target)
    return np.concatenate([rng.random(n1) < p1, rng.random(n0) < 0.5]).astype(np.int64)


def synth_numeric_feature(d_target: float, n1: int, n0: int, seed: int):
    """Class 1 ~ N(d_target, 1), class 0 ~ N(0, 1); class-1 rows first."""
    if n1 < 2 or n0 < 2:
        raise ValidationError("each class needs at least 2 rows")
    return _draw(NUMERIC, d_target, n1, n0, np.random.default_rng(seed)), _labels(n1, n0)


def synth_categorical_feature(or_target: float, n1: int, n0: int, seed: int):
    """Binary codes (1 = present); class-1 rows first."""
    if not or_target > 0:
        raise ValidationError("odds-ratio target must be > 0")
    if n1 < 2 or n0 < 2:
        raise ValidationError("each class needs at least 2 rows")
    return _draw(CATEGORICAL, or_target, n1, n0, np.random.default_rng(seed)), _labels(n1, n0)


def feature_name(j: int, f: SynthFeature) -> str:
    return f"{'num' if f.kind == NUMERIC else 'cat'}{j}"


def synth_dataset(spec: SynthSpec):
    """Generate ``(EncodedMatrix, labels)`` for ``spec``.

    The positive count is ``round(balance * n_rows)`` (at least one row per
    class); rows are shuffled and each feature is drawn independently.
    """
    n1 = min(max(int(round(spec.balance * spec.n_rows)), 1), spec.n_rows - 1)
    n0 = spec.n_rows - n1
    ss = np.random.SeedSequence(spec.seed)
    child = ss.spawn(len(spec.features) + 1)
    perm = np.random.default_rng(child[0]).permutation(spec.n_rows)
    pos_rows = np.sort(perm[:n1])
    neg_rows = np.sort(perm[n1:])
    labels = np.zeros(spec.n_rows, dtype=np.int8)
    labels[pos_rows] = 1
    values = np.empty((spec.n_rows, len(spec.features)))
    cols = []
    for j, f in enumerate(spec.features):
        v = _draw(f.kind, f.target, n1, n0, np.random.default_rng(child[j + 1]))
        values[pos_rows, j] = v[:n1]
        values[neg_rows, j] = v[n1:]
        cols.append(Column(feature_name(j, f), f.kind))
    maps = {c.name: {ABSENT: 0, PRESENT: 1} for c in cols if c.kind == CATEGORICAL}
    return EncodedMatrix(values, FeatureSchema(tuple(cols)), maps, {}), labels


def target_magnitude(f: SynthFeature) -> float:
    """Expected profiled magnitude on the d scale."""
    if f.kind == NUMERIC:
        return abs(f.target)
    return abs(math.log(f.target)) * math.sqrt(3.0) / math.pi


def to_csv(matrix: EncodedMatrix, labels) -> str:
    """Render in the ingest CSV format (header line, comma separated)."""
    out = io.StringIO()
    out.write(",".join(matrix.names + [LABEL_COLUMN]) + "\n")
    kinds = matrix.kinds
    for row, lab in zip(matrix.values, labels):
        cells = [
            repr(float(v)) if k == NUMERIC else (PRESENT if v == 1 else ABSENT)
            for v, k in zip(row, kinds)
        ]
        cells.append(str(int(lab)))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def schema_for(matrix: EncodedMatrix) -> FeatureSchema:
    return FeatureSchema(tuple(matrix.schema.columns) + (Column(LABEL_COLUMN, CATEGORICAL),))


def separable_dataset(n: int, margin: float = 1.0, n_features: int = 1, seed: int = 0):
    """Linearly separable data with label ``[x0 > 0]`` and an empty band of
    width ``margin`` around the boundary.

    ``x0 = ±(margin/2 + |z|)`` with z standard normal; any further columns
    are pure noise. Returns ``(X, y)``.
    """
    if n < 4 or margin < 0 or n_features < 1:
        raise ValidationError("need n >= 4, margin >= 0, n_features >= 1")
    rng = np.random.default_rng(seed)
    y = rng.permutation(np.arange(n) % 2).astype(np.int8)
    X = rng.standard_normal((n, n_features))
    sign = np.where(y == 1, 1.0, -1.0)
    X[:, 0] = sign * (margin / 2.0 + np.abs(X[:, 0]))
    return X, y
