"""The four classifier families behind one train / predict / evaluate API.

>>> spec = LearnerSpec("tree")
>>> model = train(spec, X, y, seed=0)          # doctest: +SKIP
>>> evaluate(model, X_valid, y_valid).accuracy  # doctest: +SKIP
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import DegenerateLabelError, InsufficientDataError, ShapeError, ValidationError
from . import logistic, mlp, tree

FAMILIES = ("logistic", "tree", "forest", "mlp")
MODEL_FORMAT_VERSION = 1

DEFAULT_HYPERPARAMETERS: dict[str, dict[str, Any]] = {
    "logistic": {"learning_rate": 0.1, "max_iter": 1000, "tol": 1e-6},
    "tree": {"max_depth": 10, "min_samples_split": 2},
    "forest": {
        "n_trees": 100,
        "bootstrap": True,
        "max_features": "sqrt",
        "max_depth": 10,
        "min_samples_split": 2,
    },
    "mlp": {"hidden": 32, "epochs": 200, "batch_size": 32, "learning_rate": 0.01},
}


def _positive_int(family, key, value):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ValidationError(f"{family}.{key} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class LearnerSpec:
    family: str
    hyperparameters: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown learner family {self.family!r}")
        merged = dict(DEFAULT_HYPERPARAMETERS[self.family])
        unknown = set(self.hyperparameters) - set(merged)
        if unknown:
            raise ValidationError(f"{self.family}: unknown hyperparameters {sorted(unknown)}")
        merged.update(self.hyperparameters)
        object.__setattr__(self, "hyperparameters", merged)
        if not self.label:
            object.__setattr__(self, "label", self.family)
        self._validate()

    def _validate(self):
        hp, fam = self.hyperparameters, self.family
        if fam in ("logistic", "mlp") and not hp["learning_rate"] > 0:
            raise ValidationError(f"{fam}.learning_rate must be > 0")
        if fam == "logistic":
            _positive_int(fam, "max_iter", hp["max_iter"])
            if not hp["tol"] >= 0:
                raise ValidationError("logistic.tol must be >= 0")
        if fam in ("tree", "forest"):
            if hp["max_depth"] is not None:
                _positive_int(fam, "max_depth", hp["max_depth"])
            _positive_int(fam, "min_samples_split", hp["min_samples_split"])
        if fam == "forest":
            _positive_int(fam, "n_trees", hp["n_trees"])
            mf = hp["max_features"]
            if mf not in ("sqrt", "all", None):
                _positive_int(fam, "max_features", mf)
        if fam == "mlp":
            for key in ("hidden", "epochs", "batch_size"):
                _positive_int(fam, key, hp[key])


def default_specs() -> tuple[LearnerSpec, ...]:
    return tuple(LearnerSpec(f) for f in FAMILIES)


@dataclass(frozen=True)
class TrainedModel:
    family: str
    params: Any
    n_features: int
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        """Versioned JSON form; identical models give identical strings."""
        if self.family == "logistic":
            w, b = self.params
            body = {"weights": [float(v) for v in w], "bias": float(b)}
        elif self.family == "tree":
            body = self.params.to_dict()
        elif self.family == "forest":
            body = {"trees": [t.to_dict() for t in self.params]}
        else:
            body = {k: np.asarray(v).tolist() for k, v in self.params.items()}
        doc = {
            "version": MODEL_FORMAT_VERSION,
            "family": self.family,
            "n_features": self.n_features,
            "metadata": self.metadata,
            "params": body,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        doc = json.loads(text)
        if doc.get("version") != MODEL_FORMAT_VERSION:
            raise ValidationError(f"unsupported model format version {doc.get('version')!r}")
        fam, body = doc["family"], doc["params"]
        if fam == "logistic":
            params = (np.asarray(body["weights"], dtype=float), float(body["bias"]))
        elif fam == "tree":
            params = tree.Tree.from_dict(body)
        elif fam == "forest":
            params = [tree.Tree.from_dict(t) for t in body["trees"]]
        elif fam == "mlp":
            params = {k: (float(v) if k == "b2" else np.asarray(v, dtype=float)) for k, v in body.items()}
        else:
            raise ValidationError(f"unknown family {fam!r}")
        return cls(fam, params, doc["n_features"], doc["metadata"])


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    error: float
    n: int


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ShapeError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
    if X.shape[0] < 2:
        raise InsufficientDataError("need at least 2 training rows")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X contains non-finite values")
    if not (np.any(y == 1) and np.any(y == 0)):
        raise DegenerateLabelError("training labels must contain both classes")
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError("labels must be 0/1")
    return X, y.astype(np.int8)


def train(spec: LearnerSpec, X, y, seed: int = 0) -> TrainedModel:
    X, y = _check_xy(X, y)
    hp = spec.hyperparameters
    p = X.shape[1]
    if spec.family == "logistic":
        w, b, losses, converged = logistic.fit_logistic(X, y, hp["learning_rate"], hp["max_iter"], hp["tol"])
        meta = {"iterations": len(losses) - 1, "converged": converged, "final_loss": losses[-1]}
        return TrainedModel("logistic", (w, b), p, meta)
    if spec.family == "tree":
        t = tree.grow_tree(X, y, None, hp["max_depth"], hp["min_samples_split"], None, seed)
        return TrainedModel("tree", t, p, {"nodes": t.node_count})
    if spec.family == "forest":
        trees = tree.grow_forest(
            X, y, hp["n_trees"], hp["bootstrap"], hp["max_features"], hp["max_depth"], hp["min_samples_split"], seed
        )
        return TrainedModel("forest", trees, p, {"trees": len(trees)})
    params = mlp.fit_mlp(X, y, hp["hidden"], hp["epochs"], hp["batch_size"], hp["learning_rate"], seed)
    return TrainedModel("mlp", params, p, {"epochs": hp["epochs"]})


def predict(model: TrainedModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} columns, got shape {X.shape}")
    if model.family == "logistic":
        return logistic.predict_logistic(*model.params, X)
    if model.family == "tree":
        return model.params.predict(X)
    if model.family == "forest":
        return tree.forest_predict(model.params, X)
    return mlp.predict_mlp(model.params, X)


def accuracy_of(predictions, y) -> EvalResult:
    pred = np.asarray(predictions)
    y = np.asarray(y)
    if y.size == 0:
        raise InsufficientDataError("cannot evaluate on zero rows")
    if pred.shape != y.shape:
        raise ShapeError("predictions and labels differ in length")
    correct = int(np.count_nonzero(pred == y))
    acc = correct / y.size
    return EvalResult(acc, 1.0 - acc, int(y.size))


def evaluate(model: TrainedModel, X, y) -> EvalResult:
    y = np.asarray(y)
    if y.size == 0:
        raise InsufficientDataError("cannot evaluate on zero rows")
    return accuracy_of(predict(model, X), y)


__all__ = [
    "FAMILIES",
    "DEFAULT_HYPERPARAMETERS",
    "LearnerSpec",
    "TrainedModel",
    "EvalResult",
    "default_specs",
    "train",
    "predict",
    "evaluate",
    "accuracy_of",
]
