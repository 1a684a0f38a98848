import numpy as np
import pytest

from suffstat import learners
from suffstat.errors import DegenerateLabelError, InsufficientDataError, ShapeError, ValidationError
from suffstat.ingest import stratified_split
from suffstat.learners import LearnerSpec, TrainedModel, evaluate, predict, train
from suffstat.learners import logistic, mlp, tree
from suffstat.synth import separable_dataset


def _separable(n_features=1, seed=0):
    X, y = separable_dataset(1000, margin=1.0, n_features=n_features, seed=seed)
    sp = stratified_split(np.arange(len(y)), y, 0.8, seed=seed + 1)
    tr, va = np.asarray(sp.train_indices), np.asarray(sp.valid_indices)
    return X[tr], y[tr], X[va], y[va]


@pytest.mark.parametrize("family", learners.FAMILIES)
@pytest.mark.parametrize("n_features", [1, 3])
def test_separable_accuracy(family, n_features):
    Xtr, ytr, Xva, yva = _separable(n_features)
    model = train(LearnerSpec(family), Xtr, ytr, seed=5)
    assert evaluate(model, Xva, yva).accuracy >= 0.95


def test_separable_generator():
    X, y = separable_dataset(1000, margin=1.0, seed=2)
    assert X.shape == (1000, 1)
    assert y.sum() == 500
    assert np.all((X[:, 0] > 0) == (y == 1))
    assert np.abs(X[:, 0]).min() >= 0.5


def test_tree_memorizes_distinct_rows():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(300, 4))
    y = rng.integers(0, 2, 300)
    model = train(LearnerSpec("tree", {"max_depth": None}), X, y)
    assert evaluate(model, X, y).accuracy == 1.0


@pytest.mark.parametrize("family", learners.FAMILIES)
def test_same_seed_same_bytes(family):
    rng = np.random.default_rng(1)
    X = rng.normal(size=(120, 3))
    y = (X[:, 0] + 0.5 * rng.normal(size=120) > 0).astype(int)
    spec = LearnerSpec(family, {"epochs": 20} if family == "mlp" else {})
    a, b = train(spec, X, y, seed=9), train(spec, X, y, seed=9)
    assert a.to_json() == b.to_json()
    back = TrainedModel.from_json(a.to_json())
    np.testing.assert_array_equal(predict(back, X), predict(a, X))


def test_forest_of_one_tree_equals_tree():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(200, 5))
    y = (X[:, 0] * X[:, 1] + 0.3 * rng.normal(size=200) > 0).astype(int)
    t = train(LearnerSpec("tree"), X, y, seed=0)
    f = train(LearnerSpec("forest", {"n_trees": 1, "bootstrap": False, "max_features": "all"}), X, y, seed=3)
    Xq = rng.normal(size=(500, 5))
    np.testing.assert_array_equal(predict(t, Xq), predict(f, Xq))


def test_forest_vote_tie_goes_to_one():
    X = np.array([[0.0], [1.0]])
    y = np.array([0, 1])
    t0 = tree.grow_tree(X, y)
    # a second tree with inverted leaves
    t1 = tree.Tree(t0.feature, t0.threshold, t0.left, t0.right, t0.n, t0.n - t0.pos)
    np.testing.assert_array_equal(tree.forest_predict([t0, t1], X), [1, 1])


def test_zero_weight_logistic_predicts_one():
    model = TrainedModel("logistic", (np.zeros(3), 0.0), 3)
    np.testing.assert_array_equal(predict(model, np.random.default_rng(0).normal(size=(7, 3))), np.ones(7))


def test_stump_predicts_majority():
    X = np.zeros((5, 2))
    y = np.array([1, 0, 0, 1, 0])
    model = train(LearnerSpec("tree"), X, y)
    assert model.params.node_count == 1
    np.testing.assert_array_equal(predict(model, X), np.zeros(5))


def test_evaluate_examples():
    y = np.array([1, 0, 1, 1])
    r = learners.accuracy_of(y, y)
    assert (r.accuracy, r.error) == (1.0, 0.0)
    assert learners.accuracy_of(1 - y, y).accuracy == 0.0
    r = learners.accuracy_of([1, 0, 1, 0], y)
    assert r.accuracy == 0.75 and r.error == 0.25
    model = TrainedModel("logistic", (np.zeros(1), 0.0), 1)
    with pytest.raises(InsufficientDataError):
        evaluate(model, np.zeros((0, 1)), np.zeros(0))


def test_train_errors():
    X = np.random.default_rng(0).normal(size=(6, 2))
    with pytest.raises(DegenerateLabelError):
        train(LearnerSpec("logistic"), X, np.zeros(6))
    bad = X.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValidationError):
        train(LearnerSpec("tree"), bad, [0, 1, 0, 1, 0, 1])
    model = train(LearnerSpec("logistic"), X, [0, 1, 0, 1, 0, 1])
    with pytest.raises(ShapeError):
        predict(model, np.zeros((2, 3)))


def test_spec_validation():
    with pytest.raises(ValidationError):
        LearnerSpec("svm")
    with pytest.raises(ValidationError):
        LearnerSpec("mlp", {"hidden": 0})
    with pytest.raises(ValidationError):
        LearnerSpec("tree", {"depth": 3})
    assert LearnerSpec("forest").hyperparameters["n_trees"] == 100


@pytest.mark.parametrize("seed", range(5))
def test_logistic_loss_non_increasing(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(150, 4)) * rng.uniform(0.1, 10, 4)
    y = (rng.random(150) < 0.4).astype(int)
    _, _, losses, _ = logistic.fit_logistic(X, y)
    assert len(losses) > 1
    assert all(b <= a for a, b in zip(losses, losses[1:]))


def _rel_err(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_mlp_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(6, 3))
    y = rng.integers(0, 2, 6).astype(float)
    params = mlp.init_params(3, 4, rng)
    _, grads = mlp.loss_and_grads(params, X, y)
    h = 1e-6
    for name in ("W1", "b1", "W2"):
        arr = params[name]
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            up = mlp.loss(params, X, y)
            arr[idx] = old - h
            down = mlp.loss(params, X, y)
            arr[idx] = old
            numeric = (up - down) / (2 * h)
            if abs(numeric) < 1e-7 and abs(grads[name][idx]) < 1e-7:
                continue
            assert _rel_err(grads[name][idx], numeric) < 1e-4, (name, idx)
    b2 = params["b2"]
    up = mlp.loss({**params, "b2": b2 + h}, X, y)
    down = mlp.loss({**params, "b2": b2 - h}, X, y)
    assert _rel_err(grads["b2"], (up - down) / (2 * h)) < 1e-4


def test_compiled_epoch_matches_reference_step():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(8, 3))
    y = rng.integers(0, 2, 8).astype(float)
    params = mlp.init_params(3, 5, rng)
    ref = mlp.sgd_step(params, X, y, 0.05)
    W1, b1, W2 = params["W1"].copy(), params["b1"].copy(), params["W2"].copy()
    b2 = np.array([params["b2"]])
    mlp._sgd_epoch(X, y, np.arange(8), W1, b1, W2, b2, 8, 0.05)
    np.testing.assert_allclose(W1, ref["W1"], atol=1e-14)
    np.testing.assert_allclose(b1, ref["b1"], atol=1e-14)
    np.testing.assert_allclose(W2, ref["W2"], atol=1e-14)
    assert b2[0] == pytest.approx(ref["b2"], abs=1e-14)
