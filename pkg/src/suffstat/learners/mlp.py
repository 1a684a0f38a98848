"""One-hidden-layer ReLU network with a sigmoid output, trained by
mini-batch gradient descent on cross-entropy."""

from __future__ import annotations

import numba
import numpy as np


def init_params(n_in, n_hidden, rng):
    b1 = 1.0 / np.sqrt(n_in)
    b2 = 1.0 / np.sqrt(n_hidden)
    return {
        "W1": rng.uniform(-b1, b1, size=(n_in, n_hidden)),
        "b1": rng.uniform(-b1, b1, size=n_hidden),
        "W2": rng.uniform(-b2, b2, size=n_hidden),
        "b2": float(rng.uniform(-b2, b2)),
    }


def forward(params, X):
    h_pre = X @ params["W1"] + params["b1"]
    h = np.maximum(h_pre, 0.0)
    z = h @ params["W2"] + params["b2"]
    return h_pre, h, z


def loss(params, X, y) -> float:
    _, _, z = forward(params, X)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def loss_and_grads(params, X, y):
    """Mean cross-entropy and its gradient with respect to every parameter."""
    h_pre, h, z = forward(params, X)
    n = X.shape[0]
    value = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (1.0 / (1.0 + np.exp(-z)) - y) / n
    dh = np.outer(dz, params["W2"]) * (h_pre > 0)
    grads = {
        "W1": X.T @ dh,
        "b1": dh.sum(axis=0),
        "W2": h.T @ dz,
        "b2": float(dz.sum()),
    }
    return value, grads


@numba.njit(cache=True)
def _sgd_epoch(X, y, order, W1, b1, W2, b2, batch_size, lr):
    """One pass of mini-batch updates; the same arithmetic as loss_and_grads."""
    n, p = X.shape
    hidden = W1.shape[1]
    for s in range(0, n, batch_size):
        e = min(s + batch_size, n)
        m = e - s
        Xb = np.empty((m, p))
        yb = np.empty(m)
        for i in range(m):
            Xb[i] = X[order[s + i]]
            yb[i] = y[order[s + i]]
        h_pre = Xb @ W1 + b1
        h = np.maximum(h_pre, 0.0)
        z = h @ W2 + b2[0]
        dz = (1.0 / (1.0 + np.exp(-z)) - yb) / m
        dh = np.empty((m, hidden))
        for i in range(m):
            for k in range(hidden):
                dh[i, k] = dz[i] * W2[k] if h_pre[i, k] > 0 else 0.0
        gW1 = Xb.T.copy() @ dh
        gb1 = dh.sum(axis=0)
        gW2 = h.T.copy() @ dz
        gb2 = dz.sum()
        W1 -= lr * gW1
        b1 -= lr * gb1
        W2 -= lr * gW2
        b2[0] -= lr * gb2


def fit_mlp(X, y, hidden=32, epochs=200, batch_size=32, learning_rate=0.01, seed=0):
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    rng = np.random.default_rng(seed)
    params = init_params(X.shape[1], hidden, rng)
    W1 = np.ascontiguousarray(params["W1"])
    b1, W2 = params["b1"].copy(), params["W2"].copy()
    b2 = np.array([params["b2"]])
    for _ in range(epochs):
        order = rng.permutation(X.shape[0])
        _sgd_epoch(X, y, order, W1, b1, W2, b2, batch_size, float(learning_rate))
    return {"W1": W1, "b1": b1, "W2": W2, "b2": float(b2[0])}


def sgd_step(params, X, y, learning_rate):
    """Reference single update in plain numpy (used to check the compiled loop)."""
    _, g = loss_and_grads(params, X, y)
    return {k: params[k] - learning_rate * g[k] for k in params}


def predict_mlp(params, X):
    _, _, z = forward(params, np.asarray(X, dtype=float))
    return (z >= 0).astype(np.int8)
