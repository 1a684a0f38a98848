"""Binary logistic regression fit by full-batch gradient descent."""

from __future__ import annotations

import numpy as np


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def cross_entropy(w, b, X, y) -> float:
    z = X @ w + b
    # log(1 + e^z) - y*z, computed stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def fit_logistic(X, y, learning_rate=0.1, max_iter=1000, tol=1e-6):
    """Gradient descent on mean cross-entropy from zero weights.

    A step that would raise the loss is retried at half the step size, so
    the recorded loss history never increases. Stops when the loss drops
    by less than ``tol``.

    Returns ``(w, b, losses, converged)``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    w = np.zeros(p)
    b = 0.0
    lr = float(learning_rate)
    loss = cross_entropy(w, b, X, y)
    losses = [loss]
    converged = False
    for _ in range(max_iter):
        r = sigmoid(X @ w + b) - y
        gw = X.T @ r / n
        gb = float(r.mean())
        while True:
            w_new = w - lr * gw
            b_new = b - lr * gb
            new_loss = cross_entropy(w_new, b_new, X, y)
            if new_loss <= loss or lr < 1e-12:
                break
            lr *= 0.5
        if new_loss > loss:
            converged = True
            break
        w, b = w_new, b_new
        delta = loss - new_loss
        loss = new_loss
        losses.append(loss)
        if delta < tol:
            converged = True
            break
    return w, b, losses, converged


def predict_logistic(w, b, X):
    # p >= 0.5 <=> z >= 0; a tie goes to label 1
    return (np.asarray(X, dtype=float) @ w + b >= 0).astype(np.int8)
