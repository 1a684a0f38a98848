"""CART classification trees (Gini impurity) and bagged random forests.

Trees are grown by a compiled depth-first builder. Every candidate split
is scanned exactly (midpoints between consecutive distinct values), so a
tree of unlimited depth memorizes any conflict-free training set.
Feature subsampling for forests draws from a small in-kernel splitmix64
generator so the grown tree depends only on (data, seed).
"""

from __future__ import annotations

import math

import numba
import numpy as np

UNLIMITED = -1


@numba.njit(cache=True)
def _splitmix_next(state):
    z = state[0] + np.uint64(0x9E3779B97F4A7C15)
    state[0] = z
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _rand_below(state, bound):
    return np.int64(_splitmix_next(state) % np.uint64(bound))


@numba.njit(cache=True)
def _best_split(X, y, work, start, end, n_pos, feat_order, max_features, state, sample_features):
    """Search the node's rows ``work[start:end]`` for the lowest weighted Gini."""
    n = end - start
    p = X.shape[1]
    best_feat = -1
    best_thr = 0.0
    best_cost = np.inf
    xs = np.empty(n)
    ys = np.empty(n, dtype=np.int64)
    for j in range(p):
        feat_order[j] = j
    visited = 0
    for t in range(p):
        if sample_features:
            if visited >= max_features:
                break
            r = t + _rand_below(state, p - t)
            tmp = feat_order[t]
            feat_order[t] = feat_order[r]
            feat_order[r] = tmp
        f = feat_order[t]
        for i in range(n):
            xs[i] = X[work[start + i], f]
        order = np.argsort(xs)
        lo = xs[order[0]]
        hi = xs[order[n - 1]]
        if lo == hi:
            continue
        visited += 1
        for i in range(n):
            ys[i] = y[work[start + order[i]]]
        left_pos = 0
        for i in range(1, n):
            left_pos += ys[i - 1]
            a = xs[order[i - 1]]
            b = xs[order[i]]
            if a == b:
                continue
            nl = i
            nr = n - i
            right_pos = n_pos - left_pos
            # n_child * gini(child) = n_child - (pos^2 + neg^2) / n_child
            cost = (nl - (left_pos * left_pos + (nl - left_pos) * (nl - left_pos)) / nl) + (
                nr - (right_pos * right_pos + (nr - right_pos) * (nr - right_pos)) / nr
            )
            if cost < best_cost:
                best_cost = cost
                best_feat = f
                thr = (a + b) / 2.0
                if thr == b:
                    thr = a
                best_thr = thr
    return best_feat, best_thr


@numba.njit(cache=True)
def _grow(X, y, sample, max_depth, min_split, max_features, seed):
    n = sample.shape[0]
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    n_node = np.zeros(cap, dtype=np.int64)
    pos_node = np.zeros(cap, dtype=np.int64)
    depth_node = np.zeros(cap, dtype=np.int64)
    start_node = np.zeros(cap, dtype=np.int64)

    work = sample.copy()
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    feat_order = np.empty(X.shape[1], dtype=np.int64)
    sample_features = max_features < X.shape[1]

    count = 1
    start_node[0] = 0
    n_node[0] = n
    stack = np.empty(cap, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    while top > 0:
        top -= 1
        node = stack[top]
        s = start_node[node]
        m = n_node[node]
        pos = 0
        for i in range(s, s + m):
            pos += y[work[i]]
        pos_node[node] = pos
        if pos == 0 or pos == m or m < min_split:
            continue
        if max_depth >= 0 and depth_node[node] >= max_depth:
            continue
        f, thr = _best_split(X, y, work, s, s + m, pos, feat_order, max_features, state, sample_features)
        if f < 0:
            continue
        # partition work[s:s+m] so rows with x <= thr come first
        i = s
        j = s + m - 1
        while i <= j:
            if X[work[i], f] <= thr:
                i += 1
            else:
                tmp = work[i]
                work[i] = work[j]
                work[j] = tmp
                j -= 1
        n_left = i - s
        feature[node] = f
        threshold[node] = thr
        lc = count
        rc = count + 1
        count += 2
        left[node] = lc
        right[node] = rc
        start_node[lc] = s
        n_node[lc] = n_left
        depth_node[lc] = depth_node[node] + 1
        start_node[rc] = s + n_left
        n_node[rc] = m - n_left
        depth_node[rc] = depth_node[node] + 1
        # push right first so the left subtree is expanded first
        stack[top] = rc
        top += 1
        stack[top] = lc
        top += 1
    return (
        feature[:count].copy(),
        threshold[:count].copy(),
        left[:count].copy(),
        right[:count].copy(),
        n_node[:count].copy(),
        pos_node[:count].copy(),
    )


class Tree:
    """Fitted tree in flat-array form.

    Node ``i`` is a leaf when ``feature[i] == -1``; rows with
    ``x[feature] <= threshold`` go to ``left``.
    """

    __slots__ = ("feature", "threshold", "left", "right", "n", "pos")

    def __init__(self, feature, threshold, left, right, n, pos):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.n = np.asarray(n, dtype=np.int64)
        self.pos = np.asarray(pos, dtype=np.int64)

    @property
    def node_count(self) -> int:
        return self.feature.size

    def leaf_index(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return node
            go_left = X[rows, np.where(inner, feat, 0)] <= self.threshold[node]
            node = np.where(inner, np.where(go_left, self.left[node], self.right[node]), node)

    def predict(self, X) -> np.ndarray:
        leaf = self.leaf_index(X)
        # majority of the leaf; a tie goes to label 1
        return (2 * self.pos[leaf] >= self.n[leaf]).astype(np.int8)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "n": self.n.tolist(),
            "pos": self.pos.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(d["feature"], d["threshold"], d["left"], d["right"], d["n"], d["pos"])


def grow_tree(X, y, sample=None, max_depth=10, min_samples_split=2, max_features=None, seed=0) -> Tree:
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if sample is None:
        sample = np.arange(X.shape[0], dtype=np.int64)
    p = X.shape[1]
    mf = p if max_features is None else int(min(max(max_features, 1), p))
    depth = UNLIMITED if max_depth is None else int(max_depth)
    parts = _grow(X, y, np.asarray(sample, dtype=np.int64), depth, int(min_samples_split), mf, np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    return Tree(*parts)


def forest_max_features(p: int, rule) -> int:
    if rule is None or rule == "all":
        return p
    if rule == "sqrt":
        return max(1, math.ceil(math.sqrt(p)))
    return int(rule)


def grow_forest(X, y, n_trees=100, bootstrap=True, max_features="sqrt", max_depth=10, min_samples_split=2, seed=0):
    """Bag ``n_trees`` trees; tree ``i`` draws everything from seed (seed, i)."""
    X = np.ascontiguousarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n, p = X.shape
    mf = forest_max_features(p, max_features)
    trees = []
    for i in range(n_trees):
        ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, i])
        tree_seed = int(ss.generate_state(1, dtype=np.uint64)[0])
        if bootstrap:
            sample = np.random.default_rng(ss).integers(0, n, size=n)
        else:
            sample = np.arange(n)
        trees.append(grow_tree(X, y, sample, max_depth, min_samples_split, mf, tree_seed))
    return trees


def forest_predict(trees, X) -> np.ndarray:
    votes = np.zeros(np.asarray(X).shape[0], dtype=np.int64)
    for t in trees:
        votes += t.predict(X)
    return (2 * votes >= len(trees)).astype(np.int8)
