"""Gradient boosted regression trees, written from scratch.

Squared-error boosting: the base prediction is the target mean and each
round fits one shallow binary tree to the current residuals by exact greedy
split search (candidate thresholds are midpoints between consecutive
distinct sorted feature values; rows with feature < threshold go left,
>= goes right). Leaf values carry L2 shrinkage, value = sum(residual) /
(count + l2_lambda), and enter the prediction scaled by the learning rate.
Fitting is deterministic given the input order. With this update the
training RMSE is nonincreasing every round.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..errors import EmptyTraining
from ._validation import check_feature_matrix, check_target

MAX_TREES = 100
MAX_TREE_DEPTH = 2


@dataclass(frozen=True)
class Leaf:
    value: float


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Split | Leaf"
    right: "Split | Leaf"


def tree_depth(node) -> int:
    """Number of split levels below (and including) this node."""
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def tree_apply(node, X: np.ndarray) -> np.ndarray:
    """Evaluate one tree over all rows of X."""
    if isinstance(node, Leaf):
        return np.full(len(X), node.value)
    out = np.empty(len(X))
    go_left = X[:, node.feature] < node.threshold
    out[go_left] = tree_apply(node.left, X[go_left])
    out[~go_left] = tree_apply(node.right, X[~go_left])
    return out


def _best_split(X: np.ndarray, residual: np.ndarray, l2: float):
    """Exact greedy search; returns (gain, feature, threshold) or None."""
    n = len(residual)
    total = residual.sum()
    parent_score = total * total / (n + l2)
    best = None
    for feature in range(X.shape[1]):
        values = X[:, feature]
        order = np.argsort(values, kind="stable")
        sorted_values = values[order]
        prefix = np.cumsum(residual[order])
        boundaries = np.nonzero(np.diff(sorted_values) > 0)[0]
        if boundaries.size == 0:
            continue
        n_left = boundaries + 1
        sum_left = prefix[boundaries]
        sum_right = total - sum_left
        n_right = n - n_left
        gains = (sum_left ** 2 / (n_left + l2)
                 + sum_right ** 2 / (n_right + l2) - parent_score)
        k = int(np.argmax(gains))
        if best is None or gains[k] > best[0]:
            threshold = (sorted_values[boundaries[k]]
                         + sorted_values[boundaries[k] + 1]) / 2.0
            best = (float(gains[k]), feature, float(threshold))
    if best is None or not best[0] > 0.0:
        return None
    return best


class GradientBoostedTrees(RegressorMixin, BaseEstimator):
    """Boosted shallow-tree regressor for path loss.

    Parameters mirror the documented defaults of mainstream boosted-tree
    libraries (learning_rate 0.3, l2_lambda 1.0) except the base prediction,
    which is the target mean rather than a fixed constant; path-loss targets
    sit near 160 dB, so a constant 0.5 base would waste most of the rounds.
    ``random_state`` is accepted for interface parity with the other
    estimators; fitting itself is deterministic and uses no randomness.
    """

    def __init__(self, n_features: int = 2, n_trees: int = MAX_TREES,
                 max_depth: int = MAX_TREE_DEPTH, learning_rate: float = 0.3,
                 l2_lambda: float = 1.0, random_state: int = 0):
        self.n_features = n_features
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.l2_lambda = l2_lambda
        self.random_state = random_state

    def _validate_params(self):
        if self.n_features not in (2, 3, 4):
            raise ValueError(f"n_features must be 2, 3 or 4, "
                             f"got {self.n_features!r}")
        if not 1 <= self.n_trees <= MAX_TREES:
            raise ValueError(f"n_trees must be in [1, {MAX_TREES}]")
        if not 1 <= self.max_depth <= MAX_TREE_DEPTH:
            raise ValueError(f"max_depth must be in [1, {MAX_TREE_DEPTH}]")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")

    def _grow(self, X: np.ndarray, residual: np.ndarray,
              idx: np.ndarray, depth: int):
        node_residual = residual[idx]
        if depth >= self.max_depth or idx.size < 2:
            return Leaf(float(node_residual.sum()
                              / (idx.size + self.l2_lambda)))
        found = _best_split(X[idx], node_residual, self.l2_lambda)
        if found is None:
            return Leaf(float(node_residual.sum()
                              / (idx.size + self.l2_lambda)))
        _, feature, threshold = found
        go_left = X[idx, feature] < threshold
        return Split(feature=feature, threshold=threshold,
                     left=self._grow(X, residual, idx[go_left], depth + 1),
                     right=self._grow(X, residual, idx[~go_left], depth + 1))

    def fit(self, X, y):
        self._validate_params()
        X = check_feature_matrix(X, self.n_features)
        y = check_target(y, len(X))
        if len(X) == 0:
            raise EmptyTraining("cannot fit boosted trees on zero rows")

        self.base_prediction_ = float(y.mean())
        prediction = np.full(len(X), self.base_prediction_)
        trees = []
        rmse_path = []
        all_idx = np.arange(len(X))
        for _ in range(self.n_trees):
            residual = y - prediction
            tree = self._grow(X, residual, all_idx, depth=0)
            trees.append(tree)
            prediction = prediction + self.learning_rate * tree_apply(tree, X)
            rmse_path.append(float(np.sqrt(np.mean((y - prediction) ** 2))))
        self.trees_ = trees
        self.train_rmse_path_ = rmse_path
        self.n_features_in_ = self.n_features
        return self

    def predict(self, X):
        if not hasattr(self, "trees_"):
            raise NotFittedError("GradientBoostedTrees is not fitted")
        X = check_feature_matrix(X, self.n_features)
        out = np.full(len(X), self.base_prediction_)
        for tree in self.trees_:
            out = out + self.learning_rate * tree_apply(tree, X)
        return out
