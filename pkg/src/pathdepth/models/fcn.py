"""Single-hidden-layer fully connected network, written from scratch.

Architecture: 256 ReLU units, inverted dropout of 20% after the hidden
layer (training only), Adam on an MSE loss, batches of 8192, a random 80/20
train/validation split and at most 20 epochs, keeping the weights of the
best-validation epoch. Inputs are standardized with statistics of the
training split; everything runs in float64 and is bit-for-bit reproducible
for a fixed seed.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..errors import DegenerateFeatureWarning, InsufficientRows
from ._validation import check_feature_matrix, check_target


def loss_and_gradients(W1, b1, W2, b2, X_std, y, dropout_mask=None):
    """MSE loss and its analytic gradients for one batch.

    X_std is the standardized input batch; ``dropout_mask`` (already scaled
    by 1/keep) multiplies the hidden activations when given. Returns
    ``(loss, grad_W1, grad_b1, grad_W2, grad_b2)``.
    """
    z1 = X_std @ W1.T + b1
    hidden = np.maximum(z1, 0.0)
    dropped = hidden if dropout_mask is None else hidden * dropout_mask
    prediction = dropped @ W2 + b2
    residual = prediction - y
    loss = float(np.mean(residual ** 2))

    d_pred = 2.0 * residual / len(y)
    grad_W2 = dropped.T @ d_pred
    grad_b2 = float(d_pred.sum())
    d_hidden = np.outer(d_pred, W2)
    if dropout_mask is not None:
        d_hidden = d_hidden * dropout_mask
    d_z1 = d_hidden * (z1 > 0.0)
    grad_W1 = d_z1.T @ X_std
    grad_b1 = d_z1.sum(axis=0)
    return loss, grad_W1, grad_b1, grad_W2, grad_b2


class _Adam:
    """Adam state for one parameter array (or scalar)."""

    def __init__(self, shape, lr, beta1, beta2, eps):
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps

    def step(self, param, grad, t):
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad ** 2
        m_hat = self.m / (1.0 - self.beta1 ** t)
        v_hat = self.v / (1.0 - self.beta2 ** t)
        return param - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


class FullyConnectedNetwork(RegressorMixin, BaseEstimator):
    """One-hidden-layer ReLU regressor for path loss.

    X columns follow the feature configuration: (d, f), (d, f, o) or
    (d, f, t, c). Weights use He-uniform initialization from the seeded
    generator; the output bias starts at the training-target mean so the
    network only has to learn the structure around it.
    """

    def __init__(self, n_features: int = 2, hidden_units: int = 256,
                 dropout_rate: float = 0.2, epochs: int = 20,
                 batch_size: int = 8192, learning_rate: float = 0.001,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 validation_fraction: float = 0.2, random_state: int = 0):
        self.n_features = n_features
        self.hidden_units = hidden_units
        self.dropout_rate = dropout_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _validate_params(self):
        if self.n_features not in (2, 3, 4):
            raise ValueError(f"n_features must be 2, 3 or 4, "
                             f"got {self.n_features!r}")
        if self.hidden_units < 1:
            raise ValueError("hidden_units must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")

    def fit(self, X, y):
        self._validate_params()
        X = check_feature_matrix(X, self.n_features)
        y = check_target(y, len(X))
        n = len(X)
        if n < 2:
            raise InsufficientRows(
                "need at least 2 rows for a train/validation split")

        rng = np.random.default_rng(self.random_state)
        perm = rng.permutation(n)
        n_val = int(round(n * self.validation_fraction))
        n_val = min(max(n_val, 1), n - 1)
        val_idx, train_idx = perm[:n_val], perm[n_val:]

        mean = X[train_idx].mean(axis=0)
        std = X[train_idx].std(axis=0)
        degenerate = std == 0.0
        if degenerate.any():
            warnings.warn(DegenerateFeatureWarning(
                f"zero-variance feature column(s) "
                f"{np.nonzero(degenerate)[0].tolist()}; std set to 1"))
            std = np.where(degenerate, 1.0, std)
        X_train = (X[train_idx] - mean) / std
        X_val = (X[val_idx] - mean) / std
        y_train, y_val = y[train_idx], y[val_idx]

        dim, h = self.n_features, self.hidden_units
        W1 = rng.uniform(-np.sqrt(6.0 / dim), np.sqrt(6.0 / dim), (h, dim))
        b1 = np.zeros(h)
        W2 = rng.uniform(-np.sqrt(6.0 / h), np.sqrt(6.0 / h), h)
        b2 = float(y_train.mean())

        opts = {
            "W1": _Adam((h, dim), self.learning_rate, self.beta1, self.beta2,
                        self.eps),
            "b1": _Adam(h, self.learning_rate, self.beta1, self.beta2,
                        self.eps),
            "W2": _Adam(h, self.learning_rate, self.beta1, self.beta2,
                        self.eps),
            "b2": _Adam((), self.learning_rate, self.beta1, self.beta2,
                        self.eps),
        }

        best = None
        val_path = []
        t = 0
        n_train = len(train_idx)
        for epoch in range(1, self.epochs + 1):
            order = rng.permutation(n_train)
            for start in range(0, n_train, self.batch_size):
                batch = order[start:start + self.batch_size]
                mask = None
                if self.dropout_rate > 0.0:
                    keep = 1.0 - self.dropout_rate
                    mask = ((rng.random((len(batch), h)) >= self.dropout_rate)
                            / keep)
                _, gW1, gb1, gW2, gb2 = loss_and_gradients(
                    W1, b1, W2, b2, X_train[batch], y_train[batch], mask)
                t += 1
                W1 = opts["W1"].step(W1, gW1, t)
                b1 = opts["b1"].step(b1, gb1, t)
                W2 = opts["W2"].step(W2, gW2, t)
                b2 = float(opts["b2"].step(b2, gb2, t))
            val_pred = np.maximum(X_val @ W1.T + b1, 0.0) @ W2 + b2
            val_mse = float(np.mean((val_pred - y_val) ** 2))
            val_path.append(val_mse)
            if best is None or val_mse < best[0]:
                best = (val_mse, epoch, W1.copy(), b1.copy(), W2.copy(), b2)

        _, self.best_epoch_, self.W1_, self.b1_, self.W2_, self.b2_ = best
        self.val_mse_path_ = val_path
        self.scaler_mean_ = mean
        self.scaler_std_ = std
        self.n_features_in_ = self.n_features
        return self

    def predict(self, X):
        if not hasattr(self, "W1_"):
            raise NotFittedError("FullyConnectedNetwork is not fitted")
        X = check_feature_matrix(X, self.n_features)
        X_std = (X - self.scaler_mean_) / self.scaler_std_
        hidden = np.maximum(X_std @ self.W1_.T + self.b1_, 0.0)
        return hidden @ self.W2_ + self.b2_
