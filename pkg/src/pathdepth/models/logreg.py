"""Log-linear path-loss regression.

Predicts ``A*log10(f) + B*log10(d) + intercept`` with one extra
``log10(depth)`` term per depth feature: the 3-input form adds
``C*log10(o)`` and the 4-input form ``C*log10(t) + D*log10(c)``. Depths of
zero (line-of-sight rows) are floored at ``depth_floor`` meters before the
log so they contribute exactly nothing to the depth terms at the default
floor of 1 m.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..errors import InsufficientRows, SingularDesignWarning
from ._validation import (
    check_distance_frequency_positive,
    check_feature_matrix,
    check_target,
)


class LogDistanceRegression(RegressorMixin, BaseEstimator):
    """Least-squares fit of path loss over log-transformed features.

    Parameters
    ----------
    n_features : 2, 3 or 4 input columns; X columns are (d, f), (d, f, o)
        or (d, f, t, c) with d in meters, f in MHz, depths in meters.
    depth_floor : lower clamp in meters applied to depths before log10.

    Attributes
    ----------
    coeffs_ : fitted coefficients ordered (log10 f, log10 d, depth terms...,
        intercept), i.e. A, B, ... with the intercept last.
    condition_number_ : condition number of the design matrix.
    """

    def __init__(self, n_features: int = 2, depth_floor: float = 1.0):
        self.n_features = n_features
        self.depth_floor = depth_floor

    def _validate_params(self):
        if self.n_features not in (2, 3, 4):
            raise ValueError(f"n_features must be 2, 3 or 4, "
                             f"got {self.n_features!r}")
        if not self.depth_floor > 0:
            raise ValueError("depth_floor must be > 0")

    def _design(self, X: np.ndarray) -> np.ndarray:
        cols = [np.log10(X[:, 1]), np.log10(X[:, 0])]
        for j in range(2, self.n_features):
            cols.append(np.log10(np.maximum(X[:, j], self.depth_floor)))
        cols.append(np.ones(len(X)))
        return np.column_stack(cols)

    def fit(self, X, y):
        self._validate_params()
        X = check_feature_matrix(X, self.n_features)
        y = check_target(y, len(X))
        n_coeffs = self.n_features + 1
        if len(X) < n_coeffs:
            raise InsufficientRows(
                f"need at least {n_coeffs} rows to fit {n_coeffs} "
                f"coefficients, got {len(X)}")
        check_distance_frequency_positive(X)

        design = self._design(X)
        coeffs, _, rank, sv = np.linalg.lstsq(design, y, rcond=None)
        cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
        if rank < design.shape[1]:
            warnings.warn(SingularDesignWarning(
                f"design matrix is rank-deficient (rank {rank} of "
                f"{design.shape[1]}, condition number {cond:.3g}); "
                f"returning the minimum-norm solution"))
        self.coeffs_ = coeffs
        self.condition_number_ = cond
        self.n_features_in_ = self.n_features
        return self

    def predict(self, X):
        if not hasattr(self, "coeffs_"):
            raise NotFittedError("LogDistanceRegression is not fitted")
        X = check_feature_matrix(X, self.n_features)
        check_distance_frequency_positive(X)
        return self._design(X) @ self.coeffs_
