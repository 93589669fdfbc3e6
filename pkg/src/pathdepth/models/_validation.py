"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from ..errors import NonPositiveInput


def check_feature_matrix(X, n_features: int | None = None) -> np.ndarray:
    """Coerce X to a finite 2D float64 array, checking the column count."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"X must be 2D, got shape {X.shape}")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"X has {X.shape[1]} columns, expected {n_features}")
    if X.size and not np.isfinite(X).all():
        raise ValueError("X contains non-finite values")
    return X


def check_target(y, n_samples: int) -> np.ndarray:
    """Coerce y to a finite 1D float64 array of the expected length."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size != n_samples:
        raise ValueError(f"y has {y.size} values, expected {n_samples}")
    if y.size and not np.isfinite(y).all():
        raise ValueError("y contains non-finite values")
    return y


def check_distance_frequency_positive(X: np.ndarray) -> None:
    """Columns 0 (distance) and 1 (frequency) must be strictly positive."""
    if X.size and not (X[:, :2] > 0).all():
        raise NonPositiveInput("distance and frequency must be > 0")
