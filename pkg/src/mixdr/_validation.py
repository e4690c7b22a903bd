"""Input validation helpers shared by the estimators."""

import numpy as np

from .errors import DimensionMismatchError, InputError


def check_matrix(X, name="X", min_rows=1):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise InputError(f"{name} must be a 2-D matrix, got ndim={X.ndim}")
    if X.shape[0] < min_rows:
        raise InputError(f"{name} needs at least {min_rows} rows")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite values")
    return X


def check_X_y(X, y):
    X = check_matrix(X)
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise DimensionMismatchError(
            f"y has length {y.shape}, expected ({X.shape[0]},)")
    return X, y


def check_dimension(X, p, name="x"):
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != p:
        raise DimensionMismatchError(
            f"{name} has dimension {X.shape[-1]}, expected {p}")
    return X
