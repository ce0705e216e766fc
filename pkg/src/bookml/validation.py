"""Input validation helpers shared by the estimators."""

import numpy as np
from scipy import sparse as sp

from .errors import DataError
from .vectors import FeatureVector, stack_vectors


def as_feature_matrix(X):
    """Coerce estimator input into a 2-d float64 ndarray or CSR matrix.

    Accepts ndarrays, CSR/CSC matrices, nested sequences, a list of
    FeatureVectors, or a single FeatureVector (treated as one row).
    """
    if isinstance(X, FeatureVector):
        return X.to_dense().reshape(1, -1)
    if sp.issparse(X):
        out = X.tocsr()
        if out.dtype != np.float64:
            out = out.astype(np.float64)
        if out.ndim != 2:
            raise DataError("sparse input must be 2-d")
        return out
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], FeatureVector):
        return stack_vectors(X)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DataError(f"expected a 2-d feature matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DataError("feature matrix contains non-finite values")
    return arr


def as_label_array(y, n_rows=None):
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DataError("labels must be 1-d")
    if arr.size and not np.all(arr == arr.astype(np.int64)):
        raise DataError("labels must be integers")
    arr = arr.astype(np.int64)
    if n_rows is not None and arr.shape[0] != n_rows:
        raise DataError(f"label count {arr.shape[0]} does not match row count {n_rows}")
    return arr


def check_labels_in_range(y, num_classes):
    if y.size == 0:
        raise DataError("empty label array")
    if y.min() < 0 or y.max() >= num_classes:
        raise DataError(f"labels must lie in [0, {num_classes})")


def check_matching_dim(model_dim, X):
    if X.shape[1] != model_dim:
        raise DataError(f"feature dimension {X.shape[1]} does not match model dimension {model_dim}")


def num_rows(X):
    return X.shape[0]


def row_scores(X, W, b):
    """X @ W.T + b for dense or CSR X; always returns a dense ndarray."""
    scores = X @ W.T
    if sp.issparse(scores):
        scores = scores.toarray()
    return np.asarray(scores) + b


def take_rows(X, idx):
    """Row subset for ndarray / CSR / 1-d arrays; used by resampling code."""
    if sp.issparse(X):
        return X[idx]
    return np.asarray(X)[idx]
