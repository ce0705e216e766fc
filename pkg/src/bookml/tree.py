"""CART-style binary trees: impurity, quantile-binned split search, builders.

One split convention everywhere, including serialized form: a row goes left
iff feature value <= threshold. Candidate thresholds per feature are the
boundaries of up to max_bins equal-frequency bins; when a feature has at
most max_bins distinct values the candidates are exactly the midpoints
between consecutive distinct values, which is what the exhaustive-search
oracle in the tests enumerates.
"""

import numpy as np

from .base import BaseEstimator, check_is_fitted
from .errors import DataError
from .validation import as_feature_matrix, as_label_array, check_labels_in_range

# Positive-gain test allows for float noise in impurity bookkeeping.
MIN_GAIN = 1e-12


class TreeNode:
    """Internal split node or leaf; leaves hold a class distribution or score."""

    __slots__ = ("feature", "threshold", "left", "right", "gain", "n_samples", "prediction")

    def __init__(self, n_samples, feature=None, threshold=None, left=None,
                 right=None, gain=None, prediction=None):
        self.n_samples = int(n_samples)
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.gain = gain
        self.prediction = prediction

    @property
    def is_leaf(self):
        return self.feature is None

    def to_json(self):
        if self.is_leaf:
            pred = self.prediction
            if isinstance(pred, np.ndarray):
                pred = pred.tolist()
            return {"n": self.n_samples, "prediction": pred}
        return {
            "n": self.n_samples,
            "feature": int(self.feature),
            "threshold": float(self.threshold),
            "gain": float(self.gain),
            "left": self.left.to_json(),
            "right": self.right.to_json(),
        }

    @classmethod
    def from_json(cls, doc):
        if "feature" not in doc:
            pred = doc["prediction"]
            if isinstance(pred, list):
                pred = np.asarray(pred, dtype=np.float64)
            return cls(doc["n"], prediction=pred)
        return cls(
            doc["n"],
            feature=doc["feature"],
            threshold=doc["threshold"],
            gain=doc["gain"],
            left=cls.from_json(doc["left"]),
            right=cls.from_json(doc["right"]),
        )


def gini(counts):
    """Gini impurity 1 - sum(p^2) over class proportions."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if counts.size == 0 or total <= 0:
        raise DataError("gini needs at least one sample")
    if np.any(counts < 0):
        raise DataError("negative class count")
    p = counts / total
    return float(1.0 - (p**2).sum())


def candidate_thresholds(values, max_bins):
    """Split candidates for one feature: equal-frequency bin boundaries.

    Returns midpoints between the last value of one bin and the first of
    the next; collapses to all adjacent-distinct midpoints when the number
    of distinct values is at most max_bins.
    """
    distinct = np.unique(values)
    if distinct.shape[0] <= 1:
        return np.empty(0)
    if distinct.shape[0] <= max_bins:
        return (distinct[:-1] + distinct[1:]) / 2.0
    svals = np.sort(values)
    n = svals.shape[0]
    cuts = []
    for k in range(1, max_bins):
        i = n * k // max_bins
        if 0 < i < n and svals[i - 1] < svals[i]:
            cuts.append((svals[i - 1] + svals[i]) / 2.0)
    return np.unique(np.asarray(cuts))


def _split_gain_classification(values, y, num_classes, thresholds):
    """Weighted gini decrease for every candidate threshold (vectorized)."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sy = y[order]
    n = sv.shape[0]
    onehot = np.zeros((n, num_classes))
    onehot[np.arange(n), sy] = 1.0
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    parent = 1.0 - ((total / n) ** 2).sum()
    pos = np.searchsorted(sv, thresholds, side="right")
    valid = (pos >= 1) & (pos <= n - 1)
    pos = np.clip(pos, 1, n - 1)
    left = cum[pos - 1]
    right = total - left
    nl = pos.astype(np.float64)
    nr = n - nl
    gini_l = 1.0 - (left**2).sum(axis=1) / nl**2
    gini_r = 1.0 - (right**2).sum(axis=1) / nr**2
    gains = parent - (nl / n) * gini_l - (nr / n) * gini_r
    return np.where(valid, gains, -np.inf)


def _split_gain_regression(values, y, thresholds):
    """Variance decrease for every candidate threshold (vectorized)."""
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sy = y[order]
    n = sv.shape[0]
    cum = np.cumsum(sy)
    cum2 = np.cumsum(sy**2)
    parent = cum2[-1] / n - (cum[-1] / n) ** 2
    pos = np.searchsorted(sv, thresholds, side="right")
    valid = (pos >= 1) & (pos <= n - 1)
    pos = np.clip(pos, 1, n - 1)
    nl = pos.astype(np.float64)
    nr = n - nl
    sl, sl2 = cum[pos - 1], cum2[pos - 1]
    sr, sr2 = cum[-1] - sl, cum2[-1] - sl2
    var_l = sl2 / nl - (sl / nl) ** 2
    var_r = sr2 / nr - (sr / nr) ** 2
    gains = parent - (nl / n) * var_l - (nr / n) * var_r
    return np.where(valid, gains, -np.inf)


def best_split(X, y, feature_subset=None, max_bins=32, criterion="gini",
               num_classes=None, allow_zero_gain=False):
    """Best (feature, threshold, gain) over the candidate grid, or None.

    Ties break toward the lower feature index, then the lower threshold;
    None when no candidate has positive gain. criterion is "gini" for class
    labels or "variance" for real targets.

    allow_zero_gain additionally admits zero-gain candidates (tree builders
    use this so impurity patterns like XOR, where every single split is
    gain-free, can still be separated within the depth budget).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] < 2:
        return None
    if feature_subset is None:
        feature_subset = np.arange(X.shape[1])
    features = np.sort(np.asarray(feature_subset, dtype=np.int64))
    if criterion == "gini":
        y = as_label_array(y, X.shape[0])
        k = int(num_classes) if num_classes else int(y.max()) + 1
    else:
        y = np.asarray(y, dtype=np.float64)
    best = None
    for f in features:
        values = X[:, f]
        thresholds = candidate_thresholds(values, max_bins)
        if thresholds.shape[0] == 0:
            continue
        if criterion == "gini":
            gains = _split_gain_classification(values, y, k, thresholds)
        else:
            gains = _split_gain_regression(values, y, thresholds)
        # Gains below the noise floor collapse to exactly 0 so ties across
        # features resolve by index, not by last-ulp arithmetic noise.
        gains = np.where(np.abs(gains) < MIN_GAIN, 0.0, gains)
        i = int(np.argmax(gains))
        floor = -MIN_GAIN if allow_zero_gain else MIN_GAIN
        if gains[i] > floor and (best is None or gains[i] > best[2]):
            best = (int(f), float(thresholds[i]), max(float(gains[i]), 0.0))
    return best


def _leaf(y, num_classes, criterion):
    if criterion == "gini":
        counts = np.bincount(y, minlength=num_classes).astype(np.float64)
        return TreeNode(y.shape[0], prediction=counts / counts.sum())
    return TreeNode(y.shape[0], prediction=float(y.mean()))


def grow_tree(X, y, max_depth=5, min_instances_per_node=1, max_bins=32,
              criterion="gini", num_classes=None, feature_picker=None):
    """Recursive greedy builder shared by the tree, forest, and boosting models.

    feature_picker(n_features) -> index array lets forests draw a fresh
    random feature subset per node; None considers every feature.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise DataError("cannot grow a tree from zero rows")
    if criterion == "gini":
        y = as_label_array(y, X.shape[0])
        num_classes = int(num_classes) if num_classes else int(y.max()) + 1
    else:
        y = np.asarray(y, dtype=np.float64)

    def build(idx, depth):
        sub_y = y[idx]
        node_leaf = _leaf(sub_y, num_classes, criterion)
        if depth >= max_depth or idx.shape[0] < 2:
            return node_leaf
        if criterion == "gini":
            if np.unique(sub_y).shape[0] == 1:
                return node_leaf
        elif float(sub_y.max() - sub_y.min()) < 1e-15:
            return node_leaf
        subset = feature_picker(X.shape[1]) if feature_picker else None
        found = best_split(X[idx], sub_y, subset, max_bins, criterion,
                           num_classes, allow_zero_gain=True)
        if found is None:
            return node_leaf
        f, thr, gain = found
        go_left = X[idx, f] <= thr
        left_idx, right_idx = idx[go_left], idx[~go_left]
        if min(left_idx.shape[0], right_idx.shape[0]) < min_instances_per_node:
            return node_leaf
        return TreeNode(
            idx.shape[0],
            feature=f,
            threshold=thr,
            gain=gain,
            left=build(left_idx, depth + 1),
            right=build(right_idx, depth + 1),
        )

    return build(np.arange(X.shape[0]), 0)


def route(root, row):
    """Walk a row to its leaf."""
    node = root
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


def predict_tree(root, x):
    """(label, class distribution) for one row of a classification tree."""
    row = x.to_dense() if hasattr(x, "to_dense") else np.asarray(x, dtype=np.float64)
    leaf = route(root, row)
    dist = leaf.prediction
    return int(np.argmax(dist)), dist


def tree_predict_matrix(root, X):
    """Leaf predictions for every row; distributions (n,K) or scores (n,)."""
    X = as_feature_matrix(X)
    if hasattr(X, "toarray"):
        X = X.toarray()
    rows = [route(root, X[i]).prediction for i in range(X.shape[0])]
    return np.asarray(rows)


def accumulate_importances(root, out):
    """Add (n_samples/total)*gain per split into out, indexed by feature."""
    total = root.n_samples

    def walk(node):
        if node.is_leaf:
            return
        out[node.feature] += node.n_samples / total * node.gain
        walk(node.left)
        walk(node.right)

    walk(root)
    return out


class DecisionTreeClassifier(BaseEstimator):
    """Greedy CART classifier with quantile-binned split search."""

    def __init__(self, max_depth=5, min_instances_per_node=1, max_bins=32,
                 num_classes=None):
        self.max_depth = max_depth
        self.min_instances_per_node = min_instances_per_node
        self.max_bins = max_bins
        self.num_classes = num_classes
        self.root_ = None

    def fit(self, X, y):
        X = as_feature_matrix(X)
        if hasattr(X, "toarray"):
            X = X.toarray()
        y = as_label_array(y, X.shape[0])
        k = int(self.num_classes) if self.num_classes else int(y.max()) + 1
        check_labels_in_range(y, k)
        self.num_classes_ = k
        self.dim_ = X.shape[1]
        self.root_ = grow_tree(
            X, y,
            max_depth=self.max_depth,
            min_instances_per_node=self.min_instances_per_node,
            max_bins=self.max_bins,
            criterion="gini",
            num_classes=k,
        )
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "root_")
        return tree_predict_matrix(self.root_, X)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def predict_one(self, x):
        check_is_fitted(self, "root_")
        return predict_tree(self.root_, x)

    def tree_roots(self):
        check_is_fitted(self, "root_")
        return [self.root_]

    def feature_importances(self):
        check_is_fitted(self, "root_")
        return accumulate_importances(self.root_, np.zeros(self.dim_))

    def to_json(self):
        check_is_fitted(self, "root_")
        return {
            "kind": "dtree",
            "num_classes": self.num_classes_,
            "dim": self.dim_,
            "params": self.get_params(),
            "root": self.root_.to_json(),
        }

    @classmethod
    def from_json(cls, doc):
        model = cls(**doc["params"])
        model.num_classes_ = doc["num_classes"]
        model.dim_ = doc["dim"]
        model.root_ = TreeNode.from_json(doc["root"])
        return model
