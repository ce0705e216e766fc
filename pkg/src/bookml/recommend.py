"""Alternating-least-squares matrix factorization, explicit and implicit.

Explicit ALS minimizes squared error on observed ratings plus
reg * (sum ||u||^2 + sum ||v||^2) by exact per-row ridge solves, so the
recorded objective never increases across half-sweeps. The implicit
variant treats ratings as confidence-weighted binary preferences
(confidence = 1 + alpha * rating over every user/item pair) and uses the
Gramian decomposition so each solve touches only observed entries.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .base import BaseEstimator, check_is_fitted
from .errors import ConfigError, DataError, NumericError

logger = logging.getLogger(__name__)

FACTOR_FORMAT_VERSION = 1

Score = namedtuple("Score", ["value", "cold_start"])


@dataclass
class InteractionSet:
    """Contiguously indexed (user, item, rating) triples with id maps."""

    user_ids: list
    item_ids: list
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    dropped_nulls: int = 0
    duplicates_resolved: int = 0
    user_index: dict = field(default_factory=dict)
    item_index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.user_index:
            self.user_index = {u: i for i, u in enumerate(self.user_ids)}
        if not self.item_index:
            self.item_index = {v: i for i, v in enumerate(self.item_ids)}

    @property
    def num_users(self):
        return len(self.user_ids)

    @property
    def num_items(self):
        return len(self.item_ids)

    @property
    def num_triples(self):
        return self.users.shape[0]

    def by_user(self):
        """Per-user (item index array, rating array) lists."""
        return _group(self.users, self.items, self.ratings, self.num_users)

    def by_item(self):
        return _group(self.items, self.users, self.ratings, self.num_items)

    def seen_items(self, user_idx):
        return set(self.items[self.users == user_idx].tolist())

    def item_popularity(self):
        return np.bincount(self.items, minlength=self.num_items)

    def subset(self, keep):
        """Triple subset sharing this set's id maps (for holdout splits)."""
        keep = np.asarray(keep, dtype=bool)
        return InteractionSet(
            user_ids=self.user_ids,
            item_ids=self.item_ids,
            users=self.users[keep],
            items=self.items[keep],
            ratings=self.ratings[keep],
            user_index=self.user_index,
            item_index=self.item_index,
        )


def _group(keys, values, ratings, n_groups):
    order = np.argsort(keys, kind="stable")
    sk, sv, sr = keys[order], values[order], ratings[order]
    bounds = np.searchsorted(sk, np.arange(n_groups + 1))
    return [
        (sv[bounds[g] : bounds[g + 1]], sr[bounds[g] : bounds[g + 1]])
        for g in range(n_groups)
    ]


def build_interactions(table, user_col, item_col, rating_col):
    """Index ids by first appearance and deduplicate (user, item) pairs.

    Rows with a null id or rating are dropped and counted; duplicate pairs
    keep the last occurrence's rating.
    """
    ucol = table.column(user_col)
    icol = table.column(item_col)
    rcol = table.column(rating_col)
    if rcol.dtype not in ("int64", "float64"):
        raise DataError(f"rating column {rating_col!r} must be numeric")
    user_ids, item_ids = [], []
    user_index, item_index = {}, {}
    pair_rating = {}
    pair_order = {}
    dropped = 0
    for row in range(table.row_count):
        u, v, r = ucol.value_at(row), icol.value_at(row), rcol.value_at(row)
        if u is None or v is None or r is None:
            dropped += 1
            continue
        if u not in user_index:
            user_index[u] = len(user_ids)
            user_ids.append(u)
        if v not in item_index:
            item_index[v] = len(item_ids)
            item_ids.append(v)
        pair = (user_index[u], item_index[v])
        if pair not in pair_order:
            pair_order[pair] = len(pair_order)
        pair_rating[pair] = float(r)
    if not pair_rating:
        raise DataError("no usable (user, item, rating) triples")
    duplicates = table.row_count - dropped - len(pair_rating)
    pairs = sorted(pair_order, key=pair_order.get)
    users = np.array([p[0] for p in pairs], dtype=np.int64)
    items = np.array([p[1] for p in pairs], dtype=np.int64)
    ratings = np.array([pair_rating[p] for p in pairs], dtype=np.float64)
    if dropped:
        logger.info("build_interactions: dropped %d rows with null ids/ratings", dropped)
    return InteractionSet(
        user_ids, item_ids, users, items, ratings,
        dropped_nulls=dropped, duplicates_resolved=duplicates,
        user_index=user_index, item_index=item_index,
    )


def _solve_ridge(A, b, reg):
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            f"singular normal equations (reg={reg}); increase the regularization"
        ) from exc


class _ALSBase(BaseEstimator):
    """Shared factor storage, scoring, ranking, and serialization."""

    kind = None

    def _init_factors(self, data):
        if self.rank < 1 or self.reg < 0 or self.sweeps < 0:
            raise ConfigError("rank must be >= 1, reg >= 0, sweeps >= 0")
        if data.num_triples == 0:
            raise DataError("cannot fit on an empty interaction set")
        if self.rank > min(data.num_users, data.num_items):
            logger.warning(
                "rank %d exceeds min(num_users=%d, num_items=%d); factors will be degenerate",
                self.rank, data.num_users, data.num_items,
            )
        rng = np.random.default_rng(self.seed)
        # Items first; the first half-sweep then solves users against them.
        item_factors = rng.uniform(-0.5, 0.5, (data.num_items, self.rank)) / np.sqrt(self.rank)
        user_factors = np.zeros((data.num_users, self.rank))
        return user_factors, item_factors

    def _finalize(self, data, user_factors, item_factors, trace, global_mean):
        if not (np.all(np.isfinite(user_factors)) and np.all(np.isfinite(item_factors))):
            raise NumericError("non-finite factors after training")
        self.user_factors_ = user_factors
        self.item_factors_ = item_factors
        self.objective_trace_ = np.asarray(trace)
        self.global_mean_ = float(global_mean)
        self.user_ids_ = list(data.user_ids)
        self.item_ids_ = list(data.item_ids)
        self.user_index_ = dict(data.user_index)
        self.item_index_ = dict(data.item_index)
        self.rank_ = self.rank
        return self

    def score(self, user_id, item_id):
        """Score(value, cold_start); unknown ids fall back to the global mean."""
        check_is_fitted(self, "user_factors_")
        u = self.user_index_.get(user_id)
        i = self.item_index_.get(item_id)
        if u is None or i is None:
            return Score(self.global_mean_, True)
        return Score(float(self.user_factors_[u] @ self.item_factors_[i]), False)

    def predict_pairs(self, users, items):
        """Scores for aligned internal index arrays (no cold-start handling)."""
        check_is_fitted(self, "user_factors_")
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        return np.einsum(
            "ij,ij->i", self.user_factors_[users], self.item_factors_[items]
        )

    def recommend_top_n(self, user_id, n, exclude_seen=True, interactions=None):
        """Ranked (item_id, score) list; ties break toward the lower item index.

        Unknown users get the top-n most popular items (requires the
        interaction set) flagged as cold start.
        """
        check_is_fitted(self, "user_factors_")
        if n < 1:
            raise ConfigError("n must be at least 1")
        u = self.user_index_.get(user_id)
        if u is None:
            if interactions is None:
                raise DataError("unknown user and no interactions for the popularity fallback")
            pop = interactions.item_popularity().astype(np.float64)
            order = np.argsort(-pop, kind="stable")[:n]
            return [(self.item_ids_[i], float(pop[i])) for i in order], True
        scores = self.user_factors_[u] @ self.item_factors_.T
        order = np.argsort(-scores, kind="stable")
        banned = set()
        if exclude_seen:
            if interactions is None:
                raise DataError("exclude_seen requires the interaction set")
            banned = interactions.seen_items(u)
        picked = [(self.item_ids_[i], float(scores[i])) for i in order if i not in banned]
        return picked[:n], False

    def to_json(self):
        check_is_fitted(self, "user_factors_")
        return {
            "format_version": FACTOR_FORMAT_VERSION,
            "kind": self.kind,
            "rank": self.rank_,
            "params": self.get_params(),
            "user_ids": self.user_ids_,
            "item_ids": self.item_ids_,
            "user_factors": self.user_factors_.tolist(),
            "item_factors": self.item_factors_.tolist(),
            "global_mean": self.global_mean_,
            "objective_trace": np.asarray(self.objective_trace_).tolist(),
        }

    @classmethod
    def from_json(cls, doc):
        model = cls(**doc["params"])
        model.rank_ = doc["rank"]
        model.user_ids_ = list(doc["user_ids"])
        model.item_ids_ = list(doc["item_ids"])
        model.user_index_ = {u: i for i, u in enumerate(model.user_ids_)}
        model.item_index_ = {v: i for i, v in enumerate(model.item_ids_)}
        model.user_factors_ = np.asarray(doc["user_factors"], dtype=np.float64)
        model.item_factors_ = np.asarray(doc["item_factors"], dtype=np.float64)
        model.global_mean_ = doc["global_mean"]
        model.objective_trace_ = np.asarray(doc["objective_trace"])
        return model


class ALSExplicit(_ALSBase):
    """Rating prediction by alternating exact ridge solves on observed entries."""

    kind = "als"

    def __init__(self, rank=10, reg=0.1, sweeps=10, seed=0):
        self.rank = rank
        self.reg = reg
        self.sweeps = sweeps
        self.seed = seed
        self.user_factors_ = None

    def fit(self, data):
        U, V = self._init_factors(data)
        by_user = data.by_user()
        by_item = data.by_item()
        eye = np.eye(self.rank)

        def objective():
            preds = np.einsum("ij,ij->i", U[data.users], V[data.items])
            sq = float(((data.ratings - preds) ** 2).sum())
            return sq + self.reg * (float((U**2).sum()) + float((V**2).sum()))

        def solve_side(target, other, groups):
            for idx, (cols, vals) in enumerate(groups):
                if cols.shape[0] == 0:
                    target[idx] = 0.0
                    continue
                M = other[cols]
                A = M.T @ M + self.reg * eye
                target[idx] = _solve_ridge(A, M.T @ vals, self.reg)

        trace = [objective()]
        for _ in range(self.sweeps):
            solve_side(U, V, by_user)
            trace.append(objective())
            solve_side(V, U, by_item)
            trace.append(objective())
            if not np.isfinite(trace[-1]):
                raise NumericError("non-finite training objective")
        return self._finalize(data, U, V, trace, data.ratings.mean())


class ALSImplicit(_ALSBase):
    """Confidence-weighted preference factorization (implicit feedback).

    preference p = 1 when rating > 0 else 0; confidence c = 1 + alpha * rating;
    the loss sums c * (p - u.v)^2 over every user/item pair plus the usual
    L2 term. Fallback/global mean is the observed positive-preference share.
    """

    kind = "als_implicit"

    def __init__(self, rank=10, reg=0.1, sweeps=10, alpha=40.0, seed=0):
        self.rank = rank
        self.reg = reg
        self.sweeps = sweeps
        self.alpha = alpha
        self.seed = seed
        self.user_factors_ = None

    def fit(self, data):
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive for implicit feedback")
        if np.any(data.ratings < 0):
            raise DataError("implicit feedback requires nonnegative ratings")
        U, V = self._init_factors(data)
        prefs = (data.ratings > 0).astype(np.float64)
        conf_minus_1 = self.alpha * data.ratings
        by_user = data.by_user()
        by_item = data.by_item()
        eye = np.eye(self.rank)

        def objective():
            # sum over all pairs of (0 - u.v)^2 via the Gramian, corrected on
            # the observed entries where confidence and preference differ.
            G = V.T @ V
            base = float(np.einsum("ij,jk,ik->", U, G, U))
            preds = np.einsum("ij,ij->i", U[data.users], V[data.items])
            conf = 1.0 + conf_minus_1
            corr = float((conf * (prefs - preds) ** 2 - preds**2).sum())
            return base + corr + self.reg * (float((U**2).sum()) + float((V**2).sum()))

        def solve_side(target, other, groups):
            G = other.T @ other
            for idx, (cols, vals) in enumerate(groups):
                A = G + self.reg * eye
                b = np.zeros(self.rank)
                if cols.shape[0]:
                    M = other[cols]
                    w = self.alpha * vals
                    p = (vals > 0).astype(np.float64)
                    A = A + (M * w[:, None]).T @ M
                    b = M.T @ ((1.0 + w) * p)
                target[idx] = _solve_ridge(A, b, self.reg)

        trace = [objective()]
        for _ in range(self.sweeps):
            solve_side(U, V, by_user)
            trace.append(objective())
            solve_side(V, U, by_item)
            trace.append(objective())
            if not np.isfinite(trace[-1]):
                raise NumericError("non-finite training objective")
        return self._finalize(data, U, V, trace, prefs.mean())


def per_user_holdout(data, seed=0):
    """Hold out one seeded rating per user with >= 2 ratings.

    Returns (train InteractionSet, test InteractionSet) sharing id maps;
    users with a single rating stay wholly in train.
    """
    rng = np.random.default_rng(seed)
    holdout = np.zeros(data.num_triples, dtype=bool)
    for user, (positions, _) in enumerate(
        _group(data.users, np.arange(data.num_triples), data.ratings, data.num_users)
    ):
        if positions.shape[0] >= 2:
            holdout[rng.choice(positions)] = True
    if not holdout.any():
        raise DataError("no user has 2+ ratings; cannot build a holdout split")
    return data.subset(~holdout), data.subset(holdout)


def evaluate_holdout(estimator, data, seed=0):
    """Fit on the per-user-holdout train split, score held-out ratings.

    Returns (rmse, r2, n_test). Predictions come from the factor dot
    product; the r2 may be negative when the factors generalize worse than
    the mean rating.
    """
    from .metrics import evaluate_regression

    train, test = per_user_holdout(data, seed)
    model = estimator.clone()
    model.fit(train)
    preds = model.predict_pairs(test.users, test.items)
    rmse, r2 = evaluate_regression(preds, test.ratings)
    return rmse, r2, test.num_triples
