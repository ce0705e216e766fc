"""Fit/transform stages over Tables, composable into a Pipeline.

Every stage maps Table -> Table by adding (or replacing) one column, keeps
its fitted state in trailing-underscore attributes, and serializes to a
JSON fragment. Transforms are pure: the same input table always produces
the same output table.
"""

import numpy as np

from .base import BaseEstimator, check_is_fitted
from .errors import BookmlError, DataError
from .scaling import MinMaxState, fit_minmax, transform_minmax
from .stopword_list import ENGLISH_STOPWORDS, STOPWORDS_VERSION
from .text import (
    Vocabulary,
    fit_count_vectorizer,
    idf_weights,
    remove_stopwords,
    tokenize,
    transform_counts,
    transform_tfidf,
)
from .vectors import BlockMap, FeatureVector, assemble

PIPELINE_FORMAT_VERSION = 1


class Stage(BaseEstimator):
    """Base of all pipeline stages."""

    def input_columns(self):
        return [self.input_col]

    def fit(self, table):
        return self

    def transform(self, table):
        raise NotImplementedError

    def fit_transform(self, table):
        return self.fit(table).transform(table)

    def state_to_json(self):
        return {}

    def load_state(self, state):
        pass

    def to_json(self):
        return {
            "type": STAGE_NAMES[type(self)],
            "params": _jsonable_params(self.get_params()),
            "state": self.state_to_json(),
        }


def _jsonable_params(params):
    out = {}
    for k, v in params.items():
        if isinstance(v, frozenset):
            v = sorted(v)
        out[k] = v
    return out


class TokenizeText(Stage):
    """text column -> tokens column (lowercase, whitespace split)."""

    def __init__(self, input_col, output_col):
        self.input_col = input_col
        self.output_col = output_col

    def transform(self, table):
        col = table.column(self.input_col)
        toks = tuple(
            tuple(tokenize(col.value_at(i))) for i in range(table.row_count)
        )
        return table.with_column(self.output_col, "tokens", toks)


class FilterStopwords(Stage):
    """tokens column -> tokens column with stoplist members removed."""

    def __init__(self, input_col, output_col, stopwords=None):
        self.input_col = input_col
        self.output_col = output_col
        self.stopwords = stopwords

    def _stoplist(self):
        return ENGLISH_STOPWORDS if self.stopwords is None else frozenset(self.stopwords)

    def transform(self, table):
        stoplist = self._stoplist()
        col = table.column(self.input_col)
        toks = tuple(
            tuple(remove_stopwords(col.value_at(i) or (), stoplist))
            for i in range(table.row_count)
        )
        return table.with_column(self.output_col, "tokens", toks)

    def state_to_json(self):
        # Record the effective list so persisted pipelines survive future
        # edits to the default.
        return {
            "stopwords": sorted(self._stoplist()),
            "stopwords_version": STOPWORDS_VERSION if self.stopwords is None else None,
        }

    def load_state(self, state):
        self.stopwords = frozenset(state["stopwords"])


class CountTokens(Stage):
    """tokens column -> sparse term-count vector column over a fitted vocabulary."""

    def __init__(self, input_col, output_col, vocab_size=4096, min_df=2):
        self.input_col = input_col
        self.output_col = output_col
        self.vocab_size = vocab_size
        self.min_df = min_df
        self.vocabulary_ = None

    def fit(self, table):
        col = table.column(self.input_col)
        docs = [col.value_at(i) or () for i in range(table.row_count)]
        self.vocabulary_ = fit_count_vectorizer(docs, self.vocab_size, self.min_df)
        return self

    def transform(self, table):
        check_is_fitted(self, "vocabulary_")
        index = self.vocabulary_.index()
        col = table.column(self.input_col)
        vecs = tuple(
            transform_counts(index, col.value_at(i) or ())
            for i in range(table.row_count)
        )
        return table.with_column(self.output_col, "vector", vecs)

    def state_to_json(self):
        v = self.vocabulary_
        return {
            "terms": list(v.terms),
            "doc_freq": list(v.doc_freq),
            "corpus_size": v.corpus_size,
        }

    def load_state(self, state):
        self.vocabulary_ = Vocabulary(
            tuple(state["terms"]), tuple(state["doc_freq"]), state["corpus_size"]
        )


class WeightIdf(Stage):
    """count-vector column -> tf-idf vector column.

    Document frequencies are refit from the observed count vectors, so the
    stage composes with any upstream count producer.
    """

    def __init__(self, input_col, output_col):
        self.input_col = input_col
        self.output_col = output_col
        self.weights_ = None

    def fit(self, table):
        col = table.column(self.input_col)
        if table.row_count == 0:
            raise DataError("cannot fit IDF on an empty table")
        dim = col.values[0].dim
        df = np.zeros(dim, dtype=np.int64)
        for i in range(table.row_count):
            vec = col.value_at(i)
            if vec is not None and vec.is_sparse:
                df[vec.indices] += 1
            elif vec is not None:
                df += vec.to_dense() != 0
        self.weights_ = idf_weights(df, table.row_count)
        return self

    def transform(self, table):
        check_is_fitted(self, "weights_")
        col = table.column(self.input_col)
        vecs = tuple(
            transform_tfidf(col.value_at(i), self.weights_)
            for i in range(table.row_count)
        )
        return table.with_column(self.output_col, "vector", vecs)

    def state_to_json(self):
        return {"weights": self.weights_.tolist()}

    def load_state(self, state):
        self.weights_ = np.asarray(state["weights"], dtype=np.float64)


class ScaleMinMax(Stage):
    """numeric column -> float column scaled by the fitted training range."""

    def __init__(self, input_col, output_col):
        self.input_col = input_col
        self.output_col = output_col
        self.state_ = None

    def fit(self, table):
        col = table.column(self.input_col)
        if col.dtype not in ("int64", "float64"):
            raise DataError(f"column {self.input_col!r} is not numeric")
        self.state_ = fit_minmax(np.asarray(col.values, dtype=np.float64), col.mask)
        return self

    def transform(self, table):
        check_is_fitted(self, "state_")
        col = table.column(self.input_col)
        if col.dtype not in ("int64", "float64"):
            raise DataError(f"column {self.input_col!r} is not numeric")
        if col.mask.any():
            raise DataError(
                f"column {self.input_col!r} has nulls; drop those rows before scaling"
            )
        out = transform_minmax(self.state_, np.asarray(col.values, dtype=np.float64))
        return table.with_column(self.output_col, "float64", out)

    def state_to_json(self):
        return {"min": self.state_.min, "max": self.state_.max}

    def load_state(self, state):
        self.state_ = MinMaxState(state["min"], state["max"])


class AssembleColumns(Stage):
    """Concatenate scalar and vector columns into one feature-vector column.

    Fit records the per-part block layout; transform enforces it, so a part
    whose dimension drifts between rows is rejected.
    """

    def __init__(self, input_cols, output_col):
        self.input_cols = list(input_cols)
        self.output_col = output_col
        self.block_map_ = None

    def input_columns(self):
        return list(self.input_cols)

    def _row_parts(self, table, i):
        parts = []
        for name in self.input_cols:
            col = table.column(name)
            v = col.value_at(i)
            if col.dtype in ("int64", "float64"):
                parts.append(None if v is None else float(v))
            elif col.dtype == "vector":
                parts.append(v if v is not None else None)
            else:
                raise DataError(f"column {name!r} ({col.dtype}) cannot be assembled")
        return parts

    def fit(self, table):
        if table.row_count == 0:
            raise DataError("cannot fit an assembler on an empty table")
        parts = self._row_parts(table, 0)
        lengths = [p.dim if isinstance(p, FeatureVector) else 1 for p in parts]
        self.block_map_ = BlockMap.from_parts(self.input_cols, lengths)
        return self

    def transform(self, table):
        check_is_fitted(self, "block_map_")
        vecs = tuple(
            assemble(self._row_parts(table, i), self.block_map_)
            for i in range(table.row_count)
        )
        return table.with_column(self.output_col, "vector", vecs)

    def state_to_json(self):
        return {"block_map": self.block_map_.to_json()}

    def load_state(self, state):
        self.block_map_ = BlockMap.from_json(state["block_map"])


STAGE_NAMES = {
    TokenizeText: "tokenize",
    FilterStopwords: "filter_stopwords",
    CountTokens: "count_tokens",
    WeightIdf: "weight_idf",
    ScaleMinMax: "scale_minmax",
    AssembleColumns: "assemble",
}
STAGE_TYPES = {name: cls for cls, name in STAGE_NAMES.items()}


class Pipeline(BaseEstimator):
    """Ordered stages fitted front to back; fitted pipelines transform purely.

    fit() fits each stage on the table as transformed by all prior fitted
    stages. Stage failures propagate annotated with the stage index.
    """

    def __init__(self, stages):
        self.stages = list(stages)
        self.fitted_ = None

    def _check_inputs(self, stage, idx, table):
        for name in stage.input_columns():
            if name not in table.schema:
                raise DataError(
                    f"stage {idx} ({STAGE_NAMES[type(stage)]}): missing input column {name!r}"
                )

    def fit(self, table):
        current = table
        for idx, stage in enumerate(self.stages):
            self._check_inputs(stage, idx, current)
            try:
                stage.fit(current)
                current = stage.transform(current)
            except BookmlError as exc:
                raise type(exc)(
                    f"stage {idx} ({STAGE_NAMES[type(stage)]}): {exc}"
                ) from exc
        self.fitted_ = True
        return self

    def transform(self, table):
        check_is_fitted(self, "fitted_")
        current = table
        for idx, stage in enumerate(self.stages):
            self._check_inputs(stage, idx, current)
            current = stage.transform(current)
        return current

    def fit_transform(self, table):
        return self.fit(table).transform(table)

    def to_json(self):
        return {
            "format_version": PIPELINE_FORMAT_VERSION,
            "stages": [s.to_json() for s in self.stages],
        }

    @classmethod
    def from_json(cls, doc):
        if doc.get("format_version") != PIPELINE_FORMAT_VERSION:
            raise DataError(f"unsupported pipeline format {doc.get('format_version')!r}")
        stages = []
        for frag in doc["stages"]:
            stage_cls = STAGE_TYPES.get(frag["type"])
            if stage_cls is None:
                raise DataError(f"unknown stage type {frag['type']!r}")
            stage = stage_cls(**frag["params"])
            stage.load_state(frag["state"])
            stages.append(stage)
        pipe = cls(stages)
        pipe.fitted_ = True
        return pipe


def pipeline_fit_transform(stages, table):
    """Fit a pipeline on the table; returns (fitted pipeline, transformed table)."""
    pipe = Pipeline(stages)
    out = pipe.fit_transform(table)
    return pipe, out
