"""Batch CLI: prepare -> train/compare -> recommend, plus model verification.

Commands are idempotent for a fixed config and seed: reports differ only in
wall-time fields. Every report echoes the full effective configuration,
defaults included, and each command drops a ``<command>.done`` marker in
the output directory when it finishes writing.

Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.
"""

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import report as report_mod
from .ensemble import (
    GradientBoostedTreesClassifier,
    RandomForestClassifier,
    block_importances,
)
from .errors import BookmlError, ConfigError, DataError
from .linear import LinearSVC, LogisticRegressionClassifier
from .metrics import evaluate_multiclass
from .persist import load_artifact, model_from_json, model_to_json, save_artifact
from .pipeline import (
    AssembleColumns,
    CountTokens,
    FilterStopwords,
    Pipeline,
    ScaleMinMax,
    TokenizeText,
    WeightIdf,
)
from .recommend import ALSExplicit, ALSImplicit, build_interactions, evaluate_holdout
from .scaling import binarize_label
from .selection import cross_validate, train_validation_split
from .synth import generate_corpus
from .table import (
    IngestOptions,
    Table,
    books_schema,
    join_inner,
    load_table,
    parse_csv,
    ratings_schema,
    save_table,
    split_random,
)
from .tree import DecisionTreeClassifier
from .validation import stack_vectors

CLASSIFIER_MODELS = ("logistic", "svc", "dtree", "rforest", "gbt")
RECOMMENDER_MODELS = ("als", "als_implicit")
BINARY_ONLY_MODELS = ("svc", "gbt")
TREE_FAMILY = ("dtree", "rforest", "gbt")

DEFAULT_GRIDS = {
    "logistic": {"l2_reg": [0.0, 0.01, 0.1], "max_iters": [100, 300]},
    "svc": {"l2_reg": [0.0, 0.01, 0.1], "max_iters": [100, 300]},
    "dtree": {"max_depth": [3, 5, 8]},
    "rforest": {"max_depth": [3, 5], "num_trees": [10, 20]},
    "gbt": {"learning_rate": [0.05, 0.1], "num_iters": [10, 20]},
}

PROBE_ROWS = 32
R2_EXPLANATION = (
    "R2 = 1 - SS_res/SS_tot: negative values mean the model predicts held-out "
    "ratings worse than always predicting their mean."
)


@dataclass
class RunConfig:
    ratings_csv: str = ""
    books_csv: str = ""
    out_dir: str = "out"
    sample_rows: int | None = None
    label_mode: str = "binary"
    model: str = "logistic"
    tuning: str = "tvs"
    cv_k: int = 3
    tvs_ratio: float = 0.8
    metric: str = "f1"
    grid: dict | None = None
    seed: int = 0
    test_fraction: float = 0.2
    vocab_size: int = 4096
    min_df: int = 2
    use_review_text: bool = False
    max_malformed_fraction: float = 0.01
    als_rank: int = 10
    als_reg: float = 0.1
    als_sweeps: int = 10
    als_alpha: float = 40.0

    def validate(self):
        if self.model not in CLASSIFIER_MODELS + RECOMMENDER_MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.label_mode not in ("multiclass", "binary"):
            raise ConfigError(f"unknown label_mode {self.label_mode!r}")
        if self.tuning not in ("cv", "tvs"):
            raise ConfigError(f"unknown tuning method {self.tuning!r}")
        if self.model in BINARY_ONLY_MODELS and self.label_mode != "binary":
            raise ConfigError(f"model {self.model!r} supports only label_mode=binary")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie strictly between 0 and 1")
        return self

    def effective(self):
        """Full effective configuration, defaults included, for report echo."""
        doc = dataclasses.asdict(self)
        if self.model in CLASSIFIER_MODELS:
            doc["grid"] = self.grid or DEFAULT_GRIDS[self.model]
        return doc


def load_config(path, overrides):
    cfg = RunConfig()
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
        for key, value in doc.items():
            setattr(cfg, key, value)
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True), encoding="utf-8")


def _mark_done(out_dir, command):
    (Path(out_dir) / f"{command}.done").write_text("ok\n", encoding="utf-8")


# ---------------------------------------------------------------- prepare


def cmd_prepare(cfg):
    """Parse, join, coerce, and persist the modeling table."""
    if not cfg.ratings_csv or not cfg.books_csv:
        raise ConfigError("prepare requires ratings_csv and books_csv")
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    opts = IngestOptions(max_malformed_fraction=cfg.max_malformed_fraction)
    ratings = parse_csv(cfg.ratings_csv, ratings_schema(), opts)
    books = parse_csv(cfg.books_csv, books_schema(), opts)
    joined = join_inner(ratings.table, books.table, "title", "title")
    if joined.row_count == 0:
        raise DataError("join produced zero rows; do the two files share titles?")

    price_col = joined.column("price")
    score_col = joined.column("r_score")
    time_col = joined.column("r_time")
    summary_col = joined.column("r_summary")
    keep = []
    price_vals = []
    drops = {"missing_price": 0, "missing_score": 0, "invalid_score": 0,
             "missing_time": 0, "missing_summary": 0}
    for i in range(joined.row_count):
        raw_price = price_col.value_at(i)
        price = None
        if raw_price is not None:
            try:
                price = float(raw_price)
            except ValueError:
                price = None
        if price is None:
            drops["missing_price"] += 1
            continue
        score = score_col.value_at(i)
        if score is None:
            drops["missing_score"] += 1
            continue
        if not 1 <= score <= 5:
            drops["invalid_score"] += 1
            continue
        if time_col.value_at(i) is None:
            drops["missing_time"] += 1
            continue
        if summary_col.value_at(i) is None:
            drops["missing_summary"] += 1
            continue
        keep.append(i)
        price_vals.append(price)

    if not keep:
        raise DataError("every joined row was dropped during preparation")
    kept = joined.take(np.asarray(keep, dtype=np.int64))
    kept = kept.select(["title", "user_id", "r_score", "r_time", "r_summary", "r_review"])
    kept = kept.with_column("price", "float64", np.asarray(price_vals))

    sampled = kept.row_count
    if cfg.sample_rows is not None and cfg.sample_rows < kept.row_count:
        rng = np.random.default_rng(cfg.seed)
        idx = np.sort(rng.choice(kept.row_count, size=cfg.sample_rows, replace=False))
        kept = kept.take(idx)
        sampled = cfg.sample_rows

    save_table(kept, out / "prepared")
    summary = {
        "config": cfg.effective(),
        "ratings_records": ratings.records_seen,
        "ratings_malformed": ratings.malformed_records,
        "books_records": books.records_seen,
        "books_malformed": books.malformed_records,
        "rows_in": joined.row_count,
        "rows_kept": joined.row_count - sum(drops.values()),
        "drop_reasons": drops,
        "rows_after_sampling": sampled,
    }
    _write_json(out / "prepare_summary.json", summary)
    _mark_done(out, "prepare")
    print(f"prepared {sampled} rows -> {out / 'prepared'}")
    print(f"  rows_in={summary['rows_in']} kept={summary['rows_kept']} drops={drops}")
    return summary


# ---------------------------------------------------------------- features


def feature_stages(cfg):
    stages = [
        ScaleMinMax("price", "price_norm"),
        ScaleMinMax("r_time", "time_norm"),
        TokenizeText("r_summary", "summary_tokens"),
        FilterStopwords("summary_tokens", "summary_tokens_clean"),
        CountTokens("summary_tokens_clean", "summary_counts", cfg.vocab_size, cfg.min_df),
        WeightIdf("summary_counts", "summary_tfidf"),
    ]
    parts = ["price_norm", "time_norm", "summary_tfidf"]
    if cfg.use_review_text:
        stages.extend(
            [
                TokenizeText("r_review", "review_tokens"),
                FilterStopwords("review_tokens", "review_tokens_clean"),
                CountTokens("review_tokens_clean", "review_counts", cfg.vocab_size, cfg.min_df),
                WeightIdf("review_counts", "review_tfidf"),
            ]
        )
        parts.append("review_tfidf")
    stages.append(AssembleColumns(parts, "features"))
    return stages


def make_labels(table, label_mode):
    col = table.column("r_score")
    if col.mask.any():
        raise DataError("prepared table has null scores; re-run prepare")
    scores = np.asarray(col.values, dtype=np.int64)
    if label_mode == "binary":
        return np.array([binarize_label(int(s)) for s in scores]), 2
    if scores.min() < 1 or scores.max() > 5:
        raise DataError("scores outside 1-5 in prepared table")
    return scores - 1, 5


def make_estimator(cfg, num_classes):
    if cfg.model == "logistic":
        return LogisticRegressionClassifier(num_classes=num_classes, seed=cfg.seed)
    if cfg.model == "svc":
        return LinearSVC(seed=cfg.seed)
    if cfg.model == "dtree":
        return DecisionTreeClassifier(num_classes=num_classes)
    if cfg.model == "rforest":
        return RandomForestClassifier(num_classes=num_classes, seed=cfg.seed)
    if cfg.model == "gbt":
        return GradientBoostedTreesClassifier(seed=cfg.seed)
    raise ConfigError(f"not a classifier model: {cfg.model!r}")


def features_and_labels(pipe, table, cfg):
    out = pipe.transform(table)
    X = stack_vectors([out.column("features").value_at(i) for i in range(out.row_count)])
    y, k = make_labels(out, cfg.label_mode)
    return X, y, k


def _load_prepared(cfg):
    path = Path(cfg.out_dir) / "prepared"
    if not (path / "schema.json").exists():
        raise DataError(f"{path}: prepared table not found; run `prepare` first")
    return load_table(path)


def _model_scores(model, X):
    """Exact per-row scores for tamper detection; shape depends on the model."""
    if hasattr(model, "decision_function"):
        return np.asarray(model.decision_function(X)).tolist()
    if hasattr(model, "predict_proba"):
        return np.asarray(model.predict_proba(X)).tolist()
    return None


def _probe_block(pipe, model, table, cfg):
    """Inputs + expected outputs for a held-in verification probe set."""
    probe = table.head(min(PROBE_ROWS, table.row_count))
    out = pipe.transform(probe)
    feats = [out.column("features").value_at(i) for i in range(out.row_count)]
    X = stack_vectors(feats)
    preds = model.predict(X)
    inputs = {}
    for name in ("price", "r_time", "r_summary", "r_review"):
        col = probe.column(name)
        inputs[name] = {
            "dtype": col.dtype,
            "values": [col.value_at(i) for i in range(probe.row_count)],
        }
    return {
        "inputs": inputs,
        "expected_features": [
            {"dim": v.dim, "indices": v.indices.tolist(), "values": v.values.tolist()}
            for v in feats
        ],
        "expected_labels": [int(p) for p in preds],
        "expected_scores": _model_scores(model, X),
    }


def _class_balance(y, k):
    counts = np.bincount(y, minlength=k)
    return {str(c): int(n) for c, n in enumerate(counts)}


def _train_classifier(cfg, prepared, out):
    train_tbl, test_tbl = split_random(prepared, 1.0 - cfg.test_fraction, cfg.seed)
    pipe = Pipeline(feature_stages(cfg))
    pipe.fit(train_tbl)
    X_train, y_train, k = features_and_labels(pipe, train_tbl, cfg)
    X_test, y_test, _ = features_and_labels(pipe, test_tbl, cfg)
    if np.unique(y_train).shape[0] < 2:
        raise DataError("training labels contain a single class; cannot train")

    grid = cfg.grid or DEFAULT_GRIDS[cfg.model]
    estimator = make_estimator(cfg, k)
    started = time.perf_counter()
    if cfg.tuning == "cv":
        result = cross_validate(estimator, grid, X_train, y_train,
                                k=cfg.cv_k, metric=cfg.metric, seed=cfg.seed)
    else:
        result = train_validation_split(estimator, grid, X_train, y_train,
                                        train_ratio=cfg.tvs_ratio,
                                        metric=cfg.metric, seed=cfg.seed)
    tuning_seconds = time.perf_counter() - started
    model = result.best_model
    test_report = evaluate_multiclass(model.predict(X_test), y_test, k)

    importances = None
    if cfg.model in TREE_FAMILY:
        assemble_stage = pipe.stages[-1]
        importances = block_importances(model, assemble_stage.block_map_)

    artifact = {
        "artifact": "classifier",
        "config": cfg.effective(),
        "label_mode": cfg.label_mode,
        "num_classes": k,
        "pipeline": pipe.to_json(),
        "model": model_to_json(model),
        "probes": _probe_block(pipe, model, train_tbl, cfg),
    }
    save_artifact(out / "model.json", artifact)

    report = {
        "config": cfg.effective(),
        "split": {"train_rows": train_tbl.row_count, "test_rows": test_tbl.row_count,
                  "test_fraction": cfg.test_fraction, "seed": cfg.seed},
        "class_balance_train": _class_balance(y_train, k),
        "tuning": result.to_json(),
        "test_metrics": test_report.as_dict(),
        "wall_time_s": {"tuning": tuning_seconds},
    }
    lines = [
        f"model={cfg.model} label_mode={cfg.label_mode} tuning={cfg.tuning} "
        f"(k={cfg.cv_k}, ratio={cfg.tvs_ratio}, metric={cfg.metric}, seed={cfg.seed})",
        "",
        "tuning candidates:",
        report_mod.tuning_table(result),
        "",
        f"best params: {result.best_params} ({result.metric}={result.best_metric:.4f})",
        "",
        "held-out test metrics:",
        report_mod.metrics_table([(cfg.model, test_report, tuning_seconds)]),
        "",
        "test confusion matrix:",
        report_mod.confusion_table(test_report.confusion),
    ]
    if importances is not None:
        report["feature_importances"] = {
            "blocks": importances.names,
            "values": importances.values.tolist(),
            "degenerate": importances.degenerate,
        }
        lines += ["", "feature importances:", report_mod.importance_table(importances)]
    _write_json(out / "train_report.json", report)
    (out / "train_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report


def _train_recommender(cfg, prepared, out):
    data = build_interactions(prepared, "user_id", "title", "r_score")
    if cfg.model == "als":
        estimator = ALSExplicit(rank=cfg.als_rank, reg=cfg.als_reg,
                                sweeps=cfg.als_sweeps, seed=cfg.seed)
    else:
        estimator = ALSImplicit(rank=cfg.als_rank, reg=cfg.als_reg,
                                sweeps=cfg.als_sweeps, alpha=cfg.als_alpha,
                                seed=cfg.seed)
    started = time.perf_counter()
    rmse, r2, n_test = evaluate_holdout(estimator, data, cfg.seed)
    model = estimator.clone().fit(data)
    train_seconds = time.perf_counter() - started

    rng = np.random.default_rng(cfg.seed)
    n_pairs = min(64, data.num_triples)
    pick = rng.choice(data.num_triples, size=n_pairs, replace=False)
    pairs = [
        (data.user_ids[data.users[i]], data.item_ids[data.items[i]])
        for i in pick
    ]
    probe_users = [data.user_ids[u] for u in
                   rng.choice(data.num_users, size=min(5, data.num_users), replace=False)]
    artifact = {
        "artifact": "recommender",
        "config": cfg.effective(),
        "model": model_to_json(model),
        "probes": {
            "pairs": [
                {"user": u, "item": v, "score": model.score(u, v).value}
                for u, v in pairs
            ],
            "top_n": [
                {"user": u, "n": 5,
                 "items": [item for item, _ in model.recommend_top_n(u, 5, exclude_seen=False)[0]]}
                for u in probe_users
            ],
        },
    }
    save_artifact(out / "model.json", artifact)

    report = {
        "config": cfg.effective(),
        "interactions": {
            "users": data.num_users, "items": data.num_items,
            "triples": data.num_triples, "dropped_nulls": data.dropped_nulls,
            "duplicates_resolved": data.duplicates_resolved,
        },
        "holdout": {"rmse": rmse, "r2": r2, "n_test": n_test, "seed": cfg.seed,
                    "protocol": "one held-out rating per user with >= 2 ratings"},
        "r2_explanation": R2_EXPLANATION,
        "objective_trace": np.asarray(model.objective_trace_).tolist(),
        "wall_time_s": {"train": train_seconds},
    }
    lines = [
        f"model={cfg.model} rank={cfg.als_rank} reg={cfg.als_reg} "
        f"sweeps={cfg.als_sweeps} alpha={cfg.als_alpha} seed={cfg.seed}",
        "",
        "per-user holdout evaluation:",
        report_mod.regression_table([(cfg.model, rmse, r2)]),
        "",
        R2_EXPLANATION,
    ]
    _write_json(out / "train_report.json", report)
    (out / "train_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report


def cmd_train(cfg):
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prepared = _load_prepared(cfg)
    if cfg.model in RECOMMENDER_MODELS:
        report = _train_recommender(cfg, prepared, out)
    else:
        report = _train_classifier(cfg, prepared, out)
    _mark_done(out, "train")
    print((out / "train_report.txt").read_text(encoding="utf-8"))
    return report


# ---------------------------------------------------------------- compare


def cmd_compare(cfg):
    """Binary-vs-multiclass logistic regression on identical features and split."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prepared = _load_prepared(cfg)
    train_tbl, test_tbl = split_random(prepared, 1.0 - cfg.test_fraction, cfg.seed)

    scores = np.asarray(train_tbl.column("r_score").values, dtype=np.int64)
    shares = np.bincount(scores, minlength=6)[1:] / scores.shape[0]
    if shares.max() >= 0.99:
        report = {
            "config": cfg.effective(),
            "inconclusive": True,
            "reason": "single-class-dominant: one rating value covers "
                      f"{shares.max():.1%} of training rows",
        }
        _write_json(out / "compare_report.json", report)
        (out / "compare_report.txt").write_text(report["reason"] + "\n", encoding="utf-8")
        _mark_done(out, "compare")
        print("comparison inconclusive: " + report["reason"])
        return report

    pipe = Pipeline(feature_stages(cfg))
    pipe.fit(train_tbl)
    rows = []
    metrics = {}
    for label_mode in ("multiclass", "binary"):
        sub = dataclasses.replace(cfg, label_mode=label_mode)
        X_train, y_train, k = features_and_labels(pipe, train_tbl, sub)
        X_test, y_test, _ = features_and_labels(pipe, test_tbl, sub)
        started = time.perf_counter()
        model = LogisticRegressionClassifier(
            num_classes=k, l2_reg=0.01, max_iters=150, seed=cfg.seed
        ).fit(X_train, y_train)
        seconds = time.perf_counter() - started
        rep = evaluate_multiclass(model.predict(X_test), y_test, k)
        rows.append((f"logistic ({label_mode})", rep, seconds))
        metrics[label_mode] = {"report": rep, "seconds": seconds}

    delta = metrics["binary"]["report"].accuracy - metrics["multiclass"]["report"].accuracy
    report = {
        "config": cfg.effective(),
        "inconclusive": False,
        "split": {"train_rows": train_tbl.row_count, "test_rows": test_tbl.row_count,
                  "test_fraction": cfg.test_fraction, "seed": cfg.seed},
        "multiclass": metrics["multiclass"]["report"].as_dict(),
        "binary": metrics["binary"]["report"].as_dict(),
        "accuracy_delta": delta,
        "wall_time_s": {m: metrics[m]["seconds"] for m in metrics},
    }
    lines = [
        "binary vs multiclass logistic regression "
        f"(identical features, split, seed={cfg.seed}):",
        "",
        report_mod.metrics_table(rows),
        "",
        f"accuracy delta (binary - multiclass): {delta:+.4f}",
        "",
        "multiclass confusion matrix:",
        report_mod.confusion_table(metrics["multiclass"]["report"].confusion),
        "",
        "binary confusion matrix:",
        report_mod.confusion_table(metrics["binary"]["report"].confusion),
    ]
    _write_json(out / "compare_report.json", report)
    (out / "compare_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _mark_done(out, "compare")
    print("\n".join(lines))
    return report


# ---------------------------------------------------------------- recommend


def cmd_recommend(cfg, user_id, n, exclude_seen=True, evaluate=False):
    out = Path(cfg.out_dir)
    artifact = load_artifact(out / "model.json")
    if artifact.get("artifact") != "recommender":
        raise DataError("model.json is not a recommender artifact; train als/als_implicit first")
    model = model_from_json(artifact["model"])
    prepared = _load_prepared(cfg)
    data = build_interactions(prepared, "user_id", "title", "r_score")
    items, cold = model.recommend_top_n(user_id, n, exclude_seen=exclude_seen,
                                        interactions=data)
    lines = [f"top-{n} for user {user_id}" + (" [cold-start popularity fallback]" if cold else "")]
    for rank, (title, value) in enumerate(items, 1):
        lines.append(f"{rank:2d}. {title}  score={value:.4f}")
    report = {
        "config": cfg.effective(),
        "user": user_id,
        "cold_start": cold,
        "recommendations": [{"title": t, "score": s} for t, s in items],
    }
    if evaluate:
        estimator = model.clone()
        rmse, r2, n_test = evaluate_holdout(estimator, data, cfg.seed)
        report["holdout"] = {"rmse": rmse, "r2": r2, "n_test": n_test}
        report["r2_explanation"] = R2_EXPLANATION
        lines += ["", report_mod.regression_table([(artifact["model"]["kind"], rmse, r2)]),
                  "", R2_EXPLANATION]
    _write_json(out / "recommend_report.json", report)
    (out / "recommend_report.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    _mark_done(out, "recommend")
    print("\n".join(lines))
    return report


# ---------------------------------------------------------------- verify


def _rebuild_probe_table(inputs):
    schema = [(name, col["dtype"], True) for name, col in inputs.items()]
    data = {name: col["values"] for name, col in inputs.items()}
    return Table.build(schema, data)


def cmd_verify(path):
    """Deserialize an artifact and re-check its embedded probe expectations."""
    artifact = load_artifact(path)
    mismatches = []
    if artifact.get("artifact") == "classifier":
        pipe = Pipeline.from_json(artifact["pipeline"])
        model = model_from_json(artifact["model"])
        probes = artifact["probes"]
        table = _rebuild_probe_table(probes["inputs"])
        out = pipe.transform(table)
        feats = [out.column("features").value_at(i) for i in range(out.row_count)]
        for i, (vec, expect) in enumerate(zip(feats, probes["expected_features"])):
            got = {"dim": vec.dim, "indices": vec.indices.tolist(), "values": vec.values.tolist()}
            if got != expect:
                mismatches.append(f"feature vector {i} differs")
        X = stack_vectors(feats)
        preds = model.predict(X)
        for i, (got, expect) in enumerate(zip(preds, probes["expected_labels"])):
            if int(got) != expect:
                mismatches.append(f"prediction {i}: got {int(got)}, expected {expect}")
        if probes.get("expected_scores") is not None:
            if _model_scores(model, X) != probes["expected_scores"]:
                mismatches.append("model scores differ")
    elif artifact.get("artifact") == "recommender":
        model = model_from_json(artifact["model"])
        for probe in artifact["probes"]["pairs"]:
            got = model.score(probe["user"], probe["item"]).value
            if got != probe["score"]:
                mismatches.append(f"score({probe['user']}, {probe['item']}) differs")
        for probe in artifact["probes"]["top_n"]:
            items, _ = model.recommend_top_n(probe["user"], probe["n"], exclude_seen=False)
            if [t for t, _ in items] != probe["items"]:
                mismatches.append(f"top-{probe['n']} for {probe['user']} differs")
    else:
        raise DataError(f"{path}: unknown artifact kind {artifact.get('artifact')!r}")
    if mismatches:
        raise DataError(
            f"{path}: verification failed with {len(mismatches)} mismatch(es): "
            + "; ".join(mismatches[:5])
        )
    print(f"{path}: verified ({artifact['artifact']})")
    return 0


# ---------------------------------------------------------------- synth


def cmd_synth(args):
    stats = generate_corpus(
        args.out,
        n_ratings=args.rows,
        seed=args.seed if args.seed is not None else 7,
        correlation=args.correlation,
        missing_price_rate=args.missing_price_rate,
        malformed_rate=args.malformed_rate,
    )
    print(
        f"wrote {stats.n_ratings} ratings over {stats.n_books} books / "
        f"{stats.n_users} users -> {args.out} "
        f"(malformed={stats.malformed_written}, missing_price={stats.missing_price})"
    )
    return stats


# ---------------------------------------------------------------- argparse


def _add_common(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--out", dest="out_dir", default=None, help="output directory")
    sub.add_argument("--sample-rows", dest="sample_rows", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bookml",
        description="Book-review rating prediction and recommendation pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="ingest, join, clean, and persist the modeling table")
    _add_common(p)
    p.add_argument("--ratings-csv", dest="ratings_csv", default=None)
    p.add_argument("--books-csv", dest="books_csv", default=None)

    p = sub.add_parser("train", help="fit the configured model under cv or tvs tuning")
    _add_common(p)
    p.add_argument("--model", default=None, choices=CLASSIFIER_MODELS + RECOMMENDER_MODELS)
    p.add_argument("--label-mode", dest="label_mode", default=None,
                   choices=("multiclass", "binary"))
    p.add_argument("--tuning", default=None, choices=("cv", "tvs"))
    p.add_argument("--k", dest="cv_k", type=int, default=None)
    p.add_argument("--ratio", dest="tvs_ratio", type=float, default=None)
    p.add_argument("--metric", default=None)
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=None)
    p.add_argument("--min-df", dest="min_df", type=int, default=None)
    p.add_argument("--use-review-text", dest="use_review_text",
                   action="store_const", const=True, default=None)
    p.add_argument("--rank", dest="als_rank", type=int, default=None)
    p.add_argument("--reg", dest="als_reg", type=float, default=None)
    p.add_argument("--sweeps", dest="als_sweeps", type=int, default=None)
    p.add_argument("--alpha", dest="als_alpha", type=float, default=None)

    p = sub.add_parser("compare", help="binary vs multiclass logistic on identical features")
    _add_common(p)
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=None)
    p.add_argument("--min-df", dest="min_df", type=int, default=None)

    p = sub.add_parser("recommend", help="top-n titles from a trained factor model")
    _add_common(p)
    p.add_argument("--user", required=True)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--include-seen", action="store_true",
                   help="keep titles the user already rated")
    p.add_argument("--evaluate", action="store_true",
                   help="also report per-user holdout RMSE / R2")

    p = sub.add_parser("verify-model", help="round-trip a saved artifact against its probes")
    _add_common(p)
    p.add_argument("--path", default=None, help="artifact path (default: OUT/model.json)")

    p = sub.add_parser("synth", help="generate a synthetic two-file corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--rows", type=int, default=5000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--correlation", type=float, default=0.6)
    p.add_argument("--missing-price-rate", type=float, default=0.02)
    p.add_argument("--malformed-rate", type=float, default=0.0)

    return parser


CONFIG_KEYS = (
    "ratings_csv", "books_csv", "out_dir", "sample_rows", "label_mode", "model",
    "tuning", "cv_k", "tvs_ratio", "metric", "seed", "vocab_size", "min_df",
    "use_review_text", "als_rank", "als_reg", "als_sweeps", "als_alpha",
)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            cmd_synth(args)
            return 0
        overrides = {
            key: getattr(args, key) for key in CONFIG_KEYS if hasattr(args, key)
        }
        cfg = load_config(args.config, overrides)
        if args.command == "prepare":
            cmd_prepare(cfg)
        elif args.command == "train":
            cmd_train(cfg)
        elif args.command == "compare":
            cmd_compare(cfg)
        elif args.command == "recommend":
            cmd_recommend(cfg, args.user, args.n,
                          exclude_seen=not args.include_seen,
                          evaluate=args.evaluate)
        elif args.command == "verify-model":
            path = args.path or (Path(cfg.out_dir) / "model.json")
            cmd_verify(path)
        return 0
    except BookmlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
