"""Plain-text report tables for experiment output.

Layouts mirror the standard reporting shape for this workflow: a
model-comparison table (Model Name / Accuracy / Precision / Recall / F1 /
Time), a feature-importance table (Feature / Importance), and a
recommender table (Model / RMSE / R2).
"""


def _render(header, rows):
    widths = [
        max(len(str(header[i])), *(len(str(r[i])) for r in rows)) if rows else len(str(header[i]))
        for i in range(len(header))
    ]
    def fmt(row):
        return "  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def metrics_table(rows):
    """rows: (model_name, MetricsReport, wall_time_seconds or None)."""
    body = []
    for name, rep, seconds in rows:
        body.append(
            [
                name,
                f"{rep.accuracy:.4f}",
                f"{rep.weighted_precision:.4f}",
                f"{rep.weighted_recall:.4f}",
                f"{rep.weighted_f1:.4f}",
                "-" if seconds is None else f"{seconds:.1f}s",
            ]
        )
    return _render(["Model Name", "Accuracy", "Precision", "Recall", "F1", "Time"], body)


def tuning_table(result):
    """Per-candidate rows of a TuneResult in the comparison-table layout."""
    body = []
    for cand in result.table:
        name = ", ".join(f"{k}={v}" for k, v in cand.params.items()) or "(defaults)"
        if cand.error is not None:
            body.append([name, "failed", "-", "-", "-", f"{cand.wall_time:.1f}s"])
            continue
        m = cand.mean_metrics
        body.append(
            [
                name,
                f"{m['accuracy']:.4f}",
                f"{m['weighted_precision']:.4f}",
                f"{m['weighted_recall']:.4f}",
                f"{m['weighted_f1']:.4f}",
                f"{cand.wall_time:.1f}s",
            ]
        )
    return _render(["Model Name", "Accuracy", "Precision", "Recall", "F1", "Time"], body)


def importance_table(importances):
    """Feature/Importance rows, descending, from a BlockImportances."""
    body = [[name, f"{value:.6f}"] for name, value in importances.rows()]
    return _render(["Feature", "Importance"], body)


def regression_table(rows):
    """rows: (model_name, rmse, r2 or None)."""
    body = [
        [name, f"{rmse:.4f}", "n/a" if r2 is None else f"{r2:.4f}"]
        for name, rmse, r2 in rows
    ]
    return _render(["Model", "RMSE", "R2"], body)


def confusion_table(confusion):
    k = len(confusion)
    header = ["truth\\pred"] + [str(c) for c in range(k)]
    body = [[str(c)] + [str(int(v)) for v in row] for c, row in enumerate(confusion)]
    return _render(header, body)
