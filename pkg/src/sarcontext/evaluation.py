"""F1 scoring on the sarcastic class and results-table rendering."""

from __future__ import annotations

import io
from collections.abc import Sequence
from dataclasses import dataclass

from .corpus import Label, Tweet
from .errors import AlignmentError

# canonical report order; grouping drives the best-in-group flags
MODEL_ORDER = (
    "SIARN",
    "EX-CASCADE",
    "EX-W-CASCADE",
    "EX-ED",
    "EX-SUMMARY",
    "IN-CASCADE",
    "IN-W-CASCADE",
    "IN-ED",
    "IN-SUMMARY",
)


@dataclass(frozen=True)
class RunResult:
    dataset: str
    model: str
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int


def binary_f1(tp: int, fp: int, fn: int) -> float:
    """F1 = 2PR/(P+R); any undefined term makes the whole score 0."""
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def f1_score(
    predictions: Sequence,
    golds: Sequence[Tweet],
    positive: Label = Label.SARCASTIC,
    dataset: str = "",
    model: str = "",
) -> RunResult:
    """Score aligned predictions against gold tweets.

    ``predictions`` only needs ``tweet_id`` and ``label`` attributes; each
    must line up with the gold tweet at the same position.
    """
    if not predictions or not golds:
        raise ValueError("cannot score empty prediction or gold lists")
    if len(predictions) != len(golds):
        raise AlignmentError(
            f"{len(predictions)} predictions vs {len(golds)} gold tweets"
        )
    tp = fp = fn = tn = 0
    for pred, gold in zip(predictions, golds):
        if pred.tweet_id != gold.id:
            raise AlignmentError(
                f"prediction for {pred.tweet_id!r} aligned against gold {gold.id!r}"
            )
        hit = pred.label == positive
        truth = gold.label == positive
        if hit and truth:
            tp += 1
        elif hit:
            fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return RunResult(
        dataset=dataset, model=model, f1=binary_f1(tp, fp, fn),
        tp=tp, fp=fp, fn=fn, tn=tn,
    )


@dataclass(frozen=True)
class RenderedTable:
    csv: str
    text: str


def _group_of(model: str) -> str:
    if model.startswith("EX-"):
        return "exclusive"
    if model.startswith("IN-"):
        return "inclusive"
    if model == "SIARN":
        return "baseline"
    return "other"


def _model_sort_key(model: str) -> tuple[int, str]:
    try:
        return (MODEL_ORDER.index(model), model)
    except ValueError:
        return (len(MODEL_ORDER), model)


def results_table(results: Sequence[RunResult]) -> RenderedTable:
    """Render results as CSV and as an aligned text table.

    The text table has one F1 column per dataset; the best score within each
    model group (baseline / exclusive / inclusive) per dataset is starred,
    ties included. Both renderings carry the same 3-decimal F1 values.
    """
    seen: dict[tuple[str, str], RunResult] = {}
    for r in results:
        key = (r.dataset, r.model)
        if key in seen:
            raise ValueError(f"duplicate result for dataset={r.dataset} model={r.model}")
        seen[key] = r

    datasets = sorted({r.dataset for r in seen.values()})
    models = sorted({r.model for r in seen.values()}, key=_model_sort_key)

    csv_buf = io.StringIO()
    csv_buf.write("dataset,model,f1,tp,fp,fn,tn\n")
    for model in models:
        for dataset in datasets:
            r = seen.get((dataset, model))
            if r is None:
                continue
            csv_buf.write(
                f"{r.dataset},{r.model},{r.f1:.3f},{r.tp},{r.fp},{r.fn},{r.tn}\n"
            )

    best: dict[tuple[str, str], float] = {}
    for r in seen.values():
        key = (_group_of(r.model), r.dataset)
        best[key] = max(best.get(key, float("-inf")), r.f1)

    header = ["model", *datasets]
    rows = [header]
    for model in models:
        row = [model]
        for dataset in datasets:
            r = seen.get((dataset, model))
            if r is None:
                row.append("-")
                continue
            star = "*" if r.f1 == best[(_group_of(model), dataset)] else ""
            row.append(f"{r.f1:.3f}{star}")
        rows.append(row)
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    return RenderedTable(csv=csv_buf.getvalue(), text="\n".join(lines) + "\n")
