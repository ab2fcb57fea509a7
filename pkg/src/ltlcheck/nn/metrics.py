"""Classification and one-vs-many ranking metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Metrics:
    accuracy: float | None = None
    precision: float | None = None
    recall: float | None = None
    tp: int | None = None
    fp: int | None = None
    fn: int | None = None
    tn: int | None = None
    mrr: float | None = None
    hits_at_k: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("accuracy", "precision", "recall", "tp", "fp", "fn", "tn", "mrr")}
        out.update({f"hits@{k}": v for k, v in sorted(self.hits_at_k.items())})
        return {k: v for k, v in out.items() if v is not None}


def confusion_metrics(tp: int, fp: int, fn: int, tn: int) -> Metrics:
    n = tp + fp + fn + tn
    if n == 0:
        raise ValueError("empty dataset")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return Metrics((tp + tn) / n, precision, recall, tp, fp, fn, tn)


def classification_from_scores(probs, labels) -> Metrics:
    """Probability >= 0.5 predicts 1, so an exact tie counts as positive."""
    p = np.asarray(probs, dtype=float)
    y = np.asarray(labels, dtype=int)
    if len(p) == 0:
        raise ValueError("empty dataset")
    pred = (p >= 0.5).astype(int)
    tp = int(np.sum((pred == 1) & (y == 1)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    tn = int(np.sum((pred == 0) & (y == 0)))
    return confusion_metrics(tp, fp, fn, tn)


def evaluate_classification(model, ds) -> Metrics:
    from .train import as_graphs

    graphs = as_graphs(ds, model.dtype)
    if not graphs:
        raise ValueError("empty dataset")
    return classification_from_scores(model.predict_proba(graphs), [g.label for g in graphs])


def rank_of_positive(scores, positive_index: int) -> int:
    """1-based rank under a descending stable sort; ties keep candidate order."""
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    return int(np.flatnonzero(order == positive_index)[0]) + 1


def ranking_from_ranks(ranks, ks=(1, 3, 10)) -> Metrics:
    r = np.asarray(ranks, dtype=float)
    if len(r) == 0:
        raise ValueError("no ranking groups")
    return Metrics(mrr=float(np.mean(1.0 / r)), hits_at_k={k: float(np.mean(r <= k)) for k in ks})


def evaluate_ranking(model, groups, ks=(1, 3, 10), group_size: int | None = 51) -> Metrics:
    from .train import as_graphs

    ranks = []
    for g in groups:
        if group_size is not None and len(g.samples) != group_size:
            raise ValueError(f"ranking group has {len(g.samples)} candidates, expected {group_size}")
        if sum(s.label for s in g.samples) != 1 or g.samples[g.positive_index].label != 1:
            raise ValueError("ranking group must hold exactly one positive")
        scores = model.predict_proba(as_graphs(g.samples, model.dtype))
        ranks.append(rank_of_positive(scores, g.positive_index))
    return ranking_from_ranks(ranks, ks)
