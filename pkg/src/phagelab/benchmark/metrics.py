"""Precision / recall / F1 at a fixed threshold and the precision-recall curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EvalMetrics:
    precision: float
    recall: float
    f1: float
    pr_curve: list  # (recall, precision) points, recall non-decreasing
    pr_auc: float


def f1_score(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def threshold_metrics(y_true, scores, threshold: float = 0.5):
    """(precision, recall, f1) for the positive class; zero denominators give 0."""
    y = np.asarray(y_true).astype(bool)
    pred = np.asarray(scores) >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return precision, recall, f1_score(precision, recall)


def precision_recall_curve(y_true, scores):
    """Precision and recall after each distinct score threshold, highest first.

    Returns (recall, precision, thresholds). Tied scores form one step.
    """
    y = np.asarray(y_true).astype(float)
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1] if len(s) else np.zeros(0, int)
    tp = np.cumsum(y)[last]
    predicted = last + 1.0
    n_pos = y.sum()
    precision = tp / predicted
    recall = tp / n_pos if n_pos > 0 else np.zeros_like(tp)
    return recall, precision, s[last]


def average_precision(y_true, scores) -> float:
    """Step-wise area under the PR curve: sum of (R_k - R_{k-1}) * P_k."""
    recall, precision, _ = precision_recall_curve(y_true, scores)
    if len(recall) == 0 or recall[-1] == 0:
        return 0.0
    return float(np.sum(np.diff(np.r_[0.0, recall]) * precision))


def evaluate_scores(y_true, scores, threshold: float = 0.5) -> EvalMetrics:
    if len(y_true) == 0:
        raise ValueError("cannot evaluate an empty test set")
    p, r, f = threshold_metrics(y_true, scores, threshold)
    rec, prec, _ = precision_recall_curve(y_true, scores)
    curve = [(0.0, 1.0)] + list(zip(rec.tolist(), prec.tolist()))
    return EvalMetrics(p, r, f, curve, average_precision(y_true, scores))


def evaluate(model, X, y, threshold: float = 0.5) -> EvalMetrics:
    return evaluate_scores(y, model.predict_proba(X), threshold)
