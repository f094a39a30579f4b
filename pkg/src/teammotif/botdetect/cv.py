"""Stratified k-fold cross validation and precision/recall/F1 scoring."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .classifiers import Classifier, ClassifierKind, train
from .features import AccountFeatures, Label, encode_features


class KTooLargeError(ValueError):
    """More folds requested than samples available."""


class UndefinedMetricError(ValueError):
    """Precision or recall has a zero denominator."""


class PrecisionRecallF1(NamedTuple):
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class CVReport:
    k: int
    folds: list[PrecisionRecallF1]
    mean_precision: float
    mean_recall: float
    mean_f1: float

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "folds": [
                {"precision": f.precision, "recall": f.recall, "f1": f.f1} for f in self.folds
            ],
            "mean_precision": self.mean_precision,
            "mean_recall": self.mean_recall,
            "mean_f1": self.mean_f1,
        }


def f1_from_precision_recall(precision: float, recall: float) -> float:
    """Harmonic mean, defined as 0 when precision + recall = 0."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def f1_score(tp: int, fp: int, fn: int) -> PrecisionRecallF1:
    """Precision, recall, and F1 from confusion counts.

    Raises :class:`UndefinedMetricError` when tp+fp or tp+fn is zero.
    """
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be nonnegative")
    if tp + fp == 0:
        raise UndefinedMetricError("precision undefined: no predicted positives")
    if tp + fn == 0:
        raise UndefinedMetricError("recall undefined: no actual positives")
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return PrecisionRecallF1(precision, recall, f1_from_precision_recall(precision, recall))


def stratified_kfold(labels: Sequence, k: int, seed: int = 0) -> list[list[int]]:
    """Partition indices into k folds preserving class proportions.

    Per-class fold counts differ by at most one; total fold sizes differ by at
    most one.  Reproducible for a fixed seed.
    """
    n = len(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise KTooLargeError(f"k={k} exceeds sample count {n}")
    rng = random.Random(seed)
    by_class: dict[object, list[int]] = {}
    for index, label in enumerate(labels):
        by_class.setdefault(label, []).append(index)
    ordered: list[int] = []
    for indices in by_class.values():
        rng.shuffle(indices)
        ordered.extend(indices)
    # Dealing consecutive positions round-robin keeps every class block and the
    # totals balanced to within one sample per fold.
    folds: list[list[int]] = [[] for _ in range(k)]
    for position, index in enumerate(ordered):
        folds[position % k].append(index)
    for fold in folds:
        fold.sort()
    return folds


def confusion_counts(
    truth: Sequence[Label], predicted: Sequence[Label], positive: Label = Label.BOT
) -> tuple[int, int, int]:
    tp = fp = fn = 0
    for t, p in zip(truth, predicted):
        if p is positive:
            if t is positive:
                tp += 1
            else:
                fp += 1
        elif t is positive:
            fn += 1
    return tp, fp, fn


def _fold_metrics(tp: int, fp: int, fn: int) -> PrecisionRecallF1:
    # Zero-denominator folds score 0 rather than aborting the whole CV.
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return PrecisionRecallF1(precision, recall, f1_from_precision_recall(precision, recall))


def evaluate_cv(
    kind: ClassifierKind,
    features: Sequence[AccountFeatures] | np.ndarray,
    labels: Sequence[Label],
    k: int = 5,
    seed: int = 0,
    params: dict | None = None,
    threshold: float = 0.5,
) -> CVReport:
    """Stratified k-fold evaluation: train on k-1 folds, score the held-out one."""
    X = features if isinstance(features, np.ndarray) else encode_features(features)
    folds = stratified_kfold(labels, k, seed)
    metrics: list[PrecisionRecallF1] = []
    for held_out in folds:
        held_set = set(held_out)
        train_idx = [i for i in range(len(labels)) if i not in held_set]
        model = train(
            kind,
            X[train_idx],
            [labels[i] for i in train_idx],
            params=params,
            seed=seed,
            threshold=threshold,
        )
        probabilities = model.predict_proba_matrix(X[held_out])
        predicted = [Label.BOT if p >= threshold else Label.HUMAN for p in probabilities]
        truth = [labels[i] for i in held_out]
        metrics.append(_fold_metrics(*confusion_counts(truth, predicted)))
    return CVReport(
        k=k,
        folds=metrics,
        mean_precision=float(np.mean([m.precision for m in metrics])),
        mean_recall=float(np.mean([m.recall for m in metrics])),
        mean_f1=float(np.mean([m.f1 for m in metrics])),
    )
