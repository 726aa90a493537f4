"""Stratified k-fold evaluation, pooled and per-class metrics, AUC, and
single-feature importance.

Micro metrics pool one-vs-rest counts across classes, so for single-label
prediction micro precision = micro recall = micro F1 = accuracy, exactly.
Macro metrics are unweighted means of per-class one-vs-rest values. AUC is
the rank statistic with average ranks on tied scores.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .features import FAMILY_SLICES, FEATURE_NAMES, LabeledDataset, impute_influence
from .models import ModelSpec, TrainedModel, predict_batch, train


def kfold_split(labels, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """Split indices into k stratified folds.

    ``labels`` is the per-item class sequence (or a plain count for the
    unstratified case). Per-class blocks are shuffled, then dealt
    round-robin through one global pointer, so fold sizes differ by at
    most one both overall and within every class.
    """
    if isinstance(labels, (int, np.integer)):
        labels = [0] * int(labels)
    n = len(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ValueError(f"cannot split {n} items into {k} folds")
    rng = np.random.default_rng(seed)
    arr = np.asarray(labels)
    folds: list[list[int]] = [[] for _ in range(k)]
    pointer = 0
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(arr == cls)
        idx = idx[rng.permutation(len(idx))]
        for i in idx:
            folds[pointer % k].append(int(i))
            pointer += 1
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def average_ranks(x) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their rank range."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    sx = x[order]
    new_group = np.r_[True, sx[1:] != sx[:-1]] if len(x) else np.array([], dtype=bool)
    group = np.cumsum(new_group) - 1
    counts = np.bincount(group) if len(x) else np.array([], dtype=np.int64)
    ends = np.cumsum(counts)
    starts = ends - counts
    mean_rank = (starts + ends - 1) / 2.0 + 1.0
    ranks = np.empty(len(x), dtype=np.float64)
    ranks[order] = mean_rank[group]
    return ranks


def _rank_auc(scores: np.ndarray, positive: np.ndarray) -> Optional[float]:
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = average_ranks(scores)
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0)
                 / (n_pos * n_neg))


def _safe_ratio(num: float, den: float) -> float:
    return float(num / den) if den > 0 else 0.0


@dataclass
class MetricsReport:
    classes: tuple
    micro_precision: float
    micro_recall: float
    micro_f1: float
    micro_roc_auc: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_auc: float
    per_class_precision: dict
    per_class_recall: dict
    per_class_f1: dict
    confusion: np.ndarray
    fold_count: int = 1

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "micro": {
                "precision": self.micro_precision,
                "recall": self.micro_recall,
                "f1": self.micro_f1,
                "roc_auc": self.micro_roc_auc,
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
                "auc": self.macro_auc,
            },
            "per_class": {
                c: {
                    "precision": self.per_class_precision[c],
                    "recall": self.per_class_recall[c],
                    "f1": self.per_class_f1[c],
                }
                for c in self.classes
            },
            "confusion": self.confusion.tolist(),
            "fold_count": self.fold_count,
        }


def metrics(y_true: Sequence, y_pred: Sequence, scores,
            classes: Optional[Sequence] = None) -> MetricsReport:
    """Score predictions against truth.

    ``scores`` holds one confidence row per item, columns aligned with
    ``classes`` (default: sorted union of observed labels). Classes with
    no positive or no negative examples are excluded from the macro AUC
    mean with a warning.
    """
    if len(y_true) != len(y_pred):
        raise ValueError("y_true and y_pred lengths differ")
    if classes is None:
        classes = sorted(set(y_true) | set(y_pred))
    classes = tuple(classes)
    scores = np.asarray(scores, dtype=np.float64)
    n, n_classes = len(y_true), len(classes)
    if scores.shape != (n, n_classes):
        raise ValueError(f"scores must have shape ({n}, {n_classes})")
    index = {c: i for i, c in enumerate(classes)}
    t = np.array([index[v] for v in y_true], dtype=np.int64)
    p = np.array([index[v] for v in y_pred], dtype=np.int64)

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (t, p), 1)
    tp = np.diag(confusion).astype(np.float64)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp

    micro_precision = _safe_ratio(tp.sum(), tp.sum() + fp.sum())
    micro_recall = _safe_ratio(tp.sum(), tp.sum() + fn.sum())
    # count form keeps the pooled identity exact in floating point
    micro_f1 = _safe_ratio(2 * tp.sum(), 2 * tp.sum() + fp.sum() + fn.sum())

    per_precision = {c: _safe_ratio(tp[i], tp[i] + fp[i]) for c, i in index.items()}
    per_recall = {c: _safe_ratio(tp[i], tp[i] + fn[i]) for c, i in index.items()}
    per_f1 = {c: _safe_ratio(2 * tp[i], 2 * tp[i] + fp[i] + fn[i])
              for c, i in index.items()}

    onehot = np.zeros((n, n_classes), dtype=bool)
    onehot[np.arange(n), t] = True
    micro_auc = _rank_auc(scores.ravel(), onehot.ravel())
    if micro_auc is None:
        micro_auc = 0.0

    class_aucs = []
    for c, i in index.items():
        auc = _rank_auc(scores[:, i], t == i)
        if auc is None:
            warnings.warn(
                f"class {c!r} lacks positive or negative examples; "
                "excluded from macro AUC")
            continue
        class_aucs.append(auc)
    macro_auc = float(np.mean(class_aucs)) if class_aucs else 0.0

    return MetricsReport(
        classes=classes,
        micro_precision=micro_precision,
        micro_recall=micro_recall,
        micro_f1=micro_f1,
        micro_roc_auc=micro_auc,
        macro_precision=float(np.mean([per_precision[c] for c in classes])),
        macro_recall=float(np.mean([per_recall[c] for c in classes])),
        macro_f1=float(np.mean([per_f1[c] for c in classes])),
        macro_auc=macro_auc,
        per_class_precision=per_precision,
        per_class_recall=per_recall,
        per_class_f1=per_f1,
        confusion=confusion,
        fold_count=1,
    )


def _mean_reports(reports: list[MetricsReport], classes: tuple) -> MetricsReport:
    def avg(attr):
        return float(np.mean([getattr(r, attr) for r in reports]))

    def avg_dict(attr):
        return {c: float(np.mean([getattr(r, attr)[c] for r in reports]))
                for c in classes}

    return MetricsReport(
        classes=classes,
        micro_precision=avg("micro_precision"),
        micro_recall=avg("micro_recall"),
        micro_f1=avg("micro_f1"),
        micro_roc_auc=avg("micro_roc_auc"),
        macro_precision=avg("macro_precision"),
        macro_recall=avg("macro_recall"),
        macro_f1=avg("macro_f1"),
        macro_auc=avg("macro_auc"),
        per_class_precision=avg_dict("per_class_precision"),
        per_class_recall=avg_dict("per_class_recall"),
        per_class_f1=avg_dict("per_class_f1"),
        confusion=np.sum([r.confusion for r in reports], axis=0),
        fold_count=len(reports),
    )


def cross_validate(spec: ModelSpec, dataset: LabeledDataset,
                   k: int = 10) -> MetricsReport:
    """k-fold CV with the scaler and influence median fit per training fold.

    Fold metrics are averaged; confusion matrices are summed.
    """
    classes = tuple(dataset.classes)
    folds = kfold_split(dataset.y, k=k, seed=spec.random_seed)
    reports = []
    for held_out in range(k):
        test_idx = folds[held_out]
        train_idx = np.concatenate(
            [folds[j] for j in range(k) if j != held_out])
        train_idx.sort()
        X, median = impute_influence(dataset, train_idx)
        model = train(spec, X[train_idx], [dataset.y[i] for i in train_idx],
                      imputed_influence=median)
        y_pred, proba = predict_batch(model, X[test_idx])
        scores = np.zeros((len(test_idx), len(classes)))
        for j, c in enumerate(model.classes):
            scores[:, classes.index(c)] = proba[:, j]
        y_test = [dataset.y[i] for i in test_idx]
        reports.append(metrics(y_test, y_pred, scores, classes=classes))
    return _mean_reports(reports, classes)


def fit_on_dataset(spec: ModelSpec, dataset: LabeledDataset,
                   trained_at: Optional[str] = None) -> TrainedModel:
    """Train on the whole dataset; the influence median comes from all rows."""
    all_idx = np.arange(len(dataset))
    X, median = impute_influence(dataset, all_idx)
    return train(spec, X, dataset.y, imputed_influence=median,
                 trained_at=trained_at)


def single_feature_importance(dataset: LabeledDataset,
                              spec: Optional[ModelSpec] = None,
                              k: int = 10) -> list[tuple[str, float]]:
    """Macro F1 of each feature alone, each family, and all features.

    Every entry is a cross-validated run of the given spec (default
    binary linear SVM) restricted to that column subset. The returned
    list is sorted by macro F1, best first.
    """
    if spec is None:
        spec = ModelSpec(kind="linear_svm", class_mode="binary")
    rows: list[tuple[str, float]] = []
    names = dataset.feature_names
    for name in names:
        report = cross_validate(spec, dataset.subset_features([name]), k=k)
        rows.append((name, report.macro_f1))
    if names == list(FEATURE_NAMES):
        for family, sl in FAMILY_SLICES.items():
            subset = dataset.subset_features(list(FEATURE_NAMES[sl]))
            report = cross_validate(spec, subset, k=k)
            rows.append((family, report.macro_f1))
    rows.append(("ALL", cross_validate(spec, dataset, k=k).macro_f1))
    rows.sort(key=lambda item: (-item[1], item[0]))
    return rows


def spearman(x, y) -> float:
    """Rank correlation with average ranks on ties."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("inputs must be equal-length 1-D sequences")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    rx = average_ranks(x)
    ry = average_ranks(y)
    sx = rx.std()
    sy = ry.std()
    if sx == 0.0 or sy == 0.0:
        raise ValueError("rank variance is zero; correlation undefined")
    return float(((rx - rx.mean()) * (ry - ry.mean())).mean() / (sx * sy))


def format_report_table(report: MetricsReport) -> str:
    """Delimited text: micro/macro summary rows then per-class F1."""
    lines = ["metric\tmicro\tmacro"]
    lines.append(f"precision\t{report.micro_precision:.4f}\t{report.macro_precision:.4f}")
    lines.append(f"recall\t{report.micro_recall:.4f}\t{report.macro_recall:.4f}")
    lines.append(f"f1\t{report.micro_f1:.4f}\t{report.macro_f1:.4f}")
    lines.append(f"auc\t{report.micro_roc_auc:.4f}\t{report.macro_auc:.4f}")
    lines.append("")
    lines.append("class\tf1")
    for c in report.classes:
        lines.append(f"{c}\t{report.per_class_f1[c]:.4f}")
    lines.append("")
    lines.append("confusion (rows = true, cols = predicted)")
    lines.append("\t" + "\t".join(str(c) for c in report.classes))
    for i, c in enumerate(report.classes):
        lines.append(str(c) + "\t" + "\t".join(str(int(v)) for v in report.confusion[i]))
    return "\n".join(lines) + "\n"


def save_report(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")


def save_importance_csv(rows: list[tuple[str, float]], path) -> None:
    """Write name,group,macro_f1 rows for bar-chart plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("name,group,macro_f1\n")
        for name, value in rows:
            if name == "ALL":
                group = "all"
            elif name in FAMILY_SLICES:
                group = "family"
            else:
                group = "single"
            fh.write(f"{name},{group},{value!r}\n")
