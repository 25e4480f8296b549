"""Precision, recall and F1 for multi-label and binary predictions.

Undefined ratios (a zero denominator) are reported as 0 and counted in
``EvalReport.zero_division``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from rtheta.dataset import mask_matrix

AVERAGES = ("micro", "macro", "weighted", "samples")
BINARY_NAMES = ("non-math", "math")


@dataclass(frozen=True)
class Scores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    classes: tuple[str, ...]
    per_class: list[Scores]
    averages: dict[str, Scores]
    subset_accuracy: float
    n_rows: int
    accuracy: Optional[float] = None
    zero_division: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def is_binary(self) -> bool:
        return self.accuracy is not None

    def class_scores(self, name: str) -> Scores:
        return self.per_class[self.classes.index(name)]

    def to_dict(self) -> dict:
        return {
            "classes": list(self.classes),
            "per_class": {c: asdict(s) for c, s in zip(self.classes, self.per_class)},
            "averages": {k: asdict(v) for k, v in self.averages.items()},
            "accuracy": self.accuracy,
            "subset_accuracy": self.subset_accuracy,
            "n_rows": self.n_rows,
            "zero_division": self.zero_division,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        classes = tuple(d["classes"])
        return cls(
            classes,
            [Scores(**d["per_class"][c]) for c in classes],
            # JSON sorts keys; restore the display order
            {k: Scores(**d["averages"][k]) for k in AVERAGES if k in d["averages"]},
            float(d["subset_accuracy"]),
            int(d["n_rows"]),
            d.get("accuracy"),
            int(d.get("zero_division", 0)),
            dict(d.get("meta", {})),
        )

    def to_text(self, digits: int = 2) -> str:
        """Fixed-width table: one row per class, then the averages."""
        width = max([len(c) for c in self.classes] + [len("weighted avg"), 12])
        head = f"{'':>{width}} {'precision':>9} {'recall':>9} {'f1-score':>9} {'support':>9}"
        lines = [head, ""]

        def row(name, s: Scores):
            return (f"{name:>{width}} {s.precision:>9.{digits}f} {s.recall:>9.{digits}f}"
                    f" {s.f1:>9.{digits}f} {s.support:>9d}")

        for name, s in zip(self.classes, self.per_class):
            lines.append(row(name, s))
        lines.append("")
        if self.is_binary:
            lines.append(f"{'accuracy':>{width}} {'':>9} {'':>9} {self.accuracy:>9.{digits}f}"
                         f" {self.n_rows:>9d}")
        for key, s in self.averages.items():
            lines.append(row(f"{key} avg", s))
        return "\n".join(lines) + "\n"


def _ratio(num: float, den: float, counter: list) -> float:
    if den == 0:
        counter[0] += 1
        return 0.0
    return float(num) / float(den)


def _f1(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _scores(tp, fp, fn, counter) -> Scores:
    p = _ratio(tp, tp + fp, counter)
    r = _ratio(tp, tp + fn, counter)
    return Scores(p, r, _f1(p, r), int(tp + fn))


def evaluate(pred_masks, true_masks, classes: Sequence[str]) -> EvalReport:
    """Per-class and averaged scores for label masks over ``classes``."""
    pred_masks = np.asarray(pred_masks, dtype=np.int64)
    true_masks = np.asarray(true_masks, dtype=np.int64)
    if pred_masks.shape != true_masks.shape:
        raise ValueError(f"prediction/truth length mismatch: {pred_masks.shape} vs {true_masks.shape}")
    k = len(classes)
    P = mask_matrix(pred_masks, k)
    T = mask_matrix(true_masks, k)
    counter = [0]
    tp = (P & T).sum(axis=0)
    fp = (P & (1 - T)).sum(axis=0)
    fn = ((1 - P) & T).sum(axis=0)
    per_class = [_scores(tp[j], fp[j], fn[j], counter) for j in range(k)]
    support = T.sum(axis=0)
    total = int(support.sum())

    micro = _scores(tp.sum(), fp.sum(), fn.sum(), counter)
    macro = Scores(
        float(np.mean([s.precision for s in per_class])) if k else 0.0,
        float(np.mean([s.recall for s in per_class])) if k else 0.0,
        float(np.mean([s.f1 for s in per_class])) if k else 0.0,
        total,
    )
    if total:
        wts = support / total
        weighted = Scores(
            float(sum(w * s.precision for w, s in zip(wts, per_class))),
            float(sum(w * s.recall for w, s in zip(wts, per_class))),
            float(sum(w * s.f1 for w, s in zip(wts, per_class))),
            total,
        )
    else:
        weighted = Scores(0.0, 0.0, 0.0, 0)

    rows_p, rows_r, rows_f = [], [], []
    for p_row, t_row in zip(P, T):
        hit = int((p_row & t_row).sum())
        p = _ratio(hit, int(p_row.sum()), counter)
        r = _ratio(hit, int(t_row.sum()), counter)
        rows_p.append(p)
        rows_r.append(r)
        rows_f.append(_f1(p, r))
    n = len(P)
    samples = Scores(
        float(np.mean(rows_p)) if n else 0.0,
        float(np.mean(rows_r)) if n else 0.0,
        float(np.mean(rows_f)) if n else 0.0,
        total,
    )
    subset = float(np.mean(pred_masks == true_masks)) if n else 0.0
    return EvalReport(
        tuple(classes),
        per_class,
        dict(zip(AVERAGES, (micro, macro, weighted, samples))),
        subset,
        n,
        zero_division=counter[0],
    )


def evaluate_binary(pred, true, names: Sequence[str] = BINARY_NAMES) -> EvalReport:
    """Two-class report (negative then positive) with accuracy.

    The layout keeps the macro and weighted averages, as is customary for
    a single-label task.
    """
    pred = np.asarray(pred, dtype=np.int64)
    true = np.asarray(true, dtype=np.int64)
    # one-hot masks: bit 0 = negative class, bit 1 = positive class
    report = evaluate(1 << pred, 1 << true, tuple(names))
    report.accuracy = report.subset_accuracy
    report.averages = {k: report.averages[k] for k in ("macro", "weighted")}
    return report
