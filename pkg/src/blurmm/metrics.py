"""AUC, slide-level aggregation, and stratified cross-validation splits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


def auc(labels, scores) -> float:
    """Mann-Whitney AUC: share of positive/negative pairs where the positive
    outscores the negative, ties counted half."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape:
        raise ValueError("labels and scores must have equal length")
    pos = labels == 1
    neg = labels == 0
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = rankdata(scores)
    rank_sum = float(ranks[pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def percentile_75(values) -> float:
    """75th percentile with linear interpolation on fractional rank 0.75*(n-1)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot aggregate an empty score list")
    s = np.sort(values)
    h = 0.75 * (s.size - 1)
    lo = math.floor(h)
    if lo == s.size - 1:
        return float(s[lo])
    return float(s[lo] + (h - lo) * (s[lo + 1] - s[lo]))


@dataclass(frozen=True)
class SlideScore:
    slide_id: str
    label: int
    value: float
    n_tiles: int


def aggregate_slide(slide_id: str, label: int, tile_scores) -> SlideScore:
    """Collapse a slide's tile scores to the 75th percentile."""
    return SlideScore(slide_id, label, percentile_75(tile_scores), len(tile_scores))


@dataclass
class Fold:
    train: list[str]
    tuning: list[str]
    validation: list[str]


@dataclass
class CvSplit:
    folds: list[Fold]
    labels: dict[str, int]


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def cv_split(slide_ids, slide_labels, k: int, seed: int) -> CvSplit:
    """Stratified k-fold split at the slide level, with a per-fold 80/20
    train/tuning subdivision of the non-validation slides.

    Each class is shuffled by the seed and dealt round-robin into the k
    validation folds with a counter continuing across classes, so fold
    sizes differ by at most one slide overall and per class.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    labels = dict(zip(slide_ids, slide_labels))
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[str]] = {}
    for sid in slide_ids:
        by_class.setdefault(labels[sid], []).append(sid)
    shuffled: dict[int, list[str]] = {}
    for cls in sorted(by_class):
        ids = sorted(by_class[cls])
        if len(ids) < k:
            raise ValueError(f"class {cls} has {len(ids)} slides, fewer than k={k}")
        rng.shuffle(ids)
        shuffled[cls] = ids

    validation: list[list[str]] = [[] for _ in range(k)]
    per_class_validation: dict[int, list[list[str]]] = {cls: [[] for _ in range(k)] for cls in shuffled}
    counter = 0
    for cls in sorted(shuffled):
        for sid in shuffled[cls]:
            validation[counter % k].append(sid)
            per_class_validation[cls][counter % k].append(sid)
            counter += 1

    folds = []
    for f in range(k):
        train: list[str] = []
        tuning: list[str] = []
        for cls in sorted(shuffled):
            held = set(per_class_validation[cls][f])
            rest = [sid for sid in shuffled[cls] if sid not in held]
            n_tune = _round_half_up(0.2 * len(rest))
            tuning.extend(rest[:n_tune])
            train.extend(rest[n_tune:])
        folds.append(Fold(train=train, tuning=tuning, validation=validation[f]))
    return CvSplit(folds=folds, labels=labels)
