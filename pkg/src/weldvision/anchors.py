"""Adaptive anchor clustering: k-means over box (w, h) under a 1 - IoU
distance, with corner-aligned IoU and medoid-safe center updates (the mean
best-anchor IoU never decreases across iterations)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifest import DatasetManifest


class AnchorError(ValueError):
    """Clustering parameters are infeasible for the data."""


@dataclass(frozen=True)
class AnchorSet:
    anchors: tuple[tuple[float, float], ...]  # sorted by area ascending
    mean_iou: float
    iou_history: tuple[float, ...] = ()

    def __post_init__(self):
        areas = [w * h for w, h in self.anchors]
        if any(w <= 0 or h <= 0 for w, h in self.anchors):
            raise AnchorError("anchor dimensions must be positive")
        if areas != sorted(areas):
            raise AnchorError("anchors must be sorted by area")


def iou_wh(sizes: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Corner-aligned IoU between (n,2) sizes and (k,2) anchors -> (n,k)."""
    inter = np.minimum(sizes[:, None, 0], anchors[None, :, 0]) * np.minimum(
        sizes[:, None, 1], anchors[None, :, 1]
    )
    union = (
        sizes[:, 0] * sizes[:, 1]
    )[:, None] + (anchors[:, 0] * anchors[:, 1])[None, :] - inter
    return inter / union


def _mean_best_iou(sizes: np.ndarray, anchors: np.ndarray) -> float:
    return float(iou_wh(sizes, anchors).max(axis=1).mean())


def _init_plus_plus(distinct: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centers = [distinct[rng.integers(len(distinct))]]
    while len(centers) < k:
        d = 1.0 - iou_wh(distinct, np.array(centers)).max(axis=1)
        weights = d ** 2
        total = weights.sum()
        if total <= 0:
            # all remaining sizes coincide with a center; pick any unused
            probs = None
        else:
            probs = weights / total
        centers.append(distinct[rng.choice(len(distinct), p=probs)])
    return np.array(centers, dtype=np.float64)


def cluster_anchors(
    source: DatasetManifest | np.ndarray,
    k: int,
    iters: int = 50,
    seed: int = 0,
) -> AnchorSet:
    """Cluster box sizes into k anchors.

    Centers update to the best of {current center, component-wise median,
    cluster medoid}; assignment ties break toward the lower anchor index.
    """
    if isinstance(source, DatasetManifest):
        sizes = np.array(
            [
                (a.bbox.width, a.bbox.height)
                for r in source.records
                for a in r.annotations
            ],
            dtype=np.float64,
        )
    else:
        sizes = np.asarray(source, dtype=np.float64)
    if k < 1:
        raise AnchorError(f"k must be >= 1, got {k}")
    if sizes.size == 0:
        raise AnchorError("no box sizes to cluster")
    distinct = np.unique(sizes, axis=0)
    if k > len(distinct):
        raise AnchorError(f"k={k} exceeds {len(distinct)} distinct sizes")

    rng = np.random.default_rng(seed)
    centers = _init_plus_plus(distinct, k, rng)
    history = [_mean_best_iou(sizes, centers)]
    prev_assign = None
    for _ in range(iters):
        assign = iou_wh(sizes, centers).argmax(axis=1)
        for c in range(k):
            members = sizes[assign == c]
            if len(members) == 0:
                continue
            candidates = [centers[c], np.median(members, axis=0)]
            scores = [
                float(iou_wh(members, cand[None, :]).mean()) for cand in candidates
            ]
            if scores[1] <= scores[0]:
                # median did not help; fall back to the best member (medoid)
                uniq, counts = np.unique(members, axis=0, return_counts=True)
                pair = iou_wh(uniq, uniq)
                medoid = uniq[(pair * counts[None, :]).sum(axis=1).argmax()]
                candidates.append(medoid)
                scores.append(float(iou_wh(members, medoid[None, :]).mean()))
            centers[c] = candidates[int(np.argmax(scores))]
        history.append(_mean_best_iou(sizes, centers))
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign

    order = np.argsort(centers[:, 0] * centers[:, 1], kind="stable")
    centers = centers[order]
    return AnchorSet(
        anchors=tuple((float(w), float(h)) for w, h in centers),
        mean_iou=_mean_best_iou(sizes, centers),
        iou_history=tuple(history),
    )
