"""Dataset manifest: records, JSONL serialization, the seeded split, and
bounding-box statistics.

Manifest file format is JSON-lines, one record per line, under a dataset
directory laid out as images/, labels_yolo/, labels_voc/, manifest.jsonl.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .core import Annotation, BBox, CLASS_LABELS, NUM_CLASSES


class ManifestError(ValueError):
    """Malformed or inconsistent manifest."""


SPLITS = ("train", "val", "unassigned")


@dataclass(frozen=True)
class ManifestRecord:
    frame_id: str
    image_path: str
    width: int
    height: int
    annotations: tuple[Annotation, ...] = ()
    split: str = "unassigned"
    provenance: str = "original"  # "original" | "augmented"
    parent_id: str | None = None

    def __post_init__(self):
        if self.split not in SPLITS:
            raise ManifestError(f"bad split {self.split!r}")
        if self.provenance not in ("original", "augmented"):
            raise ManifestError(f"bad provenance {self.provenance!r}")
        if self.provenance == "augmented" and not self.parent_id:
            raise ManifestError("augmented records need a parent_id")
        for ann in self.annotations:
            b = ann.bbox
            if b.xmin < 0 or b.ymin < 0 or b.xmax > self.width or b.ymax > self.height:
                raise ManifestError(
                    f"{self.frame_id}: annotation {b} outside {self.width}x{self.height}"
                )

    @property
    def group_key(self) -> str:
        return self.parent_id if self.parent_id else self.frame_id

    def to_json(self) -> str:
        d = {
            "frame_id": self.frame_id,
            "image_path": self.image_path,
            "width": self.width,
            "height": self.height,
            "annotations": [
                {
                    "class_id": a.class_id,
                    "label": a.class_label,
                    "bbox": [a.bbox.xmin, a.bbox.ymin, a.bbox.xmax, a.bbox.ymax],
                }
                for a in self.annotations
            ],
            "split": self.split,
            "provenance": self.provenance,
            "parent_id": self.parent_id,
        }
        return json.dumps(d, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ManifestRecord":
        try:
            d = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"bad manifest line at offset {exc.pos}: {exc.msg}") from exc
        anns = tuple(
            Annotation(BBox(*a["bbox"]), int(a["class_id"])) for a in d["annotations"]
        )
        return cls(
            frame_id=d["frame_id"],
            image_path=d["image_path"],
            width=int(d["width"]),
            height=int(d["height"]),
            annotations=anns,
            split=d.get("split", "unassigned"),
            provenance=d.get("provenance", "original"),
            parent_id=d.get("parent_id"),
        )


@dataclass
class DatasetManifest:
    records: list[ManifestRecord] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.frame_id in seen:
                raise ManifestError(f"duplicate frame_id {r.frame_id}")
            seen.add(r.frame_id)

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self, frame_id: str) -> ManifestRecord:
        for r in self.records:
            if r.frame_id == frame_id:
                return r
        raise KeyError(frame_id)

    def save(self, path: str | Path) -> None:
        text = "".join(r.to_json() + "\n" for r in self.records)
        Path(path).write_text(text, encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        records = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(ManifestRecord.from_json(line))
        return cls(records)


def _shuffle_rank(seed: int, key: str) -> str:
    return hashlib.blake2b(f"{seed}:{key}".encode(), digest_size=8).hexdigest()


def split(
    manifest: DatasetManifest,
    ratio: tuple[int, int] = (8, 2),
    seed: int = 0,
    group_by_parent: bool = True,
) -> DatasetManifest:
    """Assign train/val splits by a deterministic seeded shuffle.

    Grouping by parent keeps every augmented variant in its original's
    split. Val size = round-half-up(val_share x group_count), remainder
    train.
    """
    if ratio[0] <= 0 or ratio[1] <= 0:
        raise ManifestError(f"ratio parts must be positive, got {ratio}")
    if not manifest.records:
        raise ManifestError("cannot split an empty manifest")
    if group_by_parent:
        groups = sorted({r.group_key for r in manifest.records})
    else:
        groups = sorted({r.frame_id for r in manifest.records})
    groups.sort(key=lambda g: _shuffle_rank(seed, g))
    val_share = ratio[1] / (ratio[0] + ratio[1])
    n_val = int(math.floor(val_share * len(groups) + 0.5))  # round half-up
    val_groups = set(groups[:n_val])

    def assign(r: ManifestRecord) -> ManifestRecord:
        key = r.group_key if group_by_parent else r.frame_id
        return replace(r, split="val" if key in val_groups else "train")

    return DatasetManifest([assign(r) for r in manifest.records])


@dataclass
class DatasetStats:
    per_class: dict[int, int]
    centers: list[tuple[float, float, int]]  # normalized (cx, cy), class id
    sizes: list[tuple[float, float, int]]    # absolute (w, h), class id
    wider_than_tall_fraction: float
    aspect_mean: float
    aspect_median: float
    total_annotations: int
    total_images: int

    def to_dict(self) -> dict:
        return {
            "total_images": self.total_images,
            "total_annotations": self.total_annotations,
            "per_class": {CLASS_LABELS[c]: n for c, n in sorted(self.per_class.items())},
            "wider_than_tall_fraction": self.wider_than_tall_fraction,
            "aspect_ratio_mean": self.aspect_mean,
            "aspect_ratio_median": self.aspect_median,
            "centers": self.centers,
            "sizes": self.sizes,
        }


def dataset_stats(manifest: DatasetManifest) -> DatasetStats:
    """Per-class counts plus center/size scatter data for the report."""
    per_class = {c: 0 for c in range(NUM_CLASSES)}
    centers: list[tuple[float, float, int]] = []
    sizes: list[tuple[float, float, int]] = []
    aspects: list[float] = []
    wider = 0
    for r in manifest.records:
        for a in r.annotations:
            per_class[a.class_id] += 1
            cx, cy = a.bbox.center
            centers.append((cx / r.width, cy / r.height, a.class_id))
            sizes.append((a.bbox.width, a.bbox.height, a.class_id))
            aspects.append(a.bbox.width / a.bbox.height)
            if a.bbox.width > a.bbox.height:
                wider += 1
    n = len(aspects)
    aspects.sort()
    if n:
        median = (
            aspects[n // 2] if n % 2 else (aspects[n // 2 - 1] + aspects[n // 2]) / 2.0
        )
        mean = sum(aspects) / n
        frac = wider / n
    else:
        median = mean = frac = 0.0
    return DatasetStats(
        per_class=per_class,
        centers=centers,
        sizes=sizes,
        wider_than_tall_fraction=frac,
        aspect_mean=mean,
        aspect_median=median,
        total_annotations=n,
        total_images=len(manifest.records),
    )
