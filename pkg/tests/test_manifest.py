import pytest

from weldvision.core import Annotation, BBox
from weldvision.manifest import (
    DatasetManifest,
    ManifestError,
    ManifestRecord,
    dataset_stats,
    split,
)


def make_manifest(n, parent_every=0):
    """n records; when parent_every > 0, each original gets that many
    augmented children."""
    records = []
    for i in range(n):
        fid = f"f{i:04d}"
        records.append(ManifestRecord(fid, f"{fid}.pgm", 100, 100))
        for j in range(parent_every):
            records.append(
                ManifestRecord(
                    f"{fid}_aug{j + 1}", f"{fid}_aug{j + 1}.pgm", 100, 100,
                    provenance="augmented", parent_id=fid,
                )
            )
    return DatasetManifest(records)


class TestManifestRecord:
    def test_json_round_trip(self):
        r = ManifestRecord(
            "f1", "images/f1.pgm", 128, 96,
            (Annotation(BBox(1.5, 2.0, 10.0, 20.5), 4),),
            split="train", provenance="augmented", parent_id="f0",
        )
        assert ManifestRecord.from_json(r.to_json()) == r

    def test_bad_split(self):
        with pytest.raises(ManifestError):
            ManifestRecord("f1", "f1.pgm", 10, 10, split="test")

    def test_augmented_needs_parent(self):
        with pytest.raises(ManifestError):
            ManifestRecord("f1", "f1.pgm", 10, 10, provenance="augmented")

    def test_box_outside_frame(self):
        with pytest.raises(ManifestError):
            ManifestRecord(
                "f1", "f1.pgm", 10, 10, (Annotation(BBox(5, 5, 15, 8), 0),)
            )

    def test_group_key(self):
        orig = ManifestRecord("f1", "f1.pgm", 10, 10)
        child = ManifestRecord(
            "f1_aug1", "x.pgm", 10, 10, provenance="augmented", parent_id="f1"
        )
        assert orig.group_key == "f1" and child.group_key == "f1"


class TestDatasetManifest:
    def test_duplicate_ids_rejected(self):
        r = ManifestRecord("f1", "f1.pgm", 10, 10)
        with pytest.raises(ManifestError):
            DatasetManifest([r, r])

    def test_save_load_round_trip(self, tmp_path):
        m = make_manifest(5, parent_every=2)
        path = tmp_path / "manifest.jsonl"
        m.save(path)
        assert DatasetManifest.load(path).records == m.records


class TestSplit:
    def test_large_ratio_arithmetic(self):
        m = make_manifest(3408)
        out = split(m, ratio=(8, 2), seed=0)
        n_val = sum(1 for r in out.records if r.split == "val")
        assert n_val == 682
        assert len(out) - n_val == 2726

    def test_ten_groups(self):
        out = split(make_manifest(10), seed=1)
        assert sum(1 for r in out.records if r.split == "val") == 2

    def test_deterministic_and_seed_sensitive(self):
        m = make_manifest(40)
        a = split(m, seed=3)
        b = split(m, seed=3)
        c = split(m, seed=4)
        assert [r.split for r in a.records] == [r.split for r in b.records]
        assert [r.split for r in a.records] != [r.split for r in c.records]

    def test_groups_stay_together(self):
        m = make_manifest(20, parent_every=3)
        out = split(m, seed=5)
        by_group = {}
        for r in out.records:
            by_group.setdefault(r.group_key, set()).add(r.split)
        assert all(len(s) == 1 for s in by_group.values())

    def test_partition_complete(self):
        out = split(make_manifest(25, parent_every=2), seed=6)
        assert all(r.split in ("train", "val") for r in out.records)

    def test_no_group_mode_splits_per_record(self):
        m = make_manifest(10, parent_every=9)  # 100 records, 10 groups
        out = split(m, seed=7, group_by_parent=False)
        n_val = sum(1 for r in out.records if r.split == "val")
        assert n_val == 20

    def test_empty_manifest(self):
        with pytest.raises(ManifestError):
            split(DatasetManifest([]))

    def test_bad_ratio(self):
        with pytest.raises(ManifestError):
            split(make_manifest(4), ratio=(10, 0))


class TestDatasetStats:
    def test_single_box(self):
        m = DatasetManifest(
            [ManifestRecord("f1", "f1.pgm", 100, 100, (Annotation(BBox(0, 0, 20, 10), 0),))]
        )
        s = dataset_stats(m)
        assert s.centers == [(0.10, 0.05, 0)]
        assert s.sizes == [(20.0, 10.0, 0)]
        assert s.aspect_mean == pytest.approx(2.0)
        assert s.wider_than_tall_fraction == 1.0

    def test_per_class_counts(self):
        m = DatasetManifest(
            [
                ManifestRecord(
                    "f1", "f1.pgm", 100, 100,
                    (Annotation(BBox(0, 0, 5, 5), 0), Annotation(BBox(10, 10, 20, 20), 3)),
                )
            ]
        )
        s = dataset_stats(m)
        assert s.per_class[0] == 1 and s.per_class[3] == 1
        assert sum(s.per_class.values()) == 2

    def test_counts_match_independent_tally(self):
        import numpy as np

        rng = np.random.default_rng(8)
        records = []
        tally = {c: 0 for c in range(8)}
        for i in range(30):
            anns = []
            for _ in range(int(rng.integers(0, 5))):
                x0, y0 = rng.uniform(0, 50, 2)
                cid = int(rng.integers(0, 8))
                anns.append(Annotation(BBox(x0, y0, x0 + rng.uniform(1, 40), y0 + rng.uniform(1, 40)), cid))
                tally[cid] += 1
            records.append(ManifestRecord(f"f{i}", f"f{i}.pgm", 100, 100, tuple(anns)))
        s = dataset_stats(DatasetManifest(records))
        assert s.per_class == tally
        assert s.total_annotations == sum(tally.values())
