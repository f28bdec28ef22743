"""Command-line interface: the pipeline stages as subcommands.

Exit codes: 0 success, 1 input/format errors, 2 parameter errors.
Diagnostics go to stderr; data artifacts go only to declared output paths.
`--seed` makes every run byte-reproducible, independent of `--jobs`.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import json
import shlex
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import yaml

from . import augment as aug
from . import anchors as anch
from . import deblur as dbl
from . import formats as fmt
from . import imageio as iio
from . import ingest as ing
from . import manifest as mft
from . import metrics as met
from . import synth as syn
from .core import BBox, GrayImage


INPUT_ERRORS = (
    fmt.ParseError,
    fmt.ClassError,
    fmt.FormatError,
    met.InputError,
    ing.DecodeError,
    iio.ImageIOError,
    mft.ManifestError,
    FileNotFoundError,
)
PARAM_ERRORS = (
    dbl.ParameterError,
    ing.SpecError,
    anch.AnchorError,
    syn.SceneError,
    ValueError,
)

IMAGE_SUFFIXES = (".pgm", ".png", ".jpg", ".jpeg", ".raw")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _list_frames(input_dir: Path) -> list[Path]:
    frames = sorted(
        p for p in input_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not frames:
        raise FileNotFoundError(f"no input frames in {input_dir}")
    return frames


def _pool_map(fn, items, jobs: int):
    """Order-preserving map, optionally over a process pool."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- ingest

def _parse_window(text: str) -> tuple[float, float]:
    lo, _, hi = text.partition(":")
    return float(lo), float(hi)


def _ingest_worker(task: tuple) -> tuple[str, str, int, int]:
    path_s, out_dir_s, spec_args, crop_rect, lb = task
    path = Path(path_s)
    if path.suffix.lower() == ".raw":
        if spec_args is None:
            raise ing.SpecError("RAW input requires --raw-width/--raw-height")
        spec = ing.RawSpec(**spec_args)
        image = ing.decode_raw(path.read_bytes(), spec)
    else:
        image = iio.read_image(path)
    if crop_rect is not None:
        image = ing.crop(image, BBox(*crop_rect))
    if lb is not None:
        image, _ = ing.letterbox(image, lb["target"], lb["stride"], lb["fill"])
    frame_id = path.stem
    iio.write_pgm(image, Path(out_dir_s) / f"{frame_id}.pgm")
    return frame_id, str(path), image.width, image.height


def cmd_ingest(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec_args = None
    if args.raw_width and args.raw_height:
        spec_args = dict(
            width=args.raw_width,
            height=args.raw_height,
            bit_depth=args.raw_depth,
            endianness={"le": "little", "be": "big"}[args.raw_endian],
            window=_parse_window(args.window),
        )
    crop_rect = None
    if args.crop:
        crop_rect = tuple(float(v) for v in args.crop.split(":"))
    lb = None
    if args.letterbox:
        lb = {"target": args.letterbox, "stride": args.stride, "fill": args.fill}
    tasks = [
        (str(p), str(out_dir), spec_args, crop_rect, lb)
        for p in _list_frames(Path(args.input))
    ]
    rows = _pool_map(_ingest_worker, tasks, args.jobs)
    rows.sort(key=lambda r: r[0])
    index = "".join(f"{fid}\t{src}\t{w}\t{h}\n" for fid, src, w, h in rows)
    (out_dir / "index.tsv").write_text(index)
    _log(f"ingested {len(rows)} frames -> {out_dir}")
    return 0


# ---------------------------------------------------------------- deblur

def _deblur_worker(task: tuple) -> tuple[str, str]:
    path_s, out_dir_s, kw = task
    path = Path(path_s)
    image = iio.read_image(path)
    result = dbl.deblur_auto(image, **kw)
    frame_id = path.stem
    iio.write_pgm(result.image, Path(out_dir_s) / f"{frame_id}.pgm")
    if result.estimate is None:
        line = f"{frame_id}\t-\t-\t{result.status}"
    else:
        line = (
            f"{frame_id}\t{result.estimate.angle_deg:.2f}"
            f"\t{result.estimate.length_px}\t{result.status}"
        )
    return frame_id, line


def cmd_deblur(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    kw = dict(
        surface_speed_px_per_s=args.speed,
        exposure_s=args.exposure,
        nsr=args.nsr,
        edge_threshold=args.edge_thresh,
        vote_threshold=args.vote_thresh,
        theta_step=args.theta_step,
    )
    tasks = [(str(p), str(out_dir), kw) for p in _list_frames(Path(args.input))]
    rows = _pool_map(_deblur_worker, tasks, args.jobs)
    rows.sort(key=lambda r: r[0])
    (out_dir / "estimates.tsv").write_text("".join(line + "\n" for _, line in rows))
    _log(f"deblurred {len(rows)} frames -> {out_dir}")
    return 0


# ---------------------------------------------------------------- dataset dirs

def _load_dataset(dataset_dir: str | Path) -> mft.DatasetManifest:
    return mft.DatasetManifest.load(Path(dataset_dir) / "manifest.jsonl")


def _resolve_image(dataset_dir: Path, record: mft.ManifestRecord) -> Path:
    p = Path(record.image_path)
    return p if p.is_absolute() else dataset_dir / p


# ---------------------------------------------------------------- augment

def cmd_augment(args) -> int:
    dataset_dir = Path(args.dataset)
    out_dir = Path(args.out)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    manifest = _load_dataset(dataset_dir)

    def load_image(record: mft.ManifestRecord) -> GrayImage:
        return iio.read_image(_resolve_image(dataset_dir, record))

    def save_image(frame_id: str, image: GrayImage) -> str:
        rel = Path("images") / f"{frame_id}.pgm"
        iio.write_pgm(image, out_dir / rel)
        return str(rel)

    expanded, log = aug.expand_dataset(
        manifest,
        multiplier=args.multiplier,
        master_seed=args.seed,
        load_image=load_image,
        save_image=save_image,
        include_original=args.include_original,
        drop=not args.no_drop,
    )
    expanded.save(out_dir / "manifest.jsonl")
    with open(out_dir / "augment_log.jsonl", "w", encoding="utf-8") as fh:
        for rec in log:
            fh.write(json.dumps(rec.to_dict(), separators=(",", ":")) + "\n")
    _log(f"augmented {len(manifest)} -> {len(expanded)} records in {out_dir}")
    return 0


# ---------------------------------------------------------------- convert

def cmd_convert(args) -> int:
    src = Path(args.input)
    out_dir = Path(args.out) if args.out else src
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.from_format == "labelme":
        docs = sorted(src.glob("*.json"))
        if not docs:
            docs = sorted((src / "labels_labelme").glob("*.json"))
        if not docs:
            raise FileNotFoundError(f"no Labelme JSON files under {src}")
        records = []
        for doc_path in docs:
            doc = fmt.parse_labelme(doc_path.read_text(encoding="utf-8"))
            if doc.skipped_shapes:
                _log(f"{doc_path.name}: skipped {doc.skipped_shapes} non-rectangle shapes")
            records.append(
                mft.ManifestRecord(
                    frame_id=doc_path.stem,
                    image_path=doc.image_path,
                    width=doc.width,
                    height=doc.height,
                    annotations=doc.annotations,
                )
            )
        manifest = mft.DatasetManifest(records)
    else:
        manifest = _load_dataset(src)
        if args.from_format == "yolo":
            records = []
            for r in manifest.records:
                label_path = src / "labels_yolo" / f"{r.frame_id}.txt"
                text = label_path.read_text() if label_path.exists() else ""
                anns = tuple(fmt.parse_yolo(text, r.width, r.height))
                records.append(replace(r, annotations=anns))
            manifest = mft.DatasetManifest(records)
        elif args.from_format == "voc":
            records = []
            for r in manifest.records:
                label_path = src / "labels_voc" / f"{r.frame_id}.xml"
                if label_path.exists():
                    doc = fmt.parse_voc(label_path.read_text())
                    records.append(replace(r, annotations=doc.annotations))
                else:
                    records.append(replace(r, annotations=()))
            manifest = mft.DatasetManifest(records)

    if args.to_format == "yolo":
        label_dir = out_dir / "labels_yolo"
        label_dir.mkdir(parents=True, exist_ok=True)
        for r in manifest.records:
            text = fmt.write_yolo(list(r.annotations), r.width, r.height)
            (label_dir / f"{r.frame_id}.txt").write_text(text)
    else:
        label_dir = out_dir / "labels_voc"
        label_dir.mkdir(parents=True, exist_ok=True)
        for r in manifest.records:
            doc = fmt.VocDoc(Path(r.image_path).name, r.width, r.height, r.annotations)
            (label_dir / f"{r.frame_id}.xml").write_text(fmt.write_voc(doc))
    manifest.save(out_dir / "manifest.jsonl")
    _log(f"converted {len(manifest)} records {args.from_format} -> {args.to_format}")
    return 0


# ---------------------------------------------------------------- split / stats / anchors

def _parse_ratio(text: str) -> tuple[int, int]:
    a, _, b = text.partition(":")
    return int(a), int(b)


def cmd_split(args) -> int:
    dataset_dir = Path(args.dataset)
    manifest = _load_dataset(dataset_dir)
    out = mft.split(
        manifest,
        ratio=_parse_ratio(args.ratio),
        seed=args.seed,
        group_by_parent=not args.no_group,
    )
    out.save(dataset_dir / "manifest.jsonl")
    n_val = sum(1 for r in out.records if r.split == "val")
    _log(f"split {len(out)} records: {len(out) - n_val} train / {n_val} val")
    return 0


def cmd_stats(args) -> int:
    manifest = _load_dataset(Path(args.dataset))
    stats = mft.dataset_stats(manifest)
    Path(args.out).write_text(json.dumps(stats.to_dict(), indent=2) + "\n")
    if args.figure:
        from .plotting import plot_dataset_stats

        plot_dataset_stats(stats, args.figure)
    _log(f"stats for {stats.total_images} images / {stats.total_annotations} boxes -> {args.out}")
    return 0


def cmd_anchors(args) -> int:
    manifest = _load_dataset(Path(args.dataset))
    result = anch.cluster_anchors(manifest, k=args.k, iters=args.iters, seed=args.seed)
    payload = {
        "anchors": [[w, h] for w, h in result.anchors],
        "mean_best_iou": result.mean_iou,
    }
    out = Path(args.out)
    out.write_text(json.dumps(payload, indent=2) + "\n")
    _log(f"{args.k} anchors, mean best IoU {result.mean_iou:.4f} -> {out}")
    return 0


# ---------------------------------------------------------------- eval / compare

def _manifest_gts(manifest: mft.DatasetManifest) -> list[tuple[str, object]]:
    return [(r.frame_id, a) for r in manifest.records for a in r.annotations]


def _time_command(template: str, manifest: mft.DatasetManifest, dataset_dir: Path) -> float:
    total = 0.0
    for r in manifest.records:
        cmd = [
            tok.replace("{image}", str(_resolve_image(dataset_dir, r)))
            for tok in shlex.split(template)
        ]
        start = time.perf_counter()
        subprocess.run(cmd, check=True, stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        total += time.perf_counter() - start
    return total / len(manifest.records)


def cmd_eval(args) -> int:
    dataset_dir = Path(args.dataset)
    manifest = _load_dataset(dataset_dir)
    dets = met.parse_detections_text(Path(args.detections).read_text())
    report = met.evaluate(
        _manifest_gts(manifest),
        dets,
        known_frames={r.frame_id for r in manifest.records},
        iou_threshold=args.iou,
        confidence_threshold=args.conf,
    )
    if args.model_name:
        report.model_name = args.model_name
    if args.time_command:
        report.seconds_per_image = _time_command(args.time_command, manifest, dataset_dir)
    Path(args.out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    if args.figure:
        from .plotting import plot_pr_curves

        plot_pr_curves(report, args.figure)
    print(report.render_text())
    return 0


def cmd_compare(args) -> int:
    rows = []
    for path in args.reports:
        d = json.loads(Path(path).read_text())
        rows.append(
            {
                "model_name": d.get("model_name") or Path(path).stem,
                "map_50": d["map_50"],
                "precision_mean": _mean_precision(d),
                "seconds_per_image": d.get("seconds_per_image"),
            }
        )
    if len(rows) < 2:
        raise ValueError("compare needs at least two report files")
    header = f"{'model':<24}{'precision':>12}{'mAP@0.5':>10}{'s/image':>10}"
    body = [header]
    for r in rows:
        t = f"{r['seconds_per_image']:.3f}" if r["seconds_per_image"] is not None else "-"
        body.append(
            f"{r['model_name']:<24}{r['precision_mean']:>12.3f}{r['map_50']:>10.3f}{t:>10}"
        )
    table = "\n".join(body)
    print(table)
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2) + "\n")
    if args.figure:
        from .plotting import plot_comparison

        plot_comparison(rows, args.figure)
    return 0


def _mean_precision(report_dict: dict) -> float:
    vals = [
        c["precision"]
        for c in report_dict["classes"].values()
        if not c.get("precision_undefined")
    ]
    return sum(vals) / len(vals) if vals else 0.0


# ---------------------------------------------------------------- synth

def cmd_synth_scenes(args) -> int:
    out_dir = Path(args.out)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "labels_labelme").mkdir(parents=True, exist_ok=True)
    records = []
    for i in range(args.count):
        scene = syn.random_scene(
            args.width, args.height, seed=args.seed + i, n_defects=args.defects,
            seam_angle_deg=args.seam_angle,
        )
        image, anns = syn.generate_scene(scene)
        frame_id = f"scene_{i:04d}"
        rel = Path("images") / f"{frame_id}.pgm"
        iio.write_pgm(image, out_dir / rel)
        doc = fmt.LabelmeDoc(str(rel), image.width, image.height, tuple(anns))
        (out_dir / "labels_labelme" / f"{frame_id}.json").write_text(fmt.write_labelme(doc))
        records.append(
            mft.ManifestRecord(
                frame_id=frame_id,
                image_path=str(rel),
                width=image.width,
                height=image.height,
                annotations=tuple(anns),
            )
        )
    mft.DatasetManifest(records).save(out_dir / "manifest.jsonl")
    _log(f"generated {args.count} scenes -> {out_dir}")
    return 0


def cmd_synth_blur(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, path in enumerate(_list_frames(Path(args.input))):
        image = iio.read_image(path)
        blurred = syn.blur_scene(
            image, args.angle, args.length, args.noise, seed=args.seed + i
        )
        iio.write_pgm(blurred, out_dir / f"{path.stem}.pgm")
    _log(f"blurred frames -> {out_dir}")
    return 0


def cmd_synth_detections(args) -> int:
    manifest = _load_dataset(Path(args.dataset))
    dets = []
    for i, r in enumerate(manifest.records):
        dets.extend(
            syn.perturb_to_detections(
                r.frame_id,
                list(r.annotations),
                r.width,
                r.height,
                miss_rate=args.miss,
                false_positive_rate=args.fp,
                jitter_sigma=args.jitter,
                seed=args.seed + i,
            )
        )
    Path(args.out).write_text(met.format_detections_text(dets))
    _log(f"wrote {len(dets)} detections -> {args.out}")
    return 0


def _write_labels(dataset_dir: Path) -> None:
    """Emit YOLO and VOC label files straight from a dataset's manifest."""
    manifest = _load_dataset(dataset_dir)
    yolo_dir = dataset_dir / "labels_yolo"
    voc_dir = dataset_dir / "labels_voc"
    yolo_dir.mkdir(exist_ok=True)
    voc_dir.mkdir(exist_ok=True)
    for r in manifest.records:
        (yolo_dir / f"{r.frame_id}.txt").write_text(
            fmt.write_yolo(list(r.annotations), r.width, r.height)
        )
        doc = fmt.VocDoc(Path(r.image_path).name, r.width, r.height, r.annotations)
        (voc_dir / f"{r.frame_id}.xml").write_text(fmt.write_voc(doc))


# ---------------------------------------------------------------- pipeline

PIPELINE_KEYS = {
    "seed",
    "out",
    "scenes",
    "blur",
    "deblur",
    "augment",
    "split",
    "detections",
    "eval",
    "anchors",
}


def cmd_pipeline(args) -> int:
    if not args.config:
        raise ValueError("pipeline requires --config")
    cfg = yaml.safe_load(Path(args.config).read_text()) or {}
    unknown = set(cfg) - PIPELINE_KEYS
    if unknown:
        raise ValueError(f"unknown pipeline config keys: {sorted(unknown)}")
    seed = args.seed if args.seed_given else int(cfg.get("seed", args.seed))
    out_root = Path(args.out or cfg.get("out", "pipeline_out"))
    out_root.mkdir(parents=True, exist_ok=True)
    ns = argparse.Namespace

    sc = cfg.get("scenes", {})
    scenes_dir = out_root / "scenes"
    cmd_synth_scenes(ns(
        out=str(scenes_dir), count=int(sc.get("count", 6)),
        width=int(sc.get("width", 192)), height=int(sc.get("height", 192)),
        defects=int(sc.get("defects", 3)),
        seam_angle=sc.get("seam_angle", 30.0), seed=seed,
    ))

    bc = cfg.get("blur", {})
    blurred_dir = out_root / "blurred"
    cmd_synth_blur(ns(
        input=str(scenes_dir / "images"), out=str(blurred_dir),
        angle=float(bc.get("angle", 30.0)), length=int(bc.get("length", 9)),
        noise=float(bc.get("noise", 1.0)), seed=seed + 1,
    ))

    dc = cfg.get("deblur", {})
    deblurred_dir = out_root / "deblurred"
    cmd_deblur(ns(
        input=str(blurred_dir), out=str(deblurred_dir),
        speed=float(dc.get("speed", 72.0)), exposure=float(dc.get("exposure", 0.125)),
        nsr=float(dc.get("nsr", 1e-2)), edge_thresh=float(dc.get("edge_thresh", 150.0)),
        vote_thresh=int(dc.get("vote_thresh", 50)),
        theta_step=float(dc.get("theta_step", 1.0)), jobs=args.jobs,
    ))

    ac = cfg.get("augment", {})
    augmented_dir = out_root / "augmented"
    cmd_augment(ns(
        dataset=str(scenes_dir), out=str(augmented_dir),
        multiplier=int(ac.get("multiplier", 3)),
        include_original=bool(ac.get("include_original", False)),
        no_drop=bool(ac.get("no_drop", False)), seed=seed + 2,
    ))

    _write_labels(augmented_dir)

    spc = cfg.get("split", {})
    cmd_split(ns(
        dataset=str(augmented_dir), ratio=str(spc.get("ratio", "8:2")),
        no_group=bool(spc.get("no_group", False)), seed=seed + 3,
    ))

    cmd_stats(ns(
        dataset=str(augmented_dir), out=str(out_root / "stats.json"),
        figure=str(out_root / "stats.png"),
    ))

    anc = cfg.get("anchors", {})
    cmd_anchors(ns(
        dataset=str(augmented_dir), k=int(anc.get("k", 4)),
        iters=int(anc.get("iters", 30)), seed=seed + 4,
        out=str(out_root / "anchors.json"),
    ))

    dtc = cfg.get("detections", {})
    dets_path = out_root / "detections.txt"
    cmd_synth_detections(ns(
        dataset=str(scenes_dir), miss=float(dtc.get("miss", 0.0)),
        fp=float(dtc.get("fp", 0.0)), jitter=float(dtc.get("jitter", 0.0)),
        out=str(dets_path), seed=seed + 5,
    ))

    ec = cfg.get("eval", {})
    cmd_eval(ns(
        dataset=str(scenes_dir), detections=str(dets_path),
        iou=float(ec.get("iou", 0.5)), conf=float(ec.get("conf", 0.25)),
        out=str(out_root / "report.json"), figure=str(out_root / "pr_curves.png"),
        model_name=ec.get("model_name"), time_command=None,
    ))
    _log(f"pipeline complete -> {out_root}")
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weldvision",
        description="X-ray weld inspection data pipeline: ingest, deblur, "
        "augment, convert, split, analyze, and evaluate.",
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed for reproducibility")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for frame-parallel stages")
    parser.add_argument("--config", help="YAML config merged under explicit flags")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="decode/crop/letterbox frames to PGM")
    p.add_argument("input", help="directory of .raw/.png/.jpg/.pgm frames")
    p.add_argument("--out", required=True)
    p.add_argument("--raw-width", type=int)
    p.add_argument("--raw-height", type=int)
    p.add_argument("--raw-depth", type=int, choices=(8, 16), default=8)
    p.add_argument("--raw-endian", choices=("le", "be"), default="le")
    p.add_argument("--window", default="0:65535", help="LO:HI for 16-to-8-bit windowing")
    p.add_argument("--crop", help="X0:Y0:X1:Y1 crop rectangle")
    p.add_argument("--letterbox", type=int, help="target long side (stride multiple)")
    p.add_argument("--stride", type=int, default=32)
    p.add_argument("--fill", type=int, default=114)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("deblur", help="blind motion deblurring over a frame directory")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--speed", type=float, required=True, help="surface speed, px/s")
    p.add_argument("--exposure", type=float, required=True, help="exposure time, s")
    p.add_argument("--nsr", type=float, default=1e-2)
    p.add_argument("--theta-step", type=float, default=1.0)
    p.add_argument("--vote-thresh", type=int, default=50)
    p.add_argument("--edge-thresh", type=float, default=150.0)
    p.set_defaults(func=cmd_deblur)

    p = sub.add_parser("augment", help="expand a dataset with seeded augmentations")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--multiplier", type=int, default=9)
    p.add_argument("--include-original", action="store_true")
    p.add_argument("--no-drop", action="store_true", help="never drop truncated boxes")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("convert", help="convert annotation formats")
    p.add_argument("input", help="Labelme directory or dataset directory")
    p.add_argument("--from", dest="from_format", required=True,
                   choices=("labelme", "yolo", "voc"))
    p.add_argument("--to", dest="to_format", required=True, choices=("yolo", "voc"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("split", help="assign train/val splits")
    p.add_argument("--dataset", required=True)
    p.add_argument("--ratio", default="8:2")
    p.add_argument("--no-group", action="store_true",
                   help="split per record instead of per original group")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("stats", help="per-class counts and bbox scatter statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--figure", "--svg", dest="figure",
                   help="scatter figure output (.png or .svg)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("anchors", help="adaptive anchor clustering")
    p.add_argument("--dataset", required=True)
    p.add_argument("--k", type=int, default=9)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--out", default="anchors.json")
    p.set_defaults(func=cmd_anchors)

    p = sub.add_parser("eval", help="evaluate a detections file against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--detections", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--conf", type=float, default=0.25,
                   help="operating confidence for P/R/F1")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--figure", help="PR-curve figure output (.png or .svg)")
    p.add_argument("--model-name")
    p.add_argument("--time-command",
                   help="external command timed per image ({image} substituted)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="merge evaluation reports into a comparison")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth", help="synthetic scene/blur/detection generator")
    synth_sub = p.add_subparsers(dest="synth_command", required=True)

    q = synth_sub.add_parser("scenes", help="generate synthetic weld scenes")
    q.add_argument("--count", type=int, default=8)
    q.add_argument("--out", required=True)
    q.add_argument("--width", type=int, default=256)
    q.add_argument("--height", type=int, default=256)
    q.add_argument("--defects", type=int, default=3)
    q.add_argument("--seam-angle", type=float, default=None,
                   help="seam orientation in degrees (default: random per scene)")
    q.set_defaults(func=cmd_synth_scenes)

    q = synth_sub.add_parser("blur", help="apply motion blur to a frame directory")
    q.add_argument("input")
    q.add_argument("--out", required=True)
    q.add_argument("--angle", type=float, required=True)
    q.add_argument("--length", type=int, required=True)
    q.add_argument("--noise", type=float, default=0.0)
    q.set_defaults(func=cmd_synth_blur)

    q = synth_sub.add_parser("detections", help="perturb ground truth into detections")
    q.add_argument("--dataset", required=True)
    q.add_argument("--miss", type=float, default=0.0)
    q.add_argument("--fp", type=float, default=0.0)
    q.add_argument("--jitter", type=float, default=0.0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_synth_detections)

    p = sub.add_parser("pipeline", help="run the full pipeline from a config file")
    p.add_argument("--out", help="output root (overrides config)")
    p.set_defaults(func=cmd_pipeline)

    return parser


def _apply_config_defaults(args: argparse.Namespace, argv: list[str]) -> None:
    """Config values fill in anything not explicitly set on the command line."""
    if not args.config or args.command == "pipeline":
        return
    cfg = yaml.safe_load(Path(args.config).read_text()) or {}
    section = cfg.get(args.command, {})
    if not isinstance(section, dict):
        raise ValueError(f"config section {args.command!r} must be a mapping")
    given = {tok.split("=")[0].lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
    for key, value in section.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ValueError(f"unknown config key {key!r} for {args.command}")
        if dest not in given:
            setattr(args, dest, value)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = "--seed" in argv
    try:
        _apply_config_defaults(args, argv)
        return args.func(args)
    except INPUT_ERRORS as exc:
        _log(f"error: {exc}")
        return 1
    except PARAM_ERRORS as exc:
        _log(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
