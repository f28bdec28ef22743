"""Annotation format conversion: Labelme JSON, YOLO txt, PASCAL VOC XML.

Internal convention is 0-based, half-open, continuous pixel corners.
YOLO lines carry normalized center/size at 6 decimals; VOC stores 1-based
inclusive integer corners. Writers are canonical: parse(write(x)) is the
identity up to the documented quantization.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .core import Annotation, BBox, CLASS_LABELS, LABEL_TO_ID


class ParseError(ValueError):
    """Document is structurally malformed."""


class ClassError(ValueError):
    """A label has no entry in the canonical class table."""


class FormatError(ValueError):
    """A value violates the format's range or token rules."""


@dataclass(frozen=True)
class LabelmeDoc:
    image_path: str
    width: int
    height: int
    annotations: tuple[Annotation, ...]
    skipped_shapes: int = 0  # non-rectangle shapes ignored on parse


def parse_labelme(text: str | bytes) -> LabelmeDoc:
    """Parse a Labelme JSON document; only rectangle shapes are consumed."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at byte offset {exc.pos}: {exc.msg}") from exc
    try:
        image_path = doc["imagePath"]
        width = int(doc["imageWidth"])
        height = int(doc["imageHeight"])
        shapes = doc["shapes"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing required Labelme field: {exc}") from exc
    anns = []
    skipped = 0
    for shape in shapes:
        if shape.get("shape_type") != "rectangle":
            skipped += 1
            continue
        label = shape.get("label")
        if label not in LABEL_TO_ID:
            raise ClassError(f"unknown label: {label}")
        (x1, y1), (x2, y2) = shape["points"]
        bbox = BBox(min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2))
        anns.append(Annotation(bbox, LABEL_TO_ID[label]))
    return LabelmeDoc(image_path, width, height, tuple(anns), skipped)


def write_labelme(doc: LabelmeDoc) -> str:
    shapes = [
        {
            "label": a.class_label,
            "points": [[a.bbox.xmin, a.bbox.ymin], [a.bbox.xmax, a.bbox.ymax]],
            "group_id": None,
            "shape_type": "rectangle",
            "flags": {},
        }
        for a in doc.annotations
    ]
    payload = {
        "version": "5.0.1",
        "flags": {},
        "shapes": shapes,
        "imagePath": doc.image_path,
        "imageData": None,
        "imageHeight": doc.height,
        "imageWidth": doc.width,
    }
    return json.dumps(payload, indent=2) + "\n"


def write_yolo(annotations: list[Annotation], width: int, height: int) -> str:
    """One `class_id cx cy w h` line per box, normalized, 6 decimals."""
    lines = []
    for a in annotations:
        b = a.bbox
        cx = (b.xmin + b.xmax) / 2.0 / width
        cy = (b.ymin + b.ymax) / 2.0 / height
        w = b.width / width
        h = b.height / height
        for v in (cx, cy, w, h):
            if not -1e-9 <= v <= 1.0 + 1e-9:
                raise FormatError(f"normalized value {v} outside [0,1] for box {b}")
        lines.append(f"{a.class_id} {cx:.6f} {cy:.6f} {w:.6f} {h:.6f}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_yolo(text: str, width: int, height: int) -> list[Annotation]:
    anns = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise FormatError(f"line {lineno}: expected 5 tokens, got {len(tokens)}")
        try:
            class_id = int(tokens[0])
            cx, cy, w, h = (float(t) for t in tokens[1:])
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        for v in (cx, cy, w, h):
            if not -1e-9 <= v <= 1.0 + 1e-9:
                raise FormatError(f"line {lineno}: normalized value {v} outside [0,1]")
        bbox = BBox(
            (cx - w / 2.0) * width,
            (cy - h / 2.0) * height,
            (cx + w / 2.0) * width,
            (cy + h / 2.0) * height,
        )
        anns.append(Annotation(bbox, class_id))
    return anns


@dataclass(frozen=True)
class VocDoc:
    filename: str
    width: int
    height: int
    annotations: tuple[Annotation, ...]


def write_voc(doc: VocDoc) -> str:
    """Canonical VOC2007 XML: 1-based inclusive integer corners, depth 1."""
    lines = [
        "<annotation>",
        f"  <filename>{doc.filename}</filename>",
        "  <size>",
        f"    <width>{doc.width}</width>",
        f"    <height>{doc.height}</height>",
        "    <depth>1</depth>",
        "  </size>",
    ]
    for a in doc.annotations:
        b = a.bbox
        xmin = round(b.xmin) + 1
        ymin = round(b.ymin) + 1
        xmax = round(b.xmax)
        ymax = round(b.ymax)
        lines += [
            "  <object>",
            f"    <name>{a.class_label}</name>",
            "    <pose>Unspecified</pose>",
            "    <truncated>0</truncated>",
            "    <difficult>0</difficult>",
            "    <bndbox>",
            f"      <xmin>{xmin}</xmin>",
            f"      <ymin>{ymin}</ymin>",
            f"      <xmax>{xmax}</xmax>",
            f"      <ymax>{ymax}</ymax>",
            "    </bndbox>",
            "  </object>",
        ]
    lines.append("</annotation>")
    return "\n".join(lines) + "\n"


def parse_voc(text: str | bytes) -> VocDoc:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    filename = root.findtext("filename", default="")
    size = root.find("size")
    if size is None:
        raise ParseError("missing element: size")
    width = int(size.findtext("width"))
    height = int(size.findtext("height"))
    anns = []
    for obj in root.findall("object"):
        name = obj.findtext("name")
        if name not in LABEL_TO_ID:
            raise ClassError(f"unknown label: {name}")
        bndbox = obj.find("bndbox")
        if bndbox is None:
            raise ParseError(f"missing element: bndbox in object {name!r}")
        try:
            xmin = float(bndbox.findtext("xmin"))
            ymin = float(bndbox.findtext("ymin"))
            xmax = float(bndbox.findtext("xmax"))
            ymax = float(bndbox.findtext("ymax"))
        except TypeError as exc:
            raise ParseError(f"missing bndbox corner in object {name!r}") from exc
        # 1-based inclusive -> 0-based half-open
        bbox = BBox(xmin - 1.0, ymin - 1.0, xmax, ymax)
        anns.append(Annotation(bbox, LABEL_TO_ID[name]))
    return VocDoc(filename, width, height, tuple(anns))
