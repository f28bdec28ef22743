"""Batch tooling for X-ray weld inspection datasets: image ingestion,
blind motion deblurring, bounding-box-aware augmentation, annotation format
conversion, dataset statistics, anchor clustering, and detection evaluation.
"""

from .core import (
    Annotation,
    BBox,
    CLASS_LABELS,
    GrayImage,
    Kernel,
    LABEL_TO_ID,
    NUM_CLASSES,
    convolve,
    psnr,
    quantize_u8,
)

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "BBox",
    "CLASS_LABELS",
    "GrayImage",
    "Kernel",
    "LABEL_TO_ID",
    "NUM_CLASSES",
    "convolve",
    "psnr",
    "quantize_u8",
    "__version__",
]
