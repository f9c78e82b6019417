"""Benchmark ingestion and one-pass-evaluation metrics.

A sequence directory holds an ``img/`` folder of numbered frames and a
``groundtruth_rect.txt`` with one ``x,y,w,h`` line per frame (1-indexed, as
published); loading shifts boxes to this package's 0-indexed convention.
Precision counts frames whose center error falls within a pixel threshold
(the headline number is the value at 20 px); success counts frames whose
overlap strictly exceeds an IoU threshold, and its AUC is the plain mean
over the 21-point threshold grid. The strict inequality means even perfect
tracking scores 20/21, not 1.0.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, SequenceFormatError
from .pipeline import BoundingBox

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

PRECISION_THRESHOLDS = np.arange(0, 51, dtype=np.float64)
SUCCESS_THRESHOLDS = np.arange(21, dtype=np.float64) * 0.05
DP_THRESHOLD_PX = 20


@dataclass(frozen=True)
class Sequence:
    name: str
    frame_paths: tuple
    groundtruth: tuple

    def __len__(self):
        return len(self.frame_paths)


@dataclass(frozen=True)
class MetricCurve:
    thresholds: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.thresholds) != len(self.values):
            raise InvalidArgumentError("thresholds and values differ in length")


def _parse_rect_line(line: str, lineno: int, path) -> BoundingBox:
    parts = [p for p in re.split(r"[,\t ]+", line.strip()) if p]
    if len(parts) != 4:
        raise SequenceFormatError(f"{path}: line {lineno}: expected x,y,w,h, got {line!r}")
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError:
        raise SequenceFormatError(f"{path}: line {lineno}: non-numeric field in {line!r}")
    try:
        # published annotations are 1-indexed
        return BoundingBox(x=x - 1.0, y=y - 1.0, w=w, h=h)
    except InvalidArgumentError as exc:
        raise SequenceFormatError(f"{path}: line {lineno}: {exc}") from exc


def load_sequence(directory) -> Sequence:
    directory = Path(directory)
    img_dir = directory / "img"
    rect_path = directory / "groundtruth_rect.txt"
    if not img_dir.is_dir():
        raise SequenceFormatError(f"{directory}: missing img/ subdirectory")
    if not rect_path.is_file():
        raise SequenceFormatError(f"{directory}: missing groundtruth_rect.txt")
    frame_paths = tuple(
        sorted(p for p in img_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    )
    boxes = []
    for lineno, line in enumerate(rect_path.read_text().splitlines(), start=1):
        if line.strip():
            boxes.append(_parse_rect_line(line, lineno, rect_path))
    if len(frame_paths) != len(boxes):
        raise SequenceFormatError(
            f"{directory}: frames={len(frame_paths)} annotations={len(boxes)}"
        )
    if len(frame_paths) < 2:
        raise SequenceFormatError(f"{directory}: need at least 2 frames, got {len(frame_paths)}")
    return Sequence(name=directory.name, frame_paths=frame_paths, groundtruth=tuple(boxes))


def center_error(a: BoundingBox, b: BoundingBox) -> float:
    (ax, ay), (bx, by) = a.center, b.center
    return float(np.hypot(ax - bx, ay - by))


def iou(a: BoundingBox, b: BoundingBox) -> float:
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return float(inter / (a.w * a.h + b.w * b.h - inter))


def _paired(pred, gt):
    pred, gt = list(pred), list(gt)
    if len(pred) != len(gt):
        raise InvalidArgumentError(f"box list lengths differ: {len(pred)} vs {len(gt)}")
    if not pred:
        raise InvalidArgumentError("empty box lists")
    return pred, gt


def precision_curve(pred, gt) -> MetricCurve:
    pred, gt = _paired(pred, gt)
    errors = np.array([center_error(p, g) for p, g in zip(pred, gt)])
    values = (errors[None, :] <= PRECISION_THRESHOLDS[:, None]).mean(axis=1)
    return MetricCurve(thresholds=PRECISION_THRESHOLDS.copy(), values=values)


def success_curve(pred, gt) -> MetricCurve:
    pred, gt = _paired(pred, gt)
    overlaps = np.array([iou(p, g) for p, g in zip(pred, gt)])
    values = (overlaps[None, :] > SUCCESS_THRESHOLDS[:, None]).mean(axis=1)
    return MetricCurve(thresholds=SUCCESS_THRESHOLDS.copy(), values=values)


def auc(curve: MetricCurve) -> float:
    return float(curve.values.mean())


def dp20(curve: MetricCurve) -> float:
    """Precision value at the 20 px threshold."""
    return float(curve.values[DP_THRESHOLD_PX])


def metrics_report(name: str, pred, gt) -> dict:
    """The JSON-ready summary emitted per sequence."""
    prec = precision_curve(pred, gt)
    succ = success_curve(pred, gt)
    return {
        "sequence": name,
        "dp20": dp20(prec),
        "auc": auc(succ),
        "precision": [float(v) for v in prec.values],
        "success": [float(v) for v in succ.values],
    }
