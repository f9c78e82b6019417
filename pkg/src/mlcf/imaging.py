"""Image access, patch cropping, bilinear resizing and windowing.

Coordinates are continuous throughout: pixel ``i`` occupies the interval
``[i, i+1)``, so an image of width ``w`` spans ``[0, w)`` and its centre is
at ``w / 2``.  Box centres, crop centres and displacement arithmetic all use
this convention.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptFileError, InvalidArgumentError, UnsupportedFormatError

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"


@dataclass(frozen=True)
class Frame:
    """One RGB image, 8 bits per channel, shape (height, width, 3)."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError(f"frame dims must be >= 1, got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise InvalidArgumentError(
                f"pixel buffer shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x3"
            )
        if self.pixels.dtype != np.uint8:
            raise InvalidArgumentError(f"pixels must be uint8, got {self.pixels.dtype}")

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "Frame":
        pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
        if pixels.ndim == 2:
            pixels = np.repeat(pixels[:, :, None], 3, axis=2)
        h, w = pixels.shape[:2]
        return cls(width=w, height=h, pixels=pixels)


@dataclass(frozen=True)
class Patch:
    """A cropped (and possibly resized) window taken from a frame.

    source_center is the realized centre of the crop in frame coordinates
    (the requested centre rounded onto the pixel grid); source_size is the
    crop extent in frame pixels before any resize.  Both survive resizing so
    that response-grid displacements can be mapped back to frame pixels.
    """

    width: int
    height: int
    pixels: np.ndarray
    source_center: tuple[float, float]
    source_size: tuple[float, float]

    def __post_init__(self):
        if self.source_size[0] <= 0 or self.source_size[1] <= 0:
            raise InvalidArgumentError(f"source_size must be positive, got {self.source_size}")


def load_frame(path) -> Frame:
    """Load a PNG or JPEG file into a Frame.

    Files whose magic bytes match neither format raise UnsupportedFormatError;
    files with a matching magic that fail to decode raise CorruptFileError.
    """
    from PIL import Image

    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if not (head.startswith(_PNG_MAGIC) or head.startswith(_JPEG_MAGIC)):
        raise UnsupportedFormatError(f"{path}: not a PNG or JPEG file")
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            pixels = np.asarray(rgb, dtype=np.uint8)
    except Exception as exc:
        raise CorruptFileError(f"{path}: failed to decode ({exc})") from exc
    return Frame.from_array(pixels)


def _start_index(center: float, size: int) -> int:
    # Round-half-up of the ideal continuous start, so the crop covers
    # [start, start + size) as close to [center - size/2, center + size/2)
    # as the pixel grid allows.
    return int(np.floor(center - size / 2.0 + 0.5))


def crop_patch(frame: Frame, center: tuple[float, float], size: tuple[int, int]) -> Patch:
    """Crop a size=(w, h) window centred at (x, y), replicating edge pixels.

    The centre may lie anywhere, including entirely outside the frame;
    out-of-bounds samples take the nearest frame pixel.
    """
    w, h = int(size[0]), int(size[1])
    if w < 1 or h < 1:
        raise InvalidArgumentError(f"crop size must be >= 1, got {size}")
    cx, cy = float(center[0]), float(center[1])
    x0 = _start_index(cx, w)
    y0 = _start_index(cy, h)
    cols = np.clip(np.arange(x0, x0 + w), 0, frame.width - 1)
    rows = np.clip(np.arange(y0, y0 + h), 0, frame.height - 1)
    pixels = frame.pixels[np.ix_(rows, cols)]
    return Patch(
        width=w,
        height=h,
        pixels=np.ascontiguousarray(pixels),
        source_center=(x0 + w / 2.0, y0 + h / 2.0),
        source_size=(float(w), float(h)),
    )


@functools.lru_cache(maxsize=256)
def _resize_plan(n_in: int, n_out: int, anchor: str):
    """Per-axis sample positions and weights for bilinear resampling.

    anchor="edge"   aligns pixel centres of the full extents (the usual
                    image-resize convention).
    anchor="center" pins source cell n_in//2 onto output cell n_out//2 and
                    scales around it, so a map whose peak sits on its centre
                    cell keeps that peak exactly on the output centre cell.
    """
    out = np.arange(n_out, dtype=np.float64)
    if anchor == "edge":
        src = (out + 0.5) * (n_in / n_out) - 0.5
    elif anchor == "center":
        src = n_in // 2 + (out - n_out // 2) * (n_in / n_out)
    else:
        raise InvalidArgumentError(f"unknown anchor {anchor!r}")
    src = np.clip(src, 0.0, n_in - 1.0)
    i0 = np.floor(src).astype(np.intp)
    i0 = np.minimum(i0, n_in - 1)
    i1 = np.minimum(i0 + 1, n_in - 1)
    frac = src - i0
    return i0, i1, frac


def resize_array(arr: np.ndarray, out_h: int, out_w: int, anchor: str = "edge") -> np.ndarray:
    """Bilinear resize of a (H, W) or (H, W, C) float array."""
    if out_h < 1 or out_w < 1:
        raise InvalidArgumentError(f"resize dims must be >= 1, got {out_w}x{out_h}")
    a = np.asarray(arr, dtype=np.float64)
    r0, r1, fr = _resize_plan(a.shape[0], int(out_h), anchor)
    c0, c1, fc = _resize_plan(a.shape[1], int(out_w), anchor)
    if a.ndim == 3:
        fr = fr[:, None, None]
        fc = fc[None, :, None]
    else:
        fr = fr[:, None]
        fc = fc[None, :]
    rows = a[r0] * (1.0 - fr) + a[r1] * fr
    return rows[:, c0] * (1.0 - fc) + rows[:, c1] * fc


def resize(patch: Patch, out_w: int, out_h: int) -> Patch:
    """Bilinear resize of a patch to absolute dimensions (no aspect preservation)."""
    if out_w < 1 or out_h < 1:
        raise InvalidArgumentError(f"resize dims must be >= 1, got {out_w}x{out_h}")
    data = resize_array(patch.pixels.astype(np.float64), out_h, out_w, anchor="edge")
    pixels = np.clip(np.rint(data), 0, 255).astype(np.uint8)
    return Patch(
        width=int(out_w),
        height=int(out_h),
        pixels=pixels,
        source_center=patch.source_center,
        source_size=patch.source_size,
    )


def cosine_window(v: int, h: int) -> np.ndarray:
    """Separable raised-cosine (Hann) window, peak-normalized to 1 at the centre.

    Uses the zero-endpoint Hann definition, so 1-sample axes give 1.0 and
    2-sample axes degenerate to all zeros.
    """
    if v < 1 or h < 1:
        raise InvalidArgumentError(f"window dims must be >= 1, got {v}x{h}")
    win = np.outer(np.hanning(v), np.hanning(h))
    peak = win.max()
    if peak > 0:
        win = win / peak
    return win
