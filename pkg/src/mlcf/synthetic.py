"""Synthetic scenes with ground truth known by construction.

Targets are smooth noise textures rendered onto a flat canvas with sub-pixel
bilinear placement, so sequences have exact box annotations and controlled
difficulty: trailing decoys for the re-detection scenario, planted zooms for
scale estimation, random walks for long-run stability. Everything is driven
by a seed; identical calls produce identical frames.
"""

from __future__ import annotations

import numpy as np

from .imaging import Frame, resize_array
from .pipeline import BoundingBox

BACKGROUND = 110.0


def noise_texture(rng, size=32, detail=8):
    """Colored blob texture: coarse uniform noise upsampled to `size`."""
    coarse = rng.uniform(25.0, 230.0, size=(detail, detail, 3))
    return resize_array(coarse, size, size)


def make_canvas(width, height, background=BACKGROUND):
    return np.full((height, width, 3), float(background))


def to_frame(canvas) -> Frame:
    return Frame.from_array(np.clip(np.rint(canvas), 0, 255).astype(np.uint8))


def render(canvas, texture, center, scale=1.0, contrast=1.0):
    """Draw `texture` opaquely at `center`=(x, y), scaled, blended toward the
    background by `contrast` (1.0 = full strength). Modifies canvas in place."""
    th, tw = texture.shape[:2]
    out_w, out_h = tw * scale, th * scale
    cx, cy = center
    H, W = canvas.shape[:2]
    # pixels whose centers fall inside the rendered rectangle
    x_lo, y_lo = cx - out_w / 2.0, cy - out_h / 2.0
    js = np.arange(max(0, int(np.ceil(x_lo - 0.5))), min(W, int(np.ceil(cx + out_w / 2.0 - 0.5))))
    is_ = np.arange(max(0, int(np.ceil(y_lo - 0.5))), min(H, int(np.ceil(cy + out_h / 2.0 - 0.5))))
    if len(js) == 0 or len(is_) == 0:
        return
    u = np.clip((js + 0.5 - x_lo) / scale - 0.5, 0.0, tw - 1.0)
    v = np.clip((is_ + 0.5 - y_lo) / scale - 0.5, 0.0, th - 1.0)
    u0 = np.minimum(u.astype(np.intp), tw - 1)
    v0 = np.minimum(v.astype(np.intp), th - 1)
    u1 = np.minimum(u0 + 1, tw - 1)
    v1 = np.minimum(v0 + 1, th - 1)
    fu = (u - u0)[None, :, None]
    fv = (v - v0)[:, None, None]
    top = texture[v0][:, u0] * (1 - fu) + texture[v0][:, u1] * fu
    bot = texture[v1][:, u0] * (1 - fu) + texture[v1][:, u1] * fu
    tex = top * (1 - fv) + bot * fv
    canvas[np.ix_(is_, js)] = BACKGROUND + (tex - BACKGROUND) * contrast


def box_at(center, size):
    cx, cy = center
    return BoundingBox.from_center(cx, cy, float(size), float(size))


def static_sequence(seed, n_frames, frame_size=(160, 120), texture_size=32):
    """Target parked at a fixed sub-pixel position."""
    rng = np.random.default_rng(seed)
    w, h = frame_size
    texture = noise_texture(rng, texture_size)
    center = (w / 2.0 + 0.3, h / 2.0 - 0.2)
    canvas = make_canvas(w, h)
    render(canvas, texture, center)
    frame = to_frame(canvas)
    return [frame] * n_frames, [box_at(center, texture_size)] * n_frames


def _bounce(pos, heading, step, bounds):
    """One reflecting step inside bounds=((x_lo, x_hi), (y_lo, y_hi))."""
    (x_lo, x_hi), (y_lo, y_hi) = bounds
    x = pos[0] + step * np.cos(heading)
    y = pos[1] + step * np.sin(heading)
    if not x_lo <= x <= x_hi:
        heading = np.pi - heading
        x = np.clip(x, x_lo, x_hi)
    if not y_lo <= y <= y_hi:
        heading = -heading
        y = np.clip(y, y_lo, y_hi)
    return (float(x), float(y)), heading


def drifting_sequence(seed, n_frames, frame_size=(160, 120), texture_size=32, step=3.0):
    """Random walk with reflecting walls; the staple moving-target scene."""
    rng = np.random.default_rng(seed)
    w, h = frame_size
    texture = noise_texture(rng, texture_size)
    margin = texture_size
    bounds = ((margin, w - margin), (margin, h - margin))
    center = (w / 2.0, h / 2.0)
    heading = rng.uniform(0.0, 2 * np.pi)
    frames, boxes = [], []
    for _ in range(n_frames):
        canvas = make_canvas(w, h)
        render(canvas, texture, center)
        frames.append(to_frame(canvas))
        boxes.append(box_at(center, texture_size))
        heading += rng.normal(0.0, 0.4)
        center, heading = _bounce(center, heading, step, bounds)
    return frames, boxes


def decoy_sequence(
    seed,
    n_frames=50,
    frame_size=(240, 180),
    texture_size=32,
    step=8.0,
    burst=36.0,
    burst_every=5,
    decoy_contrast=0.75,
):
    """Moving target with a one-frame-behind ghost at reduced contrast.

    On most frames the target steps a small distance, so the ghost is mostly
    hidden underneath it. Every `burst_every`-th frame the target jumps far
    enough to clear its own footprint, leaving the ghost fully exposed at the
    position a lagging tracker expects the target to be.
    """
    rng = np.random.default_rng(seed)
    w, h = frame_size
    texture = noise_texture(rng, texture_size)
    margin = texture_size + 20
    bounds = ((margin, w - margin), (margin, h - margin))
    center = (w / 2.0, h / 2.0)
    heading = rng.uniform(0.0, 2 * np.pi)
    frames, boxes = [], []
    prev = None
    for t in range(n_frames):
        canvas = make_canvas(w, h)
        if prev is not None:
            render(canvas, texture, prev, contrast=decoy_contrast)
        render(canvas, texture, center)
        frames.append(to_frame(canvas))
        boxes.append(box_at(center, texture_size))
        prev = center
        heading += rng.normal(0.0, 0.35)
        length = burst if (t + 1) % burst_every == 0 else step
        center, heading = _bounce(center, heading, length, bounds)
    return frames, boxes


def zoom_sequence(seed, n_frames=30, rate=1.02, frame_size=(160, 160), texture_size=32):
    """Static center, target enlarged by `rate` each frame."""
    rng = np.random.default_rng(seed)
    w, h = frame_size
    texture = noise_texture(rng, texture_size)
    center = (w / 2.0, h / 2.0)
    frames, boxes = [], []
    for t in range(n_frames):
        scale = rate**t
        canvas = make_canvas(w, h)
        render(canvas, texture, center, scale=scale)
        frames.append(to_frame(canvas))
        boxes.append(box_at(center, texture_size * scale))
    return frames, boxes


def oscillating_decoy_sequence(
    seed,
    n_frames=20,
    frame_size=(320, 240),
    texture_size=32,
    amplitude=24.0,
    decoy_offset=(73.0, 0.0),
):
    """Target teleporting between two positions around a fixed anchor, with a
    full-contrast decoy planted at a constant offset from the anchor."""
    rng = np.random.default_rng(seed)
    w, h = frame_size
    texture = noise_texture(rng, texture_size)
    decoy = noise_texture(rng, texture_size)
    anchor = (w / 2.0 - 20.0, h / 2.0)
    decoy_center = (anchor[0] + decoy_offset[0], anchor[1] + decoy_offset[1])
    frames, boxes = [], []
    for t in range(n_frames):
        offset = amplitude if t % 2 == 0 else -amplitude
        center = (anchor[0] + offset, anchor[1])
        canvas = make_canvas(w, h)
        render(canvas, decoy, decoy_center)
        render(canvas, texture, center)
        frames.append(to_frame(canvas))
        boxes.append(box_at(center, texture_size))
    return frames, boxes, decoy_center
