"""Tracker orchestration: init on a first box, then track frame by frame.

Each track step runs four stages: primal detection (crop, per-layer detect,
fuse), re-detection among qualified peaks, scale search at the accepted
position, and the adaptive model update. Peak selection and ratio tests run
on the normalized fused map, whose baseline is fixed by construction; score
arbitration across candidate regions, scale scoring and the history score
S_t use the raw fused map, because probability normalization erases exactly
the contrast differences those comparisons exist to measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adaptive_update import ScoreHistory, confidence, learning_rate, push
from .cfcore import (
    detect,
    fold_shift,
    gaussian_label,
    interpolate_model,
    learn_filter,
)
from .errors import ConfigError, InvalidArgumentError, TrackingDegenerateError
from .features import ExtractorSpec, apply_window, make_extractor, parse_spec
from .fusion import fuse, normalize_response
from .imaging import Frame, cosine_window, crop_patch, resize, resize_array
from .redetection import RedetectConfig, central_mask, redetect, select_candidates
from .scale_estimation import ScaleConfig, estimate_scale


@dataclass(frozen=True)
class BoundingBox:
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise InvalidArgumentError(f"box sides must be positive, got {self.w}x{self.h}")

    @property
    def center(self):
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @classmethod
    def from_center(cls, cx, cy, w, h):
        return cls(x=cx - w / 2.0, y=cy - h / 2.0, w=w, h=h)

    def as_tuple(self):
        return (self.x, self.y, self.w, self.h)


def _default_specs():
    return (ExtractorSpec("gray-cells"), ExtractorSpec("grad-hist"))


@dataclass
class TrackerConfig:
    lambda_: float = 1e-4
    xi: float = 0.4
    theta: float = 0.7
    n_max: int = 3
    a: float = 1.02
    s: int = 5
    tau: float = 0.05
    eta_base: float = 0.01
    history_window: int = 5
    patch_size: int = 224
    search_factor: float = 2.0
    extractor_specs: tuple = field(default_factory=_default_specs)
    redetect_enabled: bool = True
    adaptive_update_enabled: bool = True

    def __post_init__(self):
        if self.lambda_ < 0:
            raise InvalidArgumentError(f"lambda must be >= 0, got {self.lambda_}")
        if self.patch_size < 8:
            raise InvalidArgumentError(f"patch_size must be >= 8, got {self.patch_size}")
        if self.search_factor < 1.0:
            raise InvalidArgumentError(f"search_factor must be >= 1, got {self.search_factor}")
        specs = tuple(
            parse_spec(s) if isinstance(s, str) else s for s in self.extractor_specs
        )
        if not specs:
            raise InvalidArgumentError("need at least one extractor spec")
        self.extractor_specs = specs


@dataclass(frozen=True)
class Diagnostics:
    frame_index: int
    score: float  # fused max at the accepted location and scale (S_t)
    primal_score: float  # max of the raw fused map before re-detection
    c_t: float
    eta_t: float
    n_candidates: int
    redetected: bool
    best_scale: float


@dataclass
class TrackerState:
    config: TrackerConfig
    box: BoundingBox
    filters: list
    score_history: ScoreHistory
    scale: ScaleConfig
    frame_index: int
    extractors: list
    initial_size: tuple
    windows: dict = field(default_factory=dict)
    labels: dict = field(default_factory=dict)

    @property
    def center(self):
        return self.box.center


def _window(state: TrackerState, v: int, h: int):
    key = (v, h)
    if key not in state.windows:
        state.windows[key] = cosine_window(v, h)
    return state.windows[key]


def _label(state: TrackerState, v: int, h: int):
    # sigma scales with the target's footprint in feature cells, which is the
    # map size divided by the search factor
    key = (v, h)
    if key not in state.labels:
        sf = state.config.search_factor
        sigma = 0.1 * np.sqrt((v / sf) * (h / sf))
        state.labels[key] = gaussian_label(v, h, sigma)
    return state.labels[key]


def _search_size(state: TrackerState, scale: float = 1.0):
    w0, h0 = state.initial_size
    sf = state.config.search_factor
    cs = state.scale.current_scale
    w = max(4, int(round(sf * w0 * cs * scale)))
    h = max(4, int(round(sf * h0 * cs * scale)))
    return w, h


def _feature_stack(state: TrackerState, frame: Frame, center, scale: float = 1.0):
    """Crop the search region at `center`=(x, y), resize to the canonical
    patch, extract and window every layer. Returns (maps, realized_center)."""
    cw, ch = _search_size(state, scale)
    p = state.config.patch_size
    patch = resize(crop_patch(frame, center, (cw, ch)), p, p)
    maps = []
    for extractor in state.extractors:
        fm = extractor.extract(patch)
        maps.append(apply_window(fm, _window(state, fm.v, fm.h)))
    return maps, patch.source_center


def _raw_responses(state: TrackerState, maps):
    """Per-layer raw responses, each resized onto the common grid with the
    center cell pinned so displacement arithmetic is layer-independent."""
    g = state.config.patch_size
    out = []
    for filt, fm in zip(state.filters, maps):
        r = detect(filt, fm).data
        if r.shape != (g, g):
            r = resize_array(r, g, g, anchor="center")
        out.append(r)
    return out


def fused_response_at(state: TrackerState, frame: Frame, center, scale: float = 1.0):
    """Raw fused response (mean of per-layer raw maps) for a search region at
    `center`; the workhorse for re-detection arbitration and scale scoring."""
    maps, _ = _feature_stack(state, frame, center, scale)
    return np.mean(_raw_responses(state, maps), axis=0)


def response_geometry(state: TrackerState):
    """(grid, stride_y, stride_x): grid size and frame pixels per grid cell."""
    cw, ch = _search_size(state)
    g = state.config.patch_size
    return g, ch / g, cw / g


def _learn_stack(state: TrackerState, maps):
    return [
        learn_filter(fm, _label(state, fm.v, fm.h), state.config.lambda_) for fm in maps
    ]


def init(frame: Frame, box: BoundingBox, config: TrackerConfig) -> TrackerState:
    """Learn the initial per-layer filters from the first frame's box."""
    if box.x + box.w <= 0 or box.y + box.h <= 0 or box.x >= frame.width or box.y >= frame.height:
        raise InvalidArgumentError(f"box {box.as_tuple()} does not overlap the frame")
    state = TrackerState(
        config=config,
        box=box,
        filters=[],
        score_history=ScoreHistory(
            capacity=config.history_window, tau=config.tau, eta_base=config.eta_base
        ),
        scale=ScaleConfig(a=config.a, s=config.s, current_scale=1.0),
        frame_index=0,
        extractors=[make_extractor(spec) for spec in config.extractor_specs],
        initial_size=(box.w, box.h),
    )
    maps, _ = _feature_stack(state, frame, box.center)
    state.filters = _learn_stack(state, maps)
    return state


def track(state: TrackerState, frame: Frame):
    """Advance the tracker by one frame; returns (state, box, diagnostics)."""
    cfg = state.config
    if frame.width < state.box.w or frame.height < state.box.h:
        raise TrackingDegenerateError(
            f"frame {frame.width}x{frame.height} smaller than target "
            f"{state.box.w:.0f}x{state.box.h:.0f}"
        )
    g = cfg.patch_size
    maps, realized = _feature_stack(state, frame, state.center)
    raws = _raw_responses(state, maps)
    raw = np.mean(raws, axis=0)
    norm = fuse([normalize_response(r) for r in raws])

    if cfg.redetect_enabled:
        rcfg = RedetectConfig(xi=cfg.xi, theta=cfg.theta, n_max=cfg.n_max, enabled=True)
        peaks = select_candidates(norm, rcfg)
        n_candidates = len(peaks)
        redetected = n_candidates > 1
        row, col = redetect(peaks, frame, state)
    else:
        masked = np.where(central_mask(g, g, cfg.xi).astype(bool), norm.data, -np.inf)
        r_, c_ = np.unravel_index(int(np.argmax(masked)), masked.shape)
        row, col = float(r_), float(c_)
        n_candidates, redetected = 1, False

    _, stride_y, stride_x = response_geometry(state)
    dx = float(fold_shift(col - g // 2, g)) * stride_x
    dy = float(fold_shift(row - g // 2, g)) * stride_y
    cx = float(np.clip(realized[0] + dx, 0.0, frame.width))
    cy = float(np.clip(realized[1] + dy, 0.0, frame.height))

    best_scale, s_t = estimate_scale(frame, (cx, cy), state)
    w0, h0 = state.initial_size
    new_box = BoundingBox.from_center(
        cx, cy, w0 * state.scale.current_scale, h0 * state.scale.current_scale
    )
    state.box = new_box

    c_t = confidence(state.score_history, s_t)
    if cfg.adaptive_update_enabled:
        eta_t = learning_rate(c_t, cfg.tau, cfg.eta_base)
    else:
        eta_t = cfg.eta_base
    if eta_t > 0.0:
        fresh_maps, _ = _feature_stack(state, frame, (cx, cy))
        fresh = _learn_stack(state, fresh_maps)
        state.filters = [
            interpolate_model(old, new, eta_t) for old, new in zip(state.filters, fresh)
        ]
    state.score_history = push(state.score_history, s_t)
    state.frame_index += 1

    diag = Diagnostics(
        frame_index=state.frame_index,
        score=s_t,
        primal_score=float(raw.max()),
        c_t=c_t,
        eta_t=eta_t,
        n_candidates=n_candidates,
        redetected=redetected,
        best_scale=best_scale,
    )
    return state, new_box, diag


_CONFIG_FIELDS = {
    "lambda": ("lambda_", float),
    "xi": ("xi", float),
    "theta": ("theta", float),
    "n_max": ("n_max", int),
    "a": ("a", float),
    "s": ("s", int),
    "tau": ("tau", float),
    "eta_base": ("eta_base", float),
    "history_window": ("history_window", int),
    "patch_size": ("patch_size", int),
    "search_factor": ("search_factor", float),
    "extractor_specs": ("extractor_specs", None),
    "redetect_enabled": ("redetect_enabled", None),
    "adaptive_update_enabled": ("adaptive_update_enabled", None),
}


def _parse_bool(value: str, key: str, lineno: int) -> bool:
    if value.lower() == "true":
        return True
    if value.lower() == "false":
        return False
    raise ConfigError(f"line {lineno}: {key} must be true or false, got {value!r}")


def _split_spec_list(text: str):
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return [p.strip() for p in parts if p.strip()]


def load_config(path) -> TrackerConfig:
    """Flat `key = value` file, '#' comments, every key a TrackerConfig field."""
    kwargs = {}
    for lineno, rawline in enumerate(Path(path).read_text().splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {rawline!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, cast = _CONFIG_FIELDS[key]
        try:
            if key == "extractor_specs":
                kwargs[attr] = tuple(parse_spec(s) for s in _split_spec_list(value))
            elif cast is None:
                kwargs[attr] = _parse_bool(value, key, lineno)
            else:
                kwargs[attr] = cast(value)
        except ConfigError:
            raise
        except (ValueError, InvalidArgumentError) as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    try:
        return TrackerConfig(**kwargs)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
