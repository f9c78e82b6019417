"""Multi-peak candidate selection and re-detection arbitration.

A fused response map can carry several strong peaks when a distractor
resembles the target. This module finds strict local maxima, keeps those
inside a central mask (peaks hugging the boundary are window artifacts),
qualifies them by their ratio to the strongest surviving peak, and, when more
than one qualifies, re-runs detection on a fresh search region around each
candidate and keeps the location with the largest re-detected response.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cfcore import fold_shift
from .errors import InvalidArgumentError


class Peak(NamedTuple):
    row: int
    col: int
    value: float
    ratio: float


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)


@dataclass(frozen=True)
class RedetectConfig:
    xi: float = 0.4
    theta: float = 0.7
    n_max: int = 3
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.xi <= 1.0:
            raise InvalidArgumentError(f"xi must lie in (0, 1], got {self.xi}")
        if not 0.0 < self.theta <= 1.0:
            raise InvalidArgumentError(f"theta must lie in (0, 1], got {self.theta}")
        if self.n_max < 1:
            raise InvalidArgumentError(f"n_max must be >= 1, got {self.n_max}")


def _map_data(q) -> np.ndarray:
    data = np.asarray(getattr(q, "data", q), dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        raise InvalidArgumentError(f"response must be a non-empty matrix, got {data.shape}")
    return data


def local_maxima(q) -> np.ndarray:
    """Binary map of strict 8-neighbor maxima; edges do not wrap.

    Exact ties mark neither cell, so a constant map has no maxima at all.
    """
    data = _map_data(q)
    v, h = data.shape
    padded = np.full((v + 2, h + 2), -np.inf)
    padded[1:-1, 1:-1] = data
    out = np.ones((v, h), dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            out &= data > padded[1 + dr : 1 + dr + v, 1 + dc : 1 + dc + h]
    return out.astype(np.uint8)


def central_mask(v: int, h: int, xi: float) -> np.ndarray:
    """Centered rectangle of ones covering a xi proportion of each side."""
    if v < 1 or h < 1:
        raise InvalidArgumentError(f"mask dims must be >= 1, got {v}x{h}")
    if not 0.0 < xi <= 1.0:
        raise InvalidArgumentError(f"xi must lie in (0, 1], got {xi}")
    mv = int(np.ceil(xi * v))
    mh = int(np.ceil(xi * h))
    r0 = v // 2 - mv // 2
    c0 = h // 2 - mh // 2
    mask = np.zeros((v, h), dtype=np.uint8)
    mask[r0 : r0 + mv, c0 : c0 + mh] = 1
    return mask


def _masked_argmax_peak(data: np.ndarray, mask: np.ndarray) -> Peak:
    masked = np.where(mask.astype(bool), data, -np.inf)
    row, col = np.unravel_index(int(np.argmax(masked)), data.shape)
    return Peak(int(row), int(col), float(data[row, col]), 1.0)


def select_candidates(q, cfg: RedetectConfig) -> PeakSet:
    """Qualified peaks: in-mask strict maxima with ratio >= theta, top n_max.

    Ratios are taken against the strongest surviving peak. When no maximum
    survives the mask (or the best one is not positive, which would make
    ratios meaningless), the masked global argmax stands in as a single peak.
    """
    data = _map_data(q)
    v, h = data.shape
    mask = central_mask(v, h, cfg.xi)
    surviving = local_maxima(data).astype(bool) & mask.astype(bool)
    if not surviving.any():
        return PeakSet((_masked_argmax_peak(data, mask),))

    rows, cols = np.nonzero(surviving)
    values = data[rows, cols]
    best = values.max()
    if best <= 0.0:
        return PeakSet((_masked_argmax_peak(data, mask),))

    ratios = values / best
    order = sorted(range(len(values)), key=lambda i: (-ratios[i], rows[i], cols[i]))
    peaks = [
        Peak(int(rows[i]), int(cols[i]), float(values[i]), float(ratios[i]))
        for i in order
        if ratios[i] >= cfg.theta
    ]
    return PeakSet(tuple(peaks[: cfg.n_max]))


def redetect(peaks: PeakSet, frame, state):
    """Arbitrate among candidate peaks, returning (row, col) on the primary grid.

    A lone peak is returned as-is with no extra detections. With several, each
    candidate gets a fresh search region and full detect + fuse pass at the
    primary geometry; the largest re-detected raw response wins, ties going to
    the earlier (higher-ratio) candidate. The winner's argmax is mapped back
    into the primary response grid so the caller's displacement arithmetic is
    unchanged.
    """
    if len(peaks) == 0:
        raise InvalidArgumentError("peak set is empty")
    if len(peaks) == 1:
        p = peaks.peaks[0]
        return float(p.row), float(p.col)

    from .pipeline import fused_response_at, response_geometry

    grid, stride_y, stride_x = response_geometry(state)
    cx, cy = state.center
    best = None
    for rank, p in enumerate(peaks):
        cand_center = (
            cx + (p.col - grid // 2) * stride_x,
            cy + (p.row - grid // 2) * stride_y,
        )
        raw = fused_response_at(state, frame, cand_center)
        arg = np.unravel_index(int(np.argmax(raw)), raw.shape)
        score = float(raw[arg])
        if best is None or score > best[0]:
            dr = int(fold_shift(arg[0] - grid // 2, grid))
            dc = int(fold_shift(arg[1] - grid // 2, grid))
            row = grid // 2 + (p.row - grid // 2) + dr
            col = grid // 2 + (p.col - grid // 2) + dc
            best = (score, rank, float(row), float(col))
    return best[2], best[3]
