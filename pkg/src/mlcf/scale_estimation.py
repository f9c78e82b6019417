"""Patch-pyramid scale search.

After translation is settled for a frame, the search region is re-cropped at
a small ladder of sizes around the current scale, each resized to the
canonical patch and pushed through the same detect + fuse path; the size
whose fused response peaks highest wins. The accumulated scale is clamped so
the target box never collapses below 8x8 px or outgrows the frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

MIN_TARGET_PX = 8.0


@dataclass
class ScaleConfig:
    a: float = 1.02
    s: int = 5
    current_scale: float = 1.0

    def __post_init__(self):
        if self.a <= 1.0:
            raise InvalidArgumentError(f"scale step must exceed 1, got {self.a}")
        if self.s < 1 or self.s % 2 == 0:
            raise InvalidArgumentError(f"pyramid size must be odd and >= 1, got {self.s}")
        if self.current_scale <= 0:
            raise InvalidArgumentError(f"current_scale must be positive, got {self.current_scale}")


def pyramid_exponents(cfg: ScaleConfig) -> np.ndarray:
    half = (cfg.s - 1) // 2
    return np.arange(-half, half + 1)


def pyramid_factors(cfg: ScaleConfig) -> np.ndarray:
    """Ascending factors a^n for n symmetric about 0; the middle is exactly 1."""
    return np.power(float(cfg.a), pyramid_exponents(cfg).astype(np.float64))


def clamp_scale(scale: float, initial_size, frame) -> float:
    """Keep the scaled target of initial_size=(w, h) inside [8 px, frame]."""
    w0, h0 = initial_size
    low = max(MIN_TARGET_PX / w0, MIN_TARGET_PX / h0)
    high = min(frame.width / w0, frame.height / h0)
    if high < low:
        # frame smaller than the minimum target; prefer staying inside the frame
        return high
    return float(np.clip(scale, low, high))


def estimate_scale(frame, center, state):
    """Pick the pyramid factor with the largest fused response at `center`.

    Returns (best_factor, best_response) and folds the factor into the
    state's accumulated scale, clamped. Score ties go to the factor closest
    to 1.0, then to the smaller factor.
    """
    from .pipeline import fused_response_at

    cfg = state.scale
    exponents = pyramid_exponents(cfg)
    factors = pyramid_factors(cfg)
    best = None
    for n, f in zip(exponents, factors):
        score = float(fused_response_at(state, frame, center, scale=f).max())
        key = (score, -abs(int(n)), -int(n))
        if best is None or key > best[0]:
            best = (key, float(f), score)
    _, best_factor, best_score = best
    cfg.current_scale = clamp_scale(
        cfg.current_scale * best_factor, state.initial_size, frame
    )
    return best_factor, best_score
