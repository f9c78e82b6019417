"""Score history and the adaptive learning-rate rule.

The tracker watches how the current fused peak score compares with its recent
history. A score well above the running mean means the view of the target is
good, so the model updates at the base rate; far below means occlusion or
drift, so the update is suppressed entirely; in between, the rate scales with
the deviation. Note the rule is intentionally discontinuous at +tau: just
inside the band the rate is eta_base*(1+tau), just above it drops to
eta_base. That is how the rule is defined, not a bug to smooth over.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class ScoreHistory:
    capacity: int = 5
    tau: float = 0.05
    eta_base: float = 0.01
    window: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.capacity < 1:
            raise InvalidArgumentError(f"capacity must be >= 1, got {self.capacity}")
        if self.tau <= 0:
            raise InvalidArgumentError(f"tau must be positive, got {self.tau}")
        if not 0.0 < self.eta_base < 1.0:
            raise InvalidArgumentError(f"eta_base must lie in (0, 1), got {self.eta_base}")
        if len(self.window) > self.capacity:
            raise InvalidArgumentError("window exceeds capacity")
        if not all(np.isfinite(s) for s in self.window):
            raise InvalidArgumentError("window contains non-finite scores")


def confidence(history: ScoreHistory, current: float) -> float:
    """Deviation of the current score from the mean over window + current."""
    if not np.isfinite(current):
        raise InvalidArgumentError(f"current score must be finite, got {current}")
    if not history.window:
        return 0.0
    scores = history.window + (current,)
    return float(current - sum(scores) / len(scores))


def learning_rate(c: float, tau: float, eta_base: float) -> float:
    if tau <= 0:
        raise InvalidArgumentError(f"tau must be positive, got {tau}")
    if c > tau:
        return eta_base
    if c < -tau:
        return 0.0
    return eta_base * (1.0 + c)


def push(history: ScoreHistory, score: float) -> ScoreHistory:
    """Append a score, evicting the oldest entry once capacity is reached."""
    if not np.isfinite(score):
        raise InvalidArgumentError(f"score must be finite, got {score}")
    window = history.window + (float(score),)
    if len(window) > history.capacity:
        window = window[-history.capacity :]
    return ScoreHistory(
        capacity=history.capacity, tau=history.tau, eta_base=history.eta_base, window=window
    )
