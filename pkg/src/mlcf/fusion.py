"""Turn per-layer responses into distributions and fuse them.

Each layer's response map is shifted to be non-negative and normalized to sum
to one. The fused map minimizes the total KL divergence to the per-layer
distributions subject to summing to one; by the Lagrange multiplier method
that minimizer is simply their arithmetic mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceUndefinedError, InvalidArgumentError

# keeps constant maps well-defined (uniform) and every entry strictly positive
_EPS = 1e-12


@dataclass(frozen=True)
class NormalizedResponse:
    v: int
    h: int
    data: np.ndarray


def _response_data(r) -> np.ndarray:
    data = np.asarray(getattr(r, "data", r), dtype=np.float64)
    if data.ndim != 2:
        raise InvalidArgumentError(f"response must be 2-D, got shape {data.shape}")
    return data


def normalize_response(r) -> NormalizedResponse:
    """Min-shift then scale to a probability map; the argmax is unchanged."""
    data = _response_data(r)
    if not np.all(np.isfinite(data)):
        raise InvalidArgumentError("response contains non-finite values")
    shifted = data - data.min() + _EPS
    out = shifted / shifted.sum()
    return NormalizedResponse(v=data.shape[0], h=data.shape[1], data=out)


def fuse(maps) -> NormalizedResponse:
    """Elementwise mean of normalized maps, the KL-optimal combination."""
    maps = list(maps)
    if not maps:
        raise InvalidArgumentError("need at least one map to fuse")
    arrays = [_response_data(m) for m in maps]
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise InvalidArgumentError(f"map shapes differ: {a.shape} vs {shape}")
    data = np.mean(arrays, axis=0)
    return NormalizedResponse(v=shape[0], h=shape[1], data=data)


def kl_divergence(r, q) -> float:
    """KL(r || q) with the convention 0 * log(0 / q) = 0."""
    rd = _response_data(r)
    qd = _response_data(q)
    if rd.shape != qd.shape:
        raise InvalidArgumentError(f"shapes differ: {rd.shape} vs {qd.shape}")
    support = rd > 0.0
    if np.any(qd[support] == 0.0):
        raise DivergenceUndefinedError("q has zero mass where r does not")
    terms = rd[support] * np.log(rd[support] / qd[support])
    return float(terms.sum())
