"""Fourier-domain correlation filter: labels, learning, detection, interpolation.

A filter is learned per feature layer by ridge regression against a Gaussian
label, solved independently at every frequency:

    w_hat_d = x_hat_d * conj(y_hat) / (sum_d x_hat_d * conj(x_hat_d) + lambda)

Detection correlates a new feature map z against the filter:

    R = idft2(sum_d z_hat_d * conj(w_hat_d))

With this pairing of conjugates, detecting on the training map reproduces the
label (peak on the centre cell), and a circular shift of the input shifts the
response by the same amount; displacement therefore reads off as
argmax - centre.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, NumericConsistencyError

# residue thresholds: inverse transforms of conjugate-symmetric spectra and the
# channel energy sum are real up to rounding; anything larger means a
# conjugation bug upstream, not noise
_IDFT_IMAG_TOL = 1e-6
_DENOM_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class GaussianLabel:
    v: int
    h: int
    sigma: float
    data: np.ndarray


@dataclass(frozen=True)
class LayerFilter:
    v: int
    h: int
    d: int
    spectra: np.ndarray  # (d, v, h) complex
    lam: float
    degenerate: bool = field(default=False)


@dataclass(frozen=True)
class ResponseMap:
    v: int
    h: int
    data: np.ndarray


def dft2(a: np.ndarray) -> np.ndarray:
    """Unnormalized 2-D DFT over the two leading axes."""
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidArgumentError(f"need a matrix, got shape {a.shape}")
    return np.fft.fft2(a, axes=(0, 1))


def idft2(spec: np.ndarray) -> np.ndarray:
    """Inverse 2-D DFT (carries the 1/(V*H) factor), returning the real part.

    The imaginary residue must stay below tolerance; a larger residue
    indicates a flipped conjugation convention somewhere upstream and raises
    instead of being silently discarded.
    """
    spec = np.asarray(spec, dtype=np.complex128)
    if spec.ndim < 2:
        raise InvalidArgumentError(f"need a matrix, got shape {spec.shape}")
    x = np.fft.ifft2(spec, axes=(0, 1))
    residue = float(np.abs(x.imag).max()) if x.size else 0.0
    if residue > _IDFT_IMAG_TOL:
        raise NumericConsistencyError(
            f"imaginary residue {residue:.3e} exceeds {_IDFT_IMAG_TOL:.0e} after inverse DFT"
        )
    return np.ascontiguousarray(x.real)


def gaussian_label(v: int, h: int, sigma: float) -> GaussianLabel:
    """Gaussian bump of unit peak on the centre cell (v//2, h//2).

    Distances are wrap-around, so the label is circularly symmetric and
    matches the cyclic shifts implied by Fourier-domain training.
    """
    if v < 1 or h < 1:
        raise InvalidArgumentError(f"label dims must be >= 1, got {v}x{h}")
    if sigma <= 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    di = np.arange(v) - v // 2
    dj = np.arange(h) - h // 2
    di = np.minimum(np.abs(di), v - np.abs(di))
    dj = np.minimum(np.abs(dj), h - np.abs(dj))
    data = np.exp(-(di[:, None] ** 2 + dj[None, :] ** 2) / (2.0 * sigma**2))
    return GaussianLabel(v=v, h=h, sigma=float(sigma), data=data)


def _map_data(fm) -> np.ndarray:
    """Accept a FeatureMap-like object or a raw (v, h) / (v, h, d) array."""
    data = np.asarray(getattr(fm, "data", fm), dtype=np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    if data.ndim != 3:
        raise InvalidArgumentError(f"feature map must be (v, h) or (v, h, d), got {data.shape}")
    return data


def _label_data(label) -> np.ndarray:
    return np.asarray(getattr(label, "data", label), dtype=np.float64)


def learn_filter(fm, label, lam: float) -> LayerFilter:
    """Ridge-regression filter for one feature layer.

    The denominator sum_d x_hat_d * conj(x_hat_d) + lambda is shared across
    channels and real by construction. With lambda = 0 a frequency can have
    zero energy (then the numerator vanishes there too); those entries are
    set to zero and the filter is flagged degenerate.
    """
    x = _map_data(fm)
    y = _label_data(label)
    v, h, d = x.shape
    if y.shape != (v, h):
        raise InvalidArgumentError(f"label {y.shape} does not match feature map {(v, h)}")
    if lam < 0:
        raise InvalidArgumentError(f"lambda must be >= 0, got {lam}")

    xhat = np.fft.fft2(x, axes=(0, 1))
    yhat = np.fft.fft2(y)
    energy = (xhat * np.conj(xhat)).sum(axis=2)
    residue = float(np.abs(energy.imag).max())
    if residue > _DENOM_IMAG_TOL:
        raise NumericConsistencyError(
            f"spectral energy must be real, imaginary residue {residue:.3e}"
        )
    denom = energy.real + lam

    degenerate = bool(np.any(denom == 0.0))
    if degenerate:
        denom = np.where(denom == 0.0, 1.0, denom)  # numerator is zero there as well

    numer = xhat * np.conj(yhat)[:, :, None]
    spectra = np.ascontiguousarray(np.moveaxis(numer, 2, 0) / denom[None, :, :])
    return LayerFilter(v=v, h=h, d=d, spectra=spectra, lam=float(lam), degenerate=degenerate)


def detect(filt: LayerFilter, fm) -> ResponseMap:
    """Correlation response of a feature map against a learned filter."""
    z = _map_data(fm)
    v, h, d = z.shape
    if (v, h, d) != (filt.v, filt.h, filt.d):
        raise InvalidArgumentError(
            f"feature map {(v, h, d)} does not match filter {(filt.v, filt.h, filt.d)}"
        )
    zhat = np.fft.fft2(z, axes=(0, 1))
    rhat = (np.moveaxis(zhat, 2, 0) * np.conj(filt.spectra)).sum(axis=0)
    return ResponseMap(v=v, h=h, data=idft2(rhat))


def fold_shift(delta, n: int):
    """Map a grid index difference onto the centered range [-n//2, n - n//2).

    Response maps are circular, so an argmax near the far edge means a small
    negative displacement, not a huge positive one.
    """
    if n < 1:
        raise InvalidArgumentError(f"grid size must be >= 1, got {n}")
    half = n // 2
    return (np.asarray(delta) + half) % n - half


def interpolate_model(old: LayerFilter, new: LayerFilter, rate: float) -> LayerFilter:
    """Convex combination of two filters in the spectral domain."""
    if (old.v, old.h, old.d) != (new.v, new.h, new.d):
        raise InvalidArgumentError("filter dims do not match")
    if old.lam != new.lam:
        raise InvalidArgumentError("filter regularization weights do not match")
    if not 0.0 <= rate <= 1.0:
        raise InvalidArgumentError(f"rate must lie in [0, 1], got {rate}")
    if rate == 0.0:
        return LayerFilter(old.v, old.h, old.d, old.spectra.copy(), old.lam, old.degenerate)
    if rate == 1.0:
        return LayerFilter(new.v, new.h, new.d, new.spectra.copy(), new.lam, new.degenerate)
    spectra = (1.0 - rate) * old.spectra + rate * new.spectra
    return LayerFilter(old.v, old.h, old.d, spectra, old.lam, old.degenerate or new.degenerate)
