"""Feature extraction: one FeatureMap per configured level.

Three extractor kinds share one interface. The classic kinds (gray-cells,
grad-hist) are pure numpy and make the whole tracker testable without a
network in the loop; deep-client fetches convolutional maps from the feature
service over its binary protocol and selects one layer per extractor, so K
configured extractors always mean K fusion levels.
"""

from __future__ import annotations

import re
import socket
import struct
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import FeatureSourceError, InvalidArgumentError
from .imaging import Patch

_KINDS = ("gray-cells", "grad-hist", "deep-client")

# Rec. 601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])

_GRAD_NORM_EPS = 1e-5


@dataclass(frozen=True)
class FeatureMap:
    v: int
    h: int
    d: int
    data: np.ndarray  # (v, h, d) float64
    cell_size: float

    def __post_init__(self):
        if self.data.shape != (self.v, self.h, self.d):
            raise InvalidArgumentError(
                f"data shape {self.data.shape} does not match {(self.v, self.h, self.d)}"
            )
        if self.cell_size < 1:
            raise InvalidArgumentError(f"cell_size must be >= 1, got {self.cell_size}")
        if not np.all(np.isfinite(self.data)):
            raise InvalidArgumentError("feature map contains non-finite values")


_DEFAULTS = {
    "gray-cells": {"cell_size": 4},
    "grad-hist": {"cell_size": 4, "bins": 9},
    "deep-client": {"host": "127.0.0.1", "port": 9400, "layer": 0},
}


@dataclass(frozen=True)
class ExtractorSpec:
    kind: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidArgumentError(f"unknown extractor kind {self.kind!r}")
        defaults = _DEFAULTS[self.kind]
        unknown = set(self.parameters) - set(defaults)
        if unknown:
            raise InvalidArgumentError(
                f"unknown parameters for {self.kind}: {sorted(unknown)}"
            )
        merged = dict(defaults)
        merged.update(self.parameters)
        if self.kind in ("gray-cells", "grad-hist"):
            if not isinstance(merged["cell_size"], int) or merged["cell_size"] < 1:
                raise InvalidArgumentError(f"cell_size must be a positive int, got {merged['cell_size']}")
        if self.kind == "grad-hist":
            if not isinstance(merged["bins"], int) or merged["bins"] < 1:
                raise InvalidArgumentError(f"bins must be a positive int, got {merged['bins']}")
        if self.kind == "deep-client":
            if not isinstance(merged["port"], int) or not 1 <= merged["port"] <= 65535:
                raise InvalidArgumentError(f"port must be in 1..65535, got {merged['port']}")
            if not isinstance(merged["layer"], int) or merged["layer"] < 0:
                raise InvalidArgumentError(f"layer must be a non-negative int, got {merged['layer']}")
        object.__setattr__(self, "parameters", merged)


_SPEC_RE = re.compile(r"^\s*([a-z-]+)\s*(?:\(\s*(.*?)\s*\))?\s*$")


def parse_spec(text: str) -> ExtractorSpec:
    """Parse 'kind' or 'kind(key=value, key=value)' into an ExtractorSpec."""
    m = _SPEC_RE.match(text)
    if not m:
        raise InvalidArgumentError(f"cannot parse extractor spec {text!r}")
    kind, args = m.group(1), m.group(2)
    parameters = {}
    if args:
        for part in args.split(","):
            if "=" not in part:
                raise InvalidArgumentError(f"expected key=value in {text!r}, got {part!r}")
            key, value = (s.strip() for s in part.split("=", 1))
            try:
                parameters[key] = int(value)
            except ValueError:
                parameters[key] = value
    return ExtractorSpec(kind=kind, parameters=parameters)


def intensity(patch: Patch) -> np.ndarray:
    """Luma of a patch scaled to [0, 1], shape (height, width)."""
    return (patch.pixels.astype(np.float64) @ _LUMA) / 255.0


class GrayCellsExtractor:
    def __init__(self, spec: ExtractorSpec):
        self.spec = spec
        self.cell_size = spec.parameters["cell_size"]

    def extract(self, patch: Patch) -> FeatureMap:
        c = self.cell_size
        if patch.height % c or patch.width % c:
            raise InvalidArgumentError(
                f"patch {patch.width}x{patch.height} not divisible by cell size {c}"
            )
        v, h = patch.height // c, patch.width // c
        gray = intensity(patch)
        cells = gray.reshape(v, c, h, c).mean(axis=(1, 3))
        data = (cells - cells.mean())[:, :, None]
        return FeatureMap(v=v, h=h, d=1, data=data, cell_size=float(c))


class GradHistExtractor:
    def __init__(self, spec: ExtractorSpec):
        self.spec = spec
        self.cell_size = spec.parameters["cell_size"]
        self.bins = spec.parameters["bins"]

    def extract(self, patch: Patch) -> FeatureMap:
        c, bins = self.cell_size, self.bins
        if patch.height % c or patch.width % c:
            raise InvalidArgumentError(
                f"patch {patch.width}x{patch.height} not divisible by cell size {c}"
            )
        v, h = patch.height // c, patch.width // c
        gray = intensity(patch)
        gy, gx = np.gradient(gray)
        mag = np.hypot(gx, gy)
        # unsigned orientation in [0, pi)
        ang = np.mod(np.arctan2(gy, gx), np.pi)
        b = np.minimum((ang / np.pi * bins).astype(np.intp), bins - 1)
        rows = np.arange(patch.height) // c
        cols = np.arange(patch.width) // c
        flat = (rows[:, None] * h + cols[None, :]) * bins + b
        hist = np.bincount(flat.ravel(), weights=mag.ravel(), minlength=v * h * bins)
        data = hist.reshape(v, h, bins)
        norms = np.sqrt((data**2).sum(axis=2, keepdims=True) + _GRAD_NORM_EPS)
        return FeatureMap(v=v, h=h, d=bins, data=data / norms, cell_size=float(c))


class _Wire:
    REQUEST = b"MLFQ"
    RESPONSE = b"MLFR"
    ERROR = b"MLFE"
    ERROR_TEXT = {1: "bad magic", 2: "bad dimensions", 3: "inference failure"}


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise FeatureSourceError(f"connection closed after {len(buf)} of {n} bytes")
        buf.extend(chunk)
    return bytes(buf)


class DeepClientExtractor:
    """Fetches feature maps from the feature service, keeping one layer.

    Holds a single connection, opened lazily, and serializes its own requests;
    run one instance per layer for parallel extraction.
    """

    def __init__(self, spec: ExtractorSpec):
        self.spec = spec
        self.host = spec.parameters["host"]
        self.port = spec.parameters["port"]
        self.layer = spec.parameters["layer"]
        self._sock = None
        self._lock = threading.Lock()

    def close(self):
        with self._lock:
            if self._sock is not None:
                try:
                    self._sock.close()
                finally:
                    self._sock = None

    def _connect(self) -> socket.socket:
        if self._sock is None:
            try:
                self._sock = socket.create_connection((self.host, self.port), timeout=30.0)
            except OSError as exc:
                raise FeatureSourceError(
                    f"cannot reach feature service at {self.host}:{self.port} ({exc})"
                ) from exc
        return self._sock

    def extract(self, patch: Patch) -> FeatureMap:
        with self._lock:
            try:
                return self._roundtrip(patch)
            except FeatureSourceError:
                # drop the connection so the next call starts clean
                if self._sock is not None:
                    self._sock.close()
                    self._sock = None
                raise
            except OSError as exc:
                if self._sock is not None:
                    self._sock.close()
                    self._sock = None
                raise FeatureSourceError(f"transport failure ({exc})") from exc

    def _roundtrip(self, patch: Patch) -> FeatureMap:
        sock = self._connect()
        payload = np.ascontiguousarray(patch.pixels).tobytes()
        header = _Wire.REQUEST + struct.pack("<III", patch.width, patch.height, 3)
        sock.sendall(header + payload)

        magic = _read_exact(sock, 4)
        if magic == _Wire.ERROR:
            (code,) = struct.unpack("<I", _read_exact(sock, 4))
            text = _Wire.ERROR_TEXT.get(code, "unknown error")
            raise FeatureSourceError(f"service error {code}: {text}")
        if magic != _Wire.RESPONSE:
            raise FeatureSourceError(f"bad response magic {magic!r}")

        (k,) = struct.unpack("<I", _read_exact(sock, 4))
        if self.layer >= k:
            raise FeatureSourceError(f"layer {self.layer} requested but service sent {k}")
        selected = None
        for index in range(k):
            v, h, d = struct.unpack("<III", _read_exact(sock, 12))
            raw = _read_exact(sock, v * h * d * 4)
            if index == self.layer:
                values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
                selected = (v, h, d, values.reshape(v, h, d))
        v, h, d, data = selected
        if not np.all(np.isfinite(data)):
            raise FeatureSourceError("service returned non-finite values")
        return FeatureMap(v=v, h=h, d=d, data=data, cell_size=patch.width / h)


def make_extractor(spec: ExtractorSpec):
    if spec.kind == "gray-cells":
        return GrayCellsExtractor(spec)
    if spec.kind == "grad-hist":
        return GradHistExtractor(spec)
    return DeepClientExtractor(spec)


def extract(spec: ExtractorSpec, patch: Patch) -> FeatureMap:
    """One-shot extraction. Long-lived callers should keep the extractor
    from make_extractor instead, so deep clients reuse their connection."""
    extractor = make_extractor(spec)
    try:
        return extractor.extract(patch)
    finally:
        if isinstance(extractor, DeepClientExtractor):
            extractor.close()


def apply_window(fm: FeatureMap, window: np.ndarray) -> FeatureMap:
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (fm.v, fm.h):
        raise InvalidArgumentError(f"window {window.shape} does not match map {(fm.v, fm.h)}")
    return FeatureMap(
        v=fm.v, h=fm.h, d=fm.d, data=fm.data * window[:, :, None], cell_size=fm.cell_size
    )
