"""Multi-level correlation-filter tracker.

Filters are learned per feature layer by Fourier-domain ridge regression,
their responses fused as the KL-optimal mean of normalized maps, and the
fused map drives oriented re-detection, adaptive model updates and a
pyramid scale search. `init` and `track` in `mlcf.pipeline` are the main
entry points; the `mlcf` console script runs benchmark sequences.
"""

from .cfcore import (
    GaussianLabel,
    LayerFilter,
    ResponseMap,
    detect,
    fold_shift,
    gaussian_label,
    interpolate_model,
    learn_filter,
)
from .errors import (
    ConfigError,
    CorruptFileError,
    DivergenceUndefinedError,
    FeatureSourceError,
    FrameLoadError,
    InvalidArgumentError,
    NumericConsistencyError,
    SequenceFormatError,
    TrackingDegenerateError,
    UnsupportedFormatError,
)
from .evaluation import (
    Sequence,
    auc,
    center_error,
    dp20,
    iou,
    load_sequence,
    metrics_report,
    precision_curve,
    success_curve,
)
from .features import ExtractorSpec, FeatureMap, extract, make_extractor, parse_spec
from .fusion import NormalizedResponse, fuse, kl_divergence, normalize_response
from .imaging import Frame, Patch, crop_patch, load_frame, resize
from .pipeline import (
    BoundingBox,
    Diagnostics,
    TrackerConfig,
    TrackerState,
    init,
    load_config,
    track,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "ConfigError",
    "CorruptFileError",
    "Diagnostics",
    "DivergenceUndefinedError",
    "ExtractorSpec",
    "FeatureMap",
    "FeatureSourceError",
    "Frame",
    "FrameLoadError",
    "GaussianLabel",
    "InvalidArgumentError",
    "LayerFilter",
    "NormalizedResponse",
    "NumericConsistencyError",
    "Patch",
    "ResponseMap",
    "Sequence",
    "SequenceFormatError",
    "TrackerConfig",
    "TrackerState",
    "TrackingDegenerateError",
    "UnsupportedFormatError",
    "auc",
    "center_error",
    "crop_patch",
    "detect",
    "dp20",
    "extract",
    "fold_shift",
    "fuse",
    "gaussian_label",
    "init",
    "interpolate_model",
    "iou",
    "kl_divergence",
    "learn_filter",
    "load_config",
    "load_frame",
    "load_sequence",
    "make_extractor",
    "metrics_report",
    "normalize_response",
    "parse_spec",
    "precision_curve",
    "resize",
    "success_curve",
    "track",
]
