"""Inference service turning RGB patches into convolutional feature maps
over a bit-exact binary TCP protocol."""

from .errors import LayerNameError, ModelSpecError, ProtocolError
from .model import FeatureModel, SeededBackbone, build_model, describe_text
from .server import FeatureServer

__version__ = "0.1.0"

__all__ = [
    "FeatureModel",
    "FeatureServer",
    "LayerNameError",
    "ModelSpecError",
    "ProtocolError",
    "SeededBackbone",
    "build_model",
    "describe_text",
]
