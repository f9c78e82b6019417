"""Backbones and the model wrapper the server runs.

Two model spec forms:

- ``seeded:<seed>``: a three-stage conv/relu/avgpool stack whose weights are
  drawn once from a seeded generator. Not trained, but fixed for all time by
  the seed, which is all the protocol demands: stable shapes and bit-stable
  activations.
- ``torchvision:<name>``: any torchvision classification backbone with its
  default pretrained weights, when those weights are present locally; layer
  names are the graph node names of the wanted activations.
"""

import numpy as np
import torch
from torch import nn

from .errors import LayerNameError, ModelSpecError

# inference must be reproducible bit for bit across calls
torch.use_deterministic_algorithms(True)

_MIN_PATCH = 8


class SeededBackbone(nn.Module):
    STAGE_CHANNELS = (16, 32, 64)

    def __init__(self, seed: int):
        super().__init__()
        widths = (3,) + self.STAGE_CHANNELS
        self.stages = nn.ModuleDict()
        for i, (cin, cout) in enumerate(zip(widths, widths[1:]), start=1):
            self.stages[f"stage{i}"] = nn.Sequential(
                nn.Conv2d(cin, cout, 3, padding=1),
                nn.ReLU(),
                nn.AvgPool2d(2),
            )
        gen = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for p in self.parameters():
                if p.dim() > 1:
                    fan_in = p.shape[1] * p.shape[2] * p.shape[3]
                    bound = (6.0 / fan_in) ** 0.5
                    p.uniform_(-bound, bound, generator=gen)
                else:
                    p.zero_()
        self.eval()

    @property
    def layer_names(self):
        return list(self.stages)

    def forward_features(self, x, wanted):
        out = {}
        for name, stage in self.stages.items():
            x = stage(x)
            if name in wanted:
                out[name] = x
            if len(out) == len(wanted):
                break
        return out


class TorchvisionBackbone(nn.Module):
    def __init__(self, name: str, layers):
        super().__init__()
        try:
            from torchvision import models
            from torchvision.models import feature_extraction
        except ImportError as exc:
            raise ModelSpecError(f"torchvision is not installed ({exc})") from exc
        try:
            base = models.get_model(name, weights="DEFAULT")
        except ValueError as exc:
            raise ModelSpecError(f"unknown torchvision model {name!r}: {exc}") from exc
        except Exception as exc:
            raise ModelSpecError(
                f"cannot load pretrained weights for {name!r} ({exc})"
            ) from exc
        base.eval()
        self._names = feature_extraction.get_graph_node_names(base)[1]
        unknown = [l for l in layers if l not in self._names]
        if unknown:
            raise LayerNameError(
                f"unknown layers {unknown}; valid names: {', '.join(self._names)}"
            )
        self._extractor = feature_extraction.create_feature_extractor(
            base, return_nodes={l: l for l in layers}
        )

    @property
    def layer_names(self):
        return self._names

    def forward_features(self, x, wanted):
        return self._extractor(x)


def parse_model_spec(spec: str):
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise ModelSpecError(
            f"model spec {spec!r} must be seeded:<seed> or torchvision:<name>"
        )
    if kind == "seeded":
        try:
            return kind, int(rest)
        except ValueError as exc:
            raise ModelSpecError(f"seed must be an integer, got {rest!r}") from exc
    if kind == "torchvision":
        return kind, rest
    raise ModelSpecError(f"unknown model kind {kind!r} in {spec!r}")


class FeatureModel:
    """A backbone bound to an ordered layer list and a fixed input size."""

    def __init__(self, backbone, layers, patch_size: int):
        if patch_size < _MIN_PATCH:
            raise ModelSpecError(f"patch size must be >= {_MIN_PATCH}, got {patch_size}")
        layers = list(layers)
        if not layers:
            raise LayerNameError("need at least one layer name")
        if len(set(layers)) != len(layers):
            raise LayerNameError(f"duplicate layer names in {layers}")
        unknown = [l for l in layers if l not in backbone.layer_names]
        if unknown:
            raise LayerNameError(
                f"unknown layers {unknown}; valid names: "
                f"{', '.join(backbone.layer_names)}"
            )
        self.backbone = backbone
        self.layers = layers
        self.patch_size = patch_size
        self._shapes = None

    def extract(self, pixels: np.ndarray):
        """uint8 (patch, patch, 3) -> list of float32 (v, h, d) arrays,
        one per configured layer, in configured order."""
        x = torch.from_numpy(pixels.astype(np.float32) / 255.0 - 0.5)
        x = x.permute(2, 0, 1).unsqueeze(0)
        with torch.inference_mode():
            feats = self.backbone.forward_features(x, set(self.layers))
        out = []
        for name in self.layers:
            t = feats[name][0].permute(1, 2, 0).contiguous()
            out.append(np.asarray(t.numpy(), dtype="<f4"))
        return out

    def shapes(self):
        if self._shapes is None:
            probe = np.zeros((self.patch_size, self.patch_size, 3), dtype=np.uint8)
            self._shapes = [arr.shape for arr in self.extract(probe)]
        return self._shapes


def build_model(spec: str, layers, patch_size: int = 224) -> FeatureModel:
    kind, arg = parse_model_spec(spec)
    if kind == "seeded":
        backbone = SeededBackbone(arg)
    else:
        backbone = TorchvisionBackbone(arg, layers)
    return FeatureModel(backbone, layers, patch_size)


def describe_text(model: FeatureModel) -> str:
    """Stable shape listing: k first, then one line per configured layer."""
    lines = [f"k={len(model.layers)}"]
    for name, (v, h, d) in zip(model.layers, model.shapes()):
        lines.append(f"{name}: v={v} h={h} d={d}")
    return "\n".join(lines) + "\n"
