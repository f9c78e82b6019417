import numpy as np
import pytest

from featservice.errors import LayerNameError, ModelSpecError
from featservice.model import build_model, describe_text, parse_model_spec


def patch_pixels(size, seed=0):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 256, (size, size, 3), dtype=np.uint8)


class TestSpecParsing:
    def test_seeded(self):
        assert parse_model_spec("seeded:42") == ("seeded", 42)

    def test_torchvision(self):
        assert parse_model_spec("torchvision:vgg16") == ("torchvision", "vgg16")

    @pytest.mark.parametrize("spec", ["seeded", "seeded:", "seeded:x", "magic:3", ":7"])
    def test_rejects(self, spec):
        with pytest.raises(ModelSpecError):
            parse_model_spec(spec)

    def test_unknown_torchvision_model(self):
        with pytest.raises(ModelSpecError, match="no-such-net"):
            build_model("torchvision:no-such-net", ["x"], 224)


class TestSeededModel:
    def test_full_size_shapes(self):
        m = build_model("seeded:0", ["stage1", "stage2", "stage3"], 224)
        assert m.shapes() == [(112, 112, 16), (56, 56, 32), (28, 28, 64)]

    def test_small_patch_shapes(self):
        m = build_model("seeded:0", ["stage1"], 64)
        assert m.shapes() == [(32, 32, 16)]

    def test_layer_order_follows_config(self):
        m = build_model("seeded:0", ["stage3", "stage1"], 64)
        assert m.shapes() == [(8, 8, 64), (32, 32, 16)]

    def test_same_seed_same_bits(self):
        px = patch_pixels(32)
        a = build_model("seeded:9", ["stage2"], 32).extract(px)
        b = build_model("seeded:9", ["stage2"], 32).extract(px)
        assert a[0].tobytes() == b[0].tobytes()

    def test_different_seeds_differ(self):
        px = patch_pixels(32)
        a = build_model("seeded:1", ["stage1"], 32).extract(px)
        b = build_model("seeded:2", ["stage1"], 32).extract(px)
        assert a[0].tobytes() != b[0].tobytes()

    def test_repeat_extract_is_bit_stable(self):
        m = build_model("seeded:3", ["stage1", "stage3"], 32)
        px = patch_pixels(32, seed=5)
        first = [arr.tobytes() for arr in m.extract(px)]
        second = [arr.tobytes() for arr in m.extract(px)]
        assert first == second

    def test_finite_and_float32(self):
        m = build_model("seeded:4", ["stage1", "stage2", "stage3"], 48)
        for arr in m.extract(patch_pixels(48)):
            assert arr.dtype == np.dtype("<f4")
            assert np.isfinite(arr).all()

    def test_activations_not_degenerate(self):
        m = build_model("seeded:0", ["stage3"], 64)
        arr = m.extract(patch_pixels(64, seed=1))[0]
        assert arr.std() > 0


class TestValidation:
    def test_unknown_layer_lists_valid(self):
        with pytest.raises(LayerNameError, match="stage1, stage2, stage3"):
            build_model("seeded:0", ["conv9"], 64)

    def test_duplicate_layer(self):
        with pytest.raises(LayerNameError, match="duplicate"):
            build_model("seeded:0", ["stage1", "stage1"], 64)

    def test_empty_layers(self):
        with pytest.raises(LayerNameError):
            build_model("seeded:0", [], 64)

    def test_tiny_patch(self):
        with pytest.raises(ModelSpecError, match="patch"):
            build_model("seeded:0", ["stage1"], 4)


class TestDescribe:
    def test_format(self):
        m = build_model("seeded:0", ["stage1", "stage2"], 64)
        text = describe_text(m)
        assert text == "k=2\nstage1: v=32 h=32 d=16\nstage2: v=16 h=16 d=32\n"

    def test_invocation_stable(self):
        m = build_model("seeded:0", ["stage1"], 224)
        assert describe_text(m) == describe_text(m)
