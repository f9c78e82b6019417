class ModelSpecError(ValueError):
    """The model spec string cannot be resolved to a backbone."""


class LayerNameError(ValueError):
    """Configured layer names do not exist on the backbone, or repeat."""


class ProtocolError(ValueError):
    """Bytes on the wire do not parse as a protocol frame."""
