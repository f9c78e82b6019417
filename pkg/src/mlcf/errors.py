"""Exception types shared across the tracker."""


class InvalidArgumentError(ValueError):
    """An argument violates an operation's precondition."""


class NumericConsistencyError(ArithmeticError):
    """A quantity that must be (near-)real carries too much imaginary residue.

    Raised by the inverse transform when the residue exceeds tolerance,
    which almost always means a conjugation convention got flipped upstream.
    """


class DivergenceUndefinedError(ValueError):
    """KL divergence requested against a distribution with a zero where mass exists."""


class FeatureSourceError(RuntimeError):
    """The remote feature service failed (unreachable, protocol violation, error frame)."""


class FrameLoadError(ValueError):
    """Base class for image loading failures."""


class UnsupportedFormatError(FrameLoadError):
    """The file is not a PNG or JPEG."""


class CorruptFileError(FrameLoadError):
    """The file looks like a PNG/JPEG but could not be decoded."""


class SequenceFormatError(ValueError):
    """A sequence directory or annotation file does not match the expected layout."""


class ConfigError(ValueError):
    """A configuration file is malformed or contains unknown keys."""


class TrackingDegenerateError(RuntimeError):
    """Tracking cannot proceed (for example the frame is smaller than the target)."""
