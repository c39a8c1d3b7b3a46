"""Exception types shared across the toolkit."""


class CinetrajError(Exception):
    """Base class for all toolkit errors."""


class InvalidRotationError(CinetrajError, ValueError):
    """Matrix is not a proper rotation within tolerance."""


class Degenerate6dError(CinetrajError, ValueError):
    """6D rotation vector has a near-zero or near-parallel column pair."""


class DegenerateOverlapError(CinetrajError, ValueError):
    """Overlap frames do not identify the scale/bias alignment."""


class NegativeScaleError(CinetrajError, ValueError):
    """Least-squares alignment produced a non-positive scale."""


class ConfigError(CinetrajError, ValueError):
    """Invalid configuration value."""


class ShapeError(CinetrajError, ValueError):
    """Inconsistent array lengths or dimensions."""


class MalformedSegmentsError(CinetrajError, ValueError):
    """Segment list does not cover the frame range contiguously."""


class NoCharacterError(CinetrajError, ValueError):
    """No character track to select from."""


class TransportError(CinetrajError, RuntimeError):
    """External captioning endpoint failed (network, status, schema)."""


class SamplerDivergedError(CinetrajError, RuntimeError):
    """Non-finite value during diffusion sampling; carries the step index."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite sample at step {step}")


class TrainingDivergedError(CinetrajError, RuntimeError):
    """NaN loss during training; carries the step and last noise level."""

    def __init__(self, step: int, sigma: float | None = None, detail: str = ""):
        self.step = step
        self.sigma = sigma
        msg = f"NaN loss at step {step}"
        if sigma is not None:
            msg += f" (sigma={sigma:.6g})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MalformedEtjError(CinetrajError, ValueError):
    """ETJ document violates the format contract."""


class ManifestError(CinetrajError, ValueError):
    """Manifest is malformed or references missing files."""


class CheckpointError(CinetrajError, ValueError):
    """Checkpoint container is malformed or incompatible."""


class VocabMismatchError(CheckpointError):
    """Checkpoint was trained with a different caption vocabulary."""


class SynthSpecError(CinetrajError, ValueError):
    """Synthetic generator spec is inconsistent."""
