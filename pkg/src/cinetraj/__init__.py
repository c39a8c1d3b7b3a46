"""Camera-trajectory toolkit: alignment, cleaning, tagging, captioning,
trajectory diffusion (DIRECTOR), a contrastive language-trajectory
embedding (CLaTr) and the derived evaluation metrics."""

from .geom import (
    CameraTrajectory,
    CharacterTrajectory,
    Se3Pose,
    Twist,
    body_velocity,
    linear_velocity,
    rot_from_6d,
    rot_to_6d,
    se3_compose,
    se3_inverse,
)
from .align import Chunk, ScaleBias, align_chunks, estimate_scale_bias
from .clean import CleanConfig, crop, kalman_smooth, partition_subtrajectories, velocity_outlier_mask
from .tagging import AxisState, TagConfig, TagSegment, tag_camera, tag_character
from .caption import Caption, Outline, build_llm_prompt, build_outline, rule_based_caption

__version__ = "0.1.0"

__all__ = [
    "CameraTrajectory",
    "CharacterTrajectory",
    "Se3Pose",
    "Twist",
    "body_velocity",
    "linear_velocity",
    "rot_from_6d",
    "rot_to_6d",
    "se3_compose",
    "se3_inverse",
    "Chunk",
    "ScaleBias",
    "align_chunks",
    "estimate_scale_bias",
    "CleanConfig",
    "crop",
    "kalman_smooth",
    "partition_subtrajectories",
    "velocity_outlier_mask",
    "AxisState",
    "TagConfig",
    "TagSegment",
    "tag_camera",
    "tag_character",
    "Caption",
    "Outline",
    "build_llm_prompt",
    "build_outline",
    "rule_based_caption",
    "__version__",
]
