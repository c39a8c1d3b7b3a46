"""Synthetic trajectory/caption generator used for training and oracles.

Cameras translate along their own body axes at a constant total speed with
a fixed orientation, so the intended axis states are exact ground truth.
Characters move independently along the screen-aligned reference frame.
The canonical speed default of 1.67 m/s matches 20 m over 300 frames at
25 fps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .caption import Caption, rule_based_caption
from .errors import SynthSpecError
from .etj import EtjData, save_etj, save_manifest
from .geom import CameraTrajectory, CharacterTrajectory
from .tagging import AxisState, TagSegment, label_for_state, reference_frame

SINGLE_AXIS_MOTIONS: tuple[AxisState, ...] = (
    AxisState(-1, 0, 0), AxisState(1, 0, 0),
    AxisState(0, -1, 0), AxisState(0, 1, 0),
    AxisState(0, 0, -1), AxisState(0, 0, 1),
)


@dataclass
class SynthSpec:
    n_samples: int = 10
    frames: int = 100
    fps: float = 25.0
    speed: float = 1.67
    noise_sigma: float = 0.0
    motion_menu: tuple[AxisState, ...] = field(default_factory=lambda: SINGLE_AXIS_MOTIONS)
    seed: int = 0
    random_orientation: bool = True

    def __post_init__(self):
        if self.n_samples <= 0 or self.frames <= 0:
            raise SynthSpecError("n_samples and frames must be positive")
        if self.frames > 300:
            raise SynthSpecError("frames capped at 300")
        if self.speed <= 0 or self.fps <= 0:
            raise SynthSpecError("speed and fps must be positive")
        if self.noise_sigma < 0:
            raise SynthSpecError("noise_sigma must be nonnegative")
        self.motion_menu = tuple(AxisState(*m) for m in self.motion_menu)
        if not self.motion_menu:
            raise SynthSpecError("motion_menu must be non-empty")

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        if "motion_menu" in doc:
            doc["motion_menu"] = tuple(AxisState(*m) for m in doc["motion_menu"])
        return cls(**doc)


def _rotation_yaw_pitch_roll(yaw: float, pitch: float, roll: float) -> np.ndarray:
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
    rx = np.array([[1, 0, 0], [0, cp, -sp], [0, sp, cp]])
    rz = np.array([[cr, -sr, 0], [sr, cr, 0], [0, 0, 1]])
    return ry @ rx @ rz


def _draw_orientation(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    if not spec.random_orientation:
        return np.eye(3)
    # limited tilt keeps the screen-aligned reference frame well defined
    yaw = rng.uniform(0.0, 2.0 * np.pi)
    pitch = rng.uniform(-0.3, 0.3)
    roll = rng.uniform(-0.2, 0.2)
    return _rotation_yaw_pitch_roll(yaw, pitch, roll)


def _direction(tag: AxisState) -> np.ndarray | None:
    d = np.array(tag, dtype=float)
    n = np.linalg.norm(d)
    return None if n == 0 else d / n


def _piecewise_positions(
    segments: list[tuple[AxisState, int]],
    velocity_of,  # AxisState -> world velocity (3,) or None for static
    start: np.ndarray,
    fps: float,
) -> np.ndarray:
    n = sum(d for _, d in segments)
    pos = np.empty((n, 3))
    pos[0] = start
    frame_tag = []
    for tag, dur in segments:
        frame_tag.extend([tag] * dur)
    for i in range(n - 1):
        v = velocity_of(frame_tag[i])
        step = np.zeros(3) if v is None else v / fps
        pos[i + 1] = pos[i] + step
    return pos


def gen_mixed(
    tag_sequence: list[tuple[AxisState, int]],
    spec: SynthSpec,
    rng: np.random.Generator | None = None,
) -> tuple[CameraTrajectory, CharacterTrajectory, Caption, dict[str, list[TagSegment]]]:
    """Piecewise-pure trajectory; positions are continuous at boundaries."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    durations = [d for _, d in tag_sequence]
    if not tag_sequence or any(d <= 0 for d in durations):
        raise SynthSpecError("tag durations must be positive")
    if sum(durations) != spec.frames:
        raise SynthSpecError(
            f"durations sum to {sum(durations)}, spec.frames is {spec.frames}"
        )

    rot = _draw_orientation(spec, rng)

    def cam_velocity(tag: AxisState):
        d = _direction(tag)
        return None if d is None else rot @ d * spec.speed

    cam_pos = _piecewise_positions(tag_sequence, cam_velocity, rng.uniform(-1, 1, 3), spec.fps)

    frame_ref = reference_frame(rot)
    char_tags = [
        (spec.motion_menu[int(rng.integers(len(spec.motion_menu)))], d) for d in durations
    ]

    def char_velocity(tag: AxisState):
        d = _direction(tag)
        return None if d is None else frame_ref @ d * spec.speed

    hips = _piecewise_positions(char_tags, char_velocity, rng.uniform(-2, 2, 3), spec.fps)

    if spec.noise_sigma > 0:
        cam_pos = cam_pos + rng.normal(0.0, spec.noise_sigma, cam_pos.shape)
        hips = hips + rng.normal(0.0, spec.noise_sigma, hips.shape)

    camera = CameraTrajectory(spec.fps, np.repeat(rot[None], spec.frames, axis=0), cam_pos)
    character = CharacterTrajectory(spec.fps, hips)

    def segments(seq, vocab):
        out, start = [], 0
        for tag, dur in seq:
            out.append(TagSegment(start, start + dur - 1, label_for_state(tag, vocab)))
            start += dur
        merged = [out[0]]
        for seg in out[1:]:
            if seg.label == merged[-1].label:
                merged[-1] = TagSegment(merged[-1].start, seg.end, seg.label)
            else:
                merged.append(seg)
        return merged

    tags = {
        "camera": segments(tag_sequence, "camera"),
        "character": segments(char_tags, "character"),
    }
    caption = rule_based_caption(tags["camera"], tags["character"])
    return camera, character, caption, tags


def gen_pure(
    tag: AxisState, spec: SynthSpec, rng: np.random.Generator | None = None
) -> tuple[CameraTrajectory, CharacterTrajectory, Caption, dict[str, list[TagSegment]]]:
    """Single-motion trajectory at constant total speed, orientation fixed."""
    return gen_mixed([(AxisState(*tag), spec.frames)], spec, rng)


def gen_dataset(spec: SynthSpec, out_dir) -> Path:
    """Write one ETJ per sample plus a manifest; byte-deterministic per seed.

    The motion menu is cycled, so label counts differ by at most one.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    entries = []
    for i in range(spec.n_samples):
        tag = spec.motion_menu[i % len(spec.motion_menu)]
        camera, character, caption, tags = gen_pure(tag, spec, rng)
        name = f"sample_{i:04d}.etj"
        save_etj(
            out_dir / name,
            EtjData(camera, character, caption.text, caption.kind, tags),
        )
        entries.append({"path": name, "split": "train"})
    manifest = out_dir / "manifest.json"
    save_manifest(manifest, entries)
    return manifest
