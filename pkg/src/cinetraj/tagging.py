"""Velocity-threshold motion tagging for camera and character trajectories.

Per-frame velocities become axis-state triples in {-1,0,+1}^3 via a
two-stage rule (static threshold, then dominance ratio), are smoothed by a
sliding majority vote, and merged into labeled segments. The camera uses
its body-frame rigid velocity so trucking and depth motion stay distinct;
the character uses plain hip velocity in a reference frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, NoCharacterError, ShapeError
from .geom import CameraTrajectory, CharacterTrajectory, body_velocity, linear_velocity


class AxisState(NamedTuple):
    """Signed motion state per axis; (0,0,0) is static."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class TagConfig:
    static_thresh_lin: float = 0.10  # m/s
    dominance_ratio: float = 0.5
    smooth_window: int = 25
    min_segment_len: int = 25

    def __post_init__(self):
        if self.static_thresh_lin <= 0 or self.smooth_window <= 0 or self.min_segment_len <= 0:
            raise ConfigError("tag thresholds and windows must be positive")
        if not 0 < self.dominance_ratio <= 1:
            raise ConfigError(f"dominance_ratio must be in (0,1], got {self.dominance_ratio}")


@dataclass(frozen=True)
class TagSegment:
    start: int  # inclusive
    end: int  # inclusive
    label: str

    def __post_init__(self):
        if self.start > self.end:
            raise ShapeError(f"segment start {self.start} > end {self.end}")


# axis term tables, ordered (negative sign, positive sign); the camera looks
# along body -z, so negative z is push-in / move forward
_CAMERA_TERMS = (("truck left", "truck right"),
                 ("boom bottom", "boom top"),
                 ("push-in", "pull-out"))
_CHARACTER_TERMS = (("move left", "move right"),
                    ("move down", "move up"),
                    ("move forward", "move backward"))
_VOCABS = {"camera": _CAMERA_TERMS, "character": _CHARACTER_TERMS}


def label_for_state(state: AxisState, vocab: str) -> str:
    terms = _VOCABS[vocab]
    parts = []
    for axis, value in enumerate(state):
        if value < 0:
            parts.append(terms[axis][0])
        elif value > 0:
            parts.append(terms[axis][1])
    return "-".join(parts) if parts else "static"


def state_for_label(label: str, vocab: str) -> AxisState:
    table = {label_for_state(s, vocab): s for s in all_states()}
    if label not in table:
        raise ShapeError(f"unknown {vocab} label: {label!r}")
    return table[label]


def all_states() -> list[AxisState]:
    """All 27 axis-state triples, in lexicographic (-1,0,+1) order."""
    return [AxisState(x, y, z) for x in (-1, 0, 1) for y in (-1, 0, 1) for z in (-1, 0, 1)]


def axis_states(velocities, cfg: TagConfig = TagConfig()) -> list[AxisState]:
    """Two-stage thresholding of per-frame 3D velocities.

    Stage one zeroes axes with |v| <= static_thresh_lin; stage two zeroes
    any surviving axis outmatched by another (magnitude ratio below
    dominance_ratio). Survivors keep their sign.
    """
    v = np.asarray(velocities, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3 or len(v) == 0:
        raise ShapeError("velocities must be a non-empty (N,3) array")
    mag = np.abs(v)
    active = mag > cfg.static_thresh_lin
    max_active = np.where(active, mag, 0.0).max(axis=1, keepdims=True)
    dominant = active & (mag >= cfg.dominance_ratio * max_active)
    states = np.where(dominant, np.sign(v).astype(int), 0)
    return [AxisState(*row) for row in states]


def _full_length_linear(vels: list, n: int) -> np.ndarray:
    """Repeat the last velocity so N-1 step velocities cover N frames."""
    arr = np.asarray(vels, dtype=float)
    return np.vstack([arr, arr[-1:]]) if len(arr) == n - 1 else arr


def camera_frame_tags(traj: CameraTrajectory, cfg: TagConfig = TagConfig()) -> list[AxisState]:
    """Axis states of the body-frame linear velocity, one per frame."""
    if len(traj) < 2:
        raise ShapeError("camera tagging needs at least two frames")
    vels = [tw.linear for tw in body_velocity(traj)]
    return axis_states(_full_length_linear(vels, len(traj)), cfg)


def reference_frame(rotation) -> np.ndarray:
    """Screen-aligned world frame from a camera orientation.

    Columns are the camera's x and z axes projected to the horizontal
    plane (renormalized) plus the world up axis, so 'move right' matches
    the screen direction at shot start.
    """
    r = np.asarray(rotation, dtype=float)
    up = np.array([0.0, 1.0, 0.0])
    x = r[:, 0] - np.dot(r[:, 0], up) * up
    z = r[:, 2] - np.dot(r[:, 2], up) * up
    nx, nz = np.linalg.norm(x), np.linalg.norm(z)
    if nx < 1e-9 or nz < 1e-9:
        raise ShapeError("camera axis is vertical; screen frame undefined")
    return np.stack([x / nx, up, z / nz], axis=1)


def character_frame_tags(
    traj: CharacterTrajectory,
    cfg: TagConfig = TagConfig(),
    ref_rotation=None,
) -> list[AxisState]:
    """Axis states of hip velocity, expressed in a reference frame.

    ``ref_rotation`` is typically the paired camera's frame-0 orientation;
    the default identity keeps world axes.
    """
    if len(traj) < 2:
        raise ShapeError("character tagging needs at least two frames")
    vels = _full_length_linear(linear_velocity(traj.hips, traj.fps), len(traj))
    if ref_rotation is not None:
        frame = reference_frame(ref_rotation)
        vels = vels @ frame  # components along the frame columns
    return axis_states(vels, cfg)


def smooth_tags(states: list[AxisState], cfg: TagConfig = TagConfig()) -> list[AxisState]:
    """Per-axis sliding-window majority vote; ties resolve to 0."""
    if not states:
        raise ShapeError("no states to smooth")
    arr = np.asarray(states, dtype=int)
    window = cfg.smooth_window | 1  # force odd
    half = window // 2
    n = len(arr)
    out = np.zeros_like(arr)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        seg = arr[lo:hi]
        for axis in range(3):
            counts = [(seg[:, axis] == v).sum() for v in (-1, 0, 1)]
            top = max(counts)
            winners = [v for v, c in zip((-1, 0, 1), counts) if c == top]
            out[i, axis] = winners[0] if len(winners) == 1 else 0
    return [AxisState(*row) for row in out]


def segment_tags(
    states: list[AxisState], vocab: str, cfg: TagConfig = TagConfig()
) -> list[TagSegment]:
    """Merge identical runs into labeled segments covering [0, N-1].

    Runs shorter than min_segment_len are absorbed by their longer
    neighbor (left on ties) until only long runs, or a single run,
    remain.
    """
    if vocab not in _VOCABS:
        raise ConfigError(f"vocab must be 'camera' or 'character', got {vocab!r}")
    if not states:
        raise ShapeError("no states to segment")
    runs: list[list] = []  # [start, end, state]
    for i, st in enumerate(states):
        if runs and runs[-1][2] == st:
            runs[-1][1] = i
        else:
            runs.append([i, i, st])

    def run_len(r):
        return r[1] - r[0] + 1

    while len(runs) > 1:
        lengths = [run_len(r) for r in runs]
        shortest = min(lengths)
        if shortest >= cfg.min_segment_len:
            break
        i = lengths.index(shortest)
        if i == 0:
            target = 1
        elif i == len(runs) - 1:
            target = i - 1
        else:
            target = i - 1 if lengths[i - 1] >= lengths[i + 1] else i + 1
        runs[i][2] = runs[target][2]
        # coalesce newly-adjacent equal-state runs
        merged: list[list] = []
        for r in runs:
            if merged and merged[-1][2] == r[2]:
                merged[-1][1] = r[1]
            else:
                merged.append(r)
        runs = merged

    return [TagSegment(r[0], r[1], label_for_state(r[2], vocab)) for r in runs]


def tag_camera(traj: CameraTrajectory, cfg: TagConfig = TagConfig()) -> list[TagSegment]:
    """Full camera pipeline: body velocity, states, smoothing, segments."""
    return segment_tags(smooth_tags(camera_frame_tags(traj, cfg), cfg), "camera", cfg)


def tag_character(
    traj: CharacterTrajectory, cfg: TagConfig = TagConfig(), ref_rotation=None
) -> list[TagSegment]:
    """Full character pipeline in the given reference frame."""
    states = character_frame_tags(traj, cfg, ref_rotation)
    return segment_tags(smooth_tags(states, cfg), "character", cfg)


@dataclass(frozen=True)
class BoxTrack:
    """2D detection track: per-frame presence with box areas in pixels^2."""

    track_id: int
    frames: tuple[int, ...]
    areas: tuple[float, ...]

    def __post_init__(self):
        if len(self.frames) != len(self.areas):
            raise ShapeError("frames and areas must have equal length")


def select_main_character(tracks: list[BoxTrack], frame_area: float, n_frames: int) -> int:
    """Hitchcock-style pick: mean relative box area times temporal presence.

    Returns the track id with the highest score; ties break to the lowest
    id.
    """
    if not tracks:
        raise NoCharacterError("no tracks to select from")
    if frame_area <= 0 or n_frames <= 0:
        raise ConfigError("frame_area and n_frames must be positive")
    best_id, best_score = None, -1.0
    for track in sorted(tracks, key=lambda t: t.track_id):
        if not track.frames:
            score = 0.0
        else:
            score = (float(np.mean(track.areas)) / frame_area) * (len(track.frames) / n_frames)
        if score > best_score:
            best_id, best_score = track.track_id, score
    return best_id
