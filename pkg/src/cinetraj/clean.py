"""Outlier rejection, partitioning, Kalman smoothing and cropping.

Frames whose body-frame speed exceeds a percentile-based threshold are
outliers; the trajectory is split into outlier-free runs, each run is
smoothed by a per-axis constant-velocity Kalman filter with an RTS backward
pass, and finally cropped to the 300-frame cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import ConfigError, ShapeError
from .geom import CameraTrajectory, CharacterTrajectory, body_velocity


@dataclass(frozen=True)
class CleanConfig:
    percentile: float = 95.0
    scale_factor: float = 1.5
    min_subtraj_len: int = 25
    max_len: int = 300
    kalman_process_var: float = 1e-2
    kalman_obs_var: float = 1e-3

    def __post_init__(self):
        if not 0 < self.percentile <= 100:
            raise ConfigError(f"percentile must be in (0,100], got {self.percentile}")
        for name in ("scale_factor", "min_subtraj_len", "max_len",
                     "kalman_process_var", "kalman_obs_var"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")


def velocity_outlier_mask(traj: CameraTrajectory, cfg: CleanConfig = CleanConfig()) -> np.ndarray:
    """True where a frame's incoming speed exceeds the percentile threshold.

    Threshold is percentile(speeds) * scale_factor over the whole
    trajectory; the comparison is strict, so an all-static trajectory
    (threshold 0) flags nothing. Frame 0 is never an outlier.
    """
    if len(traj) < 2:
        raise ShapeError("outlier mask needs at least two frames")
    speeds = np.array([np.linalg.norm(tw.linear) for tw in body_velocity(traj)])
    thresh = np.percentile(speeds, cfg.percentile) * cfg.scale_factor
    mask = np.zeros(len(traj), dtype=bool)
    mask[1:] = speeds > thresh
    return mask


def partition_subtrajectories(
    traj: CameraTrajectory, mask, cfg: CleanConfig = CleanConfig()
) -> list[CameraTrajectory]:
    """Maximal outlier-free runs of at least min_subtraj_len frames."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (len(traj),):
        raise ShapeError("outlier mask length must match trajectory")
    out = []
    for start, stop in _clean_runs(mask):
        if stop - start >= cfg.min_subtraj_len:
            out.append(traj.slice(start, stop))
    return out


def _clean_runs(outlier: np.ndarray) -> list[tuple[int, int]]:
    runs, start = [], None
    for i, bad in enumerate(outlier):
        if not bad and start is None:
            start = i
        elif bad and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(outlier)))
    return runs


def _kalman_rts_1d(z: np.ndarray, dt: float, q: float, r: float) -> np.ndarray:
    """Constant-velocity Kalman filter + RTS smoother for one coordinate."""
    n = len(z)
    f = np.array([[1.0, dt], [0.0, 1.0]])
    qm = q * np.array([[dt ** 4 / 4, dt ** 3 / 2], [dt ** 3 / 2, dt ** 2]])
    h = np.array([1.0, 0.0])

    xs = np.zeros((n, 2))
    ps = np.zeros((n, 2, 2))
    x = np.array([z[0], (z[1] - z[0]) / dt])
    p = np.diag([r, 2.0 * r / dt ** 2])
    xs[0], ps[0] = x, p
    for k in range(1, n):
        x = f @ x
        p = f @ p @ f.T + qm
        innov = z[k] - h @ x
        s_cov = p[0, 0] + r
        gain = p @ h / s_cov
        x = x + gain * innov
        p = p - np.outer(gain, h @ p)
        xs[k], ps[k] = x, p

    for k in range(n - 2, -1, -1):
        p_pred = f @ ps[k] @ f.T + qm
        c = ps[k] @ f.T @ np.linalg.inv(p_pred)
        xs[k] = xs[k] + c @ (xs[k + 1] - f @ xs[k])
        ps[k] = ps[k] + c @ (ps[k + 1] - p_pred) @ c.T
    return xs[:, 0]


def _smooth_positions(pts: np.ndarray, fps: float, cfg: CleanConfig) -> np.ndarray:
    dt = 1.0 / fps
    out = np.empty_like(pts)
    for axis in range(3):
        out[:, axis] = _kalman_rts_1d(
            pts[:, axis], dt, cfg.kalman_process_var, cfg.kalman_obs_var
        )
    return out


def _smooth_rotations(rotations: np.ndarray, window: int = 5) -> np.ndarray:
    """Windowed chordal mean of rotations (quaternion eigen average)."""
    n = len(rotations)
    quats = Rotation.from_matrix(rotations).as_quat()
    # hemisphere-align consecutive quaternions so averaging is well posed
    for i in range(1, n):
        if np.dot(quats[i], quats[i - 1]) < 0:
            quats[i] = -quats[i]
    half = window // 2
    out = np.empty_like(rotations)
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        out[i] = Rotation.from_quat(quats[lo:hi]).mean().as_matrix()
    return out


def kalman_smooth(traj, cfg: CleanConfig = CleanConfig()):
    """Smooth camera translations or character hips; same type out.

    Camera rotations get a window-5 spherical moving average since the
    Kalman model is translational. Length and fps are preserved.
    """
    if cfg.kalman_process_var <= 0 or cfg.kalman_obs_var <= 0:
        raise ConfigError("Kalman variances must be positive")
    if len(traj) < 2:
        raise ShapeError("smoothing needs at least two frames")
    if isinstance(traj, CameraTrajectory):
        return CameraTrajectory(
            traj.fps,
            _smooth_rotations(traj.rotations),
            _smooth_positions(traj.translations, traj.fps, cfg),
            traj.mask.copy(),
        )
    if isinstance(traj, CharacterTrajectory):
        return CharacterTrajectory(
            traj.fps,
            _smooth_positions(traj.hips, traj.fps, cfg),
            None if traj.vertices is None else traj.vertices.copy(),
        )
    raise ShapeError(f"cannot smooth {type(traj).__name__}")


def crop(traj, max_len: int = 300):
    """First min(N, max_len) frames; no-op when already within the cap."""
    if len(traj) <= max_len:
        return traj
    return traj.slice(0, max_len)


def clean_shot(
    camera: CameraTrajectory,
    character: CharacterTrajectory | None = None,
    cfg: CleanConfig = CleanConfig(),
) -> list[tuple[CameraTrajectory, CharacterTrajectory | None]]:
    """Full pass: outlier mask, partition, smooth, crop; camera+character kept in sync."""
    if character is not None and len(character) != len(camera):
        raise ShapeError("camera and character lengths differ")
    mask = velocity_outlier_mask(camera, cfg)
    out = []
    for start, stop in _clean_runs(mask):
        if stop - start < cfg.min_subtraj_len:
            continue
        cam = crop(kalman_smooth(camera.slice(start, stop), cfg), cfg.max_len)
        char = None
        if character is not None:
            char = crop(kalman_smooth(character.slice(start, stop), cfg), cfg.max_len)
        out.append((cam, char))
    return out
