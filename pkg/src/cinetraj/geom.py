"""SE(3)/SO(3) primitives, rotation representations and velocities.

Conventions used throughout the toolkit:

* Poses are world-from-camera: ``p_world = R @ p_camera + t``.
* Right-handed axes with +y up; the camera looks along its body -z axis,
  so a push-in is negative body-frame z linear velocity.
* Velocities are forward differences scaled by fps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate6dError, InvalidRotationError, ShapeError

ROT_TOL = 1e-6
MAX_FRAMES = 300  # model-facing cap; trajectories are cropped before encoding


def _as_rotation(r, tol: float = ROT_TOL) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise InvalidRotationError(f"rotation must be 3x3, got {r.shape}")
    err = np.linalg.norm(r.T @ r - np.eye(3))
    if err > tol:
        raise InvalidRotationError(f"not orthonormal (|R^T R - I|_F = {err:.3g})")
    det = np.linalg.det(r)
    if abs(det - 1.0) > tol:
        raise InvalidRotationError(f"det(R) = {det:.9f}, expected 1")
    return r


@dataclass(frozen=True)
class Se3Pose:
    """Rigid camera pose [R|t], world-from-camera, translation in meters."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = _as_rotation(self.rotation)
        t = np.asarray(self.translation, dtype=float)
        if t.shape != (3,):
            raise ShapeError(f"translation must be a 3-vector, got {t.shape}")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Se3Pose":
        return cls(np.eye(3), np.zeros(3))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


@dataclass(frozen=True)
class Twist:
    """Body-frame rigid velocity: linear in m/s, angular in rad/s."""

    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        lin = np.asarray(self.linear, dtype=float)
        ang = np.asarray(self.angular, dtype=float)
        if lin.shape != (3,) or ang.shape != (3,):
            raise ShapeError("twist parts must be 3-vectors")
        if not (np.isfinite(lin).all() and np.isfinite(ang).all()):
            raise ShapeError("twist entries must be finite")
        lin.setflags(write=False)
        ang.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "angular", ang)


@dataclass
class CameraTrajectory:
    """Timed pose sequence stored as (N,3,3) rotations and (N,3) translations.

    ``mask`` flags valid frames. Lengths above ``MAX_FRAMES`` are legal in
    memory (alignment can produce them); ``clean.crop`` enforces the cap
    before any model sees the data.
    """

    fps: float
    rotations: np.ndarray
    translations: np.ndarray
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.fps <= 0:
            raise ShapeError(f"fps must be positive, got {self.fps}")
        self.rotations = np.asarray(self.rotations, dtype=float)
        self.translations = np.asarray(self.translations, dtype=float)
        if self.rotations.ndim != 3 or self.rotations.shape[1:] != (3, 3):
            raise ShapeError(f"rotations must be (N,3,3), got {self.rotations.shape}")
        n = len(self.rotations)
        if n < 1:
            raise ShapeError("trajectory needs at least one frame")
        if self.translations.shape != (n, 3):
            raise ShapeError("translations must be (N,3) matching rotations")
        if self.mask is None:
            self.mask = np.ones(n, dtype=bool)
        else:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != (n,):
                raise ShapeError("mask length must equal pose count")

    def __len__(self) -> int:
        return len(self.rotations)

    def pose(self, i: int) -> Se3Pose:
        return Se3Pose(self.rotations[i], self.translations[i])

    def poses(self):
        return [self.pose(i) for i in range(len(self))]

    def slice(self, start: int, stop: int) -> "CameraTrajectory":
        return CameraTrajectory(
            self.fps,
            self.rotations[start:stop].copy(),
            self.translations[start:stop].copy(),
            self.mask[start:stop].copy(),
        )

    @classmethod
    def from_poses(cls, fps: float, poses, mask=None) -> "CameraTrajectory":
        rot = np.stack([p.rotation for p in poses])
        tr = np.stack([p.translation for p in poses])
        return cls(fps, rot, tr, mask)


@dataclass
class CharacterTrajectory:
    """Per-frame hip-center positions, with optional mesh vertices."""

    fps: float
    hips: np.ndarray
    vertices: np.ndarray | None = None  # (N, V, 3) when present

    def __post_init__(self):
        if self.fps <= 0:
            raise ShapeError(f"fps must be positive, got {self.fps}")
        self.hips = np.asarray(self.hips, dtype=float)
        if self.hips.ndim != 2 or self.hips.shape[1] != 3:
            raise ShapeError(f"hips must be (N,3), got {self.hips.shape}")
        if self.vertices is not None:
            self.vertices = np.asarray(self.vertices, dtype=float)
            if self.vertices.ndim != 3 or self.vertices.shape[2] != 3:
                raise ShapeError("vertices must be (N,V,3)")
            if len(self.vertices) != len(self.hips):
                raise ShapeError("vertices length must match hips")

    def __len__(self) -> int:
        return len(self.hips)

    def slice(self, start: int, stop: int) -> "CharacterTrajectory":
        verts = None if self.vertices is None else self.vertices[start:stop].copy()
        return CharacterTrajectory(self.fps, self.hips[start:stop].copy(), verts)


# -- rotation representations -------------------------------------------------


def rot_to_6d(r) -> np.ndarray:
    """First two columns of a rotation matrix, column-major 6-vector."""
    r = _as_rotation(r)
    return np.concatenate([r[:, 0], r[:, 1]])


def rot_from_6d(d) -> np.ndarray:
    """Rebuild a rotation from 6D: normalize col 1, Gram-Schmidt col 2, cross."""
    d = np.asarray(d, dtype=float)
    if d.shape != (6,):
        raise Degenerate6dError(f"6d vector must have shape (6,), got {d.shape}")
    a, b = d[:3], d[3:]
    na = np.linalg.norm(a)
    if na <= 1e-9:
        raise Degenerate6dError("first column is numerically zero")
    x = a / na
    b_perp = b - np.dot(x, b) * x
    nb = np.linalg.norm(b_perp)
    if nb <= 1e-9:
        raise Degenerate6dError("columns are numerically parallel")
    y = b_perp / nb
    z = np.cross(x, y)
    return np.stack([x, y, z], axis=1)


# -- group operations ----------------------------------------------------------


def se3_compose(a: Se3Pose, b: Se3Pose) -> Se3Pose:
    return Se3Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def se3_inverse(a: Se3Pose) -> Se3Pose:
    rt = a.rotation.T
    return Se3Pose(rt, -rt @ a.translation)


def adjoint(a: Se3Pose) -> np.ndarray:
    """6x6 adjoint [[R, [t]x R], [0, R]] acting on (linear, angular) twists."""
    ad = np.zeros((6, 6))
    ad[:3, :3] = a.rotation
    ad[3:, 3:] = a.rotation
    ad[:3, 3:] = _skew(a.translation) @ a.rotation
    return ad


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def so3_log(r) -> np.ndarray:
    """Rotation-vector logarithm with series and near-pi branches."""
    r = np.asarray(r, dtype=float)
    cos_theta = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    theta = math.acos(cos_theta)
    skew_vee = 0.5 * np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if theta < 1e-6:
        # sin(theta)/theta ~ 1 - theta^2/6; invert as a series
        return skew_vee * (1.0 + theta * theta / 6.0)
    if theta > math.pi - 1e-9:
        # near pi the antisymmetric part vanishes; recover the axis from the
        # symmetric part (R + I)/2 = u u^T (exact at pi)
        b = (r + np.eye(3)) / 2.0
        i = int(np.argmax(np.diag(b)))
        u = b[:, i] / math.sqrt(max(b[i, i], 1e-18))
        u = u / np.linalg.norm(u)
        # orient consistently with the (tiny) antisymmetric remainder, else
        # canonicalize the sign of the first nonzero component
        if np.dot(u, skew_vee) < 0:
            u = -u
        elif np.dot(u, skew_vee) == 0.0:
            for c in u:
                if c != 0.0:
                    if c < 0:
                        u = -u
                    break
        return theta * u
    return skew_vee * (theta / math.sin(theta))


def so3_exp(omega) -> np.ndarray:
    """Rodrigues formula; series below 1e-6 rad."""
    omega = np.asarray(omega, dtype=float)
    theta = np.linalg.norm(omega)
    k = _skew(omega)
    if theta < 1e-6:
        return np.eye(3) + k + 0.5 * (k @ k)
    a = math.sin(theta) / theta
    b = (1.0 - math.cos(theta)) / (theta * theta)
    return np.eye(3) + a * k + b * (k @ k)


def se3_log(pose: Se3Pose) -> tuple[np.ndarray, np.ndarray]:
    """SE(3) logarithm: returns (rho, omega) with t = V(omega) @ rho."""
    omega = so3_log(pose.rotation)
    theta = np.linalg.norm(omega)
    k = _skew(omega)
    if theta < 1e-6:
        c2 = 1.0 / 12.0 + theta * theta / 720.0
    else:
        # stable through theta = pi: 1/(2 theta tan(theta/2)) -> 0 there
        c2 = 1.0 / (theta * theta) - 1.0 / (2.0 * theta * math.tan(theta / 2.0))
    v_inv = np.eye(3) - 0.5 * k + c2 * (k @ k)
    rho = v_inv @ pose.translation
    return rho, omega


def body_velocity(traj: CameraTrajectory) -> list[Twist]:
    """Per-step body twists: fps-scaled SE(3) log of pose_i^-1 pose_{i+1}.

    Returns N-1 twists; the linear part lives in the camera body frame, so
    depth motion maps to the optical (-z) axis regardless of heading.
    """
    n = len(traj)
    if n < 2:
        raise ShapeError("body velocity needs at least two frames")
    out = []
    for i in range(n - 1):
        rel = se3_compose(se3_inverse(traj.pose(i)), traj.pose(i + 1))
        rho, omega = se3_log(rel)
        out.append(Twist(rho * traj.fps, omega * traj.fps))
    return out


def linear_velocity(points, fps: float) -> list[np.ndarray]:
    """Forward differences scaled by fps; N-1 vectors for N points."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise ShapeError("linear velocity needs at least two points")
    return list(np.diff(pts, axis=0) * fps)
