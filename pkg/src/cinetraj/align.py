"""Merge per-chunk pose estimates into one consistent trajectory.

Independently estimated 100-frame chunks differ by an unknown positive
scale and translation bias (rotations are already consistent). Overlapping
frames between consecutive chunks identify both via least squares:
``t_ref = s * t_next + b``. Per-boundary estimates are composed left to
right so every chunk lands in chunk 0's frame; character points are shifted
by the per-frame compensation offset ``R^T (t - (s t + b))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOverlapError, NegativeScaleError, ShapeError
from .geom import CameraTrajectory, CharacterTrajectory, Se3Pose

MAX_CHUNK_FRAMES = 100
DEFAULT_OVERLAP = 10


@dataclass(frozen=True)
class ScaleBias:
    """Scale and translation bias mapping a later chunk into an earlier one."""

    s: float
    b: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        if b.shape != (3,):
            raise ShapeError("bias must be a 3-vector")
        if self.s <= 0:
            raise NegativeScaleError(f"scale must be positive, got {self.s}")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @classmethod
    def identity(cls) -> "ScaleBias":
        return cls(1.0, np.zeros(3))

    def apply(self, t) -> np.ndarray:
        return self.s * np.asarray(t, dtype=float) + self.b

    def compose(self, inner: "ScaleBias") -> "ScaleBias":
        """self o inner: t -> self(inner(t))."""
        return ScaleBias(self.s * inner.s, self.s * inner.b + self.b)


@dataclass
class Chunk:
    """One raw chunk plus the frame count it shares with the next chunk."""

    cameras: CameraTrajectory
    character: CharacterTrajectory
    overlap_len: int = DEFAULT_OVERLAP

    def __post_init__(self):
        if len(self.cameras) > MAX_CHUNK_FRAMES:
            raise ShapeError(
                f"chunk has {len(self.cameras)} frames, cap is {MAX_CHUNK_FRAMES}"
            )
        if len(self.character) != len(self.cameras):
            raise ShapeError("character and camera chunk lengths differ")


def estimate_scale_bias(t_ref, t_next) -> tuple[ScaleBias, float]:
    """Least-squares (s, b) minimizing sum |t_ref - (s t_next + b)|^2.

    Returns the estimate and the residual RMS. Raises
    DegenerateOverlapError when the normal equations are rank deficient
    (condition number above 1e12, e.g. all t_next identical) and
    NegativeScaleError when the optimum has s <= 0.
    """
    t_ref = np.asarray(t_ref, dtype=float)
    t_next = np.asarray(t_next, dtype=float)
    if t_ref.shape != t_next.shape or t_ref.ndim != 2 or t_ref.shape[1] != 3:
        raise ShapeError("overlap translations must be matching (n,3) arrays")
    n = len(t_ref)
    if n < 2:
        raise DegenerateOverlapError("need at least 2 overlap frames for 4 unknowns")

    a = np.zeros((3 * n, 4))
    a[:, 0] = t_next.reshape(-1)
    a[:, 1:] = np.tile(np.eye(3), (n, 1))
    y = t_ref.reshape(-1)

    normal = a.T @ a
    eigvals = np.linalg.eigvalsh(normal)
    if eigvals[0] <= 0 or eigvals[-1] / eigvals[0] > 1e12:
        raise DegenerateOverlapError(
            "overlap translations do not identify scale (rank-deficient system)"
        )
    sol = np.linalg.solve(normal, a.T @ y)
    s, b = float(sol[0]), sol[1:]
    if s <= 0:
        raise NegativeScaleError(f"recovered scale {s:.6g} <= 0; corrupted chunks?")
    rms = float(np.sqrt(np.mean((a @ sol - y) ** 2)))
    return ScaleBias(s, b), rms


def alignment_transform(sb: ScaleBias, pose_next: Se3Pose) -> np.ndarray:
    """Translation of the compensation transform for one frame.

    The aligned pose [R | s t + b] composed with [I | delta] reproduces
    [R | t]; delta = R^T (t - (s t + b)).
    """
    t = pose_next.translation
    return pose_next.rotation.T @ (t - sb.apply(t))


def align_vertices(v_next, sb: ScaleBias, pose_next: Se3Pose) -> np.ndarray:
    """Shift all vertices of one frame by that frame's compensation offset."""
    v = np.asarray(v_next, dtype=float)
    return v + alignment_transform(sb, pose_next)


def _apply_to_chunk(chunk: Chunk, sb: ScaleBias):
    """Map one chunk's cameras and character through a composed ScaleBias."""
    cams = chunk.cameras
    new_t = sb.s * cams.translations + sb.b
    offsets = np.einsum(
        "nij,nj->ni", cams.rotations.transpose(0, 2, 1), cams.translations - new_t
    )
    hips = chunk.character.hips + offsets
    verts = None
    if chunk.character.vertices is not None:
        verts = chunk.character.vertices + offsets[:, None, :]
    camera = CameraTrajectory(cams.fps, cams.rotations.copy(), new_t, cams.mask.copy())
    character = CharacterTrajectory(chunk.character.fps, hips, verts)
    return camera, character


def align_chunks(chunks: list[Chunk]) -> tuple[CameraTrajectory, CharacterTrajectory]:
    """Cascade all chunks into chunk 0's frame and merge overlaps.

    Boundary transforms are estimated pairwise on the shared frames (the
    last ``overlap_len`` frames of chunk k equal the first of chunk k+1),
    then composed left to right. Overlapping frames keep the earlier
    chunk's values. Rotations pass through untouched.
    """
    if not chunks:
        raise ShapeError("need at least one chunk")
    fps = chunks[0].cameras.fps
    for c in chunks[1:]:
        if c.cameras.fps != fps:
            raise ShapeError("chunks disagree on fps")

    boundary: list[ScaleBias] = []
    for k in range(len(chunks) - 1):
        o = chunks[k].overlap_len
        if o < 2:
            raise DegenerateOverlapError(f"boundary {k}: overlap_len {o} < 2")
        if o > len(chunks[k].cameras) or o > len(chunks[k + 1].cameras):
            raise ShapeError(f"boundary {k}: overlap longer than a chunk")
        t_ref = chunks[k].cameras.translations[-o:]
        t_next = chunks[k + 1].cameras.translations[:o]
        try:
            sb, _ = estimate_scale_bias(t_ref, t_next)
        except (DegenerateOverlapError, NegativeScaleError) as err:
            raise type(err)(f"boundary {k} (chunks {k},{k + 1}): {err}") from err
        boundary.append(sb)

    rot_parts, tr_parts, mask_parts, hip_parts = [], [], [], []
    vert_parts: list[np.ndarray] | None = (
        [] if all(c.character.vertices is not None for c in chunks) else None
    )
    cascade = ScaleBias.identity()
    for k, chunk in enumerate(chunks):
        if k > 0:
            cascade = cascade.compose(boundary[k - 1])
        cam, char = _apply_to_chunk(chunk, cascade)
        skip = chunks[k - 1].overlap_len if k > 0 else 0
        rot_parts.append(cam.rotations[skip:])
        tr_parts.append(cam.translations[skip:])
        mask_parts.append(cam.mask[skip:])
        hip_parts.append(char.hips[skip:])
        if vert_parts is not None:
            vert_parts.append(char.vertices[skip:])

    camera = CameraTrajectory(
        fps,
        np.concatenate(rot_parts),
        np.concatenate(tr_parts),
        np.concatenate(mask_parts),
    )
    character = CharacterTrajectory(
        fps,
        np.concatenate(hip_parts),
        np.concatenate(vert_parts) if vert_parts is not None else None,
    )
    return camera, character
