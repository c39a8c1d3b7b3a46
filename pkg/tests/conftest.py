import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cinetraj.geom import CameraTrajectory, Se3Pose


def random_rotations(n: int, seed: int = 0) -> np.ndarray:
    """Uniform SO(3) samples via scipy, independent of the library's own math."""
    return Rotation.random(n, random_state=np.random.RandomState(seed)).as_matrix()


def random_pose(rng: np.random.Generator) -> Se3Pose:
    rot = Rotation.random(random_state=np.random.RandomState(int(rng.integers(2**31)))).as_matrix()
    return Se3Pose(rot, rng.uniform(-5, 5, 3))


def straight_line_trajectory(n: int, step, fps: float = 25.0,
                             rotation=None) -> CameraTrajectory:
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    pos = np.arange(n)[:, None] * np.asarray(step, dtype=float)[None, :]
    return CameraTrajectory(fps, np.repeat(rot[None], n, axis=0), pos)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
