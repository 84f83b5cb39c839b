"""Discretized assembly space: positions in a workspace box times orientations.

Orientation frames take their z axis from the vertices of a Platonic solid
or an icosphere and spin x/y about it in equal roll steps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geom import GRAVITY_DIR, Pose, angle_deg, frame_from_z, normalize
from .geom.mesh import icosahedron, subdivide_sphere


class OrientationBasis(enum.Enum):
    TETRAHEDRON = "tetra"
    HEXAHEDRON = "hexa"
    OCTAHEDRON = "octa"
    ICOSAHEDRON = "icosa"
    ICOSPHERE_LV1 = "lv1"
    ICOSPHERE_LV2 = "lv2"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if key in (member.value, member.name.lower()):
                return member
        raise InvalidArgumentError(f"unknown orientation basis {value!r}")


BASIS_ORDER = list(OrientationBasis)


def polyhedron_vertices(basis) -> np.ndarray:
    """Unit vertex directions of the chosen solid, shape (n, 3)."""
    basis = OrientationBasis.parse(basis)
    if basis is OrientationBasis.TETRAHEDRON:
        v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    elif basis is OrientationBasis.HEXAHEDRON:
        v = np.array([[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=float)
    elif basis is OrientationBasis.OCTAHEDRON:
        v = np.vstack([np.eye(3), -np.eye(3)])
    else:
        v, f = icosahedron()
        levels = {OrientationBasis.ICOSAHEDRON: 0, OrientationBasis.ICOSPHERE_LV1: 1,
                  OrientationBasis.ICOSPHERE_LV2: 2}[basis]
        for _ in range(levels):
            v, f = subdivide_sphere(v, f)
    return v / np.linalg.norm(v, axis=1)[:, None]


def sample_orientations(basis, rolls_per_vertex=6):
    """Rotation matrices, vertex-major and roll-minor.

    For each vertex v the frame's z column is v; the reference x is world-x
    projected onto the plane orthogonal to v (world-y if that vanishes),
    then rolled by 360/rolls degrees per step about v.
    """
    if rolls_per_vertex < 1:
        raise InvalidArgumentError("rolls_per_vertex must be >= 1")
    out = []
    for v in polyhedron_vertices(basis):
        base = frame_from_z(v)
        for k in range(rolls_per_vertex):
            a = 2.0 * math.pi * k / rolls_per_vertex
            c, s = math.cos(a), math.sin(a)
            x = c * base[:, 0] + s * base[:, 1]
            y = np.cross(base[:, 2], x)
            out.append(np.column_stack([x, y, base[:, 2]]))
    return out


@dataclass(frozen=True)
class AssemblyRegion:
    lo: tuple
    hi: tuple
    table_z: float = 0.0

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,) or not np.all(lo < hi):
            raise InvalidArgumentError("assembly region needs min < max componentwise")

    @property
    def center(self):
        return (np.asarray(self.lo, dtype=float) + np.asarray(self.hi, dtype=float)) / 2.0

    def contains(self, p) -> bool:
        p = np.asarray(p)
        return bool(np.all(p >= np.asarray(self.lo)) and np.all(p <= np.asarray(self.hi)))


def sample_positions(region: AssemblyRegion, n: int, seed: int = 0):
    """``n`` positions in the region: the centre, then uniform draws.

    Draws are sequential from one generator, so a longer list always
    extends a shorter one with the same seed.
    """
    if n < 1:
        raise InvalidArgumentError("need at least one assembly position")
    rng = np.random.default_rng(seed)
    lo = np.asarray(region.lo, dtype=float)
    hi = np.asarray(region.hi, dtype=float)
    out = [region.center]
    for _ in range(n - 1):
        out.append(lo + rng.random(3) * (hi - lo))
    return out


@dataclass(frozen=True, eq=False)
class AssemblyPose:
    position: np.ndarray
    rotation: np.ndarray
    position_index: int = 0
    vertex_index: int = 0
    roll_index: int = 0

    @property
    def key(self):
        return (self.position_index, self.vertex_index, self.roll_index)

    def pose(self):
        return Pose(self.position, self.rotation)


def assembly_poses(positions, basis, rolls_per_vertex=6):
    """Cartesian product in (position, vertex, roll) order."""
    rots = sample_orientations(basis, rolls_per_vertex)
    out = []
    for pi, p in enumerate(positions):
        for k, r in enumerate(rots):
            out.append(AssemblyPose(np.asarray(p, dtype=float), r, pi,
                                    k // rolls_per_vertex, k % rolls_per_vertex))
    return out


def directions_clear_of_gravity(rotation, directions, thresholds) -> bool:
    """Every rotated direction makes an angle with gravity strictly above its threshold."""
    if len(directions) == 0:
        return True
    # gravity is -z, so |v x g| = hypot(vx, vy) and v . g = -vz; same atan2 form as angle_deg
    v = np.asarray(directions, dtype=float) @ np.asarray(rotation, dtype=float).T
    ang = np.degrees(np.arctan2(np.hypot(v[:, 0], v[:, 1]), -v[:, 2]))
    return bool(np.all(ang > np.asarray(thresholds, dtype=float)))


def gravity_prefilter(poses, assembly_dirs, threshold_deg):
    """Keep poses whose rotated assembly direction(s) clear gravity by more than the threshold.

    ``assembly_dirs`` is one direction or a list of them (expressed in the
    mate frame); ``threshold_deg`` is a scalar or one value per direction.
    """
    dirs = np.atleast_2d(np.asarray(assembly_dirs, dtype=float))
    dirs = np.array([normalize(d) for d in dirs])
    th = np.broadcast_to(np.asarray(threshold_deg, dtype=float), (len(dirs),))
    if np.any(th < 0.0) or np.any(th > 180.0):
        raise InvalidArgumentError("threshold must lie in [0, 180] degrees")
    return [p for p in poses if directions_clear_of_gravity(p.rotation, dirs, th)]


def tilt_from_up_deg(rotation, direction) -> float:
    """Angle between a rotated direction and world up."""
    return angle_deg(rotation @ np.asarray(direction, dtype=float), -GRAVITY_DIR)

