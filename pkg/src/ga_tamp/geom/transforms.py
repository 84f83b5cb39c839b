"""Vectors, rotations and rigid poses.

Rotations are stored as 3x3 orthonormal matrices; quaternions (w, x, y, z)
are only used at serialization boundaries.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidArgumentError

GRAVITY_DIR = np.array([0.0, 0.0, -1.0])
WORLD_UP = np.array([0.0, 0.0, 1.0])


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if not n > 0.0 or not np.isfinite(n):
        raise InvalidArgumentError(f"cannot normalize vector {v!r}")
    return v / n


def angle_deg(u, v) -> float:
    """Angle between two nonzero directions in degrees, in [0, 180].

    Uses atan2(|u x v|, u . v), which stays accurate near 0 and 180 where
    acos of the dot product loses precision.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if not (nu > 0.0 and nv > 0.0):
        raise InvalidArgumentError("angle_deg needs nonzero directions")
    u = u / nu
    v = v / nv
    s = np.linalg.norm(np.cross(u, v))
    c = float(np.dot(u, v))
    return math.degrees(math.atan2(s, c))


def skew(v):
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rot_axis_angle(axis, angle: float):
    """Rodrigues' formula; ``axis`` need not be normalized."""
    k = normalize(axis)
    kx, ky, kz = k
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    return np.array([
        [c + kx * kx * t, kx * ky * t - kz * s, kx * kz * t + ky * s],
        [ky * kx * t + kz * s, c + ky * ky * t, ky * kz * t - kx * s],
        [kz * kx * t - ky * s, kz * ky * t + kx * s, c + kz * kz * t],
    ])


def rot_x(a):
    return rot_axis_angle((1.0, 0.0, 0.0), a)


def rot_y(a):
    return rot_axis_angle((0.0, 1.0, 0.0), a)


def rot_z(a):
    return rot_axis_angle((0.0, 0.0, 1.0), a)


def rpy_to_matrix(roll, pitch, yaw):
    """Fixed-axis XYZ roll/pitch/yaw (URDF convention): R = Rz(yaw) Ry(pitch) Rx(roll)."""
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def rotation_log(r):
    """Rotation vector (axis * angle) of a rotation matrix."""
    r = np.asarray(r, dtype=float)
    cos_t = (np.trace(r) - 1.0) / 2.0
    cos_t = min(1.0, max(-1.0, cos_t))
    theta = math.acos(cos_t)
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    if theta < 1e-7:
        return 0.5 * w
    if math.pi - theta < 1e-5:
        # near pi the antisymmetric part vanishes; read the axis off the diagonal
        b = (r + np.eye(3)) / 2.0
        i = int(np.argmax(np.diag(b)))
        axis = b[:, i] / math.sqrt(max(b[i, i], 1e-300))
        axis = normalize(axis)
        if np.dot(w, axis) < 0.0:
            axis = -axis
        return axis * theta
    return w * (theta / (2.0 * math.sin(theta)))


def rotation_angle(r) -> float:
    """Geodesic angle of a rotation matrix, in radians."""
    cos_t = (r[0, 0] + r[1, 1] + r[2, 2] - 1.0) / 2.0
    sin_t = 0.5 * math.sqrt((r[2, 1] - r[1, 2]) ** 2 + (r[0, 2] - r[2, 0]) ** 2
                            + (r[1, 0] - r[0, 1]) ** 2)
    return math.atan2(sin_t, cos_t)


def quat_to_matrix(q):
    w, x, y, z = normalize(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(r):
    """Unit quaternion (w, x, y, z) with w >= 0."""
    r = np.asarray(r, dtype=float)
    tr = np.trace(r)
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
    q = np.array(q)
    q /= np.linalg.norm(q)
    return q if q[0] >= 0.0 else -q


def orthonormalize(r):
    """Closest rotation matrix (polar decomposition via SVD)."""
    u, _, vt = np.linalg.svd(r)
    m = u @ vt
    if np.linalg.det(m) < 0.0:
        u[:, -1] = -u[:, -1]
        m = u @ vt
    return m


def frame_from_z(z, reference=(1.0, 0.0, 0.0), fallback=(0.0, 1.0, 0.0)):
    """Right-handed frame whose z column is ``z``.

    The x column is the normalized projection of ``reference`` onto the plane
    orthogonal to z, or of ``fallback`` when that projection vanishes.
    """
    z = normalize(z)
    x = None
    for ref in (reference, fallback):
        ref = np.asarray(ref, dtype=float)
        p = ref - np.dot(ref, z) * z
        if np.linalg.norm(p) > 1e-9:
            x = p / np.linalg.norm(p)
            break
    if x is None:
        raise InvalidArgumentError("reference and fallback both parallel to z")
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


class Pose:
    """Rigid transform: ``p_world = rot @ p_local + pos``."""

    __slots__ = ("pos", "rot")

    def __init__(self, pos=None, rot=None):
        self.pos = np.zeros(3) if pos is None else np.array(pos, dtype=float).reshape(3)
        self.rot = np.eye(3) if rot is None else np.array(rot, dtype=float).reshape(3, 3)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_matrix(cls, m):
        m = np.asarray(m, dtype=float)
        return cls(m[:3, 3], m[:3, :3])

    @classmethod
    def from_xyz_rpy(cls, xyz=(0.0, 0.0, 0.0), rpy=(0.0, 0.0, 0.0)):
        return cls(xyz, rpy_to_matrix(*rpy))

    @classmethod
    def from_pos_quat(cls, pos, quat):
        return cls(pos, quat_to_matrix(quat))

    def matrix(self):
        m = np.eye(4)
        m[:3, :3] = self.rot
        m[:3, 3] = self.pos
        return m

    def quat(self):
        return matrix_to_quat(self.rot)

    def __matmul__(self, other):
        if isinstance(other, Pose):
            return Pose(self.rot @ other.pos + self.pos, self.rot @ other.rot)
        return NotImplemented

    def inverse(self):
        rt = self.rot.T
        return Pose(-rt @ self.pos, rt)

    def apply(self, points):
        """Transform a point (3,) or an array of points (N, 3)."""
        points = np.asarray(points, dtype=float)
        return points @ self.rot.T + self.pos

    def translated(self, offset):
        """Same rotation, position shifted by a world-frame offset."""
        return Pose(self.pos + np.asarray(offset, dtype=float), self.rot)

    def is_close(self, other, pos_tol=1e-9, rot_tol=1e-9) -> bool:
        return (np.linalg.norm(self.pos - other.pos) <= pos_tol
                and rotation_angle(self.rot.T @ other.rot) <= rot_tol)

    def to_dict(self):
        return {"position": [float(v) for v in self.pos],
                "quaternion": [float(v) for v in self.quat()]}

    @classmethod
    def from_dict(cls, d):
        if "quaternion" in d:
            return cls.from_pos_quat(d.get("position", (0.0, 0.0, 0.0)), d["quaternion"])
        rpy = d.get("rpy_deg", (0.0, 0.0, 0.0))
        return cls.from_xyz_rpy(d.get("position", (0.0, 0.0, 0.0)), np.radians(rpy))

    def __repr__(self):
        return f"Pose(pos={self.pos.round(6).tolist()}, quat={self.quat().round(6).tolist()})"


def pose_error(current: Pose, target: Pose):
    """(position error in m, orientation error in rad) between two poses."""
    return (float(np.linalg.norm(target.pos - current.pos)),
            rotation_angle(current.rot.T @ target.rot))
