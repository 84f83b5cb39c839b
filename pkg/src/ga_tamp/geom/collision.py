"""Boolean narrow-phase for convex polytopes (GJK on the Minkowski difference).

Shapes closer than ``CONTACT_TOL`` count as colliding, so touching
geometry is treated conservatively by the planners. The GJK loop is
compiled with numba; everything around it is plain numpy.
"""

from __future__ import annotations

import numba
import numpy as np

from .hull import ConvexShape
from .transforms import Pose

CONTACT_TOL = 1e-6
_MAX_ITER = 128


@numba.njit(cache=True)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@numba.njit(cache=True)
def _support(verts, d0, d1, d2):
    best = 0
    bv = verts[0, 0] * d0 + verts[0, 1] * d1 + verts[0, 2] * d2
    for i in range(1, verts.shape[0]):
        x = verts[i, 0] * d0 + verts[i, 1] * d1 + verts[i, 2] * d2
        if x > bv:
            bv = x
            best = i
    return best


@numba.njit(cache=True)
def _closest_segment(s, out_s, v):
    a = s[0]
    b = s[1]
    ab = b - a
    denom = _dot(ab, ab)
    t = -_dot(a, ab) / denom if denom > 0.0 else 0.0
    if t <= 0.0:
        out_s[0] = a
        v[:] = a
        return 1
    if t >= 1.0:
        out_s[0] = b
        v[:] = b
        return 1
    v[:] = a + t * ab
    out_s[0] = a
    out_s[1] = b
    return 2


@numba.njit(cache=True)
def _closest_triangle(a, b, c, out_s, v):
    # Ericson, Real-Time Collision Detection 5.1.5, query point at the origin
    ab = b - a
    ac = c - a
    d1 = -_dot(ab, a)
    d2 = -_dot(ac, a)
    if d1 <= 0.0 and d2 <= 0.0:
        out_s[0] = a
        v[:] = a
        return 1
    d3 = -_dot(ab, b)
    d4 = -_dot(ac, b)
    if d3 >= 0.0 and d4 <= d3:
        out_s[0] = b
        v[:] = b
        return 1
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        t = d1 / (d1 - d3)
        v[:] = a + t * ab
        out_s[0] = a
        out_s[1] = b
        return 2
    d5 = -_dot(ab, c)
    d6 = -_dot(ac, c)
    if d6 >= 0.0 and d5 <= d6:
        out_s[0] = c
        v[:] = c
        return 1
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        t = d2 / (d2 - d6)
        v[:] = a + t * ac
        out_s[0] = a
        out_s[1] = c
        return 2
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        v[:] = b + t * (c - b)
        out_s[0] = b
        out_s[1] = c
        return 2
    denom = va + vb + vc
    if denom == 0.0:
        # collinear; nearest vertex is a safe, conservative reduction
        best = a
        for p in (b, c):
            if _dot(p, p) < _dot(best, best):
                best = p
        out_s[0] = best
        v[:] = best
        return 1
    w1 = vb / denom
    w2 = vc / denom
    v[:] = a + ab * w1 + ac * w2
    out_s[0] = a
    out_s[1] = b
    out_s[2] = c
    return 3


@numba.njit(cache=True)
def _opposite_sides(a, b, c, d):
    """Origin and d strictly on opposite sides of plane abc."""
    n = np.cross(b - a, c - a)
    so = -_dot(a, n)
    sd = _dot(d - a, n)
    return so * sd < 0.0


@numba.njit(cache=True)
def _closest_tetra(s, out_s, v):
    a = s[0]
    b = s[1]
    c = s[2]
    d = s[3]
    tmp_s = np.empty((4, 3))
    tmp_v = np.empty(3)
    best_n = -1
    best_d = np.inf
    faces = ((0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2), (1, 3, 2, 0))
    for f in faces:
        p = s[f[0]]
        q = s[f[1]]
        r = s[f[2]]
        o = s[f[3]]
        if _opposite_sides(p, q, r, o):
            n = _closest_triangle(p, q, r, tmp_s, tmp_v)
            dd = _dot(tmp_v, tmp_v)
            if dd < best_d:
                best_d = dd
                best_n = n
                v[:] = tmp_v
                for i in range(n):
                    out_s[i] = tmp_s[i]
    if best_n < 0:
        v[:] = 0.0
        out_s[0] = a
        out_s[1] = b
        out_s[2] = c
        out_s[3] = d
        return 4
    return best_n


@numba.njit(cache=True)
def gjk_distance_below(va, vb, tol):
    """True iff conv(va) and conv(vb) come within ``tol`` of each other.

    ``va`` and ``vb`` are world-space vertex arrays of shape (N, 3).
    """
    simplex = np.empty((4, 3))
    new_s = np.empty((4, 3))
    v = va[0] - vb[0]
    tol2 = tol * tol
    if _dot(v, v) <= tol2:
        return True
    simplex[0] = v
    n = 1
    for _ in range(_MAX_ITER):
        vv = _dot(v, v)
        if vv <= tol2:
            return True
        ia = _support(va, -v[0], -v[1], -v[2])
        ib = _support(vb, v[0], v[1], v[2])
        w = va[ia] - vb[ib]
        vw = _dot(v, w)
        # the plane orthogonal to v separates the sets by at least vw / |v|
        if vw > 0.0 and vw * vw > tol2 * vv:
            return False
        if vv - vw <= 1e-12 * vv:
            return vv <= tol2
        for i in range(n):
            if simplex[i, 0] == w[0] and simplex[i, 1] == w[1] and simplex[i, 2] == w[2]:
                return vv <= tol2
        simplex[n] = w
        n += 1
        if n == 2:
            n = _closest_segment(simplex, new_s, v)
        elif n == 3:
            n = _closest_triangle(simplex[0], simplex[1], simplex[2], new_s, v)
        else:
            n = _closest_tetra(simplex, new_s, v)
            if n == 4:
                return True
        for i in range(n):
            simplex[i] = new_s[i]
    return _dot(v, v) <= tol2


def posed_vertices(shape: ConvexShape, pose: Pose):
    return shape.vertices @ pose.rot.T + pose.pos


def collide(a: ConvexShape, pose_a: Pose, b: ConvexShape, pose_b: Pose, tol=CONTACT_TOL) -> bool:
    """Whether two posed convex shapes intersect or touch (gap <= tol)."""
    ca = pose_a.rot @ a.center + pose_a.pos
    cb = pose_b.rot @ b.center + pose_b.pos
    reach = a.radius + b.radius + tol
    diff = ca - cb
    if diff @ diff > reach * reach:
        return False
    return bool(gjk_distance_below(posed_vertices(a, pose_a), posed_vertices(b, pose_b), tol))


class PosedShape:
    """A convex shape with cached world-space vertices and bounding sphere."""

    __slots__ = ("shape", "pose", "vertices", "center", "radius", "tag")

    def __init__(self, shape: ConvexShape, pose: Pose, tag=None):
        self.shape = shape
        self.pose = pose
        self.vertices = posed_vertices(shape, pose)
        self.center = pose.rot @ shape.center + pose.pos
        self.radius = shape.radius
        self.tag = tag

    def __repr__(self):
        return f"PosedShape({self.tag!r}, center={self.center.round(4).tolist()})"


def posed_collide(a: PosedShape, b: PosedShape, tol=CONTACT_TOL) -> bool:
    diff = a.center - b.center
    reach = a.radius + b.radius + tol
    if diff @ diff > reach * reach:
        return False
    return bool(gjk_distance_below(a.vertices, b.vertices, tol))


def any_collision(group_a, group_b, tol=CONTACT_TOL) -> bool:
    """Whether any shape of ``group_a`` collides with any shape of ``group_b``."""
    if not group_a or not group_b:
        return False
    ca = np.array([s.center for s in group_a])
    cb = np.array([s.center for s in group_b])
    ra = np.array([s.radius for s in group_a])
    rb = np.array([s.radius for s in group_b])
    d2 = ((ca[:, None, :] - cb[None, :, :]) ** 2).sum(axis=2)
    reach = ra[:, None] + rb[None, :] + tol
    for i, j in zip(*np.nonzero(d2 <= reach * reach)):
        if gjk_distance_below(group_a[i].vertices, group_b[j].vertices, tol):
            return True
    return False
