"""Convex hulls, volume centroids and stable placements on a table."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..errors import DegenerateGeometryError
from .mesh import TriMesh, box_mesh
from .transforms import Pose, frame_from_z, normalize

PLACEMENT_MARGIN = 1e-6


class ConvexShape:
    """Vertex set of a convex polytope plus a bounding sphere for broad-phase culling."""

    __slots__ = ("vertices", "center", "radius")

    def __init__(self, vertices):
        v = np.ascontiguousarray(vertices, dtype=float).reshape(-1, 3)
        if len(v) == 0:
            raise DegenerateGeometryError("empty convex shape")
        self.vertices = v
        self.vertices.setflags(write=False)
        lo, hi = v.min(axis=0), v.max(axis=0)
        self.center = (lo + hi) / 2.0
        self.radius = float(np.max(np.linalg.norm(v - self.center, axis=1)))

    def __repr__(self):
        return f"ConvexShape({len(self.vertices)} vertices, radius={self.radius:.4g})"

    @classmethod
    def box(cls, extents, center=(0.0, 0.0, 0.0)):
        return cls(box_mesh(extents, center).vertices)

    def transformed(self, pose):
        return ConvexShape(pose.apply(self.vertices))


def _points(obj):
    if isinstance(obj, TriMesh):
        return obj.vertices
    if isinstance(obj, ConvexShape):
        return obj.vertices
    return np.asarray(obj, dtype=float).reshape(-1, 3)


def convex_hull(mesh) -> ConvexShape:
    """Hull of a mesh (or point array); only extreme points are kept."""
    pts = _points(mesh)
    if len(pts) < 4:
        raise DegenerateGeometryError("convex hull needs at least 4 points")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateGeometryError(f"degenerate hull input: {exc.args[0].splitlines()[0]}") from None
    return ConvexShape(pts[np.sort(hull.vertices)])


def volume(mesh: TriMesh) -> float:
    t = mesh.triangles()
    return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)


def centroid(mesh: TriMesh):
    """Uniform-density volume centroid via signed tetrahedra against the origin."""
    t = mesh.triangles()
    # shift to the vertex mean to keep the signed volumes well conditioned
    ref = mesh.vertices.mean(axis=0)
    t = t - ref
    vols = np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])) / 6.0
    total = vols.sum()
    if not total > 1e-15:
        raise DegenerateGeometryError(f"mesh encloses non-positive volume ({total:.3g})")
    c = (vols[:, None] * t.sum(axis=1) / 4.0).sum(axis=0) / total
    return c + ref


def hull_faces(points, tol=1e-9):
    """Merge coplanar hull triangles into faces: list of (outward normal, offset, vertex indices)."""
    pts = _points(points)
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateGeometryError(f"degenerate hull input: {exc.args[0].splitlines()[0]}") from None
    faces = []
    for eq, simplex in zip(hull.equations, hull.simplices):
        n, d = eq[:3], eq[3]
        for face in faces:
            if np.dot(face[0], n) > 1.0 - 1e-9 and abs(face[1] - d) < tol * 10 + 1e-12:
                face[2].update(simplex.tolist())
                break
        else:
            faces.append([n.copy(), float(d), set(simplex.tolist())])
    return [(n, d, sorted(ix)) for n, d, ix in faces]


def _inside_convex_polygon(p2, poly2, margin):
    """Strict containment of a 2D point in a convex polygon, at least ``margin`` from every edge."""
    hull = ConvexHull(poly2)
    # equations: n . x + d <= 0 inside, n unit length
    dist = hull.equations[:, :2] @ p2 + hull.equations[:, 2]
    return bool(np.all(dist < -margin))


def stable_placements(mesh: TriMesh, margin=PLACEMENT_MARGIN):
    """Object poses resting a hull face on the z=0 plane with the centroid projection inside it.

    One pose per qualifying hull face. The returned pose maps object-frame
    points to the table frame; the face lies flush on z=0 and the object
    sits above it.
    """
    com = centroid(mesh)
    pts = mesh.vertices
    placements = []
    for normal, offset, idx in hull_faces(pts):
        face_pts = pts[idx]
        proj = com - (np.dot(normal, com) + offset) * normal
        basis = frame_from_z(normal)
        uv = (face_pts - proj) @ basis[:, :2]
        if len(uv) < 3:
            continue
        if not _inside_convex_polygon(np.zeros(2), uv, margin):
            continue
        # rotate the outward face normal onto -z, then drop the face onto z=0
        rot = _align(normal, np.array([0.0, 0.0, -1.0]))
        z = pts @ rot.T
        placements.append(Pose((0.0, 0.0, -z[:, 2].min()), rot))
    return placements


def _align(a, b):
    """Minimal rotation taking unit vector a onto unit vector b."""
    a = normalize(a)
    b = normalize(b)
    v = np.cross(a, b)
    c = float(np.dot(a, b))
    s = np.linalg.norm(v)
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # antiparallel: half turn about any axis orthogonal to a
        axis = frame_from_z(a)[:, 0]
        return 2.0 * np.outer(axis, axis) - np.eye(3)
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / s ** 2)
