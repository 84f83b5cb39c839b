"""Triangle meshes, a Wavefront OBJ subset, and a few primitive builders."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np

from ..errors import InvalidArgumentError

AREA_EPS = 1e-14


class TriMesh:
    """Triangle mesh with zero-area faces stripped on construction.

    Watertightness is not required; ``is_watertight`` reports whether every
    undirected edge is shared by exactly two faces.
    """

    def __init__(self, vertices, faces):
        v = np.asarray(vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if f.size and (f.min() < 0 or f.max() >= len(v)):
            raise InvalidArgumentError("face index out of range")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("non-finite vertex coordinates")
        if f.size:
            cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
            keep = 0.5 * np.linalg.norm(cross, axis=1) > AREA_EPS
            f = f[keep]
        self.vertices = v
        self.faces = f
        self.vertices.setflags(write=False)
        self.faces.setflags(write=False)

    def __len__(self):
        return len(self.faces)

    def __repr__(self):
        return f"TriMesh({len(self.vertices)} vertices, {len(self.faces)} faces)"

    def triangles(self):
        return self.vertices[self.faces]

    def face_normals(self):
        t = self.triangles()
        n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        return n / np.linalg.norm(n, axis=1)[:, None]

    def face_areas(self):
        t = self.triangles()
        return 0.5 * np.linalg.norm(np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]), axis=1)

    @property
    def is_watertight(self) -> bool:
        edges = Counter()
        for a, b, c in self.faces.tolist():
            for e in ((a, b), (b, c), (c, a)):
                edges[tuple(sorted(e))] += 1
        return bool(edges) and all(n == 2 for n in edges.values())

    def transformed(self, pose):
        return TriMesh(pose.apply(self.vertices), self.faces)

    def scaled(self, s):
        return TriMesh(self.vertices * np.asarray(s, dtype=float), self.faces)


def merge_meshes(meshes):
    verts, faces, off = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + off)
        off += len(m.vertices)
    return TriMesh(np.vstack(verts), np.vstack(faces))


def load_obj(path) -> TriMesh:
    """Read ``v`` and ``f`` records (1-based, triangular); other records ignored."""
    verts, faces = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                # tolerate "f 1/2/3" style references, keep the vertex index only
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) != 3:
                    raise InvalidArgumentError(f"{path}:{lineno}: only triangular faces are supported")
                faces.append(idx)
    return TriMesh(verts, faces)


def save_obj(mesh: TriMesh, path):
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def box_mesh(extents, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """Axis-aligned box with outward-facing (counter-clockwise) triangles."""
    hx, hy, hz = np.asarray(extents, dtype=float) / 2.0
    c = np.asarray(center, dtype=float)
    v = np.array([[x, y, z] for x in (-hx, hx) for y in (-hy, hy) for z in (-hz, hz)]) + c
    # vertex index = 4*ix + 2*iy + iz
    f = [
        [0, 1, 3], [0, 3, 2],  # -x
        [4, 6, 7], [4, 7, 5],  # +x
        [0, 4, 5], [0, 5, 1],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [0, 2, 6], [0, 6, 4],  # -z
        [1, 5, 7], [1, 7, 3],  # +z
    ]
    return TriMesh(v, f)


def icosahedron():
    """The 12 unit vertices and 20 faces of a regular icosahedron."""
    t = (1.0 + 5.0 ** 0.5) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return v, f


def subdivide_sphere(vertices, faces):
    """Split each triangle in four; new edge midpoints are pushed to the unit sphere."""
    verts = [np.asarray(p, dtype=float) for p in vertices]
    cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            m = verts[a] + verts[b]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    new_faces = []
    for a, b, c in np.asarray(faces).tolist():
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.array(verts), np.array(new_faces)


def icosphere_mesh(level=1, radius=1.0) -> TriMesh:
    v, f = icosahedron()
    for _ in range(level):
        v, f = subdivide_sphere(v, f)
    return TriMesh(v * radius, f)


def cylinder_mesh(radius, height, segments=16) -> TriMesh:
    """Closed prism approximating a cylinder along z, centered at the origin."""
    ang = 2.0 * np.pi * np.arange(segments) / segments
    ring = np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])
    bottom = np.column_stack([ring, np.full(segments, -height / 2.0)])
    top = np.column_stack([ring, np.full(segments, height / 2.0)])
    v = np.vstack([bottom, top, [[0.0, 0.0, -height / 2.0]], [[0.0, 0.0, height / 2.0]]])
    cb, ct = 2 * segments, 2 * segments + 1
    f = []
    for i in range(segments):
        j = (i + 1) % segments
        f += [[i, j, segments + j], [i, segments + j, segments + i]]
        f += [[cb, j, i], [ct, segments + i, segments + j]]
    return TriMesh(v, f)


def square_ring_boxes(outer, inner, thickness):
    """Four bar boxes forming a square frame in the xy plane, as (extents, center) pairs."""
    w = (outer - inner) / 2.0
    off = (outer + inner) / 4.0
    return [
        ((outer, w, thickness), (0.0, off, 0.0)),
        ((outer, w, thickness), (0.0, -off, 0.0)),
        ((w, inner, thickness), (off, 0.0, 0.0)),
        ((w, inner, thickness), (-off, 0.0, 0.0)),
    ]


def _triangulate_polygon(poly):
    """Ear clipping for a simple counter-clockwise polygon; returns index triples."""
    idx = list(range(len(poly)))
    tris = []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    guard = 0
    while len(idx) > 3 and guard < 10_000:
        guard += 1
        for k in range(len(idx)):
            i, j, m = idx[k - 1], idx[k], idx[(k + 1) % len(idx)]
            a, b, c = poly[i], poly[j], poly[m]
            if cross(a, b, c) <= 0.0:
                continue
            if any(cross(a, b, poly[p]) >= 0.0 and cross(b, c, poly[p]) >= 0.0
                   and cross(c, a, poly[p]) >= 0.0 for p in idx if p not in (i, j, m)):
                continue
            tris.append((i, j, m))
            idx.pop(k)
            break
        else:
            raise InvalidArgumentError("polygon is not simple or not counter-clockwise")
    tris.append(tuple(idx))
    return tris


def prism_mesh(polygon, height) -> TriMesh:
    """Extrude a simple counter-clockwise xy polygon along z, centered on z=0."""
    poly = np.asarray(polygon, dtype=float)
    n = len(poly)
    h = height / 2.0
    v = np.vstack([np.column_stack([poly, np.full(n, -h)]), np.column_stack([poly, np.full(n, h)])])
    f = []
    for a, b, c in _triangulate_polygon(poly):
        f.append([n + a, n + b, n + c])
        f.append([c, b, a])
    for i in range(n):
        j = (i + 1) % n
        f += [[i, j, n + j], [i, n + j, n + i]]
    return TriMesh(v, f)


def square_frame_mesh(outer, inner, thickness) -> TriMesh:
    """Watertight square ring in the xy plane with a square hole, centered at the origin."""
    o, i, h = outer / 2.0, inner / 2.0, thickness / 2.0
    outer_loop = [(-o, -o), (o, -o), (o, o), (-o, o)]
    inner_loop = [(-i, -i), (i, -i), (i, i), (-i, i)]
    v = []
    for loop in (outer_loop, inner_loop):
        for z in (-h, h):
            v += [(x, y, z) for x, y in loop]
    # index blocks: outer bottom 0-3, outer top 4-7, inner bottom 8-11, inner top 12-15
    f = []
    for k in range(4):
        m = (k + 1) % 4
        f += [[4 + k, 4 + m, 12 + m], [4 + k, 12 + m, 12 + k]]      # top annulus
        f += [[k, 8 + m, m], [k, 8 + k, 8 + m]]                    # bottom annulus
        f += [[k, m, 4 + m], [k, 4 + m, 4 + k]]                    # outer wall
        f += [[8 + k, 12 + m, 8 + m], [8 + k, 12 + k, 12 + m]]    # inner wall
    return TriMesh(v, f)
