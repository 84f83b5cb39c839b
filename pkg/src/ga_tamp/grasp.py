"""Parallel-gripper grasp synthesis from planar facets of an object mesh.

Pipeline: cluster coplanar triangles into facets, pair facets whose
normals are antiparallel and whose separation fits the stroke, sample
contact points on one facet and project them across to the other, keep
force-closure contact pairs, spin the hand about the jaw axis, and drop
hand poses that hit the object's convex hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import InvalidArgumentError
from .geom import ConvexShape, Pose, TriMesh, angle_deg, convex_hull, frame_from_z
from .geom.collision import CONTACT_TOL, gjk_distance_below, posed_vertices

MIN_JAW_WIDTH = 1e-4


@dataclass(frozen=True)
class Gripper:
    """Parallel jaw gripper. Jaw closes along local y, approach along local z.

    The hand frame origin sits midway between the finger pads. Finger pads
    span z in [-pad_height/2, pad_height/2]; each finger runs back to the
    palm, which starts at z = -finger_length.
    ``hand_collision_shape`` is the palm; finger boxes are added per jaw
    width by :meth:`collision_shapes`.
    """

    max_stroke: float = 0.08
    pad_width: float = 0.02
    pad_height: float = 0.03
    palm_depth: float = 0.04
    finger_thickness: float = 0.008
    finger_clearance: float = 0.002
    finger_length: float = 0.05
    hand_collision_shape: ConvexShape | None = None

    def __post_init__(self):
        if not self.max_stroke > 0:
            raise InvalidArgumentError("gripper max_stroke must be positive")
        if self.finger_length < self.pad_height / 2.0:
            raise InvalidArgumentError("gripper fingers must reach past the pads")
        if self.hand_collision_shape is None:
            span = self.max_stroke + 2.0 * (self.finger_thickness + self.finger_clearance)
            palm = ConvexShape.box(
                (max(self.pad_width, 0.04), span, self.palm_depth),
                (0.0, 0.0, -self.finger_length - self.palm_depth / 2.0))
            object.__setattr__(self, "hand_collision_shape", palm)
        if len(self.hand_collision_shape.vertices) == 0:
            raise InvalidArgumentError("gripper collision shape is empty")

    def finger_shapes(self, jaw_width):
        cache = self.__dict__.setdefault("_finger_cache", {})
        key = float(jaw_width)
        if key not in cache:
            if len(cache) > 4096:
                cache.clear()
            cache[key] = self._build_fingers(key)
        return cache[key]

    def _build_fingers(self, jaw_width):
        inner = jaw_width / 2.0 + self.finger_clearance
        mid = inner + self.finger_thickness / 2.0
        top = self.pad_height / 2.0
        ext = (self.pad_width, self.finger_thickness, top + self.finger_length)
        zc = (top - self.finger_length) / 2.0
        return [ConvexShape.box(ext, (0.0, mid, zc)), ConvexShape.box(ext, (0.0, -mid, zc))]

    def collision_shapes(self, jaw_width):
        """Palm plus both fingers, in the hand frame."""
        return [self.hand_collision_shape, *self.finger_shapes(jaw_width)]


@dataclass(frozen=True)
class GraspSynthesisParams:
    facet_area_min: float = 1e-5
    contact_samples_per_facet: int = 6
    roll_samples_per_contact: int = 8
    friction_mu: float = 0.3
    antiparallel_tol_deg: float = 5.0
    facet_normal_tol_deg: float = 2.0
    seed: int = 0

    def __post_init__(self):
        for name in ("facet_area_min", "contact_samples_per_facet", "roll_samples_per_contact",
                     "friction_mu", "antiparallel_tol_deg", "facet_normal_tol_deg"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")
        if self.friction_mu > 2.0:
            raise InvalidArgumentError("friction_mu must lie in (0, 2]")


@dataclass(frozen=True, eq=False)
class GraspConfig:
    hand_pose_in_object: Pose
    jaw_width: float
    contact_points: tuple  # (p1, p2) in the object frame
    contact_normals: tuple  # inward normals (n1, n2)
    quality: float
    index: int = -1  # position in the object's sorted grasp list; serves as the grasp id

    @property
    def jaw_axis(self):
        return self.hand_pose_in_object.rot[:, 1]

    @property
    def approach_axis(self):
        return self.hand_pose_in_object.rot[:, 2]


@dataclass
class Facet:
    triangles: np.ndarray  # (k, 3, 3) vertex coordinates
    normal: np.ndarray  # outward unit normal
    offset: float  # plane: normal . x + offset = 0
    area: float
    boundary: list = field(default_factory=list)  # closed vertex loops, (m, 3) arrays

    @property
    def center(self):
        areas = _tri_areas(self.triangles)
        return (self.triangles.mean(axis=1) * areas[:, None]).sum(axis=0) / areas.sum()


def _tri_areas(t):
    return 0.5 * np.linalg.norm(np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]), axis=1)


def _boundary_loops(tris_idx, verts):
    count = {}
    directed = {}
    for a, b, c in tris_idx:
        for u, w in ((a, b), (b, c), (c, a)):
            key = (min(u, w), max(u, w))
            count[key] = count.get(key, 0) + 1
            directed[key] = (u, w)
    nxt = {}
    for key, n in count.items():
        if n == 1:
            u, w = directed[key]
            nxt[u] = w
    loops = []
    while nxt:
        start = min(nxt)
        loop = [start]
        cur = nxt.pop(start)
        while cur != start and cur in nxt:
            loop.append(cur)
            cur = nxt.pop(cur)
        loops.append(verts[loop])
    return loops


def find_planar_facets(mesh: TriMesh, normal_tol_deg=2.0, area_min=0.0):
    """Cluster edge-connected, coplanar triangles into facets.

    A triangle joins a cluster when its normal is within ``normal_tol_deg``
    of the cluster's seed normal and its vertices lie on the seed plane.
    Vertices are matched by position so that meshes with duplicated
    vertices still connect.
    """
    if len(mesh.faces) == 0:
        return []
    scale = float(np.ptp(mesh.vertices, axis=0).max()) or 1.0
    keys = np.round(mesh.vertices / (scale * 1e-9)).astype(np.int64)
    _, canon = np.unique(keys, axis=0, return_inverse=True)
    canon = canon.reshape(-1)
    rep = np.empty(canon.max() + 1, dtype=np.int64)
    rep[canon[::-1]] = np.arange(len(canon))[::-1]  # first original vertex of each position
    faces = canon[mesh.faces]
    normals = mesh.face_normals()
    tris = mesh.triangles()
    cos_tol = math.cos(math.radians(normal_tol_deg))
    plane_tol = max(scale * 1e-6, 1e-9)

    edge_faces = {}
    for fi, (a, b, c) in enumerate(faces.tolist()):
        for u, w in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(u, w), max(u, w)), []).append(fi)
    neighbours = [[] for _ in range(len(faces))]
    for fs in edge_faces.values():
        for f1 in fs:
            neighbours[f1].extend(f for f in fs if f != f1)

    assigned = np.full(len(faces), -1)
    facets = []
    for seed in range(len(faces)):
        if assigned[seed] >= 0:
            continue
        n0 = normals[seed]
        d0 = -float(n0 @ tris[seed, 0])
        members = [seed]
        assigned[seed] = seed
        stack = [seed]
        while stack:
            f = stack.pop()
            for g in neighbours[f]:
                if assigned[g] >= 0 or normals[g] @ n0 < cos_tol:
                    continue
                if np.abs(tris[g] @ n0 + d0).max() > plane_tol:
                    continue
                assigned[g] = seed
                members.append(g)
                stack.append(g)
        members.sort()
        ftris = tris[members]
        areas = _tri_areas(ftris)
        area = float(areas.sum())
        if area < area_min:
            continue
        n = (normals[members] * areas[:, None]).sum(axis=0)
        n /= np.linalg.norm(n)
        offset = -float(n @ (ftris.mean(axis=1) * areas[:, None]).sum(axis=0) / area)
        facets.append(Facet(ftris, n, offset, area,
                            _boundary_loops(faces[members].tolist(), mesh.vertices[rep])))
    return facets


def is_force_closure(p1, n1, p2, n2, mu) -> bool:
    """Two-contact antipodal test with inward normals.

    True iff the contact line lies inside both friction cones.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d = p2 - p1
    if not np.linalg.norm(d) > 0.0:
        raise InvalidArgumentError("contact points coincide")
    half = math.degrees(math.atan(mu))
    return angle_deg(d, n1) <= half and angle_deg(-d, n2) <= half


def _contact_margin(p1, n1, p2, n2, mu):
    half = math.degrees(math.atan(mu))
    d = p2 - p1
    return min(half - angle_deg(d, n1), half - angle_deg(-d, n2))


def _point_in_facet(p, facet, rel=1e-9):
    t = facet.triangles
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    n = np.cross(b - a, c - a)
    nn = (n * n).sum(axis=1)
    # barycentric coordinates of p projected onto each triangle's plane
    w_a = (np.cross(c - b, p - b) * n).sum(axis=1) / nn
    w_b = (np.cross(a - c, p - c) * n).sum(axis=1) / nn
    w_c = 1.0 - w_a - w_b
    return bool(np.any((w_a >= -rel) & (w_b >= -rel) & (w_c >= -rel)))


def _sample_facet(facet, n, seed):
    """First ``n`` points of a scrambled Halton sequence mapped onto the facet.

    Prefix-stable: the first n points do not depend on how many are drawn.
    """
    sampler = qmc.Halton(d=3, scramble=True, seed=seed)
    u = sampler.random(n)
    areas = _tri_areas(facet.triangles)
    cdf = np.cumsum(areas) / areas.sum()
    ti = np.minimum(np.searchsorted(cdf, u[:, 0], side="right"), len(cdf) - 1)
    r1 = np.sqrt(u[:, 1])
    r2 = u[:, 2]
    t = facet.triangles[ti]
    return ((1.0 - r1)[:, None] * t[:, 0] + (r1 * (1.0 - r2))[:, None] * t[:, 1]
            + (r1 * r2)[:, None] * t[:, 2])


def hand_poses_for_contacts(p1, p2, rolls):
    """Hand frames centred between the contacts, spun uniformly about the jaw axis."""
    y = (p2 - p1) / np.linalg.norm(p2 - p1)
    base = frame_from_z(y)  # columns: e1, e2, y
    e1, e2 = base[:, 0], base[:, 1]
    center = (p1 + p2) / 2.0
    poses = []
    for k in range(rolls):
        a = 2.0 * math.pi * k / rolls
        z = math.cos(a) * e1 + math.sin(a) * e2
        x = np.cross(y, z)
        poses.append(Pose(center, np.column_stack([x, y, z])))
    return poses


def hand_hits_shape(gripper: Gripper, hand_pose: Pose, jaw_width, shape: ConvexShape, shape_pose=None):
    target = shape.vertices if shape_pose is None else posed_vertices(shape, shape_pose)
    for s in gripper.collision_shapes(jaw_width):
        if gjk_distance_below(posed_vertices(s, hand_pose), target, CONTACT_TOL):
            return True
    return False


def synthesize_grasps(mesh: TriMesh, gripper: Gripper, params: GraspSynthesisParams = None,
                      hull=None):
    """Grasp configurations in the object frame, best quality first.

    ``hull`` is the object's collision geometry: one ConvexShape or a list
    of convex pieces (defaults to the mesh's hull). Deterministic given
    ``params`` (including its seed). Ties in quality keep construction order.
    """
    params = params or GraspSynthesisParams()
    hull = hull if hull is not None else convex_hull(mesh)
    pieces = [hull] if isinstance(hull, ConvexShape) else list(hull)
    facets = find_planar_facets(mesh, params.facet_normal_tol_deg, params.facet_area_min)
    cos_anti = math.cos(math.radians(params.antiparallel_tol_deg))
    mu = params.friction_mu
    candidates = []
    for i, fa in enumerate(facets):
        for j, fb in enumerate(facets):
            if j <= i or fa.normal @ -fb.normal < cos_anti:
                continue
            sep = abs(fa.normal @ fb.center + fa.offset)
            if sep > gripper.max_stroke or sep < MIN_JAW_WIDTH:
                continue
            seed = int(np.random.SeedSequence([params.seed, i, j]).generate_state(1)[0])
            n1 = -fa.normal
            n2 = -fb.normal
            for p1 in _sample_facet(fa, params.contact_samples_per_facet, seed):
                denom = fb.normal @ n1
                if abs(denom) < 1e-12:
                    continue
                t = -(fb.normal @ p1 + fb.offset) / denom
                if not (MIN_JAW_WIDTH <= t <= gripper.max_stroke):
                    continue
                p2 = p1 + t * n1
                if not _point_in_facet(p2, fb):
                    continue
                if not is_force_closure(p1, n1, p2, n2, mu):
                    continue
                width = float(np.linalg.norm(p2 - p1))
                quality = round(_contact_margin(p1, n1, p2, n2, mu), 12)
                for pose in hand_poses_for_contacts(p1, p2, params.roll_samples_per_contact):
                    if any(hand_hits_shape(gripper, pose, width, h) for h in pieces):
                        continue
                    candidates.append(GraspConfig(pose, width, (p1.copy(), p2.copy()),
                                                  (n1.copy(), n2.copy()), quality))
    order = sorted(range(len(candidates)), key=lambda k: (-candidates[k].quality, k))
    return [GraspConfig(c.hand_pose_in_object, c.jaw_width, c.contact_points, c.contact_normals,
                        c.quality, rank)
            for rank, c in enumerate(candidates[k] for k in order)]
