"""Geometry substrate: transforms, meshes, hulls, collision, stable placements."""

from .collision import CONTACT_TOL, PosedShape, any_collision, collide, posed_collide
from .hull import ConvexShape, centroid, convex_hull, stable_placements, volume
from .mesh import (TriMesh, box_mesh, cylinder_mesh, icosphere_mesh, load_obj, merge_meshes,
                   save_obj, square_ring_boxes)
from .transforms import (GRAVITY_DIR, WORLD_UP, Pose, angle_deg, frame_from_z, normalize,
                         pose_error, rot_axis_angle, rot_x, rot_y, rot_z, rotation_angle,
                         rotation_log)

__all__ = [
    "CONTACT_TOL", "ConvexShape", "GRAVITY_DIR", "Pose", "PosedShape", "TriMesh", "WORLD_UP",
    "angle_deg", "any_collision", "box_mesh", "centroid", "collide", "convex_hull",
    "cylinder_mesh", "frame_from_z", "icosphere_mesh", "load_obj", "merge_meshes", "normalize",
    "pose_error", "posed_collide", "rot_axis_angle", "rot_x", "rot_y", "rot_z",
    "rotation_angle", "rotation_log", "save_obj", "square_ring_boxes", "stable_placements",
    "volume",
]
