"""Scene and task description: robot, table, objects, assembly task, region.

A scene is a JSON document (validated with a JSON schema) or the equivalent
dict. Angles are degrees in the file; everything in memory is radians.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .aspace import AssemblyRegion
from .errors import ConfigurationError, InvalidArgumentError
from .geom import ConvexShape, Pose, PosedShape, TriMesh, box_mesh, convex_hull, cylinder_mesh, load_obj
from .geom.mesh import merge_meshes, prism_mesh, square_frame_mesh, square_ring_boxes
from .grasp import Gripper, GraspSynthesisParams
from .kin import DualArmRobot, Joint, KinematicChain, default_robot

TABLE_TAG = "table"
INITIAL_CLEARANCE = 0.002  # objects start this far above the table

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_POSE = {
    "type": "object",
    "properties": {
        "position": _VEC3,
        "rpy_deg": _VEC3,
        "quaternion": {"type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4},
    },
    "additionalProperties": False,
}
_SHAPE = {
    "type": "object",
    "properties": {
        "box": _VEC3,
        "cylinder": {"type": "object", "required": ["radius", "height"]},
        "frame": {"type": "object", "required": ["outer", "inner", "thickness"]},
        "prism": {"type": "object", "required": ["polygon", "height"]},
        "obj": {"type": "string"},
        "pose": _POSE,
        "compound": {"type": "array", "minItems": 1},
    },
    "additionalProperties": False,
}

SCENE_SCHEMA = {
    "type": "object",
    "required": ["objects", "task", "region"],
    "properties": {
        "name": {"type": "string"},
        "robot": {"type": "object"},
        "grippers": {"type": "object"},
        "grasp": {"type": "object"},
        "table": {
            "type": "object",
            "required": ["extents", "center"],
            "properties": {"extents": _VEC3, "center": _VEC3},
        },
        "obstacles": {"type": "array", "items": _SHAPE},
        "objects": {
            "type": "array",
            "minItems": 2,
            "items": {
                "type": "object",
                "required": ["id", "mesh", "initial_pose"],
                "properties": {
                    "id": {"type": "string"},
                    "mesh": _SHAPE,
                    "pieces": {"type": "array", "items": _SHAPE},
                    "initial_pose": _POSE,
                    "scale": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
        "task": {
            "type": "object",
            "required": ["parts"],
            "properties": {
                "holding_arm": {"enum": ["right", "left"]},
                "parts": {
                    "type": "array",
                    "minItems": 2,
                    "items": {
                        "type": "object",
                        "required": ["part"],
                        "properties": {
                            "part": {"type": "string"},
                            "mate_pose": _POSE,
                            "v_a": _VEC3,
                            "threshold_deg": {"type": "number", "minimum": 0, "maximum": 180},
                            "mate_distance": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                },
            },
        },
        "region": {
            "type": "object",
            "required": ["min", "max"],
            "properties": {"min": _VEC3, "max": _VEC3},
        },
    },
}


@dataclass
class SceneObject:
    id: str
    mesh: TriMesh
    pieces: list  # convex decomposition in the object frame
    initial_pose: Pose


@dataclass
class TaskPart:
    part: str
    mate_pose: Pose  # pose of this part in the assembly (first part's) frame
    v_a: np.ndarray  # mating direction, assembly frame; the part slides in along -v_a
    threshold_deg: float
    mate_distance: float = 0.05


@dataclass
class AssemblyTask:
    parts: list  # TaskPart, in assembly order; parts[0] is the base
    holding_arm: str = "right"

    @property
    def picking_arm(self):
        return "left" if self.holding_arm == "right" else "right"


@dataclass
class Scene:
    robot: DualArmRobot
    objects: dict
    task: AssemblyTask
    region: AssemblyRegion
    obstacles: list = field(default_factory=list)  # PosedShapes, table included
    grasp_params: GraspSynthesisParams = field(default_factory=GraspSynthesisParams)
    name: str = ""
    document: dict | None = None

    def object_shapes(self, obj_id, pose: Pose, tag=None):
        return [PosedShape(s, pose, tag or obj_id) for s in self.objects[obj_id].pieces]

    def robot_fingerprint(self):
        doc = robot_to_dict(self.robot)
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- parsing helpers


def _pose(d, where):
    if d is None:
        return Pose()
    try:
        p = Pose.from_dict(d)
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"{where}: bad pose ({exc})", where) from None
    if not (np.all(np.isfinite(p.pos)) and np.all(np.isfinite(p.rot))):
        raise ConfigurationError(f"{where}: pose must be finite", where)
    return p


def _shape_mesh(d, base_dir: Path, where, scale=1.0):
    """Mesh plus convex pieces for one shape entry."""
    pose = _pose(d.get("pose"), f"{where}.pose")
    if "box" in d:
        m = box_mesh(d["box"])
        pieces = [ConvexShape(m.vertices)]
    elif "cylinder" in d:
        c = d["cylinder"]
        m = cylinder_mesh(c["radius"], c["height"], int(c.get("segments", 16)))
        pieces = [convex_hull(m)]
    elif "frame" in d:
        f = d["frame"]
        m = square_frame_mesh(f["outer"], f["inner"], f["thickness"])
        pieces = [ConvexShape.box(e, c) for e, c in square_ring_boxes(f["outer"], f["inner"], f["thickness"])]
    elif "prism" in d:
        m = prism_mesh(d["prism"]["polygon"], d["prism"]["height"])
        pieces = [convex_hull(m)]
    elif "obj" in d:
        path = base_dir / d["obj"]
        if not path.is_file():
            raise ConfigurationError(f"{where}.obj: mesh file not found: {path}", f"{where}.obj")
        m = load_obj(path)
        pieces = [convex_hull(m)]
    elif "compound" in d:
        parts = [_shape_mesh(sub, base_dir, f"{where}.compound[{i}]") for i, sub in enumerate(d["compound"])]
        m = merge_meshes([p[0] for p in parts])
        pieces = [s for p in parts for s in p[1]]
    else:
        raise ConfigurationError(f"{where}: shape needs one of box/cylinder/frame/prism/obj/compound", where)
    if scale != 1.0:
        m = m.scaled(scale)
        pieces = [ConvexShape(s.vertices * scale) for s in pieces]
    if "pose" in d:
        m = m.transformed(pose)
        pieces = [s.transformed(pose) for s in pieces]
    return m, pieces


def _gripper(d):
    if d is None:
        return Gripper()
    allowed = {"max_stroke", "pad_width", "pad_height", "palm_depth", "finger_thickness", "finger_clearance",
               "finger_length"}
    bad = set(d) - allowed
    if bad:
        raise ConfigurationError(f"grippers: unknown field(s) {sorted(bad)}", "grippers")
    return Gripper(**d)


def robot_from_dict(d, grippers=None, base_dir=Path(".")) -> DualArmRobot:
    grippers = grippers or {}
    if not d or d.get("model") == "default":
        r = default_robot()
        return DualArmRobot(r.chains["right"], r.chains["left"], grippers.get("right"),
                            grippers.get("left"), r.home, r.fixed_shapes)
    chains = {}
    for arm in ("right", "left"):
        ad = d.get("arms", {}).get(arm)
        if ad is None:
            raise ConfigurationError(f"robot.arms.{arm}: missing", f"robot.arms.{arm}")
        joints = []
        for i, jd in enumerate(ad["joints"]):
            lo, hi = np.radians(jd["limits_deg"])
            joints.append(Joint(_pose(jd.get("origin"), f"robot.arms.{arm}.joints[{i}].origin"),
                                np.asarray(jd["axis"], dtype=float), float(lo), float(hi), jd.get("name", "")))
        links = {}
        for k, ld in enumerate(ad.get("links", [])):
            _, pieces = _shape_mesh(ld["shape"], base_dir, f"robot.arms.{arm}.links[{k}]")
            links.setdefault(int(ld["joint"]), []).extend(pieces)
        chains[arm] = KinematicChain(joints, _pose(ad.get("tool"), f"robot.arms.{arm}.tool"),
                                     _pose(ad.get("base"), f"robot.arms.{arm}.base"), links, arm)
    fixed = []
    for k, sd in enumerate(d.get("fixed", [])):
        _, pieces = _shape_mesh(sd, base_dir, f"robot.fixed[{k}]")
        fixed += [PosedShape(s, Pose(), ("robot", k)) for s in pieces]
    home = np.radians(d["home_deg"]) if "home_deg" in d else None
    try:
        return DualArmRobot(chains["right"], chains["left"], grippers.get("right"), grippers.get("left"),
                            home, fixed)
    except InvalidArgumentError as exc:
        raise ConfigurationError(f"robot: {exc}", "robot") from None


def _pose_dict(p: Pose):
    return {"position": [round(float(v), 12) for v in p.pos],
            "rpy_deg": [round(float(v), 12) for v in np.degrees(_rpy(p.rot))]}


def _rpy(r):
    pitch = math.asin(max(-1.0, min(1.0, -r[2, 0])))
    if abs(r[2, 0]) < 1.0 - 1e-12:
        roll = math.atan2(r[2, 1], r[2, 2])
        yaw = math.atan2(r[1, 0], r[0, 0])
    else:
        roll = math.atan2(-r[1, 2], r[1, 1])
        yaw = 0.0
    return np.array([roll, pitch, yaw])


def robot_to_dict(robot: DualArmRobot):
    """Explicit robot description (boxes stored as vertex-bounding boxes)."""
    arms = {}
    for arm, chain in robot.chains.items():
        links = []
        for k, shapes in chain.link_shapes.items():
            for s in shapes:
                lo, hi = s.vertices.min(axis=0), s.vertices.max(axis=0)
                links.append({"joint": k, "shape": {"box": [round(float(v), 12) for v in hi - lo],
                                                   "pose": {"position": [round(float(v), 12) for v in (lo + hi) / 2]}}})
        arms[arm] = {
            "base": _pose_dict(chain.base),
            "tool": _pose_dict(chain.tool),
            "joints": [{"name": j.name, "origin": _pose_dict(j.origin), "axis": [float(a) for a in j.axis],
                        "limits_deg": [round(math.degrees(j.lo), 9), round(math.degrees(j.hi), 9)]}
                       for j in chain.joints],
            "links": links,
        }
    fixed = []
    for s in robot.fixed_shapes:
        lo, hi = s.vertices.min(axis=0), s.vertices.max(axis=0)
        fixed.append({"box": [round(float(v), 12) for v in hi - lo],
                      "pose": {"position": [round(float(v), 12) for v in (lo + hi) / 2]}})
    return {"arms": arms, "fixed": fixed, "home_deg": [round(float(v), 9) for v in np.degrees(robot.home)]}


def scene_from_dict(doc, base_dir=".") -> Scene:
    base_dir = Path(base_dir)
    validator = jsonschema.Draft202012Validator(SCENE_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigurationError(f"{where}: {e.message}", where)
    grippers = {arm: _gripper(doc.get("grippers", {}).get(arm)) for arm in ("right", "left")}
    robot = robot_from_dict(doc.get("robot"), grippers, base_dir)

    obstacles = []
    if "table" in doc:
        t = doc["table"]
        obstacles.append(PosedShape(ConvexShape.box(t["extents"], t["center"]), Pose(), TABLE_TAG))
    for k, od in enumerate(doc.get("obstacles", [])):
        _, pieces = _shape_mesh(od, base_dir, f"obstacles[{k}]")
        obstacles += [PosedShape(s, Pose(), f"obstacle{k}") for s in pieces]

    objects = {}
    for k, od in enumerate(doc["objects"]):
        where = f"objects[{k}]"
        if od["id"] in objects:
            raise ConfigurationError(f"{where}.id: duplicate object id {od['id']!r}", f"{where}.id")
        scale = float(od.get("scale", 1.0))
        mesh, pieces = _shape_mesh(od["mesh"], base_dir, f"{where}.mesh", scale)
        if "pieces" in od:
            pieces = [s for i, pd in enumerate(od["pieces"])
                      for s in _shape_mesh(pd, base_dir, f"{where}.pieces[{i}]", scale)[1]]
        objects[od["id"]] = SceneObject(od["id"], mesh, pieces, _pose(od["initial_pose"], f"{where}.initial_pose"))

    td = doc["task"]
    parts = []
    for k, pd in enumerate(td["parts"]):
        where = f"task.parts[{k}]"
        if pd["part"] not in objects:
            raise ConfigurationError(f"{where}.part: unknown object id {pd['part']!r}", f"{where}.part")
        if k > 0 and "v_a" not in pd:
            raise ConfigurationError(f"{where}.v_a: assembly direction required", f"{where}.v_a")
        v = np.asarray(pd.get("v_a", (0.0, 0.0, 1.0)), dtype=float)
        if not np.linalg.norm(v) > 0:
            raise ConfigurationError(f"{where}.v_a: must be nonzero", f"{where}.v_a")
        parts.append(TaskPart(pd["part"], _pose(pd.get("mate_pose"), f"{where}.mate_pose"),
                              v / np.linalg.norm(v), float(pd.get("threshold_deg", 0.0)),
                              float(pd.get("mate_distance", 0.05))))
    if len({p.part for p in parts}) != len(parts):
        raise ConfigurationError("task.parts: each object may appear once", "task.parts")
    task = AssemblyTask(parts, td.get("holding_arm", "right"))

    try:
        region = AssemblyRegion(tuple(doc["region"]["min"]), tuple(doc["region"]["max"]))
    except InvalidArgumentError as exc:
        raise ConfigurationError(f"region: {exc}", "region") from None
    gp = doc.get("grasp", {})
    try:
        grasp_params = GraspSynthesisParams(**gp)
    except (TypeError, InvalidArgumentError) as exc:
        raise ConfigurationError(f"grasp: {exc}", "grasp") from None
    return Scene(robot, objects, task, region, obstacles, grasp_params, doc.get("name", ""), copy.deepcopy(doc))


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigurationError(f"scene: cannot read {path}: {exc.strerror}", "scene") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"scene: malformed JSON at line {exc.lineno}: {exc.msg}", "scene") from None
    return scene_from_dict(doc, path.parent)
