"""Plan files: JSON emit/parse and an independent replay check.

The replay does not trust anything the planner computed besides the joint
waypoints and the grip/release events. Grasp transforms are recovered from
forward kinematics at the moment of each GRIP, and the relative pose of
every released part is measured from both hands at RELEASE.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .geom import Pose, pose_error
from .grrt import MotionContext, MotionPath, StabilityModel, path_validate
from .kin import Attachment
from .planner import SEGMENT_KINDS, TIMING_KEYS, PlannerParams, PlanResult
from .scene import Scene

PLAN_FORMAT = "ga-tamp-plan/1"
WALL_TIME_KEYS = TIMING_KEYS + ("total_time",)
MATE_TOL = 1e-6


@dataclass
class PlanDocument:
    """In-memory form of a plan file; ``to_dict`` and ``from_dict`` are inverses."""

    scene: str
    robot: str  # fingerprint of the robot model the waypoints belong to
    dof: int
    params: dict
    seed: int
    outcome: str
    message: str = ""
    assembly_poses: list = field(default_factory=list)
    segments: list = field(default_factory=list)  # dicts: kind, arm, jaw, events, duration, waypoints
    stats: dict = field(default_factory=dict)

    def to_dict(self):
        return {"format": PLAN_FORMAT, "scene": self.scene, "robot": self.robot, "dof": self.dof,
                "params": self.params, "seed": self.seed, "outcome": self.outcome, "message": self.message,
                "assembly_poses": self.assembly_poses, "segments": self.segments, "stats": self.stats}

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or d.get("format") != PLAN_FORMAT:
            raise ConfigurationError(f"format: expected {PLAN_FORMAT!r}", "format")
        for key in ("scene", "robot", "dof", "params", "seed", "outcome", "segments"):
            if key not in d:
                raise ConfigurationError(f"{key}: missing", key)
        dof = d["dof"]
        for i, s in enumerate(d["segments"]):
            if s.get("kind") not in SEGMENT_KINDS:
                raise ConfigurationError(f"segments[{i}].kind: unknown kind {s.get('kind')!r}",
                                         f"segments[{i}].kind")
            for j, w in enumerate(s.get("waypoints", [])):
                if len(w) != dof:
                    raise ConfigurationError(f"segments[{i}].waypoints[{j}]: expected {dof} joints",
                                             f"segments[{i}].waypoints")
        return cls(d["scene"], d["robot"], dof, d["params"], d["seed"], d["outcome"], d.get("message", ""),
                   d.get("assembly_poses", []), d["segments"], d.get("stats", {}))

    def emit(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def parse(cls, text: str):
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"plan: malformed JSON at line {exc.lineno}: {exc.msg}", "plan") from None

    def without_wall_times(self):
        d = self.to_dict()
        d["stats"] = {k: v for k, v in d["stats"].items() if k not in WALL_TIME_KEYS}
        return d


def document_from_result(result: PlanResult, scene: Scene, params: PlannerParams) -> PlanDocument:
    segs = [{"kind": s.kind, "arm": s.arm, "jaw": {k: float(v) for k, v in s.jaw.items()}, "events": s.events,
             "duration": s.duration, "waypoints": np.asarray(s.waypoints, dtype=float).tolist()}
            for s in result.segments]
    stats = {k: result.timings.get(k) for k in TIMING_KEYS}
    stats["total_time"] = result.total_time
    stats["rrt_calls"] = result.rrt_calls
    stats["selection"] = result.reports
    return PlanDocument(scene.name, scene.robot_fingerprint(), scene.robot.dof, params.to_dict(), params.seed,
                        result.outcome, result.message, result.assembly_poses, segs, stats)


def write_plan(path, doc: PlanDocument):
    Path(path).write_text(doc.emit())


def read_plan(path) -> PlanDocument:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"plan: cannot read {path}: {exc.strerror}", "plan") from None
    return PlanDocument.parse(text)


# ---------------------------------------------------------------- replay


def validate_plan(doc: PlanDocument, scene: Scene, resolution=None) -> list:
    """Replay a plan against a scene; returns a list of problems (empty when sound).

    ``resolution`` defaults to a tenth of the plan's RRT edge resolution.
    Raises ConfigurationError when the plan was made for a different robot.
    """
    robot, task = scene.robot, scene.task
    if doc.robot != scene.robot_fingerprint() or doc.dof != robot.dof:
        raise ConfigurationError("plan robot does not match the scene robot", "robot")
    if resolution is None:
        resolution = float(doc.params.get("rrt", {}).get("edge_resolution", 0.03)) / 10.0
    parts = {tp.part: tp for tp in task.parts}
    base = task.parts[0].part
    hold = task.holding_arm
    problems = []
    on_table = list(scene.objects)
    held = {"right": [], "left": []}  # arm -> [(object id, object pose in hand)]
    model = StabilityModel()
    mated = [base]
    prev = robot.home
    for i, seg in enumerate(doc.segments):
        wps = np.asarray(seg["waypoints"], dtype=float)
        if len(wps) == 0:
            problems.append(f"segment {i}: no waypoints")
            continue
        if not np.allclose(wps[0], prev, rtol=0.0, atol=1e-12):
            problems.append(f"segment {i}: does not start where the previous one ended")
        for arm in ("right", "left"):
            if seg["arm"] not in (arm, "both"):
                sl = robot.arm_slice(arm)
                if np.any(np.abs(wps[:, sl] - wps[0, sl]) > 1e-12):
                    problems.append(f"segment {i}: {arm} arm moves in a {seg['arm']} segment")
        q = wps[-1]
        kind = seg["kind"]
        if kind == "GRIP":
            for ev in seg["events"]:
                oid, arm = ev["object"], ev["arm"]
                if oid not in on_table:
                    problems.append(f"segment {i}: {oid} is not on the table")
                    continue
                on_table.remove(oid)
                hand = robot.hand_pose(q, arm)
                held[arm].append((oid, hand.inverse() @ scene.objects[oid].initial_pose))
        elif kind == "RELEASE":
            for ev in seg["events"]:
                oid, arm, into = ev["object"], ev["arm"], ev.get("merge_into", hold)
                entry = next((e for e in held[arm] if e[0] == oid), None)
                base_entry = next((e for e in held[into] if e[0] == base), None)
                if entry is None or base_entry is None or oid not in parts:
                    problems.append(f"segment {i}: release of {oid} without a finished part to join")
                    continue
                held[arm].remove(entry)
                obj_world = robot.hand_pose(q, arm) @ entry[1]
                base_world = robot.hand_pose(q, into) @ base_entry[1]
                rel = base_world.inverse() @ obj_world
                ep, er = pose_error(rel, parts[oid].mate_pose)
                if ep > MATE_TOL or er > MATE_TOL:
                    problems.append(f"segment {i}: {oid} released {ep:.2e} m / {er:.2e} rad off its mate pose")
                held[into].append((oid, base_entry[1] @ rel))
                model = model.extended(parts[oid].v_a, parts[oid].threshold_deg)
                mated.append(oid)
        else:
            world = list(scene.obstacles)
            for oid in on_table:
                world += scene.object_shapes(oid, scene.objects[oid].initial_pose)
            atts = {arm: Attachment([(s, p) for oid, p in held[arm] for s in scene.objects[oid].pieces],
                                    float(seg["jaw"][arm]))
                    for arm in ("right", "left")}
            base_entry = next((e for e in held[hold] if e[0] == base), None)
            ctx = MotionContext(robot, world, atts, model, hold if base_entry is not None else None,
                                base_entry[1] if base_entry is not None else None,
                                ("right", "left"), kind == "MATE")
            if not path_validate(MotionPath(wps, ctx.active, resolution), ctx, resolution):
                problems.append(f"segment {i} ({kind}): a configuration is in collision, out of limits, "
                                "or tips the finished part")
        prev = q
    if doc.outcome == "success" and mated != [tp.part for tp in task.parts]:
        problems.append(f"plan claims success but mated {mated}")
    return problems
