"""Plan a whole assembly: G-A spaces, selection, motion segments, backtracking.

The holding arm picks the base part and carries it to an assembly pose;
the other arm brings each further part in, mates it along its assembly
direction and lets go. When a pose admits no grasp pair or some motion
cannot be found, the next assembly pose is tried. Running out of poses
means the parts would have to be regrasped first, which is reported but
not planned.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .aspace import AssemblyPose, OrientationBasis, assembly_poses, directions_clear_of_gravity, \
    gravity_prefilter, sample_positions
from .errors import ConfigurationError, InvalidArgumentError
from .geom import Pose
from .grasp import synthesize_grasps
from .grrt import MotionContext, MotionPath, RRTParams, StabilityModel, edge_valid, path_validate, plan_rrt, \
    smooth_path
from .kin import Attachment, IKOptions, ik, refine
from .scene import Scene
from .select import APPROACH_DISTANCE, SelectionProblem, select_order1, select_order2

log = logging.getLogger(__name__)

SEGMENT_KINDS = ("TRANSIT", "APPROACH", "MATE", "RETRACT", "GRIP", "RELEASE")
OUTCOMES = ("success", "regrasp-needed", "failure")
TIMING_KEYS = ("CD1", "IK1", "RRT1", "CD2", "IK2", "RRT2")
JOINT_SPEED = 1.0  # rad/s, only for duration estimates
GRIP_TIME = 0.5


@dataclass(frozen=True)
class PlannerParams:
    selection_order: int = 1
    basis: OrientationBasis = OrientationBasis.OCTAHEDRON
    rolls: int = 6
    positions: int = 2
    ik_budget: int = 2000
    rrt: RRTParams = field(default_factory=RRTParams)
    seed: int = 0
    smoothing: int = 20
    rrt_attempts: int = 5
    approach_distance: float = APPROACH_DISTANCE
    cartesian_step: float = 0.01
    certify_factor: int = 10
    shuffle_grasps: bool = False
    max_poses: int | None = None

    def __post_init__(self):
        if self.selection_order not in (1, 2):
            raise InvalidArgumentError("selection order must be 1 or 2")
        object.__setattr__(self, "basis", OrientationBasis.parse(self.basis))
        if self.rolls < 1 or self.positions < 1:
            raise InvalidArgumentError("rolls and positions must be positive")
        if self.ik_budget < 1 or self.rrt_attempts < 1 or self.certify_factor < 1:
            raise InvalidArgumentError("budgets must be positive")
        if not (self.cartesian_step > 0 and self.approach_distance > 0):
            raise InvalidArgumentError("cartesian step and approach distance must be positive")

    def to_dict(self):
        return {"selection_order": self.selection_order, "basis": self.basis.value, "rolls": self.rolls,
                "positions": self.positions, "ik_budget": self.ik_budget,
                "rrt": {"step_size": self.rrt.step_size, "goal_bias": self.rrt.goal_bias,
                        "max_iterations": self.rrt.max_iterations,
                        "edge_resolution": self.rrt.edge_resolution},
                "seed": self.seed, "smoothing": self.smoothing, "rrt_attempts": self.rrt_attempts,
                "approach_distance": self.approach_distance, "cartesian_step": self.cartesian_step,
                "certify_factor": self.certify_factor, "shuffle_grasps": self.shuffle_grasps,
                "max_poses": self.max_poses}


@dataclass
class Segment:
    kind: str
    arm: str  # "right", "left" or "both"
    waypoints: np.ndarray  # (m, dof) dual configs
    jaw: dict  # arm -> jaw opening used for the empty hand (held parts use their grasp width)
    events: list = field(default_factory=list)
    duration: float = 0.0

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise InvalidArgumentError(f"unknown segment kind {self.kind!r}")


@dataclass
class GASpaces:
    grasps: dict  # (object id, arm) -> [GraspConfig]
    poses: list  # AssemblyPose, already filtered for the first mate
    unfiltered: int = 0


@dataclass
class PlanResult:
    outcome: str
    segments: list = field(default_factory=list)
    reports: list = field(default_factory=list)  # one dict per part placed or attempted
    timings: dict = field(default_factory=lambda: dict.fromkeys(TIMING_KEYS))
    assembly_poses: list = field(default_factory=list)  # pose key used for each mated part
    total_time: float = 0.0
    rrt_calls: int = 0
    message: str = ""

    @property
    def success(self):
        return self.outcome == "success"


def build_ga_spaces(scene: Scene, params: PlannerParams) -> GASpaces:
    """Grasp lists for every object and arm, and the prefiltered assembly poses."""
    grasps = {}
    cache = []
    for oid, obj in scene.objects.items():
        for arm in ("right", "left"):
            gripper = scene.robot.grippers[arm]
            hit = next((g for (o, gr), g in cache if o == oid and gr == gripper), None)
            if hit is None:
                hit = synthesize_grasps(obj.mesh, gripper, scene.grasp_params, obj.pieces)
                cache.append(((oid, gripper), hit))
            if not hit:
                raise ConfigurationError(f"objects.{oid}: no grasp survives synthesis for the {arm} gripper",
                                         f"objects.{oid}")
            grasps[(oid, arm)] = hit
    positions = sample_positions(scene.region, params.positions, params.seed)
    poses = assembly_poses(positions, params.basis, params.rolls)
    second = scene.task.parts[1]
    kept = gravity_prefilter(poses, second.v_a, second.threshold_deg)
    return GASpaces(grasps, kept, len(poses))


class _Clock:
    def __init__(self):
        self.t = dict.fromkeys(("cd", "ik", "rrt"), 0.0)

    def add(self, key, dt):
        self.t[key] += dt


class _MotionFailure(Exception):
    pass


@dataclass
class _State:
    q: np.ndarray
    on_table: list  # object ids still resting at their initial pose
    finished: list  # [(object id, pose in base frame)]
    hold_grasp: object  # GraspConfig on the base part
    pose_index: int  # index into the pose list of the current assembly pose
    model: StabilityModel
    jaw: dict


class Planner:
    """One plan query. Use :func:`plan_assembly` unless stepping through parts."""

    def __init__(self, scene: Scene, params: PlannerParams = None, spaces: GASpaces = None):
        self.scene = scene
        self.params = params or PlannerParams()
        self.robot = scene.robot
        self.task = scene.task
        if len(self.task.parts) < 2:
            raise ConfigurationError("task.parts: need at least two parts", "task.parts")
        self.hold = self.task.holding_arm
        self.pick = self.task.picking_arm
        self.spaces = spaces
        self.clock = [_Clock(), _Clock()]
        self.rrt_calls = 0
        self._positions = None

    # ---------------------------------------------------------------- helpers

    def _seed(self, *key):
        return int(np.random.SeedSequence([self.params.seed, *key]).generate_state(1)[0])

    def _world(self, on_table, exclude=()):
        out = list(self.scene.obstacles)
        for oid in on_table:
            if oid not in exclude:
                out += self.scene.object_shapes(oid, self.scene.objects[oid].initial_pose)
        return out

    def _finished_pieces(self, finished):
        return [(s, mp) for oid, mp in finished for s in self.scene.objects[oid].pieces]

    def _hold_attachment(self, finished, grasp):
        inv = grasp.hand_pose_in_object.inverse()
        return Attachment([(s, inv @ t) for s, t in self._finished_pieces(finished)], grasp.jaw_width)

    def _pick_attachment(self, oid, grasp):
        inv = grasp.hand_pose_in_object.inverse()
        return Attachment([(s, inv) for s in self.scene.objects[oid].pieces], grasp.jaw_width)

    def _ctx(self, state, attachments, active, hold_attached, ignore_pair=False):
        atts = dict(attachments)
        for arm in ("right", "left"):
            if arm not in atts:
                atts[arm] = Attachment([], state.jaw[arm])
        ctx = MotionContext(self.robot, self._world(state.on_table), atts, state.model,
                            self.hold if hold_attached else None,
                            state.hold_grasp.hand_pose_in_object.inverse() if hold_attached else None,
                            tuple(active), ignore_pair)
        return ctx

    def _certify(self, waypoints, ctx):
        fine = self.params.rrt.edge_resolution / self.params.certify_factor
        return path_validate(MotionPath(waypoints, ctx.active, fine), ctx, fine)

    def _transit(self, q_goal, state, ctx, phase, key):
        """RRT from state.q to q_goal; returns waypoints (m, dof)."""
        clock = self.clock[phase]
        t0 = time.perf_counter()
        try:
            if np.array_equal(state.q, q_goal):
                return np.array([state.q])
            p = self.params.rrt
            # the iteration budget is split over restarts: a stuck tree rarely recovers
            per_attempt = max(1, p.max_iterations // self.params.rrt_attempts)
            for attempt in range(self.params.rrt_attempts):
                rp = RRTParams(p.step_size, p.goal_bias, per_attempt, p.edge_resolution,
                               self._seed(*key, attempt))
                self.rrt_calls += 1
                try:
                    path = plan_rrt(state.q, q_goal, ctx, rp)
                except InvalidArgumentError:
                    raise _MotionFailure(f"transit {key} endpoint invalid") from None
                if path is None:
                    continue
                path = smooth_path(path, ctx, self.params.smoothing, rp.seed, p.step_size)
                if self._certify(path.waypoints, ctx):
                    return path.waypoints
            raise _MotionFailure(f"no transit path {key}")
        finally:
            clock.add("rrt", time.perf_counter() - t0)

    def _linear(self, arm, state, hand_goal: Pose, ctx, phase, exact_end=True):
        """Straight Cartesian hand motion of one arm, IK chained from the current config."""
        clock = self.clock[phase]
        chain = self.robot.chains[arm]
        sl = self.robot.arm_slice(arm)
        qa = state.q[sl].copy()
        start = chain.fk(qa)
        n = max(1, int(math.ceil(np.linalg.norm(hand_goal.pos - start.pos) / self.params.cartesian_step)))
        opts = IKOptions(restarts=0)
        wps = [state.q.copy()]
        t0 = time.perf_counter()
        for k in range(1, n + 1):
            target = Pose(start.pos + (hand_goal.pos - start.pos) * (k / n), hand_goal.rot)
            q_next = ik(chain, target, qa, opts)
            if q_next is not None and k == n and exact_end:
                q_next = refine(chain, target, q_next)
            if q_next is None or np.max(np.abs(q_next - qa)) > self.params.rrt.step_size:
                clock.add("ik", time.perf_counter() - t0)
                raise _MotionFailure("cartesian segment not trackable")
            qa = q_next
            wps.append(self.robot.with_arm(state.q, arm, qa))
        t1 = time.perf_counter()
        clock.add("ik", t1 - t0)
        wps = np.array(wps)
        ok = all(edge_valid(a, b, ctx, self.params.rrt.edge_resolution) for a, b in zip(wps[:-1], wps[1:]))
        ok = ok and self._certify(wps, ctx)
        clock.add("rrt", time.perf_counter() - t1)
        if not ok:
            raise _MotionFailure("cartesian segment collides")
        return wps

    def _segment(self, segments, kind, arm, wps, state, events=()):
        if kind in ("GRIP", "RELEASE"):
            duration = GRIP_TIME
        else:
            duration = float(np.abs(np.diff(wps, axis=0)).max(axis=1).sum() / JOINT_SPEED) if len(wps) > 1 else 0.0
        segments.append(Segment(kind, arm, np.array(wps), dict(state.jaw), list(events), duration))
        state.q = np.array(wps[-1])

    def _select(self, problem, pose: Pose, phase, key):
        budget = self.params.ik_budget
        shuffle = self._seed(*key) if self.params.shuffle_grasps else None
        if self.params.selection_order == 1:
            pair, report = select_order1(problem, pose, budget, shuffle)
        else:
            pairs, report = select_order2(problem, pose, budget, shuffle)
            pair = pairs[0] if pairs else None
        self.clock[phase].add("cd", report.times["cd"])
        self.clock[phase].add("ik", report.times["ik"])
        return pair, report

    def _problem(self, part_k, state_like, held_on_table):
        sc, task = self.scene, self.task
        base = task.parts[0].part
        tp = task.parts[part_k]
        finished = state_like["finished"]
        on_table = state_like["on_table"]
        return SelectionProblem(
            robot=self.robot, held_arm=self.hold, held_id=base,
            held_grasps=state_like["held_grasps"],
            held_pieces=self._finished_pieces(finished),
            held_base_pieces=list(sc.objects[base].pieces),
            held_on_table=held_on_table, pick_id=tp.part,
            pick_grasps=self.spaces.grasps[(tp.part, self.pick)],
            pick_pieces=list(sc.objects[tp.part].pieces),
            mate_pose=tp.mate_pose, mate_offset=tp.mate_distance * tp.v_a,
            initial_poses={o: sc.objects[o].initial_pose for o in on_table},
            table_shapes={o: sc.object_shapes(o, sc.objects[o].initial_pose) for o in on_table},
            obstacles=list(sc.obstacles), seed=self.params.seed,
            held_start=state_like.get("q"))

    def _poses(self):
        poses = self.spaces.poses
        if self.params.max_poses is not None:
            poses = poses[: self.params.max_poses]
        return poses

    # ---------------------------------------------------------------- picking-side motions

    def _bring_part(self, part_k, pair, state, segments, phase, key, asm_pose: Pose):
        """Picking arm: transit, approach, grip, transit to pre-mate, mate, release, retract."""
        robot, pick = self.robot, self.pick
        tp = self.task.parts[part_k]
        entry = pair.pick
        g = entry.grasp
        hold_att = self._hold_attachment(state.finished, state.hold_grasp)
        sl = robot.arm_slice(pick)
        hold_on = len(state.model) > 0

        state.jaw[pick] = g.jaw_width
        ctx = self._ctx(state, {self.hold: hold_att}, (pick,), hold_on)
        wps = self._transit(robot.with_arm(state.q, pick, entry.q_pregrasp), state, ctx, phase, (*key, 0))
        self._segment(segments, "TRANSIT", pick, wps, state)

        hand_pick = self.scene.objects[tp.part].initial_pose @ g.hand_pose_in_object
        wps = self._linear(pick, state, hand_pick, ctx, phase)
        self._segment(segments, "APPROACH", pick, wps, state)

        state.on_table = [o for o in state.on_table if o != tp.part]
        self._segment(segments, "GRIP", pick, [state.q], state,
                      [{"type": "attach", "object": tp.part, "arm": pick}])

        atts = {self.hold: hold_att, pick: self._pick_attachment(tp.part, g)}
        ctx = self._ctx(state, atts, (pick,), hold_on)
        q_pm = robot.with_arm(state.q, pick, entry.q_premate)
        wps = self._transit(q_pm, state, ctx, phase, (*key, 1))
        self._segment(segments, "TRANSIT", pick, wps, state)

        mate_world = asm_pose @ tp.mate_pose
        ctx = self._ctx(state, atts, (pick,), hold_on, ignore_pair=True)
        wps = self._linear(pick, state, mate_world @ g.hand_pose_in_object, ctx, phase)
        self._segment(segments, "MATE", pick, wps, state)

        state.finished = state.finished + [(tp.part, tp.mate_pose)]
        state.model = state.model.extended(tp.v_a, tp.threshold_deg)
        self._segment(segments, "RELEASE", pick, [state.q], state,
                      [{"type": "release", "object": tp.part, "arm": pick, "merge_into": self.hold}])

        hold_att = self._hold_attachment(state.finished, state.hold_grasp)
        ctx = self._ctx(state, {self.hold: hold_att}, (pick,), True)
        hand = robot.chains[pick].fk(state.q[sl])
        back = hand.translated(-self.params.approach_distance * hand.rot[:, 2])
        wps = self._linear(pick, state, back, ctx, phase, exact_end=False)
        self._segment(segments, "RETRACT", pick, wps, state)

    # ---------------------------------------------------------------- parts

    def plan_first_pair(self, result: PlanResult):
        sc, robot, hold = self.scene, self.robot, self.hold
        base = self.task.parts[0].part
        all_ids = [tp.part for tp in self.task.parts]
        attempts = []
        for pi, ap in enumerate(self._poses()):
            asm = ap.pose()
            problem = first_pair_problem(sc, self.spaces, self.params)
            pair, report = self._select(problem, asm, 0, (1, pi))
            attempts.append({"pose": list(ap.key), "selection": report.to_dict(), "pair": None,
                             "motion": None})
            if pair is None:
                continue
            attempts[-1]["pair"] = list(pair.ids)
            state = _State(robot.home.copy(), list(all_ids), [(base, Pose())], pair.held.grasp, pi,
                           StabilityModel(), {"right": robot.grippers["right"].max_stroke,
                                              "left": robot.grippers["left"].max_stroke})
            segments = []
            try:
                self._carry_base(pair, state, segments, asm, (1, pi))
                self._bring_part(1, pair, state, segments, 0, (1, pi, 10), asm)
            except _MotionFailure as exc:
                attempts[-1]["motion"] = str(exc)
                log.debug("pose %s: %s", ap.key, exc)
                continue
            attempts[-1]["motion"] = "ok"
            result.segments += segments
            result.assembly_poses.append(list(ap.key))
            result.reports.append({"part": self.task.parts[1].part, "attempts": attempts})
            return state
        result.reports.append({"part": self.task.parts[1].part, "attempts": attempts})
        return None

    def _carry_base(self, pair, state, segments, asm: Pose, key):
        robot, hold = self.robot, self.hold
        base = self.task.parts[0].part
        g = pair.held.grasp
        state.jaw[hold] = g.jaw_width
        ctx = self._ctx(state, {}, (hold,), False)
        wps = self._transit(robot.with_arm(state.q, hold, pair.held.q_pregrasp), state, ctx, 0, (*key, 0))
        self._segment(segments, "TRANSIT", hold, wps, state)
        hand_pick = self.scene.objects[base].initial_pose @ g.hand_pose_in_object
        wps = self._linear(hold, state, hand_pick, ctx, 0)
        self._segment(segments, "APPROACH", hold, wps, state)
        state.on_table = [o for o in state.on_table if o != base]
        self._segment(segments, "GRIP", hold, [state.q], state, [{"type": "attach", "object": base, "arm": hold}])
        q_asm = refine(robot.chains[hold], asm @ g.hand_pose_in_object, pair.held.q_assembly)
        if q_asm is None:
            raise _MotionFailure("assembly hold config does not refine")
        ctx = self._ctx(state, {hold: self._hold_attachment(state.finished, g)}, (hold,), False)
        wps = self._transit(robot.with_arm(state.q, hold, q_asm), state, ctx, 0, (*key, 1))
        self._segment(segments, "TRANSIT", hold, wps, state)

    def plan_next_part(self, part_k, state: _State, result: PlanResult):
        """Mate ``task.parts[part_k]`` onto the finished part; returns the new state or None."""
        robot, hold, pick = self.robot, self.hold, self.pick
        tp = self.task.parts[part_k]
        poses = self._poses()
        order = [state.pose_index] + [i for i in range(len(poses)) if i != state.pose_index]
        dirs = state.model.directions + [tp.v_a]
        ths = state.model.thresholds + [tp.threshold_deg]
        attempts = []
        for pi in order:
            ap = poses[pi]
            if not directions_clear_of_gravity(ap.rotation, dirs, ths):
                continue
            asm = ap.pose()
            like = {"finished": state.finished, "on_table": state.on_table, "held_grasps": [state.hold_grasp],
                    "q": state.q}
            problem = self._problem(part_k, like, False)
            pair, report = self._select(problem, asm, 1, (part_k, pi))
            attempts.append({"pose": list(ap.key), "selection": report.to_dict(), "pair": None, "motion": None})
            if pair is None:
                continue
            attempts[-1]["pair"] = list(pair.ids)
            trial = _State(state.q.copy(), list(state.on_table), list(state.finished), state.hold_grasp, pi,
                           state.model, dict(state.jaw))
            segments = []
            try:
                q_hold = refine(robot.chains[hold], asm @ state.hold_grasp.hand_pose_in_object,
                                pair.held.q_assembly)
                if q_hold is None:
                    raise _MotionFailure("assembly hold config does not refine")
                sl = robot.arm_slice(hold)
                if not np.array_equal(q_hold, trial.q[sl]):
                    # both arms sample while the finished part turns; the picking arm ends at home
                    goal = robot.with_arm(robot.with_arm(trial.q, hold, q_hold), pick,
                                          robot.home[robot.arm_slice(pick)])
                    ctx = self._ctx(trial, {hold: self._hold_attachment(trial.finished, trial.hold_grasp)},
                                    ("right", "left"), True)
                    wps = self._transit(goal, trial, ctx, 1, (part_k, pi, 99))
                    self._segment(segments, "TRANSIT", "both", wps, trial)
                self._bring_part(part_k, pair, trial, segments, 1, (part_k, pi, 10), asm)
            except _MotionFailure as exc:
                attempts[-1]["motion"] = str(exc)
                continue
            attempts[-1]["motion"] = "ok"
            result.segments += segments
            result.assembly_poses.append(list(ap.key))
            result.reports.append({"part": tp.part, "attempts": attempts})
            return trial
        result.reports.append({"part": tp.part, "attempts": attempts})
        return None

    def run(self) -> PlanResult:
        t0 = time.perf_counter()
        result = PlanResult("failure")
        if self.spaces is None:
            self.spaces = build_ga_spaces(self.scene, self.params)
        if not self.spaces.poses:
            result.message = "no assembly pose survives the gravity prefilter"
        else:
            state = self.plan_first_pair(result)
            if state is None:
                result.outcome = "regrasp-needed"
                result.message = "no assembly pose admits the first pair"
            else:
                for k in range(2, len(self.task.parts)):
                    state = self.plan_next_part(k, state, result)
                    if state is None:
                        result.outcome = "regrasp-needed"
                        result.message = f"no assembly pose admits part {self.task.parts[k].part}"
                        break
                else:
                    result.outcome = "success"
        for phase, tags in ((0, ("CD1", "IK1", "RRT1")), (1, ("CD2", "IK2", "RRT2"))):
            used = phase == 0 or len(self.task.parts) > 2
            if used and (phase == 0 or result.reports[1:]):
                c = self.clock[phase].t
                result.timings.update(zip(tags, (c["cd"], c["ik"], c["rrt"])))
        result.rrt_calls = self.rrt_calls
        result.total_time = time.perf_counter() - t0
        return result


def plan_assembly(scene: Scene, params: PlannerParams = None, spaces: GASpaces = None) -> PlanResult:
    """Plan every part of the scene's task; the outcome field is always set."""
    return Planner(scene, params, spaces).run()


def first_pair_problem(scene: Scene, spaces: GASpaces, params: PlannerParams = None) -> SelectionProblem:
    """Selection problem for the base part and the second part, everything still on the table."""
    planner = Planner(scene, params, spaces)
    base = scene.task.parts[0].part
    start = {"finished": [(base, Pose())], "on_table": [tp.part for tp in scene.task.parts],
             "held_grasps": spaces.grasps[(base, planner.hold)]}
    return planner._problem(1, start, True)


def stability_model_after(task, k) -> StabilityModel:
    """Directions that constrain the finished part once parts[0..k] are mated."""
    parts = task.parts[1:k + 1]
    return StabilityModel([p.v_a for p in parts], [p.threshold_deg for p in parts])
