"""Grasp-pair selection at one assembly pose.

Two search orders over the same feasibility checks:

* order 1 walks the held part's grasps best-first and, for the first one
  that is feasible on its own, looks for a partner grasp on the part being
  picked; it stops at the first full pair;
* order 2 filters both grasp lists completely, then pairs every survivor
  and drops pairs whose hands or held parts collide with each other.

Per-grasp stages: hand collision at the initial pose, hand collision at the
assembly pose, the intersection of those two, then IK plus arm collision.
IK seeds depend only on (global seed, object, grasp index, stage), so both
orders see identical per-grasp results.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .geom import Pose, PosedShape, any_collision
from .grasp import Gripper
from .kin import Attachment, DualArmRobot, IKOptions, arm_collides, ik, robot_collides

APPROACH_DISTANCE = 0.08
STAGES = ("grasps", "cd_init", "cd_assembly", "intersection", "ik")


class BudgetExhausted(Exception):
    pass


@dataclass
class SelectionReport:
    held: dict = field(default_factory=lambda: dict.fromkeys(STAGES, 0))
    pick: dict = field(default_factory=lambda: dict.fromkeys(STAGES, 0))
    pairs: int = 0
    ik_attempts: int = 0
    budget_exhausted: bool = False
    times: dict = field(default_factory=lambda: {"cd": 0.0, "ik": 0.0})

    def to_dict(self):
        return {"held": dict(self.held), "pick": dict(self.pick), "pairs": self.pairs,
                "ik_attempts": self.ik_attempts, "budget_exhausted": self.budget_exhausted}


@dataclass
class CandidateEntry:
    grasp: object  # GraspConfig
    q_pregrasp: np.ndarray | None
    q_pick: np.ndarray | None
    q_assembly: np.ndarray
    q_premate: np.ndarray | None = None


@dataclass
class CandidatePair:
    held: CandidateEntry
    pick: CandidateEntry

    @property
    def ids(self):
        return (self.held.grasp.index, self.pick.grasp.index)


@dataclass
class SelectionProblem:
    """Everything one selection call needs.

    The held side carries the base part (and whatever is already mated to
    it); the pick side is the part about to be mated. Poses of held pieces
    are in the base part's frame. When ``held_on_table`` is False the held
    grasp list normally has one entry: the grasp already in hand.
    """

    robot: DualArmRobot
    held_arm: str
    held_id: str
    held_grasps: list
    held_pieces: list  # [(ConvexShape, Pose in base frame)], whole finished part
    held_base_pieces: list  # ConvexShapes of the base part alone, base frame
    held_on_table: bool
    pick_id: str
    pick_grasps: list
    pick_pieces: list  # ConvexShapes in the pick part's frame
    mate_pose: Pose  # pick part in base frame
    mate_offset: np.ndarray  # pre-mate translation, base frame
    initial_poses: dict  # object id -> Pose, objects still on the table
    table_shapes: dict  # object id -> PosedShapes at the initial pose
    obstacles: list
    seed: int = 0
    ik_options: IKOptions = field(default_factory=IKOptions)
    held_start: np.ndarray | None = None  # held arm config when already holding

    @property
    def pick_arm(self):
        return "left" if self.held_arm == "right" else "right"


class _Selector:
    def __init__(self, problem: SelectionProblem, assembly_pose: Pose, budget: int):
        self.p = problem
        self.pose = assembly_pose
        self.budget = budget
        self.report = SelectionReport()
        self._cache = {}
        p = problem
        self.asm_held = [PosedShape(s, assembly_pose @ t, "held") for s, t in p.held_pieces]
        mate_world = assembly_pose @ p.mate_pose
        self.mate_world = mate_world
        self.premate_world = mate_world.translated(assembly_pose.rot @ p.mate_offset)
        self.asm_pick = [PosedShape(s, mate_world, p.pick_id) for s in p.pick_pieces]
        self.table_world = p.table_shapes

    # -- stage helpers

    def _table_world(self, *exclude):
        out = list(self.p.obstacles)
        for oid, shapes in self.table_world.items():
            if oid not in exclude:
                out += shapes
        return out

    def _hand_clear(self, gripper: Gripper, hand_pose: Pose, jaw, world):
        t0 = time.perf_counter()
        hand = [PosedShape(s, hand_pose) for s in gripper.collision_shapes(jaw)]
        hit = any_collision(hand, world)
        self.report.times["cd"] += time.perf_counter() - t0
        return not hit

    def _ik(self, arm, target, seed_q, key):
        if self.report.ik_attempts >= self.budget:
            self.report.budget_exhausted = True
            raise BudgetExhausted
        self.report.ik_attempts += 1
        t0 = time.perf_counter()
        chain = self.p.robot.chains[arm]
        seed = int(np.random.SeedSequence([self.p.seed, *key]).generate_state(1)[0])
        q = ik(chain, target, seed_q, self.p.ik_options, seed)
        self.report.times["ik"] += time.perf_counter() - t0
        return q

    def _arm_free(self, arm, qa, world, attachment):
        t0 = time.perf_counter()
        q = self.p.robot.with_arm(self.p.robot.home, arm, qa)
        hit = arm_collides(self.p.robot, q, arm, world, attachment)
        self.report.times["cd"] += time.perf_counter() - t0
        return not hit

    # -- per-grasp filter chains

    def held_entry(self, g):
        """CandidateEntry for a held-side grasp, or None; cached per grasp."""
        key = ("held", g.index)
        if key in self._cache:
            return self._cache[key]
        self._cache[key] = None
        p, r = self.p, self.report
        robot, arm = p.robot, p.held_arm
        gripper = robot.grippers[arm]
        obj_seed = _id_seed(p.held_id)
        r.held["grasps"] += 1
        if p.held_on_table:
            init = p.initial_poses[p.held_id]
            hand_init = init @ g.hand_pose_in_object
            if not self._hand_clear(gripper, hand_init, g.jaw_width, self._table_world(p.held_id)):
                return None
        r.held["cd_init"] += 1
        hand_asm = self.pose @ g.hand_pose_in_object
        if not self._hand_clear(gripper, hand_asm, g.jaw_width, p.obstacles + self.asm_pick):
            return None
        r.held["cd_assembly"] += 1
        r.held["intersection"] += 1
        inv = g.hand_pose_in_object.inverse()
        att = Attachment([(s, inv @ t) for s, t in p.held_pieces], g.jaw_width)
        home = robot.home[robot.arm_slice(arm)]
        q_pre = q_pick = None
        if p.held_on_table:
            init = p.initial_poses[p.held_id]
            hand_init = init @ g.hand_pose_in_object
            pre = _backed_off(hand_init)
            q_pre = self._ik(arm, pre, home, (obj_seed, g.index, 0))
            if q_pre is None:
                return None
            q_pick = self._ik(arm, hand_init, q_pre, (obj_seed, g.index, 1))
            if q_pick is None:
                return None
            world = self._table_world(p.held_id)
            piece_att = Attachment([(s, inv) for s in p.held_base_pieces], g.jaw_width)
            if not self._arm_free(arm, q_pick, world, piece_att):
                return None
            if not self._arm_free(arm, q_pre, world + self.table_world[p.held_id], Attachment([], g.jaw_width)):
                return None
        seed_q = home if p.held_start is None else p.held_start[robot.arm_slice(arm)]
        q_asm = self._ik(arm, hand_asm, seed_q, (obj_seed, g.index, 2))
        if q_asm is None:
            return None
        # the held part touches the mated part by design, so only the arm and hand see it
        if not self._arm_free(arm, q_asm, p.obstacles, att):
            return None
        if not self._arm_free(arm, q_asm, self.asm_pick, Attachment([], g.jaw_width)):
            return None
        r.held["ik"] += 1
        entry = CandidateEntry(g, q_pre, q_pick, q_asm)
        self._cache[key] = entry
        return entry

    def pick_entry(self, g):
        key = ("pick", g.index)
        if key in self._cache:
            return self._cache[key]
        self._cache[key] = None
        p, r = self.p, self.report
        robot, arm = p.robot, p.pick_arm
        gripper = robot.grippers[arm]
        obj_seed = _id_seed(p.pick_id)
        r.pick["grasps"] += 1
        init = p.initial_poses[p.pick_id]
        hand_init = init @ g.hand_pose_in_object
        # the held part has left the table by the time this arm picks
        table_world = self._table_world(p.pick_id, p.held_id)
        if not self._hand_clear(gripper, hand_init, g.jaw_width, table_world):
            return None
        r.pick["cd_init"] += 1
        hand_asm = self.mate_world @ g.hand_pose_in_object
        if not self._hand_clear(gripper, hand_asm, g.jaw_width, p.obstacles + self.asm_held):
            return None
        r.pick["cd_assembly"] += 1
        r.pick["intersection"] += 1
        home = robot.home[robot.arm_slice(arm)]
        att = Attachment([(s, g.hand_pose_in_object.inverse()) for s in p.pick_pieces], g.jaw_width)
        pre = _backed_off(hand_init)
        q_pre = self._ik(arm, pre, home, (obj_seed, g.index, 0))
        if q_pre is None:
            return None
        q_pick = self._ik(arm, hand_init, q_pre, (obj_seed, g.index, 1))
        if q_pick is None:
            return None
        if not self._arm_free(arm, q_pick, table_world, att):
            return None
        if not self._arm_free(arm, q_pre, table_world + self.table_world[p.pick_id], Attachment([], g.jaw_width)):
            return None
        q_asm = self._ik(arm, hand_asm, home, (obj_seed, g.index, 2))
        if q_asm is None:
            return None
        if not self._arm_free(arm, q_asm, p.obstacles, att):
            return None
        if not self._arm_free(arm, q_asm, self.asm_held, Attachment([], g.jaw_width)):
            return None
        hand_premate = self.premate_world @ g.hand_pose_in_object
        q_premate = self._ik(arm, hand_premate, q_asm, (obj_seed, g.index, 3))
        if q_premate is None:
            return None
        if not self._arm_free(arm, q_premate, p.obstacles + self.asm_held, att):
            return None
        r.pick["ik"] += 1
        entry = CandidateEntry(g, q_pre, q_pick, q_asm, q_premate)
        self._cache[key] = entry
        return entry

    def pair_ok(self, a: CandidateEntry, b: CandidateEntry):
        t0 = time.perf_counter()
        ok = not pair_collides(self.p, a, b)
        self.report.times["cd"] += time.perf_counter() - t0
        return ok


def _id_seed(obj_id):
    return int.from_bytes(obj_id.encode()[:8].ljust(8, b"\0"), "little") % (2 ** 31)


def _backed_off(hand: Pose, distance=APPROACH_DISTANCE):
    """Hand pose moved back along its approach axis."""
    return hand.translated(-distance * hand.rot[:, 2])


def held_attachment(p: SelectionProblem, entry: CandidateEntry):
    inv = entry.grasp.hand_pose_in_object.inverse()
    return Attachment([(s, inv @ t) for s, t in p.held_pieces], entry.grasp.jaw_width)


def pick_attachment(p: SelectionProblem, entry: CandidateEntry):
    inv = entry.grasp.hand_pose_in_object.inverse()
    return Attachment([(s, inv) for s in p.pick_pieces], entry.grasp.jaw_width)


def pair_collides(p: SelectionProblem, a: CandidateEntry, b: CandidateEntry) -> bool:
    """Both arms at the assembly configs, both parts held; the mated parts may touch."""
    robot = p.robot
    q = robot.with_arm(robot.with_arm(robot.home, p.held_arm, a.q_assembly), p.pick_arm, b.q_assembly)
    atts = {p.held_arm: held_attachment(p, a), p.pick_arm: pick_attachment(p, b)}
    return robot_collides(robot, q, p.obstacles, atts, ignore_attachment_pair=True)


def hand_cd_filter(grasps, gripper: Gripper, object_pose: Pose, world):
    """Grasps whose hand alone is clear of ``world`` (which should not contain the object itself)."""
    out = []
    for g in grasps:
        hand = [PosedShape(s, object_pose @ g.hand_pose_in_object) for s in gripper.collision_shapes(g.jaw_width)]
        if not any_collision(hand, world):
            out.append(g)
    return out


def grasp_intersection(pick_set, assembly_set):
    """Grasps present in both sets, by index, in the order of ``pick_set``."""
    ids = {g.index for g in assembly_set}
    return [g for g in pick_set if g.index in ids]


def _ordered(grasps, shuffle_seed):
    if shuffle_seed is None:
        return list(grasps)
    rng = np.random.default_rng(shuffle_seed)
    return [grasps[i] for i in rng.permutation(len(grasps))]


def select_order1(problem: SelectionProblem, assembly_pose: Pose, budget=2000, shuffle_seed=None):
    """First-hit search; returns (CandidatePair or None, SelectionReport)."""
    sel = _Selector(problem, assembly_pose, budget)
    held = _ordered(problem.held_grasps, shuffle_seed)
    pick = _ordered(problem.pick_grasps, None if shuffle_seed is None else shuffle_seed + 1)
    try:
        for g in held:
            a = sel.held_entry(g)
            if a is None:
                continue
            for h in pick:
                b = sel.pick_entry(h)
                if b is not None and sel.pair_ok(a, b):
                    sel.report.pairs = 1
                    return CandidatePair(a, b), sel.report
    except BudgetExhausted:
        pass
    return None, sel.report


def select_order2(problem: SelectionProblem, assembly_pose: Pose, budget=2000, shuffle_seed=None):
    """Full filtering then pairing; returns (list of CandidatePair, SelectionReport).

    Pairs are sorted by (held grasp position, pick grasp position) in the
    search order, i.e. by quality rank unless shuffled.
    """
    sel = _Selector(problem, assembly_pose, budget)
    held = _ordered(problem.held_grasps, shuffle_seed)
    pick = _ordered(problem.pick_grasps, None if shuffle_seed is None else shuffle_seed + 1)
    try:
        held_ok = [e for e in (sel.held_entry(g) for g in held) if e is not None]
        pick_ok = [e for e in (sel.pick_entry(g) for g in pick) if e is not None]
    except BudgetExhausted:
        return [], sel.report
    pairs = [CandidatePair(a, b) for a in held_ok for b in pick_ok if sel.pair_ok(a, b)]
    sel.report.pairs = len(pairs)
    return pairs, sel.report
