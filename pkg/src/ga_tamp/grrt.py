"""Joint-space RRT whose validity test includes finished-part stability.

A configuration is valid when the robot (with whatever it holds) is
collision-free and every assembly direction of the held finished part,
rotated into the world, stays more than its threshold away from gravity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .aspace import directions_clear_of_gravity
from .errors import InvalidArgumentError
from .geom import Pose
from .kin import CollisionModel, DualArmRobot


@dataclass
class StabilityModel:
    """Assembly directions in the finished part's body frame, one threshold each."""

    directions: list = field(default_factory=list)
    thresholds: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.directions) != len(self.thresholds):
            raise InvalidArgumentError("one threshold per assembly direction")
        dirs = []
        for d in self.directions:
            d = np.asarray(d, dtype=float)
            n = np.linalg.norm(d)
            if not n > 0:
                raise InvalidArgumentError("assembly direction must be nonzero")
            dirs.append(d / n)
        self.directions = dirs
        for t in self.thresholds:
            if not 0.0 <= t <= 180.0:
                raise InvalidArgumentError("thresholds must lie in [0, 180] degrees")
        self.thresholds = [float(t) for t in self.thresholds]

    def extended(self, direction, threshold):
        return StabilityModel(self.directions + [direction], self.thresholds + [threshold])

    def __len__(self):
        return len(self.directions)


def gravity_stable(part_rotation, model: StabilityModel) -> bool:
    """All rotated directions make an angle with gravity strictly above their threshold."""
    return directions_clear_of_gravity(np.asarray(part_rotation), model.directions, model.thresholds)


# shipped defaults; CLI flags override them per run
RRT_DEFAULTS = json.loads(resources.files(__package__).joinpath("rrt_defaults.json").read_text())


@dataclass(frozen=True)
class RRTParams:
    step_size: float = float(RRT_DEFAULTS["step_size"])
    goal_bias: float = float(RRT_DEFAULTS["goal_bias"])
    max_iterations: int = int(RRT_DEFAULTS["max_iterations"])
    edge_resolution: float = float(RRT_DEFAULTS["edge_resolution"])
    seed: int = 0

    def __post_init__(self):
        if not self.step_size > 0:
            raise InvalidArgumentError("step_size must be positive")
        if not 0.0 <= self.goal_bias < 1.0:
            raise InvalidArgumentError("goal_bias must lie in [0, 1)")
        if not 0 < self.edge_resolution <= self.step_size:
            raise InvalidArgumentError("edge_resolution must lie in (0, step_size]")
        if self.max_iterations < 1:
            raise InvalidArgumentError("max_iterations must be positive")


@dataclass
class MotionContext:
    """What a configuration is checked against.

    ``hold_arm`` and ``part_in_hand`` locate the finished part (its base
    frame) relative to the holding hand; leave ``hold_arm`` None when no
    stability constraint applies. ``active`` lists the arms that move.
    """

    robot: DualArmRobot
    world: list = field(default_factory=list)
    attachments: dict = field(default_factory=dict)
    stability: StabilityModel = field(default_factory=StabilityModel)
    hold_arm: str | None = None
    part_in_hand: Pose | None = None
    active: tuple = ("right", "left")
    ignore_attachment_pair: bool = False
    _model: CollisionModel | None = field(default=None, init=False, repr=False, compare=False)

    def collision_model(self) -> CollisionModel:
        """Packed collision geometry, built on first use; rebuild the context after edits."""
        if self._model is None:
            self._model = CollisionModel(self.robot, self.world, self.attachments, self.ignore_attachment_pair)
        return self._model

    def active_mask(self):
        m = np.zeros(self.robot.dof, dtype=bool)
        for arm in self.active:
            m[self.robot.arm_slice(arm)] = True
        return m


def part_rotation(ctx: MotionContext, q):
    hand = ctx.robot.hand_pose(q, ctx.hold_arm)
    return hand.rot @ ctx.part_in_hand.rot


def node_valid(q, ctx: MotionContext) -> bool:
    if not ctx.robot.within_limits(q):
        return False
    if ctx.hold_arm is not None and len(ctx.stability):
        if not gravity_stable(part_rotation(ctx, q), ctx.stability):
            return False
    return not ctx.collision_model().collides(q)


def _steps(a, b, resolution):
    return max(1, int(math.ceil(np.max(np.abs(b - a)) / resolution - 1e-12)))


def edge_valid(a, b, ctx: MotionContext, resolution, check_end=True) -> bool:
    """Interior points at ``resolution`` (max joint change) plus optionally ``b``."""
    n = _steps(a, b, resolution)
    last = n + 1 if check_end else n
    for k in range(1, last):
        if not node_valid(a + (b - a) * (k / n), ctx):
            return False
    return True


@dataclass
class MotionPath:
    waypoints: np.ndarray  # (m, dof)
    arms: tuple
    resolution: float

    def length(self):
        if len(self.waypoints) < 2:
            return 0.0
        return float(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1).sum())


def _densify(a, b, step):
    n = _steps(a, b, step)
    return [a + (b - a) * (k / n) for k in range(1, n + 1)]


def plan_rrt(q_start, q_goal, ctx: MotionContext, params: RRTParams = None):
    """Single-tree RRT with goal bias; returns a MotionPath or None.

    When the goal is the sample, the tree keeps stepping toward it while
    edges stay valid (a greedy connect), which is what usually finishes
    the search in uncluttered scenes.
    """
    params = params or RRTParams()
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    mask = ctx.active_mask()
    if np.any(np.abs(q_start[~mask] - q_goal[~mask]) > 1e-12):
        raise InvalidArgumentError("start and goal differ in a frozen arm")
    if not node_valid(q_start, ctx):
        raise InvalidArgumentError("start configuration is invalid")
    if not node_valid(q_goal, ctx):
        raise InvalidArgumentError("goal configuration is invalid")
    if np.allclose(q_start, q_goal, atol=0.0, rtol=0.0):
        return MotionPath(q_start[None, :].copy(), tuple(ctx.active), params.edge_resolution)

    rng = np.random.default_rng(params.seed)
    lo, hi = ctx.robot.lower[mask], ctx.robot.upper[mask]
    nodes = np.empty((min(params.max_iterations, 4096) + 1, int(mask.sum())))
    full = [q_start]
    parents = [-1]
    nodes[0] = q_start[mask]
    count = 1
    goal_a = q_goal[mask]
    step = params.step_size

    def add(q_new, parent):
        nonlocal nodes, count
        if count == len(nodes):
            nodes = np.vstack([nodes, np.empty_like(nodes)])
        nodes[count] = q_new[mask]
        full.append(q_new)
        parents.append(parent)
        count += 1
        return count - 1

    def finish(idx):
        path = [q_goal]
        while idx >= 0:
            path.append(full[idx])
            idx = parents[idx]
        wp = np.array(path[::-1])
        return MotionPath(wp, tuple(ctx.active), params.edge_resolution)

    for _ in range(params.max_iterations):
        to_goal = rng.random() < params.goal_bias
        sample = goal_a if to_goal else rng.uniform(lo, hi)
        d = np.linalg.norm(nodes[:count] - sample, axis=1)
        near = int(np.argmin(d))
        while True:
            base = full[near]
            diff = sample - nodes[near]
            dist = float(np.linalg.norm(diff))
            if dist <= step:
                if to_goal:
                    if edge_valid(base, q_goal, ctx, params.edge_resolution, check_end=False):
                        return finish(near)
                    break
                target = sample
            else:
                target = nodes[near] + diff * (step / dist)
            q_new = base.copy()
            q_new[mask] = target
            if not edge_valid(base, q_new, ctx, params.edge_resolution):
                break
            near = add(q_new, near)
            if np.linalg.norm(goal_a - target) <= step:
                if edge_valid(q_new, q_goal, ctx, params.edge_resolution, check_end=False):
                    return finish(near)
            if not to_goal:
                break
    return None


def path_validate(path: MotionPath, ctx: MotionContext, resolution) -> bool:
    wp = path.waypoints
    if len(wp) == 0 or not node_valid(wp[0], ctx):
        return False
    for a, b in zip(wp[:-1], wp[1:]):
        if not edge_valid(a, b, ctx, resolution):
            return False
    return True


def smooth_path(path: MotionPath, ctx: MotionContext, attempts=50, seed=0, step_size=0.15):
    """Random shortcutting; keeps waypoint spacing within ``step_size`` per joint."""
    wp = [w for w in path.waypoints]
    if attempts <= 0 or len(wp) < 3:
        return MotionPath(np.array(wp), path.arms, path.resolution)
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        if len(wp) < 3:
            break
        i, j = sorted(rng.choice(len(wp), size=2, replace=False))
        if j - i < 2:
            continue
        if not edge_valid(wp[i], wp[j], ctx, path.resolution):
            continue
        seg = _densify(wp[i], wp[j], step_size)
        old = sum(np.linalg.norm(wp[k + 1] - wp[k]) for k in range(i, j))
        new = np.linalg.norm(wp[j] - wp[i])
        if new < old - 1e-12:
            wp = wp[:i + 1] + seg[:-1] + wp[j:]
    return MotionPath(np.array(wp), path.arms, path.resolution)


def linear_path(q_start, q_goal, ctx: MotionContext, step_size=0.15, resolution=0.03):
    """Straight joint-space segment if valid, else None."""
    q_start = np.asarray(q_start, dtype=float)
    q_goal = np.asarray(q_goal, dtype=float)
    if not edge_valid(q_start, q_goal, ctx, resolution):
        return None
    return MotionPath(np.array([q_start] + _densify(q_start, q_goal, step_size)), tuple(ctx.active), resolution)
