"""Serial-chain kinematics for a dual-arm robot.

Forward kinematics is a product of 4x4 transforms; inverse kinematics is
damped least squares on the 6-D pose error with per-iteration joint clamping
and seeded random restarts. The inner loop is compiled with numba because
grasp selection runs it thousands of times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import InvalidArgumentError
from .geom import CONTACT_TOL, ConvexShape, Pose, PosedShape, any_collision, normalize, pose_error
from .geom.collision import gjk_distance_below, posed_vertices
from .grasp import Gripper

POS_TOL = 1e-4
ROT_TOL = 1e-3


@dataclass(frozen=True)
class Joint:
    """Revolute joint: fixed transform from the previous frame, then rotation about ``axis``."""

    origin: Pose
    axis: np.ndarray
    lo: float
    hi: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "axis", normalize(self.axis))
        if not self.lo < self.hi:
            raise InvalidArgumentError(f"joint {self.name!r}: lower limit must be below upper limit")


@dataclass(frozen=True)
class IKOptions:
    damping: float = 0.05
    max_iterations: int = 200
    restarts: int = 30
    pos_tol: float = POS_TOL
    rot_tol: float = ROT_TOL
    stall_iterations: int = 10
    max_step: float = 0.3

    def __post_init__(self):
        if self.damping <= 0 or self.max_iterations < 1 or self.restarts < 0:
            raise InvalidArgumentError("IK options out of range")


class KinematicChain:
    """Ordered revolute joints on a base pose, ending in a tool frame.

    ``link_shapes`` maps a joint index to convex shapes expressed in the
    frame just after that joint's rotation.
    """

    def __init__(self, joints, tool=None, base=None, link_shapes=None, name=""):
        self.joints = tuple(joints)
        if not self.joints:
            raise InvalidArgumentError("chain needs at least one joint")
        self.tool = tool if tool is not None else Pose()
        self.base = base if base is not None else Pose()
        self.link_shapes = {int(k): list(v) for k, v in (link_shapes or {}).items()}
        self.name = name
        self.lower = np.array([j.lo for j in self.joints])
        self.upper = np.array([j.hi for j in self.joints])
        self._origins = np.array([j.origin.matrix() for j in self.joints])
        self._axes = np.array([j.axis for j in self.joints])
        self._base = self.base.matrix()
        self._tool = self.tool.matrix()
        # generous reach bound: every offset laid end to end
        self.reach = float(sum(np.linalg.norm(j.origin.pos) for j in self.joints[1:])
                           + np.linalg.norm(self.tool.pos))
        self._shoulder = self.base.apply(self.joints[0].origin.pos)

    @property
    def dof(self):
        return len(self.joints)

    def _check(self, q):
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise InvalidArgumentError(f"{self.name or 'chain'} expects {self.dof} joint values, got {q.shape}")
        return q

    def within_limits(self, q, eps=1e-12) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.lower - eps) and np.all(q <= self.upper + eps))

    def clamp(self, q):
        return np.clip(q, self.lower, self.upper)

    def frames(self, q):
        """World 4x4 frames after each joint, plus the tool frame last."""
        q = self._check(q)
        return _fk_frames(self._base, self._origins, self._axes, self._tool, q)

    def fk(self, q) -> Pose:
        return Pose.from_matrix(self.frames(q)[-1])

    def link_poses(self, q):
        return [Pose.from_matrix(m) for m in self.frames(q)[:-1]]

    def jacobian(self, q):
        """Geometric 6xN Jacobian of the tool frame (linear rows first)."""
        return _jacobian(self.frames(q), self._axes)

    def posed_link_shapes(self, q, frames=None):
        frames = self.frames(q) if frames is None else frames
        out = []
        for k, shapes in self.link_shapes.items():
            p = Pose.from_matrix(frames[k])
            out += [PosedShape(s, p, (self.name, k)) for s in shapes]
        return out

    def random_config(self, rng):
        return rng.uniform(self.lower, self.upper)


def ik(chain: KinematicChain, target: Pose, seed_q=None, opts: IKOptions = None, seed: int = 0):
    """DLS inverse kinematics; returns joint angles or None.

    The first run starts at ``seed_q`` (the joint-range midpoint if absent);
    restarts draw uniformly within limits from ``default_rng(seed)``.
    """
    opts = opts or IKOptions()
    if not (np.all(np.isfinite(target.pos)) and np.all(np.isfinite(target.rot))):
        raise InvalidArgumentError("IK target must be finite")
    if np.linalg.norm(target.pos - chain._shoulder) > chain.reach + 1e-9:
        return None
    q0 = (chain.lower + chain.upper) / 2.0 if seed_q is None else chain.clamp(chain._check(seed_q))
    rng = np.random.default_rng(seed)
    starts = np.vstack([q0[None, :], rng.uniform(chain.lower, chain.upper, (opts.restarts, chain.dof))])
    q, ok = _dls(chain._base, chain._origins, chain._axes, chain._tool, target.matrix(),
                 chain.lower, chain.upper, starts, opts.damping, opts.max_iterations,
                 opts.pos_tol, opts.rot_tol, opts.stall_iterations, opts.max_step)
    if not ok:
        return None
    return q


def refine(chain: KinematicChain, target: Pose, q, tol=1e-9, iterations=50):
    """Polish an IK solution to a tight tolerance from ``q``; None if it drifts off."""
    starts = np.asarray(q, dtype=float)[None, :].copy()
    out, ok = _dls(chain._base, chain._origins, chain._axes, chain._tool, target.matrix(),
                   chain.lower, chain.upper, starts, 0.05, iterations, tol, tol, iterations, 0.3)
    return out if ok else None


def ik_error(chain: KinematicChain, q, target: Pose):
    return pose_error(chain.fk(q), target)


# ---------------------------------------------------------------- numba kernels


@njit(cache=True)
def _axis_rot(axis, angle):
    x, y, z = axis[0], axis[1], axis[2]
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    m = np.eye(4)
    m[0, 0] = c + x * x * t
    m[0, 1] = x * y * t - z * s
    m[0, 2] = x * z * t + y * s
    m[1, 0] = y * x * t + z * s
    m[1, 1] = c + y * y * t
    m[1, 2] = y * z * t - x * s
    m[2, 0] = z * x * t - y * s
    m[2, 1] = z * y * t + x * s
    m[2, 2] = c + z * z * t
    return m


@njit(cache=True)
def _fk_frames(base, origins, axes, tool, q):
    n = q.shape[0]
    out = np.empty((n + 1, 4, 4))
    m = base.copy()
    for i in range(n):
        m = m @ origins[i] @ _axis_rot(axes[i], q[i])
        out[i] = m
    out[n] = m @ tool
    return out


@njit(cache=True)
def _jacobian(frames, axes):
    n = frames.shape[0] - 1
    p = frames[n, :3, 3]
    jac = np.zeros((6, n))
    for i in range(n):
        rot = np.ascontiguousarray(frames[i, :3, :3])
        w = rot @ axes[i]
        r = p - frames[i, :3, 3]
        jac[0, i] = w[1] * r[2] - w[2] * r[1]
        jac[1, i] = w[2] * r[0] - w[0] * r[2]
        jac[2, i] = w[0] * r[1] - w[1] * r[0]
        jac[3, i] = w[0]
        jac[4, i] = w[1]
        jac[5, i] = w[2]
    return jac


@njit(cache=True)
def _rot_log(r):
    c = (r[0, 0] + r[1, 1] + r[2, 2] - 1.0) / 2.0
    w = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    s = 0.5 * math.sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
    theta = math.atan2(s, c)
    if theta < 1e-7:
        return 0.5 * w
    if math.pi - theta < 1e-4:
        b = (r + np.eye(3)) / 2.0
        i = 0
        for k in range(1, 3):
            if b[k, k] > b[i, i]:
                i = k
        axis = b[:, i] / math.sqrt(max(b[i, i], 1e-300))
        axis = axis / math.sqrt(axis[0] ** 2 + axis[1] ** 2 + axis[2] ** 2)
        if axis[0] * w[0] + axis[1] * w[1] + axis[2] * w[2] < 0.0:
            axis = -axis
        return axis * theta
    return w * (theta / (2.0 * s))


@njit(cache=True)
def _pose_err(cur, target):
    e = np.empty(6)
    e[:3] = target[:3, 3] - cur[:3, 3]
    e[3:] = _rot_log(np.ascontiguousarray(target[:3, :3]) @ np.ascontiguousarray(cur[:3, :3].T))
    return e


@njit(cache=True)
def _err_norms(base, origins, axes, tool, target, q):
    frames = _fk_frames(base, origins, axes, tool, q)
    e = _pose_err(np.ascontiguousarray(frames[q.shape[0]]), target)
    ep = math.sqrt(e[0] ** 2 + e[1] ** 2 + e[2] ** 2)
    er = math.sqrt(e[3] ** 2 + e[4] ** 2 + e[5] ** 2)
    return frames, e, ep, er


@njit(cache=True)
def _dls(base, origins, axes, tool, target, lo, hi, starts, lam, iters, pos_tol, rot_tol,
         stall_limit, max_step):
    n = lo.shape[0]
    lam2 = lam * lam
    for s in range(starts.shape[0]):
        q = np.minimum(np.maximum(starts[s], lo), hi)
        frames, e, ep, er = _err_norms(base, origins, axes, tool, target, q)
        stall = 0
        for it in range(iters):
            if ep <= pos_tol and er <= rot_tol:
                return q, True
            jac = _jacobian(frames, axes)
            # damping fades with the error so convergence stays fast near singular targets
            damp = lam2 * min(1.0, (ep + er) ** 2)
            # joints pinned at a limit and pushed outward drop out of the solve
            for _ in range(2):
                a = jac @ jac.T
                for k in range(6):
                    a[k, k] += damp
                dq = jac.T @ np.linalg.solve(a, e)
                pinned = False
                for k in range(n):
                    if (q[k] <= lo[k] and dq[k] < 0.0) or (q[k] >= hi[k] and dq[k] > 0.0):
                        if jac[3, k] != 0.0 or jac[4, k] != 0.0 or jac[5, k] != 0.0:
                            jac[:, k] = 0.0
                            pinned = True
                if not pinned:
                    break
            m = np.max(np.abs(dq))
            if m > max_step:
                dq *= max_step / m
            # backtrack until the combined error drops
            err = ep + er
            alpha = 1.0
            accepted = False
            clamped = False
            for _ in range(6):
                qn = q + alpha * dq
                clamped = False
                for k in range(n):
                    if qn[k] < lo[k]:
                        qn[k] = lo[k]
                        clamped = True
                    elif qn[k] > hi[k]:
                        qn[k] = hi[k]
                        clamped = True
                fn, en, epn, ern = _err_norms(base, origins, axes, tool, target, qn)
                if epn + ern < err:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                break  # local minimum: restart
            q, frames, e, ep, er = qn, fn, en, epn, ern
            if clamped and ep + er > err * (1.0 - 1e-3):
                stall += 1
                if stall >= stall_limit:
                    break
            else:
                stall = 0
        if ep <= pos_tol and er <= rot_tol:
            return q, True
    return starts[0].copy(), False


# ---------------------------------------------------------------- dual arm


@dataclass
class Attachment:
    """Convex pieces rigidly held by a hand, posed in the hand (tool) frame."""

    shapes: list = field(default_factory=list)  # [(ConvexShape, Pose in hand frame)]
    jaw_width: float = 0.0

    def posed(self, hand_pose: Pose, tag=None):
        return [PosedShape(s, hand_pose @ p, tag) for s, p in self.shapes]

    @classmethod
    def from_grasp(cls, hull_pieces, hand_pose_in_object: Pose, jaw_width, object_pose_in_part=None):
        """Object pieces as seen from the hand that grasps it."""
        obj_in_hand = hand_pose_in_object.inverse()
        if object_pose_in_part is not None:
            obj_in_hand = obj_in_hand @ object_pose_in_part
        return cls([(s, obj_in_hand) for s in hull_pieces], jaw_width)


class DualArmRobot:
    """Right and left chains with grippers. Dual configs are ``concat(q_right, q_left)``."""

    ARMS = ("right", "left")

    def __init__(self, right: KinematicChain, left: KinematicChain, right_gripper=None,
                 left_gripper=None, home=None, fixed_shapes=()):
        for c in (right, left):
            if c.dof < 6:
                raise InvalidArgumentError("each arm needs at least 6 joints for full pose IK")
        self.chains = {"right": right, "left": left}
        self.grippers = {"right": right_gripper or Gripper(), "left": left_gripper or Gripper()}
        self.fixed_shapes = list(fixed_shapes)  # robot-owned world shapes, e.g. torso
        self.nr = right.dof
        self.nl = left.dof
        self.lower = np.concatenate([right.lower, left.lower])
        self.upper = np.concatenate([right.upper, left.upper])
        self.home = np.zeros(self.dof) if home is None else np.asarray(home, dtype=float)
        if self.home.shape != (self.dof,):
            raise InvalidArgumentError("home config has wrong length")

    @property
    def dof(self):
        return self.nr + self.nl

    def arm_slice(self, arm):
        return slice(0, self.nr) if arm == "right" else slice(self.nr, self.dof)

    def split(self, q):
        q = np.asarray(q, dtype=float)
        return q[: self.nr], q[self.nr:]

    def join(self, qr, ql):
        return np.concatenate([qr, ql])

    def with_arm(self, q, arm, qa):
        q = np.array(q, dtype=float)
        q[self.arm_slice(arm)] = qa
        return q

    def hand_pose(self, q, arm) -> Pose:
        return self.chains[arm].fk(np.asarray(q, dtype=float)[self.arm_slice(arm)])

    def arm_shapes(self, q, arm, jaw_width=None, frames=None):
        """Posed link shapes plus the hand (palm and fingers) of one arm."""
        chain = self.chains[arm]
        qa = np.asarray(q, dtype=float)[self.arm_slice(arm)]
        frames = chain.frames(qa) if frames is None else frames
        g = self.grippers[arm]
        jw = g.max_stroke if jaw_width is None else jaw_width
        tool = Pose.from_matrix(frames[-1])
        hand = [PosedShape(s, tool, (arm, "hand")) for s in g.collision_shapes(jw)]
        return chain.posed_link_shapes(qa, frames) + hand, tool

    def within_limits(self, q) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.lower - 1e-12) and np.all(q <= self.upper + 1e-12))


def arm_collides(robot: DualArmRobot, q, arm, world=(), attachment=None) -> bool:
    """One arm (links, hand, held object) against world shapes; the other arm is ignored."""
    shapes, tool = robot.arm_shapes(q, arm, attachment.jaw_width if attachment is not None else None)
    world = list(world) + robot.fixed_shapes
    if any_collision(shapes, world):
        return True
    return attachment is not None and any_collision(attachment.posed(tool, (arm, "held")), world)


def robot_collides(robot: DualArmRobot, q, world=(), attachments=None, ignore_attachment_pair=False) -> bool:
    """Whole-robot collision test.

    ``world`` holds PosedShapes; ``attachments`` maps arm name to an
    :class:`Attachment` (or None). Within one arm, links, hand and the held
    object are not tested against each other.
    """
    attachments = attachments or {}
    world = list(world) + robot.fixed_shapes
    # groups: 0 world, 1 right arm, 2 left arm, 3 right held, 4 left held
    shapes = list(world)
    label = [0] * len(world)
    for g, arm in ((1, "right"), (2, "left")):
        att = attachments.get(arm)
        arm_shapes, tool = robot.arm_shapes(q, arm, att.jaw_width if att is not None else None)
        shapes += arm_shapes
        label += [g] * len(arm_shapes)
        if att is not None:
            held = att.posed(tool, (arm, "held"))
            shapes += held
            label += [g + 2] * len(held)
    label = np.array(label)
    allowed = _ALLOWED_IGNORE if ignore_attachment_pair else _ALLOWED
    return _any_pair_hit(shapes, allowed[label[:, None], label[None, :]])


def _group_table(pairs):
    t = np.zeros((5, 5), dtype=bool)
    for a, b in pairs:
        t[a, b] = t[b, a] = True
    return t


_PAIRS = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 2), (4, 1)]
_ALLOWED_IGNORE = _group_table(_PAIRS)
_ALLOWED = _group_table(_PAIRS + [(3, 4)])


def _any_pair_hit(shapes, allowed, tol=CONTACT_TOL):
    c = np.array([s.center for s in shapes])
    r = np.array([s.radius for s in shapes])
    d2 = ((c[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    reach = r[:, None] + r[None, :] + tol
    cand = np.triu(allowed & (d2 <= reach * reach), 1)
    for i, j in zip(*np.nonzero(cand)):
        if gjk_distance_below(shapes[i].vertices, shapes[j].vertices, tol):
            return True
    return False


class CollisionModel:
    """Array form of :func:`robot_collides` for a fixed world and fixed attachments.

    Everything that does not depend on the configuration (world vertices,
    link and hand geometry in their own frames, held parts in the hand
    frame) is packed once; :meth:`collides` then runs forward kinematics
    and a single compiled pass over all allowed pairs.
    """

    def __init__(self, robot: DualArmRobot, world=(), attachments=None, ignore_attachment_pair=False):
        self.robot = robot
        attachments = attachments or {}
        world = list(world) + robot.fixed_shapes
        self._wv, self._woff, self._wc, self._wr = _pack([w.vertices for w in world],
                                                         [w.center for w in world], [w.radius for w in world])
        local, centers, radii, slots, groups = [], [], [], [], []
        slot0 = 0
        for g, arm in ((1, "right"), (2, "left")):
            chain = robot.chains[arm]
            tool_slot = slot0 + chain.dof
            for k, shapes in chain.link_shapes.items():
                for sh in shapes:
                    local.append(sh.vertices), centers.append(sh.center), radii.append(sh.radius)
                    slots.append(slot0 + k), groups.append(g)
            att = attachments.get(arm)
            jw = att.jaw_width if att is not None else robot.grippers[arm].max_stroke
            for sh in robot.grippers[arm].collision_shapes(jw):
                local.append(sh.vertices), centers.append(sh.center), radii.append(sh.radius)
                slots.append(tool_slot), groups.append(g)
            if att is not None:
                for sh, p in att.shapes:
                    local.append(posed_vertices(sh, p)), centers.append(p.rot @ sh.center + p.pos)
                    radii.append(sh.radius), slots.append(tool_slot), groups.append(g + 2)
            slot0 = tool_slot + 1
        self._lv, self._moff, self._lc, self._lr = _pack(local, centers, radii)
        self._slot = np.array(slots, dtype=np.int64)
        self._group = np.array(groups, dtype=np.int64)
        self._allowed = _ALLOWED_IGNORE if ignore_attachment_pair else _ALLOWED

    def frames(self, q):
        r, l = self.robot.chains["right"], self.robot.chains["left"]
        qr, ql = self.robot.split(q)
        return np.concatenate([r.frames(qr), l.frames(ql)])

    def collides(self, q) -> bool:
        return bool(_model_hit(self.frames(q), self._lv, self._moff, self._lc, self._lr, self._slot,
                               self._group, self._wv, self._woff, self._wc, self._wr, self._allowed,
                               CONTACT_TOL))


def _pack(vertex_arrays, centers, radii):
    off = np.zeros(len(vertex_arrays) + 1, dtype=np.int64)
    for i, v in enumerate(vertex_arrays):
        off[i + 1] = off[i] + len(v)
    verts = np.ascontiguousarray(np.concatenate(vertex_arrays)) if vertex_arrays else np.zeros((0, 3))
    return (verts, off, np.array(centers, dtype=float).reshape(-1, 3),
            np.array(radii, dtype=float))


@njit(cache=True)
def _model_hit(frames, lv, moff, lc, lr, slot, group, wv, woff, wc, wr, allowed, tol):
    n = len(slot)
    mv = np.empty_like(lv)
    mc = np.empty_like(lc)
    for s in range(n):
        f = frames[slot[s]]
        for i in range(moff[s], moff[s + 1]):
            for r in range(3):
                mv[i, r] = f[r, 0] * lv[i, 0] + f[r, 1] * lv[i, 1] + f[r, 2] * lv[i, 2] + f[r, 3]
        for r in range(3):
            mc[s, r] = f[r, 0] * lc[s, 0] + f[r, 1] * lc[s, 1] + f[r, 2] * lc[s, 2] + f[r, 3]
    for s in range(n):
        if not allowed[group[s], 0]:
            continue
        a = mv[moff[s]:moff[s + 1]]
        for w in range(len(wr)):
            reach = lr[s] + wr[w] + tol
            d0 = mc[s, 0] - wc[w, 0]
            d1 = mc[s, 1] - wc[w, 1]
            d2 = mc[s, 2] - wc[w, 2]
            if d0 * d0 + d1 * d1 + d2 * d2 > reach * reach:
                continue
            if gjk_distance_below(a, wv[woff[w]:woff[w + 1]], tol):
                return True
    for s in range(n):
        a = mv[moff[s]:moff[s + 1]]
        for t in range(s + 1, n):
            if not allowed[group[s], group[t]]:
                continue
            reach = lr[s] + lr[t] + tol
            d0 = mc[s, 0] - mc[t, 0]
            d1 = mc[s, 1] - mc[t, 1]
            d2 = mc[s, 2] - mc[t, 2]
            if d0 * d0 + d1 * d1 + d2 * d2 > reach * reach:
                continue
            if gjk_distance_below(a, mv[moff[t]:moff[t + 1]], tol):
                return True
    return False


# ---------------------------------------------------------------- default model


def default_arm(side: str, shoulder=(0.0, 0.25, 0.45), upper=0.32, forearm=(0.1, 0.2),
                wrist=0.05, tool=0.12) -> KinematicChain:
    """6-DOF elbow arm with a spherical wrist, pointing along +x at zero.

    Axes: z (yaw), y (shoulder pitch), y (elbow), x (forearm roll),
    y (wrist pitch), x (flange roll). The tool z axis is the last link's x,
    so the gripper approaches along the arm's pointing direction.
    """
    sy = shoulder[1] if side == "left" else -shoulder[1]
    d = np.radians
    ex, ey, ez = np.eye(3)
    joints = [
        Joint(Pose((0.0, 0.0, 0.0)), ez, -d(170), d(170), "j1"),
        Joint(Pose((0.0, 0.0, 0.0)), ey, -d(120), d(120), "j2"),
        Joint(Pose((upper, 0.0, 0.0)), ey, -d(150), d(150), "j3"),
        Joint(Pose((forearm[0], 0.0, 0.0)), ex, -d(175), d(175), "j4"),
        Joint(Pose((forearm[1], 0.0, 0.0)), ey, -d(120), d(120), "j5"),
        Joint(Pose((wrist, 0.0, 0.0)), ex, -d(175), d(175), "j6"),
    ]
    links = {
        0: [ConvexShape.box((0.08, 0.08, 0.08))],
        1: [ConvexShape.box((upper - 0.1, 0.06, 0.06), (upper / 2.0, 0.0, 0.0))],
        2: [ConvexShape.box((forearm[0] + forearm[1] - 0.1, 0.05, 0.05),
                            ((forearm[0] + forearm[1]) / 2.0, 0.0, 0.0))],
        4: [ConvexShape.box((0.07, 0.05, 0.05), (0.055, 0.0, 0.0))],
    }
    tool_pose = Pose.from_xyz_rpy((tool, 0.0, 0.0), (0.0, math.pi / 2.0, 0.0))
    return KinematicChain(joints, tool_pose, Pose((shoulder[0], sy, shoulder[2])), links, side)


DEFAULT_HOME_ARM = np.array([0.165, -1.066, 2.116, 0.0, 0.521, 0.165])  # hand 0.3 m up, pointing down


def default_robot(gripper: Gripper = None, torso=True) -> DualArmRobot:
    right = default_arm("right")
    left = default_arm("left")
    mirror = np.array([-1.0, 1.0, 1.0, -1.0, 1.0, -1.0])
    home = np.concatenate([DEFAULT_HOME_ARM * mirror, DEFAULT_HOME_ARM])
    fixed = []
    if torso:
        body = ConvexShape.box((0.2, 0.3, 0.6), (-0.17, 0.0, 0.3))
        fixed.append(PosedShape(body, Pose(), ("robot", "torso")))
    return DualArmRobot(right, left, gripper, gripper, home, fixed)
