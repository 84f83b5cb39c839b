import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ga_tamp.errors import InvalidArgumentError
from ga_tamp.geom import ConvexShape, Pose, PosedShape, frame_from_z, rotation_log
from ga_tamp.kin import (Attachment, IKOptions, Joint, KinematicChain, default_arm, default_robot, ik,
                         CollisionModel, ik_error, robot_collides)
from oracles import fk_oracle, lp_intersects

ARM = default_arm("right")
ROBOT = default_robot()


def test_fk_pure_offsets():
    joints = [Joint(Pose((0, 0, 0.1 * (k + 1))), (0, 0, 1), -1, 1) for k in range(3)]
    chain = KinematicChain(joints, Pose((0, 0, 0.05)))
    p = chain.fk(np.zeros(3))
    assert np.allclose(p.pos, [0, 0, 0.65])
    assert np.allclose(p.rot, np.eye(3))


def test_fk_single_joint_quarter_turn():
    chain = KinematicChain([Joint(Pose(), (0, 0, 1), -4, 4)], Pose((1, 0, 0)))
    assert np.allclose(chain.fk([math.pi / 2]).pos, [0, 1, 0], atol=1e-12)


def test_fk_matches_matrix_product():
    rng = np.random.default_rng(1)
    for _ in range(50):
        q = ARM.random_config(rng)
        assert np.allclose(ARM.fk(q).matrix(), fk_oracle(ARM, q), atol=1e-12)


def test_fk_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        ARM.fk(np.zeros(5))


def test_joint_limits_validated():
    with pytest.raises(InvalidArgumentError):
        Joint(Pose(), (0, 0, 1), 1.0, 1.0)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(2)
    h = 1e-6
    for _ in range(20):
        q = ARM.random_config(rng)
        jac = ARM.jacobian(q)
        num = np.zeros_like(jac)
        for i in range(ARM.dof):
            dq = np.zeros(ARM.dof)
            dq[i] = h
            plus, minus = fk_oracle(ARM, q + dq), fk_oracle(ARM, q - dq)
            num[:3, i] = (plus[:3, 3] - minus[:3, 3]) / (2 * h)
            num[3:, i] = rotation_log(plus[:3, :3] @ minus[:3, :3].T) / (2 * h)
        rel = np.linalg.norm(jac - num) / np.linalg.norm(num)
        assert rel < 1e-5


def test_ik_fixed_point():
    q0 = ROBOT.home[:6]
    q = ik(ARM, ARM.fk(q0), seed_q=q0)
    assert np.array_equal(q, q0)


@pytest.mark.parametrize("side", ["right", "left"])
def test_ik_round_trip(side):
    chain = default_arm(side)
    rng = np.random.default_rng(3)
    ok = 0
    for i in range(100):
        q = chain.random_config(rng)
        target = chain.fk(q)
        sol = ik(chain, target, seed=i)
        if sol is not None:
            ep, er = ik_error(chain, sol, target)
            ok += ep <= 1e-4 and er <= 1e-3 and chain.within_limits(sol)
    assert ok >= 99


def test_ik_unreachable():
    far = Pose(ARM.fk(ROBOT.home[:6]).pos + [10.0, 0, 0])
    assert ik(ARM, far) is None


def test_ik_nan_target():
    with pytest.raises(InvalidArgumentError):
        ik(ARM, Pose((np.nan, 0, 0)))


def test_ik_deterministic():
    target = Pose((0.4, -0.2, 0.2), frame_from_z((0, 0, -1)))
    a = ik(ARM, target, seed=7)
    b = ik(ARM, target, seed=7)
    assert a is not None and np.array_equal(a, b)


def test_ik_respects_limits_with_tight_joint():
    joints = list(ARM.joints)
    joints[0] = Joint(joints[0].origin, joints[0].axis, -0.1, 0.1, "j1")
    chain = KinematicChain(joints, ARM.tool, ARM.base, name="tight")
    target = chain.fk(np.array([0.05, -0.8, 1.9, 0.2, 0.6, 0.1]))
    sol = ik(chain, target, opts=IKOptions(restarts=30))
    assert sol is not None and chain.within_limits(sol)
    # a position behind the shoulder needs a base yaw far outside the range
    sol = ik(chain, Pose((-0.2, 0.3, 0.6), target.rot), opts=IKOptions(restarts=5))
    assert sol is None or chain.within_limits(sol)


def test_home_is_free():
    assert not robot_collides(ROBOT, ROBOT.home, [])


def test_obstacle_at_home_tool():
    tool = ROBOT.hand_pose(ROBOT.home, "right")
    # wider than the open jaw, so the fingers touch it
    block = PosedShape(ConvexShape.box((0.1, 0.1, 0.1)), tool)
    assert robot_collides(ROBOT, ROBOT.home, [block])


def _all_arm_vertices(robot, q, arm):
    shapes, _ = robot.arm_shapes(q, arm)
    return [s.vertices for s in shapes]


def test_both_arms_same_point():
    target = Pose((0.45, 0.0, 0.25), frame_from_z((0, 0, -1)))
    qr = ik(ROBOT.chains["right"], target, seed_q=ROBOT.home[:6])
    ql = ik(ROBOT.chains["left"], target, seed_q=ROBOT.home[6:])
    assert qr is not None and ql is not None
    q = np.concatenate([qr, ql])
    oracle = any(lp_intersects(a, b) for a in _all_arm_vertices(ROBOT, q, "right")
                 for b in _all_arm_vertices(ROBOT, q, "left"))
    assert oracle
    assert robot_collides(ROBOT, q, [])


def test_attachment_hits_world_and_other_arm():
    hand = ROBOT.hand_pose(ROBOT.home, "right")
    cube = ConvexShape.box((0.04, 0.04, 0.04))
    att = Attachment.from_grasp([cube], Pose(), 0.04)
    assert not robot_collides(ROBOT, ROBOT.home, [], {"right": att})
    # a long rod held in the right hand reaches across to the left hand
    rod = ConvexShape.box((0.04, 1.2, 0.04))
    assert robot_collides(ROBOT, ROBOT.home, [], {"right": Attachment.from_grasp([rod], Pose(), 0.04)})
    floor = PosedShape(ConvexShape.box((0.1, 0.1, 0.1)), hand.translated((0.0, 0.0, -0.2)))
    long_down = Attachment([(ConvexShape.box((0.02, 0.02, 0.3)), Pose((0, 0, 0.15)))], 0.02)
    assert not robot_collides(ROBOT, ROBOT.home, [floor])
    assert robot_collides(ROBOT, ROBOT.home, [floor], {"right": long_down})


def test_attachment_pair_can_be_ignored():
    # two bars, one per hand, overlapping near y = 0 without reaching the other hand
    bar = ConvexShape.box((0.04, 0.2, 0.04))
    right = Attachment([(bar, Pose((0, 0.21, 0)))], 0.04)
    left = Attachment([(bar, Pose((0, -0.21, 0)))], 0.04)
    held = {"right": right, "left": left}
    assert robot_collides(ROBOT, ROBOT.home, [], held)
    assert not robot_collides(ROBOT, ROBOT.home, [], held, ignore_attachment_pair=True)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(-0.2, 0.7), st.floats(-0.6, 0.6), st.floats(0.0, 0.7),
                          st.floats(0.02, 0.2)), min_size=1, max_size=6),
       st.integers(0, 10_000))
def test_collision_monotone_in_world(boxes, seed):
    rng = np.random.default_rng(seed)
    q = ROBOT.home + rng.normal(0, 0.3, ROBOT.dof)
    q = np.clip(q, ROBOT.lower, ROBOT.upper)
    world = []
    prev = robot_collides(ROBOT, q, world)
    for x, y, z, s in boxes:
        world.append(PosedShape(ConvexShape.box((s, s, s)), Pose((x, y, z))))
        now = robot_collides(ROBOT, q, world)
        assert now or not prev
        prev = now


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.booleans())
def test_collision_model_matches_robot_collides(seed, ignore_pair):
    rng = np.random.default_rng(seed)
    world = [PosedShape(ConvexShape.box(rng.uniform(0.02, 0.15, 3)),
                        Pose(rng.uniform([0.2, -0.5, 0.0], [0.7, 0.5, 0.5])))
             for _ in range(rng.integers(0, 4))]
    cube = ConvexShape.box((0.04, 0.04, 0.04))
    atts = {"right": Attachment.from_grasp([cube], Pose(), 0.04)} if rng.random() < 0.5 else {}
    model = CollisionModel(ROBOT, world, atts, ignore_pair)
    for _ in range(25):
        q = rng.uniform(ROBOT.lower, ROBOT.upper)
        assert model.collides(q) == robot_collides(ROBOT, q, world, atts, ignore_pair)
