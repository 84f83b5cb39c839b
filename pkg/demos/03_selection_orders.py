"""Depth-first versus exhaustive grasp-pair selection at one assembly pose.

Order 1 stops at the first collision-free, IK-feasible pair; order 2
filters every grasp of both parts and then pairs the survivors. The pair
order 1 finds is always the head of order 2's list.

    python demos/03_selection_orders.py
"""

from ga_tamp import scenes
from ga_tamp.planner import PlannerParams, build_ga_spaces, first_pair_problem
from ga_tamp.scene import scene_from_dict
from ga_tamp.select import STAGES, select_order1, select_order2

scene = scene_from_dict(scenes.set2(contact_samples=8))
params = PlannerParams(positions=1)
spaces = build_ga_spaces(scene, params)
problem = first_pair_problem(scene, spaces, params)
print(f"{len(problem.held_grasps)} plate grasps x {len(problem.pick_grasps)} block grasps")

for ap in spaces.poses[:3]:
    pose = ap.pose()
    first, r1 = select_order1(problem, pose)
    pairs, r2 = select_order2(problem, pose)
    print(f"\npose {ap.key}")
    print(f"  order 1: pair {first.ids if first else None}, {r1.ik_attempts} IK calls, "
          f"CD {r1.times['cd'] * 1e3:.0f} ms, IK {r1.times['ik'] * 1e3:.0f} ms")
    print(f"  order 2: {len(pairs)} pairs, {r2.ik_attempts} IK calls, "
          f"CD {r2.times['cd'] * 1e3:.0f} ms, IK {r2.times['ik'] * 1e3:.0f} ms")
    print("  plate survivors by stage:", [r2.held[s] for s in STAGES])
    print("  block survivors by stage:", [r2.pick[s] for s in STAGES])
    if first is not None:
        assert pairs and pairs[0].ids == first.ids
