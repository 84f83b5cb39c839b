"""Two rings on a branched hub: the finished part must never tip a ring off.

Each mated ring adds its assembly direction to the stability model, so
after the first ring every holding-arm configuration has to keep that
direction more than 90 degrees from gravity. With the hexahedron basis the
second ring often needs a different roll of the finished part, and the
reorientation is planned with both arms sampling.

    python demos/02_finished_part_stays_upright.py
"""

from ga_tamp import scenes
from ga_tamp.aspace import tilt_from_up_deg
from ga_tamp.planner import PlannerParams, plan_assembly, stability_model_after
from ga_tamp.scene import scene_from_dict

scene = scene_from_dict(scenes.set1(threshold_deg=90.0))
task = scene.task
robot, hold = scene.robot, task.holding_arm

for seed in range(5):
    result = plan_assembly(scene, PlannerParams(basis="hexa", seed=seed))
    turns = [s for s in result.segments if s.arm == "both"]
    print(f"seed {seed}: {result.outcome}, poses {result.assembly_poses}, {len(turns)} reorientation(s)")
    if turns:
        break

base_in_hand = None
mated = 0
smallest = {}
for seg in result.segments:
    if seg.kind == "GRIP" and seg.arm == hold:
        hand = robot.hand_pose(seg.waypoints[-1], hold)
        base_in_hand = hand.inverse() @ scene.objects[task.parts[0].part].initial_pose
    if seg.kind == "RELEASE":
        mated += 1
    if base_in_hand is None or mated == 0:
        continue
    model = stability_model_after(task, mated)
    for q in seg.waypoints:
        rot = robot.hand_pose(q, hold).rot @ base_in_hand.rot
        for i, d in enumerate(model.directions):
            ang = 180.0 - tilt_from_up_deg(rot, d)  # angle to gravity
            smallest[i] = min(smallest.get(i, 180.0), ang)

for i, ang in smallest.items():
    print(f"ring {i + 1}: smallest angle to gravity {ang:.1f} deg (threshold {task.parts[i + 1].threshold_deg})")
sl = robot.arm_slice(hold)
for s in turns:
    travel = abs(s.waypoints[1:, sl] - s.waypoints[:-1, sl]).sum()
    print(f"reorientation: {len(s.waypoints)} waypoints, holding arm travelled {travel:.2f} rad")
