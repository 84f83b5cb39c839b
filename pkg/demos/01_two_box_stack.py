"""Stack one cube on another and walk through what the planner produced.

    python demos/01_two_box_stack.py
"""

import math

import numpy as np

from ga_tamp import scenes
from ga_tamp.planfile import document_from_result, validate_plan
from ga_tamp.planner import PlannerParams, build_ga_spaces, plan_assembly
from ga_tamp.scene import scene_from_dict

scene = scene_from_dict(scenes.two_box(threshold_deg=175.0))
params = PlannerParams(positions=2, basis="octa", rolls=6)

# G-A spaces: grasps per (object, arm), and assembly poses that keep the
# top cube's assembly direction within 5 degrees of straight up
spaces = build_ga_spaces(scene, params)
for (oid, arm), grasps in sorted(spaces.grasps.items()):
    print(f"{oid:>5} / {arm:<5} {len(grasps):4d} grasps")
print(f"assembly poses: {spaces.unfiltered} sampled, {len(spaces.poses)} survive the gravity prefilter")

result = plan_assembly(scene, params, spaces)
print(f"\noutcome: {result.outcome} in {result.total_time:.2f} s, {result.rrt_calls} RRT calls")
for k, seg in enumerate(result.segments):
    print(f"  {k:2d} {seg.kind:<8} {seg.arm:<5} {len(seg.waypoints):3d} waypoints  {seg.duration:5.2f} s")

key = result.assembly_poses[0]
ap = next(p for p in spaces.poses if list(p.key) == key)
up = ap.rotation @ scene.task.parts[1].v_a
print(f"\nchosen pose {key}: assembly direction {math.degrees(math.acos(np.clip(up[2], -1, 1))):.2f} deg off vertical")
print("timings:", {k: round(v, 3) for k, v in result.timings.items() if v is not None})

# replay through forward kinematics at ten times the planning resolution
problems = validate_plan(document_from_result(result, scene, params), scene)
print("replay:", "clean" if not problems else problems)
