"""Built-in scene documents.

``two_box`` stacks one cube on another. ``set1`` is a branched base with
two square rings slid onto its pegs (90 degree threshold). ``set2`` is a
plate with blocks set on top (175 degree threshold). The base parts of
both sets wait on a narrow pedestal, the way a fixture would present them. All return plain
JSON-ready dicts; pass them to :func:`ga_tamp.scene.scene_from_dict`.
"""

from __future__ import annotations

import math

from .kin import default_robot
from .scene import INITIAL_CLEARANCE, robot_to_dict

TABLE = {"extents": [0.9, 1.2, 0.04], "center": [0.45, 0.0, -0.02]}
REGION = {"min": [0.36, -0.05, 0.22], "max": [0.48, 0.05, 0.32]}
SET_GRIPPER = {"max_stroke": 0.08, "pad_width": 0.02, "pad_height": 0.02, "palm_depth": 0.04,
               "finger_thickness": 0.008, "finger_clearance": 0.002, "finger_length": 0.04}


def _base_doc(name):
    return {
        "name": name,
        "robot": robot_to_dict(default_robot()),
        "grippers": {"right": dict(SET_GRIPPER), "left": dict(SET_GRIPPER)},
        "table": dict(TABLE),
        "region": dict(REGION),
        "grasp": {"contact_samples_per_facet": 4, "roll_samples_per_contact": 8, "seed": 0},
    }


def _on_table(x, y, half_height, yaw_deg=0.0, lift=0.0):
    return {"position": [x, y, lift + half_height + INITIAL_CLEARANCE], "rpy_deg": [0.0, 0.0, yaw_deg]}


PEDESTAL_HEIGHT = 0.08


def _pedestal(x, y, size=0.03, height=PEDESTAL_HEIGHT):
    """A post narrower than the part on it, so side grasps keep the wrist off the table."""
    return {"box": [size, size, height], "pose": {"position": [x, y, height / 2]}}


def two_box(threshold_deg=175.0):
    doc = _base_doc("two-box")
    doc["objects"] = [
        {"id": "base", "mesh": {"box": [0.05, 0.05, 0.05]}, "initial_pose": _on_table(0.38, -0.3, 0.025)},
        {"id": "top", "mesh": {"box": [0.04, 0.04, 0.04]}, "initial_pose": _on_table(0.38, 0.3, 0.02)},
    ]
    doc["task"] = {"holding_arm": "right", "parts": [
        {"part": "base"},
        {"part": "top", "mate_pose": {"position": [0.0, 0.0, 0.045]}, "v_a": [0.0, 0.0, 1.0],
         "threshold_deg": threshold_deg, "mate_distance": 0.05},
    ]}
    return doc


RING = {"outer": 0.05, "inner": 0.03, "thickness": 0.02}
HUB = 0.04
PEG = 0.016


def set1(threshold_deg=90.0, rings=2):
    """Hub with a vertical peg and a 45 degree peg; rings slide onto the pegs.

    The hub is narrower than a ring so fingers pinching a seated ring's
    outer faces clear it. Ring 1 rests on the hub top; ring 2 is mated
    part way down the slanted peg.
    """
    c = math.sqrt(0.5)
    h = HUB / 2
    doc = _base_doc("set1-branched")
    base = {"compound": [
        {"box": [HUB, HUB, HUB]},
        {"box": [PEG, PEG, 0.07], "pose": {"position": [0.0, 0.0, h + 0.035]}},
        {"box": [PEG, PEG, 0.07], "pose": {"position": [h + 0.035 * c, 0.0, h + 0.035 * c],
                                            "rpy_deg": [0.0, 45.0, 0.0]}},
    ]}
    doc["obstacles"] = [_pedestal(0.4, -0.3)]
    doc["objects"] = [{"id": "base", "mesh": base, "initial_pose": _on_table(0.4, -0.3, h, lift=PEDESTAL_HEIGHT)}]
    mates = [
        ({"position": [0.0, 0.0, h + RING["thickness"] / 2]}, [0.0, 0.0, 1.0]),
        ({"position": [h + 0.045 * c, 0.0, h + 0.045 * c], "rpy_deg": [0.0, 45.0, 0.0]}, [c, 0.0, c]),
    ]
    parts = [{"part": "base"}]
    for k in range(rings):
        rid = f"ring{k + 1}"
        doc["objects"].append({"id": rid, "mesh": {"frame": dict(RING)},
                               "initial_pose": _on_table(0.32 + 0.12 * k, 0.3, RING["thickness"] / 2)})
        pose, va = mates[k]
        parts.append({"part": rid, "mate_pose": pose, "v_a": va, "threshold_deg": threshold_deg,
                      "mate_distance": 0.08})
    doc["task"] = {"holding_arm": "right", "parts": parts}
    return doc


def set2(threshold_deg=175.0, blocks=4, contact_samples=4):
    """Square plate with cubes placed on its top face, one per quadrant."""
    doc = _base_doc("set2-plate")
    doc["grasp"]["contact_samples_per_facet"] = contact_samples
    doc["obstacles"] = [_pedestal(0.4, -0.3)]
    doc["objects"] = [{"id": "plate", "mesh": {"box": [0.07, 0.07, 0.02]},
                       "initial_pose": _on_table(0.4, -0.3, 0.01, lift=PEDESTAL_HEIGHT)}]
    spots = [(0.022, 0.022), (-0.022, 0.022), (0.022, -0.022), (-0.022, -0.022)]
    parts = [{"part": "plate"}]
    for k in range(blocks):
        bid = f"block{k + 1}"
        x, y = spots[k % 4]
        doc["objects"].append({"id": bid, "mesh": {"box": [0.025, 0.025, 0.025]},
                               "initial_pose": _on_table(0.3 + 0.1 * (k % 2), 0.22 + 0.1 * (k // 2), 0.0125)})
        parts.append({"part": bid, "mate_pose": {"position": [x, y, 0.01 + 0.0125]}, "v_a": [0.0, 0.0, 1.0],
                      "threshold_deg": threshold_deg, "mate_distance": 0.05})
    doc["task"] = {"holding_arm": "right", "parts": parts}
    return doc


BUILTIN = {"two-box": two_box, "set1": set1, "set2": set2}
