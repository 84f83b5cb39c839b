"""Small randomized two-part scenes for property tests."""

import numpy as np

from ga_tamp import scenes
from ga_tamp.scene import scene_from_dict


def random_small_scene(seed, contact_samples=1, rolls=4):
    """Base box on a pedestal on the right, a smaller box on the table on the left."""
    rng = np.random.default_rng(seed)
    doc = scenes._base_doc(f"random-{seed}")
    doc["grasp"].update(contact_samples_per_facet=contact_samples, roll_samples_per_contact=rolls)
    a = float(rng.uniform(0.035, 0.06))
    b = float(rng.uniform(0.025, min(a, 0.05)))
    lift = float(rng.uniform(0.04, 0.1))
    bx, by = float(rng.uniform(0.33, 0.45)), float(rng.uniform(-0.35, -0.22))
    tx, ty = float(rng.uniform(0.3, 0.45)), float(rng.uniform(0.22, 0.35))
    doc["obstacles"] = [scenes._pedestal(bx, by, size=0.02, height=lift)]
    doc["objects"] = [
        {"id": "base", "mesh": {"box": [a, a, a]}, "initial_pose": scenes._on_table(bx, by, a / 2, lift=lift)},
        {"id": "top", "mesh": {"box": [b, b, b]},
         "initial_pose": scenes._on_table(tx, ty, b / 2, yaw_deg=float(rng.uniform(-30, 30)))},
    ]
    lo = np.array([float(rng.uniform(0.34, 0.42)), float(rng.uniform(-0.06, 0.0)), float(rng.uniform(0.2, 0.28))])
    doc["region"] = {"min": lo.tolist(), "max": (lo + 0.05).tolist()}
    doc["task"] = {"holding_arm": "right", "parts": [
        {"part": "base"},
        {"part": "top", "mate_pose": {"position": [0.0, 0.0, (a + b) / 2]}, "v_a": [0.0, 0.0, 1.0],
         "threshold_deg": 0.0, "mate_distance": 0.05},
    ]}
    return scene_from_dict(doc)
