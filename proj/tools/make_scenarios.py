#!/usr/bin/env python3
"""Regenerates the shipped scenario files under scenarios/.

Two-corridor world: a long block splits the workspace into a short southern
corridor with no landmarks and a longer northern corridor whose floor and
ceiling carry a landmark grid. The start and goal areas are landmark-rich.
"""
import json
import math
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "scenarios"

WORKSPACE = {"lo": [0.0, 0.0, 0.0], "hi": [14.0, 7.0, 2.0]}
BLOCK = {"lo": [2.5, 1.5, 0.0], "hi": [11.5, 5.0, 2.0]}
START = {"position": [1.0, 0.75, 1.0], "yaw": 0.0}
GOAL = {"lo": [12.5, 0.25, 0.5], "hi": [13.5, 1.25, 1.5]}
SPACING = 0.5


def inside(p, box):
    return all(box["lo"][i] <= p[i] <= box["hi"][i] for i in range(3))


def grid(x0, x1, y0, y1):
    pts = []
    nx = int(round((x1 - x0) / SPACING))
    ny = int(round((y1 - y0) / SPACING))
    for i in range(nx + 1):
        for j in range(ny + 1):
            for z in (0.0, 2.0):
                p = [round(x0 + i * SPACING, 6), round(y0 + j * SPACING, 6), z]
                if not inside(p, BLOCK):
                    pts.append(p)
    return pts


def features():
    pts = grid(0.0, 2.0, 0.0, 7.0)      # start area
    pts += grid(12.0, 14.0, 0.0, 7.0)   # goal area
    pts += grid(2.5, 11.5, 5.5, 7.0)    # northern corridor
    return pts


def base(mode, sigma_imu=0.1):
    return {
        "mode": mode,
        "workspace": WORKSPACE,
        "obstacles": [BLOCK],
        "features": features(),
        "start": START,
        "goal": GOAL,
        "planner": {
            "n": 600,
            "r_n": 1.5,
            "epsilon": 0.5,
            "n_f": 12,
            "dt": 0.1,
            "nominal_speed": 1.0,
            "fov_half_angle": math.pi / 3,
            "max_range": 2.5,
        },
        "mc": {
            "trials": 1000,
            "delta_xhat": 0.25,
            "alpha": 0.05,
            "sigma_imu": sigma_imu,
            "sigma_vis": 0.05,
            "dt_sim": 0.02,
            "rng_seed": 7,
            "u_max": [10.0, 10.0, 10.0],
            "Q": [[1.0, 0.0], [0.0, 1.0]],
            "R": 1.0,
        },
    }


def heuristic_map():
    # Coarse drift-rate field: positive (drifting) in the southern corridor,
    # negative (relocalizing) where landmarks are plentiful.
    records = []
    for i in range(29):
        for j in range(15):
            x, y = 0.5 * i, 0.5 * j
            p = [x, y, 1.0]
            if inside(p, BLOCK):
                continue
            southern = BLOCK["lo"][0] <= x <= BLOCK["hi"][0] and y < BLOCK["lo"][1]
            records.append({"position": p, "velocity": [0.0, 0.0, 0.0], "yaw": 0.0,
                            "rate": 1.0 if southern else -1.0})
    return records


def write(name, doc):
    (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")


def main():
    OUT.mkdir(exist_ok=True)

    aware = base("verify")
    aware["planner"]["beta"] = 1.0
    write("two_corridor.json", aware)

    noisy = base("refine", sigma_imu=0.3)
    noisy["planner"]["beta_max"] = 12.0
    noisy["mc"]["max_iters"] = 8
    write("two_corridor_noisy.json", noisy)

    mapped = base("explore")
    mapped["planner"]["beta"] = 1.0
    mapped["heuristic"] = {"source": "map", "path": "two_corridor_rate_map.json",
                           "k_nn": 4, "w_yaw": 0.0}
    del mapped["mc"]
    write("two_corridor_map.json", mapped)
    write("two_corridor_rate_map.json", heuristic_map())

    # The goal lies within one simulation step of the start, so the plan is a
    # single dead-reckoning step and max_t |x_hat - x| = sigma_imu dt^2 |N(0, I)|.
    drift = {
        "mode": "verify",
        "workspace": {"lo": [0.0, 0.0, 0.0], "hi": [4.0, 2.0, 2.0]},
        "obstacles": [],
        "features": [],
        "start": {"position": [1.0, 1.0, 1.0], "yaw": 0.0},
        "goal": {"lo": [1.5, 0.9, 0.9], "hi": [1.7, 1.1, 1.1]},
        "planner": {"n": 60, "r_n": 1.0, "beta": "inf", "dt": 0.1, "nominal_speed": 1.0},
        "mc": {"trials": 20000, "delta_xhat": 0.4, "alpha": 0.5, "sigma_imu": 0.25,
               "sigma_vis": 0.05, "dt_sim": 1.0, "rng_seed": 11},
    }
    write("imu_drift.json", drift)


if __name__ == "__main__":
    main()
