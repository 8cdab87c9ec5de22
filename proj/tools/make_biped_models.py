#!/usr/bin/env python3
"""Regenerates models/biped_rcj.yaml and models/biped_rcj_collocated.yaml.

Link inertias are simple solids. The collocated variant moves the 2 kg knee
motor of each leg from the thigh (near the hip) to the top of the shin as a
point mass, with exact parallel-axis bookkeeping.
"""
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent


def box(m, x, y, z):
    return np.diag([m * (y * y + z * z) / 12, m * (x * x + z * z) / 12, m * (x * x + y * y) / 12])


def rod_z(m, length, radius):
    t = m * (3 * radius**2 + length**2) / 12
    return np.diag([t, t, m * radius**2 / 2])


def cyl_y(m, radius, height):
    t = m * (3 * radius**2 + height**2) / 12
    return np.diag([t, m * radius**2 / 2, t])


def point(m, p):
    p = np.asarray(p, float)
    return m * (p @ p * np.eye(3) - np.outer(p, p))


def combine(parts):
    """parts: (mass, com, inertia about com) -> combined (mass, com, inertia about com)."""
    m = sum(p[0] for p in parts)
    c = sum(p[0] * np.asarray(p[1], float) for p in parts) / m
    inertia = sum(p[2] + point(p[0], np.asarray(p[1], float) - c) for p in parts)
    return m, c, inertia


def transfer(link_from, p_from, link_to, p_to, dm):
    def shift(link, p, d):
        m, c, inertia = link
        about_origin = inertia + point(m, c)
        m2 = m + d
        c2 = (m * c + d * np.asarray(p, float)) / m2
        return m2, c2, about_origin + point(d, p) - point(m2, c2)

    return shift(link_from, p_from, -dm), shift(link_to, p_to, dm)


def fmt(x):
    x = float(x)
    return repr(0.0 if x == 0 else x)


def vec(v):
    return "[" + ", ".join(fmt(x) for x in v) + "]"


def mat(m):
    return "[" + ", ".join(vec(r) for r in m) + "]"


MOTOR_IN_THIGH = (0.0, 0.0, -0.04)
MOTOR_IN_SHIN = (0.0, 0.0, -0.03)


def leg_links(collocated):
    thigh = combine([(2.5, (0, 0, -0.16), rod_z(2.5, 0.32, 0.035)),
                     (2.0, MOTOR_IN_THIGH, cyl_y(2.0, 0.04, 0.06))])
    shin = (1.8, np.array([0, 0, -0.16]), rod_z(1.8, 0.32, 0.03))
    if collocated:
        thigh, shin = transfer(thigh, MOTOR_IN_THIGH, shin, MOTOR_IN_SHIN, 2.0)
    return {
        "hip_yaw_link": (0.5, np.array([0, 0, -0.03]), cyl_y(0.5, 0.03, 0.04)),
        "hip_roll_link": (1.0, np.zeros(3), box(1.0, 0.08, 0.06, 0.06)),
        "thigh": thigh,
        "knee_link": (0.2, np.array([0, 0, -0.03]), rod_z(0.2, 0.06, 0.03)),
        "shin": shin,
        "ankle_link": (0.3, np.zeros(3), box(0.3, 0.04, 0.04, 0.04)),
        "foot": (1.2, np.array([0, 0, -0.03]), box(1.2, 0.2, 0.1, 0.04)),
    }


# (joint, child link, parent link, origin xyz, axis, position limits, torque limit)
LEG = [
    ("hip_yaw", "hip_yaw_link", None, (0, 0.1, -0.05), (0, 0, 1), (-0.6, 0.6), 60.0),
    ("hip_roll", "hip_roll_link", "hip_yaw_link", (0, 0, -0.06), (1, 0, 0), (-0.5, 0.5), 150.0),
    ("hip_pitch", "thigh", "hip_roll_link", (0, 0, 0), (0, 1, 0), (-1.6, 0.8), 200.0),
    ("knee_proximal", "knee_link", "thigh", (0, 0, -0.32), (0, 1, 0), (-0.05, 1.57), 300.0),
    ("knee_distal", "shin", "knee_link", (0, 0, -0.06), (0, 1, 0), (-0.05, 1.57), 300.0),
    ("ankle_pitch", "ankle_link", "shin", (0, 0, -0.32), (0, 1, 0), (-1.2, 0.9), 100.0),
    ("ankle_roll", "foot", "ankle_link", (0, 0, 0), (1, 0, 0), (-0.5, 0.5), 80.0),
]


def write(path, name, collocated):
    lines = [f"name: {name}", "height: 1.35", "", "links:"]
    pelvis = (20.0, np.array([0, 0, 0.2]), box(20.0, 0.25, 0.30, 0.55))

    def link(lname, parent_joint, body):
        m, c, inertia = body
        lines.extend([f"  - name: {lname}", f"    parent_joint: {parent_joint}", f"    mass: {fmt(m)}",
                      f"    com: {vec(c)}", f"    inertia: {mat(inertia)}"])

    link("pelvis", "root", pelvis)
    legs = leg_links(collocated)
    for side in ("l", "r"):
        for joint, child, _, _, _, _, _ in LEG:
            link(f"{side}_{child}", f"{side}_{joint}", legs[child])

    lines += ["", "joints:", "  - name: root", "    type: floating_base"]
    for side, sign in (("l", 1), ("r", -1)):
        for joint, child, parent, xyz, axis, limits, torque in LEG:
            xyz = (xyz[0], sign * xyz[1], xyz[2])
            lo, hi = limits
            if sign < 0 and joint in ("hip_yaw", "hip_roll", "ankle_roll"):
                lo, hi = -hi, -lo
            lines += [f"  - name: {side}_{joint}", "    type: revolute",
                      f"    parent: {'pelvis' if parent is None else side + '_' + parent}",
                      f"    origin: {{xyz: {vec(xyz)}, rpy: [0.0, 0.0, 0.0]}}", f"    axis: {vec(axis)}",
                      f"    position_limits: {vec((lo, hi))}", "    velocity_limit: 20.0",
                      f"    torque_limits: {vec((-torque, torque))}", "    acceleration_limits: [-1000.0, 1000.0]"]

    lines += ["", "rolling_pairs:"]
    for side in ("l", "r"):
        lines += [f"  - proximal: {side}_knee_proximal", f"    distal: {side}_knee_distal",
                  "    r_proximal: 0.03", "    r_distal: 0.03", "    actuated: distal"]

    lines += ["", "# Placeholder transmission parameters.", "transmissions:"]
    for side in ("l", "r"):
        lines += [f"  - joint: {side}_hip_pitch", "    kind: hip_sheave", "    r_fix: 0.09", "    r_rot: 0.03",
                  f"  - joint: {side}_knee_distal", "    kind: knee_rolling", "    gear_stages: [6.0, 2.5]"]

    lines += ["", "contact_frames:"]
    for side in ("l", "r"):
        lines += [f"  - name: {side}_sole", f"    link: {side}_foot", "    origin: {xyz: [0.0, 0.0, -0.05]}"]
    path.write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    (ROOT / "models").mkdir(exist_ok=True)
    write(ROOT / "models" / "biped_rcj.yaml", "biped_rcj", False)
    write(ROOT / "models" / "biped_rcj_collocated.yaml", "biped_rcj_collocated", True)
