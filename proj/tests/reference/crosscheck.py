#!/usr/bin/env python3
"""Independent check of the morph-free estimation path.

Drives the CLI end to end on the 125-pose grid, re-derives every predicted
angle with a from-scratch numpy implementation, and byte-compares the
evaluation report against the pinned golden file. Exits non-zero on the first
mismatch.
"""

import math
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

DEFAULT_MODEL = [
    ("chin", (0.0, -62.0, -10.0)),
    ("nose_tip", (0.0, -20.0, 21.0)),
    ("left_canthus", (-34.0, 18.0, 0.0)),
    ("right_canthus", (34.0, 18.0, 0.0)),
]

# Angles are printed at six decimals, so a freshly computed value may differ
# from the file value by half an ulp of that grid plus solver noise.
ANGLE_TOLERANCE = 5.01e-7


def fail(message):
    print(f"FAIL: {message}")
    sys.exit(1)


def read_rows(path):
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        rows.append([f.strip() for f in line.split(",")])
    if not rows:
        fail(f"{path}: no rows")
    return rows[0], rows[1:]


def run(cmd):
    result = subprocess.run(cmd, capture_output=True)
    if result.returncode != 0:
        fail(f"{' '.join(map(str, cmd))} exited {result.returncode}: "
             f"{result.stderr.decode(errors='replace')}")
    return result


def reference_angles(landmarks):
    """Morph-free estimate from {label: (u, v)}: normalize both point sets,
    solve the 2x3 least-squares projection, orthonormalize, complete the
    rotation and decompose it."""
    image = np.array([landmarks[label] for label, _ in DEFAULT_MODEL])
    points = np.array([xyz for _, xyz in DEFAULT_MODEL])
    d2 = image - image.mean(axis=0)
    d2 /= np.linalg.norm(d2, axis=1, keepdims=True)
    d3 = points - points.mean(axis=0)
    d3 /= np.linalg.norm(d3, axis=1, keepdims=True)
    targets = d2.T
    directions = d3.T
    fitted = targets @ directions.T @ np.linalg.inv(directions @ directions.T)
    u, _, vt = np.linalg.svd(fitted, full_matrices=False)
    top = u @ vt
    r = np.vstack([top, np.cross(top[0], top[1])])
    pitch = math.degrees(math.atan2(r[2, 1], r[2, 2]))
    yaw = math.degrees(
        math.atan2(-r[2, 0], math.sqrt(r[2, 1] ** 2 + r[2, 2] ** 2)))
    roll = math.degrees(math.atan2(r[1, 0], r[0, 0]))
    return pitch, yaw, roll


def angle_stats(values):
    """Mean absolute error and population std of absolute errors, accumulated
    with plain running sums in input order (mirrors the evaluation tool)."""
    n = len(values)
    total = 0.0
    for v in values:
        total += v
    mae = total / n
    accum = 0.0
    for v in values:
        accum += (v - mae) * (v - mae)
    return mae, math.sqrt(accum / n)


def main():
    cli = os.environ.get("HEADPOSE_CLI")
    data = os.environ.get("HEADPOSE_DATA")
    if not cli or not data:
        fail("HEADPOSE_CLI and HEADPOSE_DATA must be set")
    poses = Path(data) / "poses_grid125.csv"
    golden = Path(data) / "golden_eval_no_morph.txt"
    if not poses.exists():
        fail(f"{poses} missing")

    tmp = Path(tempfile.mkdtemp(prefix="headpose_ref_"))
    landmarks_csv = tmp / "landmarks.csv"
    truth_csv = tmp / "truth.csv"
    pred_csv = tmp / "predictions.csv"
    report_txt = tmp / "report.txt"

    run([cli, "synth", "--poses", poses, "--out", landmarks_csv,
         "--truth", truth_csv])
    run([cli, "estimate", "--no-morph", "--landmarks", landmarks_csv,
         "--out", pred_csv])

    header, rows = read_rows(landmarks_csv)
    if header != ["image_id", "label", "u", "v"]:
        fail(f"unexpected landmarks header {header}")
    groups = {}
    for image_id, label, u, v in rows:
        groups.setdefault(image_id, {})[label] = (float(u), float(v))

    header, rows = read_rows(pred_csv)
    predictions = {}
    for row in rows:
        predictions[row[0]] = tuple(float(x) for x in row[1:4])
    if set(predictions) != set(groups):
        fail("prediction ids do not match the landmark ids")

    worst = 0.0
    for image_id in sorted(groups):
        expected = reference_angles(groups[image_id])
        got = predictions[image_id]
        for e, g in zip(expected, got):
            worst = max(worst, abs(e - g))
            if abs(e - g) > ANGLE_TOLERANCE:
                fail(f"{image_id}: reference {expected} vs CLI {got}")
    print(f"ok: {len(groups)} morph-free estimates match the reference "
          f"(worst gap {worst:.3g} deg, tolerance {ANGLE_TOLERANCE:g})")

    header, rows = read_rows(truth_csv)
    truth = {row[0]: tuple(float(x) for x in row[1:4]) for row in rows}
    if set(truth) != set(predictions):
        fail("truth ids do not match the prediction ids")
    errors = {0: [], 1: [], 2: []}
    for image_id in sorted(truth):
        for axis in range(3):
            errors[axis].append(
                abs(predictions[image_id][axis] - truth[image_id][axis]))
    report = "# headpose eval\nangle,mae,std\n"
    for axis, name in ((0, "pitch"), (1, "yaw"), (2, "roll")):
        mae, std = angle_stats(errors[axis])
        report += f"{name},{mae:.2f},{std:.2f}\n"
    report += f"# images={len(truth)} failures=0\n"

    eval_run = run([cli, "eval", "--truth", truth_csv, "--pred", pred_csv,
                    "--out", report_txt])
    if eval_run.stdout != report.encode():
        fail("CLI eval report differs from the reference computation:\n"
             f"CLI:\n{eval_run.stdout.decode()}\nreference:\n{report}")
    if report_txt.read_bytes() != eval_run.stdout:
        fail("eval --out bytes differ from eval stdout")
    print("ok: CLI eval matches the independently computed report")

    if not golden.exists():
        fail(f"{golden} missing")
    if golden.read_bytes() != report.encode():
        fail("report differs from the pinned golden:\n"
             f"golden:\n{golden.read_text()}\ncomputed:\n{report}")
    print("ok: report matches the pinned golden byte-for-byte")


if __name__ == "__main__":
    main()
