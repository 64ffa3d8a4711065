#!/usr/bin/env python3
"""Regenerates the checked-in test fixtures under crates/cli/tests/fixtures.

    frames/       30 synthetic green-screen frames (128x128), frame 10 all green
    backgrounds/  10 images, 4 of them square
    eval/         gt/pred masks, pairs.jsonl and expected.json

expected.json is computed here with plain per-pixel loops and is the oracle
the Rust tests compare against. Output is deterministic.
"""

import json
import math
import random
from pathlib import Path

from PIL import Image, ImageDraw

OUT = Path(__file__).resolve().parent.parent / "crates" / "cli" / "tests" / "fixtures"

FRAME = 128
GREEN = (30, 190, 40)
SKIN = (224, 172, 105)
SLEEVE = (40, 40, 120)


def jitter(rng, rgb, amount):
    return tuple(max(0, min(255, c + rng.randint(-amount, amount))) for c in rgb)


def make_frame(i, rng):
    img = Image.new("RGB", (FRAME, FRAME))
    px = img.load()
    for y in range(FRAME):
        for x in range(FRAME):
            px[x, y] = jitter(rng, GREEN, 8)
    if i == 10:
        return img
    # Forearm entering from the bottom edge, sleeve near the edge, hand on top.
    cx = 40 + (i * 7) % 48
    tilt = ((i % 5) - 2) * 6
    top = 40 + (i * 5) % 30
    draw = ImageDraw.Draw(img)
    arm = [(cx - 12, FRAME), (cx + 12, FRAME), (cx + 10 + tilt, top), (cx - 10 + tilt, top)]
    draw.polygon(arm, fill=SKIN)
    draw.ellipse([cx + tilt - 14, top - 18, cx + tilt + 14, top + 8], fill=SKIN)
    if i % 3 == 0:
        draw.rectangle([cx - 16, FRAME - 20, cx + 16, FRAME - 1], fill=SLEEVE)
    for y in range(FRAME):
        for x in range(FRAME):
            p = px[x, y]
            if p in (SKIN, SLEEVE):
                px[x, y] = jitter(rng, p, 5)
    return img


def make_background(i, w, h, rng):
    img = Image.new("RGB", (w, h))
    px = img.load()
    a, b, c = (rng.randint(0, 255) for _ in range(3))
    for y in range(h):
        for x in range(w):
            px[x, y] = ((a + x) % 256, (b + y) % 256, (c + x + y) % 256)
    draw = ImageDraw.Draw(img)
    for _ in range(4):
        x0, y0 = rng.randrange(w), rng.randrange(h)
        x1, y1 = rng.randrange(x0, w), rng.randrange(y0, h)
        draw.rectangle([x0, y0, x1, y1], fill=tuple(rng.randint(0, 255) for _ in range(3)))
    return img


BACKGROUNDS = [
    ("bg_00.png", 200, 150),
    ("bg_01.png", 160, 160),
    ("bg_02.jpg", 640, 480),
    ("bg_03.png", 150, 200),
    ("bg_04.jpg", 256, 256),
    ("bg_05.png", 100, 101),
    ("bg_06.png", 96, 96),
    ("bg_07.jpg", 300, 200),
    ("bg_08.png", 64, 48),
    ("bg_09.png", 300, 300),
]

EVAL = 48


def blob(rng, n):
    """A few filled ellipses, as 0/255 bytes."""
    img = Image.new("L", (EVAL, EVAL), 0)
    draw = ImageDraw.Draw(img)
    for _ in range(n):
        cx, cy = rng.randrange(EVAL), rng.randrange(EVAL)
        rx, ry = rng.randint(3, 14), rng.randint(3, 14)
        draw.ellipse([cx - rx, cy - ry, cx + rx, cy + ry], fill=255)
    return img


def perturb(rng, gt, shift, flips, level=255):
    """Shifted copy of gt with random pixel flips, foreground written as `level`."""
    src = gt.load()
    img = Image.new("L", (EVAL, EVAL), 0)
    px = img.load()
    for y in range(EVAL):
        for x in range(EVAL):
            sx = x - shift
            if 0 <= sx < EVAL and src[sx, y] >= 128:
                px[x, y] = level
    for _ in range(flips):
        x, y = rng.randrange(EVAL), rng.randrange(EVAL)
        px[x, y] = 0 if px[x, y] >= 128 else level
    return img


def counts(gt, pred):
    g, p = gt.load(), pred.load()
    tp = fp = fn = tn = 0
    for y in range(gt.height):
        for x in range(gt.width):
            a, b = g[x, y] >= 128, p[x, y] >= 128
            if a and b:
                tp += 1
            elif b:
                fp += 1
            elif a:
                fn += 1
            else:
                tn += 1
    return {"tp": tp, "fp": fp, "fn": fn, "tn": tn}


def iou(c):
    d = c["tp"] + c["fp"] + c["fn"]
    return None if d == 0 else 100.0 * c["tp"] / d


def miss(c):
    d = c["tp"] + c["fn"]
    return None if d == 0 else 100.0 * c["fn"] / d


def stats(values):
    if not values:
        return None, None
    m = sum(values) / len(values)
    return m, math.sqrt(sum((v - m) ** 2 for v in values) / len(values))


def summarize(name, scene, recs):
    recs = sorted(recs, key=lambda r: r["sample_id"])
    ious = [r["iou_arm"] for r in recs if r["iou_arm"] is not None]
    misses = [r["miss_rate"] for r in recs if r["miss_rate"] is not None]
    pooled = {k: sum(r["counts"][k] for r in recs) for k in ("tp", "fp", "fn", "tn")}
    im, isd = stats(ious)
    mm, msd = stats(misses)
    out = {"dataset_name": name}
    if scene is not None:
        out["scene"] = scene
    out.update(
        n_samples=len(recs),
        n_undefined=len(recs) - len(ious),
        n_miss_undefined=len(recs) - len(misses),
        iou_mean=im,
        iou_std=isd,
        miss_mean=mm,
        miss_std=msd,
        iou_micro=iou(pooled),
        miss_micro=miss(pooled),
        counts=pooled,
    )
    return out


def make_eval(rng):
    root = OUT / "eval"
    (root / "gt").mkdir(parents=True, exist_ok=True)
    (root / "pred").mkdir(parents=True, exist_ok=True)
    empty = Image.new("L", (EVAL, EVAL), 0)
    # (sample_id, dataset, scene, gt, pred)
    specs = []
    for k in range(6):
        gt = blob(rng, 2 + k % 3)
        level = 200 if k == 4 else 255
        pred = perturb(rng, gt, shift=k % 4, flips=20 * k, level=level)
        scene = "office" if k % 2 == 0 else "kitchen"
        specs.append((f"syn_{k:02}", "synthetic", scene, gt, pred))
    specs.append(("ext_00", "external", None, blob(rng, 3), blob(rng, 3)))
    gt = blob(rng, 2)
    specs.append(("ext_01", "external", None, gt, gt.copy()))
    specs.append(("ext_02", "external", None, empty, empty))
    specs.append(("ext_03", "external", None, empty, blob(rng, 1)))

    pairs, records = [], []
    for sid, dataset, scene, gt, pred in specs:
        gt.save(root / "gt" / f"{sid}.png")
        pred.save(root / "pred" / f"{sid}.png")
        line = {"sample_id": sid, "gt_path": f"gt/{sid}.png", "pred_path": f"pred/{sid}.png",
                "dataset": dataset}
        if scene is not None:
            line["scene"] = scene
        pairs.append(line)
        c = counts(gt, pred)
        rec = {"sample_id": sid, "dataset": dataset}
        if scene is not None:
            rec["scene"] = scene
        rec.update(iou_arm=iou(c), miss_rate=miss(c), counts=c)
        records.append(rec)

    with open(root / "pairs.jsonl", "w") as f:
        for p in pairs:
            f.write(json.dumps(p) + "\n")

    datasets = [
        summarize(name, None, [r for r in records if r["dataset"] == name])
        for name in sorted({r["dataset"] for r in records})
    ]
    keys = sorted({(r["dataset"], r["scene"]) for r in records if "scene" in r})
    scenes = [
        summarize(d, s, [r for r in records if r["dataset"] == d and r.get("scene") == s])
        for d, s in keys
    ]
    expected = {"records": records, "datasets": datasets, "scenes": scenes}
    with open(root / "expected.json", "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


def main():
    rng = random.Random(20240611)
    frames = OUT / "frames"
    frames.mkdir(parents=True, exist_ok=True)
    for i in range(30):
        make_frame(i, rng).save(frames / f"frame_{i:04}.png")

    bgs = OUT / "backgrounds"
    bgs.mkdir(parents=True, exist_ok=True)
    for name, w, h in BACKGROUNDS:
        img = make_background(len(name), w, h, rng)
        if name.endswith(".jpg"):
            img.save(bgs / name, quality=90)
        else:
            img.save(bgs / name)

    make_eval(rng)


if __name__ == "__main__":
    main()
