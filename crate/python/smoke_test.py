"""Smoke test for the egoseg Python extension.

Build first with `cargo build --release -p egoseg-py`. If `egoseg` is not
importable, the freshly built shared library under target/ is copied into a
temporary directory as `egoseg.so` and imported from there.
"""

import importlib
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        return importlib.import_module("egoseg")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libegoseg.so"
        if lib.exists():
            tmp = tempfile.mkdtemp(prefix="egoseg_py_")
            shutil.copy(lib, os.path.join(tmp, "egoseg.so"))
            sys.path.insert(0, tmp)
            return importlib.import_module("egoseg")
    sys.exit("egoseg extension not found; run `cargo build --release -p egoseg-py`")


def square_on_green(eg, size=64, lo=16, hi=48, color=(200, 40, 40)):
    data = bytearray()
    for y in range(size):
        for x in range(size):
            inside = lo <= x < hi and lo <= y < hi
            data += bytes(color if inside else (0, 200, 0))
    return eg.Image(size, size, bytes(data))


def main():
    eg = load_module()
    print("egoseg", eg.__version__)

    h, s, v = eg.rgb_to_hsv(0, 255, 0)
    assert abs(h - 1 / 3) < 1e-12 and s == 1.0 and v == 1.0

    assert eg.select_frames(30, 5) == [0, 5, 10, 15, 20, 25]
    try:
        eg.select_frames(30, 0)
        raise AssertionError("stride 0 accepted")
    except ValueError:
        pass

    img = square_on_green(eg)
    gt = eg.chroma_mask(img)
    assert gt.foreground_count() == 32 * 32, gt
    assert eg.extract_groundtruth(img, open_radius=0) == gt

    assert eg.iou_arm(gt, gt) == 100.0
    assert eg.miss_rate(gt, gt) == 0.0
    empty = eg.Mask(64, 64, bytes(64 * 64))
    assert eg.iou_arm(empty, empty) is None
    c = eg.confusion(gt, gt.complement())
    assert c == {"tp": 0, "fp": 64 * 64 - 1024, "fn": 1024, "tn": 0}, c

    bg = eg.Image(64, 64, bytes([10, 20, 30]) * (64 * 64))
    out = eg.composite(img, gt, bg)
    assert out.get(20, 20) == (200, 40, 40)
    assert out.get(0, 0) == (10, 20, 30)

    skin = eg.Image(2, 1, bytes([224, 172, 105, 0, 200, 0]))
    assert eg.skin_segment(skin).labels() == [True, False]

    depth = eg.depth_segment(3, 1, [0, 250, 900], fill_holes=False)
    assert depth.labels() == [False, True, False]

    occ = eg.heatmap([gt, gt.complement()], 64, 64)
    assert all(o == 0.5 for o in occ)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        gt.save(tmp / "gt.png")
        assert eg.Mask.load(tmp / "gt.png") == gt
        lines = [
            {"sample_id": "a", "gt_path": "gt.png", "pred_path": "gt.png", "dataset": "toy"},
        ]
        (tmp / "pairs.jsonl").write_text("".join(json.dumps(l) + "\n" for l in lines))
        summary = eg.evaluate_pairs(tmp / "pairs.jsonl", tmp / "eval")
        assert summary["datasets"][0]["iou_mean"] == 100.0, summary
        assert (tmp / "eval" / "report.md").exists()

    print("ok")


if __name__ == "__main__":
    main()
