#!/usr/bin/env python3
"""Generate a synthetic gaze log + trial metadata for demos and manual testing.

Writes <out>/gaze.csv and <out>/meta.json.  The log is a sequence of dwell
segments (jittered stable gaze) joined by short saccade sweeps, with a few
blinks (invalid samples) thrown in.
"""

import argparse
import json
from pathlib import Path

import numpy as np

HEADER = "t_ms,x_px,y_px,valid"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo-data", help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--segments", type=int, default=12, help="dwell segments")
    ap.add_argument("--screen", default="1366x768")
    ap.add_argument("--rate-hz", type=float, default=120.0)
    args = ap.parse_args()

    w, h = (int(v) for v in args.screen.split("x"))
    rng = np.random.default_rng(args.seed)
    step = 1000.0 / args.rate_hz

    rows = [HEADER]
    t = 0.0
    prev = np.array([w / 2, h / 2])
    for seg in range(args.segments):
        target = rng.uniform([60, 60], [w - 60, h - 60])
        for frac in np.linspace(0.25, 0.75, 3):  # saccade sweep
            p = prev + frac * (target - prev)
            rows.append(f"{t:.0f},{p[0]:.2f},{p[1]:.2f},1")
            t += step
        dwell = rng.integers(200, 700)
        for _ in range(int(dwell / step)):
            p = target + rng.normal(0, 2.5, 2)
            rows.append(f"{t:.0f},{p[0]:.2f},{p[1]:.2f},1")
            t += step
        if seg % 4 == 3:  # blink
            for _ in range(int(rng.integers(3, 8))):
                rows.append(f"{t:.0f},0,0,0")
                t += step
        prev = target

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "gaze.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")

    questions = [
        {"question_id": f"q{i+1}", "answer": rng.choice(["a", "b", "c", "d"]),
         "t_ms": int((i + 1) * t / 5), "correct": bool(rng.integers(0, 2))}
        for i in range(5)
    ]
    meta = {
        "screen": {"width": w, "height": h},
        "aoi": [
            {"name": "deceptive", "rect": [100, 100, 300, 200]},
            {"name": "content", "rect": [int(w * 0.3), int(h * 0.3), w - 60, h - 60]},
        ],
        "responses": questions,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out}/gaze.csv ({len(rows) - 1} samples) and {out}/meta.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
