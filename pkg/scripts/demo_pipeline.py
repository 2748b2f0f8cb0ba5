#!/usr/bin/env python3
"""End-to-end demo: synthesize a recording, then run the full analysis chain.

Produces, under --out: recording.json, fixations.csv, model.json,
sequence.json, heatmap.png, gazeplot.svg, scatter.svg.
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path


def run(*cmd: str) -> None:
    print("$", " ".join(cmd))
    subprocess.run(cmd, check=True)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="demo-out")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    here = Path(__file__).parent

    run(sys.executable, str(here / "make_synthetic_recording.py"),
        "--out", str(out / "data"), "--seed", str(args.seed))

    gazekit = [sys.executable, "-m", "gazekit.cli"]
    log = str(out / "data" / "gaze.csv")
    meta = str(out / "data" / "meta.json")
    rec = str(out / "recording.json")
    fix = str(out / "fixations.csv")

    run(*gazekit, "ingest", log, "--screen", "1366x768", "--meta", meta, "-o", rec)
    run(*gazekit, "fixate", rec, "-o", fix)
    run(*gazekit, "cluster", fix, "--method", "em", "--sweep", "2..8",
        "--seed", str(args.seed), "-o", str(out / "model.json"))
    run(*gazekit, "sequence", fix, "--screen", "1366x768", "--aoi", meta,
        "-o", str(out / "sequence.json"))
    run(*gazekit, "render", "heatmap", fix, "--screen", "1366x768",
        "-o", str(out / "heatmap.png"))
    run(*gazekit, "render", "gazeplot", fix, "--screen", "1366x768",
        "-o", str(out / "gazeplot.svg"))
    run(*gazekit, "render", "scatter", fix, "--screen", "1366x768",
        "-o", str(out / "scatter.svg"))

    model = json.loads((out / "model.json").read_text())
    seq = json.loads((out / "sequence.json").read_text())
    print(f"\nchosen k = {model['model']['k']} (xb = {model['model']['xb']:.6g})")
    print(f"first fixation region: {seq['first_region']}")
    if seq["ranking"]:
        a, b, c = seq["ranking"][0]
        print(f"most frequent two-region sequence: {a} -> {b} (x{c})")
    print(f"artifacts in {out}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
