"""gazekit command line: ingest, fixate, cluster, sequence, stats, render, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from gazekit import errors
from gazekit.cluster import ClusterConfig, em_gmm, kmeans, model_to_dict, select_k, xb_index
from gazekit.errors import GazekitError
from gazekit.fixation import FixationConfig, detect_fixations
from gazekit.ingest import (
    ScreenSpec,
    export_fixations,
    parse_fixations,
    parse_gaze_log,
    parse_trial_meta,
    recording_from_dict,
    recording_to_dict,
)
from gazekit.render import (
    Gradient,
    HeatmapConfig,
    ImageRef,
    parse_hex_color,
    render_gazeplot,
    render_heatmap,
    render_scatter,
)
from gazekit.sequence import aoi_fixation_ratio, bigram_frequencies, first_fixation_region, label_sequence
from gazekit.stats import one_way_anova, pearson_r, rm_anova


def _screen(text: str) -> ScreenSpec:
    try:
        w, h = text.lower().split("x")
        return ScreenSpec(int(w), int(h))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from exc


def _window(text: str) -> tuple[float, float]:
    t0, t1 = (float(v) for v in text.split(","))
    return t0, t1


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_json(path: str | None, doc: dict) -> None:
    _write_text(path, json.dumps(doc, indent=1) + "\n")


def cmd_ingest(args) -> int:
    rec = parse_gaze_log(Path(args.log).read_text("utf-8"), args.screen,
                         rec_id=Path(args.log).stem)
    doc = recording_to_dict(rec)
    if args.meta:
        meta = parse_trial_meta(Path(args.meta).read_text("utf-8"))
        rec.responses = meta.responses
        rec.stimulus = meta.stimulus
        doc = recording_to_dict(rec)
        doc["aois"] = [
            {"name": a.name, "polygon": [list(p) for p in a.polygon]} for a in meta.aois
        ]
    _write_json(args.output, doc)
    r = rec.report
    print(
        f"{len(rec.samples)} samples ({r.malformed} malformed, {r.deduped} deduped, "
        f"{r.marked_invalid} out-of-range)",
        file=sys.stderr,
    )
    return 0


def _load_recording(path: str):
    return recording_from_dict(json.loads(Path(path).read_text("utf-8")))


def cmd_fixate(args) -> int:
    rec = _load_recording(args.recording)
    cfg = FixationConfig(
        dispersion_px=args.dispersion, min_duration_ms=args.min_dur, max_gap_ms=args.max_gap
    )
    fixations = detect_fixations(rec, cfg)
    _write_text(args.output, export_fixations(fixations))
    print(f"{len(fixations)} fixations", file=sys.stderr)
    return 0


def cmd_cluster(args) -> int:
    fixations = parse_fixations(Path(args.fixations).read_text("utf-8"))
    points = np.array([[f.cx, f.cy] for f in fixations])
    cfg = ClusterConfig(seed=args.seed, restarts=args.restarts)
    if args.sweep:
        k_min, k_max = (int(v) for v in args.sweep.split(".."))
        model, table = select_k(points, k_min, k_max, cfg, method=args.method,
                                xb_membership=args.xb_membership)
        doc = {
            "model": model_to_dict(model, cfg),
            "table": [{"k": e.k, "xb": e.xb, "score": e.score, "error": e.error} for e in table],
        }
    else:
        fit = em_gmm if args.method == "em" else kmeans
        model = fit(points, args.k, cfg)
        if args.k >= 2:
            try:
                model.xb = xb_index(points, model, cfg.fuzzifier_m,
                                    membership=args.xb_membership)
                model.xb_membership = "hard" if args.method == "kmeans" else args.xb_membership
            except errors.DegenerateSeparation:
                model.xb = None
        doc = {"model": model_to_dict(model, cfg), "table": None}
    _write_json(args.output, doc)
    return 0


def cmd_sequence(args) -> int:
    fixations = parse_fixations(Path(args.fixations).read_text("utf-8"))
    labels = label_sequence(fixations, args.screen)
    ranking, table = bigram_frequencies(labels)
    doc = {
        "labels": [str(lbl) for lbl in labels],
        "first_region": str(first_fixation_region(fixations, args.screen)),
        "ranking": [[str(a), str(b), c] for a, b, c in ranking],
        "table": table.to_dict(),
        "aoi_ratios": {},
    }
    if args.aoi:
        meta = parse_trial_meta(Path(args.aoi).read_text("utf-8"))
        for aoi in meta.aois:
            doc["aoi_ratios"][aoi.name] = aoi_fixation_ratio(fixations, aoi)
    _write_json(args.output, doc)
    return 0


def _read_table(path: str) -> list[list[float]]:
    rows = []
    for line in Path(path).read_text("utf-8").splitlines():
        if line.strip():
            rows.append([float(v) for v in line.split(",")])
    return rows


def cmd_stats(args) -> int:
    rows = _read_table(args.table)
    if args.test == "anova":
        res = one_way_anova(rows)
    elif args.test == "rmanova":
        res = rm_anova(rows)
    else:
        xs = [r[0] for r in rows]
        ys = [r[1] for r in rows]
        corr = pearson_r(xs, ys)
        _write_json(args.output, {"r": corr.r, "n": corr.n, "p": corr.p})
        return 0
    _write_json(
        args.output,
        {
            "f": res.f,
            "df1": res.df1,
            "df2": res.df2,
            "p": res.p,
            "eta_sq_partial": res.eta_sq_partial,
            "ss_effect": res.ss_effect,
            "ss_error": res.ss_error,
            "note": res.note,
        },
    )
    return 0


def cmd_render(args) -> int:
    fixations = parse_fixations(Path(args.fixations).read_text("utf-8"))
    gradient = Gradient(low_color=parse_hex_color(args.low), high_color=parse_hex_color(args.high))
    if args.layer == "heatmap":
        cfg = HeatmapConfig(kernel_sigma_px=args.sigma, gradient=gradient, opacity=args.opacity)
        selected = fixations
        if args.window:
            selected = [f for f in fixations if args.window[0] <= f.onset <= args.window[1]]
        layer = render_heatmap(selected, args.screen, cfg)
        data = layer.to_png()
        if args.stimulus:
            from PIL import Image

            base = Image.open(args.stimulus).convert("RGBA")
            if base.size != (args.screen.width, args.screen.height):
                base = base.resize((args.screen.width, args.screen.height))
            over = Image.fromarray(layer.rgba, mode="RGBA")
            import io

            buf = io.BytesIO()
            Image.alpha_composite(base, over).save(buf, format="PNG")
            data = buf.getvalue()
    else:
        if args.layer == "scatter":
            layer = render_scatter(fixations, args.screen, time_window=args.window,
                                   gradient=gradient)
        else:
            selected = fixations
            if args.window:
                selected = [f for f in fixations if args.window[0] <= f.onset <= args.window[1]]
            layer = render_gazeplot(selected, args.screen)
        if args.stimulus:
            layer.elements.insert(
                0, ImageRef(args.stimulus, args.screen.width, args.screen.height)
            )
        data = layer.to_svg()
    Path(args.output).write_bytes(data)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from gazekit.service import create_app

    ui_dir = args.ui
    if ui_dir is None:
        default_ui = Path("frontend/dist")
        ui_dir = default_ui if default_ui.is_dir() else None
    app = create_app(args.workspace, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a gaze log into a recording file")
    p.add_argument("log")
    p.add_argument("--screen", type=_screen, required=True, metavar="WxH")
    p.add_argument("--meta", help="trial metadata JSON (screen/stimulus/aoi/responses)")
    p.add_argument("-o", "--output", help="recording JSON (default stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("fixate", help="detect fixations in a recording")
    p.add_argument("recording")
    p.add_argument("--dispersion", type=float, default=60.0, metavar="PX")
    p.add_argument("--min-dur", type=int, default=100, metavar="MS")
    p.add_argument("--max-gap", type=int, default=75, metavar="MS")
    p.add_argument("-o", "--output", help="fixation CSV (default stdout)")
    p.set_defaults(func=cmd_fixate)

    p = sub.add_parser("cluster", help="cluster fixation positions")
    p.add_argument("fixations")
    p.add_argument("--method", choices=("em", "kmeans"), default="em")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int)
    group.add_argument("--sweep", metavar="A..B", help="sweep k range, e.g. 2..10")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--xb-membership", choices=("soft", "hard"), default="soft")
    p.add_argument("-o", "--output", help="model JSON (default stdout)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sequence", help="3x3 region scanpath report")
    p.add_argument("fixations")
    p.add_argument("--screen", type=_screen, required=True, metavar="WxH")
    p.add_argument("--aoi", help="trial metadata JSON with aoi section")
    p.add_argument("-o", "--output", help="report JSON (default stdout)")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("stats", help="inferential statistics over a numeric table")
    p.add_argument("test", choices=("anova", "rmanova", "corr"))
    p.add_argument("table", help="CSV: anova = one group per line; rmanova = subjects x "
                                 "conditions; corr = x,y pairs")
    p.add_argument("-o", "--output", help="report JSON (default stdout)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("render", help="render a visualization layer")
    p.add_argument("layer", choices=("heatmap", "gazeplot", "scatter"))
    p.add_argument("fixations")
    p.add_argument("--screen", type=_screen, required=True, metavar="WxH")
    p.add_argument("--stimulus", help="underlay image path")
    p.add_argument("--window", type=_window, metavar="T0,T1")
    p.add_argument("--low", default="00ff00", metavar="RRGGBB")
    p.add_argument("--high", default="ff0000", metavar="RRGGBB")
    p.add_argument("--sigma", type=float, default=25.0)
    p.add_argument("--opacity", type=float, default=0.6)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the local analysis service")
    p.add_argument("--workspace", required=True)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", help="directory of built explorer assets (served at /ui)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GazekitError as exc:
        print(json.dumps({"code": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
