"""Local HTTP service for the browser explorer.

Routes (JSON bodies unless noted):

    POST /recordings                         upload {log, screen?, meta?} -> {id}
    GET  /recordings                         list ids
    GET  /recordings/{id}                    stored recording document
    GET  /recordings/{id}/fixations          detected fixations (query: fixation params)
    POST /recordings/{id}/analyses           {kind, params} -> job document
    GET  /analyses/{job}                     job document
    GET  /recordings/{id}/layers/{kind}      png/svg bytes; query: window=t0,t1,
                                             low/high=RRGGBB, sigma, opacity, ...

Jobs run synchronously and are cached by (recording id, kind, canonicalized
parameters): the job id is a digest of that identity, so identical requests
return the same job and byte-identical artifacts.  Module errors surface as
{"code", "message"} with the originating error taxonomy code.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from gazekit import errors
from gazekit.cluster import ClusterConfig, em_gmm, kmeans, model_to_dict, select_k, xb_index
from gazekit.errors import GazekitError
from gazekit.fixation import FixationConfig, detect_fixations, fixation_summary
from gazekit.ingest import (
    ScreenSpec,
    parse_gaze_log,
    parse_trial_meta,
    recording_from_dict,
)
from gazekit.render import (
    Gradient,
    HeatmapConfig,
    parse_hex_color,
    render_gazeplot,
    render_heatmap,
    render_scatter,
)
from gazekit.sequence import (
    AoiSpec,
    aoi_fixation_ratio,
    bigram_frequencies,
    first_fixation_region,
    label_sequence,
)
from gazekit.stats import pearson_r
from gazekit.workspace import Workspace

_HTTP_STATUS = {"NotFound": 404, "ValidationError": 422}

ANALYSIS_KINDS = ("fixate", "cluster", "sequence", "stats", "render")
LAYER_KINDS = ("heatmap", "gazeplot", "scatter")

_FIXATION_KEYS = {
    "dispersion_px": float,
    "min_duration_ms": int,
    "max_gap_ms": int,
}
_CLUSTER_KEYS = {
    "method": str,
    "k": int,
    "sweep": list,
    "seed": int,
    "restarts": int,
    "max_iters": int,
    "tol": float,
    "cov_floor": float,
    "fuzzifier_m": float,
    "xb_membership": str,
}
_RENDER_KEYS = {
    "layer": str,
    "window": list,
    "low": str,
    "high": str,
    "sigma": float,
    "opacity": float,
    "r_min": float,
    "r_scale": float,
    "marker_r": float,
}


def canonicalize(value):
    """Sorted keys, integral floats collapsed to ints; defines cache identity."""
    if isinstance(value, dict):
        return {k: canonicalize(value[k]) for k in sorted(value)}
    if isinstance(value, (list, tuple)):
        return [canonicalize(v) for v in value]
    if isinstance(value, bool):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


def cache_identity(rec_id: str, kind: str, params: dict) -> tuple[dict, str]:
    canon = canonicalize(params)
    blob = json.dumps(canon, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(f"{rec_id}\n{kind}\n{blob}".encode("utf-8")).hexdigest()
    return canon, f"j{digest[:16]}"


def _coerce(params: dict, spec: dict, path: str) -> dict:
    out = {}
    for key, value in params.items():
        if key not in spec:
            raise errors.ValidationError(f"{path}.{key}: unknown parameter")
        cast = spec[key]
        try:
            out[key] = value if isinstance(value, cast) and cast is not int else cast(value)
        except (TypeError, ValueError) as exc:
            raise errors.ValidationError(f"{path}.{key}: {exc}") from exc
    return out


def _fixation_config(params: dict, path: str = "params") -> FixationConfig:
    kwargs = _coerce({k: v for k, v in params.items() if k in _FIXATION_KEYS},
                     _FIXATION_KEYS, path)
    try:
        return FixationConfig(**kwargs)
    except ValueError as exc:
        raise errors.ValidationError(f"{path}: {exc}") from exc


def _split_fixation_params(params: dict, allowed: dict, path: str) -> tuple[FixationConfig, dict]:
    rest = {k: v for k, v in params.items() if k not in _FIXATION_KEYS}
    cfg = _fixation_config(params, path)
    return cfg, _coerce(rest, allowed, path)


def _fixation_dicts(fixations) -> list[dict]:
    return [
        {"cx": f.cx, "cy": f.cy, "onset_ms": f.onset, "duration_ms": f.duration, "n": f.n}
        for f in fixations
    ]


def _window_pair(value, path: str) -> tuple[float, float]:
    try:
        t0, t1 = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise errors.ValidationError(f"{path}.window: expected [t0, t1]") from exc
    if t0 > t1:
        raise errors.BadWindow(f"window start {t0} exceeds end {t1}")
    return t0, t1


def _gradient(params: dict, path: str) -> Gradient:
    try:
        low = parse_hex_color(params["low"]) if "low" in params else (0, 255, 0)
        high = parse_hex_color(params["high"]) if "high" in params else (255, 0, 0)
    except ValueError as exc:
        raise errors.ValidationError(f"{path}: {exc}") from exc
    return Gradient(low_color=low, high_color=high)


class AnalysisRunner:
    """Validates parameters, executes module operations, caches results."""

    def __init__(self, workspace: Workspace):
        self.ws = workspace

    def run(self, rec_id: str, kind: str, params: dict) -> dict:
        if kind not in ANALYSIS_KINDS:
            raise errors.ValidationError(f"kind: expected one of {ANALYSIS_KINDS}")
        doc = self.ws.recording_doc(rec_id)  # NotFound before anything else
        self._validate(kind, params)
        canon, job_id = cache_identity(rec_id, kind, params)
        cached = self.ws.load_job(job_id)
        if cached is not None:
            return cached
        with self.ws.lock_for(rec_id):
            cached = self.ws.load_job(job_id)
            if cached is not None:
                return cached
            job = {
                "id": job_id,
                "recording_id": rec_id,
                "kind": kind,
                "params": canon,
                "status": "running",
                "result": None,
                "artifact": None,
                "error": None,
            }
            try:
                result, artifact = self._execute(doc, kind, params, job_id)
                job.update(status="done", result=result, artifact=artifact)
            except GazekitError as exc:
                job.update(status="failed", error={"code": exc.code, "message": str(exc)})
            self.ws.save_job(job)
        return job

    # --- validation (raises before a job is created) -------------------------

    def _validate(self, kind: str, params: dict) -> None:
        if kind == "fixate":
            _coerce(params, _FIXATION_KEYS, "params")
            _fixation_config(params)
        elif kind == "cluster":
            _, rest = _split_fixation_params(params, _CLUSTER_KEYS, "params")
            if ("k" in rest) == ("sweep" in rest):
                raise errors.ValidationError("params.k: give exactly one of k or sweep")
            if rest.get("method", "em") not in ("em", "kmeans"):
                raise errors.ValidationError("params.method: expected em or kmeans")
            if "sweep" in rest:
                sweep = rest["sweep"]
                if len(sweep) != 2 or not all(isinstance(v, (int, float)) for v in sweep):
                    raise errors.ValidationError("params.sweep: expected [k_min, k_max]")
        elif kind == "sequence" or kind == "stats":
            _coerce(params, _FIXATION_KEYS, "params")
            _fixation_config(params)
        elif kind == "render":
            cfg, rest = _split_fixation_params(params, _RENDER_KEYS, "params")
            if rest.get("layer") not in LAYER_KINDS:
                raise errors.ValidationError(f"params.layer: expected one of {LAYER_KINDS}")
            _gradient(rest, "params")
            if "window" in rest:
                _window_pair(rest["window"], "params")

    # --- execution ------------------------------------------------------------

    def _execute(self, doc: dict, kind: str, params: dict, job_id: str):
        rec = recording_from_dict(doc)
        fix_cfg = _fixation_config(params)
        fixations = detect_fixations(rec, fix_cfg)
        if kind == "fixate":
            return {"count": len(fixations), "fixations": _fixation_dicts(fixations)}, None
        if kind == "cluster":
            return self._run_cluster(fixations, params), None
        if kind == "sequence":
            return self._run_sequence(doc, rec, fixations), None
        if kind == "stats":
            return self._run_stats(rec, fixations), None
        return self._run_render(rec, fixations, params, job_id)

    def _run_cluster(self, fixations, params: dict) -> dict:
        _, rest = _split_fixation_params(params, _CLUSTER_KEYS, "params")
        method = rest.get("method", "em")
        membership = rest.get("xb_membership", "soft")
        cfg_kwargs = {
            k: rest[k]
            for k in ("max_iters", "tol", "restarts", "cov_floor", "seed", "fuzzifier_m")
            if k in rest
        }
        cfg = ClusterConfig(**cfg_kwargs)
        points = np.array([[f.cx, f.cy] for f in fixations])
        if "sweep" in rest:
            k_min, k_max = (int(v) for v in rest["sweep"])
            model, table = select_k(points, k_min, k_max, cfg, method=method,
                                    xb_membership=membership)
            table_doc = [
                {"k": e.k, "xb": e.xb, "score": e.score, "error": e.error} for e in table
            ]
            return {"model": model_to_dict(model, cfg), "table": table_doc}
        k = int(rest["k"])
        model = (em_gmm if method == "em" else kmeans)(points, k, cfg)
        if k >= 2:
            try:
                model.xb = xb_index(points, model, cfg.fuzzifier_m, membership=membership)
                model.xb_membership = "hard" if method == "kmeans" else membership
            except errors.DegenerateSeparation:
                model.xb = None
        return {"model": model_to_dict(model, cfg), "table": None}

    def _run_sequence(self, doc: dict, rec, fixations) -> dict:
        labels = label_sequence(fixations, rec.screen)
        ranking, table = bigram_frequencies(labels)
        aoi_ratios = {}
        for entry in doc.get("aois") or []:
            aoi = AoiSpec(entry["name"], [tuple(p) for p in entry["polygon"]])
            aoi_ratios[aoi.name] = aoi_fixation_ratio(fixations, aoi)
        return {
            "labels": [str(lbl) for lbl in labels],
            "first_region": str(first_fixation_region(fixations, rec.screen)),
            "ranking": [[str(a), str(b), c] for a, b, c in ranking],
            "table": table.to_dict(),
            "aoi_ratios": aoi_ratios,
        }

    def _run_stats(self, rec, fixations) -> dict:
        summaries = fixation_summary(fixations, rec.responses)
        questions = [
            {
                "question_id": s.question_id,
                "fixation_count": s.fixation_count,
                "total_fixation_ms": s.total_fixation_ms,
                "mean_duration_ms": s.mean_duration_ms,
                "latency_ms": s.latency_ms,
            }
            for s in summaries
        ]
        correlation = None
        counts = [s.fixation_count for s in summaries]
        latencies = [s.latency_ms for s in summaries]
        if len(summaries) >= 3:
            try:
                res = pearson_r(counts, latencies)
                correlation = {"r": res.r, "n": res.n, "p": res.p}
            except (errors.ZeroVariance, errors.InsufficientData):
                correlation = None
        return {"questions": questions, "fixations_vs_latency": correlation}

    def _run_render(self, rec, fixations, params: dict, job_id: str):
        _, rest = _split_fixation_params(params, _RENDER_KEYS, "params")
        layer_kind = rest["layer"]
        gradient = _gradient(rest, "params")
        window = _window_pair(rest["window"], "params") if "window" in rest else None
        if layer_kind == "scatter":
            layer = render_scatter(
                fixations, rec.screen, time_window=window, gradient=gradient,
                marker_r=rest.get("marker_r", 4.0),
            )
        else:
            selected = fixations
            if window is not None:
                selected = [f for f in fixations if window[0] <= f.onset <= window[1]]
            if layer_kind == "gazeplot":
                layer = render_gazeplot(
                    selected, rec.screen,
                    r_min=rest.get("r_min", 6.0), r_scale=rest.get("r_scale", 0.02),
                )
            else:
                cfg = HeatmapConfig(
                    kernel_sigma_px=rest.get("sigma", 25.0),
                    gradient=gradient,
                    opacity=rest.get("opacity", 0.6),
                )
                layer = render_heatmap(selected, rec.screen, cfg)
        ext = "png" if layer.media_type == "image/png" else "svg"
        locator = self.ws.write_artifact(f"{job_id}.{ext}", layer.to_bytes())
        return {"locator": locator, "media_type": layer.media_type}, locator


def create_app(workspace_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    ws = Workspace(workspace_dir)
    runner = AnalysisRunner(ws)
    app = FastAPI(title="gazekit", docs_url=None, redoc_url=None)
    app.state.workspace = ws

    @app.exception_handler(GazekitError)
    async def _gazekit_error(request: Request, exc: GazekitError):
        status = _HTTP_STATUS.get(exc.code, 400)
        return JSONResponse({"code": exc.code, "message": str(exc)}, status_code=status)

    @app.get("/")
    async def root():
        return {"service": "gazekit", "recordings": ws.recording_ids()}

    @app.get("/recordings")
    async def list_recordings():
        return {"recordings": ws.recording_ids()}

    @app.post("/recordings", status_code=201)
    async def upload_recording(request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise errors.ValidationError(f"body: not valid JSON ({exc})") from exc
        if not isinstance(body, dict) or not isinstance(body.get("log"), str):
            raise errors.ValidationError("body.log: expected the gaze log text")
        meta = None
        if body.get("meta") is not None:
            raw = body["meta"]
            meta = parse_trial_meta(raw if isinstance(raw, str) else json.dumps(raw))
        if isinstance(body.get("screen"), dict):
            try:
                screen = ScreenSpec(int(body["screen"]["width"]), int(body["screen"]["height"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise errors.ValidationError(f"body.screen: {exc}") from exc
        elif meta is not None and meta.screen is not None:
            screen = meta.screen
        else:
            raise errors.ValidationError("body.screen: screen dimensions required")
        rec = parse_gaze_log(body["log"], screen)
        extra = None
        if meta is not None:
            rec.responses = meta.responses
            rec.stimulus = meta.stimulus
            extra = {
                "aois": [
                    {"name": a.name, "polygon": [list(p) for p in a.polygon]}
                    for a in meta.aois
                ]
            }
        rec_id = ws.add_recording(rec, extra)
        return {"id": rec_id}

    @app.get("/recordings/{rec_id}")
    async def get_recording(rec_id: str):
        return ws.recording_doc(rec_id)

    @app.get("/recordings/{rec_id}/fixations")
    async def get_fixations(rec_id: str, request: Request):
        params = _query_params(request, _FIXATION_KEYS)
        job = runner.run(rec_id, "fixate", params)
        if job["status"] == "failed":
            raise _job_error(job)
        return job["result"]

    @app.post("/recordings/{rec_id}/analyses")
    async def run_analysis(rec_id: str, request: Request):
        try:
            body = await request.json()
        except Exception as exc:
            raise errors.ValidationError(f"body: not valid JSON ({exc})") from exc
        kind = body.get("kind")
        params = body.get("params") or {}
        if not isinstance(params, dict):
            raise errors.ValidationError("body.params: expected an object")
        return runner.run(rec_id, kind, params)

    @app.get("/analyses/{job_id}")
    async def get_analysis(job_id: str):
        return ws.require_job(job_id)

    @app.get("/recordings/{rec_id}/layers/{layer_kind}")
    async def get_layer(rec_id: str, layer_kind: str, request: Request):
        if layer_kind not in LAYER_KINDS:
            raise errors.ValidationError(f"layer: expected one of {LAYER_KINDS}")
        spec = dict(_FIXATION_KEYS)
        spec.update({k: v for k, v in _RENDER_KEYS.items() if k not in ("layer", "window")})
        params = _query_params(request, spec, extra_keys={"window"})
        if "window" in params:
            parts = str(params["window"]).split(",")
            params["window"] = _window_pair(parts, "query")
            params["window"] = list(params["window"])
        params["layer"] = layer_kind
        job = runner.run(rec_id, "render", params)
        if job["status"] == "failed":
            raise _job_error(job)
        data = ws.read_artifact(Path(job["artifact"]).name)
        return Response(content=data, media_type=job["result"]["media_type"])

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def _query_params(request: Request, spec: dict, extra_keys: set[str] = frozenset()) -> dict:
    params = {}
    for key, value in request.query_params.items():
        if key in extra_keys:
            params[key] = value
            continue
        if key not in spec:
            raise errors.ValidationError(f"query.{key}: unknown parameter")
        cast = spec[key]
        try:
            params[key] = cast(value)
        except (TypeError, ValueError) as exc:
            raise errors.ValidationError(f"query.{key}: {exc}") from exc
    return params


def _job_error(job: dict) -> GazekitError:
    code = job["error"]["code"]
    exc_type = getattr(errors, code, GazekitError)
    return exc_type(job["error"]["message"])
