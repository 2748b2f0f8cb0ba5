"""Parsing, validation, and export of gaze recordings and trial metadata.

File formats (all UTF-8, LF line endings):

* Gaze log: CSV with header ``t_ms,x_px,y_px,valid``, one sample per line.
  ``valid`` is ``1``/``0`` (``true``/``false`` also accepted).
* Trial metadata: JSON object with optional sections ``screen``,
  ``stimulus``, ``aoi`` (list of named rects/polygons) and ``responses``.
* Fixation file: CSV with header ``cx_px,cy_px,onset_ms,duration_ms,n``;
  centroids carry 6 decimal places and round-trip exactly at that precision.

Coordinate convention throughout: origin at the top-left screen corner,
x grows rightward, y grows downward, units are pixels.  Timestamps are
rebased to integer milliseconds since the first retained sample.
"""

from __future__ import annotations

import io
import json
import math
import warnings
from dataclasses import dataclass, field
from statistics import median
from typing import IO, Iterable

from gazekit.errors import CorruptLog, EmptyLog, SchemaError
from gazekit.fixation import Fixation
from gazekit.sequence import AoiSpec

GAZE_LOG_HEADER = "t_ms,x_px,y_px,valid"
FIXATION_HEADER = "cx_px,cy_px,onset_ms,duration_ms,n"

_TRUTHY = {"1", "true"}
_FALSY = {"0", "false"}


@dataclass(frozen=True)
class ScreenSpec:
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("screen dimensions must be positive")


@dataclass(frozen=True)
class GazeSample:
    """One timestamped on-screen gaze coordinate.

    ``valid`` is false for tracker dropouts and for coordinates outside the
    screen; invalid samples are retained (not dropped) so fixation detection
    can treat gaps explicitly.
    """

    t: int
    x: float
    y: float
    valid: bool


@dataclass(frozen=True)
class ResponseEvent:
    question_id: str
    answer: str
    t: int
    correct: bool | None = None


@dataclass(frozen=True)
class StimulusInfo:
    path: str
    width: int | None = None
    height: int | None = None
    scale: float = 1.0


@dataclass
class ParseReport:
    """Row accounting for one parsed gaze log.

    Invariant: rows_in == retained samples + malformed + deduped.
    """

    rows_in: int = 0
    malformed: int = 0
    deduped: int = 0
    marked_invalid: int = 0


@dataclass
class Recording:
    id: str
    screen: ScreenSpec
    samples: list[GazeSample]
    responses: list[ResponseEvent] = field(default_factory=list)
    stimulus: StimulusInfo | None = None
    sample_rate_hz: float = 60.0
    report: ParseReport | None = None

    def valid_samples(self) -> list[GazeSample]:
        return [s for s in self.samples if s.valid]

    def duration_ms(self) -> int:
        return self.samples[-1].t if self.samples else 0


@dataclass
class TrialMeta:
    """Parsed trial-metadata document: stimulus, AOIs, question responses."""

    screen: ScreenSpec | None = None
    stimulus: StimulusInfo | None = None
    aois: list[AoiSpec] = field(default_factory=list)
    responses: list[ResponseEvent] = field(default_factory=list)


def _lines(raw: str | IO[str] | Iterable[str]) -> list[str]:
    if isinstance(raw, str):
        return raw.splitlines()
    if isinstance(raw, io.TextIOBase) or hasattr(raw, "read"):
        return raw.read().splitlines()
    return [line.rstrip("\n") for line in raw]


# Recordings never run longer than ~2.8 h, so a first timestamp above this
# (or below zero) can only be a wall-clock epoch and triggers auto-rebasing.
_WALL_CLOCK_MS = 10_000_000


def parse_gaze_log(
    raw: str | IO[str] | Iterable[str],
    screen: ScreenSpec,
    rec_id: str = "recording",
    sample_rate_hz: float | None = None,
    rebase: bool | str = "auto",
) -> Recording:
    """Parse a gaze log into a Recording.

    Rows are stably sorted by timestamp and duplicate timestamps are
    collapsed (first occurrence wins).  Logs carrying absolute wall-clock
    times are rebased to ms since the first retained sample (``rebase=True``
    forces this, ``False`` never rebases, ``"auto"`` rebases when the first
    timestamp cannot be a relative one).  In-file coordinates outside the
    screen are kept but marked invalid.  Malformed rows are counted, never
    silently dropped: the returned report reconciles
    rows_in = samples + malformed + deduped.

    Raises EmptyLog (no data rows), SchemaError (bad header), CorruptLog
    (more than half the rows malformed).
    """
    lines = [ln for ln in _lines(raw) if ln.strip()]
    if not lines:
        raise EmptyLog("gaze log is empty")
    header = [c.strip().lower() for c in lines[0].split(",")]
    if header != GAZE_LOG_HEADER.split(","):
        raise SchemaError(f"expected header {GAZE_LOG_HEADER!r}, got {lines[0]!r}")
    rows = lines[1:]
    if not rows:
        raise EmptyLog("gaze log has a header but no data rows")

    report = ParseReport(rows_in=len(rows))
    parsed: list[tuple[float, float, float, bool]] = []
    for row in rows:
        fields = [f.strip() for f in row.split(",")]
        if len(fields) != 4:
            report.malformed += 1
            continue
        try:
            t = float(fields[0])
            x = float(fields[1])
            y = float(fields[2])
        except ValueError:
            report.malformed += 1
            continue
        flag = fields[3].lower()
        if not (math.isfinite(t) and math.isfinite(x) and math.isfinite(y)) or (
            flag not in _TRUTHY and flag not in _FALSY
        ):
            report.malformed += 1
            continue
        parsed.append((t, x, y, flag in _TRUTHY))

    if 2 * report.malformed > report.rows_in:
        raise CorruptLog(
            f"{report.malformed} of {report.rows_in} rows malformed"
        )

    # Stable sort keeps first occurrence first among equal timestamps.
    parsed.sort(key=lambda r: r[0])
    first_t = parsed[0][0] if parsed else 0.0
    if rebase == "auto":
        rebase = first_t < 0 or first_t > _WALL_CLOCK_MS
    t0 = first_t if rebase else 0.0
    samples: list[GazeSample] = []
    last_t: int | None = None
    for t_raw, x, y, valid in parsed:
        t = round(t_raw - t0)
        if last_t is not None and t <= last_t:
            report.deduped += 1
            continue
        last_t = t
        if valid and not (0 <= x <= screen.width and 0 <= y <= screen.height):
            valid = False
            report.marked_invalid += 1
        samples.append(GazeSample(t=t, x=x, y=y, valid=valid))

    if sample_rate_hz is None:
        diffs = [b.t - a.t for a, b in zip(samples, samples[1:])]
        sample_rate_hz = 1000.0 / median(diffs) if diffs else 60.0
    return Recording(
        id=rec_id,
        screen=screen,
        samples=samples,
        sample_rate_hz=sample_rate_hz,
        report=report,
    )


_META_KEYS = {"screen", "stimulus", "aoi", "responses"}
_AOI_KEYS = {"name", "rect", "polygon"}
_RESPONSE_KEYS = {"question_id", "answer", "t_ms", "correct"}


def parse_trial_meta(raw: str | IO[str]) -> TrialMeta:
    """Parse a trial-metadata JSON document.

    Unknown fields produce warnings, not errors.  AOI rectangles are
    expanded to 4-vertex polygons; any polygon with fewer than 3 vertices
    or zero area raises GeometryError.  Responses come back time-ordered.
    """
    text = raw if isinstance(raw, str) else raw.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"trial metadata is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("trial metadata must be a JSON object")

    for key in doc:
        if key not in _META_KEYS:
            warnings.warn(f"unknown trial-metadata field {key!r} ignored")

    meta = TrialMeta()
    if "screen" in doc:
        meta.screen = ScreenSpec(int(doc["screen"]["width"]), int(doc["screen"]["height"]))
    if "stimulus" in doc:
        s = doc["stimulus"]
        meta.stimulus = StimulusInfo(
            path=str(s.get("path", "")),
            width=s.get("width"),
            height=s.get("height"),
            scale=float(s.get("scale", 1.0)),
        )

    for item in doc.get("aoi", []):
        for key in item:
            if key not in _AOI_KEYS:
                warnings.warn(f"unknown AOI field {key!r} ignored")
        name = str(item.get("name", f"aoi{len(meta.aois)}"))
        if "rect" in item:
            x0, y0, x1, y1 = (float(v) for v in item["rect"])
            vertices = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        else:
            vertices = [(float(p[0]), float(p[1])) for p in item.get("polygon", [])]
        meta.aois.append(AoiSpec(name=name, polygon=vertices))  # validates geometry

    for item in doc.get("responses", []):
        for key in item:
            if key not in _RESPONSE_KEYS:
                warnings.warn(f"unknown response field {key!r} ignored")
        meta.responses.append(
            ResponseEvent(
                question_id=str(item["question_id"]),
                answer=str(item.get("answer", "")),
                t=int(item["t_ms"]),
                correct=item.get("correct"),
            )
        )
    meta.responses.sort(key=lambda r: r.t)
    return meta


def export_fixations(fixations: list[Fixation]) -> str:
    """Serialize fixations to the documented CSV schema (header always present)."""
    out = [FIXATION_HEADER]
    for f in fixations:
        out.append(f"{f.cx:.6f},{f.cy:.6f},{f.onset},{f.duration},{f.n}")
    return "\n".join(out) + "\n"


def parse_fixations(raw: str | IO[str]) -> list[Fixation]:
    """Inverse of export_fixations; exact on all fields at 6 decimal places."""
    lines = [ln for ln in _lines(raw) if ln.strip()]
    if not lines:
        raise EmptyLog("fixation file is empty")
    if [c.strip().lower() for c in lines[0].split(",")] != FIXATION_HEADER.split(","):
        raise SchemaError(f"expected header {FIXATION_HEADER!r}, got {lines[0]!r}")
    fixations = []
    for row in lines[1:]:
        cx, cy, onset, duration, n = (f.strip() for f in row.split(","))
        fixations.append(
            Fixation(cx=float(cx), cy=float(cy), onset=int(onset), duration=int(duration), n=int(n))
        )
    return fixations


# --- Recording <-> JSON (used by the CLI and the service workspace) --------

def recording_to_dict(rec: Recording) -> dict:
    return {
        "id": rec.id,
        "screen": {"width": rec.screen.width, "height": rec.screen.height},
        "stimulus": None
        if rec.stimulus is None
        else {
            "path": rec.stimulus.path,
            "width": rec.stimulus.width,
            "height": rec.stimulus.height,
            "scale": rec.stimulus.scale,
        },
        "sample_rate_hz": rec.sample_rate_hz,
        "samples": [[s.t, s.x, s.y, 1 if s.valid else 0] for s in rec.samples],
        "responses": [
            {"question_id": r.question_id, "answer": r.answer, "t_ms": r.t, "correct": r.correct}
            for r in rec.responses
        ],
        "report": None
        if rec.report is None
        else {
            "rows_in": rec.report.rows_in,
            "malformed": rec.report.malformed,
            "deduped": rec.report.deduped,
            "marked_invalid": rec.report.marked_invalid,
        },
    }


def recording_from_dict(doc: dict) -> Recording:
    screen = ScreenSpec(int(doc["screen"]["width"]), int(doc["screen"]["height"]))
    stim = doc.get("stimulus")
    rep = doc.get("report")
    return Recording(
        id=doc["id"],
        screen=screen,
        samples=[GazeSample(t=int(t), x=float(x), y=float(y), valid=bool(v)) for t, x, y, v in doc["samples"]],
        responses=[
            ResponseEvent(
                question_id=r["question_id"],
                answer=r.get("answer", ""),
                t=int(r["t_ms"]),
                correct=r.get("correct"),
            )
            for r in doc.get("responses", [])
        ],
        stimulus=None
        if stim is None
        else StimulusInfo(stim.get("path", ""), stim.get("width"), stim.get("height"), stim.get("scale", 1.0)),
        sample_rate_hz=float(doc.get("sample_rate_hz", 60.0)),
        report=None
        if rep is None
        else ParseReport(rep["rows_in"], rep["malformed"], rep["deduped"], rep["marked_invalid"]),
    )
