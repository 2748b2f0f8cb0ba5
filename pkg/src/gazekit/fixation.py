"""Dispersion-threshold (I-DT) fixation detection and per-question summaries.

A fixation is a maximal window of valid samples whose dispersion
(x-range + y-range) stays within ``dispersion_px`` and whose time span
reaches ``min_duration_ms``.  Gaps between consecutive valid samples longer
than ``max_gap_ms`` (blinks, dropouts) split windows; shorter gaps are
bridged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from gazekit.errors import NoValidSamples

if TYPE_CHECKING:  # pragma: no cover
    from gazekit.ingest import GazeSample, Recording, ResponseEvent


@dataclass(frozen=True)
class Fixation:
    """A dispersion-stable gaze segment.

    ``cx, cy`` is the arithmetic mean of member-sample coordinates; ``onset``
    and ``duration`` are in ms; ``n`` counts member samples.
    """

    cx: float
    cy: float
    onset: int
    duration: int
    n: int


@dataclass(frozen=True)
class FixationConfig:
    dispersion_px: float = 60.0
    min_duration_ms: int = 100
    max_gap_ms: int = 75

    def __post_init__(self):
        if self.dispersion_px <= 0 or self.min_duration_ms <= 0 or self.max_gap_ms <= 0:
            raise ValueError("all fixation-config fields must be positive")


def _runs(samples: list[GazeSample], max_gap_ms: int) -> list[list[GazeSample]]:
    """Split valid samples into runs free of gaps longer than max_gap_ms."""
    runs: list[list[GazeSample]] = []
    current: list[GazeSample] = []
    for s in samples:
        if not s.valid:
            continue
        if current and s.t - current[-1].t > max_gap_ms:
            runs.append(current)
            current = []
        current.append(s)
    if current:
        runs.append(current)
    return runs


def _emit(window: list[GazeSample]) -> Fixation:
    n = len(window)
    return Fixation(
        cx=sum(s.x for s in window) / n,
        cy=sum(s.y for s in window) / n,
        onset=window[0].t,
        duration=window[-1].t - window[0].t,
        n=n,
    )


def detect_fixations(recording: Recording, cfg: FixationConfig | None = None) -> list[Fixation]:
    """I-DT segmentation of a recording into fixations.

    Raises NoValidSamples when the recording has no valid sample.  Returned
    fixations are disjoint in time, ordered by onset, and each satisfies
    duration >= cfg.min_duration_ms.
    """
    cfg = cfg or FixationConfig()
    valid = [s for s in recording.samples if s.valid]
    if not valid:
        raise NoValidSamples(f"recording {recording.id!r} has no valid samples")

    fixations: list[Fixation] = []
    for run in _runs(valid, cfg.max_gap_ms):
        i = 0
        while i < len(run):
            # Smallest window starting at i that spans the minimum duration.
            j = i
            while j < len(run) and run[j].t - run[i].t < cfg.min_duration_ms:
                j += 1
            if j >= len(run):
                break  # remaining samples cannot span min duration
            xs = [s.x for s in run[i : j + 1]]
            ys = [s.y for s in run[i : j + 1]]
            min_x, max_x = min(xs), max(xs)
            min_y, max_y = min(ys), max(ys)
            if (max_x - min_x) + (max_y - min_y) <= cfg.dispersion_px:
                while j + 1 < len(run):
                    s = run[j + 1]
                    nx_lo, nx_hi = min(min_x, s.x), max(max_x, s.x)
                    ny_lo, ny_hi = min(min_y, s.y), max(max_y, s.y)
                    if (nx_hi - nx_lo) + (ny_hi - ny_lo) > cfg.dispersion_px:
                        break
                    min_x, max_x, min_y, max_y = nx_lo, nx_hi, ny_lo, ny_hi
                    j += 1
                fixations.append(_emit(run[i : j + 1]))
                i = j + 1
            else:
                i += 1
    return fixations


@dataclass(frozen=True)
class QuestionSummary:
    question_id: str
    fixation_count: int
    total_fixation_ms: int
    mean_duration_ms: float
    latency_ms: int


def fixation_summary(
    fixations: list[Fixation], responses: list[ResponseEvent]
) -> list[QuestionSummary]:
    """Aggregate fixations per question.

    Question i owns the interval [t_{i-1}, t_i) with t_0 reference = 0, so
    its latency is t_i - t_{i-1}.  Fixations are assigned by onset; onsets
    at or past the final response belong to no question.  Empty intervals
    yield zero-count aggregates.
    """
    summaries = []
    prev_t = 0
    for resp in responses:
        assigned = [f for f in fixations if prev_t <= f.onset < resp.t]
        total = sum(f.duration for f in assigned)
        summaries.append(
            QuestionSummary(
                question_id=resp.question_id,
                fixation_count=len(assigned),
                total_fixation_ms=total,
                mean_duration_ms=total / len(assigned) if assigned else 0.0,
                latency_ms=resp.t - prev_t,
            )
        )
        prev_t = resp.t
    return summaries
