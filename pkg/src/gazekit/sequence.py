"""Region-based scanpath analysis over a 3x3 screen grid.

The screen is split into equal thirds; a point's cell is
``min(floor(3*x/width), 2)`` per axis, so interior grid lines belong to the
higher-index cell and the far edges clamp into the last cell.  Transition
(bigram) counting, first-fixation region, and AOI fixation ratios follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable

import numpy as np

from gazekit.errors import GeometryError, NoFixations, OutOfBounds

if TYPE_CHECKING:  # pragma: no cover
    from gazekit.fixation import Fixation
    from gazekit.ingest import ScreenSpec

_ROWS = ("top", "middle", "bottom")
_COLS = ("left", "center", "right")


class RegionLabel(Enum):
    """One of the 9 grid cells, in reading order (rows top to bottom)."""

    TOP_LEFT = (0, 0)
    TOP_CENTER = (0, 1)
    TOP_RIGHT = (0, 2)
    MIDDLE_LEFT = (1, 0)
    MIDDLE_CENTER = (1, 1)
    MIDDLE_RIGHT = (1, 2)
    BOTTOM_LEFT = (2, 0)
    BOTTOM_CENTER = (2, 1)
    BOTTOM_RIGHT = (2, 2)

    @property
    def row(self) -> str:
        return _ROWS[self.value[0]]

    @property
    def col(self) -> str:
        return _COLS[self.value[1]]

    @property
    def index(self) -> int:
        """Reading-order index 0..8 used for transition-matrix axes."""
        return self.value[0] * 3 + self.value[1]

    def __str__(self) -> str:
        return f"{self.row}-{self.col}"

    @classmethod
    def from_cell(cls, row: int, col: int) -> "RegionLabel":
        return _BY_CELL[(row, col)]

    @classmethod
    def from_name(cls, name: str) -> "RegionLabel":
        row, col = name.split("-")
        return _BY_CELL[(_ROWS.index(row), _COLS.index(col))]


_BY_CELL = {label.value: label for label in RegionLabel}


@dataclass(frozen=True)
class AoiSpec:
    """Named simple polygon in screen pixels; must have positive area."""

    name: str
    polygon: list[tuple[float, float]]

    def __post_init__(self):
        if len(self.polygon) < 3:
            raise GeometryError(f"AOI {self.name!r} has {len(self.polygon)} vertices, need >= 3")
        acc = 0.0
        for (x1, y1), (x2, y2) in zip(self.polygon, self.polygon[1:] + self.polygon[:1]):
            acc += x1 * y2 - x2 * y1
        if abs(acc) / 2.0 <= 0.0:
            raise GeometryError(f"AOI {self.name!r} has zero area")


@dataclass
class TransitionTable:
    """9x9 from-region x to-region counts, reading-order indexed.

    The diagonal holds self-transitions; they are kept here but excluded
    from bigram rankings.
    """

    counts: np.ndarray

    def total(self) -> int:
        return int(self.counts.sum())

    def diagonal_total(self) -> int:
        return int(np.trace(self.counts))

    def to_dict(self) -> dict:
        labels = [str(lbl) for lbl in RegionLabel]
        return {"labels": labels, "counts": self.counts.tolist()}


def region_of(x: float, y: float, screen: ScreenSpec) -> RegionLabel:
    """Grid cell of an in-bounds point; raises OutOfBounds otherwise."""
    if not (0 <= x <= screen.width and 0 <= y <= screen.height):
        raise OutOfBounds(f"({x}, {y}) outside {screen.width}x{screen.height} screen")
    col = min(math.floor(3 * x / screen.width), 2)
    row = min(math.floor(3 * y / screen.height), 2)
    return RegionLabel.from_cell(row, col)


def label_sequence(fixations: list[Fixation], screen: ScreenSpec) -> list[RegionLabel]:
    """One region label per fixation, order-preserving."""
    return [region_of(f.cx, f.cy, screen) for f in fixations]


def first_fixation_region(fixations: list[Fixation], screen: ScreenSpec) -> RegionLabel:
    """Region of the earliest-onset fixation (not the first list element)."""
    if not fixations:
        raise NoFixations("no fixations to take the first region from")
    first = min(fixations, key=lambda f: f.onset)
    return region_of(first.cx, first.cy, screen)


def bigram_frequencies(
    sequence: list[RegionLabel],
) -> tuple[list[tuple[RegionLabel, RegionLabel, int]], TransitionTable]:
    """Count consecutive region pairs and rank the cross-region ones.

    Ranking is by count descending, ties lexicographic on the
    (from, to) label names; self-transitions appear only in the table.
    """
    counts = np.zeros((9, 9), dtype=int)
    for a, b in zip(sequence, sequence[1:]):
        counts[a.index, b.index] += 1
    table = TransitionTable(counts=counts)
    ranking = [
        (a, b, int(counts[a.index, b.index]))
        for a in RegionLabel
        for b in RegionLabel
        if a is not b and counts[a.index, b.index] > 0
    ]
    ranking.sort(key=lambda item: (-item[2], str(item[0]), str(item[1])))
    return ranking, table


def pooled_bigram_frequencies(
    sequences: Iterable[list[RegionLabel]],
) -> tuple[list[tuple[RegionLabel, RegionLabel, int]], TransitionTable]:
    """Pool bigram counts across several sequences (no cross-sequence pairs)."""
    counts = np.zeros((9, 9), dtype=int)
    for seq in sequences:
        _, table = bigram_frequencies(seq)
        counts += table.counts
    table = TransitionTable(counts=counts)
    ranking = [
        (a, b, int(counts[a.index, b.index]))
        for a in RegionLabel
        for b in RegionLabel
        if a is not b and counts[a.index, b.index] > 0
    ]
    ranking.sort(key=lambda item: (-item[2], str(item[0]), str(item[1])))
    return ranking, table


def _on_segment(px: float, py: float, ax: float, ay: float, bx: float, by: float) -> bool:
    cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    scale = max(abs(bx - ax), abs(by - ay), 1.0)
    if abs(cross) > 1e-9 * scale:
        return False
    return min(ax, bx) - 1e-9 <= px <= max(ax, bx) + 1e-9 and min(ay, by) - 1e-9 <= py <= max(
        ay, by
    ) + 1e-9


def point_in_polygon(x: float, y: float, polygon: list[tuple[float, float]]) -> bool:
    """Even-odd rule point-in-polygon test; boundary counts as inside."""
    n = len(polygon)
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        if _on_segment(x, y, ax, ay, bx, by):
            return True
    inside = False
    j = n - 1
    for i in range(n):
        xi, yi = polygon[i]
        xj, yj = polygon[j]
        if (yi > y) != (yj > y):
            x_cross = xi + (y - yi) * (xj - xi) / (yj - yi)
            if x < x_cross:
                inside = not inside
        j = i
    return inside


def aoi_fixation_ratio(fixations: list[Fixation], aoi: AoiSpec) -> float:
    """Share of fixation centroids inside (or on the boundary of) the AOI."""
    if not fixations:
        raise NoFixations("no fixations to compute an AOI ratio over")
    hits = sum(1 for f in fixations if point_in_polygon(f.cx, f.cy, aoi.polygon))
    return hits / len(fixations)
