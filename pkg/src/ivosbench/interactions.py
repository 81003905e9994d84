"""Click and scribble data model plus the three click-generation strategies.

The strategies are exposed under their protocol names on the CLI:

- ``f1`` -- one click per object, snapped to the scribble point closest to the
  average of all of that object's scribble points.
- ``f2`` -- one click per scribble, snapped the same way per scribble.
- ``f3`` -- clicks at the deepest interior point of the largest erroneous
  regions between prediction and ground truth.

A scribble labeled 0 marks a background correction: its click is negative and
is re-targeted at the object whose current predicted mask contains the click
position; if no object does, the click is dropped (and logged).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .maskops import (
    BinaryMask,
    LabelMask,
    PixelCoord,
    Region,
    connected_components,
    interior_center,
    region_to_mask,
    round_half_up,
)

logger = logging.getLogger(__name__)


class Polarity(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class Scribble:
    """A labeled polyline on one frame; object_id 0 marks background."""

    object_id: int
    path: tuple[PixelCoord, ...]
    frame_index: int

    def __post_init__(self):
        if self.object_id < 0:
            raise ValueError(f"scribble object_id must be >= 0, got {self.object_id}")
        if not self.path:
            raise ValueError("scribble path must be nonempty")


@dataclass(frozen=True)
class Click:
    """A single corrective interaction for one object on one frame."""

    position: PixelCoord
    object_id: int
    polarity: Polarity
    frame_index: int

    def __post_init__(self):
        if self.object_id < 1:
            raise ValueError(f"click object_id must be >= 1, got {self.object_id}")


@dataclass(frozen=True)
class InteractionMaps:
    """Disk-rasterized click channels, one per polarity."""

    positive_map: BinaryMask
    negative_map: BinaryMask


def error_regions(
    pred: LabelMask, gt: LabelMask, object_id: int, connectivity: int = 8
) -> tuple[list[Region], list[Region]]:
    """Connected false-negative and false-positive regions for one object.

    Both lists come back area-descending.
    """
    p = np.asarray(pred)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {g.shape}")
    fn = connected_components((g == object_id) & (p != object_id), connectivity)
    fp = connected_components((p == object_id) & (g != object_id), connectivity)
    return fn, fp


def _snap_to_path(points: list[PixelCoord]) -> PixelCoord:
    """Scribble point closest (Euclidean) to the mean of all points, ties by (y, x)."""
    mean_x = sum(p[0] for p in points) / len(points)
    mean_y = sum(p[1] for p in points) / len(points)
    best = None
    best_key = None
    for x, y in points:
        key = (math.hypot(x - mean_x, y - mean_y), y, x)
        if best_key is None or key < best_key:
            best_key = key
            best = (x, y)
    assert best is not None
    return best


def _click_from_snap(
    position: PixelCoord,
    scribble_object_id: int,
    frame_index: int,
    current_labels: LabelMask | None,
) -> Click | None:
    if scribble_object_id >= 1:
        return Click(position, scribble_object_id, Polarity.POSITIVE, frame_index)
    if current_labels is None:
        logger.info("dropping background click at %s: no prediction to target", position)
        return None
    target = int(np.asarray(current_labels)[position[1], position[0]])
    if target < 1:
        logger.info("dropping background click at %s: no object under it", position)
        return None
    return Click(position, target, Polarity.NEGATIVE, frame_index)


def click_per_object(
    scribbles: list[Scribble], current_labels: LabelMask | None = None
) -> Click | None:
    """Strategy ``f1``: a single click from all scribbles of one object.

    Averages the coordinates of every point of every scribble, then snaps to
    the closest existing scribble point. Returns None only when a background
    scribble cannot be re-targeted.
    """
    if not scribbles:
        raise ValueError("f1 needs at least one scribble")
    object_id = scribbles[0].object_id
    frame_index = scribbles[0].frame_index
    for s in scribbles:
        if s.object_id != object_id or s.frame_index != frame_index:
            raise ValueError("f1 scribbles must share object_id and frame_index")
    points = [p for s in scribbles for p in s.path]
    return _click_from_snap(_snap_to_path(points), object_id, frame_index, current_labels)


def click_per_scribble(
    scribbles: list[Scribble], current_labels: LabelMask | None = None
) -> list[Click]:
    """Strategy ``f2``: one click per scribble, in input order.

    Undroppable background scribbles are omitted from the output.
    """
    if not scribbles:
        raise ValueError("f2 needs at least one scribble")
    clicks = []
    for s in scribbles:
        click = _click_from_snap(
            _snap_to_path(list(s.path)), s.object_id, s.frame_index, current_labels
        )
        if click is not None:
            clicks.append(click)
    return clicks


def clicks_from_error_regions(
    fn_regions: list[Region],
    fp_regions: list[Region],
    object_id: int,
    frame_index: int,
    shape: tuple[int, int],
    max_clicks: int,
    min_region_area: int = 0,
) -> list[Click]:
    """Strategy ``f3``: clicks at the centers of the largest erroneous regions.

    Regions from both lists are merged, sorted area-descending (ties by
    (y_min, x_min)), filtered by ``min_region_area``, and capped at
    ``max_clicks``. False-negative regions yield positive clicks and
    false-positive regions negative ones.
    """
    if max_clicks < 1:
        raise ValueError(f"max_clicks must be >= 1, got {max_clicks}")
    tagged = [(r, Polarity.POSITIVE) for r in fn_regions] + [
        (r, Polarity.NEGATIVE) for r in fp_regions
    ]
    tagged.sort(key=lambda t: (-t[0].area, t[0].bounding_box[1], t[0].bounding_box[0]))
    clicks: list[Click] = []
    for region, polarity in tagged:
        if len(clicks) >= max_clicks:
            break
        if region.area < min_region_area:
            continue
        center = interior_center(region, region_to_mask(region, shape))
        clicks.append(Click(center, object_id, polarity, frame_index))
    return clicks


def cap_per_round(clicks: list[Click], max_clicks: int, round_number: int | None = None) -> list[Click]:
    """Keep at most ``max_clicks`` clicks (order preserved) for one object.

    Round 1 is always capped at a single click per object, whatever the
    configured maximum.
    """
    if max_clicks < 1:
        raise ValueError(f"max_clicks must be >= 1, got {max_clicks}")
    cap = 1 if round_number == 1 else max_clicks
    return list(clicks[:cap])


def rasterize_clicks(clicks: list[Click], width: int, height: int, radius: int) -> InteractionMaps:
    """Paint each click as a Chebyshev disk into the channel of its polarity."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    positive = np.zeros((height, width), dtype=bool)
    negative = np.zeros((height, width), dtype=bool)
    for c in clicks:
        x, y = c.position
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(f"click at ({x}, {y}) lies outside the {width}x{height} frame")
        target = positive if c.polarity is Polarity.POSITIVE else negative
        target[max(0, y - radius) : y + radius + 1, max(0, x - radius) : x + radius + 1] = True
    return InteractionMaps(positive_map=positive, negative_map=negative)


def min_region_area_px(width: int, height: int, fraction: float) -> int:
    """Pixel threshold realizing a small-region filter given as a frame-area fraction."""
    if fraction < 0:
        raise ValueError(f"fraction must be >= 0, got {fraction}")
    return int(np.floor(fraction * width * height + 0.5))
