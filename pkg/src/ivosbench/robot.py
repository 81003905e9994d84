"""The simulated user driving the round-based protocol.

Each round the robot scores every frame, picks the worst-segmented one
(previously annotated frames stay eligible), derives the erroneous regions
against ground truth, and emits corrective clicks via the configured
strategy. When no recorded scribbles exist, scribble paths for the
scribble-based strategies are synthesized as skeletons of the erroneous
regions. Round 1 is always capped at one click per object.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interactions import (
    Click,
    Scribble,
    cap_per_round,
    click_per_object,
    click_per_scribble,
    clicks_from_error_regions,
    error_regions,
)
from .maskops import LabelMask, Region, skeletonize
from .metrics import FrameScore, default_tolerance, frame_score
from .scheduler import SessionState

STRATEGIES = ("f1", "f2", "f3")


@dataclass(frozen=True)
class RoundAnnotation:
    """One round's worth of clicks, all on a single frame."""

    round: int
    frame_index: int
    clicks: tuple[Click, ...]

    def __post_init__(self):
        if self.round < 1:
            raise ValueError(f"round must be >= 1, got {self.round}")
        for c in self.clicks:
            if c.frame_index != self.frame_index:
                raise ValueError("all clicks of an annotation must share its frame")


@dataclass(frozen=True)
class BudgetConfig:
    """Benchmark budget: round cap plus the optional per-object time budget."""

    max_rounds: int = 8
    time_budget_per_object_seconds: float = 30.0

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if self.time_budget_per_object_seconds <= 0:
            raise ValueError("time_budget_per_object_seconds must be > 0")


@dataclass
class GroundTruth:
    """Reference label masks for a full sequence plus the declared object ids."""

    masks: list[LabelMask]
    object_ids: tuple[int, ...]

    def __post_init__(self):
        if not self.masks:
            raise ValueError("ground truth needs at least one frame")
        shape = np.asarray(self.masks[0]).shape
        for i, m in enumerate(self.masks):
            if np.asarray(m).shape != shape:
                raise ValueError(f"frame {i} has shape {np.asarray(m).shape}, expected {shape}")
        if not self.object_ids:
            raise ValueError("ground truth needs at least one object id")

    @property
    def height(self) -> int:
        return int(np.asarray(self.masks[0]).shape[0])

    @property
    def width(self) -> int:
        return int(np.asarray(self.masks[0]).shape[1])

    @property
    def n_frames(self) -> int:
        return len(self.masks)


def worst_frame(per_frame_scores: list[FrameScore]) -> int:
    """Index of the frame with the lowest mean J&F, ties to the lowest index."""
    if not per_frame_scores:
        raise ValueError("need at least one frame score")
    best_pos = 0
    best_value = per_frame_scores[0].mean_jf()
    for pos in range(1, len(per_frame_scores)):
        value = per_frame_scores[pos].mean_jf()
        if value < best_value:
            best_value = value
            best_pos = pos
    return per_frame_scores[best_pos].frame_index


def synthesize_scribbles(
    fn_regions: list[Region],
    fp_regions: list[Region],
    object_id: int,
    frame_index: int,
    shape: tuple[int, int],
    max_scribbles: int,
    min_region_area: int = 0,
) -> list[Scribble]:
    """Skeleton-path scribbles over the largest erroneous regions.

    False-negative regions carry the object's id; false-positive regions are
    labeled 0 (background correction).
    """
    if max_scribbles < 1:
        raise ValueError(f"max_scribbles must be >= 1, got {max_scribbles}")
    tagged = [(r, object_id) for r in fn_regions] + [(r, 0) for r in fp_regions]
    tagged.sort(key=lambda t: (-t[0].area, t[0].bounding_box[1], t[0].bounding_box[0]))
    scribbles: list[Scribble] = []
    for region, label in tagged:
        if len(scribbles) >= max_scribbles:
            break
        if region.area < min_region_area:
            continue
        path = skeletonize(region, np.ones(shape, dtype=bool))
        scribbles.append(Scribble(object_id=label, path=tuple(path), frame_index=frame_index))
    return scribbles


def _score_all_frames(
    predictions: list[LabelMask], gt: GroundTruth, tolerance: int
) -> list[FrameScore]:
    return [
        frame_score(pred, gt_mask, gt.object_ids, tolerance, frame_index=i)
        for i, (pred, gt_mask) in enumerate(zip(predictions, gt.masks))
    ]


def _clicks_for_frame(
    predictions: list[LabelMask],
    gt: GroundTruth,
    frame: int,
    strategy: str,
    round_number: int,
    max_clicks: int,
    min_area_px: int,
) -> list[Click]:
    shape = (gt.height, gt.width)
    current = predictions[frame]
    clicks: list[Click] = []
    cap = 1 if round_number == 1 else max_clicks
    for o in sorted(gt.object_ids):
        fn, fp = error_regions(current, gt.masks[frame], o)
        if strategy == "f3":
            clicks.extend(
                clicks_from_error_regions(
                    fn, fp, o, frame, shape, max_clicks=cap, min_region_area=min_area_px
                )
            )
            continue
        scribbles = synthesize_scribbles(
            fn, fp, o, frame, shape, max_scribbles=max_clicks, min_region_area=min_area_px
        )
        clicks.extend(
            _scribbles_to_clicks(scribbles, strategy, current, round_number, max_clicks)
        )
    return clicks


def _scribbles_to_clicks(
    scribbles: list[Scribble],
    strategy: str,
    current_labels: LabelMask,
    round_number: int,
    max_clicks: int,
) -> list[Click]:
    """Run f1/f2 over one frame's scribbles and cap per (click-)object."""
    if not scribbles:
        return []
    if strategy == "f1":
        raw: list[Click] = []
        by_label: dict[int, list[Scribble]] = {}
        for s in scribbles:  # insertion order keeps the biggest-error group first
            by_label.setdefault(s.object_id, []).append(s)
        for label in by_label:
            click = click_per_object(by_label[label], current_labels)
            if click is not None:
                raw.append(click)
    elif strategy == "f2":
        raw = click_per_scribble(scribbles, current_labels)
    else:
        raise ValueError(f"unknown scribble strategy {strategy!r}")
    by_object: dict[int, list[Click]] = {}
    for c in raw:
        by_object.setdefault(c.object_id, []).append(c)
    capped: list[Click] = []
    for o in sorted(by_object):
        capped.extend(cap_per_round(by_object[o], max_clicks, round_number))
    return capped


def next_annotation(
    state: SessionState,
    gt: GroundTruth,
    strategy: str,
    max_clicks: int = 3,
    min_region_area_px: int = 0,
    tolerance: int | None = None,
    initial_scribbles: list[list[Scribble]] | None = None,
) -> RoundAnnotation:
    """Produce the next round's corrective clicks.

    Round 1 uses recorded scribbles when available (their frame becomes the
    annotated frame); otherwise, and in every later round, all frames are
    scored, the worst one is selected, and clicks are derived from its
    erroneous regions. A perfect segmentation yields an empty annotation,
    which signals the session to stop early.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if tolerance is None:
        tolerance = default_tolerance(gt.width, gt.height)
    round_number = state.round + 1

    if round_number == 1 and initial_scribbles is not None:
        frames_with = [i for i, per_frame in enumerate(initial_scribbles) if per_frame]
        if frames_with:
            frame = frames_with[0]
            if strategy in ("f1", "f2"):
                clicks = _scribbles_to_clicks(
                    list(initial_scribbles[frame]),
                    strategy,
                    state.label_masks[frame],
                    round_number,
                    max_clicks,
                )
            else:
                clicks = _clicks_for_frame(
                    state.label_masks, gt, frame, strategy, round_number, max_clicks,
                    min_region_area_px,
                )
            return RoundAnnotation(round=round_number, frame_index=frame, clicks=tuple(clicks))

    scores = _score_all_frames(state.label_masks, gt, tolerance)
    frame = worst_frame(scores)
    clicks = _clicks_for_frame(
        state.label_masks, gt, frame, strategy, round_number, max_clicks, min_region_area_px
    )
    return RoundAnnotation(round=round_number, frame_index=frame, clicks=tuple(clicks))
