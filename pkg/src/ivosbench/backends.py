"""Pluggable segmentation backends plus deterministic reference implementations.

Backend contract (anything honoring it can be plugged into the scheduler,
including a bridge to an external inference process):

- interaction(frame, prev, clicks, maps) -> ProbMask
    ``frame`` is the annotated frame's pixel array (H, W, 3) or None,
    ``prev`` the latest retained probability mask for that frame, ``clicks``
    the round's click list for that frame, ``maps`` the rasterized
    interaction channels.
- propagation(target_index, frame, memory) -> ProbMask
    ``memory`` is the ordered list of memory entries (already segmented
    frames with their masks) selected by the scheduler.
- fusion(new, prev, distance_to_near_anchor, distance_to_far_anchor) -> ProbMask
    Blends a freshly propagated mask with the retained one; the distances are
    frame counts to the current annotation and to the previous-round
    annotation just beyond the propagation range.

All callables must be deterministic given identical inputs. The oracle
implementations read ground truth and exist so the harness can be verified at
desk scale; they make no method-performance claim.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .interactions import Click, InteractionMaps, Polarity
from .maskops import LabelMask, component_containing, erode

logger = logging.getLogger(__name__)


@dataclass
class ProbMask:
    """Per-object probability grids in [0, 1] over one frame."""

    width: int
    height: int
    probs: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for o, grid in self.probs.items():
            if grid.shape != (self.height, self.width):
                raise ValueError(
                    f"object {o} grid has shape {grid.shape}, expected {(self.height, self.width)}"
                )

    @classmethod
    def background(cls, width: int, height: int, object_ids) -> "ProbMask":
        return cls(
            width=width,
            height=height,
            probs={int(o): np.zeros((height, width), dtype=np.float64) for o in object_ids},
        )

    @classmethod
    def from_labels(cls, labels: LabelMask, object_ids) -> "ProbMask":
        arr = np.asarray(labels)
        h, w = arr.shape
        return cls(
            width=w,
            height=h,
            probs={int(o): (arr == o).astype(np.float64) for o in object_ids},
        )

    def copy(self) -> "ProbMask":
        return ProbMask(
            width=self.width,
            height=self.height,
            probs={o: grid.copy() for o, grid in self.probs.items()},
        )

    def get(self, object_id: int) -> np.ndarray:
        grid = self.probs.get(int(object_id))
        if grid is None:
            return np.zeros((self.height, self.width), dtype=np.float64)
        return grid

    @property
    def object_ids(self) -> list[int]:
        return sorted(self.probs)

    def argmax_labels(self) -> LabelMask:
        """Hard labels: background score is the product of (1 - p) over objects;
        the winner is the argmax, ties to background then to the lower id."""
        ids = self.object_ids
        if not ids:
            return np.zeros((self.height, self.width), dtype=np.int32)
        stack = [np.ones((self.height, self.width), dtype=np.float64)]
        for o in ids:
            stack[0] = stack[0] * (1.0 - self.probs[o])
        stack.extend(self.probs[o] for o in ids)
        winner = np.argmax(np.stack(stack), axis=0)  # argmax takes the first max: ties favor background, then lower ids
        labels = np.zeros((self.height, self.width), dtype=np.int32)
        for k, o in enumerate(ids, start=1):
            labels[winner == k] = o
        return labels


@dataclass(frozen=True)
class MemoryEntry:
    """An already-segmented frame offered as context for the next propagation step."""

    frame_index: int
    frame: np.ndarray | None
    mask: ProbMask


class OracleInteraction:
    """Test oracle: resolves each click against the ground-truth error regions.

    A positive click for object o sets probability 1 for o on the
    false-negative component containing it (and clears other objects there);
    a negative click clears o on the false-positive component containing it.
    Clicks landing outside any matching error region are no-ops, logged.
    """

    def __init__(self, gt_masks, connectivity: int = 8):
        self.gt_masks = list(gt_masks)
        self.connectivity = connectivity

    def __call__(
        self,
        frame: np.ndarray | None,
        prev: ProbMask,
        clicks: list[Click],
        maps: InteractionMaps | None = None,
    ) -> ProbMask:
        out = prev.copy()
        for click in clicks:
            gt = np.asarray(self.gt_masks[click.frame_index])
            pred = out.argmax_labels()
            o = click.object_id
            x, y = click.position
            if click.polarity is Polarity.POSITIVE:
                error = (gt == o) & (pred != o)
            else:
                error = (pred == o) & (gt != o)
            if not error[y, x]:
                logger.info("oracle ignoring click at (%d, %d): not in an error region of object %d", x, y, o)
                continue
            component = component_containing(error, (x, y), self.connectivity)
            if click.polarity is Polarity.POSITIVE:
                out.probs.setdefault(o, np.zeros((out.height, out.width)))
                out.probs[o][component] = 1.0
                for other in out.object_ids:
                    if other != o:
                        out.probs[other][component] = 0.0
            else:
                if o in out.probs:
                    out.probs[o][component] = 0.0
        return out


class RegionGrowInteraction:
    """Classical backend: positive clicks flood-fill similar colors, negative
    clicks erase the predicted component they land on."""

    def __init__(self, color_tolerance: float = 24 / 255, connectivity: int = 8):
        if not 0 <= color_tolerance <= 1:
            raise ValueError(f"color_tolerance must lie in [0, 1], got {color_tolerance}")
        self.color_tolerance = color_tolerance
        self.connectivity = connectivity

    def __call__(
        self,
        frame: np.ndarray | None,
        prev: ProbMask,
        clicks: list[Click],
        maps: InteractionMaps | None = None,
    ) -> ProbMask:
        if frame is None:
            raise ValueError("region-grow interaction needs frame pixels")
        arr = np.asarray(frame)
        pixels = arr.astype(np.float64)
        if pixels.ndim == 2:
            pixels = pixels[:, :, None]
        if np.issubdtype(arr.dtype, np.integer):
            pixels = pixels / 255.0
        out = prev.copy()
        for click in clicks:
            o = click.object_id
            x, y = click.position
            if click.polarity is Polarity.POSITIVE:
                seed_color = pixels[y, x]
                similar = np.max(np.abs(pixels - seed_color), axis=2) <= self.color_tolerance
                grown = component_containing(similar, (x, y), self.connectivity)
                out.probs.setdefault(o, np.zeros((out.height, out.width)))
                out.probs[o] = np.maximum(out.probs[o], grown.astype(np.float64))
            else:
                predicted = out.argmax_labels() == o
                if not predicted[y, x]:
                    logger.info("region-grow ignoring negative click at (%d, %d): object %d absent", x, y, o)
                    continue
                component = component_containing(predicted, (x, y), self.connectivity)
                if o in out.probs:
                    out.probs[o][component] = 0.0
        return out


class CopyNearestPropagator:
    """Minimal propagator: copy the mask of the nearest memory frame,
    ties going to the smaller frame index."""

    def __call__(self, target_index: int, frame: np.ndarray | None, memory: list[MemoryEntry]) -> ProbMask:
        if not memory:
            raise ValueError("memory must be nonempty")
        best = min(memory, key=lambda e: (abs(e.frame_index - target_index), e.frame_index))
        return best.mask.copy()


class DecayOraclePropagator:
    """Oracle propagator with controlled quality decay: returns the target's
    ground truth eroded by floor(decay * distance-to-nearest-memory) pixels."""

    def __init__(self, gt_masks, object_ids, decay: float = 0.5):
        if decay < 0:
            raise ValueError(f"decay must be >= 0, got {decay}")
        self.gt_masks = list(gt_masks)
        self.object_ids = [int(o) for o in object_ids]
        self.decay = decay

    def __call__(self, target_index: int, frame: np.ndarray | None, memory: list[MemoryEntry]) -> ProbMask:
        if not memory:
            raise ValueError("memory must be nonempty")
        distance = min(abs(e.frame_index - target_index) for e in memory)
        radius = int(np.floor(self.decay * distance))
        gt = np.asarray(self.gt_masks[target_index])
        h, w = gt.shape
        probs = {
            o: erode(gt == o, radius).astype(np.float64) for o in self.object_ids
        }
        return ProbMask(width=w, height=h, probs=probs)


def distance_weighted_fusion(new: ProbMask, prev: ProbMask, d_near: int, d_far: int) -> ProbMask:
    """Convex per-pixel blend trusting the new mask near its source annotation:
    weight = d_far / (d_near + d_far)."""
    if (new.width, new.height) != (prev.width, prev.height):
        raise ValueError("fusion inputs must share dimensions")
    if d_near + d_far <= 0:
        raise ValueError("d_near + d_far must be > 0")
    w = d_far / (d_near + d_far)
    ids = sorted(set(new.object_ids) | set(prev.object_ids))
    probs = {o: w * new.get(o) + (1.0 - w) * prev.get(o) for o in ids}
    return ProbMask(width=new.width, height=new.height, probs=probs)


INTERACTION_BACKENDS = {
    "oracle": OracleInteraction,
    "region-grow": RegionGrowInteraction,
}

PROPAGATION_BACKENDS = {
    "copy": CopyNearestPropagator,
    "decay-oracle": DecayOraclePropagator,
}

FUSION_BACKENDS = {
    "distance-weighted": distance_weighted_fusion,
    "none": None,
}
