"""Round orchestration: propagation bounds, memory-frame selection, fusion.

Each round, the freshly annotated frame's mask spreads backward and forward,
one frame per step, stopping one short of the nearest frame annotated in an
earlier round (or at the sequence ends). Every step segments exactly one
frame using a set of memory frames: the annotated frame itself, the frame
inferred in the previous step, and every already-inferred frame whose
distance to the annotation is a multiple of the stride.

The backward pass runs to completion before the forward pass starts, and each
pass only ever reads memory produced in the current round. Fusion with the
retained mask is applied across a whole direction when the frame just beyond
that direction's range was annotated in an earlier round.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backends import MemoryEntry, ProbMask
from .interactions import rasterize_clicks
from .maskops import LabelMask
from .metrics import RoundSample, frame_score

BACKWARD = "backward"
FORWARD = "forward"


@dataclass(frozen=True)
class PropagationPlan:
    """Index plan for one round: bounds, ranges, and fusion triggers."""

    i_r: int
    p_b: int
    p_f: int
    backward: range  # p_b .. i_r-1 ascending
    forward: range   # i_r+1 .. p_f ascending
    fuse_backward: bool
    fuse_forward: bool


@dataclass(frozen=True)
class MemorySelection:
    """Memory frame indices chosen for one propagation step."""

    direction: str
    step: int
    stride: int
    indices: tuple[int, ...]


@dataclass
class SessionState:
    """Everything mutable across rounds of one sequence's session."""

    round: int
    annotated: list[int]
    prob_masks: list[ProbMask]
    label_masks: list[LabelMask]
    logs: list[RoundSample] = field(default_factory=list)
    stopped: bool = False

    @classmethod
    def fresh(cls, width: int, height: int, n_frames: int, object_ids) -> "SessionState":
        probs = [ProbMask.background(width, height, object_ids) for _ in range(n_frames)]
        labels = [np.zeros((height, width), dtype=np.int32) for _ in range(n_frames)]
        return cls(round=0, annotated=[], prob_masks=probs, label_masks=labels)

    @property
    def n_frames(self) -> int:
        return len(self.prob_masks)


@dataclass
class Backends:
    """The three pluggable callables a session drives."""

    interaction: object
    propagation: object
    fusion: object | None = None


def propagation_bounds(prev_annotated, i_r: int, j0: int, jn: int) -> tuple[int, int]:
    """Backward/forward propagation bounds for annotating frame ``i_r``.

    The backward bound is one past the nearest earlier-round annotation below
    ``i_r`` (or the first frame), the forward bound one short of the nearest
    annotation above (or the last frame).
    """
    if not j0 <= i_r <= jn:
        raise ValueError(f"i_r={i_r} outside frame range [{j0}, {jn}]")
    prev = set(int(i) for i in prev_annotated)
    for i in prev:
        if not j0 <= i <= jn:
            raise ValueError(f"annotated index {i} outside frame range [{j0}, {jn}]")
    p_b = max([i + 1 for i in prev if i < i_r] + [j0])
    p_f = min([i - 1 for i in prev if i > i_r] + [jn])
    return p_b, p_f


def propagation_ranges(p_b: int, p_f: int, i_r: int) -> tuple[range, range]:
    """Backward and forward index ranges, both ascending and excluding ``i_r``."""
    if not p_b <= i_r <= p_f:
        raise ValueError(f"bounds ({p_b}, {p_f}) must bracket i_r={i_r}")
    return range(p_b, i_r), range(i_r + 1, p_f + 1)


def fusion_flags(prev_annotated, p_b: int, p_f: int) -> tuple[bool, bool]:
    """Fuse a direction iff the frame just beyond its bound was annotated earlier."""
    prev = set(int(i) for i in prev_annotated)
    return (p_b - 1 in prev), (p_f + 1 in prev)


def build_plan(prev_annotated, i_r: int, j0: int, jn: int) -> PropagationPlan:
    p_b, p_f = propagation_bounds(prev_annotated, i_r, j0, jn)
    backward, forward = propagation_ranges(p_b, p_f, i_r)
    fuse_b, fuse_f = fusion_flags(prev_annotated, p_b, p_f)
    return PropagationPlan(
        i_r=i_r, p_b=p_b, p_f=p_f, backward=backward, forward=forward,
        fuse_backward=fuse_b, fuse_forward=fuse_f,
    )


def memory_indices(i_r: int, s: int, d: int, direction: str, frame_range: range) -> MemorySelection:
    """Memory frame indices for step ``s`` of a propagation pass.

    Always contains the annotated frame. From the direction's range it adds
    every frame strictly between the annotation and the current target whose
    distance to the annotation is a multiple of the stride ``d``, plus the
    frame inferred in the previous step (the adjacent frame), which keeps the
    chain coherent even when it is off-stride.
    """
    if s < 1:
        raise ValueError(f"step must be >= 1, got {s}")
    if d < 1:
        raise ValueError(f"stride must be >= 1, got {d}")
    if direction not in (BACKWARD, FORWARD):
        raise ValueError(f"direction must be '{BACKWARD}' or '{FORWARD}', got {direction!r}")
    members = {i_r}
    in_range = set(frame_range)
    if direction == BACKWARD:
        stride_set = {m for m in in_range if i_r > m > i_r - s and (i_r - m) % d == 0}
        adjacent = i_r - (s - 1)
    else:
        stride_set = {m for m in in_range if i_r < m < i_r + s and (m - i_r) % d == 0}
        adjacent = i_r + (s - 1)
    members |= stride_set
    if adjacent in in_range:
        members.add(adjacent)
    return MemorySelection(direction=direction, step=s, stride=d, indices=tuple(sorted(members)))


def aggregate_objects(prob: ProbMask) -> LabelMask:
    """Collapse per-object probabilities into a single label map.

    The background score per pixel is the product of (1 - p) over all
    objects; the label is the argmax over background and objects, ties going
    to background first and then to the lower object id.
    """
    return prob.argmax_labels()


def run_round(
    state: SessionState,
    annotation,
    backends: Backends,
    gt_masks,
    object_ids,
    tolerance: int,
    stride: int = 5,
    click_radius: int = 1,
    frames=None,
    timing_seconds: float | None = None,
    score_frames=None,
) -> SessionState:
    """Execute one round: interaction, backward pass, forward pass, commit.

    Only frames in the propagation interval are touched; everything outside
    keeps its previous mask bit-for-bit. Any backend failure aborts the round
    with the state unchanged. An annotation without clicks only advances the
    round counter and flags the session as stopped.
    """
    if not annotation.clicks:
        state.round += 1
        state.stopped = True
        return state

    i_r = annotation.frame_index
    plan = build_plan(state.annotated, i_r, 0, state.n_frames - 1)
    height, width = state.label_masks[0].shape
    maps = rasterize_clicks(list(annotation.clicks), width, height, click_radius)

    def frame_pixels(index: int):
        return frames(index) if frames is not None else None

    working: dict[int, ProbMask] = {}
    working[i_r] = backends.interaction(
        frame_pixels(i_r), state.prob_masks[i_r], list(annotation.clicks), maps
    )

    for direction, rng, fuse in (
        (BACKWARD, plan.backward, plan.fuse_backward),
        (FORWARD, plan.forward, plan.fuse_forward),
    ):
        sign = -1 if direction == BACKWARD else 1
        far_anchor = plan.p_b - 1 if direction == BACKWARD else plan.p_f + 1
        for s in range(1, len(rng) + 1):
            target = i_r + sign * s
            selection = memory_indices(i_r, s, stride, direction, rng)
            memory = [
                MemoryEntry(frame_index=m, frame=frame_pixels(m), mask=working[m])
                for m in selection.indices
            ]
            new_mask = backends.propagation(target, frame_pixels(target), memory)
            if fuse and backends.fusion is not None:
                new_mask = backends.fusion(
                    new_mask,
                    state.prob_masks[target],
                    abs(i_r - target),
                    abs(target - far_anchor),
                )
            working[target] = new_mask

    # Commit: all backend calls succeeded, mutate the session in one step.
    for index, mask in working.items():
        state.prob_masks[index] = mask
        state.label_masks[index] = aggregate_objects(mask)
    state.annotated.append(i_r)
    state.round += 1
    global_jf = session_global_jf(state, gt_masks, object_ids, tolerance, score_frames)
    state.logs.append(
        RoundSample(round=state.round, global_jf=global_jf, wall_clock_seconds=timing_seconds)
    )
    return state


def session_global_jf(
    state: SessionState, gt_masks, object_ids, tolerance: int, score_frames=None
) -> float:
    """Mean J&F over every scored (frame, object) pair of the latest masks."""
    indices = range(state.n_frames) if score_frames is None else score_frames
    total = 0.0
    count = 0
    for i in indices:
        score = frame_score(state.label_masks[i], gt_masks[i], object_ids, tolerance)
        for s in score.per_object.values():
            total += s.jf
            count += 1
    return total / count if count else 1.0
