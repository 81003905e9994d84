"""Scoring: region similarity J, contour accuracy F, and round curves.

The headline number is the area under the J&F-versus-round curve, which is
hardware independent: it depends only on how many interaction rounds were
spent, never on wall-clock time. Time-based scores are also available but are
kept in a clearly separated, hardware-dependent corner of the report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .maskops import BinaryMask, LabelMask, boundary, dilate, object_mask, round_half_up


@dataclass(frozen=True)
class ObjectScore:
    j: float
    f: float

    @property
    def jf(self) -> float:
        return (self.j + self.f) / 2.0


@dataclass(frozen=True)
class FrameScore:
    """Per-object J/F/J&F scores for one frame."""

    frame_index: int
    per_object: dict[int, ObjectScore]

    def mean_jf(self) -> float:
        if not self.per_object:
            raise ValueError("frame score holds no objects")
        return sum(s.jf for s in self.per_object.values()) / len(self.per_object)


@dataclass(frozen=True)
class RoundSample:
    round: int
    global_jf: float
    wall_clock_seconds: float | None = None


@dataclass
class RoundCurve:
    """Per-round global J&F samples, 1-based and strictly increasing."""

    samples: list[RoundSample] = field(default_factory=list)

    def validate(self) -> None:
        prev = 0
        for s in self.samples:
            if s.round <= prev:
                raise ValueError(f"round indices must increase strictly, got {s.round} after {prev}")
            if not 0.0 <= s.global_jf <= 1.0:
                raise ValueError(f"global_jf must lie in [0, 1], got {s.global_jf}")
            prev = s.round

    def append(self, sample: RoundSample) -> None:
        self.samples.append(sample)
        self.validate()


@dataclass
class EvaluationReport:
    """Everything one benchmark run produced, ready for serialization."""

    per_sequence: dict[str, RoundCurve]
    global_curve: RoundCurve
    r_auc: float
    max_rounds: int
    config: dict
    auc_time: float | None = None
    jf_at_60: float | None = None
    partial: bool = False
    errors: dict[str, str] = field(default_factory=dict)


def default_tolerance(width: int, height: int) -> int:
    """Boundary-matching tolerance: 0.8% of the frame diagonal, in pixels."""
    return round_half_up(0.008 * math.hypot(width, height))


def _check_same_shape(pred: BinaryMask, gt: BinaryMask) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=bool)
    g = np.asarray(gt, dtype=bool)
    if p.shape != g.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {g.shape}")
    return p, g


def jaccard(pred: BinaryMask, gt: BinaryMask) -> float:
    """Intersection over union; two empty masks score a perfect 1.0."""
    p, g = _check_same_shape(pred, gt)
    union = int(np.count_nonzero(p | g))
    if union == 0:
        return 1.0
    inter = int(np.count_nonzero(p & g))
    return inter / union


def boundary_f(pred: BinaryMask, gt: BinaryMask, tolerance: int) -> float:
    """F-measure of boundary pixels matched within a Chebyshev tolerance.

    Precision counts predicted boundary pixels within ``tolerance`` of the
    ground-truth boundary; recall is symmetric. Both boundaries empty scores
    1.0; exactly one empty scores 0.0.
    """
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    p, g = _check_same_shape(pred, gt)
    bp = boundary(p)
    bg = boundary(g)
    n_bp = int(np.count_nonzero(bp))
    n_bg = int(np.count_nonzero(bg))
    if n_bp == 0 and n_bg == 0:
        return 1.0
    if n_bp == 0 or n_bg == 0:
        return 0.0
    precision = int(np.count_nonzero(bp & dilate(bg, tolerance))) / n_bp
    recall = int(np.count_nonzero(bg & dilate(bp, tolerance))) / n_bg
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def frame_score(
    pred: LabelMask,
    gt: LabelMask,
    objects,
    tolerance: int,
    frame_index: int = 0,
) -> FrameScore:
    """Per-object J and F for one frame of a multi-object label mask."""
    p = np.asarray(pred)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {g.shape}")
    ids = sorted(int(o) for o in objects)
    if not ids:
        raise ValueError("objects must be nonempty")
    per_object: dict[int, ObjectScore] = {}
    for o in ids:
        pm = object_mask(p, o)
        gm = object_mask(g, o)
        per_object[o] = ObjectScore(j=jaccard(pm, gm), f=boundary_f(pm, gm, tolerance))
    return FrameScore(frame_index=frame_index, per_object=per_object)


def _held_last_by_round(curve: RoundCurve, max_rounds: int) -> list[float]:
    curve.validate()
    if not curve.samples:
        raise ValueError("curve must hold at least one sample")
    if curve.samples[-1].round > max_rounds:
        raise ValueError(
            f"curve reaches round {curve.samples[-1].round} beyond max_rounds={max_rounds}"
        )
    values: list[float] = []
    it = iter(curve.samples)
    current = next(it)
    upcoming = next(it, None)
    last_value = 0.0
    for r in range(1, max_rounds + 1):
        while upcoming is not None and upcoming.round <= r:
            current, upcoming = upcoming, next(it, None)
        if current.round <= r:
            last_value = current.global_jf
        values.append(last_value)
    return values


def round_auc(curve: RoundCurve, max_rounds: int) -> float:
    """Mean J&F over rounds 1..max_rounds, holding the last sample constant.

    Deliberately ignores wall-clock timestamps so the value reproduces on any
    hardware. The mean is taken in exact rational arithmetic (then rounded
    once), so a constant curve scores exactly that constant.
    """
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be >= 1, got {max_rounds}")
    values = _held_last_by_round(curve, max_rounds)
    total = sum(Fraction(v) for v in values)
    return float(total / max_rounds)


def _check_timestamps(curve: RoundCurve) -> list[tuple[float, float]]:
    curve.validate()
    if not curve.samples:
        raise ValueError("curve must hold at least one sample")
    pts: list[tuple[float, float]] = []
    prev_t = -math.inf
    for s in curve.samples:
        if s.wall_clock_seconds is None:
            raise ValueError(f"round {s.round} carries no timestamp")
        if s.wall_clock_seconds <= prev_t:
            raise ValueError("timestamps must increase strictly")
        prev_t = s.wall_clock_seconds
        pts.append((s.wall_clock_seconds, s.global_jf))
    return pts


def time_auc(curve: RoundCurve, budget_seconds: float) -> float:
    """Step-function integral of J&F over [0, budget], normalized by budget.

    The curve is 0 before the first sample and holds its last value after the
    final one. Hardware dependent by construction.
    """
    if budget_seconds <= 0:
        raise ValueError(f"budget_seconds must be > 0, got {budget_seconds}")
    pts = _check_timestamps(curve)
    total = 0.0
    for i, (t, value) in enumerate(pts):
        if t >= budget_seconds:
            break
        t_next = pts[i + 1][0] if i + 1 < len(pts) else budget_seconds
        total += value * (min(t_next, budget_seconds) - t)
    return total / budget_seconds


def jf_at_time(curve: RoundCurve, t: float) -> float:
    """Value of the step-function J&F curve at time ``t`` (0 before the first sample)."""
    pts = _check_timestamps(curve)
    value = 0.0
    for ts, v in pts:
        if ts <= t:
            value = v
        else:
            break
    return value
