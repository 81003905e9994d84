"""Session running across sequences, aggregation, and report emission.

A run evaluates each sequence independently (optionally across worker
threads), merges the per-round curves into one global curve weighted by each
sequence's (frame, object) pair count, and scores the area under the
J&F-versus-round curve. Reports serialize to schema-versioned JSON (lossless
round-trip) or CSV. Wall-clock metrics are opt-in and live in a separate,
explicitly hardware-dependent report section.
"""

from __future__ import annotations

import csv
import datetime
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .backends import (
    FUSION_BACKENDS,
    CopyNearestPropagator,
    DecayOraclePropagator,
    OracleInteraction,
    RegionGrowInteraction,
)
from .dataset import DatasetError, SequenceDataset, _decode_annotation, load_dataset, load_scribbles
from .interactions import min_region_area_px
from .maskops import round_half_up
from .metrics import (
    EvaluationReport,
    RoundCurve,
    RoundSample,
    default_tolerance,
    frame_score,
    jf_at_time,
    round_auc,
    time_auc,
)
from .robot import next_annotation
from .scheduler import Backends, SessionState, run_round, session_global_jf

# Published scores of the click-driven neural pipeline this harness was built
# around; they need trained networks and are echoed in reports purely as
# comparison targets.
REFERENCE_TARGETS = {
    "r_auc_jf_click_pipeline": 0.76,
    "r_auc_jf_best_strategy": 0.78,
    "auc_jf_click_pipeline": 0.83,
    "jf_at_60s_click_pipeline": 0.84,
}

# Frame diagonal of the 854x480 resolution the default click radius is tuned for.
_REFERENCE_DIAGONAL = math.hypot(854, 480)


@dataclass
class RunConfig:
    """Everything a benchmark run needs beyond the dataset itself."""

    strategy: str = "f3"
    max_clicks: int = 3
    max_rounds: int = 8
    memory_stride: int = 5
    interaction: str = "oracle"
    propagator: str = "copy"
    fusion: str = "distance-weighted"
    min_region_area: float = 0.001
    click_radius: int | None = None
    seed: int = 0
    report_path: str | None = None
    timing: bool = False
    workers: int = 1
    decay_lambda: float = 0.5
    color_tolerance: float = 24 / 255
    tolerance: int | None = None
    exclude_first_and_last: bool = False
    time_budget_per_object_seconds: float = 30.0

    def __post_init__(self):
        if self.strategy not in ("f1", "f2", "f3"):
            raise ValueError(f"unknown strategy {self.strategy!r}")
        for name, value in (
            ("max_clicks", self.max_clicks),
            ("max_rounds", self.max_rounds),
            ("memory_stride", self.memory_stride),
            ("workers", self.workers),
        ):
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.min_region_area < 0:
            raise ValueError("min_region_area must be >= 0")
        if self.click_radius is not None and self.click_radius < 0:
            raise ValueError("click_radius must be >= 0")
        if self.interaction not in ("oracle", "region-grow"):
            raise ValueError(f"unknown interaction backend {self.interaction!r}")
        if self.propagator not in ("copy", "decay-oracle"):
            raise ValueError(f"unknown propagator {self.propagator!r}")
        if self.fusion not in FUSION_BACKENDS:
            raise ValueError(f"unknown fusion backend {self.fusion!r}")


def auto_click_radius(width: int, height: int) -> int:
    """Default click disk radius: 5 px at 854x480, scaled by the frame diagonal."""
    return max(1, round_half_up(5.0 * math.hypot(width, height) / _REFERENCE_DIAGONAL))


def build_backends(config: RunConfig, dataset: SequenceDataset) -> Backends:
    if config.interaction == "oracle":
        interaction = OracleInteraction(dataset.annotations)
    else:
        interaction = RegionGrowInteraction(color_tolerance=config.color_tolerance)
    if config.propagator == "copy":
        propagation = CopyNearestPropagator()
    else:
        propagation = DecayOraclePropagator(
            dataset.annotations, dataset.object_ids, decay=config.decay_lambda
        )
    return Backends(
        interaction=interaction,
        propagation=propagation,
        fusion=FUSION_BACKENDS[config.fusion],
    )


def _score_frame_indices(n_frames: int, config: RunConfig) -> list[int] | None:
    if config.exclude_first_and_last and n_frames > 2:
        return list(range(1, n_frames - 1))
    return None


def run_session(dataset: SequenceDataset, config: RunConfig) -> tuple[RoundCurve, SessionState]:
    """Run one sequence's interactive session up to the round budget."""
    gt = dataset.ground_truth()
    tolerance = (
        config.tolerance
        if config.tolerance is not None
        else default_tolerance(dataset.width, dataset.height)
    )
    radius = (
        config.click_radius
        if config.click_radius is not None
        else auto_click_radius(dataset.width, dataset.height)
    )
    min_area = min_region_area_px(dataset.width, dataset.height, config.min_region_area)
    score_frames = _score_frame_indices(dataset.n_frames, config)
    backends = build_backends(config, dataset)
    state = SessionState.fresh(dataset.width, dataset.height, dataset.n_frames, dataset.object_ids)

    started = time.perf_counter()
    while state.round < config.max_rounds and not state.stopped:
        annotation = next_annotation(
            state,
            gt,
            config.strategy,
            max_clicks=config.max_clicks,
            min_region_area_px=min_area,
            tolerance=tolerance,
            initial_scribbles=dataset.initial_scribbles,
        )
        run_round(
            state,
            annotation,
            backends,
            gt.masks,
            gt.object_ids,
            tolerance,
            stride=config.memory_stride,
            click_radius=radius,
            frames=dataset.frame,
            timing_seconds=(time.perf_counter() - started) if config.timing else None,
            score_frames=score_frames,
        )
    if not state.logs:
        # Nothing was clickable in round 1; record the untouched state so the
        # curve is never empty.
        value = session_global_jf(state, gt.masks, gt.object_ids, tolerance, score_frames)
        state.logs.append(
            RoundSample(
                round=1,
                global_jf=value,
                wall_clock_seconds=(time.perf_counter() - started) if config.timing else None,
            )
        )
    curve = RoundCurve(samples=list(state.logs))
    curve.validate()
    return curve, state


def _sequence_weight(dataset: SequenceDataset, config: RunConfig) -> int:
    frames = _score_frame_indices(dataset.n_frames, config)
    n_frames = dataset.n_frames if frames is None else len(frames)
    return n_frames * len(dataset.object_ids)


def _held_series(samples: list[RoundSample], max_round: int) -> list[tuple[float, float | None]]:
    """(value, wall_clock) per round 1..max_round, holding the last sample."""
    out: list[tuple[float, float | None]] = []
    pos = 0
    current: RoundSample | None = None
    for r in range(1, max_round + 1):
        while pos < len(samples) and samples[pos].round <= r:
            current = samples[pos]
            pos += 1
        if current is None:
            out.append((0.0, None))
        else:
            out.append((current.global_jf, current.wall_clock_seconds))
    return out


def _aggregate_global(
    results: list[tuple[str, RoundCurve, int]], timing: bool
) -> RoundCurve:
    """Unweighted mean over all (sequence, frame, object) triples per round."""
    max_round = max(curve.samples[-1].round for _, curve, _ in results)
    samples: list[RoundSample] = []
    series = {name: _held_series(curve.samples, max_round) for name, curve, _ in results}
    for r in range(1, max_round + 1):
        total = 0.0
        weight = 0
        clock = 0.0
        for name, _, w in results:
            value, wall = series[name][r - 1]
            total += value * w
            weight += w
            if timing and wall is not None:
                clock += wall
        samples.append(
            RoundSample(
                round=r,
                global_jf=total / weight,
                wall_clock_seconds=clock if timing else None,
            )
        )
    return RoundCurve(samples=samples)


def run_evaluation(datasets: list[SequenceDataset], config: RunConfig) -> EvaluationReport:
    """Evaluate every sequence and aggregate into a single report.

    A failing sequence is recorded in the report's error table and the run
    continues; the report is then marked partial. Results are merged in
    sequence-name order, so worker count never changes the output.
    """
    if not datasets:
        raise ValueError("need at least one sequence")

    def evaluate(dataset: SequenceDataset):
        curve, _ = run_session(dataset, config)
        return curve

    ordered = sorted(datasets, key=lambda d: d.name)
    outcomes: dict[str, RoundCurve | Exception] = {}
    if config.workers == 1:
        for ds in ordered:
            try:
                outcomes[ds.name] = evaluate(ds)
            except Exception as exc:  # noqa: BLE001 - failure isolation per sequence
                outcomes[ds.name] = exc
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = {ds.name: pool.submit(evaluate, ds) for ds in ordered}
            for name, future in futures.items():
                try:
                    outcomes[name] = future.result()
                except Exception as exc:  # noqa: BLE001
                    outcomes[name] = exc

    results: list[tuple[str, RoundCurve, int]] = []
    errors: dict[str, str] = {}
    for ds in ordered:
        outcome = outcomes[ds.name]
        if isinstance(outcome, Exception):
            errors[ds.name] = f"{type(outcome).__name__}: {outcome}"
        else:
            results.append((ds.name, outcome, _sequence_weight(ds, config)))
    if not results:
        raise ValueError(f"every sequence failed: {errors}")

    global_curve = _aggregate_global(results, config.timing)
    r_auc = round_auc(global_curve, config.max_rounds)

    auc_time_value = None
    jf_at_60_value = None
    if config.timing:
        budget = config.max_rounds * config.time_budget_per_object_seconds
        auc_time_value = time_auc(global_curve, budget)
        jf_at_60_value = jf_at_time(global_curve, 60.0)

    return EvaluationReport(
        per_sequence={name: curve for name, curve, _ in results},
        global_curve=global_curve,
        r_auc=r_auc,
        max_rounds=config.max_rounds,
        config=asdict(config),
        auc_time=auc_time_value,
        jf_at_60=jf_at_60_value,
        partial=bool(errors),
        errors=errors,
    )


def _sample_to_dict(sample: RoundSample) -> dict:
    out = {"round": sample.round, "global_jf": float(sample.global_jf)}
    if sample.wall_clock_seconds is not None:
        out["wall_clock_seconds"] = float(sample.wall_clock_seconds)
    return out


def _sample_from_dict(d: dict) -> RoundSample:
    return RoundSample(
        round=int(d["round"]),
        global_jf=float(d["global_jf"]),
        wall_clock_seconds=d.get("wall_clock_seconds"),
    )


def report_to_dict(report: EvaluationReport, generated_at: str | None = None) -> dict:
    """Serialize a report; ``generated_at`` is the single timestamp field."""
    if generated_at is None:
        generated_at = datetime.datetime.now(datetime.timezone.utc).isoformat()
    out = {
        "schema_version": __version__,
        "generated_at": generated_at,
        "config": report.config,
        "reference_targets": dict(REFERENCE_TARGETS),
        "max_rounds": report.max_rounds,
        "sequences": {
            name: [_sample_to_dict(s) for s in curve.samples]
            for name, curve in report.per_sequence.items()
        },
        "global_curve": [_sample_to_dict(s) for s in report.global_curve.samples],
        "r_auc_jf": float(report.r_auc),
        "partial": report.partial,
        "errors": dict(report.errors),
    }
    if report.auc_time is not None or report.jf_at_60 is not None:
        out["timing"] = {
            "hardware_dependent": True,
            "auc_jf": None if report.auc_time is None else float(report.auc_time),
            "jf_at_60s": None if report.jf_at_60 is None else float(report.jf_at_60),
        }
    else:
        out["timing"] = None
    return out


def report_from_dict(data: dict) -> EvaluationReport:
    timing = data.get("timing") or {}
    return EvaluationReport(
        per_sequence={
            name: RoundCurve(samples=[_sample_from_dict(s) for s in samples])
            for name, samples in data["sequences"].items()
        },
        global_curve=RoundCurve(samples=[_sample_from_dict(s) for s in data["global_curve"]]),
        r_auc=float(data["r_auc_jf"]),
        max_rounds=int(data["max_rounds"]),
        config=data["config"],
        auc_time=timing.get("auc_jf"),
        jf_at_60=timing.get("jf_at_60s"),
        partial=bool(data.get("partial", False)),
        errors=dict(data.get("errors", {})),
    )


def write_report(report: EvaluationReport | dict, path, fmt: str = "json") -> None:
    """Write a report as schema-versioned JSON or as per-round CSV rows."""
    data = report if isinstance(report, dict) else report_to_dict(report)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["sequence", "round", "global_jf"])
            for name in data["sequences"]:
                for sample in data["sequences"][name]:
                    writer.writerow([name, sample["round"], repr(sample["global_jf"])])
            writer.writerow(["__summary__", "r_auc_jf", repr(data["r_auc_jf"])])
    else:
        raise ValueError(f"unknown report format {fmt!r} (use 'json' or 'csv')")


def attach_scribbles(datasets: list[SequenceDataset], root, resolution: str | None = None) -> None:
    """Load each sequence's first recorded scribble file, when one exists."""
    root = Path(root)
    for ds in datasets:
        scribble_dir = root / "Scribbles" / ds.name
        if not scribble_dir.is_dir():
            continue
        files = sorted(scribble_dir.glob("*.json"))
        if files:
            ds.initial_scribbles = load_scribbles(
                files[0], ds.width, ds.height, valid_object_ids=ds.object_ids
            )


def score_predictions(
    pred_root,
    gt_root,
    sequences: list[str] | None = None,
    resolution: str | None = None,
    tolerance: int | None = None,
) -> dict:
    """Metrics-only mode: score stored predictions against ground truth.

    Predictions live directly under ``pred_root/<sequence>/NNNNN.png`` in the
    same indexed-PNG encoding as the annotations.
    """
    datasets = load_dataset(gt_root, sequences, resolution)
    pred_root = Path(pred_root)
    per_sequence: dict[str, dict] = {}
    totals = {"j": 0.0, "f": 0.0, "jf": 0.0}
    count = 0
    for ds in sorted(datasets, key=lambda d: d.name):
        seq_dir = pred_root / ds.name
        if not seq_dir.is_dir():
            raise DatasetError(f"missing prediction directory: {seq_dir}")
        paths = sorted(seq_dir.glob("*.png"))
        if len(paths) != ds.n_frames:
            raise DatasetError(
                f"sequence {ds.name!r}: {len(paths)} predictions but {ds.n_frames} annotations"
            )
        tol = tolerance if tolerance is not None else default_tolerance(ds.width, ds.height)
        seq_totals = {"j": 0.0, "f": 0.0, "jf": 0.0}
        seq_count = 0
        for i, p in enumerate(paths):
            pred = _decode_annotation(p)
            if pred.shape != np.asarray(ds.annotations[i]).shape:
                raise DatasetError(f"{p}: shape {pred.shape} does not match the annotation")
            score = frame_score(pred, ds.annotations[i], ds.object_ids, tol, frame_index=i)
            for s in score.per_object.values():
                seq_totals["j"] += s.j
                seq_totals["f"] += s.f
                seq_totals["jf"] += s.jf
                seq_count += 1
        per_sequence[ds.name] = {k: v / seq_count for k, v in seq_totals.items()}
        for k in totals:
            totals[k] += seq_totals[k]
        count += seq_count
    return {
        "per_sequence": per_sequence,
        "overall": {k: v / count for k, v in totals.items()},
    }
