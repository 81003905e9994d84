"""Request handlers shared by the HTTP routes and the thin-client CLI.

Each handler takes a validated request model, drives the core package, and
returns a response model (or the report dict for runs). Keeping them separate
from the FastAPI routing lets the CLI call the exact same code path locally
when no remote server is configured.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..dataset import generate_synthetic, load_dataset, write_davis_dataset
from ..runner import (
    RunConfig,
    attach_scribbles,
    report_to_dict,
    run_evaluation,
    score_predictions,
)
from .models import RunRequest, ScoreRequest, ScoreResponse, SynthRequest, SynthResponse


def handle_run(request: RunRequest) -> dict:
    config = RunConfig(
        strategy=request.strategy,
        max_clicks=request.max_clicks,
        max_rounds=request.max_rounds,
        memory_stride=request.memory_stride,
        interaction=request.interaction,
        propagator=request.propagator,
        fusion=request.fusion,
        min_region_area=request.min_region_area,
        click_radius=request.click_radius,
        seed=request.seed,
        report_path=request.report_path,
        timing=request.timing,
        workers=request.workers,
        decay_lambda=request.decay_lambda,
        exclude_first_and_last=request.exclude_first_and_last,
    )
    datasets = load_dataset(request.dataset_root, request.sequences, request.resolution)
    attach_scribbles(datasets, request.dataset_root, request.resolution)
    report = run_evaluation(datasets, config)
    return report_to_dict(report)


def handle_synth(request: SynthRequest) -> SynthResponse:
    if request.spec_path is not None:
        with open(Path(request.spec_path)) as f:
            spec = json.load(f)
    else:
        spec = request.spec
    dataset = generate_synthetic(spec)
    write_davis_dataset(dataset, request.out_root, resolution=request.resolution)
    return SynthResponse(
        name=dataset.name,
        frames=dataset.n_frames,
        width=dataset.width,
        height=dataset.height,
        object_ids=list(dataset.object_ids),
        out_root=str(request.out_root),
    )


def handle_score(request: ScoreRequest) -> ScoreResponse:
    result = score_predictions(
        request.pred_root,
        request.gt_root,
        sequences=request.sequences,
        resolution=request.resolution,
        tolerance=request.tolerance,
    )
    return ScoreResponse.model_validate(result)
