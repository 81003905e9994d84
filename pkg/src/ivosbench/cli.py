"""Command-line client for the benchmark service.

Every command builds the same request models the HTTP API accepts. With
``--server URL`` the request is sent to a running service; otherwise the
handler runs in-process against the local filesystem, which is byte-for-byte
the same code path.
"""

from __future__ import annotations

import json
import sys

import click
import httpx

from . import __version__
from .dataset import DatasetError
from .runner import write_report
from .service.handlers import handle_run, handle_score, handle_synth
from .service.models import RunRequest, ScoreRequest, SynthRequest

_FAILURES = (DatasetError, FileNotFoundError, NotADirectoryError, ValueError, KeyError)


def _post(server: str, route: str, payload: dict) -> dict:
    response = httpx.post(f"{server.rstrip('/')}{route}", json=payload, timeout=None)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"server returned {response.status_code}: {detail}")
    return response.json()


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Benchmark harness for click-driven interactive video object segmentation."""


@main.command()
@click.option("--dataset-root", required=True, help="DAVIS-layout dataset root.")
@click.option("--sequences", default=None, help="Comma-separated sequence names (default: all).")
@click.option("--resolution", default=None, help="Resolution directory (default: auto-detect).")
@click.option("--strategy", type=click.Choice(["f1", "f2", "f3"]), default="f3", show_default=True)
@click.option("--max-clicks", type=int, default=3, show_default=True,
              help="Click cap per object per round (round 1 is always capped at 1).")
@click.option("--rounds", type=int, default=8, show_default=True, help="Interaction round budget.")
@click.option("--memory-stride", type=int, default=5, show_default=True,
              help="Stride between memory frames during propagation.")
@click.option("--interaction", type=click.Choice(["oracle", "region-grow"]), default="oracle",
              show_default=True)
@click.option("--propagator", type=click.Choice(["copy", "decay-oracle"]), default="copy",
              show_default=True)
@click.option("--fusion", type=click.Choice(["distance-weighted", "none"]),
              default="distance-weighted", show_default=True)
@click.option("--min-region-area", type=float, default=0.001, show_default=True,
              help="Smallest erroneous region to click, as a fraction of the frame area.")
@click.option("--click-radius", type=int, default=None,
              help="Interaction-map disk radius in pixels (default: scaled by frame diagonal).")
@click.option("--decay-lambda", type=float, default=0.5, show_default=True,
              help="Erosion per frame of distance for the decay-oracle propagator.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True,
              help="Sequences evaluated in parallel (output is worker-count invariant).")
@click.option("--timing", is_flag=True, help="Also record hardware-dependent time metrics.")
@click.option("--exclude-first-and-last", is_flag=True,
              help="Leave the first and last frame out of scoring.")
@click.option("--report", "report_path", default=None, help="Where to write the report.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True)
@click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
def run(dataset_root, sequences, resolution, strategy, max_clicks, rounds, memory_stride,
        interaction, propagator, fusion, min_region_area, click_radius, decay_lambda, seed,
        workers, timing, exclude_first_and_last, report_path, fmt, server) -> None:
    """Run the round-based benchmark over a dataset and report R-AUC of J&F."""
    request = RunRequest(
        dataset_root=dataset_root,
        sequences=[s for s in sequences.split(",") if s] if sequences else None,
        resolution=resolution,
        strategy=strategy,
        max_clicks=max_clicks,
        max_rounds=rounds,
        memory_stride=memory_stride,
        interaction=interaction,
        propagator=propagator,
        fusion=fusion,
        min_region_area=min_region_area,
        click_radius=click_radius,
        seed=seed,
        timing=timing,
        workers=workers,
        decay_lambda=decay_lambda,
        exclude_first_and_last=exclude_first_and_last,
        report_path=report_path,
    )
    try:
        if server:
            report = _post(server, "/evaluate", request.model_dump())
        else:
            report = handle_run(request)
    except _FAILURES as exc:
        raise click.ClickException(str(exc)) from exc
    if report_path:
        write_report(report, report_path, fmt=fmt)
        click.echo(f"report written to {report_path}")
    for name, samples in report["sequences"].items():
        click.echo(f"{name}: rounds={len(samples)} final J&F={samples[-1]['global_jf']:.4f}")
    if report["partial"]:
        click.echo(f"partial run; failed sequences: {', '.join(report['errors'])}", err=True)
    click.echo(f"R-AUC J&F over {report['max_rounds']} rounds: {report['r_auc_jf']:.4f}")
    if report.get("timing"):
        click.echo(
            "time metrics (hardware dependent): "
            f"AUC J&F={report['timing']['auc_jf']:.4f} "
            f"J&F@60s={report['timing']['jf_at_60s']:.4f}"
        )


@main.command()
@click.option("--spec", "spec_path", required=True, help="JSON spec of the synthetic sequence.")
@click.option("--out", "out_root", required=True, help="Dataset root to write (DAVIS layout).")
@click.option("--resolution", default="480p", show_default=True)
@click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
def synth(spec_path, out_root, resolution, server) -> None:
    """Generate a deterministic synthetic dataset with exact ground truth."""
    request = SynthRequest(spec_path=spec_path, out_root=out_root, resolution=resolution)
    try:
        if server:
            result = _post(server, "/synthesize", request.model_dump())
        else:
            result = handle_synth(request).model_dump()
    except _FAILURES as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(
        f"wrote sequence {result['name']!r}: {result['frames']} frames "
        f"{result['width']}x{result['height']} objects={result['object_ids']} "
        f"under {result['out_root']}"
    )


@main.command()
@click.option("--pred-root", required=True, help="Directory of per-sequence prediction PNGs.")
@click.option("--gt-root", required=True, help="DAVIS-layout dataset root with ground truth.")
@click.option("--sequences", default=None, help="Comma-separated sequence names (default: all).")
@click.option("--resolution", default=None)
@click.option("--tolerance", type=int, default=None,
              help="Boundary tolerance in pixels (default: 0.8% of the frame diagonal).")
@click.option("--report", "report_path", default=None, help="Write the scores as JSON here.")
@click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
def score(pred_root, gt_root, sequences, resolution, tolerance, report_path, server) -> None:
    """Score stored prediction masks against ground truth (metrics-only mode)."""
    request = ScoreRequest(
        pred_root=pred_root,
        gt_root=gt_root,
        sequences=[s for s in sequences.split(",") if s] if sequences else None,
        resolution=resolution,
        tolerance=tolerance,
    )
    try:
        if server:
            result = _post(server, "/score", request.model_dump())
        else:
            result = handle_score(request).model_dump()
    except _FAILURES as exc:
        raise click.ClickException(str(exc)) from exc
    if report_path:
        with open(report_path, "w") as f:
            json.dump(result, f, indent=2)
            f.write("\n")
    for name, scores in result["per_sequence"].items():
        click.echo(f"{name}: J={scores['j']:.4f} F={scores['f']:.4f} J&F={scores['jf']:.4f}")
    overall = result["overall"]
    click.echo(f"overall: J={overall['j']:.4f} F={overall['f']:.4f} J&F={overall['jf']:.4f}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Start the benchmark service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
