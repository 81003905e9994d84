"""Benchmark harness for click-driven interactive video object segmentation.

The package splits into a handful of small layers:

- :mod:`ivosbench.maskops` -- pixel-level mask primitives (components,
  boundaries, distance transforms, thinning).
- :mod:`ivosbench.metrics` -- region similarity J, contour accuracy F, and
  the per-round area-under-curve scores.
- :mod:`ivosbench.interactions` -- clicks, scribbles, and the three click
  generation strategies (``f1``/``f2``/``f3``).
- :mod:`ivosbench.robot` -- the simulated user that annotates the worst
  frame each round.
- :mod:`ivosbench.scheduler` -- propagation bounds, memory-frame selection,
  and the per-round interaction/propagation/fusion state machine.
- :mod:`ivosbench.backends` -- pluggable segmentation backends plus
  deterministic reference implementations.
- :mod:`ivosbench.dataset` / :mod:`ivosbench.runner` -- dataset ingestion,
  synthetic sequences, session running, and report emission.
- :mod:`ivosbench.service` / :mod:`ivosbench.cli` -- FastAPI service
  wrapping the core, with the command line as a thin client.
"""

__version__ = "0.1.0"

from .backends import MemoryEntry, ProbMask
from .dataset import SequenceDataset, generate_synthetic, load_dataset, load_scribbles
from .interactions import Click, InteractionMaps, Polarity, Scribble
from .metrics import (
    EvaluationReport,
    FrameScore,
    RoundCurve,
    RoundSample,
    boundary_f,
    frame_score,
    jaccard,
    round_auc,
)
from .runner import RunConfig, run_evaluation, score_predictions, write_report

__all__ = [
    "__version__",
    "Click",
    "EvaluationReport",
    "FrameScore",
    "InteractionMaps",
    "MemoryEntry",
    "Polarity",
    "ProbMask",
    "RoundCurve",
    "RoundSample",
    "RunConfig",
    "Scribble",
    "SequenceDataset",
    "boundary_f",
    "frame_score",
    "generate_synthetic",
    "jaccard",
    "load_dataset",
    "load_scribbles",
    "round_auc",
    "run_evaluation",
    "score_predictions",
    "write_report",
]
