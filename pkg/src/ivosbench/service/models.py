"""Pydantic request/response models for the benchmark service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class HealthResponse(BaseModel):
    status: str
    version: str


class RunRequest(BaseModel):
    """Parameters of one benchmark run; paths refer to the server's filesystem."""

    dataset_root: str
    sequences: list[str] | None = None
    resolution: str | None = None
    strategy: Literal["f1", "f2", "f3"] = "f3"
    max_clicks: int = Field(default=3, ge=1)
    max_rounds: int = Field(default=8, ge=1)
    memory_stride: int = Field(default=5, ge=1)
    interaction: Literal["oracle", "region-grow"] = "oracle"
    propagator: Literal["copy", "decay-oracle"] = "copy"
    fusion: Literal["distance-weighted", "none"] = "distance-weighted"
    min_region_area: float = Field(default=0.001, ge=0.0)
    click_radius: int | None = Field(default=None, ge=0)
    seed: int = 0
    timing: bool = False
    workers: int = Field(default=1, ge=1)
    decay_lambda: float = Field(default=0.5, ge=0.0)
    exclude_first_and_last: bool = False
    report_path: str | None = None


class RoundSampleModel(BaseModel):
    round: int
    global_jf: float
    wall_clock_seconds: float | None = None


class TimingModel(BaseModel):
    hardware_dependent: bool = True
    auc_jf: float | None = None
    jf_at_60s: float | None = None


class ReportModel(BaseModel):
    schema_version: str
    generated_at: str
    config: dict
    reference_targets: dict[str, float]
    max_rounds: int
    sequences: dict[str, list[RoundSampleModel]]
    global_curve: list[RoundSampleModel]
    r_auc_jf: float
    timing: TimingModel | None = None
    partial: bool = False
    errors: dict[str, str] = {}


class SynthRequest(BaseModel):
    """Synthetic dataset generation; exactly one of spec / spec_path."""

    spec: dict | None = None
    spec_path: str | None = None
    out_root: str
    resolution: str = "480p"

    @model_validator(mode="after")
    def _exactly_one_spec(self):
        if (self.spec is None) == (self.spec_path is None):
            raise ValueError("provide exactly one of 'spec' or 'spec_path'")
        return self


class SynthResponse(BaseModel):
    name: str
    frames: int
    width: int
    height: int
    object_ids: list[int]
    out_root: str


class ScoreRequest(BaseModel):
    pred_root: str
    gt_root: str
    sequences: list[str] | None = None
    resolution: str | None = None
    tolerance: int | None = Field(default=None, ge=0)


class MeanScoresModel(BaseModel):
    j: float
    f: float
    jf: float


class ScoreResponse(BaseModel):
    per_sequence: dict[str, MeanScoresModel]
    overall: MeanScoresModel
