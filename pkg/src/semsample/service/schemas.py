"""Pydantic request/response models for the sampling service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

SamplerName = Literal["fps", "ffps", "topk", "sfps", "fusion"]


class HealthResponse(BaseModel):
    status: str
    version: str


class SampleRequest(BaseModel):
    """Run one sampler over inline arrays or a scene/KITTI file on the server.

    Exactly one of ``coords``, ``scene_path`` or ``kitti_path`` must be given.
    Score-driven methods need ``scores`` inline, ``scores_from="oracle"``
    (scene input only) or ``scores_from="model:<path>"``.
    """

    coords: Optional[list[list[float]]] = None
    features: Optional[list[list[float]]] = None
    scores: Optional[list[float]] = None
    scene_path: Optional[str] = None
    kitti_path: Optional[str] = None
    method: SamplerName = "sfps"
    m: int = Field(ge=1)
    gamma: float = 1.0
    lambda_c: float = 1.0
    start_index: int = 0
    scores_from: Optional[str] = None
    oracle_noise: float = 0.25


class SampleResponse(BaseModel):
    indices: list[int]
    # fusion only: the plain-FPS context half (``indices`` is the weighted half)
    context_indices: Optional[list[int]] = None
    n_points: int
    method: SamplerName
    # weighted distance of each pick at selection time; null for the score-driven first pick
    per_step_weighted_distance: Optional[list[Optional[float]]] = None


class GenerateRequest(BaseModel):
    out_dir: str
    count: int = Field(ge=1)
    seed: int = 0
    n_points: int = 4096
    n_objects: int = 8
    foreground_fraction: float = 0.044
    extent: float = 80.0


class GenerateResponse(BaseModel):
    manifest_path: str
    scene_paths: list[str]
    config_hash: str


class TrainRequest(BaseModel):
    scene_dir: str
    model_out: str
    hidden_width: int = 64
    learning_rate: float = 50.0
    epochs: int = 300
    seed: int = 0
    level_weight: float = 0.01
    positive_class_weight: float = 12.0


class TrainResponse(BaseModel):
    model_path: str
    epochs: int
    initial_loss: float
    final_loss: float


class BenchRequest(BaseModel):
    """Benchmark sampler x gamma x budget cells over a scene directory."""

    scene_dir: str
    samplers: list[SamplerName] = ["fps", "sfps"]
    gammas: list[float] = [0.0, 0.1, 1.0, 10.0, 100.0]
    budgets: list[int] = [4096, 512, 256]
    scores_from: str = "oracle"
    oracle_noise: float = 0.25
    lambda_c: float = 1.0
    micro: bool = False
    csv_out: Optional[str] = None
    per_scene_csv_out: Optional[str] = None


class BenchRow(BaseModel):
    method: str
    level: int
    budget: int
    foreground_rate: float
    point_recall: Optional[float]
    scenes: int


class BenchResponse(BaseModel):
    rows: list[BenchRow]
    csv_path: Optional[str] = None
    per_scene_csv_path: Optional[str] = None


class EvalRequest(BaseModel):
    scene_path: str
    indices: Optional[list[int]] = None
    indices_path: Optional[str] = None


class EvalResponse(BaseModel):
    foreground_rate: float
    point_recall: Optional[float]
    n_boxes: int
    boxes_hit: int


class ErrorBody(BaseModel):
    kind: Literal["usage", "data", "internal"]
    detail: str
