"""FastAPI service wrapping the sampling toolkit.

All endpoints are stateless: heavy inputs are referenced by server-side paths
(scene directories, model files) while small payloads travel inline, which is
what the language bindings use.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (
    BudgetError,
    ConfigError,
    DimensionError,
    FormatError,
    InvalidInputError,
    MissingFeaturesError,
    SemSampleError,
    UndefinedMetricError,
)
from ..geometry import PointCloud
from ..metrics import aggregate, scene_report, write_csv, write_per_scene_csv
from ..sampling import (
    ForegroundScores,
    SampleResult,
    SFpsConfig,
    f_fps,
    fps,
    fusion_sample,
    s_fps,
    top_k_scores,
)
from ..scenes import (
    SceneGenConfig,
    SceneSample,
    config_hash,
    generate_scene_set,
    load_scene_set,
    oracle_scores,
    read_kitti_bin,
    scene_load,
)
from ..scorer import Mlp, SegTrainConfig, load_mlp, mlp_forward, save_mlp, train_segmenter
from .schemas import (
    BenchRequest,
    BenchResponse,
    BenchRow,
    EvalRequest,
    EvalResponse,
    GenerateRequest,
    GenerateResponse,
    HealthResponse,
    SampleRequest,
    SampleResponse,
    TrainRequest,
    TrainResponse,
)

_USAGE_ERRORS = (BudgetError, ConfigError, InvalidInputError, MissingFeaturesError, UndefinedMetricError)
_DATA_ERRORS = (FormatError, DimensionError)

SCORE_METHODS = {"topk", "sfps", "fusion"}


class UsageError(SemSampleError):
    """Request is structurally valid but the parameter combination is not."""


def _error_response(kind: str, status: int, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"kind": kind, "detail": detail})


def _load_input(req: SampleRequest) -> tuple[PointCloud, SceneSample | None]:
    sources = [req.coords is not None, req.scene_path is not None, req.kitti_path is not None]
    if sum(sources) != 1:
        raise UsageError("provide exactly one of coords, scene_path, kitti_path")
    if req.coords is not None:
        cloud = PointCloud(np.asarray(req.coords, dtype=np.float64).reshape(-1, 3), req.features)
        return cloud, None
    if req.scene_path is not None:
        sample = scene_load(req.scene_path)
        return sample.cloud, sample
    return read_kitti_bin(req.kitti_path), None


def resolve_scores(
    cloud: PointCloud,
    sample: SceneSample | None,
    inline: list[float] | None,
    scores_from: str | None,
    oracle_noise: float,
) -> ForegroundScores:
    if inline is not None:
        if scores_from is not None:
            raise UsageError("give either inline scores or scores_from, not both")
        return ForegroundScores(np.asarray(inline, dtype=np.float64))
    if scores_from is None:
        raise UsageError("this method needs scores: pass scores, or scores_from=oracle|model:<path>")
    if scores_from == "oracle":
        if sample is None:
            raise UsageError("oracle scores need a scene file with boxes")
        return oracle_scores(sample, oracle_noise)
    if scores_from.startswith("model:"):
        mlp = load_mlp(scores_from[len("model:"):])
        return mlp_forward(mlp, cloud.require_features())
    raise UsageError(f"unknown scores_from {scores_from!r} (want 'oracle' or 'model:<path>')")


def run_sampler(
    method: str,
    cloud: PointCloud,
    scores: ForegroundScores | None,
    m: int,
    gamma: float,
    lambda_c: float,
    start_index: int,
) -> tuple[SampleResult, SampleResult | None]:
    if method == "fps":
        return fps(cloud, m, start_index), None
    if method == "ffps":
        return f_fps(cloud, m, lambda_c, start_index), None
    if method == "topk":
        return top_k_scores(scores, m), None
    if method == "sfps":
        return s_fps(cloud, scores, m, SFpsConfig(gamma=gamma)), None
    if method == "fusion":
        candidates, context = fusion_sample(cloud, scores, m, SFpsConfig(gamma=gamma))
        return candidates, context
    raise UsageError(f"unknown sampler {method!r}")


def _diag_json(result: SampleResult) -> list[float | None] | None:
    if result.per_step_weighted_distance is None:
        return None
    return [None if math.isinf(v) else float(v) for v in result.per_step_weighted_distance]


def create_app() -> FastAPI:
    app = FastAPI(title="semsample", version=__version__)

    @app.exception_handler(UsageError)
    async def _usage(_req: Request, exc: UsageError):
        return _error_response("usage", 400, str(exc))

    @app.exception_handler(SemSampleError)
    async def _domain(_req: Request, exc: SemSampleError):
        if isinstance(exc, _USAGE_ERRORS):
            return _error_response("usage", 400, str(exc))
        if isinstance(exc, _DATA_ERRORS):
            return _error_response("data", 422, str(exc))
        return _error_response("internal", 500, str(exc))

    @app.exception_handler(FileNotFoundError)
    async def _missing(_req: Request, exc: FileNotFoundError):
        return _error_response("data", 422, str(exc))

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/sample", response_model=SampleResponse)
    def sample(req: SampleRequest) -> SampleResponse:
        cloud, scene = _load_input(req)
        scores = None
        if req.method in SCORE_METHODS:
            scores = resolve_scores(cloud, scene, req.scores, req.scores_from, req.oracle_noise)
        elif req.scores is not None and len(req.scores) != cloud.n:
            raise DimensionError(f"{len(req.scores)} scores for {cloud.n} points")
        result, context = run_sampler(
            req.method, cloud, scores, req.m, req.gamma, req.lambda_c, req.start_index
        )
        return SampleResponse(
            indices=result.indices.tolist(),
            context_indices=context.indices.tolist() if context is not None else None,
            n_points=cloud.n,
            method=req.method,
            per_step_weighted_distance=_diag_json(result),
        )

    @app.post("/scenes/generate", response_model=GenerateResponse)
    def generate(req: GenerateRequest) -> GenerateResponse:
        config = SceneGenConfig(
            n_points=req.n_points,
            n_objects=req.n_objects,
            foreground_fraction_target=req.foreground_fraction,
            extent=req.extent,
            seed=req.seed,
        )
        manifest_path, paths = generate_scene_set(req.out_dir, req.count, req.seed, config)
        return GenerateResponse(
            manifest_path=manifest_path, scene_paths=paths, config_hash=config_hash(config)
        )

    @app.post("/train", response_model=TrainResponse)
    def train(req: TrainRequest) -> TrainResponse:
        samples = load_scene_set(req.scene_dir)
        scenes = [(s.cloud, s.labels) for s in samples]
        widths = (scenes[0][0].require_features().shape[1], req.hidden_width, 1)
        config = SegTrainConfig(
            learning_rate=req.learning_rate,
            epochs=req.epochs,
            level_weights=(req.level_weight,),
            rng_seed=req.seed,
            positive_class_weight=req.positive_class_weight,
        )
        model, history = train_segmenter(scenes, Mlp.seeded(widths, config.rng_seed), config)
        out = Path(req.model_out)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_mlp(out, model)
        return TrainResponse(
            model_path=str(out),
            epochs=req.epochs,
            initial_loss=history[0],
            final_loss=history[-1],
        )

    @app.post("/bench", response_model=BenchResponse)
    def bench(req: BenchRequest) -> BenchResponse:
        needs_scores = any(s in SCORE_METHODS for s in req.samplers)
        if needs_scores and not (req.scores_from == "oracle" or req.scores_from.startswith("model:")):
            raise UsageError("score-driven samplers need scores_from=oracle or model:<path>")
        samples = load_scene_set(req.scene_dir)
        reports = []
        for level, budget in enumerate(req.budgets, start=1):
            for sampler in req.samplers:
                gammas = req.gammas if sampler in ("sfps", "fusion") else [None]
                for gamma in gammas:
                    reports.extend(
                        _bench_cell(req, samples, sampler, gamma, budget, level)
                    )
        if req.csv_out:
            write_csv(req.csv_out, reports)
        if req.per_scene_csv_out:
            write_per_scene_csv(req.per_scene_csv_out, reports)
        rows = [
            BenchRow(
                method=r.method,
                level=r.level,
                budget=r.budget,
                foreground_rate=r.foreground_rate,
                point_recall=r.point_recall,
                scenes=r.scenes,
            )
            for r in reports
        ]
        return BenchResponse(
            rows=rows, csv_path=req.csv_out, per_scene_csv_path=req.per_scene_csv_out
        )

    def _bench_cell(req: BenchRequest, samples, sampler, gamma, budget, level):
        per_scene = []
        fusion_context = []
        for i, sample in enumerate(samples):
            scores = None
            if sampler in SCORE_METHODS:
                scores = resolve_scores(
                    sample.cloud, sample, None, req.scores_from, req.oracle_noise
                )
            result, context = run_sampler(
                sampler, sample.cloud, scores, budget, gamma or 0.0, req.lambda_c, 0
            )
            name = f"scene_{i:04d}"
            per_scene.append(scene_report(name, result, sample.cloud, sample.boxes))
            if context is not None:
                fusion_context.append(scene_report(name, context, sample.cloud, sample.boxes))
        if sampler == "sfps":
            label = f"sfps(gamma={gamma:g})"
        elif sampler == "fusion":
            label = f"fusion-sfps(gamma={gamma:g})"
        else:
            label = sampler
        out = [aggregate(label, budget, per_scene, level=level, micro=req.micro)]
        if fusion_context:
            out.append(aggregate("fusion-fps", budget, fusion_context, level=level, micro=req.micro))
        return out

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(req: EvalRequest) -> EvalResponse:
        sample = scene_load(req.scene_path)
        if (req.indices is None) == (req.indices_path is None):
            raise UsageError("provide exactly one of indices, indices_path")
        if req.indices is not None:
            indices = np.asarray(req.indices, dtype=np.int64)
        else:
            text = Path(req.indices_path).read_text()
            try:
                indices = np.asarray(
                    [int(line) for line in text.splitlines() if line.strip()], dtype=np.int64
                )
            except ValueError as exc:
                raise FormatError(f"{req.indices_path}: {exc}") from None
        report = scene_report("scene", SampleResult(indices), sample.cloud, sample.boxes)
        return EvalResponse(
            foreground_rate=report.foreground_rate,
            point_recall=report.point_recall,
            n_boxes=report.n_boxes,
            boxes_hit=report.boxes_hit,
        )

    return app


app = create_app()
