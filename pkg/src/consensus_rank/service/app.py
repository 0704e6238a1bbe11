"""FastAPI application factory.

Every endpoint is stateless: the dataset arrives inline with the request and
artifacts are returned in the response body, so a single server can serve
many clients with nothing shared between calls. Domain failures map to 422
(the dataset or options are unusable) and pipeline failures to 500 with the
failing stage attached.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .._version import __version__
from ..errors import ConsensusRankError, PipelineError
from ..ingest import Dataset, parse_ranking_csv, registry_from_csv, validate_against_registry
from ..report import (
    RunOptions,
    bootstrap_artifacts,
    build_artifacts,
    fit_artifacts,
    path_artifacts,
    taux_artifacts,
)
from .schemas import (
    BootstrapRequest,
    DatasetPayload,
    FitRequest,
    HealthResponse,
    PathRequest,
    RunMeta,
    RunRequest,
    RunResponse,
    StageResponse,
    TauxRequest,
)


def _build_dataset(payload: DatasetPayload, year_min: int | None = None) -> Dataset:
    registry = registry_from_csv(
        payload.registry.csv_text, constraint_item=payload.registry.constraint_item
    )
    lists = [
        parse_ranking_csv(
            entry.csv_text,
            ranking_id=entry.ranking_id,
            year=entry.year,
            direction=entry.direction,
            grade_order=entry.grade_order,
        )
        for entry in payload.rankings
        if year_min is None or entry.year >= year_min
    ]
    return validate_against_registry(lists, registry)


def create_app() -> FastAPI:
    app = FastAPI(title="consensus-rank", version=__version__)

    @app.exception_handler(PipelineError)
    async def pipeline_error(_: Request, exc: PipelineError) -> JSONResponse:
        return JSONResponse(
            status_code=500,
            content={"error": str(exc), "type": type(exc.cause).__name__, "stage": exc.stage},
        )

    @app.exception_handler(ConsensusRankError)
    async def domain_error(_: Request, exc: ConsensusRankError) -> JSONResponse:
        return JSONResponse(
            status_code=422, content={"error": str(exc), "type": type(exc).__name__}
        )

    @app.get("/healthz", response_model=HealthResponse)
    async def healthz() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/v1/run", response_model=RunResponse)
    async def run(req: RunRequest) -> RunResponse:
        dataset = _build_dataset(req.dataset, req.year_min)
        options = RunOptions(
            seed=req.seed,
            year_min=req.year_min,
            replicates=req.replicates,
            taux_replicates=req.taux_replicates,
            grid_points=req.grid_points,
            alpha=req.alpha,
        )
        report, artifacts, _ = build_artifacts(dataset, req.seed, options)
        meta = report.meta
        return RunResponse(
            meta=RunMeta(
                n_items=meta.n_items,
                n_rankings=meta.n_rankings,
                total_comparisons=meta.total_comparisons,
                mean_comparisons_per_pair=meta.mean_comparisons_per_pair,
                selected_lambda=meta.selected_lambda,
                cluster_count=meta.cluster_count,
                seed=meta.seed,
            ),
            artifacts=artifacts,
        )

    @app.post("/v1/taux", response_model=StageResponse)
    async def taux(req: TauxRequest) -> StageResponse:
        dataset = _build_dataset(req.dataset)
        return StageResponse(
            artifacts=taux_artifacts(dataset, replicates=req.replicates, seed=req.seed)
        )

    @app.post("/v1/fit", response_model=StageResponse)
    async def fit(req: FitRequest) -> StageResponse:
        dataset = _build_dataset(req.dataset)
        return StageResponse(artifacts=fit_artifacts(dataset))

    @app.post("/v1/path", response_model=StageResponse)
    async def path(req: PathRequest) -> StageResponse:
        dataset = _build_dataset(req.dataset)
        return StageResponse(
            artifacts=path_artifacts(
                dataset,
                grid_points=req.grid_points,
                fusion_tol=req.fusion_tol,
                lambda_max=req.lambda_max,
            )
        )

    @app.post("/v1/bootstrap", response_model=StageResponse)
    async def bootstrap(req: BootstrapRequest) -> StageResponse:
        dataset = _build_dataset(req.dataset)
        return StageResponse(
            artifacts=bootstrap_artifacts(
                dataset,
                target=req.target,
                replicates=req.replicates,
                seed=req.seed,
                alpha=req.alpha,
            )
        )

    return app
