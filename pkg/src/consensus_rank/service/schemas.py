"""Request/response models for the HTTP service.

Datasets travel inline: the registry and each ranking are shipped as the
same CSV text the file formats define, so a payload is exactly a manifest
with the file contents embedded. Artifacts come back as a filename ->
content map in the CSV/SVG/JSON formats the pipeline writes to disk.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

Direction = Literal["higher_is_better", "lower_is_better"]
Target = Literal["mle", "alasso"]


class RankingPayload(BaseModel):
    ranking_id: str
    year: int
    direction: Direction
    csv_text: str = Field(description="item_id,level rows in the ranking CSV format")
    grade_order: list[str] | None = Field(
        default=None, description="Ordinal grades from worst to best, if levels are grades"
    )


class RegistryPayload(BaseModel):
    csv_text: str = Field(description="item_id,label rows in the registry CSV format")
    constraint_item: str | None = Field(
        default=None, description="Reference item pinned at zero; default is the first row"
    )


class DatasetPayload(BaseModel):
    registry: RegistryPayload
    rankings: list[RankingPayload] = Field(min_length=1)


class RunRequest(BaseModel):
    dataset: DatasetPayload
    seed: int = 0
    year_min: int | None = None
    replicates: int = Field(default=1000, ge=1)
    taux_replicates: int = Field(default=1000, ge=1)
    grid_points: int = Field(default=100, ge=1)
    alpha: float = Field(default=0.025, gt=0.0, lt=0.5)


class RunMeta(BaseModel):
    n_items: int
    n_rankings: int
    total_comparisons: int
    mean_comparisons_per_pair: float
    selected_lambda: float
    cluster_count: int
    seed: int


class RunResponse(BaseModel):
    meta: RunMeta
    artifacts: dict[str, str]


class TauxRequest(BaseModel):
    dataset: DatasetPayload
    replicates: int = Field(default=1000, ge=1)
    seed: int = 0


class FitRequest(BaseModel):
    dataset: DatasetPayload


class PathRequest(BaseModel):
    dataset: DatasetPayload
    grid_points: int = Field(default=100, ge=1)
    fusion_tol: float = Field(default=1e-4, gt=0.0)
    lambda_max: float | None = Field(default=None, gt=0.0)


class BootstrapRequest(BaseModel):
    dataset: DatasetPayload
    target: Target = "mle"
    replicates: int = Field(default=1000, ge=1)
    seed: int = 0
    alpha: float = Field(default=0.025, gt=0.0, lt=0.5)


class StageResponse(BaseModel):
    artifacts: dict[str, str]


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str


class ErrorResponse(BaseModel):
    error: str
    type: str
    stage: str | None = None
