"""Request/response models for the HTTP service.

A scenario travels either as the name of a bundled file or as the full JSON
document, so remote callers never depend on server-side paths.  Every
response carries its artifacts inline as (name, content) pairs; clients
decide where to put them on disk.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field, model_validator


class ScenarioPayload(BaseModel):
    name: Optional[str] = None        # bundled scenario name, e.g. "scenario14"
    document: Optional[dict] = None   # inline scenario JSON

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.name is None) == (self.document is None):
            raise ValueError("provide exactly one of name or document")
        return self


class ArtifactModel(BaseModel):
    name: str
    content: str


class OptimizeRequest(BaseModel):
    scenario: ScenarioPayload
    n_platoons: int = Field(ge=1)
    seed: int = 0
    p_method: float = Field(default=0.4, ge=0.0, le=1.0)
    batch_size: int = Field(default=12, ge=1)
    branch_budget: int = Field(default=64, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)


class OptimizeResponse(BaseModel):
    best_x: float
    best_config: list[int]
    iterations: int
    evaluations: int
    converged: bool
    manifest_sha256: str
    artifacts: list[ArtifactModel]


class SimulateRequest(BaseModel):
    scenario: ScenarioPayload
    config: list[int]
    seed: int = 0
    branch_budget: int = Field(default=10000, ge=0)
    record_log: bool = True


class SimulateResponse(BaseModel):
    x_value: float
    blue_final: float
    red_final: float
    illegal_moves: int
    victories: int
    truncated: bool
    manifest_sha256: str
    artifacts: list[ArtifactModel]


class PopulationEntry(BaseModel):
    config: list[int]
    x: float


class ClusterRequest(BaseModel):
    scenario: ScenarioPayload
    n_platoons: int = Field(ge=1)
    population: list[PopulationEntry]
    tau: float = Field(default=0.2, gt=0.0, lt=1.0)
    top_k: int = Field(default=10, ge=1)
    seed: int = 0


class ClusterResponse(BaseModel):
    clusters: int
    best_x: float
    best_config: list[int]
    manifest_sha256: str
    artifacts: list[ArtifactModel]


class FramesRequest(BaseModel):
    scenario: ScenarioPayload
    config: list[int]
    seed: int = 0
    branch_budget: int = Field(default=64, ge=0)


class FramesResponse(BaseModel):
    frames: int
    x_value: float
    manifest_sha256: str
    artifacts: list[ArtifactModel]


class SweepRequest(BaseModel):
    scenario: ScenarioPayload
    counts: list[int]
    repetitions: int = Field(default=5, ge=1)
    seed: int = 0
    branch_budget: int = Field(default=64, ge=0)
    p_method: float = Field(default=0.4, ge=0.0, le=1.0)
    batch_size: int = Field(default=12, ge=1)
    workers: Optional[int] = Field(default=None, ge=1)


class SweepResponse(BaseModel):
    halt_threshold: Optional[int]
    manifest_sha256: str
    artifacts: list[ArtifactModel]


class DesignRequest(BaseModel):
    n_platoons: int = Field(ge=1)
    seed: int = 0


class DesignResponse(BaseModel):
    rows: int
    columns: int
    max_abs_correlation: float
    manifest_sha256: str
    artifacts: list[ArtifactModel]
