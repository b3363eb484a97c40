"""Request/response models for the service endpoints."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..config import ExperimentConfig, SpoValidationConfig

__all__ = [
    "SolveRequest",
    "SolveResponse",
    "SimulateRequest",
    "SimulateResponse",
    "ValidateSpoRequest",
    "ValidateSpoResponse",
    "PresetSummary",
]


class SolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    values: list[float] = Field(min_length=1)
    weights: list[int] = Field(min_length=1)
    capacity: int = Field(ge=0)
    solver: Literal["greedy", "bnb", "bruteforce", "lp"] = "bnb"
    timeout_s: float = Field(50.0, gt=0.0)


class SolveResponse(BaseModel):
    chosen: list[int]
    value: float
    weight: int
    status: str
    alpha_guarantee: float
    beta_guarantee: float


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ExperimentConfig


class SimulateResponse(BaseModel):
    name: str
    fingerprint: str
    results_csv: str
    config_echo: str
    traces: dict[str, str] = {}
    plots: dict[str, str] = {}
    oracle_statuses: dict[str, str] = {}


class ValidateSpoRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: Optional[SpoValidationConfig] = None
    instances: int = Field(200, ge=1)
    timeout_s: float = Field(5.0, gt=0.0)
    seed: int = 7

    def resolved(self) -> SpoValidationConfig:
        if self.config is not None:
            return self.config
        return SpoValidationConfig(
            instances=self.instances, timeout_s=self.timeout_s, master_seed=self.seed
        )


class ValidateSpoResponse(BaseModel):
    instances: int
    mean_ratio: float
    min_ratio: float
    optimal_fraction: float
    median_speedup: float
    bound_violations: int
    records_csv: str


class PresetSummary(BaseModel):
    name: str
    kind: Literal["experiment", "spo_validation"]
