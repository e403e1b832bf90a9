"""Pydantic request/response models for the suite service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SuiteOverrides(BaseModel):
    lambdas: list[float] | None = None
    resolution: int | None = None
    sigma: float | None = None
    tau: float | None = None
    trials: int | None = None
    seed: int | None = None
    degree: int | None = None


class SuiteRequest(BaseModel):
    scenario: str | None = Field(default=None, description="scenario text")
    builtin: str | None = Field(default=None, description="builtin scenario name")
    overrides: SuiteOverrides = Field(default_factory=SuiteOverrides)


class AssertionModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SuiteResponse(BaseModel):
    suite: str
    passed: bool
    exit_code: int
    elapsed: float
    assertions: list[AssertionModel]
    files: dict[str, str]
    summary: dict


class ScenarioRequest(BaseModel):
    scenario: str


class ScenarioInfo(BaseModel):
    ok: bool
    n: int
    faces: int
    metric_family: str
    lambdas: list[float]
    resolution: int
    sigma: float
    tau: float
    trials: int
    seed: int
    canonical: str


class ErrorInfo(BaseModel):
    error: str
    kind: str
    line: int | None = None


class HealthInfo(BaseModel):
    status: str
    version: str
    suites: list[str]
