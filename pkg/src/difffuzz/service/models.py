"""Request/response bodies for the HTTP surface.

These mirror the core dataclasses but stay permissive at the wire: schemas
and values arrive as plain JSON and are validated by the core parsers, so
both the CLI and external callers get identical error behavior.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

Level = Literal["function", "program"]
ExecutorName = Literal["inprocess", "process"]


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
    version: str


class GenerateInputsRequest(BaseModel):
    schema_object: dict = Field(alias="schema")
    seed: int = 0
    n: int | None = None          # None: level default budget
    level: Level = "function"
    problem_id: str = ""
    max_rejections: int = 1000

    model_config = {"populate_by_name": True}


class GeneratedInput(BaseModel):
    index: int
    values: list[Any]
    rendered: str | None = None


class GenerateInputsResponse(BaseModel):
    n: int
    inputs: list[GeneratedInput]


class CheckRequest(BaseModel):
    original: str
    refactored: str
    level: Level = "function"
    entry_point: str | None = None
    schema_object: dict = Field(alias="schema")
    seed: int = 0
    n: int | None = None
    mode: Literal["early_exit", "full_scan"] = "early_exit"
    problem_id: str = ""
    max_rejections: int = 1000
    per_run_timeout: float = 5.0
    max_output_bytes: int = 1 << 20
    float_rel_tol: float = 1e-6
    float_abs_tol: float = 1e-9
    normalization: Literal["trim", "strict"] = "trim"
    executor: ExecutorName = "inprocess"

    model_config = {"populate_by_name": True}


class WitnessModel(BaseModel):
    index: int
    original: dict
    refactored: dict


class CheckResponse(BaseModel):
    status: str
    eq_bit: int | None = None
    similarity: float | None = None
    n_compared: int
    n_discarded: int
    witness: WitnessModel | None = None


class CampaignRequest(BaseModel):
    problems: list[dict]
    refactorings: list[dict]
    seed: int = 0
    n_function: int | None = None
    n_program: int | None = None
    max_rejections: int = 1000
    max_workers: int = 1
    per_run_timeout: float = 5.0
    max_output_bytes: int = 1 << 20
    float_rel_tol: float = 1e-6
    float_abs_tol: float = 1e-9
    normalization: Literal["trim", "strict"] = "trim"
    executor: ExecutorName = "inprocess"


class CampaignResponse(BaseModel):
    report: dict


class RenderReportRequest(BaseModel):
    report: dict
    format: Literal["csv", "text"] = "text"


class RenderReportResponse(BaseModel):
    files: dict[str, str]    # name -> content; text format uses one "report.txt"
