"""HTTP service exposing input generation, equivalence checks and campaigns.

The service is stateless: every request carries its own sources, schema and
configuration, and responses are pure functions of the request (plus the
executor's semantics). The in-process executor is the default engine; the
subprocess engine is selected per request and needs an adapter path at app
construction time.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from .. import __version__
from ..campaign import (CampaignConfig, CampaignReport, render_table2_csv,
                        render_table3_csv, render_text, run_campaign)
from ..compare import CompareConfig
from ..corpus import RefactoringRecord, parse_problem
from ..errors import DiffFuzzError, DiscardCapExceeded, HarnessError
from ..execution import (ExecPolicy, InProcessExecutor, LEVEL_FUNCTION,
                         ProcessExecutor, function_target, program_target)
from ..inputgen import GenConfig, default_input_count, generate_inputs
from ..schema import parse_schema
from ..verdict import check_equivalence
from .models import (CampaignRequest, CampaignResponse, CheckRequest,
                     CheckResponse, GenerateInputsRequest,
                     GenerateInputsResponse, GeneratedInput, HealthResponse,
                     RenderReportRequest, RenderReportResponse)

_MODE_FOR_LEVEL = {"function": "argument_vector", "program": "text_stream"}


def create_app(adapter_path: str | None = None) -> FastAPI:
    app = FastAPI(title="difffuzz", version=__version__)
    executors = {
        "inprocess": InProcessExecutor(),
        "process": ProcessExecutor(adapter_path=adapter_path),
    }

    def pick_executor(name: str):
        return executors[name]

    @app.exception_handler(DiffFuzzError)
    async def _domain_error(request, exc: DiffFuzzError):
        if isinstance(exc, (HarnessError, DiscardCapExceeded)):
            status = 500
        else:
            status = 422
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__, "message": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.post("/inputs/generate", response_model=GenerateInputsResponse)
    def generate(request: GenerateInputsRequest) -> GenerateInputsResponse:
        schema = parse_schema(request.schema_object,
                              default_mode=_MODE_FOR_LEVEL[request.level])
        n = request.n if request.n is not None else default_input_count(request.level)
        cfg = GenConfig(seed=request.seed, n=n, max_rejections=request.max_rejections)
        inputs = generate_inputs(schema, cfg, problem_id=request.problem_id)
        return GenerateInputsResponse(
            n=len(inputs),
            inputs=[GeneratedInput(index=ti.index, values=list(ti.values),
                                   rendered=ti.rendered) for ti in inputs])

    @app.post("/check", response_model=CheckResponse)
    def check(request: CheckRequest) -> CheckResponse:
        if request.level == LEVEL_FUNCTION:
            if not request.entry_point:
                raise HTTPException(422, "entry_point is required at function level")
            original = function_target(request.original, request.entry_point)
            refactored = function_target(request.refactored, request.entry_point)
        else:
            original = program_target(request.original)
            refactored = program_target(request.refactored)
        schema = parse_schema(request.schema_object,
                              default_mode=_MODE_FOR_LEVEL[request.level])
        n = request.n if request.n is not None else default_input_count(request.level)
        verdict = check_equivalence(
            original, refactored, schema, pick_executor(request.executor),
            GenConfig(seed=request.seed, n=n, max_rejections=request.max_rejections),
            policy=ExecPolicy(per_run_timeout=request.per_run_timeout,
                              max_output_bytes=request.max_output_bytes),
            cmp=CompareConfig(float_rel_tol=request.float_rel_tol,
                              float_abs_tol=request.float_abs_tol,
                              program_output_normalization=request.normalization),
            mode=request.mode, problem_id=request.problem_id)
        return CheckResponse(**verdict.to_object())

    @app.post("/campaigns", response_model=CampaignResponse)
    def campaign(request: CampaignRequest) -> CampaignResponse:
        try:
            problems = tuple(parse_problem(obj) for obj in request.problems)
            refactorings = tuple(
                RefactoringRecord(
                    problem_id=str(obj["problem_id"]), model=str(obj["model"]),
                    refactor_type=str(obj["refactor_type"]),
                    source=str(obj["source"]),
                    origin=str(obj.get("origin", "offline_file")))
                for obj in request.refactorings)
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"bad campaign payload: {exc}") from exc
        cfg = CampaignConfig(
            seed=request.seed,
            n_function=(request.n_function if request.n_function is not None
                        else default_input_count("function")),
            n_program=(request.n_program if request.n_program is not None
                       else default_input_count("program")),
            max_rejections=request.max_rejections,
            max_workers=request.max_workers)
        report = run_campaign(
            problems, refactorings, pick_executor(request.executor), cfg,
            policy=ExecPolicy(per_run_timeout=request.per_run_timeout,
                              max_output_bytes=request.max_output_bytes),
            cmp=CompareConfig(float_rel_tol=request.float_rel_tol,
                              float_abs_tol=request.float_abs_tol,
                              program_output_normalization=request.normalization))
        return CampaignResponse(report=report.to_object())

    @app.post("/reports/render", response_model=RenderReportResponse)
    def render(request: RenderReportRequest) -> RenderReportResponse:
        try:
            report = CampaignReport.from_object(request.report)
        except KeyError as exc:
            raise HTTPException(422, f"malformed report: missing {exc}") from exc
        if request.format == "csv":
            files = {"table2.csv": render_table2_csv(report),
                     "table3.csv": render_table3_csv(report)}
        else:
            files = {"report.txt": render_text(report)}
        return RenderReportResponse(files=files)

    return app


__all__ = ["create_app"]
