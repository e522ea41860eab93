"""Experiment orchestration: problems x models x refactoring types.

Every cell gets a full-scan equivalence verdict plus a test-suite result;
excluded cells (timeout, non-executable, missing refactoring) are counted by
reason and dropped from every denominator. The aggregate report mirrors the
two summary shapes downstream tooling expects:

* per-(model, type, dataset) non-equivalence percentages with per-model
  overall rows, and
* per-dataset divergence rows counting non-equivalent refactorings that
  nevertheless pass their dataset tests.

Reports are a pure function of (corpus, refactorings, configs, seed): wall
times never enter the serialized form, and worker counts cannot change any
number.
"""

from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .compare import CompareConfig
from .corpus import REFACTOR_TYPES, ProblemRecord, RefactoringRecord
from .errors import DiffFuzzError, HarnessError
from .execution import ExecPolicy, Executor, LEVEL_FUNCTION
from .inputgen import (DEFAULT_FUNCTION_INPUTS, DEFAULT_MAX_REJECTIONS,
                       DEFAULT_PROGRAM_INPUTS, GenConfig)
from .llm import GenerationParams
from .verdict import (MODE_FULL_SCAN, STATUS_EXCLUDED_NON_EXECUTABLE,
                      STATUS_EXCLUDED_TIMEOUT, STATUS_NON_EQUIVALENT,
                      SuiteResult, Verdict, check_equivalence, check_test_suite)

EXCLUSION_TIMEOUT = "timeout"
EXCLUSION_NON_EXECUTABLE = "non_executable"
EXCLUSION_MISSING = "missing"


@dataclass(frozen=True)
class CampaignConfig:
    seed: int = 0
    n_function: int = DEFAULT_FUNCTION_INPUTS
    n_program: int = DEFAULT_PROGRAM_INPUTS
    max_rejections: int = DEFAULT_MAX_REJECTIONS
    max_workers: int = 1
    models: tuple[str, ...] | None = None        # None: every model seen in records
    refactor_types: tuple[str, ...] = REFACTOR_TYPES


@dataclass(frozen=True)
class PairResult:
    problem_id: str
    model: str
    refactor_type: str
    dataset: str
    verdict: Verdict | None = None
    suite: SuiteResult | None = None
    missing: bool = False
    error: str | None = None
    elapsed: float = field(default=0.0, compare=False)

    @property
    def analyzed(self) -> bool:
        return (self.verdict is not None and not self.verdict.excluded
                and self.error is None)

    @property
    def exclusion_reason(self) -> str | None:
        if self.missing:
            return EXCLUSION_MISSING
        if self.error is not None or self.verdict is None:
            return None
        if self.verdict.status == STATUS_EXCLUDED_TIMEOUT:
            return EXCLUSION_TIMEOUT
        if self.verdict.status == STATUS_EXCLUDED_NON_EXECUTABLE:
            return EXCLUSION_NON_EXECUTABLE
        return None

    def to_object(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "model": self.model,
            "refactor_type": self.refactor_type,
            "dataset": self.dataset,
            "verdict": _strip_times(self.verdict.to_object()) if self.verdict else None,
            "suite": self.suite.to_object() if self.suite else None,
            "missing": self.missing,
            "error": self.error,
        }


def _strip_times(obj):
    """Drops wall-time fields so serialized reports are run-to-run identical."""
    if isinstance(obj, dict):
        return {k: _strip_times(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [_strip_times(v) for v in obj]
    return obj


def _pct(numerator: int, denominator: int) -> float | None:
    if denominator == 0:
        return None
    return round(100.0 * numerator / denominator, 2)


@dataclass(frozen=True)
class CampaignReport:
    header: dict
    table2_cells: tuple[dict, ...]
    table2_overall: tuple[dict, ...]
    table3: tuple[dict, ...]
    exclusions: dict
    pairs: tuple[dict, ...]
    failures: tuple[dict, ...] = ()

    def to_object(self) -> dict:
        return {
            "header": self.header,
            "table2": {"cells": list(self.table2_cells),
                       "overall": list(self.table2_overall)},
            "table3": list(self.table3),
            "exclusions": self.exclusions,
            "pairs": list(self.pairs),
            "failures": list(self.failures),
        }

    @staticmethod
    def from_object(obj: dict) -> "CampaignReport":
        return CampaignReport(
            header=obj["header"],
            table2_cells=tuple(obj["table2"]["cells"]),
            table2_overall=tuple(obj["table2"]["overall"]),
            table3=tuple(obj["table3"]),
            exclusions=obj["exclusions"],
            pairs=tuple(obj["pairs"]),
            failures=tuple(obj.get("failures", ())))


def _evaluate_pair(problem: ProblemRecord, record: RefactoringRecord,
                   executor: Executor, cfg: CampaignConfig, policy: ExecPolicy,
                   cmp: CompareConfig) -> PairResult:
    n = cfg.n_function if problem.level == LEVEL_FUNCTION else cfg.n_program
    gen_cfg = GenConfig(seed=cfg.seed, n=n, max_rejections=cfg.max_rejections)
    refactored = problem.target_for(record.source)
    started = time.monotonic()
    try:
        verdict = check_equivalence(
            problem.target(), refactored, problem.schema, executor, gen_cfg,
            policy=policy, cmp=cmp, mode=MODE_FULL_SCAN,
            problem_id=problem.problem_id)
        suite = check_test_suite(refactored, problem.tests, executor,
                                 policy=policy, cmp=cmp)
    except (HarnessError, DiffFuzzError) as exc:
        return PairResult(problem.problem_id, record.model, record.refactor_type,
                          problem.dataset, error=f"{type(exc).__name__}: {exc}",
                          elapsed=time.monotonic() - started)
    return PairResult(problem.problem_id, record.model, record.refactor_type,
                      problem.dataset, verdict=verdict, suite=suite,
                      elapsed=time.monotonic() - started)


def evaluate_pairs(problems, refactorings, executor: Executor,
                   cfg: CampaignConfig | None = None,
                   policy: ExecPolicy | None = None,
                   cmp: CompareConfig | None = None) -> list[PairResult]:
    """All (problem, model, type) cells in deterministic order; cells are
    independent work units, so the worker pool cannot reorder results."""
    cfg = cfg or CampaignConfig()
    policy = policy or ExecPolicy()
    cmp = cmp or CompareConfig()
    problems = tuple(problems)
    index = {record.key: record for record in refactorings}
    models = cfg.models or tuple(sorted({record.model for record in refactorings}))

    jobs = []
    for problem in problems:
        for model in models:
            for refactor_type in cfg.refactor_types:
                jobs.append((problem, model, refactor_type))

    def run_job(job) -> PairResult:
        problem, model, refactor_type = job
        record = index.get((problem.problem_id, model, refactor_type))
        if record is None:
            return PairResult(problem.problem_id, model, refactor_type,
                              problem.dataset, missing=True)
        return _evaluate_pair(problem, record, executor, cfg, policy, cmp)

    if cfg.max_workers <= 1:
        return [run_job(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=cfg.max_workers) as pool:
        return list(pool.map(run_job, jobs))


def aggregate_table2(results) -> tuple[list[dict], list[dict]]:
    cells: dict[tuple, dict] = {}
    overall: dict[str, dict] = {}
    for result in results:
        if result.error is not None:
            continue
        key = (result.model, result.refactor_type, result.dataset)
        cell = cells.setdefault(key, {"n_attempted": 0, "n_analyzed": 0, "n_noneq": 0})
        model_row = overall.setdefault(result.model, {"n_analyzed": 0, "n_noneq": 0})
        cell["n_attempted"] += 1
        if not result.analyzed:
            continue
        cell["n_analyzed"] += 1
        model_row["n_analyzed"] += 1
        if result.verdict.status == STATUS_NON_EQUIVALENT:
            cell["n_noneq"] += 1
            model_row["n_noneq"] += 1
    cell_rows = []
    for (model, refactor_type, dataset) in sorted(cells):
        counts = cells[(model, refactor_type, dataset)]
        cell_rows.append({
            "model": model, "refactor_type": refactor_type, "dataset": dataset,
            **counts,
            "pct_noneq": _pct(counts["n_noneq"], counts["n_analyzed"]),
        })
    overall_rows = []
    for model in sorted(overall):
        counts = overall[model]
        overall_rows.append({
            "model": model, **counts,
            "pct_noneq": _pct(counts["n_noneq"], counts["n_analyzed"]),
        })
    return cell_rows, overall_rows


def count_divergence(results) -> list[dict]:
    """Per dataset: non-equivalent refactorings that still pass their tests."""
    rows: dict[str, dict] = {}
    for result in results:
        if not result.analyzed:
            continue
        row = rows.setdefault(result.dataset, {
            "n_total_analyzed": 0, "n_noneq": 0, "n_noneq_with_corr1": 0})
        row["n_total_analyzed"] += 1
        if result.verdict.status != STATUS_NON_EQUIVALENT:
            continue
        row["n_noneq"] += 1
        if result.suite is not None and result.suite.corr_bit == 1:
            row["n_noneq_with_corr1"] += 1
    out = []
    for dataset in sorted(rows):
        row = rows[dataset]
        out.append({
            "dataset": dataset, **row,
            "pct_of_noneq": _pct(row["n_noneq_with_corr1"], row["n_noneq"]),
        })
    return out


def count_exclusions(results) -> dict:
    counts = {EXCLUSION_TIMEOUT: 0, EXCLUSION_NON_EXECUTABLE: 0, EXCLUSION_MISSING: 0}
    for result in results:
        reason = result.exclusion_reason
        if reason is not None:
            counts[reason] += 1
    return {reason: n for reason, n in counts.items() if n}


def build_header(cfg: CampaignConfig, policy: ExecPolicy, cmp: CompareConfig,
                 generation_params: GenerationParams | None) -> dict:
    header = {
        "seed": cfg.seed,
        "n_function": cfg.n_function,
        "n_program": cfg.n_program,
        "max_rejections": cfg.max_rejections,
        "per_run_timeout": policy.per_run_timeout,
        "max_output_bytes": policy.max_output_bytes,
        "float_rel_tol": cmp.float_rel_tol,
        "float_abs_tol": cmp.float_abs_tol,
        "program_output_normalization": cmp.program_output_normalization,
        "set_serialization": "sorted",
    }
    if generation_params is not None:
        header["generation_params"] = {
            "model": generation_params.model,
            "temperature": generation_params.temperature,
            "max_tokens": generation_params.max_tokens,
            "seed": generation_params.seed,
        }
    return header


def run_campaign(problems, refactorings, executor: Executor,
                 cfg: CampaignConfig | None = None,
                 policy: ExecPolicy | None = None,
                 cmp: CompareConfig | None = None,
                 generation_params: GenerationParams | None = None) -> CampaignReport:
    cfg = cfg or CampaignConfig()
    policy = policy or ExecPolicy()
    cmp = cmp or CompareConfig()
    results = evaluate_pairs(problems, refactorings, executor, cfg, policy, cmp)
    cell_rows, overall_rows = aggregate_table2(results)
    failures = tuple(
        {"problem_id": r.problem_id, "model": r.model,
         "refactor_type": r.refactor_type, "error": r.error}
        for r in results if r.error is not None)
    return CampaignReport(
        header=build_header(cfg, policy, cmp, generation_params),
        table2_cells=tuple(cell_rows),
        table2_overall=tuple(overall_rows),
        table3=tuple(count_divergence(results)),
        exclusions=count_exclusions(results),
        pairs=tuple(result.to_object() for result in results),
        failures=failures)


FORMAT_STRUCTURED = "structured"
FORMAT_CSV = "csv"


def report_to_json(report: CampaignReport) -> str:
    return json.dumps(report.to_object(), sort_keys=True, indent=2,
                      ensure_ascii=False) + "\n"


def read_report(path: str) -> CampaignReport:
    with open(path, encoding="utf-8") as fh:
        return CampaignReport.from_object(json.load(fh))


def _csv_text(rows, fieldnames) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def render_table2_csv(report: CampaignReport) -> str:
    rows = [dict(row) for row in report.table2_cells]
    for row in report.table2_overall:
        rows.append({"model": row["model"], "refactor_type": "overall",
                     "dataset": "overall", "n_attempted": "",
                     "n_analyzed": row["n_analyzed"], "n_noneq": row["n_noneq"],
                     "pct_noneq": row["pct_noneq"]})
    return _csv_text(rows, ["model", "refactor_type", "dataset", "n_attempted",
                            "n_analyzed", "n_noneq", "pct_noneq"])


def render_table3_csv(report: CampaignReport) -> str:
    return _csv_text(report.table3, ["dataset", "n_total_analyzed", "n_noneq",
                                     "n_noneq_with_corr1", "pct_of_noneq"])


def render_text(report: CampaignReport) -> str:
    """Plain-text tables for terminal display."""
    lines = ["Non-equivalence by model / type / dataset"]
    for row in report.table2_cells:
        pct = "-" if row["pct_noneq"] is None else f"{row['pct_noneq']:.2f}%"
        lines.append(f"  {row['model']}  {row['refactor_type']:<14} "
                     f"{row['dataset']:<12} {row['n_noneq']}/{row['n_analyzed']}"
                     f" ({pct})")
    for row in report.table2_overall:
        pct = "-" if row["pct_noneq"] is None else f"{row['pct_noneq']:.2f}%"
        lines.append(f"  {row['model']}  overall        "
                     f"{row['n_noneq']}/{row['n_analyzed']} ({pct})")
    lines.append("Divergence: non-equivalent but passing the dataset tests")
    for row in report.table3:
        pct = "-" if row["pct_of_noneq"] is None else f"{row['pct_of_noneq']:.2f}%"
        lines.append(f"  {row['dataset']:<12} analyzed {row['n_total_analyzed']}"
                     f"  non-eq {row['n_noneq']}"
                     f"  passing tests {row['n_noneq_with_corr1']} ({pct})")
    if report.exclusions:
        parts = ", ".join(f"{k}={v}" for k, v in sorted(report.exclusions.items()))
        lines.append(f"Exclusions: {parts}")
    if report.failures:
        lines.append(f"Failures: {len(report.failures)} cell(s) hit harness errors")
    return "\n".join(lines) + "\n"


def write_report(report: CampaignReport, out_dir: str,
                 format: str = FORMAT_STRUCTURED) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if format == FORMAT_STRUCTURED:
        path = os.path.join(out_dir, "report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(report_to_json(report))
        written.append(path)
    elif format == FORMAT_CSV:
        for name, text in (("table2.csv", render_table2_csv(report)),
                           ("table3.csv", render_table3_csv(report))):
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            written.append(path)
    else:
        raise ValueError(f"unknown report format {format!r}")
    return written
