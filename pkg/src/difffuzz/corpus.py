"""Problem and refactoring records, stored as JSON Lines.

A problem record carries the original source, its typed input schema and the
dataset-provided test cases. A refactoring record carries one candidate
rewrite of one problem, tagged with the producing model and the requested
transformation. Loader errors always cite the 1-based line number.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .errors import CorpusError
from .execution import (ExecTarget, LEVEL_FUNCTION, LEVEL_PROGRAM,
                        function_target, program_target)
from .inputgen import derive_stream
from .schema import (InputSchema, MODE_ARGUMENT_VECTOR, MODE_TEXT_STREAM,
                     parse_schema, schema_to_object)
from .values import canonicalize

REFACTOR_TYPES = ("simplification", "optimization")

_MODE_FOR_LEVEL = {
    LEVEL_FUNCTION: MODE_ARGUMENT_VECTOR,
    LEVEL_PROGRAM: MODE_TEXT_STREAM,
}


@dataclass(frozen=True)
class TestCase:
    """One dataset-provided check: argument vector or stdin text, plus the
    expected result (return value or stdout)."""

    expected: object
    args: tuple | None = None
    stdin: str | None = None

    def __post_init__(self) -> None:
        if (self.args is None) == (self.stdin is None):
            raise ValueError("exactly one of args/stdin must be set")


@dataclass(frozen=True)
class ProblemRecord:
    problem_id: str
    dataset: str
    level: str
    source: str
    schema: InputSchema
    tests: tuple[TestCase, ...] = ()
    entry_point: str | None = None
    description: str = ""

    def __post_init__(self) -> None:
        if self.level not in (LEVEL_FUNCTION, LEVEL_PROGRAM):
            raise ValueError(f"unknown level {self.level!r}")
        if (self.level == LEVEL_FUNCTION) != bool(self.entry_point):
            raise ValueError("entry_point is required exactly for function-level problems")
        expected_mode = _MODE_FOR_LEVEL[self.level]
        if self.schema.mode != expected_mode:
            raise ValueError(
                f"schema mode {self.schema.mode!r} does not fit level {self.level!r}")
        for case in self.tests:
            if self.level == LEVEL_FUNCTION and case.args is None:
                raise ValueError("function-level tests must use args")
            if self.level == LEVEL_PROGRAM and case.stdin is None:
                raise ValueError("program-level tests must use stdin")

    def target(self) -> ExecTarget:
        if self.level == LEVEL_FUNCTION:
            return function_target(self.source, self.entry_point)
        return program_target(self.source)

    def target_for(self, source: str) -> ExecTarget:
        """Target running alternative source under this problem's calling
        convention."""
        if self.level == LEVEL_FUNCTION:
            return function_target(source, self.entry_point)
        return program_target(source)


ORIGIN_OFFLINE = "offline_file"
ORIGIN_SERVICE = "service"


@dataclass(frozen=True)
class RefactoringRecord:
    problem_id: str
    model: str
    refactor_type: str
    source: str
    origin: str = ORIGIN_OFFLINE

    def __post_init__(self) -> None:
        if self.refactor_type not in REFACTOR_TYPES:
            raise ValueError(f"unknown refactor_type {self.refactor_type!r}")
        if self.origin not in (ORIGIN_OFFLINE, ORIGIN_SERVICE):
            raise ValueError(f"unknown origin {self.origin!r}")

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.problem_id, self.model, self.refactor_type)


def _iter_jsonl(path: str):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc}", line=lineno) from exc
            if not isinstance(obj, dict):
                raise CorpusError("record must be a JSON object", line=lineno)
            yield lineno, obj


def _require(obj: dict, key: str, lineno: int) -> object:
    if key not in obj:
        raise CorpusError(f"missing key {key!r}", line=lineno)
    return obj[key]


def _parse_test_case(obj: object, level: str, lineno: int) -> TestCase:
    if not isinstance(obj, dict):
        raise CorpusError("test case must be an object", line=lineno)
    try:
        if level == LEVEL_FUNCTION:
            args = _require(obj, "args", lineno)
            if not isinstance(args, list):
                raise CorpusError("test args must be a list", line=lineno)
            return TestCase(expected=canonicalize(_require(obj, "expected", lineno)),
                            args=tuple(canonicalize(a) for a in args))
        stdin = _require(obj, "stdin", lineno)
        expected = _require(obj, "expected_stdout", lineno)
        if not isinstance(stdin, str) or not isinstance(expected, str):
            raise CorpusError("program tests need string stdin/expected_stdout",
                              line=lineno)
        return TestCase(expected=expected, stdin=stdin)
    except ValueError as exc:
        raise CorpusError(str(exc), line=lineno) from exc


def parse_problem(obj: dict, lineno: int = 0) -> ProblemRecord:
    level = _require(obj, "level", lineno)
    if level not in (LEVEL_FUNCTION, LEVEL_PROGRAM):
        raise CorpusError(f"unknown level {level!r}", line=lineno)
    try:
        schema = parse_schema(_require(obj, "schema", lineno),
                              default_mode=_MODE_FOR_LEVEL[level])
    except Exception as exc:
        raise CorpusError(f"bad schema: {exc}", line=lineno) from exc
    tests = tuple(_parse_test_case(case, level, lineno)
                  for case in obj.get("tests", []))
    try:
        return ProblemRecord(
            problem_id=str(_require(obj, "problem_id", lineno)),
            dataset=str(_require(obj, "dataset", lineno)),
            level=level,
            source=str(_require(obj, "source", lineno)),
            schema=schema,
            tests=tests,
            entry_point=obj.get("entry_point"),
            description=str(obj.get("description", "")))
    except ValueError as exc:
        raise CorpusError(str(exc), line=lineno) from exc


def problem_to_object(problem: ProblemRecord) -> dict:
    obj: dict = {
        "problem_id": problem.problem_id,
        "dataset": problem.dataset,
        "level": problem.level,
        "source": problem.source,
        "schema": schema_to_object(problem.schema),
    }
    if problem.entry_point:
        obj["entry_point"] = problem.entry_point
    if problem.description:
        obj["description"] = problem.description
    tests = []
    for case in problem.tests:
        if problem.level == LEVEL_FUNCTION:
            tests.append({"args": list(case.args), "expected": case.expected})
        else:
            tests.append({"stdin": case.stdin, "expected_stdout": case.expected})
    if tests:
        obj["tests"] = tests
    return obj


def load_corpus(path: str) -> tuple[ProblemRecord, ...]:
    problems: list[ProblemRecord] = []
    seen: dict[str, int] = {}
    for lineno, obj in _iter_jsonl(path):
        problem = parse_problem(obj, lineno)
        if problem.problem_id in seen:
            raise CorpusError(
                f"duplicate problem_id {problem.problem_id!r}"
                f" (first at line {seen[problem.problem_id]})", line=lineno)
        seen[problem.problem_id] = lineno
        problems.append(problem)
    return tuple(problems)


def write_corpus(path: str, problems) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for problem in problems:
            fh.write(json.dumps(problem_to_object(problem), ensure_ascii=False))
            fh.write("\n")


def load_refactorings(path: str) -> tuple[RefactoringRecord, ...]:
    records: list[RefactoringRecord] = []
    seen: dict[tuple, int] = {}
    for lineno, obj in _iter_jsonl(path):
        try:
            record = RefactoringRecord(
                problem_id=str(_require(obj, "problem_id", lineno)),
                model=str(_require(obj, "model", lineno)),
                refactor_type=str(_require(obj, "refactor_type", lineno)),
                source=str(_require(obj, "source", lineno)),
                origin=str(obj.get("origin", ORIGIN_OFFLINE)))
        except ValueError as exc:
            raise CorpusError(str(exc), line=lineno) from exc
        if record.key in seen:
            raise CorpusError(
                f"duplicate refactoring {record.key}"
                f" (first at line {seen[record.key]})", line=lineno)
        seen[record.key] = lineno
        records.append(record)
    return tuple(records)


def write_refactorings(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps({
                "problem_id": record.problem_id,
                "model": record.model,
                "refactor_type": record.refactor_type,
                "source": record.source,
                "origin": record.origin,
            }, ensure_ascii=False))
            fh.write("\n")


def problems_by_id(problems) -> dict[str, ProblemRecord]:
    return {p.problem_id: p for p in problems}


def mini_corpus_paths() -> tuple[str, str]:
    """(problems, refactorings) paths of the bundled 10-problem fixture."""
    base = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "mini")
    return (os.path.join(base, "problems.jsonl"),
            os.path.join(base, "refactorings.jsonl"))


def sample_problems(problems, k: int, seed: int) -> tuple[ProblemRecord, ...]:
    """Deterministic k-subsample, corpus order preserved.

    Uses the harness's keyed stream so the pick depends only on (seed, corpus
    size), not on interpreter hash state.
    """
    problems = tuple(problems)
    if k >= len(problems):
        return problems
    if k < 0:
        raise ValueError("k must be >= 0")
    stream = derive_stream(seed, "__sample__", len(problems))
    indices = list(range(len(problems)))
    for i in range(len(indices) - 1, 0, -1):
        j = stream.read_u64() % (i + 1)
        indices[i], indices[j] = indices[j], indices[i]
    chosen = sorted(indices[:k])
    return tuple(problems[i] for i in chosen)
