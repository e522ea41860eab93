"""Differential-fuzzing equivalence checker for candidate code refactorings.

Generates constraint-respecting inputs from a keyed deterministic stream,
runs original and refactored sources on each, and reduces the outcome pairs
to a binary equivalence bit, a continuous similarity score and, for
campaigns, dataset-level aggregate tables.
"""

__version__ = "0.1.0"

from .compare import CompareConfig, outcomes_equal, values_equal
from .corpus import (ProblemRecord, RefactoringRecord, TestCase, load_corpus,
                     load_refactorings, sample_problems)
from .errors import (CorpusError, DiffFuzzError, DiscardCapExceeded,
                     GenerationExhausted, HarnessError, SchemaError)
from .execution import (ExecPolicy, ExecTarget, ExecutionOutcome,
                        InProcessExecutor, ProcessExecutor, TableExecutor,
                        function_target, program_target, run_once)
from .inputgen import GenConfig, TestInput, derive_stream, generate_inputs
from .schema import InputSchema, ParamSpec, parse_schema, satisfies
from .values import NAN, canonicalize, dumps, loads
from .verdict import (SuiteResult, Verdict, check_equivalence,
                      check_test_suite, similarity_score)

__all__ = [
    "__version__",
    "CompareConfig", "outcomes_equal", "values_equal",
    "ProblemRecord", "RefactoringRecord", "TestCase",
    "load_corpus", "load_refactorings", "sample_problems",
    "CorpusError", "DiffFuzzError", "DiscardCapExceeded",
    "GenerationExhausted", "HarnessError", "SchemaError",
    "ExecPolicy", "ExecTarget", "ExecutionOutcome",
    "InProcessExecutor", "ProcessExecutor", "TableExecutor",
    "function_target", "program_target", "run_once",
    "GenConfig", "TestInput", "derive_stream", "generate_inputs",
    "InputSchema", "ParamSpec", "parse_schema", "satisfies",
    "NAN", "canonicalize", "dumps", "loads",
    "SuiteResult", "Verdict", "check_equivalence", "check_test_suite",
    "similarity_score",
]
