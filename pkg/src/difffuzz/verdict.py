"""Equivalence verdicts over generated inputs, and test-suite correctness.

``check_equivalence`` drives both targets over the same keyed input stream
and reduces the outcome pairs to a single Verdict:

* all compared pairs agree        -> Equivalent (bit 1)
* some pair disagrees             -> NonEquivalent (bit 0) with the smallest
                                     mismatching input index as witness
* refactored side times out       -> ExcludedTimeout, pair leaves analysis
* refactored side cannot load     -> ExcludedNonExecutable

Inputs the ORIGINAL cannot handle (timeout, harness fault) are discarded and
replaced by fresh draws at the next indices; more than 10% of the budget
discarded aborts the pair with ``DiscardCapExceeded`` since that points at a
broken schema, not a bad refactoring.

``check_test_suite`` is the fixed-suite baseline the fuzzing verdict is
compared against; a pair that passes its suite but earns a NonEquivalent
verdict here is a divergence case.
"""

from __future__ import annotations

import dataclasses
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .compare import CompareConfig, normalize_program_output, outcomes_equal, values_equal
from .errors import DiscardCapExceeded, HarnessError
from .execution import (ExecPolicy, ExecTarget, ExecutionOutcome, Executor,
                        LEVEL_PROGRAM)
from .inputgen import GenConfig, TestInput, generate_input_at
from .schema import InputSchema

STATUS_EQUIVALENT = "Equivalent"
STATUS_NON_EQUIVALENT = "NonEquivalent"
STATUS_EXCLUDED_TIMEOUT = "ExcludedTimeout"
STATUS_EXCLUDED_NON_EXECUTABLE = "ExcludedNonExecutable"

STATUSES = (STATUS_EQUIVALENT, STATUS_NON_EQUIVALENT,
            STATUS_EXCLUDED_TIMEOUT, STATUS_EXCLUDED_NON_EXECUTABLE)

MODE_EARLY_EXIT = "early_exit"
MODE_FULL_SCAN = "full_scan"


@dataclass(frozen=True)
class Witness:
    """The smallest-index input on which the two targets disagree."""

    index: int
    original: ExecutionOutcome
    refactored: ExecutionOutcome

    def to_object(self) -> dict:
        return {"index": self.index,
                "original": self.original.to_object(),
                "refactored": self.refactored.to_object()}


@dataclass(frozen=True)
class Verdict:
    status: str
    n_compared: int
    n_discarded: int
    eq_bit: int | None = None
    similarity: float | None = None
    witness: Witness | None = None

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == STATUS_EQUIVALENT:
            if self.eq_bit != 1 or self.witness is not None:
                raise ValueError("Equivalent verdicts carry eq_bit 1 and no witness")
        elif self.status == STATUS_NON_EQUIVALENT:
            if self.eq_bit != 0 or self.witness is None:
                raise ValueError("NonEquivalent verdicts carry eq_bit 0 and a witness")
        else:
            if self.eq_bit is not None or self.witness is not None \
                    or self.similarity is not None:
                raise ValueError("excluded verdicts carry no bit, witness or score")
        if self.similarity is not None:
            if not (0.0 <= self.similarity <= 1.0):
                raise ValueError("similarity out of [0, 1]")
            if self.n_compared <= 0:
                raise ValueError("similarity requires n_compared > 0")

    @property
    def excluded(self) -> bool:
        return self.status in (STATUS_EXCLUDED_TIMEOUT, STATUS_EXCLUDED_NON_EXECUTABLE)

    def to_object(self) -> dict:
        return {
            "status": self.status,
            "eq_bit": self.eq_bit,
            "similarity": self.similarity,
            "n_compared": self.n_compared,
            "n_discarded": self.n_discarded,
            "witness": self.witness.to_object() if self.witness else None,
        }


@dataclass(frozen=True)
class SuiteResult:
    corr_bit: int
    n_tests: int
    first_failure: int | None = None

    def __post_init__(self) -> None:
        if (self.corr_bit == 1) != (self.first_failure is None):
            raise ValueError("corr_bit 1 exactly when no failure is recorded")

    def to_object(self) -> dict:
        return {"corr_bit": self.corr_bit, "n_tests": self.n_tests,
                "first_failure": self.first_failure}


def _normalize_outcome(outcome: ExecutionOutcome, level: str,
                       cmp: CompareConfig) -> ExecutionOutcome:
    if level == LEVEL_PROGRAM and outcome.tag == "Value":
        return dataclasses.replace(
            outcome, value=normalize_program_output(outcome.value, cmp))
    return outcome


# Messages produced per input by the pair runner.
_DISCARD = "discard"
_EXCL_TIMEOUT = "excl_timeout"
_EXCL_NONEXEC = "excl_nonexec"
_PAIR = "pair"


def check_equivalence(original: ExecTarget, refactored: ExecTarget,
                      schema: InputSchema, executor: Executor, gen_cfg: GenConfig,
                      policy: ExecPolicy | None = None,
                      cmp: CompareConfig | None = None,
                      mode: str = MODE_EARLY_EXIT,
                      problem_id: str = "",
                      max_workers: int = 1) -> Verdict:
    if mode not in (MODE_EARLY_EXIT, MODE_FULL_SCAN):
        raise ValueError(f"unknown mode {mode!r}")
    if original.level != refactored.level:
        raise HarnessError("original and refactored targets differ in level")
    policy = policy or ExecPolicy()
    cmp = cmp or CompareConfig()
    level = original.level

    prepared_original = executor.prepare(original, policy)
    if not prepared_original.ok:
        prepared_original.close()
        raise HarnessError(
            f"original target is non-executable: {prepared_original.failure.message}")
    prepared_refactored = executor.prepare(refactored, policy)
    if not prepared_refactored.ok:
        prepared_original.close()
        prepared_refactored.close()
        return Verdict(status=STATUS_EXCLUDED_NON_EXECUTABLE,
                       n_compared=0, n_discarded=0)
    try:
        return _scan(prepared_original, prepared_refactored, schema, executor,
                     gen_cfg, policy, cmp, mode, problem_id, max_workers, level)
    finally:
        prepared_original.close()
        prepared_refactored.close()


def _scan(prepared_original, prepared_refactored, schema, executor: Executor,
          gen_cfg: GenConfig, policy: ExecPolicy, cmp: CompareConfig, mode: str,
          problem_id: str, max_workers: int, level: str) -> Verdict:
    discard_cap = (gen_cfg.n * 10) // 100

    def run_pair(index: int):
        test_input = generate_input_at(schema, gen_cfg.seed, problem_id, index,
                                       gen_cfg.max_rejections)
        try:
            out_original = executor.run(prepared_original, test_input, policy)
        except HarnessError:
            # The reference is ground truth; a harness fault on its side says
            # nothing about the refactoring. Drop the input.
            return (_DISCARD, index, None, None)
        if out_original.tag == "Timeout":
            return (_DISCARD, index, None, None)
        if out_original.tag == "NonExecutable":
            raise HarnessError("original target failed to execute after prepare")
        out_refactored = executor.run(prepared_refactored, test_input, policy)
        if out_refactored.tag == "Timeout":
            return (_EXCL_TIMEOUT, index, None, None)
        if out_refactored.tag == "NonExecutable":
            return (_EXCL_NONEXEC, index, None, None)
        return (_PAIR, index,
                _normalize_outcome(out_original, level, cmp),
                _normalize_outcome(out_refactored, level, cmp))

    pending: deque[int] = deque(range(gen_cfg.n))
    next_index = gen_cfg.n
    compared = 0
    matches = 0
    discarded = 0
    witness: Witness | None = None

    def consume(message) -> str | None:
        """Folds one in-order message into the totals; returns a stop signal."""
        nonlocal compared, matches, discarded, witness, next_index
        kind, index, out_original, out_refactored = message
        if kind == _DISCARD:
            discarded += 1
            if discarded > discard_cap:
                raise DiscardCapExceeded(
                    f"{discarded} of {gen_cfg.n} inputs discarded (cap {discard_cap});"
                    " the reference target cannot handle its own input domain")
            pending.append(next_index)
            next_index += 1
            return None
        if kind == _EXCL_TIMEOUT:
            return STATUS_EXCLUDED_TIMEOUT
        if kind == _EXCL_NONEXEC:
            return STATUS_EXCLUDED_NON_EXECUTABLE
        compared += 1
        if outcomes_equal(out_original, out_refactored, cmp):
            matches += 1
            return None
        if witness is None:
            witness = Witness(index, out_original, out_refactored)
        if mode == MODE_EARLY_EXIT:
            return "stop"
        return None

    signal: str | None = None
    if max_workers <= 1:
        while pending and signal is None:
            signal = consume(run_pair(pending.popleft()))
    else:
        # Window keeps submission order == index order, so the first mismatch
        # consumed is the smallest index regardless of completion order.
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures: deque = deque()

            def refill() -> None:
                while pending and len(futures) < max_workers * 2:
                    futures.append(pool.submit(run_pair, pending.popleft()))

            refill()
            while futures and signal is None:
                signal = consume(futures.popleft().result())
                refill()
            for future in futures:
                future.cancel()

    if signal in (STATUS_EXCLUDED_TIMEOUT, STATUS_EXCLUDED_NON_EXECUTABLE):
        return Verdict(status=signal, n_compared=compared, n_discarded=discarded)
    if witness is not None:
        similarity = matches / compared if mode == MODE_FULL_SCAN else None
        return Verdict(status=STATUS_NON_EQUIVALENT, eq_bit=0,
                       similarity=similarity, witness=witness,
                       n_compared=compared, n_discarded=discarded)
    return Verdict(status=STATUS_EQUIVALENT, eq_bit=1,
                   similarity=1.0 if compared else None,
                   n_compared=compared, n_discarded=discarded)


def check_test_suite(refactored: ExecTarget, tests, executor: Executor,
                     policy: ExecPolicy | None = None,
                     cmp: CompareConfig | None = None) -> SuiteResult:
    """Eq. of record for the fixed-suite baseline: 1 iff every dataset test
    passes. An unloadable target fails by convention (first_failure 0)."""
    policy = policy or ExecPolicy()
    cmp = cmp or CompareConfig()
    tests = tuple(tests)
    prepared = executor.prepare(refactored, policy)
    if not prepared.ok:
        prepared.close()
        return SuiteResult(corr_bit=0, n_tests=len(tests), first_failure=0)
    try:
        for i, case in enumerate(tests):
            if refactored.level == LEVEL_PROGRAM:
                test_input = TestInput(index=i, values=(), rendered=case.stdin)
            else:
                test_input = TestInput(index=i, values=tuple(case.args))
            outcome = executor.run(prepared, test_input, policy)
            if not _test_passes(outcome, case.expected, refactored.level, cmp):
                return SuiteResult(corr_bit=0, n_tests=len(tests), first_failure=i)
        return SuiteResult(corr_bit=1, n_tests=len(tests))
    finally:
        prepared.close()


def _test_passes(outcome: ExecutionOutcome, expected, level: str,
                 cmp: CompareConfig) -> bool:
    if outcome.tag != "Value":
        return False
    if level == LEVEL_PROGRAM:
        return (normalize_program_output(outcome.value, cmp)
                == normalize_program_output(expected, cmp))
    return values_equal(outcome.value, expected, cmp)


def similarity_score(run_log, cmp: CompareConfig | None = None) -> float:
    """Proportion of outcome pairs that agree, over a non-empty run log of
    (input, (original outcome, refactored outcome)) entries."""
    cmp = cmp or CompareConfig()
    run_log = list(run_log)
    if not run_log:
        raise ValueError("similarity over an empty run log is undefined")
    matches = sum(
        1 for _test_input, (out_original, out_refactored) in run_log
        if outcomes_equal(out_original, out_refactored, cmp))
    return matches / len(run_log)
