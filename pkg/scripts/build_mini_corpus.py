"""Regenerates the bundled mini-corpus and brute-force-checks its ground truth.

The mini-corpus is a hand-authored 10-problem, 20-refactoring fixture with
known verdicts: 5 non-equivalent refactorings (3 of which pass their
deliberately weak test suites), 1 infinite-loop refactoring that must be
excluded as a timeout, and 14 equivalent rewrites. Run from the repo root:

    python3 scripts/build_mini_corpus.py
"""

from __future__ import annotations

import itertools
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from difffuzz.corpus import (ProblemRecord, RefactoringRecord, TestCase,
                             parse_problem, problem_to_object, write_corpus,
                             write_refactorings)
from difffuzz.schema import parse_schema

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "difffuzz",
                       "data", "mini")


def problem(problem_id, dataset, level, source, schema, tests,
            entry_point=None, description=""):
    return ProblemRecord(
        problem_id=problem_id, dataset=dataset, level=level, source=source,
        schema=parse_schema(
            schema,
            default_mode="text_stream" if level == "program" else "argument_vector"),
        tests=tuple(tests), entry_point=entry_point, description=description)


def ft(args, expected):
    return TestCase(expected=expected, args=tuple(args))


def pt(stdin, expected_stdout):
    return TestCase(expected=expected_stdout, stdin=stdin)


PROBLEMS = [
    problem(
        "p01", "minifunc", "function",
        "def abs_value(x):\n"
        "    if x < 0:\n"
        "        return -x\n"
        "    return x\n",
        {"params": [{"name": "x", "kind": "int", "bounds": [-100, 100]}]},
        [ft([3], 3), ft([0], 0)],
        entry_point="abs_value",
        description="absolute value; the test suite only probes x >= 0"),
    problem(
        "p02", "minifunc", "function",
        "def sum_to(n):\n"
        "    total = 0\n"
        "    for i in range(n + 1):\n"
        "        total += i\n"
        "    return total\n",
        {"params": [{"name": "n", "kind": "int", "bounds": [0, 50]}]},
        [ft([0], 0), ft([3], 6)],
        entry_point="sum_to",
        description="sum of 0..n inclusive"),
    problem(
        "p03", "minifunc", "function",
        "def clamp(value, lo, hi):\n"
        "    if value < lo:\n"
        "        return lo\n"
        "    if value > hi:\n"
        "        return hi\n"
        "    return value\n",
        {"params": [
            {"name": "value", "kind": "int", "bounds": [-50, 50]},
            {"name": "lo", "kind": "int", "bounds": [-50, 50]},
            {"name": "hi", "kind": "int", "bounds": [-50, 50]}],
         "relations": ["lo <= hi"]},
        [ft([5, 0, 10], 5), ft([-7, 0, 10], 0), ft([99, 0, 10], 10)],
        entry_point="clamp",
        description="clamp into [lo, hi]; relational constraint lo <= hi"),
    problem(
        "p04", "minifunc", "function",
        "def mean(values):\n"
        "    if not values:\n"
        "        return 0.0\n"
        "    total = 0.0\n"
        "    for v in values:\n"
        "        total += v\n"
        "    return total / len(values)\n",
        {"params": [{"name": "values", "kind": "list", "length": [0, 8],
                     "element": {"kind": "float", "bounds": [-100, 100]}}]},
        [ft([[]], 0.0), ft([[2.0, 4.0]], 3.0)],
        entry_point="mean",
        description="arithmetic mean, empty list maps to 0.0"),
    problem(
        "p05", "minifunc", "function",
        "def count_vowels(s):\n"
        "    count = 0\n"
        "    for ch in s:\n"
        "        if ch in \"aeiou\":\n"
        "            count += 1\n"
        "    return count\n",
        {"params": [{"name": "s", "kind": "string", "length": [0, 12],
                     "charset": "lowercase"}]},
        [ft(["abc"], 1), ft([""], 0)],
        entry_point="count_vowels",
        description="vowel counting; the suite never exercises the letter u"),
    problem(
        "p06", "minifunc", "function",
        "def max_or_default(values, default):\n"
        "    if not values:\n"
        "        return default\n"
        "    best = values[0]\n"
        "    for v in values[1:]:\n"
        "        if v > best:\n"
        "            best = v\n"
        "    return best\n",
        {"params": [
            {"name": "values", "kind": "list", "length": [0, 6],
             "element": {"kind": "int", "bounds": [-50, 50]}},
            {"name": "default", "kind": "int", "bounds": [-50, 50]}]},
        [ft([[1, 5, 2], 0], 5), ft([[], 9], 9)],
        entry_point="max_or_default",
        description="max with fallback for the empty list"),
    problem(
        "p07", "minifunc", "function",
        "def is_sorted(values):\n"
        "    for i in range(len(values) - 1):\n"
        "        if values[i] > values[i + 1]:\n"
        "            return False\n"
        "    return True\n",
        {"params": [{"name": "values", "kind": "list", "length": [0, 6],
                     "element": {"kind": "int", "bounds": [-20, 20]}}]},
        [ft([[1, 2, 2]], True), ft([[3, 1]], False)],
        entry_point="is_sorted",
        description="non-decreasing order predicate"),
    problem(
        "p08", "miniprog", "program",
        "a = int(input())\n"
        "b = int(input())\n"
        "print(a + b)\n",
        {"params": [
            {"name": "a", "kind": "int", "bounds": [-100, 100]},
            {"name": "b", "kind": "int", "bounds": [-100, 100]}]},
        [pt("1\n2\n", "3\n"), pt("-5\n5\n", "0\n")],
        description="sum of two integers read from standard input"),
    problem(
        "p09", "miniprog", "program",
        "x = int(input())\n"
        "y = int(input())\n"
        "z = int(input())\n"
        "m = x\n"
        "if y > m:\n"
        "    m = y\n"
        "if z > m:\n"
        "    m = z\n"
        "print(m)\n",
        {"params": [
            {"name": "x", "kind": "int", "bounds": [-20, 20]},
            {"name": "y", "kind": "int", "bounds": [-20, 20]},
            {"name": "z", "kind": "int", "bounds": [-20, 20]}]},
        [pt("1\n2\n3\n", "3\n"), pt("5\n4\n0\n", "5\n")],
        description="maximum of three; the suite misses the x-max, z-mid case"),
    problem(
        "p10", "miniprog", "program",
        "n = int(input())\n"
        "k = int(input())\n"
        "print(n // k)\n",
        {"params": [
            {"name": "n", "kind": "int", "bounds": [1, 100]},
            {"name": "k", "kind": "int", "bounds": [1, 10]}],
         "relations": ["k <= n"]},
        [pt("10\n3\n", "3\n"), pt("9\n9\n", "1\n")],
        description="integer division with a relational constraint"),
]


def refactoring(problem_id, refactor_type, source):
    return RefactoringRecord(problem_id=problem_id, model="mock-model",
                             refactor_type=refactor_type, source=source)


REFACTORINGS = [
    # p01: simplification is honest, optimization drops the negative branch
    # yet passes the weak non-negative-only suite (divergence case 1).
    refactoring("p01", "simplification",
                "def abs_value(x):\n    return abs(x)\n"),
    refactoring("p01", "optimization",
                "def abs_value(x):\n    return x\n"),
    # p02: closed form is right, the "simpler" sum drops the endpoint and
    # fails its suite.
    refactoring("p02", "simplification",
                "def sum_to(n):\n    return sum(range(n))\n"),
    refactoring("p02", "optimization",
                "def sum_to(n):\n    return n * (n + 1) // 2\n"),
    # p03: both rewrites are equivalent under lo <= hi.
    refactoring("p03", "simplification",
                "def clamp(value, lo, hi):\n"
                "    return min(max(value, lo), hi)\n"),
    refactoring("p03", "optimization",
                "def clamp(value, lo, hi):\n"
                "    return max(lo, min(value, hi))\n"),
    # p04: fsum stays within float tolerance; dropping the empty-list guard
    # diverges (ZeroDivisionError vs 0.0) and fails the suite.
    refactoring("p04", "simplification",
                "def mean(values):\n"
                "    return sum(values) / len(values)\n"),
    refactoring("p04", "optimization",
                "import math\n\n"
                "def mean(values):\n"
                "    if not values:\n"
                "        return 0.0\n"
                "    return math.fsum(values) / len(values)\n"),
    # p05: bool-sum is equivalent; the u-less rewrite passes the weak suite
    # (divergence case 2).
    refactoring("p05", "simplification",
                "def count_vowels(s):\n"
                "    return sum(ch in \"aeiou\" for ch in s)\n"),
    refactoring("p05", "optimization",
                "def count_vowels(s):\n"
                "    count = 0\n"
                "    for ch in s:\n"
                "        if ch in \"aeio\":\n"
                "            count += 1\n"
                "    return count\n"),
    # p06: the model declined to simplify (verbatim copy) and optimized with
    # the builtin; both equivalent.
    refactoring("p06", "simplification",
                "def max_or_default(values, default):\n"
                "    if not values:\n"
                "        return default\n"
                "    best = values[0]\n"
                "    for v in values[1:]:\n"
                "        if v > best:\n"
                "            best = v\n"
                "    return best\n"),
    refactoring("p06", "optimization",
                "def max_or_default(values, default):\n"
                "    return max(values, default=default)\n"),
    # p07: generator-expression and sort-comparison forms, both equivalent.
    refactoring("p07", "simplification",
                "def is_sorted(values):\n"
                "    return all(a <= b for a, b in zip(values, values[1:]))\n"),
    refactoring("p07", "optimization",
                "def is_sorted(values):\n"
                "    return values == sorted(values)\n"),
    # p08: one-liner and bulk-read forms, both equivalent.
    refactoring("p08", "simplification",
                "print(int(input()) + int(input()))\n"),
    refactoring("p08", "optimization",
                "import sys\n"
                "data = sys.stdin.read().split()\n"
                "print(int(data[0]) + int(data[1]))\n"),
    # p09: max() is equivalent; the mutant compares z against y instead of the
    # running maximum and still passes the weak suite (divergence case 3).
    refactoring("p09", "simplification",
                "x = int(input())\n"
                "y = int(input())\n"
                "z = int(input())\n"
                "print(max(x, y, z))\n"),
    refactoring("p09", "optimization",
                "x = int(input())\n"
                "y = int(input())\n"
                "z = int(input())\n"
                "m = x\n"
                "if y > m:\n"
                "    m = y\n"
                "if z > y:\n"
                "    m = z\n"
                "print(m)\n"),
    # p10: verbatim copy is equivalent; the "optimization" spins forever and
    # must be excluded as a timeout.
    refactoring("p10", "simplification",
                "n = int(input())\n"
                "k = int(input())\n"
                "print(n // k)\n"),
    refactoring("p10", "optimization",
                "import time\n"
                "while True:\n"
                "    time.sleep(0.05)\n"),
]

# Brute-force ground truth, independent of the harness's verdict machinery.

EXPECTED_EQ = {
    ("p01", "simplification"): 1, ("p01", "optimization"): 0,
    ("p02", "simplification"): 0, ("p02", "optimization"): 1,
    ("p03", "simplification"): 1, ("p03", "optimization"): 1,
    ("p04", "simplification"): 0, ("p04", "optimization"): 1,
    ("p05", "simplification"): 1, ("p05", "optimization"): 0,
    ("p06", "simplification"): 1, ("p06", "optimization"): 1,
    ("p07", "simplification"): 1, ("p07", "optimization"): 1,
    ("p08", "simplification"): 1, ("p08", "optimization"): 1,
    ("p09", "simplification"): 1, ("p09", "optimization"): 0,
    ("p10", "simplification"): 1, ("p10", "optimization"): None,  # timeout
}

EXPECTED_CORR = {
    # suite pass/fail for every refactoring, by direct execution
    ("p01", "simplification"): 1, ("p01", "optimization"): 1,   # divergence
    ("p02", "simplification"): 0, ("p02", "optimization"): 1,
    ("p03", "simplification"): 1, ("p03", "optimization"): 1,
    ("p04", "simplification"): 0, ("p04", "optimization"): 1,
    ("p05", "simplification"): 1, ("p05", "optimization"): 1,   # divergence
    ("p06", "simplification"): 1, ("p06", "optimization"): 1,
    ("p07", "simplification"): 1, ("p07", "optimization"): 1,
    ("p08", "simplification"): 1, ("p08", "optimization"): 1,
    ("p09", "simplification"): 1, ("p09", "optimization"): 1,   # divergence
    ("p10", "simplification"): 1, ("p10", "optimization"): None,  # hangs
}


def call_function(source, entry_point, args):
    namespace = {}
    exec(source, namespace)
    try:
        return ("value", namespace[entry_point](*[
            list(a) if isinstance(a, tuple) else a for a in args]))
    except Exception as exc:
        return ("error", type(exc).__name__)


def run_program(source, stdin_text):
    import io
    saved = sys.stdin, sys.stdout
    sys.stdin = io.StringIO(stdin_text)
    sys.stdout = io.StringIO()
    try:
        try:
            exec(source, {"__name__": "__main__"})
            return ("value", sys.stdout.getvalue())
        except Exception as exc:
            return ("error", type(exc).__name__)
    finally:
        sys.stdin, sys.stdout = saved


def enumerate_domain(prob: ProblemRecord):
    """Exhaustive argument vectors for the small fixture domains."""
    axes = []
    for spec in prob.schema.params:
        if spec.kind == "int":
            lo, hi = spec.bounds
            axes.append([int(v) for v in range(int(lo), int(hi) + 1)])
        elif spec.kind == "string":
            from difffuzz.schema import resolve_charset
            chars = resolve_charset(spec.charset)
            mn, mx = spec.length
            out = []
            for k in range(mn, mx + 1):
                if len(chars) ** k > 20000:
                    break
                out.extend("".join(p) for p in itertools.product(chars, repeat=k))
            axes.append(out)
        elif spec.kind == "list" and spec.element.kind in ("int", "float"):
            lo, hi = spec.element.bounds
            pool = list(range(int(lo), int(hi) + 1)) if spec.element.kind == "int" \
                else [float(lo), 0.0, float(hi), 1.5]
            mn, mx = spec.length
            out = []
            for k in range(mn, min(mx, 3) + 1):
                out.extend(list(p) for p in itertools.product(pool[:7], repeat=k))
            axes.append(out)
        elif spec.kind == "float":
            lo, hi = spec.bounds
            axes.append([float(lo), -1.0, 0.0, 1.0, float(hi)])
        else:
            raise NotImplementedError(spec.kind)
    from difffuzz.schema import satisfies
    for combo in itertools.product(*axes):
        if satisfies(prob.schema, combo):
            yield combo


def verify():
    by_id = {p.problem_id: p for p in PROBLEMS}
    failures = []
    for record in REFACTORINGS:
        prob = by_id[record.problem_id]
        key = (record.problem_id, record.refactor_type)
        expected_eq = EXPECTED_EQ[key]
        if expected_eq is None:
            continue  # the hang case cannot be brute-forced
        mismatch = None
        checked = 0
        for combo in enumerate_domain(prob):
            checked += 1
            if checked > 25000:
                break
            if prob.level == "function":
                a = call_function(prob.source, prob.entry_point, combo)
                b = call_function(record.source, prob.entry_point, combo)
                if a[0] == "value" and b[0] == "value" \
                        and isinstance(a[1], float) and isinstance(b[1], float):
                    same = abs(a[1] - b[1]) <= max(1e-9, 1e-6 * max(abs(a[1]),
                                                                    abs(b[1])))
                    same = same and type(a[1]) is type(b[1])
                else:
                    same = a == b and (a[0] == "error"
                                       or type(a[1]) is type(b[1]))
            else:
                stdin_text = "".join(f"{v}\n" for v in combo)
                a = run_program(prob.source, stdin_text)
                b = run_program(record.source, stdin_text)
                same = a == b
            if not same:
                mismatch = combo
                break
        actual_eq = 0 if mismatch is not None else 1
        tag = "ok" if actual_eq == expected_eq else "WRONG"
        if tag == "WRONG":
            failures.append((key, expected_eq, actual_eq, mismatch))
        print(f"{key}: brute-force eq={actual_eq} over {checked} points "
              f"(expected {expected_eq}) [{tag}]"
              + (f" witness={mismatch}" if mismatch is not None
                 and expected_eq == 1 else ""))
    # suite ground truth by direct execution
    for record in REFACTORINGS:
        prob = by_id[record.problem_id]
        key = (record.problem_id, record.refactor_type)
        expected_corr = EXPECTED_CORR[key]
        if expected_corr is None:
            continue
        corr = 1
        for case in prob.tests:
            if prob.level == "function":
                outcome = call_function(record.source, prob.entry_point, case.args)
                ok = outcome[0] == "value" and outcome[1] == case.expected \
                    and type(outcome[1]) is type(case.expected)
            else:
                outcome = run_program(record.source, case.stdin)
                ok = outcome[0] == "value" \
                    and outcome[1].rstrip("\n") == case.expected.rstrip("\n")
            if not ok:
                corr = 0
                break
        tag = "ok" if corr == expected_corr else "WRONG"
        if tag == "WRONG":
            failures.append((key, "corr", expected_corr, corr))
        print(f"{key}: suite corr={corr} (expected {expected_corr}) [{tag}]")
    if failures:
        raise SystemExit(f"ground truth mismatches: {failures}")

    noneq = [k for k, v in EXPECTED_EQ.items() if v == 0]
    divergent = [k for k in noneq if EXPECTED_CORR[k] == 1]
    print(f"\nsummary: {len(REFACTORINGS)} refactorings, "
          f"{len(noneq)} non-equivalent, {len(divergent)} divergent "
          f"(pass suite yet non-equivalent), 1 timeout exclusion")


def main():
    verify()
    os.makedirs(OUT_DIR, exist_ok=True)
    problems_path = os.path.join(OUT_DIR, "problems.jsonl")
    refactorings_path = os.path.join(OUT_DIR, "refactorings.jsonl")
    write_corpus(problems_path, PROBLEMS)
    write_refactorings(refactorings_path, REFACTORINGS)
    # sanity: the written form parses back identically
    for prob in PROBLEMS:
        assert parse_problem(problem_to_object(prob)) == prob
    print(f"wrote {problems_path} and {refactorings_path}")


if __name__ == "__main__":
    main()
