"""Output-equality rules: when do two execution outcomes count as identical.

Equality is type-strict (integer 3 != float 3.0), floats are compared with a
configurable relative/absolute tolerance, and errors compare by class name
only. Program output is normalized before comparison (``trim`` by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .execution import ExecutionOutcome
from .values import CanonicalValue, _NanToken

DEFAULT_FLOAT_REL_TOL = 1e-6
DEFAULT_FLOAT_ABS_TOL = 1e-9


@dataclass(frozen=True)
class CompareConfig:
    float_rel_tol: float = DEFAULT_FLOAT_REL_TOL
    float_abs_tol: float = DEFAULT_FLOAT_ABS_TOL
    program_output_normalization: str = "trim"  # "trim" | "strict"

    def __post_init__(self) -> None:
        if self.float_rel_tol < 0 or self.float_abs_tol < 0:
            raise ValueError("tolerances must be >= 0")
        if self.program_output_normalization not in ("trim", "strict"):
            raise ValueError("normalization must be 'trim' or 'strict'")


def _floats_equal(a: float, b: float, cfg: CompareConfig) -> bool:
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= max(cfg.float_abs_tol,
                             cfg.float_rel_tol * max(abs(a), abs(b)))


def values_equal(a: CanonicalValue, b: CanonicalValue, cfg: CompareConfig) -> bool:
    """Recursive structural equality over canonical values."""
    if isinstance(a, _NanToken) or isinstance(b, _NanToken):
        return isinstance(a, _NanToken) and isinstance(b, _NanToken)
    if a is None or b is None:
        return a is None and b is None
    # bool before int: True must not equal 1
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, float) or isinstance(b, float):
        if not (isinstance(a, float) and isinstance(b, float)):
            return False
        return _floats_equal(a, b, cfg)
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(
            values_equal(x, y, cfg) for x, y in zip(a, b))
    if isinstance(a, dict) and isinstance(b, dict):
        if a.keys() != b.keys():
            return False
        return all(values_equal(a[k], b[k], cfg) for k in a)
    return False


def outcomes_equal(a: ExecutionOutcome, b: ExecutionOutcome, cfg: CompareConfig) -> bool:
    """Eq-style outcome equality; timeouts and non-executables are routed
    by exclusion policy before ever reaching this point."""
    assert a.tag in ("Value", "Error") and b.tag in ("Value", "Error"), \
        "only Value/Error outcomes are comparable"
    if a.tag != b.tag:
        return False
    if a.tag == "Error":
        return a.error_class == b.error_class
    return values_equal(a.value, b.value, cfg)


def normalize_program_output(raw: str, cfg: CompareConfig) -> str:
    """Canonical text for a program's standard output.

    Under ``trim``, line endings are unified to ``\\n``, each line is
    right-stripped and trailing blank lines are dropped; interior whitespace
    is never touched. Under ``strict`` the text is byte-identical.
    """
    if cfg.program_output_normalization == "strict":
        return raw
    text = raw.replace("\r\n", "\n").replace("\r", "\n")
    lines = [line.rstrip() for line in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines)
