"""Run one target on one input under a resource policy.

Three interchangeable executors implement the same outcome contract:

* ``ProcessExecutor`` — the real thing: one subprocess per run, fresh working
  directory, wall-clock timeout, minimal environment. Function-level targets
  go through the stdio adapter protocol; program-level targets are spawned
  directly with the rendered input on stdin.
* ``InProcessExecutor`` — trusted-code engine for tests and fast campaigns;
  same outcome semantics, cooperative tracing-based timeout (Python-level
  loops only), no OS isolation.
* ``TableExecutor`` — a literal input->outcome table for verdict tests.

Harness faults (missing adapter, spawn failure, protocol violations) raise
``HarnessError`` and are never folded into an ``ExecutionOutcome``.
"""

from __future__ import annotations

import io
import json
import os
import re
import shutil
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import HarnessError
from .inputgen import TestInput
from .values import canonicalize, dumps

LEVEL_FUNCTION = "function"
LEVEL_PROGRAM = "program"

# Adapter protocol exit codes (mirrored by the adapter implementation).
EXIT_NONEXECUTABLE = 65   # source failed to parse or load
EXIT_BAD_REQUEST = 64     # malformed request on stdin: harness bug

DEFAULT_TIMEOUT_SECONDS = 5.0
DEFAULT_MAX_OUTPUT_BYTES = 1 << 20


@dataclass(frozen=True)
class ExecutionOutcome:
    tag: str                      # Value | Error | Timeout | NonExecutable
    value: Any = None             # canonical value, tag == Value
    error_class: str | None = None
    message: str | None = None
    wall_time: float = 0.0

    def to_object(self) -> dict:
        out: dict = {"tag": self.tag, "wall_time": round(self.wall_time, 6)}
        if self.tag == "Value":
            out["value"] = self.value
        elif self.tag == "Error":
            out["error_class"] = self.error_class
            out["message"] = self.message
        return out


def value_outcome(value: Any, wall_time: float = 0.0) -> ExecutionOutcome:
    return ExecutionOutcome(tag="Value", value=canonicalize(value), wall_time=wall_time)


def error_outcome(error_class: str, message: str = "",
                  wall_time: float = 0.0) -> ExecutionOutcome:
    return ExecutionOutcome(tag="Error", error_class=error_class, message=message,
                            wall_time=wall_time)


def timeout_outcome(wall_time: float) -> ExecutionOutcome:
    return ExecutionOutcome(tag="Timeout", wall_time=wall_time)


def nonexecutable_outcome(message: str = "", wall_time: float = 0.0) -> ExecutionOutcome:
    return ExecutionOutcome(tag="NonExecutable", message=message, wall_time=wall_time)


@dataclass(frozen=True)
class ExecTarget:
    source: str
    level: str
    entry_point: str | None = None
    runtime_command: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.level not in (LEVEL_FUNCTION, LEVEL_PROGRAM):
            raise ValueError(f"unknown level {self.level!r}")
        if (self.level == LEVEL_FUNCTION) != bool(self.entry_point):
            raise ValueError("entry_point is required exactly for function-level targets")
        if not self.runtime_command:
            object.__setattr__(self, "runtime_command", default_command(self.level))


def default_command(level: str) -> tuple[str, ...]:
    if level == LEVEL_FUNCTION:
        return (sys.executable, "-I", "{adapter}", "{source}", "{entry_point}")
    return (sys.executable, "-I", "{source}")


def function_target(source: str, entry_point: str) -> ExecTarget:
    return ExecTarget(source=source, level=LEVEL_FUNCTION, entry_point=entry_point)


def program_target(source: str) -> ExecTarget:
    return ExecTarget(source=source, level=LEVEL_PROGRAM)


@dataclass(frozen=True)
class ExecPolicy:
    per_run_timeout: float = DEFAULT_TIMEOUT_SECONDS
    max_output_bytes: int = DEFAULT_MAX_OUTPUT_BYTES
    grace: float = 1.0

    def __post_init__(self) -> None:
        if self.per_run_timeout <= 0:
            raise ValueError("per_run_timeout must be > 0")


@dataclass
class PreparedTarget:
    """Handle returned by prepare(); reusable across many run() calls."""

    target: ExecTarget
    failure: ExecutionOutcome | None = None   # NonExecutable discovered at prepare time
    handle: Any = None
    _closer: Callable[[], None] | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.failure is None

    def close(self) -> None:
        if self._closer is not None:
            self._closer()
            self._closer = None

    def __enter__(self) -> "PreparedTarget":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class Executor:
    """Interface shared by the process, in-process and table executors."""

    def prepare(self, target: ExecTarget, policy: ExecPolicy) -> PreparedTarget:
        raise NotImplementedError

    def run(self, prepared: PreparedTarget, test_input: TestInput,
            policy: ExecPolicy) -> ExecutionOutcome:
        raise NotImplementedError


def run_once(executor: Executor, target: ExecTarget, test_input: TestInput,
             policy: ExecPolicy) -> ExecutionOutcome:
    """Prepare-run-close convenience for one-shot executions."""
    prepared = executor.prepare(target, policy)
    if not prepared.ok:
        prepared.close()
        return prepared.failure
    try:
        return executor.run(prepared, test_input, policy)
    finally:
        prepared.close()


def _syntax_check(source: str) -> str | None:
    try:
        compile(source, "<target>", "exec")
        return None
    except SyntaxError as exc:
        return f"{type(exc).__name__}: {exc.msg} (line {exc.lineno})"


_CLASS_LINE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)*)(?::|$)")


def _error_class_from_stderr(stderr: str) -> tuple[str, str]:
    """Best-effort (class, message) from an interpreter traceback."""
    for line in reversed(stderr.splitlines()):
        line = line.strip()
        if not line or line.startswith(("File ", "Traceback", "^")):
            continue
        match = _CLASS_LINE.match(line)
        if match:
            return match.group(1).split(".")[-1], line
        break
    return "NonZeroExit", stderr.strip().splitlines()[-1] if stderr.strip() else ""


class ProcessExecutor(Executor):
    """Subprocess-per-run executor with filesystem isolation.

    The syntax pre-check assumes targets are written in the harness's own
    runtime language, which holds for the corpora in scope.
    """

    def __init__(self, adapter_path: str | None = None):
        self.adapter_path = adapter_path

    def prepare(self, target: ExecTarget, policy: ExecPolicy) -> PreparedTarget:
        syntax_error = _syntax_check(target.source)
        if syntax_error is not None:
            return PreparedTarget(target=target,
                                  failure=nonexecutable_outcome(syntax_error))
        root = tempfile.mkdtemp(prefix="difffuzz-")
        source_path = os.path.join(root, "target.py")
        with open(source_path, "w", encoding="utf-8") as fh:
            fh.write(target.source)
        try:
            cmd = self._build_command(target, source_path)
        except HarnessError:
            shutil.rmtree(root, ignore_errors=True)
            raise
        handle = {"cmd": cmd, "root": root}
        return PreparedTarget(target=target, handle=handle,
                              _closer=lambda: shutil.rmtree(root, ignore_errors=True))

    def _build_command(self, target: ExecTarget, source_path: str) -> list[str]:
        cmd = []
        for part in target.runtime_command:
            if "{adapter}" in part:
                if not self.adapter_path:
                    raise HarnessError(
                        "function-level process execution needs an adapter; none configured")
                part = part.replace("{adapter}", self.adapter_path)
            part = part.replace("{source}", source_path)
            part = part.replace("{entry_point}", target.entry_point or "")
            cmd.append(part)
        return cmd

    def run(self, prepared: PreparedTarget, test_input: TestInput,
            policy: ExecPolicy) -> ExecutionOutcome:
        assert prepared.ok, "run() on a NonExecutable prepared target"
        handle = prepared.handle
        run_dir = tempfile.mkdtemp(prefix="run-", dir=handle["root"])
        env = {
            "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
            "HOME": run_dir,
            "TMPDIR": run_dir,
            "PYTHONDONTWRITEBYTECODE": "1",
            "PYTHONIOENCODING": "utf-8",
        }
        if prepared.target.level == LEVEL_FUNCTION:
            stdin_text = dumps({"args": [canonicalize(v) for v in test_input.values]})
        else:
            stdin_text = test_input.rendered or ""
        started = time.monotonic()
        try:
            proc = subprocess.Popen(
                handle["cmd"], cwd=run_dir, env=env,
                stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        except OSError as exc:
            shutil.rmtree(run_dir, ignore_errors=True)
            raise HarnessError(f"spawn failed: {exc}") from exc
        try:
            try:
                out, err = proc.communicate(stdin_text.encode("utf-8"),
                                            timeout=policy.per_run_timeout)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.communicate()
                return timeout_outcome(time.monotonic() - started)
            wall = time.monotonic() - started
            stdout = out.decode("utf-8", "replace")
            stderr = err.decode("utf-8", "replace")
            if prepared.target.level == LEVEL_FUNCTION:
                return self._function_outcome(proc.returncode, out, stdout, stderr,
                                              policy, wall)
            return self._program_outcome(proc.returncode, out, stdout, stderr,
                                         policy, wall)
        finally:
            shutil.rmtree(run_dir, ignore_errors=True)

    def _function_outcome(self, returncode: int, raw: bytes, stdout: str, stderr: str,
                          policy: ExecPolicy, wall: float) -> ExecutionOutcome:
        if returncode == EXIT_NONEXECUTABLE:
            return nonexecutable_outcome(stderr.strip()[-500:], wall)
        if returncode != 0:
            raise HarnessError(
                f"adapter exited {returncode}: {stderr.strip()[-500:]}")
        if len(raw) > policy.max_output_bytes:
            return error_outcome("OutputOverflow",
                                 f"adapter response exceeded {policy.max_output_bytes} bytes",
                                 wall)
        try:
            response = json.loads(stdout)
            status = response["status"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise HarnessError(f"malformed adapter response: {exc}") from exc
        if status == "ok":
            return ExecutionOutcome(tag="Value", value=canonicalize(response.get("value")),
                                    wall_time=wall)
        if status == "error":
            return error_outcome(str(response.get("error_class", "Exception")),
                                 str(response.get("message", "")), wall)
        raise HarnessError(f"unknown adapter status {status!r}")

    def _program_outcome(self, returncode: int, raw: bytes, stdout: str, stderr: str,
                         policy: ExecPolicy, wall: float) -> ExecutionOutcome:
        if returncode == 0:
            if len(raw) > policy.max_output_bytes:
                return error_outcome("OutputOverflow",
                                     f"stdout exceeded {policy.max_output_bytes} bytes",
                                     wall)
            return ExecutionOutcome(tag="Value", value=stdout, wall_time=wall)
        error_class, message = _error_class_from_stderr(stderr)
        return error_outcome(error_class, message[:500], wall)


class _Deadline(BaseException):
    """Raised inside target code by the tracing watchdog; not an Exception so
    target-level ``except Exception`` cannot swallow it."""


class _cancel_traces:
    """Installs a per-thread trace that aborts target code past a deadline."""

    def __init__(self, timeout: float):
        self.deadline = time.monotonic() + timeout
        self.previous = None

    def _local(self, frame, event, arg):
        if time.monotonic() > self.deadline:
            raise _Deadline()
        return self._local

    def _global(self, frame, event, arg):
        if time.monotonic() > self.deadline:
            raise _Deadline()
        return self._local

    def __enter__(self) -> None:
        self.previous = sys.gettrace()
        sys.settrace(self._global)

    def __exit__(self, *exc) -> None:
        sys.settrace(self.previous)


class InProcessExecutor(Executor):
    """Same-process executor for trusted sources.

    Runs are serialized behind a lock because program-level execution swaps
    the process-global standard streams. The watchdog can only interrupt
    Python-level loops; sources that block inside C calls need the process
    executor. Worth noting for fixtures: a timed-out run leaves no stray
    thread behind, the deadline fires inside the target itself.
    """

    def __init__(self):
        self._lock = threading.Lock()

    def prepare(self, target: ExecTarget, policy: ExecPolicy) -> PreparedTarget:
        syntax_error = _syntax_check(target.source)
        if syntax_error is not None:
            return PreparedTarget(target=target,
                                  failure=nonexecutable_outcome(syntax_error))
        code = compile(target.source, "<target>", "exec")
        return PreparedTarget(target=target, handle=code)

    def run(self, prepared: PreparedTarget, test_input: TestInput,
            policy: ExecPolicy) -> ExecutionOutcome:
        assert prepared.ok, "run() on a NonExecutable prepared target"
        with self._lock:
            if prepared.target.level == LEVEL_FUNCTION:
                return self._run_function(prepared, test_input, policy)
            return self._run_program(prepared, test_input, policy)

    def _run_function(self, prepared: PreparedTarget, test_input: TestInput,
                      policy: ExecPolicy) -> ExecutionOutcome:
        args = [canonicalize(v) for v in test_input.values]
        namespace: dict = {"__name__": "__difffuzz_target__"}
        started = time.monotonic()
        capture = io.StringIO()
        saved_out, saved_err = sys.stdout, sys.stderr
        sys.stdout = sys.stderr = capture
        try:
            with _cancel_traces(policy.per_run_timeout):
                try:
                    exec(prepared.handle, namespace)
                except _Deadline:
                    raise
                except BaseException as exc:
                    if isinstance(exc, KeyboardInterrupt):
                        raise
                    return nonexecutable_outcome(
                        f"{type(exc).__name__}: {exc}", time.monotonic() - started)
                entry = namespace.get(prepared.target.entry_point)
                if not callable(entry):
                    return nonexecutable_outcome(
                        f"entry point {prepared.target.entry_point!r} not found",
                        time.monotonic() - started)
                try:
                    result = entry(*args)
                except _Deadline:
                    raise
                except KeyboardInterrupt:
                    raise
                except BaseException as exc:
                    return error_outcome(type(exc).__name__, str(exc),
                                         time.monotonic() - started)
        except _Deadline:
            return timeout_outcome(time.monotonic() - started)
        finally:
            sys.stdout, sys.stderr = saved_out, saved_err
        wall = time.monotonic() - started
        value = canonicalize(result)
        if len(dumps(value).encode("utf-8")) > policy.max_output_bytes:
            return error_outcome("OutputOverflow",
                                 f"result exceeded {policy.max_output_bytes} bytes", wall)
        return ExecutionOutcome(tag="Value", value=value, wall_time=wall)

    def _run_program(self, prepared: PreparedTarget, test_input: TestInput,
                     policy: ExecPolicy) -> ExecutionOutcome:
        namespace: dict = {"__name__": "__main__"}
        out_buffer = io.StringIO()
        err_buffer = io.StringIO()
        saved = sys.stdin, sys.stdout, sys.stderr
        sys.stdin = io.StringIO(test_input.rendered or "")
        sys.stdout, sys.stderr = out_buffer, err_buffer
        started = time.monotonic()
        try:
            with _cancel_traces(policy.per_run_timeout):
                try:
                    exec(prepared.handle, namespace)
                except _Deadline:
                    raise
                except SystemExit as exc:
                    if exc.code not in (None, 0):
                        return error_outcome("NonZeroExit", str(exc.code),
                                             time.monotonic() - started)
                except KeyboardInterrupt:
                    raise
                except BaseException as exc:
                    return error_outcome(type(exc).__name__, str(exc),
                                         time.monotonic() - started)
        except _Deadline:
            return timeout_outcome(time.monotonic() - started)
        finally:
            sys.stdin, sys.stdout, sys.stderr = saved
        wall = time.monotonic() - started
        stdout = out_buffer.getvalue()
        if len(stdout.encode("utf-8")) > policy.max_output_bytes:
            return error_outcome("OutputOverflow",
                                 f"stdout exceeded {policy.max_output_bytes} bytes", wall)
        return ExecutionOutcome(tag="Value", value=stdout, wall_time=wall)


class TableExecutor(Executor):
    """Fake executor answering from a per-target table keyed by input values."""

    def __init__(self):
        self._tables: dict[ExecTarget, dict[str, ExecutionOutcome]] = {}
        self._nonexecutable: set[ExecTarget] = set()

    @staticmethod
    def key_for(test_input: TestInput) -> str:
        return dumps(canonicalize(list(test_input.values)))

    def set_outcome(self, target: ExecTarget, values, outcome: ExecutionOutcome) -> None:
        key = dumps(canonicalize(list(values)))
        self._tables.setdefault(target, {})[key] = outcome

    def set_nonexecutable(self, target: ExecTarget) -> None:
        self._nonexecutable.add(target)

    def prepare(self, target: ExecTarget, policy: ExecPolicy) -> PreparedTarget:
        if target in self._nonexecutable:
            return PreparedTarget(target=target,
                                  failure=nonexecutable_outcome("tabled as non-executable"))
        return PreparedTarget(target=target, handle=self._tables.get(target, {}))

    def run(self, prepared: PreparedTarget, test_input: TestInput,
            policy: ExecPolicy) -> ExecutionOutcome:
        key = self.key_for(test_input)
        try:
            return prepared.handle[key]
        except KeyError as exc:
            raise HarnessError(f"no tabled outcome for input {key}") from exc
