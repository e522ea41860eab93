#!/usr/bin/env python3
"""Single-shot execution shim for function-level targets.

Invoked as ``python -I target_adapter.py SOURCE_PATH ENTRY_POINT`` with one
JSON request object on standard input, for example ``{"args": [41]}``. The
shim loads the source file, calls the named entry point with the
deserialized arguments, and writes exactly one JSON response line to the
original standard output:

    {"status": "ok", "value": ...}
    {"error_class": "...", "message": "...", "status": "error"}

Exit codes: 0 whenever a response was written (both statuses), 65 when the
source cannot be read, compiled, or loaded or the entry point is missing,
64 when the request itself is malformed. On the nonzero exits no response
is written and the reason goes to standard error.

Before target code runs, the protocol channel is moved to a duplicate of
the original standard-output descriptor and descriptor 1 is pointed at the
null device, so stray prints from the target — including raw writes to
descriptor 1 — cannot corrupt the protocol.

Return values are mapped into the JSON-representable canonical universe by
a total rule: tuples become sequences, sets become sequences sorted by
their canonical rendering, mapping keys are rendered to text and anything
else falls back to its textual representation. Responses use sorted keys,
compact separators and shortest-round-trip floats; non-finite floats ride
the ``NaN``/``Infinity`` literals.

Standard library only. One request per process invocation.
"""

from __future__ import annotations

import json
import os
import sys

EXIT_OK = 0
EXIT_BAD_REQUEST = 64
EXIT_NONEXECUTABLE = 65


def render(value) -> str:
    """Canonical text form: sorted keys, compact, shortest-round-trip floats."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=True)


def convert(value):
    """Total mapping of a return value onto JSON-representable structure.

    The set ordering and key stringification must render exactly like the
    harness's own canonicalization, or verdicts would differ between the
    in-process and subprocess executors on set- or mapping-returning
    targets.
    """
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, (list, tuple)):
        return [convert(item) for item in value]
    if isinstance(value, (set, frozenset)):
        return sorted((convert(item) for item in value), key=render)
    if isinstance(value, dict):
        out = {}
        for key, item in value.items():
            name = key if isinstance(key, str) else render(convert(key))
            out[name] = convert(item)
        return out
    if isinstance(value, (bytes, bytearray)):
        return bytes(value).decode("utf-8", "replace")
    return repr(value)


def _fail(code: int, message: str):
    print(message, file=sys.stderr)
    raise SystemExit(code)


def main(argv) -> int:
    if len(argv) != 2:
        _fail(EXIT_BAD_REQUEST, "usage: target_adapter.py SOURCE_PATH ENTRY_POINT")
    source_path, entry_point = argv

    try:
        with open(source_path, "r", encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        _fail(EXIT_NONEXECUTABLE, f"cannot read source: {exc}")
    try:
        code = compile(source, source_path, "exec")
    except (SyntaxError, ValueError) as exc:
        _fail(EXIT_NONEXECUTABLE, f"{type(exc).__name__}: {exc}")

    raw_request = sys.stdin.buffer.read().decode("utf-8", "replace")
    try:
        request = json.loads(raw_request)
    except json.JSONDecodeError as exc:
        _fail(EXIT_BAD_REQUEST, f"request is not valid JSON: {exc}")
    if not isinstance(request, dict) or not isinstance(request.get("args"), list):
        _fail(EXIT_BAD_REQUEST, "request must be an object with an 'args' list")
    mode = request.get("mode", "function")
    if mode != "function":
        _fail(EXIT_BAD_REQUEST, f"unsupported mode {mode!r}")

    # From here on target code may run: park descriptor 1 on the null
    # device and keep the protocol channel on a private duplicate.
    protocol_fd = os.dup(1)
    null_fd = os.open(os.devnull, os.O_WRONLY)
    os.dup2(null_fd, 1)
    os.close(null_fd)

    namespace = {"__name__": "__target__"}
    try:
        exec(code, namespace)
    except KeyboardInterrupt:
        raise
    except BaseException as exc:
        _fail(EXIT_NONEXECUTABLE, f"{type(exc).__name__}: {exc}")
    entry = namespace.get(entry_point)
    if not callable(entry):
        _fail(EXIT_NONEXECUTABLE, f"entry point {entry_point!r} not found")

    try:
        result = entry(*request["args"])
        response = {"status": "ok", "value": convert(result)}
    except KeyboardInterrupt:
        raise
    except BaseException as exc:
        response = {"status": "error", "error_class": type(exc).__name__,
                    "message": str(exc)}

    sys.stdout.flush()
    os.write(protocol_fd, (render(response) + "\n").encode("utf-8"))
    os.close(protocol_fd)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
