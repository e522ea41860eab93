"""Command-line client for the equivalence service.

Every subcommand except ``serve`` talks to the HTTP surface: by default an
in-process application instance (no daemon needed), or a remote one when
``--server`` is given. Exit codes for ``check``: 0 equivalent, 1 not
equivalent, 2 excluded, 3 harness error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

from .campaign import read_report
from .corpus import load_corpus, load_refactorings, problem_to_object

EXIT_EQUIVALENT = 0
EXIT_NON_EQUIVALENT = 1
EXIT_EXCLUDED = 2
EXIT_HARNESS_ERROR = 3


class ServiceClient:
    """Sync client over either a remote base URL or an in-process app."""

    def __init__(self, server: str | None = None, adapter_path: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app
            self._client = TestClient(create_app(adapter_path=adapter_path),
                                      raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> httpx.Response:
        return self._client.post(path, json=payload)

    def close(self) -> None:
        self._client.close()


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _fail_for(response: httpx.Response) -> int:
    try:
        detail = response.json()
    except ValueError:
        detail = {"message": response.text}
    message = detail.get("message") or detail.get("detail") or response.text
    print(f"error ({response.status_code}): {message}", file=sys.stderr)
    return EXIT_HARNESS_ERROR


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(adapter_path=args.adapter), host=args.host, port=args.port)
    return 0


def _cmd_gen_inputs(args) -> int:
    client = ServiceClient(args.server, adapter_path=args.adapter)
    try:
        payload = {
            "schema": _load_json(args.schema),
            "seed": args.seed,
            "level": args.level,
            "problem_id": args.problem_id,
        }
        if args.n is not None:
            payload["n"] = args.n
        response = client.post("/inputs/generate", payload)
        if response.status_code != 200:
            return _fail_for(response)
        body = response.json()
        out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8")
        try:
            for item in body["inputs"]:
                out.write(json.dumps(item, ensure_ascii=False))
                out.write("\n")
        finally:
            if out is not sys.stdout:
                out.close()
        return 0
    finally:
        client.close()


def _cmd_check(args) -> int:
    client = ServiceClient(args.server, adapter_path=args.adapter)
    try:
        payload = {
            "original": _read_text(args.original),
            "refactored": _read_text(args.refactored),
            "schema": _load_json(args.schema),
            "level": args.level,
            "entry_point": args.entry_point,
            "seed": args.seed,
            "mode": args.mode,
            "problem_id": args.problem_id,
            "per_run_timeout": args.timeout,
            "float_rel_tol": args.float_rel_tol,
            "float_abs_tol": args.float_abs_tol,
            "normalization": args.normalization,
            "executor": args.executor,
        }
        if args.n is not None:
            payload["n"] = args.n
        response = client.post("/check", payload)
        if response.status_code != 200:
            return _fail_for(response)
        verdict = response.json()
        print(json.dumps(verdict, ensure_ascii=False, sort_keys=True))
        status = verdict["status"]
        if status == "Equivalent":
            return EXIT_EQUIVALENT
        if status == "NonEquivalent":
            return EXIT_NON_EQUIVALENT
        return EXIT_EXCLUDED
    finally:
        client.close()


def _cmd_campaign(args) -> int:
    problems: list[dict] = []
    seen: set[str] = set()
    for corpus_path in args.corpus:
        for problem in load_corpus(corpus_path):
            if problem.problem_id in seen:
                print(f"error: duplicate problem_id {problem.problem_id!r}"
                      f" across corpus files", file=sys.stderr)
                return EXIT_HARNESS_ERROR
            seen.add(problem.problem_id)
            problems.append(problem_to_object(problem))
    refactorings = [
        {"problem_id": r.problem_id, "model": r.model,
         "refactor_type": r.refactor_type, "source": r.source, "origin": r.origin}
        for r in load_refactorings(args.refactorings)]
    payload = {
        "problems": problems,
        "refactorings": refactorings,
        "seed": args.seed,
        "max_workers": args.workers,
        "per_run_timeout": args.timeout,
        "executor": args.executor,
    }
    if args.n_function is not None:
        payload["n_function"] = args.n_function
    if args.n_program is not None:
        payload["n_program"] = args.n_program
    client = ServiceClient(args.server, adapter_path=args.adapter)
    try:
        response = client.post("/campaigns", payload)
        if response.status_code != 200:
            return _fail_for(response)
        report = response.json()["report"]
        os.makedirs(args.out_dir, exist_ok=True)
        report_path = os.path.join(args.out_dir, "report.json")
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, sort_keys=True, indent=2,
                                ensure_ascii=False) + "\n")
        rendered = client.post("/reports/render", {"report": report, "format": "text"})
        if rendered.status_code == 200:
            sys.stdout.write(rendered.json()["files"]["report.txt"])
        print(f"report written to {report_path}")
        if report.get("failures"):
            print(f"{len(report['failures'])} cell(s) failed with harness errors",
                  file=sys.stderr)
            return EXIT_HARNESS_ERROR
        return 0
    finally:
        client.close()


def _cmd_report(args) -> int:
    report = read_report(args.report)
    client = ServiceClient(args.server, adapter_path=args.adapter)
    try:
        response = client.post("/reports/render",
                               {"report": report.to_object(), "format": args.format})
        if response.status_code != 200:
            return _fail_for(response)
        files = response.json()["files"]
        if args.out_dir is None:
            for name in sorted(files):
                sys.stdout.write(files[name])
            return 0
        os.makedirs(args.out_dir, exist_ok=True)
        for name in sorted(files):
            path = os.path.join(args.out_dir, name)
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(files[name])
            print(f"wrote {path}")
        return 0
    finally:
        client.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="difffuzz",
        description="differential-fuzzing equivalence checks for refactored code")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs in-process")
    parser.add_argument("--adapter", default=os.environ.get("DIFFFUZZ_ADAPTER"),
                        help="path to the function-call adapter used by the"
                             " process executor")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("gen-inputs", help="generate constraint-respecting inputs")
    p.add_argument("--schema", required=True, help="JSON schema file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--level", choices=["function", "program"], default="function")
    p.add_argument("--problem-id", default="")
    p.add_argument("--out", default="-", help="output file, - for stdout")
    p.set_defaults(func=_cmd_gen_inputs)

    p = sub.add_parser("check", help="decide equivalence of one pair")
    p.add_argument("--original", required=True, help="path to the reference source")
    p.add_argument("--refactored", required=True, help="path to the candidate source")
    p.add_argument("--schema", required=True, help="JSON schema file")
    p.add_argument("--level", choices=["function", "program"], default="function")
    p.add_argument("--entry-point", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--mode", choices=["early_exit", "full_scan"],
                   default="early_exit")
    p.add_argument("--problem-id", default="")
    p.add_argument("--timeout", type=float, default=5.0)
    p.add_argument("--float-rel-tol", type=float, default=1e-6)
    p.add_argument("--float-abs-tol", type=float, default=1e-9)
    p.add_argument("--normalization", choices=["trim", "strict"], default="trim")
    p.add_argument("--executor", choices=["inprocess", "process"],
                   default="inprocess")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("campaign", help="evaluate a refactoring corpus end to end")
    p.add_argument("--corpus", action="append", required=True,
                   help="problems JSONL file (repeatable)")
    p.add_argument("--refactorings", required=True, help="refactorings JSONL file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-function", type=int, default=None)
    p.add_argument("--n-program", type=int, default=None)
    p.add_argument("--timeout", type=float, default=5.0)
    p.add_argument("--executor", choices=["inprocess", "process"],
                   default="inprocess")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_campaign)

    p = sub.add_parser("report", help="render a structured report")
    p.add_argument("--report", required=True, help="report.json path")
    p.add_argument("--format", choices=["csv", "text"], default="text")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARNESS_ERROR
    except Exception as exc:  # surfaced as exit 3 per the check contract
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_HARNESS_ERROR


if __name__ == "__main__":
    sys.exit(main())
