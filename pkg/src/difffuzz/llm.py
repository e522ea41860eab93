"""Candidate-refactoring acquisition.

Two instruction prompts (performance optimization, code simplification) are
rendered around the original source and sent to a chat-completions endpoint;
responses are sanitized down to compilable source. Offline corpora loaded via
the corpus module produce records indistinguishable from live ones.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Callable

import httpx

from .errors import (AuthError, ClientError, EmptyRefactoringError,
                     RateLimitError, TransportError)

TYPE_SIMPLIFICATION = "simplification"
TYPE_OPTIMIZATION = "optimization"

PLACEHOLDER = "<ORIGINAL CODE>"


@dataclass(frozen=True)
class PromptTemplate:
    refactor_type: str
    text: str


_OPTIMIZATION_TEXT = (
    "Task: Optimize the following Python program/function so that it runs faster.\n"
    "Instructions:\n"
    "- Output ONLY valid Python code.\n"
    "- Do NOT include any explanations, comments, markdown, examples, or extra text.\n"
    "- If you cannot safely optimize, output the original program/function unchanged.\n"
    "Python program/function: " + PLACEHOLDER
)

_SIMPLIFICATION_TEXT = (
    "Task: Simplify the following Python program/function by removing redundancy"
    " and making it more concise.\n"
    "Instructions:\n"
    "- Output ONLY valid Python code.\n"
    "- Do NOT include any explanations, comments, markdown, examples, or extra text.\n"
    "- If you cannot safely simplify, output the original program/function unchanged.\n"
    "Python program/function: " + PLACEHOLDER
)

PROMPTS = {
    TYPE_OPTIMIZATION: PromptTemplate(TYPE_OPTIMIZATION, _OPTIMIZATION_TEXT),
    TYPE_SIMPLIFICATION: PromptTemplate(TYPE_SIMPLIFICATION, _SIMPLIFICATION_TEXT),
}


def render_prompt(refactor_type: str, original: str) -> str:
    """Instantiates the instruction prompt with the original code, verbatim
    and unescaped."""
    if refactor_type not in PROMPTS:
        raise ValueError(f"unknown refactor_type {refactor_type!r}")
    if not original:
        raise ValueError("original source must be non-empty")
    template = PROMPTS[refactor_type].text
    head, _, tail = template.partition(PLACEHOLDER)
    return head + original + tail


@dataclass(frozen=True)
class GenerationParams:
    """Decoding settings, held constant across one campaign and recorded in
    the report header. Deterministic by default."""

    model: str
    temperature: float = 0.0
    max_tokens: int = 2048
    seed: int = 0


@dataclass(frozen=True)
class Endpoint:
    base_url: str
    api_key_env: str = "DIFFFUZZ_API_KEY"
    request_timeout: float = 60.0
    max_attempts: int = 3
    backoff_base: float = 0.5


def request_refactoring(prompt: str, params: GenerationParams, endpoint: Endpoint,
                        transport: httpx.BaseTransport | None = None,
                        sleep: Callable[[float], None] = time.sleep) -> str:
    """One chat completion; raw text back.

    Transient failures (transport errors, 5xx, 429) are retried with
    exponential backoff up to ``endpoint.max_attempts``; auth and other
    client-side rejections are raised immediately. Content is never a retry
    reason. ``transport`` is an injection point for tests.
    """
    api_key = os.environ.get(endpoint.api_key_env)
    if not api_key:
        raise AuthError(
            f"credential environment variable {endpoint.api_key_env!r} is not set")
    body = {
        "model": params.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": params.temperature,
        "max_tokens": params.max_tokens,
        "seed": params.seed,
    }
    url = endpoint.base_url.rstrip("/") + "/chat/completions"
    headers = {"Authorization": f"Bearer {api_key}"}
    last_failure = "no attempt made"
    rate_limited = False
    with httpx.Client(transport=transport, timeout=endpoint.request_timeout) as client:
        for attempt in range(1, endpoint.max_attempts + 1):
            if attempt > 1:
                sleep(endpoint.backoff_base * (2 ** (attempt - 2)))
            try:
                response = client.post(url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_failure = f"transport failure: {exc}"
                rate_limited = False
                continue
            if response.status_code in (401, 403):
                raise AuthError(f"endpoint rejected credentials ({response.status_code})")
            if response.status_code == 429:
                last_failure = "rate limited (429)"
                rate_limited = True
                continue
            if response.status_code >= 500:
                last_failure = f"server failure ({response.status_code})"
                rate_limited = False
                continue
            if response.status_code != 200:
                raise ClientError(
                    f"unexpected response {response.status_code}: {response.text[:200]}")
            return _extract_completion(response)
    if rate_limited:
        raise RateLimitError(
            f"gave up after {endpoint.max_attempts} attempts: {last_failure}")
    raise TransportError(
        f"gave up after {endpoint.max_attempts} attempts: {last_failure}")


def _extract_completion(response: httpx.Response) -> str:
    try:
        payload = response.json()
        content = payload["choices"][0]["message"]["content"]
    except (ValueError, LookupError, TypeError) as exc:
        raise ClientError(f"malformed completion payload: {exc}") from exc
    if not isinstance(content, str):
        raise ClientError("completion content is not text")
    return content


def _is_fence(line: str) -> bool:
    return line.strip().startswith("```")


def sanitize_response(raw: str) -> str:
    """First fenced block if any, else the whole text; blank edges dropped.

    Idempotent by construction: an extracted block ends at the first closing
    fence, so the result never contains fence lines.
    """
    lines = raw.splitlines()
    fence_positions = [i for i, line in enumerate(lines) if _is_fence(line)]
    if fence_positions:
        start = fence_positions[0] + 1
        end = fence_positions[1] if len(fence_positions) > 1 else len(lines)
        block = lines[start:end]
    else:
        block = lines
    while block and not block[0].strip():
        block.pop(0)
    while block and not block[-1].strip():
        block.pop()
    if not block:
        raise EmptyRefactoringError("response sanitized down to nothing")
    return "\n".join(block)


def produce_refactoring(original: str, refactor_type: str, params: GenerationParams,
                        endpoint: Endpoint,
                        transport: httpx.BaseTransport | None = None,
                        sleep: Callable[[float], None] = time.sleep) -> str:
    """Render, request and sanitize in one step; returns candidate source."""
    prompt = render_prompt(refactor_type, original)
    raw = request_refactoring(prompt, params, endpoint, transport=transport, sleep=sleep)
    return sanitize_response(raw)
