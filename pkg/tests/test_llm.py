"""Refactoring acquisition: prompt rendering, retry discipline, sanitization.

The HTTP layer is driven through an injected mock transport, so no test here
touches the network.
"""

import json

import httpx
import pytest
from hypothesis import given, strategies as st

from difffuzz.errors import (
    AuthError,
    ClientError,
    EmptyRefactoringError,
    RateLimitError,
    TransportError,
)
from difffuzz.llm import (
    PLACEHOLDER,
    PROMPTS,
    TYPE_OPTIMIZATION,
    TYPE_SIMPLIFICATION,
    Endpoint,
    GenerationParams,
    produce_refactoring,
    render_prompt,
    request_refactoring,
    sanitize_response,
)

PARAMS = GenerationParams(model="test-model")
ENDPOINT = Endpoint(base_url="https://llm.invalid/v1", api_key_env="TEST_LLM_KEY")


@pytest.fixture
def api_key(monkeypatch):
    monkeypatch.setenv("TEST_LLM_KEY", "sk-test")


def completion_response(text):
    return httpx.Response(
        200, json={"choices": [{"message": {"content": text}}]})


def no_sleep(_seconds):
    pass


# ---------------------------------------------------------------------------
# prompt rendering
# ---------------------------------------------------------------------------

class TestPrompts:
    def test_both_transformations_have_templates(self):
        assert set(PROMPTS) == {TYPE_SIMPLIFICATION, TYPE_OPTIMIZATION}

    def test_optimization_prompt_wording(self):
        text = PROMPTS[TYPE_OPTIMIZATION].text
        assert text.startswith(
            "Task: Optimize the following Python program/function so that it"
            " runs faster.\n")
        assert "- Output ONLY valid Python code." in text
        assert ("- Do NOT include any explanations, comments, markdown,"
                " examples, or extra text.") in text
        assert ("- If you cannot safely optimize, output the original"
                " program/function unchanged.") in text
        assert text.endswith("Python program/function: " + PLACEHOLDER)

    def test_simplification_prompt_wording(self):
        text = PROMPTS[TYPE_SIMPLIFICATION].text
        assert text.startswith(
            "Task: Simplify the following Python program/function by removing"
            " redundancy and making it more concise.\n")
        assert ("- If you cannot safely simplify, output the original"
                " program/function unchanged.") in text
        assert text.endswith("Python program/function: " + PLACEHOLDER)

    def test_render_substitutes_code_verbatim(self):
        code = "def f(x):\n    return '{weird}' + x  # 100%\n"
        rendered = render_prompt(TYPE_OPTIMIZATION, code)
        assert code in rendered
        assert PLACEHOLDER not in rendered

    def test_render_rejects_unknown_type(self):
        with pytest.raises(ValueError):
            render_prompt("modernization", "def f(): pass")

    def test_render_rejects_empty_source(self):
        with pytest.raises(ValueError):
            render_prompt(TYPE_OPTIMIZATION, "")


# ---------------------------------------------------------------------------
# request/retry discipline
# ---------------------------------------------------------------------------

class TestRequestRefactoring:
    def test_success_returns_completion_text(self, api_key):
        seen = {}

        def handler(request):
            seen["request"] = request
            return completion_response("def f(x):\n    return x\n")

        text = request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                   transport=httpx.MockTransport(handler))
        assert text == "def f(x):\n    return x\n"
        request = seen["request"]
        assert request.url.path.endswith("/chat/completions")
        assert request.headers["Authorization"] == "Bearer sk-test"
        body = json.loads(request.content)
        assert body["messages"] == [{"role": "user", "content": "PROMPT"}]
        assert body["model"] == "test-model"
        assert body["temperature"] == 0.0
        assert body["seed"] == 0

    def test_missing_credential_fails_before_any_request(self, monkeypatch):
        monkeypatch.delenv("TEST_LLM_KEY", raising=False)

        def handler(request):
            raise AssertionError("no request should be sent")

        with pytest.raises(AuthError, match="TEST_LLM_KEY"):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler))

    def test_rejected_credential_not_retried(self, api_key):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(401, json={"error": "bad key"})

        with pytest.raises(AuthError):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler),
                                sleep=no_sleep)
        assert len(calls) == 1

    def test_server_errors_retried_then_succeed(self, api_key):
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(503)
            return completion_response("ok = 1")

        slept = []
        text = request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                   transport=httpx.MockTransport(handler),
                                   sleep=slept.append)
        assert text == "ok = 1" and len(calls) == 3
        assert slept == [0.5, 1.0]  # exponential backoff between attempts

    def test_persistent_rate_limit_raises_after_retries(self, api_key):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(429)

        with pytest.raises(RateLimitError):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler),
                                sleep=no_sleep)
        assert len(calls) == ENDPOINT.max_attempts

    def test_transport_failures_raise_after_retries(self, api_key):
        def handler(request):
            raise httpx.ConnectError("refused")

        with pytest.raises(TransportError):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler),
                                sleep=no_sleep)

    def test_unexpected_status_is_a_client_error(self, api_key):
        def handler(request):
            return httpx.Response(418)

        with pytest.raises(ClientError):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler),
                                sleep=no_sleep)

    def test_malformed_payload_is_a_client_error(self, api_key):
        def handler(request):
            return httpx.Response(200, json={"choices": []})

        with pytest.raises(ClientError, match="malformed"):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler))

    def test_non_text_content_is_a_client_error(self, api_key):
        def handler(request):
            return httpx.Response(
                200, json={"choices": [{"message": {"content": 42}}]})

        with pytest.raises(ClientError, match="not text"):
            request_refactoring("PROMPT", PARAMS, ENDPOINT,
                                transport=httpx.MockTransport(handler))


# ---------------------------------------------------------------------------
# response sanitization
# ---------------------------------------------------------------------------

class TestSanitizeResponse:
    def test_bare_code_passes_through(self):
        code = "def f(x):\n    return x"
        assert sanitize_response(code) == code

    def test_fenced_block_extracted(self):
        raw = "Here you go:\n```python\ndef f(x):\n    return x\n```\nEnjoy!"
        assert sanitize_response(raw) == "def f(x):\n    return x"

    def test_only_first_fenced_block_kept(self):
        raw = "```\nfirst = 1\n```\ntext\n```\nsecond = 2\n```"
        assert sanitize_response(raw) == "first = 1"

    def test_unclosed_fence_runs_to_end(self):
        raw = "```python\ndef f(x):\n    return x"
        assert sanitize_response(raw) == "def f(x):\n    return x"

    def test_blank_edges_dropped_interior_kept(self):
        raw = "\n\ndef f(x):\n\n    return x\n\n"
        assert sanitize_response(raw) == "def f(x):\n\n    return x"

    def test_empty_response_raises(self):
        with pytest.raises(EmptyRefactoringError):
            sanitize_response("")

    def test_fence_only_response_raises(self):
        with pytest.raises(EmptyRefactoringError):
            sanitize_response("```python\n```")

    def test_whitespace_only_response_raises(self):
        with pytest.raises(EmptyRefactoringError):
            sanitize_response("  \n\t\n")

    @given(st.text(max_size=300))
    def test_idempotent(self, raw):
        try:
            once = sanitize_response(raw)
        except EmptyRefactoringError:
            return
        assert sanitize_response(once) == once

    @given(st.text(max_size=300))
    def test_output_never_contains_fence_lines(self, raw):
        try:
            cleaned = sanitize_response(raw)
        except EmptyRefactoringError:
            return
        assert not any(line.strip().startswith("```")
                       for line in cleaned.splitlines())


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

class TestProduceRefactoring:
    def test_end_to_end_with_mock_transport(self, api_key):
        prompts = []

        def handler(request):
            prompts.append(json.loads(request.content)["messages"][0]["content"])
            return completion_response(
                "```python\ndef f(x):\n    return abs(x)\n```")

        source = "def f(x):\n    if x < 0:\n        return -x\n    return x\n"
        candidate = produce_refactoring(source, TYPE_SIMPLIFICATION, PARAMS,
                                        ENDPOINT,
                                        transport=httpx.MockTransport(handler))
        assert candidate == "def f(x):\n    return abs(x)"
        assert source in prompts[0]
        assert prompts[0].startswith("Task: Simplify")
