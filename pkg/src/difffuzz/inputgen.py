"""Deterministic fuzzed-input generation.

Every input derives from an independent byte stream keyed by
``(seed, problem_id, index)``, so generation order (and any parallelism)
cannot change what gets generated. Values decode from the stream with fixed
rules; relational constraints are enforced by rejection sampling with a
retry cap that turns over-constrained schemas into loud errors instead of
silent truncation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import GenerationExhausted
from .schema import (
    MODE_TEXT_STREAM,
    InputSchema,
    ParamSpec,
    resolve_charset,
    satisfies,
)
from .values import dumps

DEFAULT_FUNCTION_INPUTS = 2000
DEFAULT_PROGRAM_INPUTS = 1000
DEFAULT_MAX_REJECTIONS = 1000

# Generation defaults for parameter specs that omit bounds (such a spec's
# domain stays unconstrained; only the generator needs a concrete range).
DEFAULT_INT_BOUNDS = (-(2**31), 2**31 - 1)
DEFAULT_FLOAT_BOUNDS = (-1e6, 1e6)
DEFAULT_LENGTH_BOUNDS = (0, 10)
DEFAULT_CHARSET = "printable"

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    # splitmix64 finalizer
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class ByteStream:
    """Unbounded deterministic byte source: splitmix64 in counter mode."""

    def __init__(self, key: int):
        self._key = key & _MASK64
        self._counter = 0
        self._buffer = b""

    def read(self, n: int) -> bytes:
        while len(self._buffer) < n:
            self._counter += 1
            block = _mix64((self._key + self._counter * _GOLDEN) & _MASK64)
            self._buffer += block.to_bytes(8, "little")
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def read_u64(self) -> int:
        return int.from_bytes(self.read(8), "little")


def derive_stream(seed: int, problem_id: str, index: int) -> ByteStream:
    """Independent stream per (seed, problem_id, index) triple."""
    material = f"{seed}\x1f{problem_id}\x1f{index}".encode("utf-8")
    digest = hashlib.sha256(material).digest()
    return ByteStream(int.from_bytes(digest[:8], "little"))


def decode_value(stream: ByteStream, spec: ParamSpec):
    """Turn the next stream bytes into one value for the given spec.

    int: 8 bytes little-endian reduced into [lo, hi] modularly.
    float: uniform in [lo, hi] from a 53-bit mantissa draw.
    bool: low bit of one byte.
    string/list/tuple: length draw, then one element per position.
    """
    if spec.kind == "int":
        lo, hi = spec.bounds or DEFAULT_INT_BOUNDS
        return int(lo) + stream.read_u64() % (int(hi) - int(lo) + 1)
    if spec.kind == "float":
        lo, hi = spec.bounds or DEFAULT_FLOAT_BOUNDS
        unit = (stream.read_u64() >> 11) / float(1 << 53)
        return float(lo) + unit * (float(hi) - float(lo))
    if spec.kind == "bool":
        return bool(stream.read(1)[0] & 1)
    lo, hi = spec.length or DEFAULT_LENGTH_BOUNDS
    size = lo + stream.read_u64() % (hi - lo + 1)
    if spec.kind == "string":
        charset = resolve_charset(spec.charset or DEFAULT_CHARSET)
        return "".join(charset[stream.read_u64() % len(charset)] for _ in range(size))
    assert spec.element is not None
    items = [decode_value(stream, spec.element) for _ in range(size)]
    return tuple(items) if spec.kind == "tuple" else items


def render_text_stream(values) -> str:
    """One parameter per line in canonical value syntax, final line terminated."""
    return "".join(dumps(v) + "\n" for v in values)


@dataclass(frozen=True)
class TestInput:
    index: int
    values: tuple
    rendered: str | None = None


@dataclass(frozen=True)
class GenConfig:
    seed: int
    n: int
    max_rejections: int = DEFAULT_MAX_REJECTIONS

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("input count must be >= 1")
        if self.max_rejections < 1:
            raise ValueError("max_rejections must be >= 1")


def default_input_count(level: str) -> int:
    return DEFAULT_PROGRAM_INPUTS if level == "program" else DEFAULT_FUNCTION_INPUTS


def generate_input_at(schema: InputSchema, seed: int, problem_id: str, index: int,
                      max_rejections: int = DEFAULT_MAX_REJECTIONS) -> TestInput:
    """The input at one ordinal, independent of every other ordinal."""
    stream = derive_stream(seed, problem_id, index)
    for _ in range(max_rejections + 1):
        values = tuple(decode_value(stream, spec) for spec in schema.params)
        if satisfies(schema, values):
            rendered = render_text_stream(values) if schema.mode == MODE_TEXT_STREAM else None
            return TestInput(index=index, values=values, rendered=rendered)
    raise GenerationExhausted(
        f"input {index} for {problem_id!r}: no satisfying draw within "
        f"{max_rejections} rejections; schema looks over-constrained")


def generate_inputs(schema: InputSchema, cfg: GenConfig,
                    problem_id: str = "") -> list[TestInput]:
    """Exactly cfg.n schema-satisfying inputs; a pure function of its arguments."""
    return [generate_input_at(schema, cfg.seed, problem_id, i, cfg.max_rejections)
            for i in range(cfg.n)]
