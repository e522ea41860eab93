"""Canonical value universe for execution payloads and corpus literals.

A canonical value is one of: None, bool, int, float (binary64, never a raw
NaN), str, list of canonical values, or dict with unique string keys held in
ascending order. NaN is normalized to the distinguished ``NAN`` token so that
equality stays reflexive. The concrete text syntax is JSON with sorted keys,
compact separators and shortest-round-trip floats; the non-standard
``NaN``/``Infinity`` literals carry the nonfinite floats.
"""

from __future__ import annotations

import json
import math
from typing import Any


class _NanToken:
    """Singleton standing in for float NaN inside canonical structures."""

    _instance: "_NanToken | None" = None

    def __new__(cls) -> "_NanToken":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NaN"


NAN = _NanToken()

CanonicalValue = Any  # None | bool | int | float | str | _NanToken | list | dict


def canonicalize(obj: Any) -> CanonicalValue:
    """Map an arbitrary Python value into the canonical universe.

    Total: tuples become lists, sets become sorted lists, mapping keys are
    rendered to text and sorted, NaN becomes the NAN token, and anything else
    falls back to its repr as text.
    """
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return NAN if math.isnan(obj) else obj
    if isinstance(obj, _NanToken):
        return NAN
    if isinstance(obj, (list, tuple)):
        return [canonicalize(x) for x in obj]
    if isinstance(obj, (set, frozenset)):
        elems = [canonicalize(x) for x in obj]
        return sorted(elems, key=dumps)
    if isinstance(obj, dict):
        items = []
        for key, val in obj.items():
            name = key if isinstance(key, str) else dumps(canonicalize(key))
            items.append((name, canonicalize(val)))
        items.sort(key=lambda kv: kv[0])
        return dict(items)
    if isinstance(obj, (bytes, bytearray)):
        return bytes(obj).decode("utf-8", "replace")
    return repr(obj)


def _to_jsonable(value: CanonicalValue) -> Any:
    if isinstance(value, _NanToken):
        return float("nan")
    if isinstance(value, list):
        return [_to_jsonable(x) for x in value]
    if isinstance(value, dict):
        return {k: _to_jsonable(v) for k, v in value.items()}
    return value


def dumps(value: CanonicalValue) -> str:
    """Render a canonical value in the canonical text syntax."""
    return json.dumps(_to_jsonable(value), sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=True)


def loads(text: str) -> CanonicalValue:
    """Parse canonical text back into a canonical value."""
    return canonicalize(json.loads(text))
