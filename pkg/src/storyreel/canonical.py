"""Canonical JSON encoding.

Every document the engine persists (scripts, workflows, manifests, store
records) goes through this encoder so that equal values always produce equal
bytes: keys sorted, minimal separators, ASCII-only escapes, floats printed
with exactly six decimal places.

Floats round-trip because every float the domain stores is quantized with
:func:`q6` at construction time; a six-decimal literal parses back to the
same IEEE double it was printed from.
"""

from __future__ import annotations

import json
import math
from typing import Any


def q6(value: float) -> float:
    """Quantize to six decimal places (the serialization precision)."""
    out = float(f"{float(value):.6f}")
    return 0.0 if out == 0 else out


def _encode(value: Any, out: list[str]) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite float is not serializable")
        out.append(f"{0.0 if value == 0 else value:.6f}")
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=True))
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    elif isinstance(value, dict):
        out.append("{")
        for i, key in enumerate(sorted(value)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _encode(value[key], out)
        out.append("}")
    else:
        raise TypeError(f"unsupported type {type(value).__name__}")


def dumps(value: Any) -> str:
    out: list[str] = []
    _encode(value, out)
    return "".join(out)


def dump_bytes(value: Any) -> bytes:
    return dumps(value).encode("ascii")


def loads(text: str | bytes) -> Any:
    return json.loads(text)
