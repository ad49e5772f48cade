"""Deterministic text rendering for CLI and file outputs.

All numeric output uses 17 significant digits so every double round-trips
exactly through its textual form.  The JSON renderer is hand-rolled because
the stdlib encoder offers no control over float formatting; infinities land
as the string "inf" (JSON itself has no infinity literal).
"""

from __future__ import annotations

import json
import math

__all__ = ["format_float", "render_json"]


def format_float(x: float) -> str:
    return "%.17g" % x


def render_json(value, indent: int = 0) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{inner}{json.dumps(str(k))}: {render_json(v, indent + 2)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{render_json(v, indent + 2)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return json.dumps(format_float(value))
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot render {type(value).__name__} as JSON")
