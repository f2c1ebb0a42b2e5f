"""JSON output with floats written as 17 significant digits."""

from __future__ import annotations

import json
import math

import numpy as np


def _encode(obj, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot encode non-finite value {x} as JSON")
        text = format(x, ".17g")
        if "e" not in text and "." not in text and "n" not in text:
            text += ".0"
        return text
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items())
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # flat numeric lists stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in obj):
            return "[" + ", ".join(_encode(v, None, 0) for v in obj) + "]"
        items = (f"{pad}{_encode(v, indent, level + 1)}" for v in obj)
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def dumps17(obj, indent: int | None = 2) -> str:
    return _encode(obj, indent, 0) + "\n"
