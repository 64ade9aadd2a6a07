"""CSV and JSON writers with 17 significant digits."""
from __future__ import annotations

import json
import math
import os
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


def fmt(x) -> str:
    """Decimal text of a float with 17 significant digits; non-finite values as words."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = "," if indent is None else ","
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt(x) if math.isfinite(x) else json.dumps(fmt(x))
    if isinstance(obj, Fraction):
        return _encode({"num": obj.numerator, "den": obj.denominator}, indent, level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [pad + json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = 2) -> str:
    return _encode(obj, indent, 0)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> str:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return path


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    return write_text(path, csv_text(header, rows))


def write_json(path: str, obj) -> str:
    return write_text(path, dumps(obj) + "\n")
