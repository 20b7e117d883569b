"""JSON encodings of sets and functions; all rationals travel as strings."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .exactnum import format_rational, parse_rational
from .functions import PointMassFunction
from .sets import Box, Interval1D, SetExpr


class FormatError(ValueError):
    """Malformed JSON input."""


def _rat(v: Any) -> Fraction:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise FormatError(f"expected a rational given as a string such as \"3/2\", got {v!r}")
    try:
        return parse_rational(str(v))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def _vec(v: Any, dim: int, what: str) -> tuple[Fraction, ...]:
    if not isinstance(v, list) or len(v) != dim:
        raise FormatError(f"{what} must be a list of {dim} rationals, got {v!r}")
    return tuple(_rat(c) for c in v)


def _flags(v: Any, dim: int, what: str) -> list[bool]:
    if v is None:
        return [False] * dim
    if isinstance(v, bool):
        return [v] * dim
    if not isinstance(v, list) or len(v) != dim or not all(isinstance(b, bool) for b in v):
        raise FormatError(f"{what} must be a boolean or a list of {dim} booleans")
    return list(v)


def set_to_json(S: SetExpr) -> dict:
    boxes = [{"lo": [format_rational(f.lo) for f in b.factors],
              "hi": [format_rational(f.hi) for f in b.factors],
              "lo_open": [f.lo_open for f in b.factors],
              "hi_open": [f.hi_open for f in b.factors]} for b in S.boxes]
    points = [[format_rational(c) for c in p] for p in sorted(S.points)]
    return {"dim": S.dim, "boxes": boxes, "points": points}


def set_from_json(obj: Any) -> SetExpr:
    """``{"dim": n, "boxes": [{"lo", "hi", "lo_open", "hi_open"}], "points": [[...]]}``.

    Open flags may be omitted (closed) or given as one boolean for all axes.
    """
    if not isinstance(obj, dict) or "dim" not in obj:
        raise FormatError("a set must be an object with a \"dim\" field")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FormatError(f"dim must be a positive integer, got {dim!r}")
    boxes = []
    for b in obj.get("boxes", []):
        if not isinstance(b, dict):
            raise FormatError("each box must be an object")
        lo, hi = _vec(b.get("lo"), dim, "box lo"), _vec(b.get("hi"), dim, "box hi")
        lo_open = _flags(b.get("lo_open"), dim, "lo_open")
        hi_open = _flags(b.get("hi_open"), dim, "hi_open")
        try:
            boxes.append(Box(tuple(Interval1D(*args) for args in zip(lo, hi, lo_open, hi_open))))
        except ValueError as exc:
            raise FormatError(str(exc)) from None
    points = [_vec(p, dim, "point") for p in obj.get("points", [])]
    return SetExpr(dim, tuple(boxes), frozenset(points))


def function_to_json(phi: PointMassFunction) -> dict:
    support = [[[format_rational(c) for c in x], format_rational(v)] for x, v in sorted(phi.support.items())]
    char = None if phi.char_part is None else set_to_json(phi.char_part)
    return {"dim": phi.dim, "support": support, "char": char}


def function_from_json(obj: Any) -> PointMassFunction:
    """``{"dim": n, "support": [[["0","1"], "3/2"], ...], "char": <set or null>}``."""
    if not isinstance(obj, dict) or "dim" not in obj:
        raise FormatError("a function must be an object with a \"dim\" field")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FormatError(f"dim must be a positive integer, got {dim!r}")
    support = {}
    for entry in obj.get("support", []):
        if not isinstance(entry, list) or len(entry) != 2:
            raise FormatError("support entries are [point, value] pairs")
        support[_vec(entry[0], dim, "support point")] = _rat(entry[1])
    char = obj.get("char")
    char_set = None if char is None else set_from_json(char)
    if char_set is not None and char_set.dim != dim:
        raise FormatError("characteristic part has the wrong dimension")
    try:
        return PointMassFunction(dim, support, char_set)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def load_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def load_set(path: str | Path) -> SetExpr:
    return set_from_json(load_json(path))


def load_function(path: str | Path) -> PointMassFunction:
    return function_from_json(load_json(path))
