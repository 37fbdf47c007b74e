"""Canonical JSON reading and writing.

Canonical form: sorted keys, no whitespace, floats in Python's shortest
round-trip repr, non-finite floats as the strings "inf", "-inf", "nan".
"""

import dataclasses
import json
import math

import numpy as np

from ..space import QuasiMetricSpace


class WorkbenchIOError(OSError):
    pass


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        items = sorted(obj) if isinstance(obj, (frozenset, set)) else obj
        return [to_jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def loads(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkbenchIOError(f"malformed JSON: {exc}") from exc


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return loads(fh.read())
    except OSError as exc:
        if isinstance(exc, WorkbenchIOError):
            raise
        raise WorkbenchIOError(str(exc)) from exc


def write_json(obj, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(obj))
    except OSError as exc:
        raise WorkbenchIOError(str(exc)) from exc


def _num(x):
    if isinstance(x, str):
        return float(x)
    return x


def space_to_dict(space):
    out = {"dist": space.dist, "weight": space.weight}
    if space.labels:
        out["labels"] = list(space.labels)
    return out


def space_from_dict(data):
    try:
        dist = [[_num(v) for v in row] for row in data["dist"]]
        weight = [_num(v) for v in data["weight"]]
    except (KeyError, TypeError) as exc:
        raise WorkbenchIOError(f"not a space document: {exc}") from exc
    return QuasiMetricSpace(np.array(dist, dtype=float), np.array(weight, dtype=float),
                            tuple(data.get("labels", ())))


def read_space(path):
    return space_from_dict(read_json(path))


def write_space(space, path):
    write_json(space_to_dict(space), path)


def read_vector(path, key):
    """A list, or a document holding the list under ``key``."""
    data = read_json(path)
    if isinstance(data, dict):
        if key not in data:
            raise WorkbenchIOError(f"missing key {key!r} in {path}")
        data = data[key]
    if not isinstance(data, list):
        raise WorkbenchIOError(f"expected a list in {path}")
    return [_num(v) for v in data]
