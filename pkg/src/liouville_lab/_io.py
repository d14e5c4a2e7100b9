"""Deterministic JSON/CSV writers with provenance stamps."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os

import numpy as np

VERSION = "0.1.0"


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def write_json(path, obj, chash: str) -> str:
    payload = {"tool_version": VERSION, "config_hash": chash, **obj}
    with open(path, "w") as fh:
        fh.write(dumps(payload))
    return path


def write_csv(path, header, rows, chash: str) -> str:
    """CSV with a leading ``#`` provenance line, then the header row."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# liouville_lab {VERSION} config_hash={chash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def stamp_csv(path, chash: str) -> None:
    """Prefix an existing CSV with the provenance line."""
    with open(path) as fh:
        body = fh.read()
    with open(path, "w") as fh:
        fh.write(f"# liouville_lab {VERSION} config_hash={chash}\n" + body)


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
