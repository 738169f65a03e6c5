"""JSON helpers shared by the classification reports and the command line."""

from __future__ import annotations

import json

import numpy as np

SCHEMA_VERSION = "1.0"


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return obj


def dumps(obj):
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update(jsonable(obj))
    return json.dumps(payload, indent=2, sort_keys=True)


def write_json(obj, path):
    text = dumps(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    return text
