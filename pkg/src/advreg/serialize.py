"""Deterministic JSON/CSV emitters.

Every run artifact must be byte-identical across reruns, so floats are
always printed with 17 significant digits (enough to round-trip a double)
and JSON object keys are emitted in sorted order. The stdlib json module
cannot pin float formatting, hence the small hand-rolled emitter.
"""

import json

import numpy as np


def format_float(x):
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite value {x!r}")
    return format(x, ".17g")


def _emit(obj, indent, out):
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = sorted(obj.items())
        for k, (key, val) in enumerate(items):
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {type(key)}")
            out.append(f'{pad}  {json.dumps(key)}: ')
            _emit(val, indent + 1, out)
            out.append(",\n" if k + 1 < len(items) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        out.append("[\n")
        for k, val in enumerate(obj):
            out.append(pad + "  ")
            _emit(val, indent + 1, out)
            out.append(",\n" if k + 1 < len(obj) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), indent, out)
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif obj is None:
        out.append("null")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def to_json(obj):
    out = []
    _emit(obj, 0, out)
    return "".join(out) + "\n"


def write_json(path, obj):
    text = to_json(obj)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return text


def format_cell(value):
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans do not belong in CSV output")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows):
    text = csv_text(header, rows)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return text
