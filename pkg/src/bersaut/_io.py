"""JSON/CSV helpers shared by the report objects and the CLI."""
import csv
import dataclasses
import io
import json
import math
import os
import tempfile

import numpy as np

SIGNIFICANT_DIGITS = 15


def _round(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(format(x, f".{SIGNIFICANT_DIGITS}g"))


def to_jsonable(obj):
    """Recursively convert numpy/complex/dataclass values into plain JSON types.

    Complex numbers become ``[re, im]``; floats are rounded to 15 significant
    digits so that artifacts are stable across platforms.
    """
    if hasattr(obj, "to_json") and callable(obj.to_json):
        return to_jsonable(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return [_round(float(obj.real)), _round(float(obj.imag))]
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def format_number(x) -> str:
    return format(float(x), f".{SIGNIFICANT_DIGITS}g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def write_atomic(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def complex_pair(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]
