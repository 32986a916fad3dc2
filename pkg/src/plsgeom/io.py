"""CSV / JSON helpers and run manifests for the command line tools."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ValidationError


def fmt(x) -> str:
    """17 significant digits, round-trips a float64."""
    return f"{float(x):.17g}"


def _parse_numbers(fields) -> np.ndarray:
    try:
        return np.array([float(f) for f in fields if f.strip()], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"not a number: {exc}") from None


def read_vector(source: str) -> np.ndarray:
    """A path to a CSV (one value per line) or an inline ``a,b,c`` list."""
    if os.path.isfile(source):
        with open(source, newline="") as fh:
            return _parse_numbers(f for row in csv.reader(fh) for f in row)
    return _parse_numbers(source.split(","))


def read_matrix(path: str) -> np.ndarray:
    if not os.path.isfile(path):
        raise ValidationError(f"matrix file not found: {path}")
    with open(path, newline="") as fh:
        rows = [_parse_numbers(r) for r in csv.reader(fh) if any(f.strip() for f in r)]
    if not rows or len({r.size for r in rows}) != 1:
        raise ValidationError(f"{path}: rows must have equal length")
    return np.vstack(rows)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def matrix_rows(M):
    return [[fmt(v) for v in row] for row in np.atleast_2d(M)]


def vector_rows(v):
    return [[fmt(x)] for x in np.ravel(v)]


def json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not JSON serialisable: {type(o)}")


def write_text(path: str | Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def manifest(command: str, argv, inputs: dict, seed: int | None = None) -> dict:
    from . import __version__

    return {
        "command": command,
        "argv": list(argv),
        "inputs": inputs,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
