"""Deterministic JSON serialization and small I/O helpers.

All files the CLI emits go through :func:`dumps_canonical`, which formats
every float with 17 significant digits and never emits NaN/Infinity (they
become ``null``).  Together with seeded randomness this makes repeated runs
byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np


def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    # 17 significant digits round-trips any IEEE double.
    s = format(float(x), ".17g")
    return s


def _encode(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        parts.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_format_float(float(obj)))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise TypeError(f"JSON object keys must be strings, got {type(k)!r}")
            if i:
                parts.append(",")
            parts.append(json.dumps(k, ensure_ascii=False))
            parts.append(":")
            _encode(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, v in enumerate(obj):
            if i:
                parts.append(",")
            _encode(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_canonical(obj) -> str:
    parts: list[str] = []
    _encode(obj, parts)
    return "".join(parts)


def write_json_atomic(path: str | Path, obj) -> None:
    """Write canonical JSON via a temp file + rename so readers never see partial files."""
    path = Path(path)
    data = dumps_canonical(obj) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_json(path: str | Path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


# complex <-> [re, im] packing used by every schema


def complex_to_pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def cmatrix_to_rowmajor(a: np.ndarray) -> list[list[float]]:
    a = np.asarray(a, dtype=complex)
    return [complex_to_pair(z) for z in a.reshape(-1)]


def rowmajor_to_cmatrix(pairs, rows: int, cols: int) -> np.ndarray:
    flat = np.array([pair_to_complex(p) for p in pairs], dtype=complex)
    if flat.size != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, got {flat.size}")
    return flat.reshape(rows, cols)


def cvector_to_pairs(v: np.ndarray) -> list[list[float]]:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def pairs_to_cvector(pairs) -> np.ndarray:
    return np.array([pair_to_complex(p) for p in pairs], dtype=complex)
