"""Deterministic JSON and CSV emission, plus matrix (de)serialization.

Reports must be byte-for-byte reproducible across runs, so floats are always
rendered with %.17g (enough digits to round-trip a double) and object keys
are emitted sorted.  Complex entries are written as [re, im] pairs; real
entries as plain numbers.  NaN and infinity are rejected rather than emitted.
"""

import json
import math

import numpy as np

__all__ = [
    "SchemaError",
    "encode_matrix",
    "decode_matrix",
    "dumps",
    "save_json",
    "write_csv",
]


class SchemaError(ValueError):
    """Input JSON does not match the expected schema."""


def _fmt(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite float in report")
    return "%.17g" % x


def encode_matrix(a):
    """ndarray -> list of rows; complex entries become [re, im] pairs."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("encode_matrix expects a 2-d array")
    rows = []
    for i in range(a.shape[0]):
        row = []
        for j in range(a.shape[1]):
            z = complex(a[i, j])
            row.append(z.real if z.imag == 0.0 else [z.real, z.imag])
        rows.append(row)
    return rows


def _decode_entry(v, where):
    if isinstance(v, bool):
        raise SchemaError(f"{where}: boolean is not a matrix entry")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in v
    ):
        return complex(v[0], v[1])
    raise SchemaError(f"{where}: entry must be a number or [re, im] pair")


def decode_matrix(obj, rows=None, cols=None, name="matrix"):
    """List-of-rows JSON value -> complex ndarray.

    Zero-row matrices serialize as [] and zero-column ones as [[], ...], so
    the empty shapes are not self-describing; pass rows/cols hints when the
    caller knows them.
    """
    if not isinstance(obj, list):
        raise SchemaError(f"{name} must be a list of rows")
    if len(obj) == 0:
        out = np.zeros((0, cols if cols is not None else 0), dtype=complex)
    else:
        if not all(isinstance(r, list) for r in obj):
            raise SchemaError(f"{name} rows must be lists")
        ncol = len(obj[0])
        if any(len(r) != ncol for r in obj):
            raise SchemaError(f"{name} rows have unequal lengths")
        out = np.zeros((len(obj), ncol), dtype=complex)
        for i, r in enumerate(obj):
            for j, v in enumerate(r):
                out[i, j] = _decode_entry(v, f"{name}[{i}][{j}]")
    if rows is not None and out.shape[0] != rows:
        raise SchemaError(f"{name} has {out.shape[0]} rows, expected {rows}")
    if cols is not None and out.shape[1] != cols:
        raise SchemaError(f"{name} has {out.shape[1]} columns, expected {cols}")
    return out


def _emit(obj, out, depth):
    pad = "  " * depth
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj)
        for i, k in enumerate(keys):
            if not isinstance(k, str):
                raise ValueError("report keys must be strings")
            out.append("  " * (depth + 1) + json.dumps(k) + ": ")
            _emit(obj[k], out, depth + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        if all(_is_scalar(v) for v in items):
            out.append("[" + ", ".join(_scalar(v) for v in items) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(items):
            out.append("  " * (depth + 1))
            _emit(v, out, depth + 1)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, np.ndarray):
        _emit(encode_matrix(obj), out, depth)
    elif _is_scalar(obj):
        out.append(_scalar(obj))
    else:
        raise ValueError(f"cannot serialize object of type {type(obj).__name__}")


def _is_scalar(v):
    return v is None or isinstance(
        v, (bool, int, float, complex, str, np.bool_, np.integer, np.floating, np.complexfloating)
    )


def _scalar(v):
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (complex, np.complexfloating)):
        z = complex(v)
        if z.imag == 0.0:
            return _fmt(z.real)
        return "[" + _fmt(z.real) + ", " + _fmt(z.imag) + "]"
    if isinstance(v, (float, np.floating)):
        return _fmt(v)
    return json.dumps(v)


def dumps(obj):
    """Deterministic JSON text: sorted keys, %.17g floats, trailing newline."""
    out = []
    _emit(obj, out, 0)
    return "".join(out) + "\n"


def save_json(path, obj):
    text = dumps(obj)
    with open(path, "w") as fh:
        fh.write(text)
    return text


def write_csv(path, header, columns):
    """Write columns (equal-length 1-d arrays) as CSV with %.17g floats."""
    cols = [np.asarray(c).ravel() for c in columns]
    if len(cols) != len(header):
        raise ValueError("header/column count mismatch")
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns have unequal lengths")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_fmt(float(np.real(c[i]))) for c in cols))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
