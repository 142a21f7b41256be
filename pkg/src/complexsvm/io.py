"""CSV datasets and JSON model files.

Complex regression CSV::

    # optional comment lines
    re_0,im_0,...,re_{nu-1},im_{nu-1},d_re,d_im

Labeled CSV replaces ``d_re,d_im`` with ``label`` in {"++", "+-", "-+", "--"}.
Floats are written with ``repr`` so files round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .csvm import CsvmModel, label_from_str, label_to_str
from .csvr import CsvrModel, DrcModel

__all__ = [
    "CsvFormatError",
    "read_complex_csv",
    "write_complex_csv",
    "read_labeled_csv",
    "write_labeled_csv",
    "write_table",
    "config_hash",
    "save_model",
    "load_model",
    "model_from_dict",
]


class CsvFormatError(ValueError):
    pass


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(blob.encode()).hexdigest()


def _json_default(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_table(path, header, rows, meta=None):
    """Write a CSV with an optional ``# key=value ...`` metadata line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _read_rows(path):
    with open(path, newline="") as fh:
        lines = [(no, line) for no, line in enumerate(fh, start=1) if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise CsvFormatError(f"{path}: no header row")
    reader = csv.reader([line for _, line in lines])
    rows = list(reader)
    header = [h.strip() for h in rows[0]]
    return header, [(no, row) for (no, _), row in zip(lines[1:], rows[1:])]


def _input_columns(path, header):
    nu = 0
    while f"re_{nu}" in header and f"im_{nu}" in header:
        nu += 1
    if nu == 0:
        raise CsvFormatError(f"{path}: header needs re_0,im_0,... input columns, got {header}")
    expected = [c for k in range(nu) for c in (f"re_{k}", f"im_{k}")]
    if header[: 2 * nu] != expected:
        raise CsvFormatError(f"{path}: input columns must come first as {','.join(expected)}")
    return nu


def _parse_float(path, no, header, col, text):
    try:
        return float(text)
    except ValueError:
        raise CsvFormatError(f"{path}: row {no}, column {header[col]!r}: cannot parse {text!r} as a number") from None


def read_complex_csv(path, require_targets=True):
    """Return ``(inputs, targets)``; ``targets`` is None when absent and not required."""
    header, rows = _read_rows(path)
    nu = _input_columns(path, header)
    has_targets = header[2 * nu: 2 * nu + 2] == ["d_re", "d_im"]
    extra = header[2 * nu + (2 if has_targets else 0):]
    if extra and not (not require_targets and extra == ["label"]):
        raise CsvFormatError(f"{path}: unexpected columns {extra}")
    if require_targets and not has_targets:
        raise CsvFormatError(f"{path}: missing d_re,d_im target columns")
    width = 2 * nu + (2 if has_targets else 0)
    z = np.empty((len(rows), nu), dtype=complex)
    d = np.empty(len(rows), dtype=complex) if has_targets else None
    for k, (no, row) in enumerate(rows):
        if len(row) != len(header):
            raise CsvFormatError(f"{path}: row {no} has {len(row)} columns, expected {len(header)}")
        vals = [_parse_float(path, no, header, c, row[c]) for c in range(width)]
        z[k] = np.asarray(vals[0:2 * nu:2]) + 1j * np.asarray(vals[1:2 * nu:2])
        if has_targets:
            d[k] = complex(vals[2 * nu], vals[2 * nu + 1])
    if len(rows) == 0:
        raise CsvFormatError(f"{path}: no data rows")
    return z, d


def read_labeled_csv(path):
    header, rows = _read_rows(path)
    nu = _input_columns(path, header)
    if header[2 * nu:] != ["label"]:
        raise CsvFormatError(f"{path}: expected a final 'label' column after the inputs")
    z = np.empty((len(rows), nu), dtype=complex)
    labels = np.empty(len(rows), dtype=complex)
    for k, (no, row) in enumerate(rows):
        if len(row) != len(header):
            raise CsvFormatError(f"{path}: row {no} has {len(row)} columns, expected {len(header)}")
        vals = [_parse_float(path, no, header, c, row[c]) for c in range(2 * nu)]
        z[k] = np.asarray(vals[0::2]) + 1j * np.asarray(vals[1::2])
        try:
            labels[k] = label_from_str(row[2 * nu])
        except ValueError as exc:
            raise CsvFormatError(f"{path}: row {no}, column 'label': {exc}") from None
    if len(rows) == 0:
        raise CsvFormatError(f"{path}: no data rows")
    return z, labels


def _input_header(nu):
    return [c for k in range(nu) for c in (f"re_{k}", f"im_{k}")]


def _input_cells(zrow):
    return [v for c in zrow for v in (float(c.real), float(c.imag))]


def write_complex_csv(path, inputs, targets=None, meta=None):
    z = np.atleast_2d(np.asarray(inputs, dtype=complex))
    header = _input_header(z.shape[1])
    if targets is not None:
        header += ["d_re", "d_im"]
        d = np.asarray(targets, dtype=complex).reshape(-1)
        rows = (_input_cells(zr) + [float(t.real), float(t.imag)] for zr, t in zip(z, d))
    else:
        rows = (_input_cells(zr) for zr in z)
    write_table(path, header, rows, meta)


def write_labeled_csv(path, inputs, labels, meta=None):
    z = np.atleast_2d(np.asarray(inputs, dtype=complex))
    header = _input_header(z.shape[1]) + ["label"]
    rows = (_input_cells(zr) + [label_to_str(lab)] for zr, lab in zip(z, labels))
    write_table(path, header, rows, meta)


_MODEL_TYPES = {"csvr": CsvrModel, "drc": DrcModel, "complexified": DrcModel, "csvm": CsvmModel}


def model_from_dict(obj):
    kind = obj.get("type")
    if kind not in _MODEL_TYPES:
        raise ValueError(f"unknown model type {kind!r}")
    return _MODEL_TYPES[kind].from_dict(obj)


def save_model(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model.to_dict(), indent=1) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
