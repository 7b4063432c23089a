"""CSV tables, JSON manifests and content hashes."""

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import DomainError

FLOAT_FORMAT = "%.17g"


def format_float(x):
    return FLOAT_FORMAT % x


def write_table(path, header, columns):
    """
    Write equal-length numeric columns as CSV.

    Values use ``%.17g`` so a read-back reproduces every double exactly.
    Lines end with ``\\n`` on every platform.
    """
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if len({c.size for c in cols}) > 1:
        raise DomainError("columns must have equal length")
    if len(header) != len(cols):
        raise DomainError("header and column count differ")
    path = Path(path)
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join(FLOAT_FORMAT % v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def read_table(path, header=None, sorted_first=False):
    """
    Read a numeric CSV written by `write_table`.

    Parameters
    ----------
    path : str or Path
    header : sequence of str, optional
        Required column names; a mismatch raises `DomainError`.
    sorted_first : bool
        Require the first column to be strictly ascending.

    Returns
    -------
    list of ndarray
        One array per column.
    """
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text:
        raise DomainError(f"{path}: empty table")
    names = [h.strip() for h in text[0].split(",")]
    if header is not None and names != list(header):
        raise DomainError(f"{path}: expected header {','.join(header)!r}, got {text[0]!r}")
    rows = []
    for lineno, line in enumerate(text[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(names):
            raise DomainError(f"{path}:{lineno}: expected {len(names)} values")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: {exc}") from None
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    if sorted_first and data.shape[0] > 1 and np.any(np.diff(data[:, 0]) <= 0.0):
        raise DomainError(f"{path}: first column must be strictly ascending")
    return [data[:, i].copy() for i in range(len(names))]


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    return Path(path)
