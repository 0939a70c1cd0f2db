"""File formats: dense matrices (CSV or raw float64), JSON points, CSV tables."""
import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import InputError

MAGIC = b"RFMAT1\x00\x00"


def write_matrix(path, a):
    """Write ``a`` as CSV (``.csv``) or raw little-endian float64 with a header.

    The binary header is the 8-byte magic, a little-endian uint32 rank and
    one uint64 per dimension, followed by row-major data.
    """
    path = Path(path)
    a = np.asarray(a, dtype="<f8")
    if path.suffix == ".csv":
        np.savetxt(path, np.atleast_2d(a), delimiter=",", fmt="%.17g")
        return path
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", a.ndim))
        fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        fh.write(np.ascontiguousarray(a).tobytes())
    return path


def read_matrix(path):
    path = Path(path)
    if path.suffix == ".csv":
        return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise InputError(f"{path}: not a matrix file")
        (ndim,) = struct.unpack("<I", fh.read(4))
        shape = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != int(np.prod(shape)):
        raise InputError(f"{path}: truncated data")
    return data.reshape(shape).astype(float)


def read_matrix_stack(path):
    """Read a list of matrices from a directory (sorted by name) or one stacked file."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.suffix in (".csv", ".bin"))
        if not files:
            raise InputError(f"{path}: no matrix files")
        return [read_matrix(p) for p in files]
    a = read_matrix(path)
    if a.ndim == 3:
        return list(a)
    # a CSV stack of m square matrices concatenated vertically
    n = a.shape[1]
    if a.shape[0] % n:
        raise InputError(f"{path}: {a.shape[0]} rows is not a multiple of {n}")
    return [a[i : i + n] for i in range(0, a.shape[0], n)]


def fmt(x):
    """Number formatting that round-trips exactly; NaN/None become empty cells."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(c) for c in row])
    return Path(path)


def read_csv(path):
    """Read a numeric CSV into ``{column: float array}`` (empty cells become NaN)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = [[] for _ in header]
        for row in reader:
            for c, cell in zip(cols, row):
                c.append(float(cell) if cell != "" else math.nan)
    return {h: np.array(c) for h, c in zip(header, cols)}


def _default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")
    return Path(path)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def sanitize(x):
    """Replace non-finite floats by None so the result is strict JSON."""
    if isinstance(x, dict):
        return {k: sanitize(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [sanitize(v) for v in x]
    if isinstance(x, (float, np.floating)) and not math.isfinite(x):
        return None
    return x
