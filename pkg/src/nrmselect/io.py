"""Binary dataset container and sweep CSV files.

Dataset layout (all little-endian)::

    b"NRMD"  u16 version  u32 n  u32 p  u32 q
    n x f64  responses y
    n*p*q x f64  sensing matrices, each p x q row-major
"""

import csv
import io
import struct

import numpy as np

from .errors import DatasetFormatError
from .problem import Dataset

MAGIC = b"NRMD"
VERSION = 1
_HEADER = struct.Struct("<4sHIII")

CSV_COLUMNS = ("lambda", "certified_bound", "solved_rank", "final_gap", "objective", "seconds")


def dataset_to_bytes(data):
    header = _HEADER.pack(MAGIC, VERSION, data.n, data.p, data.q)
    return (header + data.response.astype("<f8").tobytes()
            + data.sensing.astype("<f8").tobytes())


def dataset_from_bytes(buf):
    if len(buf) < _HEADER.size:
        raise DatasetFormatError(
            f"file is {len(buf)} bytes, shorter than the {_HEADER.size}-byte header",
            field="header", offset=len(buf))
    magic, version, n, p, q = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}", field="magic", offset=0)
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}", field="version", offset=4)
    for name, value, off in (("n", n, 6), ("p", p, 10), ("q", q, 14)):
        if value == 0:
            raise DatasetFormatError(f"{name} must be positive", field=name, offset=off)
    body = len(buf) - _HEADER.size
    per_obs = 8 * (1 + p * q)
    if body != n * per_obs:
        if body % per_obs == 0:
            raise DatasetFormatError(
                f"header declares n={n} but the body holds {body // per_obs} observations",
                field="n", offset=6)
        raise DatasetFormatError(
            f"body is {body} bytes, expected {n * per_obs} for n={n}, p={p}, q={q}",
            field="body", offset=len(buf))
    y = np.frombuffer(buf, dtype="<f8", count=n, offset=_HEADER.size)
    X = np.frombuffer(buf, dtype="<f8", count=n * p * q, offset=_HEADER.size + 8 * n)
    return Dataset(X.reshape(n, p, q).astype(np.float64), y.astype(np.float64))


def save_dataset(data, path):
    with open(path, "wb") as fh:
        fh.write(dataset_to_bytes(data))


def load_dataset(path):
    with open(path, "rb") as fh:
        return dataset_from_bytes(fh.read())


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_sweep_csv(result, fh):
    """Write a :class:`~nrmselect.experiment.SweepResult` to an open text file.

    Leading ``#`` lines carry lambda_max, the closed-form sequence and the
    settings needed to re-derive per-row convergence.
    """
    for key, value in result.header_items():
        fh.write(f"# {key}={value}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in result.rows:
        w.writerow([_fmt(row.lam), _fmt(row.certified_bound), _fmt(row.solved_rank),
                    _fmt(row.final_gap), _fmt(row.objective), _fmt(row.seconds)])


def sweep_csv_text(result):
    buf = io.StringIO()
    write_sweep_csv(result, buf)
    return buf.getvalue()


def read_sweep_csv(fh):
    """Parse a sweep CSV; returns ``(header_dict, rows)``."""
    from .experiment import SweepRow

    header = {}
    lines = []
    for lineno, line in enumerate(fh, 1):
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
        elif line.strip():
            lines.append((lineno, line))
    if not lines:
        raise DatasetFormatError("missing CSV column header", field="columns")
    reader = csv.reader([ln for _, ln in lines])
    columns = tuple(next(reader))
    if columns != CSV_COLUMNS:
        raise DatasetFormatError(f"unexpected columns {columns}", field="columns",
                                 offset=lines[0][0])
    tol = float(header.get("gap_tolerance", "nan"))
    rows = []
    for (lineno, _), rec in zip(lines[1:], reader):
        try:
            lam, bound, rank, gap, obj, secs = rec
            gap_f, obj_f = float(gap), float(obj)
            rows.append(SweepRow(
                lam=float(lam),
                certified_bound=int(bound) if bound else None,
                solved_rank=int(rank),
                final_gap=gap_f,
                objective=obj_f,
                seconds=float(secs) if secs else None,
                converged=bool(gap_f <= tol * (1 + abs(obj_f))),
            ))
        except ValueError as exc:
            raise DatasetFormatError(f"bad CSV row: {exc}", field="row", offset=lineno) from None
    return header, rows
