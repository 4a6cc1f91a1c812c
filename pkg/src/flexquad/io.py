"""Plain-text matrix/vector files, CSV traces and JSON run summaries.

Matrix files hold the size ``n`` on the first line followed by ``n`` rows of
``n`` whitespace-separated numbers; vector files hold ``n`` then ``n`` numbers
(one per line or space-separated). Floats are written with ``'.17g'`` so a
round trip is exact and repeated runs give byte-identical files.
"""
import csv
import io
import json
import math

import numpy as np

from .exceptions import InvalidArgumentError
from .linops import ProblemInstance

CSV_FIELDS = ("k", "f_gap", "grad_norm_sq", "weighted_gnorm_sq", "m_k", "contraction_ratio")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _read_numbers(path):
    try:
        with open(path) as fh:
            tokens = fh.read().split()
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc}") from None
    if not tokens:
        raise InvalidArgumentError(f"{path} is empty")
    try:
        n = int(tokens[0])
        values = np.array([float(t) for t in tokens[1:]])
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: {exc}") from None
    if n < 1:
        raise InvalidArgumentError(f"{path}: size must be positive, got {n}")
    return n, values


def read_matrix(path):
    n, values = _read_numbers(path)
    if values.size != n * n:
        raise InvalidArgumentError(f"{path}: expected {n * n} entries for a {n}x{n} matrix, got {values.size}")
    return values.reshape(n, n)


def read_vector(path):
    n, values = _read_numbers(path)
    if values.size != n:
        raise InvalidArgumentError(f"{path}: expected {n} entries, got {values.size}")
    return values


def write_matrix(path, A):
    A = np.asarray(A, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{A.shape[0]}\n")
        for row in A:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def write_vector(path, v):
    v = np.asarray(v, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{v.shape[0]}\n")
        fh.write("\n".join(_fmt(x) for x in v) + "\n")


def load_problem(matrix_path, rhs_path, solution_path=None):
    A = read_matrix(matrix_path)
    b = read_vector(rhs_path)
    if b.shape[0] != A.shape[0]:
        raise InvalidArgumentError(f"right-hand side has length {b.shape[0]}, matrix is {A.shape[0]}x{A.shape[0]}")
    zs = read_vector(solution_path) if solution_path else None
    return ProblemInstance(A, b, known_solution=zs)


def trace_csv(result):
    """CSV text of a run trace: one row per record, ``k = 0`` included."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for rec in result.records:
        writer.writerow([_fmt(getattr(rec, f)) for f in CSV_FIELDS])
    return buf.getvalue()


def write_trace_csv(path, result):
    with open(path, "w", newline="") as fh:
        fh.write(trace_csv(result))


def _clean(x):
    # JSON has no inf/nan
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def run_summary(result, verification=None):
    last = result.records[-1]
    out = {
        "status": result.status,
        "iterations": result.iterations,
        "final_f_gap": last.f_gap,
        "final_grad_norm_sq": last.grad_norm_sq,
        "bounds": result.bounds.to_json() if result.bounds is not None else None,
        "config": result.config.to_json() if result.config is not None else None,
    }
    if result.message:
        out["message"] = result.message
    if verification is not None:
        out["verification"] = {"passed": verification.passed, "checks": verification.to_json()}
    return _clean(out)


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
