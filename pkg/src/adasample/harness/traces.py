"""CSV trace, iterate and summary files.

Floats are written with 17 significant digits so a trace round-trips
exactly; files are UTF-8 with LF line endings.
"""

import csv
import math

import numpy as np

TRACE_COLUMNS = [
    "k", "sample_size", "alpha", "L", "eff_evals", "f_error", "grad_inf",
    "angle_deg", "beta", "ip_lhs", "ip_rhs", "orth_lhs", "orth_rhs", "branch",
]

ORACLE_COLUMNS = [
    "k", "sample_size", "beta", "s_min_inner", "s_min_norm", "angle_deg",
    "exact_ip_lhs", "exact_orth_lhs", "exact_norm_lhs", "rho", "tan_bound",
]


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.17g}"
    return str(value)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_rows(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def trace_rows(trace):
    for r in trace:
        yield (r.k, r.sample_size, r.alpha, r.l_k, r.eff_evals, r.f_error, r.grad_inf,
               r.angle_deg, r.beta, r.ip_lhs, r.ip_rhs, r.orth_lhs, r.orth_rhs, r.branch)


def write_trace(path, trace):
    write_rows(path, TRACE_COLUMNS, trace_rows(trace))


def read_trace(path):
    """Rows as dicts with numeric columns converted to int/float."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rec = {}
            for key, val in row.items():
                if key == "branch":
                    rec[key] = val
                elif key in ("k", "sample_size"):
                    rec[key] = int(val)
                else:
                    rec[key] = float(val)
            out.append(rec)
    return out


def write_iterates(path, iterates):
    """``iterates`` yields (k, sample_size, x) triples."""
    rows = []
    d = None
    for k, m, x in iterates:
        d = len(x)
        rows.append([k, m, *map(float, x)])
    header = ["k", "sample_size"] + [f"x{j}" for j in range(d or 0)]
    write_rows(path, header, rows)


def read_iterates(path):
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out.append((int(row[0]), int(row[1]), np.array([float(v) for v in row[2:]])))
    return out
