"""Hot inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports cleanly and the environment
variable ``ADASAMPLE_DISABLE_NUMBA`` is unset (or ``0``).  Both paths share
the same reduction order: rows are summed sequentially inside chunks of
``CHUNK`` rows and the chunk partials are combined sequentially, so results
do not depend on how many rows a batch has beyond that fixed schedule.
"""

import os

import numpy as np

CHUNK = 1024


def _numba_requested():
    flag = os.environ.get("ADASAMPLE_DISABLE_NUMBA", "").strip().lower()
    return flag in ("", "0", "false", "no")


try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None

HAVE_NUMBA = nb is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()

njit_kwargs = {"nogil": True, "cache": True, "fastmath": False}


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _np_row_mean(G):
    m = G.shape[0]
    total = np.zeros(G.shape[1:], dtype=np.float64)
    for start in range(0, m, CHUNK):
        total += G[start:start + CHUNK].sum(axis=0)
    return total / m


def _np_moment_sums(G, pivot, mean):
    """Return (mean_inner, sum_inner_dev_sq, sum_orth_sq, sum_grad_dev_sq)."""
    m = G.shape[0]
    pnsq = float(pivot @ pivot)
    s = G @ pivot
    mean_inner = float(_np_row_mean(s[:, None])[0])
    orth = G - np.outer(s / pnsq, pivot)
    dev = G - mean
    sums = np.zeros(3)
    for start in range(0, m, CHUNK):
        stop = start + CHUNK
        sums[0] += np.sum((s[start:stop] - mean_inner) ** 2)
        sums[1] += np.sum(orth[start:stop] ** 2)
        sums[2] += np.sum(dev[start:stop] ** 2)
    return mean_inner, sums[0], sums[1], sums[2]


def _np_log1pexp_neg(t):
    # log(1 + exp(-t)), split on sign(t)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = np.log1p(np.exp(-t[pos]))
    tn = t[~pos]
    out[~pos] = -tn + np.log1p(np.exp(tn))
    return out


def _np_sigmoid_neg(t):
    # sigma(-t) = 1 / (1 + exp(t)), split on sign(t)
    out = np.empty_like(t)
    pos = t >= 0
    e = np.exp(-t[pos])
    out[pos] = e / (1.0 + e)
    out[~pos] = 1.0 / (1.0 + np.exp(t[~pos]))
    return out


def _np_logistic_dense(X, z, idx, x, lam, want_grad):
    rows = X[idx]
    zi = z[idx]
    t = zi * (rows @ x)
    reg = 0.5 * lam * float(x @ x)
    values = _np_log1pexp_neg(t) + reg
    if not want_grad:
        return values, None
    coef = -zi * _np_sigmoid_neg(t)
    grads = coef[:, None] * rows + lam * x
    return values, grads


def _np_logistic_csr(data, indices, indptr, d, z, idx, x, lam, want_grad):
    m = idx.shape[0]
    t = np.empty(m)
    for k in range(m):
        i = idx[k]
        a, b = indptr[i], indptr[i + 1]
        t[k] = z[i] * float(data[a:b] @ x[indices[a:b]])
    reg = 0.5 * lam * float(x @ x)
    values = _np_log1pexp_neg(t) + reg
    if not want_grad:
        return values, None
    coef = -z[idx] * _np_sigmoid_neg(t)
    grads = np.tile(lam * x, (m, 1))
    for k in range(m):
        i = idx[k]
        a, b = indptr[i], indptr[i + 1]
        grads[k, indices[a:b]] += coef[k] * data[a:b]
    return values, grads


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @nb.njit(**njit_kwargs)
    def _nb_row_mean(G):
        m, d = G.shape
        total = np.zeros(d)
        part = np.zeros(d)
        for start in range(0, m, CHUNK):
            stop = min(start + CHUNK, m)
            part[:] = G[start]
            for i in range(start + 1, stop):
                for j in range(d):
                    part[j] += G[i, j]
            for j in range(d):
                total[j] += part[j]
        return total / m

    @nb.njit(**njit_kwargs)
    def _nb_moment_sums(G, pivot, mean):
        m, d = G.shape
        pnsq = 0.0
        for j in range(d):
            pnsq += pivot[j] * pivot[j]
        s = np.empty(m)
        for i in range(m):
            acc = 0.0
            for j in range(d):
                acc += G[i, j] * pivot[j]
            s[i] = acc
        total = 0.0
        for start in range(0, m, CHUNK):
            stop = min(start + CHUNK, m)
            part = s[start]
            for i in range(start + 1, stop):
                part += s[i]
            total += part
        mean_inner = total / m
        s_inner = 0.0
        s_orth = 0.0
        s_grad = 0.0
        for start in range(0, m, CHUNK):
            stop = min(start + CHUNK, m)
            p_inner = 0.0
            p_orth = 0.0
            p_grad = 0.0
            for i in range(start, stop):
                dv = s[i] - mean_inner
                p_inner += dv * dv
                c = s[i] / pnsq
                for j in range(d):
                    r = G[i, j] - c * pivot[j]
                    p_orth += r * r
                    e = G[i, j] - mean[j]
                    p_grad += e * e
            s_inner += p_inner
            s_orth += p_orth
            s_grad += p_grad
        return mean_inner, s_inner, s_orth, s_grad

    @nb.njit(**njit_kwargs)
    def _nb_log1pexp_neg(t):
        if t >= 0.0:
            return np.log1p(np.exp(-t))
        return -t + np.log1p(np.exp(t))

    @nb.njit(**njit_kwargs)
    def _nb_sigmoid_neg(t):
        if t >= 0.0:
            e = np.exp(-t)
            return e / (1.0 + e)
        return 1.0 / (1.0 + np.exp(t))

    @nb.njit(**njit_kwargs)
    def _nb_logistic_dense(X, z, idx, x, lam, want_grad):
        m = idx.shape[0]
        d = x.shape[0]
        xx = 0.0
        for j in range(d):
            xx += x[j] * x[j]
        reg = 0.5 * lam * xx
        values = np.empty(m)
        grads = np.empty((m, d)) if want_grad else np.empty((0, d))
        for k in range(m):
            i = idx[k]
            acc = 0.0
            for j in range(d):
                acc += X[i, j] * x[j]
            t = z[i] * acc
            values[k] = _nb_log1pexp_neg(t) + reg
            if want_grad:
                c = -z[i] * _nb_sigmoid_neg(t)
                for j in range(d):
                    grads[k, j] = c * X[i, j] + lam * x[j]
        return values, grads

    @nb.njit(**njit_kwargs)
    def _nb_logistic_csr(data, indices, indptr, d, z, idx, x, lam, want_grad):
        m = idx.shape[0]
        xx = 0.0
        for j in range(d):
            xx += x[j] * x[j]
        reg = 0.5 * lam * xx
        values = np.empty(m)
        grads = np.empty((m, d)) if want_grad else np.empty((0, d))
        for k in range(m):
            i = idx[k]
            a = indptr[i]
            b = indptr[i + 1]
            acc = 0.0
            for p in range(a, b):
                acc += data[p] * x[indices[p]]
            t = z[i] * acc
            values[k] = _nb_log1pexp_neg(t) + reg
            if want_grad:
                c = -z[i] * _nb_sigmoid_neg(t)
                for j in range(d):
                    grads[k, j] = lam * x[j]
                for p in range(a, b):
                    grads[k, indices[p]] += c * data[p]
        return values, grads


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def row_mean(G):
    G = np.ascontiguousarray(G, dtype=np.float64)
    if USE_NUMBA:
        return _nb_row_mean(G)
    return _np_row_mean(G)


def moment_sums(G, pivot, mean):
    G = np.ascontiguousarray(G, dtype=np.float64)
    pivot = np.ascontiguousarray(pivot, dtype=np.float64)
    mean = np.ascontiguousarray(mean, dtype=np.float64)
    if USE_NUMBA:
        return _nb_moment_sums(G, pivot, mean)
    return _np_moment_sums(G, pivot, mean)


def logistic_dense(X, z, idx, x, lam, want_grad=True):
    if USE_NUMBA:
        v, g = _nb_logistic_dense(X, z, idx, x, float(lam), want_grad)
        return v, (g if want_grad else None)
    return _np_logistic_dense(X, z, idx, x, float(lam), want_grad)


def logistic_csr(A, z, idx, x, lam, want_grad=True):
    args = (A.data, A.indices, A.indptr, A.shape[1], z, idx, x, float(lam), want_grad)
    if USE_NUMBA:
        v, g = _nb_logistic_csr(*args)
        return v, (g if want_grad else None)
    return _np_logistic_csr(*args)
