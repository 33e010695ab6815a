"""Dataset ingestion (LIBSVM text) and the synthetic classification generator."""

import numpy as np
from scipy import sparse

from ..errors import LibsvmParseError
from ..objective import Dataset
from ..rng import SYNTHETIC, RngStream


def parse_libsvm(path, n_features=None) -> Dataset:
    """Read ``label idx:val ...`` lines with 1-based indices into a CSR dataset.

    Positive labels map to +1, everything else to -1.  Blank lines and
    ``#`` comments are skipped.
    """
    labels, data, indices, indptr = [], [], [], [0]
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                label = float(tokens[0])
            except ValueError:
                raise LibsvmParseError(f"bad label {tokens[0]!r}", lineno) from None
            if not np.isfinite(label):
                raise LibsvmParseError("non-finite label", lineno)
            labels.append(1.0 if label > 0 else -1.0)
            seen = set()
            for tok in tokens[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise LibsvmParseError(f"expected idx:val, got {tok!r}", lineno)
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise LibsvmParseError(f"malformed pair {tok!r}", lineno) from None
                if idx < 1:
                    raise LibsvmParseError(f"index {idx} is not 1-based", lineno)
                if not np.isfinite(val):
                    raise LibsvmParseError(f"non-finite value in {tok!r}", lineno)
                if idx in seen:
                    raise LibsvmParseError(f"duplicate index {idx}", lineno)
                seen.add(idx)
                indices.append(idx - 1)
                data.append(val)
            indptr.append(len(indices))
    if not labels:
        raise LibsvmParseError("no samples", 0)
    d_seen = max(indices) + 1 if indices else 1
    d = d_seen if n_features is None else int(n_features)
    if d < d_seen:
        raise LibsvmParseError(f"index {d_seen} exceeds n_features={d}", 0)
    X = sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), d),
    )
    return Dataset(X, np.asarray(labels))


def write_libsvm(dataset: Dataset, path) -> None:
    """Inverse of :func:`parse_libsvm`; values use 17 significant digits."""
    X = sparse.csr_matrix(dataset.features)
    X.sort_indices()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(X.shape[0]):
            a, b = X.indptr[i], X.indptr[i + 1]
            pairs = " ".join(
                f"{j + 1}:{v:.17g}" for j, v in zip(X.indices[a:b], X.data[a:b]) if v != 0
            )
            label = "+1" if dataset.labels[i] > 0 else "-1"
            fh.write(f"{label} {pairs}\n" if pairs else f"{label}\n")


def gen_synthetic(n, d, flip_prob=0.1, seed=0) -> Dataset:
    """Gaussian features, labels from a planted Gaussian direction, random flips."""
    if n < 1 or d < 1:
        raise ValueError("need N >= 1 and d >= 1")
    if not 0 <= flip_prob < 0.5:
        raise ValueError("flip_prob must lie in [0, 0.5)")
    gen = RngStream(seed).substream(SYNTHETIC).generator
    w = gen.standard_normal(d)
    X = gen.standard_normal((n, d))
    z = np.where(X @ w >= 0, 1.0, -1.0)
    flips = gen.random(n) < flip_prob
    z[flips] = -z[flips]
    return Dataset(X, z)
