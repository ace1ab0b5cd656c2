"""Counting kernels over entity neighbourhoods.

Every kernel exists twice: a numba version (``*_nb``) and a numpy version
(``*_np``).  The public wrappers dispatch on :data:`ctxpool._accel.USE_NUMBA`
unless a ``backend`` is passed explicitly.  Both paths must return identical
arrays; ``tests/test_kernels.py`` checks that.

Neighbourhoods are passed in CSR form (``indptr``, ``indices``) with sorted,
duplicate-free relation ids per row, plus an integer ``weights`` array giving
how many entities share the row.
"""

from itertools import combinations

import numpy as np

from . import _accel
from ._accel import njit
from .errors import CapacityError

if _accel.NUMBA_AVAILABLE:
    from numba import prange
    from numba import types as _nbtypes
    from numba.typed import Dict as _NbDict
else:  # pragma: no cover
    prange = range


# --------------------------------------------------------------------------
# subset codes
# --------------------------------------------------------------------------


class SubsetCodec:
    """Packs a sorted relation-id tuple of fixed size into one int64.

    With at most 63 relation ids a plain bitmask is used and any subset size
    fits.  Beyond that, ids are packed ``bits`` apart, which limits the size.
    """

    def __init__(self, num_ids, size):
        self.num_ids = int(num_ids)
        self.size = int(size)
        self.bitmask = self.num_ids <= 63
        self.bits = max(1, (self.num_ids - 1).bit_length())
        if not self.bitmask and self.size * self.bits > 63:
            raise CapacityError(
                f"cannot encode relation sets of size {self.size} over "
                f"{self.num_ids} relation ids (max size {63 // self.bits}); "
                "restrict the candidate set sizes"
            )

    @property
    def max_size(self):
        return self.num_ids if self.bitmask else 63 // self.bits

    def encode(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        if self.size == 0:
            return np.zeros(len(rows), dtype=np.int64)
        rows = rows.reshape(-1, self.size)
        if self.bitmask:
            return np.bitwise_or.reduce(np.left_shift(1, rows), axis=1)
        shifts = np.arange(self.size, dtype=np.int64) * self.bits
        return np.bitwise_or.reduce(np.left_shift(rows, shifts), axis=1)

    def decode(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty((len(codes), self.size), dtype=np.int64)
        if self.size == 0:
            return out
        if self.bitmask:
            ids = np.arange(self.num_ids, dtype=np.int64)
            hit = (codes[:, None] >> ids[None, :]) & 1
            rr, cc = np.nonzero(hit)
            out[:] = cc.reshape(len(codes), self.size)
            return out
        mask = (1 << self.bits) - 1
        for j in range(self.size):
            out[:, j] = (codes >> (j * self.bits)) & mask
        return out


# --------------------------------------------------------------------------
# k-subset counting
# --------------------------------------------------------------------------


@njit
def _count_ksubsets_nb(indptr, indices, weights, k, bitmask, bits):
    acc = _NbDict.empty(key_type=_nbtypes.int64, value_type=_nbtypes.int64)
    idx = np.empty(k, dtype=np.int64)
    one = np.int64(1)
    for g in range(len(indptr) - 1):
        lo = indptr[g]
        n = indptr[g + 1] - lo
        if n < k:
            continue
        w = weights[g]
        for j in range(k):
            idx[j] = j
        while True:
            code = np.int64(0)
            for j in range(k):
                rid = np.int64(indices[lo + idx[j]])
                if bitmask:
                    code |= one << rid
                else:
                    code |= rid << (bits * j)
            acc[code] = acc.get(code, 0) + w
            j = k - 1
            while j >= 0 and idx[j] == n - k + j:
                j -= 1
            if j < 0:
                break
            idx[j] += 1
            for m in range(j + 1, k):
                idx[m] = idx[m - 1] + 1
    codes = np.empty(len(acc), dtype=np.int64)
    counts = np.empty(len(acc), dtype=np.int64)
    i = 0
    for key, val in acc.items():
        codes[i] = key
        counts[i] = val
        i += 1
    return codes, counts


def _count_ksubsets_np(indptr, indices, weights, codec):
    k = codec.size
    chunks, chunk_w = [], []
    for g in range(len(indptr) - 1):
        row = indices[indptr[g]:indptr[g + 1]]
        if len(row) < k:
            continue
        combos = np.array(list(combinations(row.tolist(), k)), dtype=np.int64)
        chunks.append(codec.encode(combos))
        chunk_w.append(np.full(len(combos), weights[g], dtype=np.int64))
    if not chunks:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    codes, inverse = np.unique(np.concatenate(chunks), return_inverse=True)
    counts = np.bincount(inverse, weights=np.concatenate(chunk_w), minlength=len(codes))
    return codes, counts.astype(np.int64)


def count_ksubsets(indptr, indices, weights, num_ids, k, backend=None):
    """Count entities containing each realised ``k``-subset.

    Returns ``(codes, counts, codec)`` with ``codes`` sorted ascending.  Only
    subsets that occur inside at least one row are reported.
    """
    codec = SubsetCodec(num_ids, k)
    weights = np.asarray(weights, dtype=np.int64)
    if k == 0:
        total = int(weights.sum())
        if total == 0:
            return np.empty(0, np.int64), np.empty(0, np.int64), codec
        return np.zeros(1, np.int64), np.array([total], np.int64), codec
    use_nb = _pick(backend)
    if use_nb:
        codes, counts = _count_ksubsets_nb(
            np.asarray(indptr, np.int64), np.asarray(indices, np.int64),
            weights, k, codec.bitmask, codec.bits,
        )
        order = np.argsort(codes, kind="stable")
        codes, counts = codes[order], counts[order]
    else:
        codes, counts = _count_ksubsets_np(
            np.asarray(indptr, np.int64), np.asarray(indices, np.int64), weights, codec
        )
    return codes, counts, codec


# --------------------------------------------------------------------------
# relation co-occurrence
# --------------------------------------------------------------------------


@njit
def _cooccurrence_nb(indptr, indices, weights, num_ids):
    out = np.zeros((num_ids, num_ids), dtype=np.int64)
    for g in range(len(indptr) - 1):
        w = weights[g]
        lo = indptr[g]
        hi = indptr[g + 1]
        for a in range(lo, hi):
            ra = indices[a]
            for b in range(lo, hi):
                out[ra, indices[b]] += w
    return out


def _cooccurrence_np(indptr, indices, weights, num_ids):
    n_rows = len(indptr) - 1
    incidence = np.zeros((n_rows, num_ids), dtype=np.int64)
    rows = np.repeat(np.arange(n_rows), np.diff(indptr))
    incidence[rows, indices] = 1
    return (incidence * weights[:, None]).T @ incidence


def cooccurrence(indptr, indices, weights, num_ids, backend=None):
    """``out[a, b]`` = number of entities whose neighbourhood holds both a and b.

    The diagonal holds single-relation counts.
    """
    indptr = np.asarray(indptr, np.int64)
    indices = np.asarray(indices, np.int64)
    weights = np.asarray(weights, np.int64)
    if _pick(backend):
        return _cooccurrence_nb(indptr, indices, weights, int(num_ids))
    return _cooccurrence_np(indptr, indices, weights, int(num_ids))


# --------------------------------------------------------------------------
# superset counting over bitset rows
# --------------------------------------------------------------------------


@njit(parallel=True)
def _count_supersets_nb(rows, weights, queries):
    n_q = queries.shape[0]
    n_w = rows.shape[1]
    out = np.zeros(n_q, dtype=np.int64)
    for q in prange(n_q):
        total = 0
        for g in range(rows.shape[0]):
            ok = True
            for w in range(n_w):
                if rows[g, w] & queries[q, w] != queries[q, w]:
                    ok = False
                    break
            if ok:
                total += weights[g]
        out[q] = total
    return out


def _count_supersets_np(rows, weights, queries, chunk=256):
    out = np.empty(len(queries), dtype=np.int64)
    for start in range(0, len(queries), chunk):
        q = queries[start:start + chunk]
        hit = ((rows[None, :, :] & q[:, None, :]) == q[:, None, :]).all(axis=2)
        out[start:start + chunk] = hit @ weights
    return out


def count_supersets(rows, weights, queries, backend=None):
    """For each query bitset, total weight of rows that contain it."""
    rows = np.ascontiguousarray(rows, dtype=np.uint64)
    queries = np.ascontiguousarray(queries, dtype=np.uint64).reshape(-1, rows.shape[1])
    weights = np.asarray(weights, np.int64)
    if _pick(backend):
        return _count_supersets_nb(rows, weights, queries)
    return _count_supersets_np(rows, weights, queries)


def to_bitsets(indptr, indices, num_ids):
    """CSR rows to an ``(n_rows, n_words)`` uint64 bitset matrix."""
    n_words = max(1, (int(num_ids) + 63) // 64)
    n_rows = len(indptr) - 1
    out = np.zeros((n_rows, n_words), dtype=np.uint64)
    if len(indices):
        rows = np.repeat(np.arange(n_rows), np.diff(indptr))
        idx = np.asarray(indices, np.int64)
        bits = np.left_shift(np.uint64(1), (idx % 64).astype(np.uint64))
        np.bitwise_or.at(out, (rows, idx // 64), bits)
    return out


def _pick(backend):
    if backend is None:
        return _accel.USE_NUMBA
    if backend == "numba":
        if not _accel.NUMBA_AVAILABLE:  # pragma: no cover
            raise RuntimeError("numba backend requested but numba is not installed")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")
