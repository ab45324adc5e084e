"""Hot integer kernels, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature.  The active
backend is chosen once at import time: set ``FEWBITS_DISABLE_NUMBA=1`` to
force the numpy path (also used automatically when numba is missing).
Both backends are always importable as ``numba_impl`` / ``numpy_impl`` so
tests and the benchmark can compare them directly.

All kernels work on ``uint64`` arrays and assume products fit in 64 bits;
callers are responsible for that range check.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_DISABLED = os.environ.get("FEWBITS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not _DISABLED

# largest exponent sum handled by the batched multiply (two 32-bit operands)
MAX_BATCH_BITS = 32
_BATCH_COLS = 2 * MAX_BATCH_BITS + 2


# --------------------------------------------------------------------------
# numpy backend
# --------------------------------------------------------------------------

def _np_popcount(values):
    return np.bitwise_count(np.asarray(values, dtype=np.uint64)).astype(np.int64)


def _np_pair_search(avals, bvals, k, limit, box, mod4):
    """Indices (ia, ib) of pairs with popcount(a*b) == k.

    ``box`` False: require a*b < limit, bvals sorted ascending so the valid
    b's form a prefix.  ``box`` True: every pair is a candidate.
    ``mod4`` True: additionally require a == b (mod 4).
    """
    out_a = []
    out_b = []
    lim = np.uint64(limit) if not box else np.uint64(0)
    for ia in range(avals.shape[0]):
        a = avals[ia]
        if box:
            cut = bvals.shape[0]
        else:
            # a * b < limit  <=>  b <= (limit - 1) // a
            cut = int(np.searchsorted(bvals, (lim - np.uint64(1)) // a, side="right"))
            if cut == 0:
                break
        bs = bvals[:cut]
        prods = bs * a
        hit = np.bitwise_count(prods) == k
        if mod4:
            hit &= (bs & np.uint64(3)) == (a & np.uint64(3))
        idx = np.flatnonzero(hit)
        if idx.size:
            out_a.append(np.full(idx.size, ia, dtype=np.int64))
            out_b.append(idx.astype(np.int64))
    if not out_a:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty.copy()
    return np.concatenate(out_a), np.concatenate(out_b)


def _np_square_search(start, stop, k):
    odd = np.arange(start | 1, stop, 2, dtype=np.uint64)
    return odd[np.bitwise_count(odd * odd) == k]


def _np_collapse_batch(exps, sizes):
    """Per-row (popcount of sum, spread) for padded exponent rows."""
    n, width = exps.shape
    mask = np.arange(width)[None, :] < sizes[:, None]
    terms = np.where(mask, np.left_shift(np.uint64(1), exps.astype(np.uint64)), np.uint64(0))
    totals = terms.sum(axis=1, dtype=np.uint64)
    big = np.iinfo(np.int64).max
    lo = np.where(mask, exps, big).min(axis=1)
    hi = np.where(mask, exps, -1).max(axis=1)
    return np.bitwise_count(totals).astype(np.int64), (hi - lo).astype(np.int64)


def _np_bits_of(values):
    shifts = np.arange(MAX_BATCH_BITS, dtype=np.uint64)
    return ((values[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.int64)


def _np_sparse_mul_batch(avals, bvals):
    """Products by pairwise exponent sums then carry resolution.

    Returns an int8 bit matrix, column e holding bit e of each product.
    """
    abits = _np_bits_of(avals)
    bbits = _np_bits_of(bvals)
    counts = np.zeros((avals.shape[0], _BATCH_COLS), dtype=np.int64)
    for i in range(MAX_BATCH_BITS):
        counts[:, i:i + MAX_BATCH_BITS] += abits[:, i:i + 1] * bbits
    return _np_resolve_carries(counts)


def _np_sparse_add_batch(avals, bvals):
    counts = np.zeros((avals.shape[0], _BATCH_COLS), dtype=np.int64)
    counts[:, :MAX_BATCH_BITS] = _np_bits_of(avals) + _np_bits_of(bvals)
    return _np_resolve_carries(counts)


def _np_resolve_carries(counts):
    bits = np.zeros(counts.shape, dtype=np.int8)
    carry = np.zeros(counts.shape[0], dtype=np.int64)
    for col in range(counts.shape[1]):
        c = counts[:, col] + carry
        bits[:, col] = c & 1
        carry = c >> 1
    return bits


numpy_impl = SimpleNamespace(
    name="numpy",
    popcount=_np_popcount,
    pair_search=_np_pair_search,
    square_search=_np_square_search,
    collapse_batch=_np_collapse_batch,
    sparse_mul_batch=_np_sparse_mul_batch,
    sparse_add_batch=_np_sparse_add_batch,
)


# --------------------------------------------------------------------------
# numba backend
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _popcount64(x):
        x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
        x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
        x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
        return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)

    @njit(cache=True)
    def _nb_popcount(values):
        out = np.empty(values.shape[0], dtype=np.int64)
        for i in range(values.shape[0]):
            out[i] = _popcount64(values[i])
        return out

    @njit(cache=True)
    def _nb_pair_scan(avals, bvals, k, limit, box, mod4, out_a, out_b):
        # fills out_a/out_b when they are large enough; always returns the hit count
        n = 0
        cap = out_a.shape[0]
        lim = np.uint64(limit)
        three = np.uint64(3)
        for ia in range(avals.shape[0]):
            a = avals[ia]
            am = a & three
            # compare against the quotient so a*b never wraps
            bmax = (lim - np.uint64(1)) // a
            if not box and bvals[0] > bmax:
                break
            for ib in range(bvals.shape[0]):
                b = bvals[ib]
                if not box and b > bmax:
                    break
                p = a * b
                if mod4 and (b & three) != am:
                    continue
                if _popcount64(p) == k:
                    if n < cap:
                        out_a[n] = ia
                        out_b[n] = ib
                    n += 1
        return n

    def _nb_pair_search(avals, bvals, k, limit, box, mod4):
        avals = np.ascontiguousarray(avals, dtype=np.uint64)
        bvals = np.ascontiguousarray(bvals, dtype=np.uint64)
        if avals.shape[0] == 0 or bvals.shape[0] == 0:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty.copy()
        limit = np.uint64(limit if not box else 0)
        out_a = np.empty(4096, dtype=np.int64)
        out_b = np.empty(4096, dtype=np.int64)
        n = _nb_pair_scan(avals, bvals, k, limit, box, mod4, out_a, out_b)
        if n <= out_a.shape[0]:
            return out_a[:n].copy(), out_b[:n].copy()
        out_a = np.empty(n, dtype=np.int64)
        out_b = np.empty(n, dtype=np.int64)
        _nb_pair_scan(avals, bvals, k, limit, box, mod4, out_a, out_b)
        return out_a, out_b

    @njit(cache=True)
    def _nb_square_count(start, stop, k, out):
        n = 0
        a = start | np.uint64(1)
        while a < stop:
            if _popcount64(a * a) == k:
                if n < out.shape[0]:
                    out[n] = a
                n += 1
            a += np.uint64(2)
        return n

    def _nb_square_search(start, stop, k):
        start, stop = np.uint64(start), np.uint64(stop)
        n = _nb_square_count(start, stop, k, np.empty(0, dtype=np.uint64))
        out = np.empty(n, dtype=np.uint64)
        _nb_square_count(start, stop, k, out)
        return out

    @njit(cache=True)
    def _nb_collapse_batch(exps, sizes):
        n = exps.shape[0]
        svals = np.empty(n, dtype=np.int64)
        spread = np.empty(n, dtype=np.int64)
        for r in range(n):
            total = np.uint64(0)
            lo = exps[r, 0]
            hi = exps[r, 0]
            for c in range(sizes[r]):
                e = exps[r, c]
                total += np.uint64(1) << np.uint64(e)
                lo = min(lo, e)
                hi = max(hi, e)
            svals[r] = _popcount64(total)
            spread[r] = hi - lo
        return svals, spread

    @njit(cache=True)
    def _nb_resolve_row(counts, bits, r):
        carry = 0
        for col in range(counts.shape[0]):
            c = counts[col] + carry
            bits[r, col] = c & 1
            carry = c >> 1

    @njit(cache=True)
    def _nb_sparse_mul_batch(avals, bvals):
        n = avals.shape[0]
        ncols = 2 * 32 + 2
        bits = np.zeros((n, ncols), dtype=np.int8)
        counts = np.zeros(ncols, dtype=np.int64)
        one = np.uint64(1)
        for r in range(n):
            counts[:] = 0
            a = avals[r]
            b = bvals[r]
            for i in range(32):
                if (a >> np.uint64(i)) & one:
                    for j in range(32):
                        if (b >> np.uint64(j)) & one:
                            counts[i + j] += 1
            _nb_resolve_row(counts, bits, r)
        return bits

    @njit(cache=True)
    def _nb_sparse_add_batch(avals, bvals):
        n = avals.shape[0]
        ncols = 2 * 32 + 2
        bits = np.zeros((n, ncols), dtype=np.int8)
        counts = np.zeros(ncols, dtype=np.int64)
        one = np.uint64(1)
        for r in range(n):
            counts[:] = 0
            for i in range(32):
                counts[i] = ((avals[r] >> np.uint64(i)) & one) + ((bvals[r] >> np.uint64(i)) & one)
            _nb_resolve_row(counts, bits, r)
        return bits

    numba_impl = SimpleNamespace(
        name="numba",
        popcount=lambda values: _nb_popcount(np.ascontiguousarray(values, dtype=np.uint64)),
        pair_search=_nb_pair_search,
        square_search=_nb_square_search,
        collapse_batch=lambda exps, sizes: _nb_collapse_batch(
            np.ascontiguousarray(exps, dtype=np.int64), np.ascontiguousarray(sizes, dtype=np.int64)
        ),
        sparse_mul_batch=lambda a, b: _nb_sparse_mul_batch(
            np.ascontiguousarray(a, dtype=np.uint64), np.ascontiguousarray(b, dtype=np.uint64)
        ),
        sparse_add_batch=lambda a, b: _nb_sparse_add_batch(
            np.ascontiguousarray(a, dtype=np.uint64), np.ascontiguousarray(b, dtype=np.uint64)
        ),
    )
else:  # pragma: no cover
    numba_impl = None


active = numba_impl if USE_NUMBA else numpy_impl


def backend_name() -> str:
    return active.name
