"""Pure-Python / numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
Masks are ``uint64`` arrays, so ground sets are limited to 64 points.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64


def popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(a, dtype=_U64)).astype(np.int64)


def first_subset_index(masks: np.ndarray) -> np.ndarray:
    """For each ``j`` the smallest ``i`` with ``masks[i] ⊆ masks[j]``."""
    masks = np.ascontiguousarray(masks, dtype=_U64)
    n = len(masks)
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    first: dict[int, int] = {}
    vals = [int(x) for x in masks]
    for i, m in enumerate(vals):
        first.setdefault(m, i)
    minpop = min(m.bit_count() for m in vals)
    for j, d in enumerate(vals):
        f = first[d]
        if f < j:
            out[j] = out[f]
            continue
        pc = d.bit_count()
        best = j
        if (1 << pc) <= j + 1:
            sub = d
            while True:
                if sub.bit_count() >= minpop:
                    i = first.get(sub)
                    if i is not None and i < best:
                        best = i
                if sub == 0:
                    break
                sub = (sub - 1) & d
        else:
            for i in range(j):
                if vals[i] & ~d == 0:
                    best = i
                    break
        out[j] = best
    return out


def upset_profile(gens: np.ndarray, n: int) -> np.ndarray:
    """Number of sets of each size in the up-closure of ``gens`` within 2^[n]."""
    size = 1 << n
    up = np.zeros(size, dtype=bool)
    up[np.asarray(gens, dtype=np.int64)] = True
    for b in range(n):
        view = up.reshape(-1, 2, 1 << b)
        view[:, 1, :] |= view[:, 0, :]
    pops = popcount(np.arange(size, dtype=_U64))
    return np.bincount(pops[up], minlength=n + 1).astype(np.int64)


def union_profile(gens: np.ndarray, n: int) -> np.ndarray:
    """Inclusion-exclusion coefficients: ``a[k] = Σ (-1)^{|I|+1}`` over nonempty
    index sets ``I`` whose union has size ``k``."""
    unions = np.zeros(1, dtype=_U64)
    signs = np.full(1, -1, dtype=np.int64)
    for g in np.asarray(gens, dtype=_U64):
        unions = np.concatenate([unions, unions | g])
        signs = np.concatenate([signs, -signs])
    pops = popcount(unions[1:])
    return np.bincount(pops, weights=signs[1:], minlength=n + 1).round().astype(np.int64)


def axial3_dp(w: np.ndarray):
    """Exact minimum 3-dimensional axial assignment by DP over mask pairs.

    Returns ``(value, js, ks)``: row ``i`` uses cell ``(i, js[i], ks[i])``;
    among optima the lexicographically least sequence of ``(j, k)`` is chosen.
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    n = w.shape[0]
    full = (1 << n) - 1
    masks = np.arange(1 << n)
    pops = popcount(masks.astype(_U64))
    layers = [masks[pops == i] for i in range(n + 1)]
    pos = np.empty(1 << n, dtype=np.int64)
    for layer in layers:
        pos[layer] = np.arange(len(layer))
    tables: list[np.ndarray] = [None] * (n + 1)  # type: ignore[list-item]
    tables[n] = np.zeros((1, 1))
    for i in range(n - 1, -1, -1):
        cur = layers[i]
        nxt = tables[i + 1]
        best = np.full((len(cur), len(cur)), np.inf)
        for j in range(n):
            has_j = (cur >> j) & 1
            rows = np.nonzero(has_j == 0)[0]
            if len(rows) == 0:
                continue
            nrows = pos[cur[rows] | (1 << j)]
            sub = nxt[nrows]
            for k in range(n):
                cols = np.nonzero(((cur >> k) & 1) == 0)[0]
                if len(cols) == 0:
                    continue
                ncols = pos[cur[cols] | (1 << k)]
                cand = w[i, j, k] + sub[:, ncols]
                blk = best[np.ix_(rows, cols)]
                best[np.ix_(rows, cols)] = np.minimum(blk, cand)
        tables[i] = best
    value = float(tables[0][0, 0])
    js = np.empty(n, dtype=np.int64)
    ks = np.empty(n, dtype=np.int64)
    m2 = m3 = 0
    for i in range(n):
        target = tables[i][pos[m2], pos[m3]]
        nxt = tables[i + 1]
        done = False
        for j in range(n):
            if m2 >> j & 1:
                continue
            for k in range(n):
                if m3 >> k & 1:
                    continue
                if w[i, j, k] + nxt[pos[m2 | 1 << j], pos[m3 | 1 << k]] == target:
                    js[i], ks[i] = j, k
                    m2 |= 1 << j
                    m3 |= 1 << k
                    done = True
                    break
            if done:
                break
    assert m2 == full and m3 == full
    return value, js, ks


def hungarian(cost: np.ndarray):
    """Min-cost perfect matching of a square matrix (shortest augmenting paths).

    Returns ``(col_of_row, u, v)`` with ``u[i] + v[j] <= cost[i, j]`` and
    equality on the matching.
    """
    a = np.ascontiguousarray(cost, dtype=np.float64)
    n = a.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j (1-based)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = a[i0 - 1] - u[i0] - v[1:]
            upd = free & (cur < minv[1:])
            minv[1:][upd] = cur[upd]
            way[1:][upd] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            usedc = used.copy()
            u[p[usedc]] += delta
            v[usedc] -= delta
            minv[~usedc] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        col_of_row[p[j] - 1] = j - 1
    return col_of_row, u[1:].copy(), v[1:].copy()
