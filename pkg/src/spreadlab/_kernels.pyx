# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels in ``_pykernels``.

Signatures and results match the Python fallback exactly; see that module
for the contracts.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t
from libc.math cimport INFINITY

cnp.import_array()


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline int _pc(uint64_t x) nogil:
    return __builtin_popcountll(x)


cdef inline uint64_t _hash(uint64_t x) nogil:
    x ^= x >> 33
    x *= <uint64_t>0xff51afd7ed558ccd
    x ^= x >> 33
    x *= <uint64_t>0xc4ceb9fe1a85ec53
    x ^= x >> 33
    return x


def popcount(a):
    return np.bitwise_count(np.asarray(a, dtype=np.uint64)).astype(np.int64)


def first_subset_index(masks_in):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] arr = np.ascontiguousarray(masks_in, dtype=np.uint64)
    cdef uint64_t[::1] masks = arr
    cdef Py_ssize_t n = masks.shape[0]
    out_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    if n == 0:
        return out_arr
    cdef Py_ssize_t cap = 1
    while cap < 2 * n + 2:
        cap <<= 1
    keys_arr = np.zeros(cap, dtype=np.uint64)
    vals_arr = np.full(cap, -1, dtype=np.int64)
    cdef uint64_t[::1] keys = keys_arr
    cdef int64_t[::1] vals = vals_arr
    cdef uint64_t cmask = <uint64_t>(cap - 1)
    cdef Py_ssize_t i, j, slot
    cdef uint64_t d, sub
    cdef int pc, minpop = 64
    cdef int64_t best, f
    with nogil:
        for i in range(n):
            d = masks[i]
            pc = _pc(d)
            if pc < minpop:
                minpop = pc
            slot = <Py_ssize_t>(_hash(d) & cmask)
            while vals[slot] != -1 and keys[slot] != d:
                slot = (slot + 1) & <Py_ssize_t>cmask
            if vals[slot] == -1:
                keys[slot] = d
                vals[slot] = i
        for j in range(n):
            d = masks[j]
            slot = <Py_ssize_t>(_hash(d) & cmask)
            while keys[slot] != d or vals[slot] == -1:
                slot = (slot + 1) & <Py_ssize_t>cmask
            f = vals[slot]
            if f < j:
                out[j] = out[f]
                continue
            pc = _pc(d)
            best = j
            if pc < 62 and ((<int64_t>1) << pc) <= j + 1:
                sub = d
                while True:
                    if _pc(sub) >= minpop:
                        slot = <Py_ssize_t>(_hash(sub) & cmask)
                        while vals[slot] != -1:
                            if keys[slot] == sub:
                                if vals[slot] < best:
                                    best = vals[slot]
                                break
                            slot = (slot + 1) & <Py_ssize_t>cmask
                    if sub == 0:
                        break
                    sub = (sub - 1) & d
            else:
                for i in range(j):
                    if masks[i] & ~d == 0:
                        best = i
                        break
            out[j] = best
    return out_arr


def upset_profile(gens_in, int n):
    cdef Py_ssize_t size = (<Py_ssize_t>1) << n
    up_arr = np.zeros(size, dtype=np.uint8)
    cdef cnp.uint8_t[::1] up = up_arr
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] garr = np.ascontiguousarray(gens_in, dtype=np.uint64)
    cdef uint64_t[::1] gens = garr
    out_arr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t t, g, base, j
    cdef int b
    cdef Py_ssize_t bit
    with nogil:
        for g in range(gens.shape[0]):
            up[<Py_ssize_t>gens[g]] = 1
        for b in range(n):
            bit = (<Py_ssize_t>1) << b
            base = 0
            while base < size:
                for j in range(base, base + bit):
                    up[j + bit] |= up[j]
                base += 2 * bit
        for t in range(size):
            if up[t]:
                out[_pc(<uint64_t>t)] += 1
    return out_arr


def union_profile(gens_in, int n):
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] garr = np.ascontiguousarray(gens_in, dtype=np.uint64)
    cdef uint64_t[::1] gens = garr
    cdef Py_ssize_t k = gens.shape[0]
    cdef Py_ssize_t size = (<Py_ssize_t>1) << k
    un_arr = np.zeros(size, dtype=np.uint64)
    cdef uint64_t[::1] un = un_arr
    out_arr = np.zeros(n + 1, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t s, low
    cdef int lb
    with nogil:
        for s in range(1, size):
            low = s & (-s)
            lb = _pc(<uint64_t>(low - 1))
            un[s] = un[s ^ low] | gens[lb]
            if _pc(<uint64_t>s) & 1:
                out[_pc(un[s])] += 1
            else:
                out[_pc(un[s])] -= 1
    return out_arr


def axial3_dp(w_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] warr = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[:, :, ::1] w = warr
    cdef int n = warr.shape[0]
    cdef Py_ssize_t side = (<Py_ssize_t>1) << n
    f_arr = np.full(side * side, INFINITY)
    cdef double[::1] f = f_arr
    cdef Py_ssize_t full = side - 1
    cdef Py_ssize_t m2, m3, nm2, nm3
    cdef int i, j, k
    cdef double best, cand, target
    f[full * side + full] = 0.0
    with nogil:
        for i in range(n - 1, -1, -1):
            for m2 in range(side):
                if _pc(<uint64_t>m2) != i:
                    continue
                for m3 in range(side):
                    if _pc(<uint64_t>m3) != i:
                        continue
                    best = INFINITY
                    for j in range(n):
                        if (m2 >> j) & 1:
                            continue
                        nm2 = (m2 | ((<Py_ssize_t>1) << j)) * side
                        for k in range(n):
                            if (m3 >> k) & 1:
                                continue
                            cand = w[i, j, k] + f[nm2 + (m3 | ((<Py_ssize_t>1) << k))]
                            if cand < best:
                                best = cand
                    f[m2 * side + m3] = best
    js_arr = np.empty(n, dtype=np.int64)
    ks_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] js = js_arr
    cdef int64_t[::1] ks = ks_arr
    cdef bint done
    m2 = 0
    m3 = 0
    for i in range(n):
        target = f[m2 * side + m3]
        done = False
        for j in range(n):
            if (m2 >> j) & 1:
                continue
            nm2 = m2 | ((<Py_ssize_t>1) << j)
            for k in range(n):
                if (m3 >> k) & 1:
                    continue
                nm3 = m3 | ((<Py_ssize_t>1) << k)
                if w[i, j, k] + f[nm2 * side + nm3] == target:
                    js[i] = j
                    ks[i] = k
                    m2 = nm2
                    m3 = nm3
                    done = True
                    break
            if done:
                break
    return float(f[0]), js_arr, ks_arr


def hungarian(cost_in):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] carr = np.ascontiguousarray(cost_in, dtype=np.float64)
    cdef double[:, ::1] a = carr
    cdef Py_ssize_t n = carr.shape[0]
    u_arr = np.zeros(n + 1)
    v_arr = np.zeros(n + 1)
    p_arr = np.zeros(n + 1, dtype=np.int64)
    way_arr = np.zeros(n + 1, dtype=np.int64)
    minv_arr = np.empty(n + 1)
    used_arr = np.empty(n + 1, dtype=np.uint8)
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef int64_t[::1] p = p_arr
    cdef int64_t[::1] way = way_arr
    cdef double[::1] minv = minv_arr
    cdef cnp.uint8_t[::1] used = used_arr
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur
    with nogil:
        for i in range(1, n + 1):
            p[0] = i
            j0 = 0
            for j in range(n + 1):
                minv[j] = INFINITY
                used[j] = 0
            while True:
                used[j0] = 1
                i0 = p[j0]
                delta = INFINITY
                j1 = 0
                for j in range(1, n + 1):
                    if not used[j]:
                        cur = a[i0 - 1, j - 1] - u[i0] - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                        if minv[j] < delta:
                            delta = minv[j]
                            j1 = j
                for j in range(n + 1):
                    if used[j]:
                        u[p[j]] += delta
                        v[j] -= delta
                    else:
                        minv[j] -= delta
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
    return col_of_row, u_arr[1:].copy(), v_arr[1:].copy()
