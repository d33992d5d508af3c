# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled compute backend: Rips persistence pairs and CSR Dijkstra.

Algorithmically identical to ``_pure``; only the data structures differ
(sorted C++ vectors for reduction columns, array-based binary heap).
"""

from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.unordered_map cimport unordered_map
from libcpp.unordered_set cimport unordered_set
from libcpp.algorithm cimport sort as cpp_sort
from libc.math cimport INFINITY

import numpy as np
cimport numpy as cnp

from .errors import RipsBudgetError

cnp.import_array()

NAME = "compiled"

ctypedef unsigned long long u64
ctypedef pair[double, u64] Entry


cdef void _symdiff(vector[Entry]& a, vector[Entry]& b, vector[Entry]& out) noexcept nogil:
    # Symmetric difference of two (filtration, key)-sorted columns over Z/2.
    cdef size_t i = 0, j = 0
    out.clear()
    while i < a.size() and j < b.size():
        if a[i].second == b[j].second:
            i += 1
            j += 1
        elif a[i] < b[j]:
            out.push_back(a[i])
            i += 1
        else:
            out.push_back(b[j])
            j += 1
    while i < a.size():
        out.push_back(a[i])
        i += 1
    while j < b.size():
        out.push_back(b[j])
        j += 1


cdef int _find(vector[int]& parent, int x) noexcept nogil:
    cdef int root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


cdef void _common_neighbors(const long long[::1] indptr, const int[::1] nbr,
                            int* vs, int q1, vector[int]& out) noexcept nogil:
    # Intersect q1 sorted adjacency lists (q1 <= 3).
    cdef long long pos[3]
    cdef int k, cand
    cdef bint ok
    out.clear()
    for k in range(q1):
        pos[k] = indptr[vs[k]]
    while pos[0] < indptr[vs[0] + 1]:
        cand = nbr[pos[0]]
        ok = True
        for k in range(1, q1):
            while pos[k] < indptr[vs[k] + 1] and nbr[pos[k]] < cand:
                pos[k] += 1
            if pos[k] >= indptr[vs[k] + 1]:
                return
            if nbr[pos[k]] != cand:
                ok = False
                break
        if ok:
            out.push_back(cand)
        pos[0] += 1


def rips_pairs(dist, int max_dim, double max_edge, long long budget=100_000_000):
    """Persistence pairs of the Rips filtration; see the pure backend."""
    if max_dim > 2:
        raise ValueError("compiled backend supports max_dim <= 2")
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    cdef Py_ssize_t n = dist.shape[0]
    cdef const double[:, ::1] d = dist
    cdef long long work = n

    pairs = []

    # --- dimension 0: union-find over sorted edges ----------------------
    iu_np, ju_np = np.triu_indices(n, k=1)
    wall = dist[iu_np, ju_np]
    keep = wall <= max_edge
    iu_np, ju_np, w_np = iu_np[keep], ju_np[keep], wall[keep]
    ekey_np = iu_np.astype(np.uint64) * np.uint64(n) + ju_np.astype(np.uint64)
    order = np.lexsort((ekey_np, w_np))
    filt_np = np.ascontiguousarray(w_np[order])
    key_np = np.ascontiguousarray(ekey_np[order])
    verts_np = np.ascontiguousarray(
        np.column_stack([iu_np[order], ju_np[order]]).astype(np.int32))

    cdef const double[::1] efilt = filt_np
    cdef const u64[::1] ekey = key_np
    cdef const int[:, ::1] everts = verts_np
    cdef Py_ssize_t m_edges = efilt.shape[0]

    work += m_edges
    if work > budget:
        raise RipsBudgetError(work, budget)

    cdef vector[int] parent
    cdef int i
    for i in range(n):
        parent.push_back(i)

    cdef unordered_set[u64] negatives
    cdef Py_ssize_t e
    cdef int ru, rv
    for e in range(m_edges):
        ru = _find(parent, everts[e, 0])
        rv = _find(parent, everts[e, 1])
        if ru == rv:
            continue
        if ru < rv:
            parent[rv] = ru
        else:
            parent[ru] = rv
        negatives.insert(ekey[e])
        if efilt[e] > 0.0:
            pairs.append((0, 0.0, efilt[e]))
    cdef int n_comp = 0
    for i in range(n):
        if _find(parent, i) == i:
            n_comp += 1
    for i in range(n_comp):
        pairs.append((0, 0.0, INFINITY))

    if max_dim < 1 or n < 2:
        return _finish(pairs)

    # --- adjacency in CSR form, neighbor lists sorted --------------------
    adj = (dist <= max_edge) & ~np.eye(n, dtype=bool)
    indptr_np = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(adj.sum(axis=1), out=indptr_np[1:])
    nbr_np = np.ascontiguousarray(np.nonzero(adj)[1], dtype=np.int32)
    cdef const long long[::1] indptr = indptr_np
    cdef const int[::1] nbr = nbr_np

    # --- coboundary reduction per dimension, with clearing ---------------
    cdef const double[::1] cfilt = efilt
    cdef const u64[::1] ckey = ekey
    cdef const int[:, ::1] cverts = everts

    cdef unordered_map[u64, int] owner
    cdef unordered_set[u64] negatives_next
    cdef vector[vector[Entry]] stored
    cdef vector[Entry] col, scratch
    cdef vector[int] common
    cdef vector[double] nxt_filt
    cdef vector[u64] nxt_key
    cdef vector[int] nxt_verts
    cdef int q, q1, k, x, v
    cdef Py_ssize_t j, m_cols, nc
    cdef int vs[3]
    cdef double f_sig, fc
    cdef u64 key_sig, ck, un = <u64>n
    cdef Entry piv
    cdef bint placed, reduced_to_zero
    cdef unordered_map[u64, int].iterator it

    for q in range(1, max_dim + 1):
        q1 = q + 1
        m_cols = cfilt.shape[0]
        if m_cols == 0:
            break
        owner.clear()
        stored.clear()
        negatives_next.clear()

        # Columns already sorted ascending; process in decreasing order.
        for j in range(m_cols - 1, -1, -1):
            key_sig = ckey[j]
            if negatives.count(key_sig):
                continue
            f_sig = cfilt[j]
            for k in range(q1):
                vs[k] = cverts[j, k]

            _common_neighbors(indptr, nbr, vs, q1, common)
            col.clear()
            nc = common.size()
            for k in range(nc):
                x = common[k]
                fc = f_sig
                ck = 0
                placed = False
                for v in range(q1):
                    if d[x, vs[v]] > fc:
                        fc = d[x, vs[v]]
                    if not placed and x < vs[v]:
                        ck = ck * un + <u64>x
                        placed = True
                    ck = ck * un + <u64>vs[v]
                if not placed:
                    ck = ck * un + <u64>x
                col.push_back(Entry(fc, ck))
            work += <long long>col.size()
            if work > budget:
                raise RipsBudgetError(work, budget)
            cpp_sort(col.begin(), col.end())

            reduced_to_zero = True
            while col.size() > 0:
                piv = col[0]
                it = owner.find(piv.second)
                if it == owner.end():
                    owner[piv.second] = <int>stored.size()
                    stored.push_back(col)
                    negatives_next.insert(piv.second)
                    if piv.first > f_sig:
                        pairs.append((q, f_sig, piv.first))
                    reduced_to_zero = False
                    break
                _symdiff(col, stored[owner[piv.second]], scratch)
                col.swap(scratch)
            if reduced_to_zero:
                pairs.append((q, f_sig, INFINITY))

        if q < max_dim:
            # Materialize the next dimension by upward extension.
            nxt_filt.clear()
            nxt_key.clear()
            nxt_verts.clear()
            for j in range(m_cols):
                f_sig = cfilt[j]
                for k in range(q1):
                    vs[k] = cverts[j, k]
                _common_neighbors(indptr, nbr, vs, q1, common)
                nc = common.size()
                for k in range(nc):
                    x = common[k]
                    if x <= vs[q1 - 1]:
                        continue
                    fc = f_sig
                    ck = 0
                    for v in range(q1):
                        if d[x, vs[v]] > fc:
                            fc = d[x, vs[v]]
                        ck = ck * un + <u64>vs[v]
                    ck = ck * un + <u64>x
                    nxt_filt.push_back(fc)
                    nxt_key.push_back(ck)
                    for v in range(q1):
                        nxt_verts.push_back(vs[v])
                    nxt_verts.push_back(x)
            work += <long long>nxt_filt.size()
            if work > budget:
                raise RipsBudgetError(work, budget)

            m_cols = nxt_filt.size()
            filt_np = np.empty(m_cols, dtype=np.float64)
            key_np = np.empty(m_cols, dtype=np.uint64)
            verts_np = np.empty((m_cols, q1 + 1), dtype=np.int32)
            _copy_batch(nxt_filt, nxt_key, nxt_verts, q1 + 1,
                        filt_np, key_np, verts_np)
            order = np.lexsort((key_np, filt_np))
            filt_np = np.ascontiguousarray(filt_np[order])
            key_np = np.ascontiguousarray(key_np[order])
            verts_np = np.ascontiguousarray(verts_np[order])
            cfilt = filt_np
            ckey = key_np
            cverts = verts_np
            negatives.swap(negatives_next)

    return _finish(pairs)


cdef void _copy_batch(vector[double]& f, vector[u64]& k, vector[int]& v,
                      int width, double[::1] f_out, u64[::1] k_out,
                      int[:, ::1] v_out) noexcept nogil:
    cdef Py_ssize_t i, w
    for i in range(<Py_ssize_t>f.size()):
        f_out[i] = f[i]
        k_out[i] = k[i]
        for w in range(width):
            v_out[i, w] = v[i * width + w]


def _finish(pairs):
    pairs.sort()
    dims = np.array([p[0] for p in pairs], dtype=np.int8)
    births = np.array([p[1] for p in pairs], dtype=np.float64)
    deaths = np.array([p[2] for p in pairs], dtype=np.float64)
    return dims, births, deaths


def dijkstra_csr(indptr_in, indices_in, weights_in, sources_in, Py_ssize_t n):
    """Single-source shortest-path lengths from each source over a CSR graph."""
    cdef const long long[::1] indptr = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef const int[::1] indices = np.ascontiguousarray(indices_in, dtype=np.int32)
    cdef const double[::1] weights = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef const long long[::1] sources = np.ascontiguousarray(sources_in, dtype=np.int64)
    cdef Py_ssize_t ns = sources.shape[0]

    out_np = np.full((ns, n), np.inf)
    cdef double[:, ::1] out = out_np
    done_np = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] done = done_np

    cdef vector[double] heap_d
    cdef vector[int] heap_v
    cdef Py_ssize_t row
    cdef long long e
    cdef int u, v2, child, par, pos, size
    cdef double du, alt, tmp_d
    cdef int tmp_v

    for row in range(ns):
        for pos in range(<int>n):
            done[pos] = 0
        heap_d.clear()
        heap_v.clear()
        u = <int>sources[row]
        out[row, u] = 0.0
        heap_d.push_back(0.0)
        heap_v.push_back(u)
        while heap_d.size() > 0:
            du = heap_d[0]
            u = heap_v[0]
            size = <int>heap_d.size() - 1
            heap_d[0] = heap_d[size]
            heap_v[0] = heap_v[size]
            heap_d.pop_back()
            heap_v.pop_back()
            pos = 0
            while True:
                child = 2 * pos + 1
                if child >= size:
                    break
                if child + 1 < size and heap_d[child + 1] < heap_d[child]:
                    child += 1
                if heap_d[child] < heap_d[pos]:
                    tmp_d = heap_d[pos]; heap_d[pos] = heap_d[child]; heap_d[child] = tmp_d
                    tmp_v = heap_v[pos]; heap_v[pos] = heap_v[child]; heap_v[child] = tmp_v
                    pos = child
                else:
                    break
            if done[u]:
                continue
            done[u] = 1
            for e in range(indptr[u], indptr[u + 1]):
                v2 = indices[e]
                alt = du + weights[e]
                if alt < out[row, v2]:
                    out[row, v2] = alt
                    heap_d.push_back(alt)
                    heap_v.push_back(v2)
                    pos = <int>heap_d.size() - 1
                    while pos > 0:
                        par = (pos - 1) >> 1
                        if heap_d[pos] < heap_d[par]:
                            tmp_d = heap_d[pos]; heap_d[pos] = heap_d[par]; heap_d[par] = tmp_d
                            tmp_v = heap_v[pos]; heap_v[pos] = heap_v[par]; heap_v[par] = tmp_v
                            pos = par
                        else:
                            break
    return out_np
