# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


from libc.stdint cimport uint64_t


def all_pairs_bfs(const cnp.uint8_t[:, ::1] adj):
    """Bitset BFS: each level ORs the packed adjacency rows of the frontier."""
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t words = (n + 63) // 64
    dist_arr = np.full((n, n), -1, dtype=np.int32)
    cdef int[:, ::1] dist = dist_arr
    cdef uint64_t[:, ::1] rows = np.zeros((max(n, 1), max(words, 1)), dtype=np.uint64)
    cdef uint64_t[::1] seen = np.zeros(max(words, 1), dtype=np.uint64)
    cdef uint64_t[::1] nxt = np.zeros(max(words, 1), dtype=np.uint64)
    cdef int[::1] frontier = np.empty(max(n, 1), dtype=np.int32)
    cdef int[::1] fresh = np.empty(max(n, 1), dtype=np.int32)
    cdef Py_ssize_t src, x, y, k, i, nf, nn
    cdef int level
    cdef uint64_t word, one = 1
    for x in range(n):
        for y in range(n):
            if adj[x, y]:
                rows[x, y >> 6] |= one << (y & 63)
    for src in range(n):
        for k in range(words):
            seen[k] = 0
        seen[src >> 6] = one << (src & 63)
        dist[src, src] = 0
        frontier[0] = <int>src
        nf = 1
        level = 0
        while nf:
            level += 1
            for k in range(words):
                nxt[k] = 0
            for i in range(nf):
                x = frontier[i]
                for k in range(words):
                    nxt[k] |= rows[x, k]
            nn = 0
            for k in range(words):
                word = nxt[k] & ~seen[k]
                seen[k] |= word
                while word:
                    y = (k << 6) + __builtin_ctzll(word)
                    word &= word - 1
                    dist[src, y] = level
                    fresh[nn] = <int>y
                    nn += 1
            for i in range(nn):
                frontier[i] = fresh[i]
            nf = nn
    return dist_arr


cdef extern from *:
    int __builtin_ctzll(unsigned long long) nogil


def follow_next_hops(const int[:, ::1] next_hop, int cap):
    cdef Py_ssize_t n = next_hop.shape[0]
    hops_arr = np.full((n, n), -1, dtype=np.int32)
    cdef int[:, ::1] hops = hops_arr
    cdef Py_ssize_t src, dst
    cdef int cur, steps
    for src in range(n):
        for dst in range(n):
            cur = <int>src
            steps = 0
            while cur != dst and steps <= cap:
                cur = next_hop[cur, dst]
                if cur < 0:
                    break
                steps += 1
            if cur == dst and steps <= cap:
                hops[src, dst] = steps
    return hops_arr


def uncovered_pairs(const cnp.uint8_t[:, ::1] adj, const int[:, ::1] members):
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t m = members.shape[1]
    out_arr = np.zeros((n, n), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t u, w, j
    cdef int v
    cdef bint hit
    for u in range(n):
        for w in range(n):
            if w == u or adj[u, w]:
                continue
            hit = False
            for j in range(m):
                v = members[u, j]
                if v < 0:
                    break
                if adj[v, w]:
                    hit = True
                    break
            if not hit:
                out[u, w] = 1
    return out_arr


def lehmer_digits(const long long[::1] perm):
    cdef Py_ssize_t d = perm.shape[0]
    out_arr = np.zeros(d, dtype=np.int64)
    cdef long long[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef long long c
    for i in range(d):
        c = 0
        for j in range(i + 1, d):
            if perm[j] < perm[i]:
                c += 1
        out[i] = c
    return out_arr
