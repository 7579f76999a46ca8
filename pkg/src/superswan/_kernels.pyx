# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels; same contract as ``_kernels_py``."""

from libc.stdlib cimport calloc, free, malloc


cpdef dict reduce_row(dict basis, dict row):
    cdef list pivots = [c for c in row if c in basis]
    cdef object p, f, c, v, w
    cdef dict brow
    for p in pivots:
        f = row.get(p)
        if not f:
            continue
        brow = <dict>basis[p]
        for c, v in brow.items():
            w = row.get(c, 0) - f * v
            if w:
                row[c] = w
            else:
                row.pop(c, None)
    return row


cpdef long echelon_insert(dict basis, row):
    cdef dict r = reduce_row(basis, dict(row))
    cdef object inv, f, c, v, w
    cdef dict other
    cdef long p
    if not r:
        return -1
    p = min(r)
    inv = 1 / r[p]
    r = {c: v * inv for c, v in r.items()}
    for other in basis.values():
        f = other.get(p)
        if f:
            for c, v in r.items():
                w = other.get(c, 0) - f * v
                if w:
                    other[c] = w
                else:
                    other.pop(c, None)
    basis[p] = r
    return p


cpdef dict echelon(rows):
    cdef dict basis = {}
    for r in rows:
        if r:
            echelon_insert(basis, r)
    return basis


def assoc_violation(long dim, const long long[:] indptr,
                    const long long[:] indices, const long long[:] data):
    cdef long long *acc = <long long *>calloc(dim, sizeof(long long))
    cdef long *touched = <long *>malloc(4 * dim * sizeof(long) + 4)
    cdef char *seen = <char *>calloc(dim, 1)
    cdef long i, j, l, k, m, r, nt, q
    cdef long long s, t, ck
    cdef bint bad
    if acc == NULL or touched == NULL or seen == NULL:
        free(acc); free(touched); free(seen)
        raise MemoryError()
    try:
        for i in range(dim):
            for j in range(dim):
                for l in range(dim):
                    nt = 0
                    for s in range(indptr[i * dim + j], indptr[i * dim + j + 1]):
                        k = indices[s]
                        ck = data[s]
                        r = k * dim + l
                        for t in range(indptr[r], indptr[r + 1]):
                            m = indices[t]
                            acc[m] += ck * data[t]
                            if not seen[m]:
                                seen[m] = 1
                                touched[nt] = m
                                nt += 1
                    for s in range(indptr[j * dim + l], indptr[j * dim + l + 1]):
                        k = indices[s]
                        ck = data[s]
                        r = i * dim + k
                        for t in range(indptr[r], indptr[r + 1]):
                            m = indices[t]
                            acc[m] -= ck * data[t]
                            if not seen[m]:
                                seen[m] = 1
                                touched[nt] = m
                                nt += 1
                    bad = False
                    for q in range(nt):
                        m = touched[q]
                        if acc[m] != 0:
                            bad = True
                        acc[m] = 0
                        seen[m] = 0
                    if bad:
                        return (i, j, l)
        return None
    finally:
        free(acc)
        free(touched)
        free(seen)
