"""Pure-Python hot kernels.

Used when the compiled ``_kernels`` extension is unavailable.  Both modules
expose the same three functions with identical semantics.

Rows are sparse: ``dict[int, scalar]`` with no stored zeros.
"""


def reduce_row(basis, row):
    """Reduce ``row`` in place against a fully reduced echelon ``basis``.

    ``basis`` maps pivot column -> normalized row (pivot entry 1, zero in every
    other pivot column), so one pass over the pivots present in ``row`` is
    enough.
    """
    for p in [c for c in row if c in basis]:
        f = row.get(p)
        if not f:
            continue
        for c, v in basis[p].items():
            w = row.get(c, 0) - f * v
            if w:
                row[c] = w
            else:
                row.pop(c, None)
    return row


def echelon_insert(basis, row):
    """Insert ``row`` into ``basis``; return the new pivot column or -1."""
    row = reduce_row(basis, dict(row))
    if not row:
        return -1
    p = min(row)
    inv = 1 / row[p]
    row = {c: v * inv for c, v in row.items()}
    for q, other in basis.items():
        f = other.get(p)
        if f:
            for c, v in row.items():
                w = other.get(c, 0) - f * v
                if w:
                    other[c] = w
                else:
                    other.pop(c, None)
    basis[p] = row
    return p


def echelon(rows):
    basis = {}
    for r in rows:
        if r:
            echelon_insert(basis, r)
    return basis


def assoc_violation(dim, indptr, indices, data):
    """First basis triple (i, j, l) with (e_i e_j) e_l != e_i (e_j e_l).

    Structure constants are integer-scaled and stored CSR-style: the product
    e_i e_j has entries ``indices[s], data[s]`` for ``s`` in
    ``indptr[i*dim+j] : indptr[i*dim+j+1]``.
    """
    for i in range(dim):
        for j in range(dim):
            a0, a1 = indptr[i * dim + j], indptr[i * dim + j + 1]
            for l in range(dim):
                acc = {}
                for s in range(a0, a1):
                    k, ck = indices[s], data[s]
                    r = k * dim + l
                    for t in range(indptr[r], indptr[r + 1]):
                        m = indices[t]
                        acc[m] = acc.get(m, 0) + ck * data[t]
                b0, b1 = indptr[j * dim + l], indptr[j * dim + l + 1]
                for s in range(b0, b1):
                    k, ck = indices[s], data[s]
                    r = i * dim + k
                    for t in range(indptr[r], indptr[r + 1]):
                        m = indices[t]
                        acc[m] = acc.get(m, 0) - ck * data[t]
                for v in acc.values():
                    if v:
                        return (i, j, l)
    return None
