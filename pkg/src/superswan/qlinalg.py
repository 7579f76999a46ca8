"""Exact linear algebra over the rationals.

Scalars are ``gmpy2.mpq`` (always reduced, positive denominator).  Matrices
are immutable and stored as sparse rows; vectors are plain tuples.  A linear
map ``V -> W`` is a ``dim W x dim V`` matrix acting on column vectors.
"""

from __future__ import annotations

import os
from typing import NamedTuple

from gmpy2 import mpq

if os.environ.get("SUPERSWAN_PURE_PYTHON"):
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _kernels_py as kernels
        BACKEND = "python"

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


class DimensionMismatch(ValueError):
    pass


def q(x) -> mpq:
    """Coerce ints, ``"num/den"`` strings, Fractions and mpqs to a scalar."""
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def fmt(x) -> str:
    return str(mpq(x))


# -- vectors ---------------------------------------------------------------

def zero_vec(n):
    return (ZERO,) * n


def unit_vec(n, i):
    v = [ZERO] * n
    v[i] = ONE
    return tuple(v)


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v):
    return tuple(c * a for a in v)


def is_zero(v):
    return not any(v)


def to_sparse(v):
    return {i: mpq(x) for i, x in enumerate(v) if x}


def from_sparse(d, n):
    v = [ZERO] * n
    for i, x in d.items():
        v[i] = x
    return tuple(v)


def lincomb(coeffs, vectors, n):
    out = [ZERO] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for i, x in enumerate(v):
                if x:
                    out[i] += c * x
    return tuple(out)


# -- matrices --------------------------------------------------------------

class Matrix:
    """Immutable rational matrix with sparse row storage."""

    __slots__ = ("nrows", "ncols", "_rows")

    def __init__(self, nrows, ncols, rows=None):
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self._rows = tuple({} for _ in range(nrows))
        else:
            self._rows = tuple({c: mpq(v) for c, v in r.items() if v} for r in rows)
            if len(self._rows) != nrows:
                raise DimensionMismatch(f"expected {nrows} rows, got {len(self._rows)}")
            for r in self._rows:
                if r and (min(r) < 0 or max(r) >= ncols):
                    raise DimensionMismatch("column index out of range")

    @classmethod
    def _wrap(cls, nrows, ncols, rows):
        m = cls.__new__(cls)
        m.nrows, m.ncols, m._rows = nrows, ncols, tuple(rows)
        return m

    @classmethod
    def from_lists(cls, entries, ncols=None):
        entries = [list(r) for r in entries]
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        if any(len(r) != ncols for r in entries):
            raise DimensionMismatch("ragged entry grid")
        return cls(len(entries), ncols, [{j: q(x) for j, x in enumerate(r) if x} for r in entries])

    @classmethod
    def from_columns(cls, columns, nrows):
        rows = [{} for _ in range(nrows)]
        for j, col in enumerate(columns):
            for i, x in enumerate(col):
                if x:
                    rows[i][j] = mpq(x)
        return cls._wrap(nrows, len(columns), rows)

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls._wrap(nrows, ncols, ({} for _ in range(nrows)))

    @classmethod
    def identity(cls, n):
        return cls._wrap(n, n, ({i: ONE} for i in range(n)))

    @classmethod
    def block_diag(cls, blocks):
        rows, off = [], 0
        ncols = sum(b.ncols for b in blocks)
        for b in blocks:
            rows.extend({c + off: v for c, v in r.items()} for r in b._rows)
            off += b.ncols
        return cls._wrap(len(rows), ncols, rows)

    @classmethod
    def hstack(cls, blocks, nrows=None):
        if not blocks:
            return cls.zeros(nrows or 0, 0)
        n = blocks[0].nrows
        rows = [dict() for _ in range(n)]
        off = 0
        for b in blocks:
            if b.nrows != n:
                raise DimensionMismatch("hstack row mismatch")
            for i, r in enumerate(b._rows):
                for c, v in r.items():
                    rows[i][c + off] = v
            off += b.ncols
        return cls._wrap(n, off, rows)

    @classmethod
    def vstack(cls, blocks, ncols=None):
        if not blocks:
            return cls.zeros(0, ncols or 0)
        n = blocks[0].ncols
        if any(b.ncols != n for b in blocks):
            raise DimensionMismatch("vstack column mismatch")
        return cls._wrap(sum(b.nrows for b in blocks), n,
                         (dict(r) for b in blocks for r in b._rows))

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def sparse_rows(self):
        return self._rows

    def row(self, i):
        return from_sparse(self._rows[i], self.ncols)

    def col(self, j):
        return tuple(r.get(j, ZERO) for r in self._rows)

    def columns(self):
        cols = [[ZERO] * self.nrows for _ in range(self.ncols)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                cols[j][i] = v
        return [tuple(c) for c in cols]

    def to_lists(self):
        return [list(self.row(i)) for i in range(self.nrows)]

    def __getitem__(self, ij):
        i, j = ij
        return self._rows[i].get(j, ZERO)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.shape == other.shape
                and self._rows == other._rows)

    def __hash__(self):
        return hash((self.shape, tuple(tuple(sorted(r.items())) for r in self._rows)))

    def __repr__(self):
        return f"Matrix({self.nrows}x{self.ncols}, {self.to_lists()})"

    def nnz(self):
        return sum(len(r) for r in self._rows)

    def is_zero(self):
        return not any(self._rows)

    def is_identity(self):
        return self.nrows == self.ncols and all(r == {i: ONE} for i, r in enumerate(self._rows))

    @property
    def T(self):
        rows = [{} for _ in range(self.ncols)]
        for i, r in enumerate(self._rows):
            for j, v in r.items():
                rows[j][i] = v
        return Matrix._wrap(self.ncols, self.nrows, rows)

    def __add__(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        out = []
        for a, b in zip(self._rows, other._rows):
            r = dict(a)
            for c, v in b.items():
                w = r.get(c, ZERO) + v
                if w:
                    r[c] = w
                else:
                    r.pop(c, None)
            out.append(r)
        return Matrix._wrap(self.nrows, self.ncols, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = mpq(c)
        if not c:
            return Matrix.zeros(self.nrows, self.ncols)
        return Matrix._wrap(self.nrows, self.ncols, ({k: c * v for k, v in r.items()} for r in self._rows))

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise DimensionMismatch(f"{self.shape} @ {other.shape}")
            brows = other._rows
            out = []
            for r in self._rows:
                acc = {}
                for k, a in r.items():
                    for c, b in brows[k].items():
                        acc[c] = acc.get(c, ZERO) + a * b
                out.append({c: v for c, v in acc.items() if v})
            return Matrix._wrap(self.nrows, other.ncols, out)
        v = other
        if len(v) != self.ncols:
            raise DimensionMismatch(f"{self.shape} @ vector[{len(v)}]")
        nz = {k: x for k, x in enumerate(v) if x}
        out = []
        for r in self._rows:
            acc = ZERO
            if len(r) <= len(nz):
                for k, a in r.items():
                    x = nz.get(k)
                    if x is not None:
                        acc += a * x
            else:
                for k, x in nz.items():
                    a = r.get(k)
                    if a is not None:
                        acc += a * x
            out.append(acc)
        return tuple(out)

    def submatrix(self, rows, cols):
        cmap = {c: i for i, c in enumerate(cols)}
        out = []
        for i in rows:
            out.append({cmap[c]: v for c, v in self._rows[i].items() if c in cmap})
        return Matrix._wrap(len(rows), len(cols), out)

    def rank(self):
        return len(kernels.echelon(self._rows))

    def rref(self):
        return rref(self)

    def inverse(self):
        if self.nrows != self.ncols:
            return None
        x = solve(self, Matrix.identity(self.nrows))
        if x is None or not (self @ x).is_identity():
            return None
        return x


def rref_with_pivots(m: Matrix):
    basis = kernels.echelon(m.sparse_rows())
    pivots = sorted(basis)
    rows = [basis[p] for p in pivots] + [{} for _ in range(m.nrows - len(pivots))]
    return Matrix._wrap(m.nrows, m.ncols, rows), pivots


def rref(m: Matrix) -> Matrix:
    """Reduced row-echelon form (zero rows kept at the bottom)."""
    return rref_with_pivots(m)[0]


def rank(m: Matrix) -> int:
    return m.rank()


def solve(a: Matrix, b: Matrix):
    """Canonical solution of ``a @ x == b`` (free variables zero), or None."""
    if a.nrows != b.nrows:
        raise DimensionMismatch(f"solve: A has {a.nrows} rows, B has {b.nrows}")
    n = a.ncols
    aug = []
    for ra, rb in zip(a.sparse_rows(), b.sparse_rows()):
        r = dict(ra)
        for c, v in rb.items():
            r[c + n] = v
        aug.append(r)
    basis = kernels.echelon(aug)
    if any(p >= n for p in basis):
        return None
    rows = [{} for _ in range(n)]
    for p, r in basis.items():
        rows[p] = {c - n: v for c, v in r.items() if c >= n}
    return Matrix._wrap(n, b.ncols, rows)


def solve_vec(a: Matrix, v):
    x = solve(a, Matrix.from_columns([v], a.nrows))
    return None if x is None else x.col(0)


def nullspace(m: Matrix) -> "Subspace":
    basis = kernels.echelon(m.sparse_rows())
    free = [c for c in range(m.ncols) if c not in basis]
    vecs = []
    for f in free:
        v = {f: ONE}
        for p, r in basis.items():
            x = r.get(f)
            if x:
                v[p] = -x
        vecs.append(v)
    return Subspace._from_sparse(m.ncols, vecs)


def image(m: Matrix) -> "Subspace":
    return Subspace(m.nrows, m.columns())


class Subspace:
    """Subspace of Q^n stored by its canonical reduced row-echelon basis."""

    __slots__ = ("ambient_dim", "_basis", "pivots", "_comp")

    def __init__(self, ambient_dim, vectors=()):
        self._set(ambient_dim, kernels.echelon(to_sparse(v) for v in vectors))

    @classmethod
    def _from_sparse(cls, ambient_dim, rows):
        s = cls.__new__(cls)
        s._set(ambient_dim, kernels.echelon(rows))
        return s

    def _set(self, n, basis):
        self.ambient_dim = n
        self.pivots = tuple(sorted(basis))
        self._basis = tuple(basis[p] for p in self.pivots)
        self._comp = None

    @classmethod
    def full(cls, n):
        return cls._from_sparse(n, ({i: ONE} for i in range(n)))

    @property
    def dim(self):
        return len(self.pivots)

    @property
    def basis(self) -> Matrix:
        return Matrix._wrap(self.dim, self.ambient_dim, (dict(r) for r in self._basis))

    def vectors(self):
        return [from_sparse(r, self.ambient_dim) for r in self._basis]

    def sparse_vectors(self):
        return self._basis

    def __eq__(self, other):
        return (isinstance(other, Subspace) and self.ambient_dim == other.ambient_dim
                and self._basis == other._basis)

    def __hash__(self):
        return hash((self.ambient_dim, tuple(tuple(sorted(r.items())) for r in self._basis)))

    def __repr__(self):
        return f"Subspace(dim {self.dim} in Q^{self.ambient_dim})"

    def _check(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise DimensionMismatch(f"ambient {self.ambient_dim} vs {other.ambient_dim}")

    def reduce_sparse(self, d):
        return kernels.reduce_row(dict(zip(self.pivots, self._basis)), dict(d))

    def reduce(self, v):
        """Canonical representative of ``v`` modulo the subspace."""
        return from_sparse(self.reduce_sparse(to_sparse(v)), self.ambient_dim)

    def __contains__(self, v):
        return not self.reduce_sparse(to_sparse(v))

    def contains_subspace(self, other):
        return all(not self.reduce_sparse(r) for r in other._basis)

    def __add__(self, other):
        self._check(other)
        return Subspace._from_sparse(self.ambient_dim, list(self._basis) + list(other._basis))

    def intersection(self, other):
        self._check(other)
        cols = [from_sparse(other.reduce_sparse(r), self.ambient_dim) for r in self._basis]
        ker = nullspace(Matrix.from_columns(cols, self.ambient_dim))
        vecs = [lincomb(k, [from_sparse(r, self.ambient_dim) for r in self._basis], self.ambient_dim)
                for k in ker.vectors()]
        return Subspace(self.ambient_dim, vecs)

    def complement_coords(self):
        """Standard coordinates spanning a complement (the non-pivot columns)."""
        if self._comp is None:
            piv = set(self.pivots)
            self._comp = tuple(c for c in range(self.ambient_dim) if c not in piv)
        return self._comp

    def quotient_coords(self, v):
        """Coordinates of ``v + self`` in the basis ``complement_coords()``."""
        r = self.reduce_sparse(to_sparse(v) if not isinstance(v, dict) else v)
        return tuple(r.get(c, ZERO) for c in self.complement_coords())

    def quotient_map(self) -> Matrix:
        comp = self.complement_coords()
        cmap = {c: i for i, c in enumerate(comp)}
        cols = []
        for j in range(self.ambient_dim):
            r = self.reduce_sparse({j: ONE})
            cols.append({cmap[c]: v for c, v in r.items()})
        rows = [{} for _ in comp]
        for j, col in enumerate(cols):
            for i, v in col.items():
                rows[i][j] = v
        return Matrix._wrap(len(comp), self.ambient_dim, rows)

    def coordinates(self, v):
        """Coordinates of ``v`` in the stored basis; None if ``v`` is not inside."""
        if v not in self:
            return None
        return tuple(v[p] for p in self.pivots)


class SubspaceOps(NamedTuple):
    sum: Subspace
    intersection: Subspace
    contains: object  # membership test for the sum
    quotient_basis: tuple  # representatives of a basis of U / (U n V)


def subspace_ops(u: Subspace, v: Subspace) -> SubspaceOps:
    u._check(v)
    s = u + v
    meet = u.intersection(v)
    acc = dict(zip(meet.pivots, (dict(r) for r in meet.sparse_vectors())))
    reps = []
    for r in u.sparse_vectors():
        if kernels.echelon_insert(acc, r) >= 0:
            reps.append(from_sparse(r, u.ambient_dim))
    return SubspaceOps(s, meet, s.__contains__, tuple(reps))
