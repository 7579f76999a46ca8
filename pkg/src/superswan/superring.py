"""Finite-dimensional supercommutative algebras over Q.

An algebra is a basis of homogeneous vectors with a parity per basis element
and sparse structure constants ``e_i * e_j = sum_k c[i, j][k] e_k``.
Elements are coordinate tuples over that basis.
"""

from __future__ import annotations

import math
from array import array
from functools import cached_property
from itertools import combinations

from gmpy2 import mpq

from . import qlinalg as ql
from .errors import InvariantViolation, NonSplitResidue, NotAnIdeal, NotHomogeneous
from .qlinalg import ONE, ZERO, Matrix, Subspace, kernels


def _sign(p, q):
    return -1 if (p & q) else 1


# -- the algebra -------------------------------------------------------------

class SuperAlgebra:
    """Supercommutative Q-algebra given by structure constants."""

    def __init__(self, dim, parity, mult, unit, *, labels=None, name=None, check=True):
        self.dim = int(dim)
        self.parity = tuple(int(p) for p in parity)
        self.unit = tuple(mpq(x) for x in unit)
        table = {}
        items = mult.items() if isinstance(mult, dict) else _triples_to_table(mult)
        for (i, j), row in items:
            row = {int(k): mpq(v) for k, v in row.items() if v}
            if row:
                table[(int(i), int(j))] = row
        self._mult = table
        self.labels = tuple(labels) if labels else tuple(f"e{i}" for i in range(self.dim))
        self.name = name or f"A[{self.dim}]"
        if check:
            self.validate()

    def __repr__(self):
        return f"SuperAlgebra({self.name}, dim {self.dim}, {self.even_dim}|{self.odd_dim})"

    def __eq__(self, other):
        return (isinstance(other, SuperAlgebra) and self.dim == other.dim
                and self.parity == other.parity and self.unit == other.unit
                and self._mult == other._mult)

    def __hash__(self):
        return hash((self.dim, self.parity, self.unit))

    # structure ---------------------------------------------------------------

    def structure(self, i, j):
        """Sparse coordinates of ``e_i * e_j``."""
        return self._mult.get((i, j), {})

    def triples(self):
        for (i, j), row in sorted(self._mult.items()):
            for k, c in sorted(row.items()):
                yield i, j, k, c

    @property
    def even_basis(self):
        return tuple(i for i, p in enumerate(self.parity) if p == 0)

    @property
    def odd_basis(self):
        return tuple(i for i, p in enumerate(self.parity) if p == 1)

    @property
    def even_dim(self):
        return len(self.even_basis)

    @property
    def odd_dim(self):
        return len(self.odd_basis)

    @property
    def one(self):
        return self.unit

    @property
    def zero(self):
        return ql.zero_vec(self.dim)

    def basis_vec(self, i):
        return ql.unit_vec(self.dim, i)

    def element(self, coords):
        """Build an element from ``{basis index or label: coefficient}``."""
        v = [ZERO] * self.dim
        for key, c in coords.items():
            i = self.labels.index(key) if isinstance(key, str) else key
            v[i] += mpq(c) if not isinstance(c, str) else ql.q(c)
        return tuple(v)

    def mul(self, x, y):
        out = [ZERO] * self.dim
        xs = [(i, a) for i, a in enumerate(x) if a]
        ys = [(j, b) for j, b in enumerate(y) if b]
        mult = self._mult
        for i, a in xs:
            for j, b in ys:
                row = mult.get((i, j))
                if row:
                    ab = a * b
                    for k, c in row.items():
                        out[k] += ab * c
        return tuple(out)

    def power(self, x, n):
        r = self.unit
        for _ in range(n):
            r = self.mul(r, x)
        return r

    def add(self, x, y):
        return ql.vadd(x, y)

    def sub(self, x, y):
        return ql.vsub(x, y)

    def scale(self, c, x):
        return ql.vscale(mpq(c), x)

    def even_part(self, x):
        return tuple(a if self.parity[i] == 0 else ZERO for i, a in enumerate(x))

    def odd_part(self, x):
        return tuple(a if self.parity[i] == 1 else ZERO for i, a in enumerate(x))

    def parity_of(self, x):
        """0 or 1 for a nonzero homogeneous element, None otherwise (0 for zero)."""
        ps = {self.parity[i] for i, a in enumerate(x) if a}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def is_homogeneous(self, x, parity=None):
        if not any(x):
            return True
        p = self.parity_of(x)
        return p is not None and (parity is None or p == parity)

    def is_nilpotent(self, x):
        y = x
        for _ in range(self.dim + 1):
            if not any(y):
                return True
            y = self.mul(y, x)
        return not any(y)

    def lmat(self, i) -> Matrix:
        """Matrix of left multiplication by ``e_i``."""
        return self._lmats[i]

    def rmat(self, j) -> Matrix:
        return self._rmats[j]

    @cached_property
    def _lmats(self):
        rows = [[{} for _ in range(self.dim)] for _ in range(self.dim)]
        for (i, j), row in self._mult.items():
            for k, c in row.items():
                rows[i][k][j] = c
        return tuple(Matrix._wrap(self.dim, self.dim, r) for r in rows)

    @cached_property
    def _rmats(self):
        rows = [[{} for _ in range(self.dim)] for _ in range(self.dim)]
        for (i, j), row in self._mult.items():
            for k, c in row.items():
                rows[j][k][i] = c
        return tuple(Matrix._wrap(self.dim, self.dim, r) for r in rows)

    def left_mult(self, x) -> Matrix:
        out = Matrix.zeros(self.dim, self.dim)
        for i, a in enumerate(x):
            if a:
                out = out + self._lmats[i].scale(a)
        return out

    def right_mult(self, x) -> Matrix:
        out = Matrix.zeros(self.dim, self.dim)
        for i, a in enumerate(x):
            if a:
                out = out + self._rmats[i].scale(a)
        return out

    @cached_property
    def generators(self):
        """Basis indices generating the algebra (greedy, in basis order)."""
        gens = []
        span = Subspace(self.dim, [self.unit] if self.dim else [])
        for b in range(self.dim):
            if self.basis_vec(b) in span:
                continue
            gens.append(b)
            span = _closure(self, span, gens)
        return tuple(gens)

    def inverse(self, x):
        """Two-sided inverse of ``x`` or None."""
        if self.dim == 0:
            return ()
        y = ql.solve_vec(self.left_mult(x), self.unit)
        if y is None or self.mul(y, x) != self.unit:
            return None
        return y

    # validation ----------------------------------------------------------------

    def violations(self, limit=None):
        """Every broken law with a witness; empty list iff the algebra is valid."""
        out = []

        def add(law, **witness):
            out.append({"law": law, "witness": witness})
            return limit is not None and len(out) >= limit

        n = self.dim
        if len(self.parity) != n or any(p not in (0, 1) for p in self.parity):
            add("parity-vector", length=len(self.parity), dim=n)
            return out
        if len(self.unit) != n:
            add("unit-length", length=len(self.unit), dim=n)
            return out
        for (i, j), row in self._mult.items():
            if not (0 <= i < n and 0 <= j < n) or any(not 0 <= k < n for k in row):
                add("index-range", pair=[i, j])
                return out
        for (i, j), row in sorted(self._mult.items()):
            for k in sorted(row):
                if self.parity[k] != (self.parity[i] + self.parity[j]) % 2:
                    if add("parity-additivity", pair=[i, j], component=k,
                           labels=[self.labels[i], self.labels[j], self.labels[k]]):
                        return out
        for i in range(n):
            for j in range(i, n):
                s = _sign(self.parity[i], self.parity[j])
                a, b = self.structure(i, j), self.structure(j, i)
                if a != {k: s * c for k, c in b.items()}:
                    if add("supercommutativity", pair=[i, j],
                           labels=[self.labels[i], self.labels[j]],
                           lhs=dict(a),
                           rhs={k: s * v for k, v in b.items()}):
                        return out
        if any(self.unit[i] for i in self.odd_basis):
            if add("unit-even"):
                return out
        for j in range(n):
            e = self.basis_vec(j)
            if self.mul(self.unit, e) != e or self.mul(e, self.unit) != e:
                if add("unit-identity", basis=j, label=self.labels[j]):
                    return out
        bad = associativity_violation(self)
        if bad is not None:
            i, j, l = bad
            add("associativity", triple=[i, j, l],
                labels=[self.labels[i], self.labels[j], self.labels[l]])
        return out

    def validate(self):
        bad = self.violations(limit=1)
        if bad:
            v = bad[0]
            raise InvariantViolation(f"{self.name}: {v['law']} fails", v)
        return self


def _triples_to_table(triples):
    table = {}
    for i, j, k, c in triples:
        row = table.setdefault((int(i), int(j)), {})
        row[int(k)] = row.get(int(k), ZERO) + ql.q(c)
    return table.items()


def _closure(alg, span, gens):
    """Smallest subspace containing ``span`` closed under right mult by gens."""
    while True:
        new = list(span.vectors())
        for v in span.vectors():
            for g in gens:
                new.append(alg.mul(v, alg.basis_vec(g)))
                new.append(alg.mul(alg.basis_vec(g), v))
        nxt = Subspace(alg.dim, new)
        if nxt.dim == span.dim:
            return nxt
        span = nxt


_INT64_SAFE = 1 << 61


def associativity_violation(alg, backend=None):
    """First basis triple breaking associativity, or None.

    Structure constants are scaled to integers by their common denominator,
    which preserves the associativity equations.  The compiled kernel runs on
    int64 when the products provably fit; otherwise Python ints are used.
    """
    n = alg.dim
    if n == 0:
        return None
    den = 1
    for row in alg._mult.values():
        for c in row.values():
            den = math.lcm(den, int(c.denominator))
    indptr, indices, data = [0], [], []
    cmax, width = 0, 0
    for i in range(n):
        for j in range(n):
            row = alg._mult.get((i, j), {})
            for k in sorted(row):
                v = int(row[k] * den)
                indices.append(k)
                data.append(v)
                cmax = max(cmax, abs(v))
            width = max(width, len(row))
            indptr.append(len(indices))
    kern = backend or kernels
    fits = 2 * width * width * cmax * cmax < _INT64_SAFE
    if kern.__name__.endswith("_kernels") and fits:
        return kern.assoc_violation(n, array("q", indptr), array("q", indices), array("q", data))
    from . import _kernels_py
    return _kernels_py.assoc_violation(n, indptr, indices, data)


# -- constructors ------------------------------------------------------------

def grassmann(n: int) -> SuperAlgebra:
    """Grassmann algebra on ``n`` odd generators; basis monomials by bitmask."""
    if not 0 <= n <= 8:
        raise ValueError(f"grassmann: n must be in 0..8, got {n}")
    dim = 1 << n
    parity = [bin(s).count("1") % 2 for s in range(dim)]
    labels = ["1" if s == 0 else "".join(f"b{i + 1}" for i in range(n) if s >> i & 1)
              for s in range(dim)]
    mult = {}
    for s in range(dim):
        for t in range(dim):
            if s & t:
                continue
            # sign of moving each generator of t left past the larger ones in s
            inv = sum(bin(s >> (i + 1)).count("1") for i in range(n) if t >> i & 1)
            mult[(s, t)] = {s | t: -1 if inv % 2 else 1}
    return SuperAlgebra(dim, parity, mult, ql.unit_vec(dim, 0), labels=labels, name=f"Λ{n}")


def grassmann_generator(alg: SuperAlgebra, i: int):
    """The odd generator ``b_i`` (1-based) of a Grassmann algebra."""
    return alg.basis_vec(1 << (i - 1))


def even_polynomial_algebra(coeffs, name=None) -> SuperAlgebra:
    """Purely even Q[t]/(f) for monic ``f`` given by ``coeffs`` (constant first)."""
    f = [ql.q(c) for c in coeffs]
    d = len(f) - 1
    if d < 1 or f[-1] != 1:
        raise ValueError("need a monic polynomial of degree >= 1")
    # t^d = -sum f_k t^k
    powers = {}
    for a in range(2 * d - 1):
        if a < d:
            powers[a] = {a: ONE}
        else:
            prev = powers[a - 1]
            nxt = {}
            for k, c in prev.items():
                if k + 1 < d:
                    nxt[k + 1] = nxt.get(k + 1, ZERO) + c
                else:
                    for m in range(d):
                        nxt[m] = nxt.get(m, ZERO) - c * f[m]
            powers[a] = {k: v for k, v in nxt.items() if v}
    mult = {(i, j): powers[i + j] for i in range(d) for j in range(d)}
    labels = ["1"] + [f"t^{i}" if i > 1 else "t" for i in range(1, d)]
    return SuperAlgebra(d, [0] * d, mult, ql.unit_vec(d, 0), labels=labels,
                        name=name or f"Q[t]/({'+'.join(map(str, coeffs))})")


def product(a: SuperAlgebra, b: SuperAlgebra) -> SuperAlgebra:
    n = a.dim
    mult = {}
    for (i, j), row in a._mult.items():
        mult[(i, j)] = dict(row)
    for (i, j), row in b._mult.items():
        mult[(i + n, j + n)] = {k + n: c for k, c in row.items()}
    labels = [f"({l},0)" for l in a.labels] + [f"(0,{l})" for l in b.labels]
    return SuperAlgebra(n + b.dim, a.parity + b.parity, mult, a.unit + b.unit,
                        labels=labels, name=f"{a.name}×{b.name}")


def product_many(algs, name=None) -> SuperAlgebra:
    """Finite product; the basis is the concatenation of the factor bases."""
    algs = list(algs)
    mult, parity, unit, labels = {}, [], [], []
    off = 0
    for t, a in enumerate(algs):
        for (i, j), row in a._mult.items():
            mult[(i + off, j + off)] = {k + off: c for k, c in row.items()}
        parity.extend(a.parity)
        unit.extend(a.unit)
        labels.extend(f"{l}@{t}" for l in a.labels)
        off += a.dim
    return SuperAlgebra(off, parity, mult, unit, labels=labels,
                        name=name or "×".join(a.name for a in algs) or "0", check=False)


def embed_left(a: SuperAlgebra, b: SuperAlgebra, x):
    return tuple(x) + ql.zero_vec(b.dim)


def embed_right(a: SuperAlgebra, b: SuperAlgebra, y):
    return ql.zero_vec(a.dim) + tuple(y)


def zero_ring() -> SuperAlgebra:
    return SuperAlgebra(0, (), {}, (), name="0")


def rationals() -> SuperAlgebra:
    return SuperAlgebra(1, (0,), {(0, 0): {0: 1}}, (ONE,), labels=["1"], name="Q")


# -- homomorphisms ------------------------------------------------------------

class RingHom:
    """Parity-preserving unital ring homomorphism given by its matrix."""

    def __init__(self, source, target, matrix: Matrix, check=True):
        self.source, self.target, self.matrix = source, target, matrix
        if matrix.shape != (target.dim, source.dim):
            raise ql.DimensionMismatch(f"ring hom matrix {matrix.shape} vs {target.dim}x{source.dim}")
        if check:
            self.validate()

    def __call__(self, x):
        return self.matrix @ x

    def __repr__(self):
        return f"RingHom({self.source.name} -> {self.target.name})"

    def violations(self):
        out = []
        s, t = self.source, self.target
        for j in range(s.dim):
            img = self(s.basis_vec(j))
            if not t.is_homogeneous(img, s.parity[j]):
                out.append({"law": "parity-preserving", "witness": {"basis": j}})
                return out
        if self(s.unit) != t.unit:
            out.append({"law": "unital", "witness": {}})
            return out
        imgs = [self.matrix.col(j) for j in range(s.dim)]
        for i in range(s.dim):
            for j in range(s.dim):
                lhs = self(s.mul(s.basis_vec(i), s.basis_vec(j)))
                if lhs != t.mul(imgs[i], imgs[j]):
                    out.append({"law": "multiplicative", "witness": {"pair": [i, j]}})
                    return out
        return out

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"{self!r}: {bad[0]['law']} fails", bad[0])
        return self

    def compose(self, other: "RingHom") -> "RingHom":
        """``self`` after ``other``."""
        return RingHom(other.source, self.target, self.matrix @ other.matrix, check=False)

    def kernel(self) -> Subspace:
        return ql.nullspace(self.matrix)

    def is_surjective(self):
        return self.matrix.rank() == self.target.dim

    def is_isomorphism(self):
        return self.source.dim == self.target.dim and self.matrix.rank() == self.source.dim

    @classmethod
    def identity(cls, a):
        return cls(a, a, Matrix.identity(a.dim), check=False)


# -- ideals --------------------------------------------------------------------

class HomogeneousIdeal:
    """Two-sided homogeneous ideal, stored as a subspace of the algebra."""

    def __init__(self, algebra: SuperAlgebra, space: Subspace, check=True):
        self.algebra, self.space = algebra, space
        if check:
            self.validate()

    def __repr__(self):
        return f"HomogeneousIdeal(dim {self.dim} in {self.algebra.name})"

    def __eq__(self, other):
        return isinstance(other, HomogeneousIdeal) and self.space == other.space

    def __hash__(self):
        return hash(self.space)

    @property
    def dim(self):
        return self.space.dim

    def __contains__(self, x):
        return x in self.space

    def vectors(self):
        return self.space.vectors()

    def validate(self):
        a = self.algebra
        if self.space.ambient_dim != a.dim:
            raise ql.DimensionMismatch("ideal ambient dimension")
        for v in self.space.vectors():
            if a.even_part(v) not in self.space:
                raise NotHomogeneous("ideal is not spanned by homogeneous elements",
                                     {"element": [str(x) for x in v]})
        for v in self.space.vectors():
            for b in range(a.dim):
                e = a.basis_vec(b)
                if a.mul(v, e) not in self.space or a.mul(e, v) not in self.space:
                    raise NotAnIdeal("subspace not closed under multiplication",
                                     {"element": [str(x) for x in v], "basis": b})
        return self

    def even_part(self) -> Subspace:
        return self.space.intersection(_coordinate_space(self.algebra, 0))

    def is_nilpotent(self):
        return ideal_power(self, self.algebra.dim + 1).dim == 0


def _coordinate_space(a, parity):
    return Subspace(a.dim, [a.basis_vec(i) for i in range(a.dim) if a.parity[i] == parity])


def ideal_generated(a: SuperAlgebra, elements, homogeneous=True) -> HomogeneousIdeal:
    """Smallest two-sided ideal containing ``elements``.

    With ``homogeneous`` the even and odd parts of each generator are used, so
    the result is the smallest homogeneous ideal containing them.
    """
    gens = []
    for x in elements:
        if homogeneous:
            gens.extend([a.even_part(x), a.odd_part(x)])
        else:
            gens.append(tuple(x))
    span = Subspace(a.dim, gens)
    while True:
        new = list(span.vectors())
        for v in span.vectors():
            for b in range(a.dim):
                e = a.basis_vec(b)
                new.append(a.mul(v, e))
                new.append(a.mul(e, v))
        nxt = Subspace(a.dim, new)
        if nxt.dim == span.dim:
            break
        span = nxt
    return HomogeneousIdeal(a, span, check=homogeneous is False)


def whole_ideal(a):
    return HomogeneousIdeal(a, Subspace.full(a.dim), check=False)


def zero_ideal(a):
    return HomogeneousIdeal(a, Subspace(a.dim), check=False)


def odd_ideal(a: SuperAlgebra) -> HomogeneousIdeal:
    """J_A, generated by the odd elements; checked to be nilpotent."""
    j = ideal_generated(a, [a.basis_vec(i) for i in a.odd_basis])
    if not j.is_nilpotent():
        raise InvariantViolation("odd ideal is not nilpotent", {"algebra": a.name})
    return j


def ideal_power(i: HomogeneousIdeal, k: int) -> HomogeneousIdeal:
    if k < 1:
        raise ValueError("ideal_power needs k >= 1")
    a = i.algebra
    base = i.space.vectors()
    cur = i.space
    for _ in range(k - 1):
        if cur.dim == 0:
            break
        cur = Subspace(a.dim, [a.mul(x, y) for x in cur.vectors() for y in base])
    return HomogeneousIdeal(a, cur, check=False)


def ideal_sum(i: HomogeneousIdeal, j: HomogeneousIdeal) -> HomogeneousIdeal:
    return HomogeneousIdeal(i.algebra, i.space + j.space, check=False)


# -- quotients, subalgebras ---------------------------------------------------------

def quotient(a: SuperAlgebra, ideal) -> tuple[SuperAlgebra, RingHom]:
    """``A / I`` on the non-pivot coordinates of ``I`` plus the projection."""
    if isinstance(ideal, Subspace):
        ideal = HomogeneousIdeal(a, ideal)
    sp = ideal.space
    comp = sp.complement_coords()
    proj = sp.quotient_map()
    mult = {}
    for r, i in enumerate(comp):
        for s, j in enumerate(comp):
            row = a.structure(i, j)
            if row:
                img = proj @ ql.from_sparse(row, a.dim)
                mult[(r, s)] = ql.to_sparse(img)
    b = SuperAlgebra(len(comp), [a.parity[i] for i in comp], mult, proj @ a.unit,
                     labels=[a.labels[i] for i in comp],
                     name=a.name if sp.dim == 0 else f"{a.name}/I{sp.dim}", check=False)
    return b, RingHom(a, b, proj, check=False)


def subalgebra(a: SuperAlgebra, space: Subspace, name=None) -> tuple[SuperAlgebra, RingHom]:
    """Algebra structure on a multiplicatively closed subspace containing 1."""
    vecs = space.vectors()
    piv = space.pivots
    if a.dim and space.dim and a.unit not in space:
        raise NotAnIdeal("subalgebra must contain the unit")
    par = []
    for v in vecs:
        p = a.parity_of(v)
        if p is None:
            raise NotHomogeneous("subalgebra basis not homogeneous")
        par.append(p)
    mult = {}
    for r, x in enumerate(vecs):
        for s, y in enumerate(vecs):
            xy = a.mul(x, y)
            c = space.coordinates(xy)
            if c is None:
                raise NotAnIdeal("subspace not closed under multiplication", {"pair": [r, s]})
            c = {k: v for k, v in enumerate(c) if v}
            if c:
                mult[(r, s)] = c
    unit = space.coordinates(a.unit) if space.dim else ()
    sub = SuperAlgebra(space.dim, par, mult, unit, name=name or f"sub({a.name})", check=False)
    incl = Matrix.from_columns(vecs, a.dim) if vecs else Matrix.zeros(a.dim, 0)
    return sub, RingHom(sub, a, incl, check=False)


def even_subalgebra(a: SuperAlgebra):
    return subalgebra(a, _coordinate_space(a, 0), name=f"{a.name}_0")


# -- spectrum -----------------------------------------------------------------------

class SpectrumPoint:
    def __init__(self, index, idempotent, maximal_ideal, local_factor, projection):
        self.index = index
        self.idempotent = idempotent
        self.maximal_ideal = maximal_ideal
        self.local_factor = local_factor
        self.projection = projection

    def __repr__(self):
        return f"SpectrumPoint({self.index}, local factor {self.local_factor.name})"

    def even_maximal_ideal(self) -> Subspace:
        """The corresponding maximal ideal of A_0 (as a subspace of A)."""
        return self.maximal_ideal.even_part()


def nilradical_even(a: SuperAlgebra) -> Subspace:
    """Nilradical of A_0 via the radical of the trace form (char 0)."""
    ev = a.even_basis
    if not ev:
        return Subspace(a.dim)
    sub, incl = even_subalgebra(a)
    n = sub.dim
    traces = []
    for k in range(n):
        lm = sub.lmat(k)
        traces.append(sum((lm[i, i] for i in range(n)), ZERO))
    gram = [[ZERO] * n for _ in range(n)]
    for (i, j), row in sub._mult.items():
        gram[i][j] = sum((c * traces[k] for k, c in row.items()), ZERO)
    rad = ql.nullspace(Matrix.from_lists(gram, n))
    return Subspace(a.dim, [incl(v) for v in rad.vectors()])


def _rational_roots(coeffs):
    """Rational roots of sum coeffs[k] t^k, with multiplicity ignored."""
    den = 1
    for c in coeffs:
        den = math.lcm(den, int(c.denominator))
    ints = [int(c * den) for c in coeffs]
    while ints and ints[-1] == 0:
        ints.pop()
    roots = set()
    while ints and ints[0] == 0:
        roots.add(mpq(0))
        ints.pop(0)
    if len(ints) <= 1:
        return sorted(roots)
    lead, const = abs(ints[-1]), abs(ints[0])
    for p in _divisors(const):
        for qd in _divisors(lead):
            for r in (mpq(p, qd), mpq(-p, qd)):
                if sum(c * r ** k for k, c in enumerate(ints)) == 0:
                    roots.add(r)
    return sorted(roots)


def _divisors(n):
    if n > 10 ** 12:
        raise NonSplitResidue("coefficients too large for rational root search")
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _min_poly(alg, x, e):
    """Minimal polynomial of ``x`` inside ``e A`` (``e`` the local unit)."""
    powers = [e]
    while True:
        nxt = alg.mul(powers[-1], x)
        sol = ql.solve_vec(Matrix.from_columns(powers, alg.dim), nxt)
        if sol is not None:
            return [-c for c in sol] + [ONE]
        powers.append(nxt)


def _split_semisimple(s: SuperAlgebra):
    """Primitive idempotents of a split commutative semisimple algebra."""
    idems = [s.unit]
    for b in range(s.dim):
        refined = []
        for e in idems:
            x = s.mul(e, s.basis_vec(b))
            poly = _min_poly(s, x, e)
            roots = _rational_roots(poly)
            if len(roots) != len(poly) - 1:
                raise NonSplitResidue(
                    f"{s.name}: element {b} has minimal polynomial with an irrational factor")
            for lam in roots:
                f = e
                for mu in roots:
                    if mu != lam:
                        f = s.mul(f, ql.vscale(1 / (lam - mu), ql.vsub(x, ql.vscale(mu, e))))
                refined.append(f)
        idems = refined
    if len(idems) != s.dim:
        raise NonSplitResidue(f"{s.name}: semisimple quotient is not a product of copies of Q")
    return idems


def _lift_idempotent(a, x):
    """Newton iteration x <- 3x^2 - 2x^3 until idempotent."""
    for _ in range(4 * a.dim.bit_length() + 8):
        x2 = a.mul(x, x)
        if x2 == x:
            return x
        x3 = a.mul(x2, x)
        x = ql.vsub(ql.vscale(3, x2), ql.vscale(2, x3))
    raise InvariantViolation("idempotent lifting did not converge")


def spectrum(a: SuperAlgebra) -> list[SpectrumPoint]:
    """Points of Spec A = Spec A_0 with idempotents and local factors."""
    if a.dim == 0:
        return []
    a0, incl = even_subalgebra(a)
    nil = nilradical_even(a)
    nil0 = Subspace(a0.dim, [tuple(v[i] for i in a.even_basis) for v in nil.vectors()])
    red, proj = quotient(a0, HomogeneousIdeal(a0, nil0, check=False))
    prims = _split_semisimple(red)
    comp = nil0.complement_coords()

    def lift(v):
        out = [ZERO] * a0.dim
        for c, x in zip(comp, v):
            out[c] = x
        return tuple(out)

    lifted = []
    rest = a0.unit
    for f in prims[:-1]:
        e = _lift_idempotent(a0, a0.mul(rest, lift(f)))
        lifted.append(e)
        rest = ql.vsub(rest, e)
    lifted.append(rest)
    idems = sorted((incl(e) for e in lifted), key=_idem_key)
    j = odd_ideal(a)
    points = []
    for n, e in enumerate(idems):
        co = ql.vsub(a.unit, e)
        gens = [a.mul(co, a.basis_vec(b)) for b in a.even_basis] + nil.vectors()
        m = ideal_sum(ideal_generated(a, gens), j)
        if a.dim - m.dim != 1:
            raise NonSplitResidue(f"{a.name}: residue field at point {n} is not Q")
        loc, pr = quotient(a, ideal_generated(a, [co]))
        loc.name = f"{a.name}@{n}" if len(idems) > 1 else a.name
        points.append(SpectrumPoint(n, e, m, loc, pr))
    return points


def _idem_key(e):
    first = next((i for i, x in enumerate(e) if x), len(e))
    return (first, tuple(str(x) for x in e))


def cached_spectrum(a: SuperAlgebra):
    """``spectrum(a)`` memoized on the algebra; NonSplitResidue is memoized too."""
    got = a.__dict__.get("_spectrum")
    if got is None:
        try:
            got = spectrum(a)
        except NonSplitResidue as exc:
            got = exc
        a.__dict__["_spectrum"] = got
    if isinstance(got, NonSplitResidue):
        raise got
    return got


def radical(a: SuperAlgebra) -> HomogeneousIdeal:
    """Jacobson radical: the ideal generated by J_A and the nilradical of A_0."""
    got = a.__dict__.get("_radical")
    if got is None:
        got = ideal_sum(odd_ideal(a), ideal_generated(a, nilradical_even(a).vectors()))
        a.__dict__["_radical"] = got
    return got


def is_local_superring(a: SuperAlgebra):
    """(True, maximal ideal) for a local ring, (False, list of ideals) otherwise."""
    pts = cached_spectrum(a)
    if len(pts) == 1:
        return True, pts[0].maximal_ideal
    return False, [p.maximal_ideal for p in pts]


def stable_kernel(a: SuperAlgebra, f) -> Subspace:
    """Union of the kernels of multiplication by f^k."""
    lf = a.left_mult(f)
    power = lf
    prev = ql.nullspace(power)
    while True:
        power = power @ lf
        cur = ql.nullspace(power)
        if cur.dim == prev.dim:
            return cur
        prev = cur


def localize_at_even(a: SuperAlgebra, f) -> tuple[SuperAlgebra, RingHom]:
    """A_f for artinian A, realized as A modulo f-power torsion."""
    if not a.is_homogeneous(f, 0):
        raise NotHomogeneous("localize_at_even needs an even element", {"f": [str(x) for x in f]})
    k = stable_kernel(a, f)
    af, m = quotient(a, HomogeneousIdeal(a, k, check=False))
    af.name = a.name if k.dim == 0 else f"{a.name}_f"
    if af.dim and af.inverse(m(f)) is None:
        raise InvariantViolation("image of f is not invertible after localization")
    return af, m


def basic_open(a: SuperAlgebra, f, points=None):
    """Indices of spectrum points in D(f) = D(f_0)."""
    points = points if points is not None else cached_spectrum(a)
    f0 = a.even_part(f)
    return tuple(p.index for p in points if f0 not in p.maximal_ideal)


def all_subsets(n):
    for r in range(n + 1):
        yield from combinations(range(n), r)
