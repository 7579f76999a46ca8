"""Sheaves of superrings and supermodules on finite topological spaces.

Opens are frozensets of point indices.  A (pre)sheaf stores a value on every
open and a restriction for every inclusion ``V <= U``.  On a finite space the
minimal open ``U_x`` of a point is terminal among its neighbourhoods, so the
stalk at ``x`` is literally ``F(U_x)`` and the germ map is restriction to it.

Sheafification and the ``*_from_stalks`` builders realise sections over
``U`` as compatible germ families ``(s_x)_{x in U}`` with
``s_y = rho_{U_x, U_y}(s_x)`` whenever ``y`` lies in ``U_x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import qlinalg as ql
from .errors import (HypothesisFailed, IncompatibleSections, InvariantViolation,
                     NotExtendable, NotHomogeneous, PreconditionFailed,
                     RealizabilityFailed)
from .qlinalg import ONE, ZERO, Matrix, Subspace
from .superring import RingHom, SuperAlgebra, product_many, rationals, subalgebra
from .supermodule import (HomSpace, ModuleHom, SuperModule, _gen_image_matrix,
                          direct_sum, free_module, parity_swap, quotient_module,
                          restrict_scalars, submodule, zero_module)


# -- finite spaces -------------------------------------------------------------------

class FiniteSpace:
    """A finite topological space given by its full lattice of opens."""

    def __init__(self, points, opens, *, name=None, check=True):
        self.points = tuple(points)
        self.n = len(self.points)
        uniq = {frozenset(int(i) for i in o) for o in opens}
        self.opens = tuple(sorted(uniq, key=lambda u: (len(u), sorted(u))))
        self.whole = frozenset(range(self.n))
        self.empty = frozenset()
        self.name = name or f"X[{self.n}]"
        if check:
            self.validate()
        self._min = tuple(self._min_open(x) for x in range(self.n))

    def __repr__(self):
        return f"FiniteSpace({self.name}, {self.n} points, {len(self.opens)} opens)"

    def _min_open(self, x):
        out = self.whole
        for u in self.opens:
            if x in u:
                out = out & u
        return out

    def violations(self):
        ops = set(self.opens)
        if self.empty not in ops:
            return [{"law": "contains-empty", "witness": {}}]
        if self.whole not in ops:
            return [{"law": "contains-whole", "witness": {}}]
        for u in self.opens:
            if not u <= self.whole:
                return [{"law": "point-index", "witness": {"open": sorted(u)}}]
        for u, v in combinations(self.opens, 2):
            if u | v not in ops:
                return [{"law": "closed-under-union",
                         "witness": {"opens": [self.labels(u), self.labels(v)]}}]
            if u & v not in ops:
                return [{"law": "closed-under-intersection",
                         "witness": {"opens": [self.labels(u), self.labels(v)]}}]
        return []

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"{self.name}: {bad[0]['law']} fails", bad[0])
        return self

    def labels(self, u):
        return [str(self.points[i]) for i in sorted(u)]

    def min_open(self, x):
        return self._min[x]

    def is_open(self, s):
        return frozenset(s) in set(self.opens)

    def is_closed(self, s):
        return self.is_open(self.whole - frozenset(s))

    def subopens(self, u):
        return [v for v in self.opens if v <= u]

    def pairs(self):
        """Every inclusion ``(U, V)`` with ``V <= U``, including ``U == V``."""
        return [(u, v) for u in self.opens for v in self.opens if v <= u]

    def specializations(self, u=None):
        """Pairs ``(x, y)`` with ``y != x`` in ``U_x`` and ``x`` in ``u``."""
        pts = sorted(u if u is not None else self.whole)
        return [(x, y) for x in pts for y in sorted(self._min[x]) if y != x]

    def components(self, u):
        """Connected components of the open subspace ``u``."""
        parent = {x: x for x in u}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for x in u:
            for y in self._min[x]:
                parent[find(x)] = find(y)
        groups = {}
        for x in sorted(u):
            groups.setdefault(find(x), []).append(x)
        return sorted((frozenset(g) for g in groups.values()), key=lambda g: min(g))

    def min_open_cover(self, u=None):
        u = self.whole if u is None else frozenset(u)
        seen = []
        for x in sorted(u):
            if self._min[x] not in seen:
                seen.append(self._min[x])
        return seen

    @classmethod
    def discrete(cls, n, labels=None):
        pts = labels or [f"p{i}" for i in range(n)]
        opens = [frozenset(s) for r in range(n + 1) for s in combinations(range(n), r)]
        return cls(pts, opens, name=f"discrete{n}")

    @classmethod
    def point(cls):
        return cls.discrete(1)

    @classmethod
    def sierpinski(cls):
        """Points ``x`` (open) and ``y`` (closed)."""
        return cls(["x", "y"], [[], [0], [0, 1]], name="sierpinski")

    @classmethod
    def pseudocircle(cls):
        """Four points: ``a, b`` open, ``c, d`` closed, each closed point over both."""
        opens = [[], [0], [1], [0, 1], [0, 1, 2], [0, 1, 3], [0, 1, 2, 3]]
        return cls(["a", "b", "c", "d"], opens, name="pseudocircle")


def _stack(mats, ncols):
    return Matrix.vstack(mats, ncols) if mats else Matrix.zeros(0, ncols)


def _select_rows(m: Matrix, rows):
    r = m.sparse_rows()
    return Matrix._wrap(len(rows), m.ncols, (dict(r[i]) for i in rows))


def _equalizer_rank(space, u, dim, res):
    """(rank of F(U) -> prod F(U_x), dim of compatible families) for the min-open cover."""
    cover = space.min_open_cover(u)
    dims = [dim(c) for c in cover]
    offs = [0]
    for d in dims:
        offs.append(offs[-1] + d)
    rows = []
    for i, j in combinations(range(len(cover)), 2):
        w = cover[i] & cover[j]
        ri, rj = res(cover[i], w), res(cover[j], w)
        for k in range(dim(w)):
            row = {}
            for c, v in ri.sparse_rows()[k].items():
                row[offs[i] + c] = v
            for c, v in rj.sparse_rows()[k].items():
                x = row.get(offs[j] + c, ZERO) - v
                if x:
                    row[offs[j] + c] = x
                else:
                    row.pop(offs[j] + c, None)
            if row:
                rows.append(row)
    compat = offs[-1] - Matrix._wrap(len(rows), offs[-1], rows).rank()
    stacked = _stack([res(u, c) for c in cover], dim(u))
    return stacked.rank(), compat


def _sheaf_violation(space, dim, res):
    if dim(space.empty):
        return {"law": "empty-sections-zero", "witness": {"dim": dim(space.empty)}}
    for u in space.opens:
        if not u:
            continue
        rank, compat = _equalizer_rank(space, u, dim, res)
        if rank < dim(u):
            return {"law": "sheaf-identity", "witness": {"open": space.labels(u),
                                                         "kernel_dim": dim(u) - rank}}
        if rank < compat:
            return {"law": "sheaf-gluing", "witness": {"open": space.labels(u),
                                                       "missing": compat - rank}}
    return None


def _family_space(space, u, dims, maps):
    """Compatible germ families over ``u`` inside the direct sum of stalks."""
    pts = sorted(u)
    offs = {}
    total = 0
    for x in pts:
        offs[x] = total
        total += dims[x]
    rows = []
    for x, y in space.specializations(u):
        m = maps[(x, y)]
        for k, r in enumerate(m.sparse_rows()):
            row = {offs[x] + c: v for c, v in r.items()}
            row[offs[y] + k] = row.get(offs[y] + k, ZERO) - ONE
            row = {c: v for c, v in row.items() if v}
            if row:
                rows.append(row)
    return pts, offs, total, ql.nullspace(Matrix._wrap(len(rows), total, rows))


def _pivot_rows_in(t_pts, t_offs, s_offs, target_space):
    """Positions, in the source layout, of the pivot coordinates of ``target_space``."""
    starts = sorted((t_offs[x], x) for x in t_pts)
    out = []
    for p in target_space.pivots:
        x = next(pt for off, pt in reversed(starts) if off <= p)
        out.append(s_offs[x] + p - t_offs[x])
    return out


class _Families:
    """Bookkeeping for family-realised sections."""

    def __init__(self, space, dims, maps):
        self.space, self.dims, self.maps = space, dims, maps
        self.data = {}
        for u in space.opens:
            self.data[u] = _family_space(space, u, dims, maps)

    def inclusion(self, u) -> Matrix:
        pts, offs, total, sp = self.data[u]
        return Matrix.from_columns(sp.vectors(), total) if sp.dim else Matrix.zeros(total, 0)

    def restriction(self, u, v) -> Matrix:
        pts_u, offs_u, total_u, sp_u = self.data[u]
        pts_v, offs_v, total_v, sp_v = self.data[v]
        rows = _pivot_rows_in(pts_v, offs_v, offs_u, sp_v)
        return _select_rows(self.inclusion(u), rows)

    def block(self, u, x) -> Matrix:
        """Projection of families over ``u`` onto the stalk block at ``x``."""
        pts, offs, total, sp = self.data[u]
        inc = self.inclusion(u)
        return _select_rows(inc, range(offs[x], offs[x] + self.dims[x]))

    def coordinates(self, u, vec):
        return self.data[u][3].coordinates(vec)

    def lift(self, u, x) -> Matrix:
        """Family over ``u`` determined by its value at ``x``; only for ``u = U_x``."""
        return ql.solve(self.block(u, x), Matrix.identity(self.dims[x]))


# -- sheaves of superrings ------------------------------------------------------------------

class SuperRingSheaf:
    """Presheaf of superrings with restriction ring maps for every ``V <= U``."""

    def __init__(self, space: FiniteSpace, sections, restrictions, *, name="O"):
        self.space = space
        self.sections = {frozenset(u): a for u, a in sections.items()}
        self._res = {(frozenset(u), frozenset(v)): h for (u, v), h in restrictions.items()}
        self.name = name
        self.stalk_data = None
        self.families = None

    def __repr__(self):
        return f"SuperRingSheaf({self.name} on {self.space.name})"

    def section(self, u) -> SuperAlgebra:
        return self.sections[frozenset(u)]

    def restriction(self, u, v) -> RingHom:
        u, v = frozenset(u), frozenset(v)
        h = self._res.get((u, v))
        if h is None and u == v:
            return RingHom.identity(self.section(u))
        if h is None:
            raise KeyError(f"no restriction {self.space.labels(u)} -> {self.space.labels(v)}")
        return h

    @property
    def global_ring(self) -> SuperAlgebra:
        return self.section(self.space.whole)

    def stalk(self, x) -> SuperAlgebra:
        return self.section(self.space.min_open(x))

    def germ(self, u, x) -> RingHom:
        return self.restriction(u, self.space.min_open(x))

    def point_projection(self, x) -> RingHom:
        """Iso from the stalk to the raw stalk algebra (family-built sheaves only)."""
        if self.families is None:
            raise ValueError("sheaf was not built from stalk data")
        u = self.space.min_open(x)
        return RingHom(self.stalk(x), self.stalk_data[x], self.families.block(u, x), check=False)

    def violations(self):
        sp = self.space
        if self.section(sp.empty).dim:
            return [{"law": "empty-sections-zero", "witness": {}}]
        for u, v in sp.pairs():
            h = self.restriction(u, v)
            bad = h.violations()
            if bad:
                return [{"law": f"restriction-{bad[0]['law']}",
                         "witness": {"from": sp.labels(u), "to": sp.labels(v), **bad[0]["witness"]}}]
        for u, v in sp.pairs():
            for w in sp.subopens(v):
                lhs = self.restriction(v, w).matrix @ self.restriction(u, v).matrix
                if lhs != self.restriction(u, w).matrix:
                    return [{"law": "functoriality",
                             "witness": {"opens": [sp.labels(u), sp.labels(v), sp.labels(w)]}}]
        bad = _sheaf_violation(sp, lambda u: self.section(u).dim,
                               lambda u, v: self.restriction(u, v).matrix)
        return [bad] if bad else []

    def is_sheaf(self):
        return not self.violations()

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"{self.name}: {bad[0]['law']} fails", bad[0])
        return self


def ring_sheaf_from_stalks(space: FiniteSpace, stalks, maps=None, *, name="O") -> SuperRingSheaf:
    """Sheaf of superrings from stalk algebras and specialization ring maps.

    ``maps[(x, y)]`` is a RingHom ``O_x -> O_y`` for each ``y != x`` in ``U_x``;
    missing maps default to the identity (the stalks must then coincide).
    """
    maps = dict(maps or {})
    mats = {}
    for x, y in space.specializations():
        h = maps.get((x, y))
        if h is None:
            if stalks[x] != stalks[y]:
                raise ValueError(f"missing specialization map {x}->{y}")
            mats[(x, y)] = Matrix.identity(stalks[x].dim)
        else:
            mats[(x, y)] = h.matrix if isinstance(h, RingHom) else h
    fam = _Families(space, {x: stalks[x].dim for x in range(space.n)}, mats)
    sections, res = {}, {}
    for u in space.opens:
        pts, offs, total, sp = fam.data[u]
        big = product_many([stalks[x] for x in pts])
        sections[u], _ = subalgebra(big, sp, name=f"{name}({','.join(space.labels(u))})")
    for u, v in space.pairs():
        if u != v:
            res[(u, v)] = RingHom(sections[u], sections[v], fam.restriction(u, v), check=False)
    out = SuperRingSheaf(space, sections, res, name=name)
    out.stalk_data = dict(stalks)
    out.families = fam
    return out


def constant_ring_sheaf(space: FiniteSpace, a: SuperAlgebra, name=None) -> SuperRingSheaf:
    """Sheaf of locally constant A-valued functions."""
    return ring_sheaf_from_stalks(space, {x: a for x in range(space.n)},
                                  name=name or f"{a.name}_X")


# -- sheaves of supermodules ----------------------------------------------------------------

class ModuleSheaf:
    """Presheaf of supermodules over a sheaf of superrings."""

    def __init__(self, base: SuperRingSheaf, sections, restrictions, *, name="F"):
        self.base = base
        self.space = base.space
        self.sections = {frozenset(u): m for u, m in sections.items()}
        self._res = {(frozenset(u), frozenset(v)): m for (u, v), m in restrictions.items()}
        self.name = name
        self.families = None
        self._glue = {}

    def __repr__(self):
        return f"ModuleSheaf({self.name} on {self.space.name})"

    def section(self, u) -> SuperModule:
        return self.sections[frozenset(u)]

    def restriction(self, u, v) -> Matrix:
        u, v = frozenset(u), frozenset(v)
        m = self._res.get((u, v))
        if m is None and u == v:
            return Matrix.identity(self.section(u).dim)
        if m is None:
            raise KeyError(f"no restriction {self.space.labels(u)} -> {self.space.labels(v)}")
        return m

    @property
    def global_sections(self) -> SuperModule:
        return self.section(self.space.whole)

    def stalk(self, x) -> SuperModule:
        return self.section(self.space.min_open(x))

    def germ(self, u, x) -> Matrix:
        return self.restriction(u, self.space.min_open(x))

    def dims(self):
        return {x: self.stalk(x).dim for x in range(self.space.n)}

    def specialization(self, x, y) -> Matrix:
        return self.restriction(self.space.min_open(x), self.space.min_open(y))

    def violations(self):
        sp, base = self.space, self.base
        if self.section(sp.empty).dim:
            return [{"law": "empty-sections-zero", "witness": {}}]
        for u in sp.opens:
            m = self.section(u)
            if m.algebra is not base.section(u) and m.algebra != base.section(u):
                return [{"law": "section-algebra", "witness": {"open": sp.labels(u)}}]
            bad = m.violations()
            if bad:
                return [{"law": f"section-{bad[0]['law']}",
                         "witness": {"open": sp.labels(u), **bad[0]["witness"]}}]
        for u, v in sp.pairs():
            r = self.restriction(u, v)
            mu, mv = self.section(u), self.section(v)
            if r.shape != (mv.dim, mu.dim):
                return [{"law": "restriction-shape", "witness": {"from": sp.labels(u),
                                                                 "to": sp.labels(v)}}]
            for i, row in enumerate(r.sparse_rows()):
                for j in row:
                    if mv.parity[i] != mu.parity[j]:
                        return [{"law": "restriction-parity",
                                 "witness": {"from": sp.labels(u), "to": sp.labels(v),
                                             "entry": [i, j]}}]
            ro = base.restriction(u, v)
            a = base.section(u)
            for b in range(a.dim):
                lhs = r @ mu.action[b]
                rhs = mv.action_matrix(ro(a.basis_vec(b))) @ r
                if lhs != rhs:
                    return [{"law": "restriction-scalar-compatibility",
                             "witness": {"from": sp.labels(u), "to": sp.labels(v),
                                         "scalar": a.labels[b]}}]
        for u, v in sp.pairs():
            for w in sp.subopens(v):
                if self.restriction(v, w) @ self.restriction(u, v) != self.restriction(u, w):
                    return [{"law": "functoriality",
                             "witness": {"opens": [sp.labels(u), sp.labels(v), sp.labels(w)]}}]
        bad = _sheaf_violation(sp, lambda u: self.section(u).dim, self.restriction)
        return [bad] if bad else []

    def is_sheaf(self):
        return not self.violations()

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"{self.name}: {bad[0]['law']} fails", bad[0])
        return self

    # gluing -----------------------------------------------------------------------------

    def _cover_matrix(self, u):
        if u not in self._glue:
            cover = sorted(u)
            mats = [self.germ(u, x) for x in cover]
            self._glue[u] = _stack(mats, self.section(u).dim)
        return self._glue[u]

    def glue_germs(self, u, germs):
        """The section over ``u`` with the given germs at every point, or None."""
        u = frozenset(u)
        if not u:
            return ()
        col = [c for x in sorted(u) for c in germs[x]]
        sol = ql.solve(self._cover_matrix(u), Matrix.from_columns([col], len(col)))
        return None if sol is None else sol.col(0)

    def glue_matrix(self, u, stacked: Matrix):
        """Solve ``germs(u) @ X = stacked`` (rows ordered point by point)."""
        if not u:
            return Matrix.zeros(0, stacked.ncols)
        return ql.solve(self._cover_matrix(u), stacked)


def _module_on_subspace(algebra, parity_full, action_of, space: Subspace, name):
    """Submodule structure on a stable graded subspace, basis = RREF rows."""
    vecs = space.vectors()
    piv = space.pivots
    parity = [parity_full[p] for p in piv]
    action = []
    for b in range(algebra.dim):
        a = action_of(b)
        cols = []
        for v in vecs:
            w = a @ v
            if w not in space:
                raise InvariantViolation(f"{name}: subspace not stable", {"basis": b})
            cols.append(tuple(w[p] for p in piv))
        action.append(Matrix.from_columns(cols, len(vecs)) if vecs else Matrix.zeros(0, 0))
    return SuperModule(algebra, len(vecs), parity, action, name=name, check=False)


def module_sheaf_from_stalks(base: SuperRingSheaf, stalks, maps=None, *, name="F") -> ModuleSheaf:
    """Module sheaf from stalk modules and specialization maps ``F_x -> F_y``.

    Each stalk module lives over ``base.stalk(x)`` or, for family-built bases,
    over the raw stalk algebra (it is then transported along the projection).
    Missing maps default to the identity.
    """
    space = base.space
    maps = dict(maps or {})
    st = {}
    for x in range(space.n):
        m = stalks[x]
        if m.algebra is not base.stalk(x) and m.algebra != base.stalk(x):
            m = restrict_scalars(m, base.point_projection(x))
        st[x] = m
    mats = {}
    for x, y in space.specializations():
        h = maps.get((x, y))
        if h is None:
            if st[x].dim != st[y].dim:
                raise ValueError(f"missing specialization map {x}->{y}")
            h = Matrix.identity(st[x].dim)
        mats[(x, y)] = h.matrix if isinstance(h, ModuleHom) else h
    fam = _Families(space, {x: st[x].dim for x in range(space.n)}, mats)
    sections, res = {}, {}
    for u in space.opens:
        pts, offs, total, sp = fam.data[u]
        a = base.section(u)
        parity_full = [p for x in pts for p in st[x].parity]

        def action_of(b, u=u, pts=pts, a=a):
            blocks = [st[x].action_matrix(base.germ(u, x)(a.basis_vec(b))) for x in pts]
            return Matrix.block_diag(blocks) if blocks else Matrix.zeros(0, 0)

        sections[u] = _module_on_subspace(a, parity_full, action_of, sp,
                                          f"{name}({','.join(space.labels(u))})")
    for u, v in space.pairs():
        if u != v:
            res[(u, v)] = fam.restriction(u, v)
    out = ModuleSheaf(base, sections, res, name=name)
    out.families = fam
    out.stalk_modules = st
    return out


# -- morphisms --------------------------------------------------------------------------------

class SheafMorphism:
    """Family of module maps ``F(U) -> G(U)`` natural in ``U`` (opens inside ``domain``)."""

    def __init__(self, source: ModuleSheaf, target: ModuleSheaf, components, *, domain=None,
                 check=True):
        self.source, self.target = source, target
        self.space = source.space
        self.domain = frozenset(domain) if domain is not None else self.space.whole
        self.components = {frozenset(u): m for u, m in components.items()}
        if check:
            self.validate()

    def __repr__(self):
        return f"SheafMorphism({self.source.name} -> {self.target.name})"

    def opens(self):
        return self.space.subopens(self.domain)

    def component(self, u) -> Matrix:
        return self.components[frozenset(u)]

    def stalk_map(self, x) -> Matrix:
        return self.component(self.space.min_open(x))

    def violations(self):
        sp = self.space
        for u in self.opens():
            m = self.component(u)
            fu, gu = self.source.section(u), self.target.section(u)
            if m.shape != (gu.dim, fu.dim):
                return [{"law": "component-shape", "witness": {"open": sp.labels(u)}}]
            if not ModuleHom(fu, gu, m, check=False).is_linear():
                return [{"law": "component-linear", "witness": {"open": sp.labels(u)}}]
        for u in self.opens():
            for v in sp.subopens(u):
                lhs = self.target.restriction(u, v) @ self.component(u)
                rhs = self.component(v) @ self.source.restriction(u, v)
                if lhs != rhs:
                    return [{"law": "naturality",
                             "witness": {"from": sp.labels(u), "to": sp.labels(v)}}]
        return []

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"{self!r}: {bad[0]['law']} fails", bad[0])
        return self

    @property
    def parity(self):
        ps = set()
        for u in self.opens():
            p = ModuleHom(self.source.section(u), self.target.section(u), self.component(u),
                          check=False).parity
            if p is None:
                return None
            if not self.component(u).is_zero():
                ps.add(p)
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def compose(self, other: "SheafMorphism") -> "SheafMorphism":
        """``self`` after ``other``."""
        dom = self.domain & other.domain
        comps = {u: self.component(u) @ other.component(u) for u in self.space.subopens(dom)}
        return SheafMorphism(other.source, self.target, comps, domain=dom, check=False)

    def __eq__(self, other):
        return (isinstance(other, SheafMorphism) and self.domain == other.domain
                and all(self.component(u) == other.component(u) for u in self.opens()))

    __hash__ = None

    def is_isomorphism(self):
        return all(self.component(u).shape[0] == self.component(u).shape[1]
                   and self.component(u).rank() == self.component(u).shape[0]
                   for u in self.opens())

    def is_surjective_on_stalks(self):
        return all(self.stalk_map(x).rank() == self.target.stalk(x).dim for x in sorted(self.domain))

    def inverse(self):
        comps = {}
        for u in self.opens():
            inv = self.component(u).inverse()
            if inv is None:
                return None
            comps[u] = inv
        return SheafMorphism(self.target, self.source, comps, domain=self.domain, check=False)

    @classmethod
    def identity(cls, f: ModuleSheaf):
        return cls(f, f, {u: Matrix.identity(f.section(u).dim) for u in f.space.opens},
                   check=False)

    @classmethod
    def zero(cls, f: ModuleSheaf, g: ModuleSheaf):
        return cls(f, g, {u: Matrix.zeros(g.section(u).dim, f.section(u).dim)
                          for u in f.space.opens}, check=False)


def morphism_from_min_opens(f: ModuleSheaf, g: ModuleSheaf, comps, *, domain=None,
                            check=True) -> SheafMorphism:
    """Assemble a morphism from its stalk maps by gluing in the sheaf ``g``."""
    sp = f.space
    dom = frozenset(domain) if domain is not None else sp.whole
    out = {}
    for u in sp.subopens(dom):
        pts = sorted(u)
        stacked = _stack([comps[x] @ f.germ(u, x) for x in pts], f.section(u).dim)
        sol = g.glue_matrix(u, stacked)
        if sol is None:
            raise RealizabilityFailed("stalk maps do not glue", {"open": sp.labels(u)})
        out[u] = sol
    return SheafMorphism(f, g, out, domain=dom, check=check)


def extend_stalk_family(f: ModuleSheaf, g: ModuleSheaf, family, *, domain=None) -> SheafMorphism:
    """The unique morphism with prescribed stalk maps ``alpha^x: F_x -> G_x``.

    Realizability on a finite space: for ``y`` in ``U_x`` the germ at ``y`` of
    ``alpha^x(s)`` must equal ``alpha^y`` of the germ of ``s``.
    """
    sp = f.space
    dom = frozenset(domain) if domain is not None else sp.whole
    for x in sorted(dom):
        if not ModuleHom(f.stalk(x), g.stalk(x), family[x], check=False).is_linear():
            raise RealizabilityFailed("stalk map is not linear", {"point": sp.points[x]})
    for x, y in sp.specializations(dom):
        lhs = g.specialization(x, y) @ family[x]
        rhs = family[y] @ f.specialization(x, y)
        if lhs != rhs:
            j = next(j for j in range(lhs.ncols) if lhs.col(j) != rhs.col(j))
            raise RealizabilityFailed(
                "stalk family not locally realizable",
                {"open": sp.labels(sp.min_open(x)), "section": j,
                 "point": sp.points[x], "germ_at": sp.points[y]})
    return morphism_from_min_opens(f, g, family, domain=dom)


def extend_ring_stalk_family(f: SuperRingSheaf, g: SuperRingSheaf, family) -> dict:
    """Ring-sheaf variant: returns the component RingHoms on every open."""
    sp = f.space
    for x, y in sp.specializations():
        rf = f.restriction(sp.min_open(x), sp.min_open(y)).matrix
        rg = g.restriction(sp.min_open(x), sp.min_open(y)).matrix
        if rg @ family[x].matrix != family[y].matrix @ rf:
            raise RealizabilityFailed("ring stalk family not locally realizable",
                                      {"point": sp.points[x], "germ_at": sp.points[y]})
    out = {}
    for u in sp.opens:
        pts = sorted(u)
        src = f.section(u)
        stacked = _stack([family[x].matrix @ f.germ(u, x).matrix for x in pts], src.dim)
        cover = _stack([g.germ(u, x).matrix for x in pts], g.section(u).dim)
        sol = ql.solve(cover, stacked) if pts else Matrix.zeros(0, src.dim)
        if sol is None:
            raise RealizabilityFailed("ring stalk maps do not glue", {"open": sp.labels(u)})
        out[u] = RingHom(src, g.section(u), sol)
    return out


# -- sheafification -----------------------------------------------------------------------------

@dataclass
class Sheafification:
    sheaf: ModuleSheaf
    canonical: SheafMorphism

    @property
    def canonical_is_iso(self):
        return self.canonical.is_isomorphism()


def sheafify(p: ModuleSheaf, name=None) -> Sheafification:
    """Compatible germ families of the presheaf ``p`` plus ``p -> sheaf``."""
    sp = p.space
    stalks = {x: p.stalk(x) for x in range(sp.n)}
    maps = {(x, y): p.specialization(x, y) for x, y in sp.specializations()}
    s = module_sheaf_from_stalks(p.base, stalks, maps, name=name or f"{p.name}~")
    comps = {}
    for u in sp.opens:
        pts = sorted(u)
        stacked = _stack([p.germ(u, x) for x in pts], p.section(u).dim)
        comps[u] = _select_rows(stacked, s.families.data[u][3].pivots)
    can = SheafMorphism(p, s, comps, check=False)
    s.presheaf = p
    return Sheafification(s, can)


def extend_to_sheafification(s: ModuleSheaf, g: ModuleSheaf, alpha) -> SheafMorphism:
    """Universal property: ``alpha_x: P(U_x) -> G(U_x)`` induces ``P~ -> G``.

    ``s`` must come from ``sheafify`` (or ``module_sheaf_from_stalks``).
    """
    sp = s.space
    comps = {}
    for x in range(sp.n):
        comps[x] = alpha[x] @ s.families.block(sp.min_open(x), x)
    return morphism_from_min_opens(s, g, comps)


def sheafify_rings(p: SuperRingSheaf, name=None):
    sp = p.space
    stalks = {x: p.stalk(x) for x in range(sp.n)}
    maps = {(x, y): p.restriction(sp.min_open(x), sp.min_open(y)) for x, y in sp.specializations()}
    s = ring_sheaf_from_stalks(sp, stalks, maps, name=name or f"{p.name}~")
    comps = {}
    for u in sp.opens:
        pts = sorted(u)
        stacked = _stack([p.germ(u, x).matrix for x in pts], p.section(u).dim)
        comps[u] = RingHom(p.section(u), s.section(u),
                           _select_rows(stacked, s.families.data[u][3].pivots), check=False)
    return s, comps


# -- builders ------------------------------------------------------------------------------------

def free_sheaf(base: SuperRingSheaf, p: int, q: int, name=None) -> ModuleSheaf:
    """``O^{p|q}`` with literally free sections."""
    sp = base.space
    sections = {u: free_module(base.section(u), p, q) for u in sp.opens}
    res = {}
    for u, v in sp.pairs():
        if u != v:
            r = base.restriction(u, v).matrix
            res[(u, v)] = Matrix.block_diag([r] * (p + q)) if p + q else Matrix.zeros(0, 0)
    return ModuleSheaf(base, sections, res, name=name or f"O^{{{p}|{q}}}")


def structure_module(base: SuperRingSheaf) -> ModuleSheaf:
    return free_sheaf(base, 1, 0, name=base.name)


def zero_sheaf(base: SuperRingSheaf) -> ModuleSheaf:
    return free_sheaf(base, 0, 0, name="0")


def direct_sum_sheaves(sheaves, base=None, name=None) -> ModuleSheaf:
    base = base or sheaves[0].base
    sp = base.space
    if not sheaves:
        return zero_sheaf(base)
    sections = {u: direct_sum([f.section(u) for f in sheaves], algebra=base.section(u))
                for u in sp.opens}
    res = {(u, v): Matrix.block_diag([f.restriction(u, v) for f in sheaves])
           for u, v in sp.pairs() if u != v}
    return ModuleSheaf(base, sections, res, name=name or " ⊕ ".join(f.name for f in sheaves))


def parity_swap_sheaf(f: ModuleSheaf) -> ModuleSheaf:
    sp = f.space
    sections = {u: parity_swap(f.section(u)) for u in sp.opens}
    res = {(u, v): f.restriction(u, v) for u, v in sp.pairs() if u != v}
    return ModuleSheaf(f.base, sections, res, name=f"Π({f.name})")


def constant_module_sheaf(base: SuperRingSheaf, m: SuperModule, name=None) -> ModuleSheaf:
    """Locally constant sheaf with value ``m`` over a constant base."""
    return module_sheaf_from_stalks(base, {x: m for x in range(base.space.n)},
                                    name=name or f"{m.name}_X")


def skyscraper(base: SuperRingSheaf, x, m: SuperModule, name=None) -> ModuleSheaf:
    """Stalk ``m`` at ``x`` and zero elsewhere, all specialization maps zero.

    For a closed point this is the usual skyscraper; for an open point it is
    the extension by zero, which need not be of finite type.
    """
    sp = base.space
    stalks, maps = {}, {}
    for y in range(sp.n):
        if y == x:
            stalks[y] = m
        else:
            stalks[y] = zero_module(base.stalk_data[y] if base.stalk_data else base.stalk(y))
    for y, z in sp.specializations():
        maps[(y, z)] = Matrix.zeros(stalks[z].dim, stalks[y].dim)
    return module_sheaf_from_stalks(base, stalks, maps, name=name or f"sky_{sp.points[x]}")


# -- kernels, images, cokernels --------------------------------------------------------------------

@dataclass
class KernelImageCokernel:
    kernel: ModuleSheaf
    image: ModuleSheaf
    cokernel: ModuleSheaf
    kernel_inclusion: SheafMorphism
    stalk_exact: bool
    failures: list = field(default_factory=list)


def _sub_presheaf(f: ModuleSheaf, spaces, name):
    sp = f.space
    sections, incl = {}, {}
    for u in sp.opens:
        s, i = submodule(f.section(u), spaces[u], name=f"{name}({','.join(sp.labels(u))})")
        sections[u], incl[u] = s, i.matrix
    res = {}
    for u, v in sp.pairs():
        if u != v:
            img = f.restriction(u, v) @ incl[u]
            res[(u, v)] = _select_rows(img, spaces[v].pivots)
    return ModuleSheaf(f.base, sections, res, name=name), incl


def kernel_image_cokernel(u: SheafMorphism) -> KernelImageCokernel:
    f, g = u.source, u.target
    sp = f.space
    kers = {w: ql.nullspace(u.component(w)) for w in sp.opens}
    ims = {w: ql.image(u.component(w)) for w in sp.opens}
    kernel, kincl = _sub_presheaf(f, kers, f"ker({f.name})")
    image_pre, _ = _sub_presheaf(g, ims, f"im")
    image = sheafify(image_pre, name=f"im({f.name}->{g.name})").sheaf
    sections, res, lifts = {}, {}, {}
    for w in sp.opens:
        q, _ = quotient_module(g.section(w), ims[w])
        sections[w] = q
        comp = ims[w].complement_coords()
        lifts[w] = Matrix.from_columns([ql.unit_vec(g.section(w).dim, c) for c in comp],
                                       g.section(w).dim) if comp else Matrix.zeros(g.section(w).dim, 0)
    for w, v in sp.pairs():
        if w != v:
            res[(w, v)] = ims[v].quotient_map() @ g.restriction(w, v) @ lifts[w]
    coker_pre = ModuleSheaf(f.base, sections, res, name="coker")
    cokernel = sheafify(coker_pre, name=f"coker({f.name}->{g.name})").sheaf
    failures = []
    for x in range(sp.n):
        ux = u.stalk_map(x)
        r = ux.rank()
        if kernel.stalk(x).dim != f.stalk(x).dim - r:
            failures.append({"point": sp.points[x], "what": "kernel"})
        if not (ux @ kincl[sp.min_open(x)]).is_zero():
            failures.append({"point": sp.points[x], "what": "kernel-inclusion"})
        if image.stalk(x).dim != r:
            failures.append({"point": sp.points[x], "what": "image"})
        if cokernel.stalk(x).dim != g.stalk(x).dim - r:
            failures.append({"point": sp.points[x], "what": "cokernel"})
    incl = SheafMorphism(kernel, f, kincl, check=False)
    return KernelImageCokernel(kernel, image, cokernel, incl, not failures, failures)


# -- predicates ---------------------------------------------------------------------------------------

@dataclass
class Support:
    points: tuple
    closed: bool
    complement: frozenset


def support(f: ModuleSheaf) -> Support:
    sp = f.space
    pts = frozenset(x for x in range(sp.n) if f.stalk(x).dim)
    comp = sp.whole - pts
    return Support(tuple(sorted(pts)), sp.is_open(comp), comp)


def _generated_by(m: SuperModule, elements):
    return m.submodule_span(elements).dim == m.dim


def free_rank(m: SuperModule):
    """``(p, q)`` if ``m`` is free on its homogeneous generators, else None."""
    gens = m.generators
    p = sum(1 for g in gens if m.parity_of(g) == 0)
    q = len(gens) - p
    if m.dim != (p + q) * m.algebra.dim:
        return None
    img = _gen_image_matrix(m, gens)
    return (p, q) if img.rank() == m.dim else None


@dataclass
class Classification:
    finite_type: bool
    finitely_presented: bool
    locally_free: bool
    rank: dict
    rank_locally_constant: bool
    stalks_free: bool
    quasi_coherent: bool
    globally_generated: bool
    generators: tuple
    witnesses: dict = field(default_factory=dict)

    def as_dict(self, space=None):
        lab = (lambda x: str(space.points[x])) if space else str
        return {
            "finite_type": self.finite_type,
            "finitely_presented": self.finitely_presented,
            "locally_free": self.locally_free,
            "quasi_coherent": self.quasi_coherent,
            "globally_generated": self.globally_generated,
            "stalks_free": self.stalks_free,
            "rank_locally_constant": self.rank_locally_constant,
            "rank": {lab(x): (f"{r[0]}|{r[1]}" if r else None) for x, r in sorted(self.rank.items())},
            "generators": len(self.generators),
        }


def _finite_type_violation(f: ModuleSheaf, points=None):
    sp = f.space
    for x, y in sp.specializations(points):
        imgs = f.specialization(x, y).columns()
        if not _generated_by(f.stalk(y), imgs):
            return {"point": sp.points[x], "fails_at": sp.points[y]}
    return None


def _generator_kernel_sheaf(f: ModuleSheaf, x):
    """Kernel of ``O^{p|q} -> F`` on ``U_x`` built from the generators of ``F_x``.

    Returns (kernel stalk modules by point, specialization maps) on ``U_x``.
    """
    sp = f.space
    fx = f.stalk(x)
    gens = fx.generators
    p = sum(1 for g in gens if fx.parity_of(g) == 0)
    q = len(gens) - p
    kers, frees = {}, {}
    for y in sorted(sp.min_open(x)):
        ry = f.specialization(x, y) if y != x else Matrix.identity(fx.dim)
        imgs = [ry @ g for g in gens]
        fy = f.stalk(y)
        free_y = free_module(fy.algebra, p, q)
        pi = _gen_image_matrix(fy, imgs)
        kers[y] = ql.nullspace(pi)
        frees[y] = free_y
    return kers, frees, (p, q)


def classify(f: ModuleSheaf) -> Classification:
    """Finite type, finite presentation, local freeness, ranks and global generation.

    The result is cached on the sheaf object (sheaves are not mutated after
    construction).
    """
    cached = f.__dict__.get("_classification")
    if cached is not None:
        return cached
    f._classification = out = _classify(f)
    return out


def _classify(f: ModuleSheaf) -> Classification:
    sp = f.space
    wit = {}
    ft_bad = _finite_type_violation(f)
    finite_type = ft_bad is None
    if ft_bad:
        wit["finite_type"] = ft_bad
    fp = finite_type
    if fp:
        for x in range(sp.n):
            kers, frees, _ = _generator_kernel_sheaf(f, x)
            for y, z in sp.specializations(sp.min_open(x)):
                r = f.base.restriction(sp.min_open(y), sp.min_open(z)).matrix
                pq = frees[y].free_rank
                big = Matrix.block_diag([r] * (pq[0] + pq[1])) if sum(pq) else Matrix.zeros(0, 0)
                imgs = [big @ v for v in kers[y].vectors()]
                kz = kers[z]
                span = frees[z].submodule_span(imgs) if imgs else Subspace(frees[z].dim)
                if span.dim != kz.dim:
                    fp = False
                    wit["finitely_presented"] = {"point": sp.points[x], "kernel_fails_at": sp.points[z]}
                    break
            if not fp:
                break
    ranks = {x: free_rank(f.stalk(x)) for x in range(sp.n)}
    stalks_free = all(r is not None for r in ranks.values())
    const = stalks_free and all(ranks[y] == ranks[x] for x, y in sp.specializations())
    lf = True
    for x in range(sp.n):
        if ranks[x] is None:
            lf = False
            wit["locally_free"] = {"point": sp.points[x], "reason": "stalk not free"}
            break
        fx = f.stalk(x)
        gens = fx.generators
        for y in sorted(sp.min_open(x)):
            if y == x:
                continue
            fy = f.stalk(y)
            imgs = [f.specialization(x, y) @ g for g in gens]
            pi = _gen_image_matrix(fy, imgs)
            if pi.rank() != fy.dim or pi.ncols != fy.dim:
                lf = False
                wit["locally_free"] = {"point": sp.points[x], "fails_at": sp.points[y]}
                break
        if not lf:
            break
    glob = f.global_sections
    gens = []
    gg = True
    spans = {}
    for x in range(sp.n):
        fx = f.stalk(x)
        germ = f.germ(sp.whole, x)
        acc = {}
        for g in gens:
            for r in fx.orbit_rows(germ @ g):
                if r:
                    ql.kernels.echelon_insert(acc, r)
        for j in range(glob.dim):
            if len(acc) == fx.dim:
                break
            e = germ @ glob.basis_vec(j)
            grew = False
            for r in fx.orbit_rows(e):
                if r and ql.kernels.echelon_insert(acc, r) >= 0:
                    grew = True
            if grew:
                gens.append(glob.basis_vec(j))
        if len(acc) != fx.dim:
            gg = False
            wit["globally_generated"] = {"point": sp.points[x]}
            break
    return Classification(finite_type, fp, lf, ranks, const, stalks_free, fp, gg,
                          tuple(gens) if gg else (), wit)


# -- gluing and parity ----------------------------------------------------------------------------------

def glue_homogeneous(f: ModuleSheaf, u, cover, sections, parity):
    """Glue sections of one declared parity over a cover of ``u``."""
    sp = f.space
    u = frozenset(u)
    cover = [frozenset(c) for c in cover]
    if frozenset().union(*cover) != u:
        raise ValueError("cover does not cover the open")
    for i, (c, s) in enumerate(zip(cover, sections)):
        m = f.section(c)
        if not m.is_homogeneous(s, parity):
            raise NotHomogeneous("section does not have the declared parity",
                                 {"piece": i, "open": sp.labels(c), "declared": parity,
                                  "found": m.parity_of(s)})
    for i, j in combinations(range(len(cover)), 2):
        w = cover[i] & cover[j]
        if f.restriction(cover[i], w) @ sections[i] != f.restriction(cover[j], w) @ sections[j]:
            raise IncompatibleSections("sections disagree on an overlap",
                                       {"pieces": [i, j], "overlap": sp.labels(w)})
    stacked = _stack([f.restriction(u, c) for c in cover], f.section(u).dim)
    rhs = [x for s in sections for x in s]
    sol = ql.solve(stacked, Matrix.from_columns([rhs], len(rhs)))
    if sol is None:
        raise IncompatibleSections("no section restricts to the given pieces", {})
    s = sol.col(0)
    if not f.section(u).is_homogeneous(s, parity):
        raise InvariantViolation("glued section lost its parity", {"parity": parity})
    return s


def parity_from_stalks(f: ModuleSheaf, u, s):
    sp = f.space
    u = frozenset(u)
    stalk_par = {}
    for x in sorted(u):
        g = f.germ(u, x) @ s
        stalk_par[sp.points[x]] = f.stalk(x).parity_of(g) if any(g) else "zero"
    nonzero = {p for p in stalk_par.values() if p != "zero"}
    if None in nonzero or len(nonzero) > 1:
        local = "inhomogeneous"
    elif not nonzero:
        local = "zero"
    else:
        local = "even" if nonzero.pop() == 0 else "odd"
    direct = f.section(u).parity_of(s)
    direct_v = ("zero" if not any(s) else "inhomogeneous" if direct is None
                else "even" if direct == 0 else "odd")
    return {"verdict": local, "stalks": stalk_par, "direct": direct_v, "agree": local == direct_v}


# -- Hom sheaves ---------------------------------------------------------------------------------------

class SheafHomSpace:
    """Natural families of parity-``parity`` stalk maps ``F_x -> G_x`` over ``U``.

    Families are flattened point by point (row-major blocks); the stored
    basis is the canonical RREF basis of that subspace.
    """

    def __init__(self, f: ModuleSheaf, g: ModuleSheaf, parity: int, u=None):
        sp = f.space
        self.f, self.g, self.parity = f, g, parity
        self.u = frozenset(u) if u is not None else sp.whole
        self.pts = sorted(self.u)
        self.shapes = {x: (g.stalk(x).dim, f.stalk(x).dim) for x in self.pts}
        self.offs = {}
        total = 0
        for x in self.pts:
            self.offs[x] = total
            total += self.shapes[x][0] * self.shapes[x][1]
        self.total = total
        bases = {x: [h.matrix for h in HomSpace(f.stalk(x), g.stalk(x), parity).basis()]
                 for x in self.pts}
        coff = {}
        n = 0
        for x in self.pts:
            coff[x] = n
            n += len(bases[x])
        rows = []
        for x, y in sp.specializations(self.u):
            rg, rf = g.specialization(x, y), f.specialization(x, y)
            lhs = [rg @ b for b in bases[x]]
            rhs = [b @ rf for b in bases[y]]
            ny, nx = self.shapes[y]
            for i in range(ny):
                for j in range(nx):
                    row = {}
                    for k, m in enumerate(lhs):
                        v = m[i, j]
                        if v:
                            row[coff[x] + k] = v
                    for k, m in enumerate(rhs):
                        v = m[i, j]
                        if v:
                            row[coff[y] + k] = row.get(coff[y] + k, ZERO) - v
                    row = {c: v for c, v in row.items() if v}
                    if row:
                        rows.append(row)
        null = ql.nullspace(Matrix._wrap(len(rows), n, rows))
        vecs = []
        for c in null.vectors():
            fam = {x: Matrix.zeros(*self.shapes[x]) for x in self.pts}
            for x in self.pts:
                for k, b in enumerate(bases[x]):
                    v = c[coff[x] + k]
                    if v:
                        fam[x] = fam[x] + b.scale(v)
            vecs.append(self.flatten(fam))
        self.space = Subspace(total, vecs)

    @property
    def dim(self):
        return self.space.dim

    def flatten(self, fam):
        out = [ZERO] * self.total
        for x in self.pts:
            nr, nc = self.shapes[x]
            off = self.offs[x]
            for i, r in enumerate(fam[x].sparse_rows()):
                for j, v in r.items():
                    out[off + i * nc + j] = v
        return tuple(out)

    def unflatten(self, vec):
        fam = {}
        for x in self.pts:
            nr, nc = self.shapes[x]
            off = self.offs[x]
            fam[x] = Matrix.from_lists([[vec[off + i * nc + j] for j in range(nc)]
                                       for i in range(nr)], nc)
        return fam

    def basis_families(self):
        return [self.unflatten(v) for v in self.space.vectors()]

    def coordinates(self, fam):
        return self.space.coordinates(self.flatten(fam))

    def morphism(self, fam, check=False) -> SheafMorphism:
        return morphism_from_min_opens(self.f, self.g, fam, domain=self.u, check=check)

    def family_of(self, u: SheafMorphism):
        return {x: u.stalk_map(x) for x in self.pts}


def sheaf_hom(f: ModuleSheaf, g: ModuleSheaf, parity=0) -> SheafHomSpace:
    return SheafHomSpace(f, g, parity)


@dataclass
class HomSheaves:
    full: ModuleSheaf
    even: ModuleSheaf
    spaces: dict


def hom_sheaf(f: ModuleSheaf, g: ModuleSheaf) -> HomSheaves:
    """barHom sheaf (sections over U = barHom(F|U, G|U)) and its even subsheaf."""
    sp = f.space
    base = f.base
    spaces = {u: (SheafHomSpace(f, g, 0, u), SheafHomSpace(f, g, 1, u)) for u in sp.opens}
    full_sec, even_sec = {}, {}
    for u in sp.opens:
        e, o = spaces[u]
        a = base.section(u)
        fams = e.basis_families() + o.basis_families()
        pars = [0] * e.dim + [1] * o.dim
        action = []
        for b in range(a.dim):
            pb = a.parity[b]
            cols = []
            for fam, pu in zip(fams, pars):
                new = {}
                for x in e.pts:
                    fx = f.stalk(x)
                    ax = base.germ(u, x)(a.basis_vec(b))
                    m = fam[x] @ fx.action_matrix(ax)
                    if pb:
                        rows = [{j: (-v if fx.parity[j] else v) for j, v in r.items()}
                                for r in m.sparse_rows()]
                        m = Matrix._wrap(m.nrows, m.ncols, rows)
                    new[x] = m
                tgt = spaces[u][(pu + pb) % 2]
                c = tgt.coordinates(new)
                if c is None:
                    raise InvariantViolation("Hom sheaf action leaves the hom space",
                                             {"open": sp.labels(u), "scalar": a.labels[b]})
                cols.append(((0,) * e.dim + tuple(c)) if (pu + pb) % 2 else (tuple(c) + (0,) * o.dim))
            action.append(Matrix.from_columns(cols, len(fams)) if fams else Matrix.zeros(0, 0))
        full_sec[u] = SuperModule(a, len(fams), pars, action,
                                  name=f"barHom({f.name},{g.name})({','.join(sp.labels(u))})",
                                  check=False)
        ev = [m.submatrix(range(e.dim), range(e.dim)) for m in action]
        even_sec[u] = SuperModule(a, e.dim, [0] * e.dim, ev,
                                  name=f"Hom({f.name},{g.name})", check=False)
    def restrict(src, dst):
        cols = [dst.coordinates({x: fam[x] for x in dst.pts}) for fam in src.basis_families()]
        return Matrix.from_columns(cols, dst.dim) if cols else Matrix.zeros(dst.dim, 0)

    full_res, even_res = {}, {}
    for u, v in sp.pairs():
        if u == v:
            continue
        (eu, ou), (ev_, ov) = spaces[u], spaces[v]
        re, ro = restrict(eu, ev_), restrict(ou, ov)
        full_res[(u, v)] = Matrix.block_diag([re, ro])
        even_res[(u, v)] = re
    full = ModuleSheaf(base, full_sec, full_res, name=f"barHom({f.name},{g.name})")
    even = ModuleSheaf(base, even_sec, even_res, name=f"Hom({f.name},{g.name})")
    return HomSheaves(full, even, spaces)


def _extend_from_point(f: ModuleSheaf, g: ModuleSheaf, x, w: Matrix, parity):
    """Extend ``w: F_x -> G_x`` to stalk maps on ``U_x`` commuting with germs."""
    sp = f.space
    fam = {x: w}
    for y in sorted(sp.min_open(x)):
        if y == x:
            continue
        rf, rg = f.specialization(x, y), g.specialization(x, y)
        target = rg @ w
        basis = [h.matrix for h in HomSpace(f.stalk(y), g.stalk(y), parity).basis()]
        cols = [(b @ rf) for b in basis]
        ny, nx = target.shape
        a = Matrix.from_columns([[c[i, j] for i in range(ny) for j in range(nx)] for c in cols],
                                ny * nx) if cols else Matrix.zeros(ny * nx, 0)
        rhs = [target[i, j] for i in range(ny) for j in range(nx)]
        sol = ql.solve(a, Matrix.from_columns([rhs], len(rhs)))
        if sol is None:
            raise NotExtendable("stalk map does not extend to the minimal open",
                                {"point": sp.points[x], "fails_at": sp.points[y]})
        if a.rank() != len(cols):
            raise NotExtendable("extension to the minimal open is not unique",
                                {"point": sp.points[x], "at": sp.points[y]})
        m = Matrix.zeros(ny, f.stalk(y).dim)
        for c, b in zip(sol.col(0), basis):
            if c:
                m = m + b.scale(c)
        fam[y] = m
    for y, z in sp.specializations(sp.min_open(x)):
        if g.specialization(y, z) @ fam[y] != fam[z] @ f.specialization(y, z):
            raise NotExtendable("extended maps are not natural",
                                {"point": sp.points[y], "to": sp.points[z]})
    return fam


@dataclass
class StalkHomIso:
    point: object
    phi: Matrix
    psi: Matrix
    bijective: bool
    dims: tuple


def stalk_hom_iso(f: ModuleSheaf, g: ModuleSheaf, x) -> StalkHomIso:
    """``barHom(F, G)_x -> barHom(F_x, G_x)`` with an explicit inverse."""
    from .supermodule import HomModule
    if not classify(f).finitely_presented:
        raise PreconditionFailed("source sheaf is not finitely presented", {"sheaf": f.name})
    sp = f.space
    ux = sp.min_open(x)
    lhs = (SheafHomSpace(f, g, 0, ux), SheafHomSpace(f, g, 1, ux))
    rhs = HomModule(f.stalk(x), g.stalk(x))
    phi_cols = []
    for part in lhs:
        for fam in part.basis_families():
            phi_cols.append(rhs.coordinates(ModuleHom(f.stalk(x), g.stalk(x), fam[x], check=False)))
    psi_cols = []
    for k, h in enumerate(rhs.homs):
        par = rhs.parity[k]
        fam = _extend_from_point(f, g, x, h.matrix, par)
        c = lhs[par].coordinates(fam)
        if c is None:
            raise NotExtendable("extended family is not a section of the Hom sheaf",
                                {"point": sp.points[x]})
        psi_cols.append(((0,) * lhs[0].dim + tuple(c)) if par else (tuple(c) + (0,) * lhs[1].dim))
    n_l, n_r = lhs[0].dim + lhs[1].dim, rhs.dim
    phi = Matrix.from_columns(phi_cols, n_r) if phi_cols else Matrix.zeros(n_r, 0)
    psi = Matrix.from_columns(psi_cols, n_l) if psi_cols else Matrix.zeros(n_l, 0)
    bij = (n_l == n_r and (phi @ psi).is_identity() and (psi @ phi).is_identity())
    return StalkHomIso(sp.points[x], phi, psi, bij, (n_l, n_r))


@dataclass
class LocalExtension:
    open: frozenset
    morphism: SheafMorphism
    kind: str


def local_iso_extension(f: ModuleSheaf, g: ModuleSheaf, x, stalk_map: Matrix,
                        kind="iso") -> LocalExtension:
    """Extend an iso (or surjection) of stalks at ``x`` to ``U_x``."""
    sp = f.space
    w = ModuleHom(f.stalk(x), g.stalk(x), stalk_map, check=False)
    if w.parity is None or not w.is_linear():
        raise NotExtendable("stalk map is not a homogeneous linear map", {"point": sp.points[x]})
    fam = _extend_from_point(f, g, x, stalk_map, w.parity)
    ux = sp.min_open(x)
    mor = morphism_from_min_opens(f, g, fam, domain=ux)
    for y in sorted(ux):
        m = fam[y]
        ok = m.rank() == g.stalk(y).dim and (kind != "iso" or m.ncols == m.nrows)
        if not ok:
            raise NotExtendable(f"extension is not an {kind} near the point",
                                {"point": sp.points[x], "fails_at": sp.points[y]})
    return LocalExtension(ux, mor, kind)
