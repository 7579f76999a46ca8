"""Right supermodules over a finite-dimensional supercommutative algebra.

A module is a Q-basis of homogeneous vectors with one action matrix per
algebra basis element: ``m . e_b = action[b] @ m``.

Conventions fixed here and tested:

* module homomorphisms are written on the left and commute with the right
  action without signs, ``u(m a) = u(m) a``, for both parities;
* the left action used for balancing is ``a . n = (-1)^{|a||n|} n a``;
* barHom carries the right action ``(u a)(m) = (-1)^{|a||m|} u(m a)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from gmpy2 import mpq

from . import qlinalg as ql
from .errors import (AlgebraMismatch, HypothesisFailed, InvariantViolation,
                     NonSplitResidue, NotHomogeneous, VerificationFailed, WitnessNotFound)
from .qlinalg import ONE, ZERO, Matrix, Subspace, kernels
from .superring import RingHom, SuperAlgebra, cached_spectrum, radical


def _parity_of(parity, x):
    ps = {parity[i] for i, a in enumerate(x) if a}
    if not ps:
        return 0
    return ps.pop() if len(ps) == 1 else None


class SuperModule:
    """Finite-dimensional right supermodule."""

    def __init__(self, algebra: SuperAlgebra, dim, parity, action, *, name=None,
                 generators=None, check=True):
        self.algebra = algebra
        self.dim = int(dim)
        self.parity = tuple(int(p) for p in parity)
        action = list(action)
        if len(action) != algebra.dim:
            raise ql.DimensionMismatch(f"need {algebra.dim} action matrices, got {len(action)}")
        self.action = tuple(a if isinstance(a, Matrix) else Matrix.from_lists(a, self.dim)
                            for a in action)
        self.name = name or f"M[{self.dim}]"
        if generators is not None:
            self.__dict__["generators"] = tuple(tuple(mpq(x) for x in g) for g in generators)
        if check:
            self.validate()

    def __repr__(self):
        return f"SuperModule({self.name}, dim {self.dim}, {self.even_dim}|{self.odd_dim} over {self.algebra.name})"

    @property
    def even_dim(self):
        return self.parity.count(0)

    @property
    def odd_dim(self):
        return self.parity.count(1)

    def basis_vec(self, i):
        return ql.unit_vec(self.dim, i)

    @property
    def zero(self):
        return ql.zero_vec(self.dim)

    def parity_of(self, m):
        return _parity_of(self.parity, m)

    def is_homogeneous(self, m, parity=None):
        p = self.parity_of(m)
        return p is not None and (parity is None or not any(m) or p == parity)

    def action_matrix(self, a) -> Matrix:
        """Matrix of right multiplication by the algebra element ``a``."""
        out = Matrix.zeros(self.dim, self.dim)
        for b, c in enumerate(a):
            if c:
                out = out + self.action[b].scale(c)
        return out

    def act(self, m, a):
        out = [ZERO] * self.dim
        for b, c in enumerate(a):
            if c:
                for i, x in enumerate(self.action[b] @ m):
                    if x:
                        out[i] += c * x
        return tuple(out)

    @cached_property
    def action_columns(self):
        """``action_columns[b][j]``: sparse coordinates of ``m_j . e_b``."""
        return tuple(tuple(r for r in a.T.sparse_rows()) for a in self.action)

    def orbit_rows(self, g):
        """Sparse rows spanning ``g . A`` (``g`` and its images under the basis of A)."""
        s = ql.to_sparse(g)
        rows = [s]
        for cols in self.action_columns:
            img = {}
            for k, x in s.items():
                for i, c in cols[k].items():
                    img[i] = img.get(i, ZERO) + x * c
            rows.append({i: v for i, v in img.items() if v})
        return rows

    def submodule_span(self, elements) -> Subspace:
        """Q-span of ``elements`` times every basis element of the algebra."""
        rows = []
        for g in elements:
            rows.extend(self.orbit_rows(g))
        return Subspace._from_sparse(self.dim, rows)

    # validation ---------------------------------------------------------------

    def violations(self):
        out = []
        a = self.algebra
        if len(self.parity) != self.dim:
            return [{"law": "parity-vector", "witness": {"length": len(self.parity)}}]
        for b, m in enumerate(self.action):
            if m.shape != (self.dim, self.dim):
                return [{"law": "action-shape", "witness": {"basis": b}}]
            for i, r in enumerate(m.sparse_rows()):
                for j in r:
                    if self.parity[i] != (self.parity[j] + a.parity[b]) % 2:
                        out.append({"law": "action-parity",
                                    "witness": {"basis": b, "entry": [i, j],
                                                "label": a.labels[b]}})
                        return out
        if self.action_matrix(a.unit) != Matrix.identity(self.dim):
            out.append({"law": "unit-acts-as-identity", "witness": {}})
            return out
        for x in range(a.dim):
            for y in range(a.dim):
                lhs = self.action[y] @ self.action[x]
                rhs = Matrix.zeros(self.dim, self.dim)
                for k, c in a.structure(x, y).items():
                    rhs = rhs + self.action[k].scale(c)
                if lhs != rhs:
                    out.append({"law": "action-associativity",
                                "witness": {"pair": [x, y],
                                            "labels": [a.labels[x], a.labels[y]]}})
                    return out
        return out

    def validate(self):
        bad = self.violations()
        if bad:
            raise InvariantViolation(f"{self.name}: {bad[0]['law']} fails", bad[0])
        return self

    # generators ---------------------------------------------------------------

    @cached_property
    def generators(self):
        """Homogeneous generators, even ones first.

        Minimal when the spectrum of the algebra splits: lifts of a basis of
        ``M / M rad`` at each point, summed across points (graded Nakayama).
        """
        if self.dim == 0:
            return ()
        try:
            gens = self._nakayama_generators()
        except NonSplitResidue:
            gens = None
        if gens is None or self.submodule_span(gens).dim != self.dim:
            gens = self._greedy_generators()
        return tuple(sorted(gens, key=lambda g: self.parity_of(g)))

    def _nakayama_generators(self):
        a = self.algebra
        pts = cached_spectrum(a)
        rad_cols = []
        for r in radical(a).vectors():
            rad_cols.extend(self.action_matrix(r).columns())
        rad_span = Subspace(self.dim, rad_cols)
        gens = []
        for delta in (0, 1):
            per_point = []
            for p in pts:
                e = self.action_matrix(p.idempotent)
                acc = dict(zip(rad_span.pivots, (dict(r) for r in rad_span.sparse_vectors())))
                chosen = []
                for j in range(self.dim):
                    if self.parity[j] != delta:
                        continue
                    w = e @ self.basis_vec(j)
                    if any(w) and kernels.echelon_insert(acc, ql.to_sparse(w)) >= 0:
                        chosen.append(w)
                per_point.append(chosen)
            for k in range(max((len(c) for c in per_point), default=0)):
                g = self.zero
                for chosen in per_point:
                    if k < len(chosen):
                        g = ql.vadd(g, chosen[k])
                gens.append(g)
        return gens

    def _greedy_generators(self):
        gens = []
        span = Subspace(self.dim)
        for j in range(self.dim):
            e = self.basis_vec(j)
            if e not in span:
                gens.append(e)
                span = self.submodule_span(gens)
        return gens

    @cached_property
    def generator_parities(self):
        return tuple(self.parity_of(g) for g in self.generators)


def _check_same_algebra(*mods):
    a = mods[0].algebra
    for m in mods[1:]:
        if m.algebra is not a and m.algebra != a:
            raise AlgebraMismatch(f"{mods[0].name} and {m.name} live over different algebras")


# -- constructors --------------------------------------------------------------------

def free_module(a: SuperAlgebra, p: int, q: int) -> SuperModule:
    """``A^p + (Pi A)^q`` with the right regular action."""
    if p < 0 or q < 0:
        raise ValueError("free_module ranks must be non-negative")
    n = a.dim
    copies = p + q
    parity = []
    for c in range(copies):
        shift = 1 if c >= p else 0
        parity.extend((a.parity[b] + shift) % 2 for b in range(n))
    action = [Matrix.block_diag([a.rmat(b)] * copies) if copies else Matrix.zeros(0, 0)
              for b in range(n)]
    gens = []
    for c in range(copies):
        g = [ZERO] * (n * copies)
        g[c * n:(c + 1) * n] = a.unit
        gens.append(tuple(g))
    m = SuperModule(a, n * copies, parity, action, name=f"{a.name}^{{{p}|{q}}}",
                    generators=gens, check=False)
    m.free_rank = (p, q)
    return m


def parity_swap(m: SuperModule) -> SuperModule:
    out = SuperModule(m.algebra, m.dim, [1 - p for p in m.parity], m.action,
                      name=f"Π({m.name})", check=False)
    if "generators" in m.__dict__:
        out.__dict__["generators"] = tuple(sorted(m.generators, key=out.parity_of))
    if hasattr(m, "free_rank"):
        out.free_rank = m.free_rank[::-1]
    return out


def direct_sum(mods, algebra=None) -> SuperModule:
    if not mods:
        if algebra is None:
            raise ValueError("empty direct sum needs an algebra")
        return zero_module(algebra)
    _check_same_algebra(*mods)
    a = mods[0].algebra
    action = [Matrix.block_diag([m.action[b] for m in mods]) for b in range(a.dim)]
    parity = [p for m in mods for p in m.parity]
    out = SuperModule(a, len(parity), parity, action,
                      name=" ⊕ ".join(m.name for m in mods), check=False)
    return out


def zero_module(a: SuperAlgebra) -> SuperModule:
    return SuperModule(a, 0, (), [Matrix.zeros(0, 0)] * a.dim, name="0", check=False)


def regular_module(a: SuperAlgebra) -> SuperModule:
    return free_module(a, 1, 0)


def _homogeneous_basis(space: Subspace, parity):
    for v in space.vectors():
        if _parity_of(parity, v) is None:
            raise NotHomogeneous("subspace is not spanned by homogeneous vectors")


def submodule(m: SuperModule, space: Subspace, name=None):
    """(N, inclusion) for an A-stable homogeneous subspace."""
    _homogeneous_basis(space, m.parity)
    vecs = space.vectors()
    parity = [m.parity_of(v) for v in vecs]
    action = []
    for b in range(m.algebra.dim):
        cols = []
        for v in vecs:
            c = space.coordinates(m.action[b] @ v)
            if c is None:
                raise InvariantViolation("subspace is not a submodule", {"basis": b})
            cols.append(c)
        action.append(Matrix.from_columns(cols, len(vecs)) if vecs else Matrix.zeros(0, 0))
    sub = SuperModule(m.algebra, len(vecs), parity, action, name=name or f"sub({m.name})",
                      check=False)
    incl = ModuleHom(sub, m, Matrix.from_columns(vecs, m.dim) if vecs else Matrix.zeros(m.dim, 0),
                     check=False)
    return sub, incl


def quotient_module(m: SuperModule, space: Subspace, name=None):
    """(M / N, projection) on the non-pivot coordinates of ``space``."""
    _homogeneous_basis(space, m.parity)
    comp = space.complement_coords()
    proj = space.quotient_map()
    action = [proj @ a.submatrix(range(m.dim), comp) for a in m.action]
    out = SuperModule(m.algebra, len(comp), [m.parity[c] for c in comp], action,
                      name=name or f"{m.name}/N{space.dim}", check=False)
    return out, ModuleHom(m, out, proj, check=False)


def idempotent_summand(m: SuperModule, e) -> tuple[SuperModule, "ModuleHom"]:
    """``M e`` for an even idempotent ``e`` of the (commutative) even part."""
    img = Subspace(m.dim, m.action_matrix(e).columns())
    return submodule(m, img, name=f"{m.name}·e")


# -- homomorphisms ----------------------------------------------------------------------

class ModuleHom:
    """Q-linear map between supermodules that commutes with the right action."""

    def __init__(self, source: SuperModule, target: SuperModule, matrix: Matrix, check=True):
        if matrix.shape != (target.dim, source.dim):
            raise ql.DimensionMismatch(f"hom matrix {matrix.shape} vs {target.dim}x{source.dim}")
        self.source, self.target, self.matrix = source, target, matrix
        if check:
            self.validate()

    def __repr__(self):
        return f"ModuleHom({self.source.name} -> {self.target.name}, parity {self.parity})"

    def __call__(self, m):
        return self.matrix @ m

    def __eq__(self, other):
        return isinstance(other, ModuleHom) and self.matrix == other.matrix

    __hash__ = None

    @property
    def parity_decomposition(self):
        rows_e, rows_o = [], []
        for i, r in enumerate(self.matrix.sparse_rows()):
            e, o = {}, {}
            for j, v in r.items():
                (e if self.target.parity[i] == self.source.parity[j] else o)[j] = v
            rows_e.append(e)
            rows_o.append(o)
        n, m = self.matrix.shape
        return Matrix._wrap(n, m, rows_e), Matrix._wrap(n, m, rows_o)

    @property
    def parity(self):
        """0 or 1 for a homogeneous map (0 for the zero map), None if mixed."""
        e, o = self.parity_decomposition
        if o.is_zero():
            return 0
        if e.is_zero():
            return 1
        return None

    def is_linear(self):
        a = self.source.algebra
        return all(self.matrix @ self.source.action[b] == self.target.action[b] @ self.matrix
                   for b in a.generators)

    def validate(self):
        _check_same_algebra(self.source, self.target)
        if not self.is_linear():
            raise InvariantViolation(f"{self!r} is not A-linear")
        return self

    def compose(self, other: "ModuleHom") -> "ModuleHom":
        """``self`` after ``other``."""
        return ModuleHom(other.source, self.target, self.matrix @ other.matrix, check=False)

    def kernel(self) -> Subspace:
        return ql.nullspace(self.matrix)

    def image(self) -> Subspace:
        return ql.image(self.matrix)

    def is_injective(self):
        return self.matrix.rank() == self.source.dim

    def is_surjective(self):
        return self.matrix.rank() == self.target.dim

    def is_isomorphism(self):
        return self.source.dim == self.target.dim and self.is_surjective()

    def inverse(self):
        inv = self.matrix.inverse()
        if inv is None:
            return None
        return ModuleHom(self.target, self.source, inv, check=False)

    @classmethod
    def identity(cls, m):
        return cls(m, m, Matrix.identity(m.dim), check=False)

    @classmethod
    def zero(cls, m, n):
        return cls(m, n, Matrix.zeros(n.dim, m.dim), check=False)


# -- presentations and Hom spaces ---------------------------------------------------------

def _gen_image_matrix(m: SuperModule, gens):
    """Map A^{gens} -> M, copy c basis b -> g_c . e_b (Q-matrix)."""
    a = m.algebra
    acols = m.action_columns
    rows = [dict() for _ in range(m.dim)]
    for c, g in enumerate(gens):
        s = ql.to_sparse(g)
        for b in range(a.dim):
            j = c * a.dim + b
            for k, x in s.items():
                for i, v in acols[b][k].items():
                    w = rows[i].get(j, ZERO) + x * v
                    if w:
                        rows[i][j] = w
                    else:
                        rows[i].pop(j, None)
    return Matrix._wrap(m.dim, len(gens) * a.dim, rows)


@dataclass
class Presentation:
    """Exact ``A^{r|s} -> A^{p|q} -> M -> 0`` with homogeneous generators."""

    module: SuperModule
    free: SuperModule
    surjection: ModuleHom
    relations: ModuleHom
    kernel_generators: tuple = field(default=())

    @property
    def ranks(self):
        return self.free.free_rank

    @property
    def relation_ranks(self):
        return self.relations.source.free_rank

    def verify(self):
        comp = self.surjection.matrix @ self.relations.matrix
        if not comp.is_zero():
            raise VerificationFailed("presentation maps do not compose to zero")
        if not self.surjection.is_surjective():
            raise VerificationFailed("presentation surjection is not onto")
        if self.relations.image() != self.surjection.kernel():
            raise VerificationFailed("presentation is not exact in the middle")
        return True


def _free_on(m: SuperModule, gens):
    par = [m.parity_of(g) for g in gens]
    p = par.count(0)
    return free_module(m.algebra, p, len(par) - p)


def presentation_of(m: SuperModule) -> Presentation:
    gens = m.generators
    free = _free_on(m, gens)
    pi = ModuleHom(free, m, _gen_image_matrix(m, gens), check=False)
    ker = pi.kernel()
    ksub, kincl = submodule(free, ker, name=f"ker({m.name})")
    kgens = tuple(kincl(g) for g in ksub.generators)
    rfree = _free_on(free, kgens)
    rel = ModuleHom(rfree, free, _gen_image_matrix(free, kgens), check=False)
    pres = Presentation(m, free, pi, rel, kgens)
    pres.verify()
    return pres


class HomSpace:
    """Homogeneous A-linear maps ``M -> N`` of one parity.

    A map is determined by the images ``y_c = u(g_c)`` of the generators of
    ``M``; it exists iff every kernel generator ``k`` of the presentation
    satisfies ``sum_c y_c . k_c = 0``.
    """

    def __init__(self, source: SuperModule, target: SuperModule, parity: int):
        _check_same_algebra(source, target)
        self.source, self.target, self.parity = source, target, parity
        self.pres = presentation_of(source)
        a = source.algebra
        gens = source.generators
        self.gens = gens
        # unknown slots: for each generator, target coordinates of the right parity
        self.slots = []
        for c, g in enumerate(gens):
            want = (source.parity_of(g) + parity) % 2
            for i in range(target.dim):
                if target.parity[i] == want:
                    self.slots.append((c, i))
        slot_index = {s: k for k, s in enumerate(self.slots)}
        rows = []
        na = a.dim
        for k in self.pres.kernel_generators:
            # constraint: sum_c act_N(k_c) y_c = 0
            acc = [dict() for _ in range(target.dim)]
            for c in range(len(gens)):
                kc = k[c * na:(c + 1) * na]
                if not any(kc):
                    continue
                act = target.action_matrix(kc)
                for i, r in enumerate(act.sparse_rows()):
                    for j, v in r.items():
                        s = slot_index.get((c, j))
                        if s is not None:
                            acc[i][s] = acc[i].get(s, ZERO) + v
            rows.extend({s: v for s, v in r.items() if v} for r in acc)
        self.constraints = Matrix._wrap(len(rows), len(self.slots), rows)
        self.space = ql.nullspace(self.constraints)
        self._section = None

    @property
    def dim(self):
        return self.space.dim

    def _source_section(self):
        """Q-linear section of the presentation surjection (canonical solve)."""
        if self._section is None:
            x = ql.solve(self.pres.surjection.matrix, Matrix.identity(self.source.dim))
            if x is None:
                raise VerificationFailed("presentation surjection has no section")
            self._section = x
        return self._section

    def matrix_of(self, y) -> Matrix:
        """Full matrix of the map whose generator images are given by slot vector ``y``."""
        a = self.source.algebra
        na = a.dim
        ng = len(self.gens)
        ys = [[ZERO] * self.target.dim for _ in range(ng)]
        for (c, i), v in zip(self.slots, y):
            if v:
                ys[c][i] = v
        # u = (generator images) o (section of the presentation)
        return _gen_image_matrix(self.target, [tuple(v) for v in ys]) @ self._source_section()

    def basis(self):
        return [ModuleHom(self.source, self.target, self.matrix_of(y), check=False)
                for y in self.space.vectors()]

    def slot_vector(self, u: ModuleHom):
        ys = [u.matrix @ g for g in self.gens]
        return tuple(ys[c][i] for c, i in self.slots)

    def coordinates(self, u: ModuleHom):
        """Coordinates of ``u`` in ``basis()``; None if ``u`` is not in the space."""
        y = self.slot_vector(u)
        if self.matrix_of(y) != u.matrix:
            return None
        return self.space.coordinates(y)


def hom_space(m, n, parity=0) -> HomSpace:
    return HomSpace(m, n, parity)


class HomModule(SuperModule):
    """barHom_A(M, N) as a right supermodule."""

    def __init__(self, source, target):
        even, odd = HomSpace(source, target, 0), HomSpace(source, target, 1)
        self.source, self.target = source, target
        self.parts = (even, odd)
        self.homs = even.basis() + odd.basis()
        a = source.algebra
        parity = [0] * even.dim + [1] * odd.dim
        action = []
        for b in range(a.dim):
            cols = [self.coordinates(self._act_hom(u, b)) for u in self.homs]
            action.append(Matrix.from_columns(cols, len(self.homs)) if cols
                          else Matrix.zeros(0, 0))
        super().__init__(a, len(parity), parity, action,
                         name=f"barHom({source.name},{target.name})", check=False)

    def _act_hom(self, u: ModuleHom, b):
        """``u . e_b``: m -> (-1)^{|b||m|} u(m e_b)."""
        a = self.source.algebra
        src = self.source
        sign = [(-1 if (a.parity[b] and src.parity[j]) else 1) for j in range(src.dim)]
        mat = u.matrix @ src.action[b]
        rows = [{j: v * sign[j] for j, v in r.items()} for r in mat.sparse_rows()]
        return ModuleHom(src, self.target, Matrix._wrap(mat.nrows, mat.ncols, rows), check=False)

    def coordinates(self, u: ModuleHom):
        e, o = u.parity_decomposition
        ce = self.parts[0].coordinates(ModuleHom(self.source, self.target, e, check=False))
        co = self.parts[1].coordinates(ModuleHom(self.source, self.target, o, check=False))
        if ce is None or co is None:
            raise InvariantViolation("map is not A-linear")
        return tuple(ce) + tuple(co)

    def to_hom(self, coords) -> ModuleHom:
        mat = Matrix.zeros(self.target.dim, self.source.dim)
        for c, u in zip(coords, self.homs):
            if c:
                mat = mat + u.matrix.scale(c)
        return ModuleHom(self.source, self.target, mat, check=False)

    @property
    def even_part(self):
        return self.parts[0]


def hom_modules(m: SuperModule, n: SuperModule) -> HomModule:
    _check_same_algebra(m, n)
    return HomModule(m, n)


def hom_by_linear_algebra(m: SuperModule, n: SuperModule, parity: int) -> Subspace:
    """Independent route: all Q-matrices of one parity commuting with the action.

    Returns the solution space inside ``Q^{dim N * dim M}`` (row-major entries).
    Used to cross-check ``HomSpace`` on small modules.
    """
    nm, nn = m.dim, n.dim
    idx = [(i, j) for i in range(nn) for j in range(nm)
           if (n.parity[i] + m.parity[j]) % 2 == parity]
    pos = {ij: k for k, ij in enumerate(idx)}
    rows = []
    for b in m.algebra.generators:
        am, an = m.action[b], n.action[b]
        # (U am - an U)[i, j] = sum_k U[i,k] am[k,j] - sum_k an[i,k] U[k,j]
        amT = am.T.sparse_rows()
        anr = an.sparse_rows()
        for i in range(nn):
            for j in range(nm):
                r = {}
                for k, v in amT[j].items():
                    if (i, k) in pos:
                        r[pos[(i, k)]] = r.get(pos[(i, k)], ZERO) + v
                for k, v in anr[i].items():
                    if (k, j) in pos:
                        r[pos[(k, j)]] = r.get(pos[(k, j)], ZERO) - v
                r = {c: v for c, v in r.items() if v}
                if r:
                    rows.append(r)
    sol = ql.nullspace(Matrix._wrap(len(rows), len(idx), rows))
    full = []
    for v in sol.vectors():
        w = [ZERO] * (nn * nm)
        for (i, j), x in zip(idx, v):
            w[i * nm + j] = x
        full.append(tuple(w))
    return Subspace(nn * nm, full)


# -- tensor products ------------------------------------------------------------------------

class TensorModule(SuperModule):
    """``M (x)_A R`` as a quotient of the Q-tensor product.

    ``R`` is either a right A-supermodule (``tensor_over``) or an algebra B
    reached by a ring map ``f: A -> B`` (``base_change``).  Pure tensors
    ``m_i (x) r_j`` sit at index ``i * dim R + j`` of the Q-tensor space.
    """

    def _setup(self, left, right_dim, right_parity, relations, out_algebra, right_action, name):
        self.left, self.right_dim, self.right_parity = left, right_dim, right_parity
        self.relations = relations
        comp = relations.complement_coords()
        self.pairs = tuple(divmod(k, right_dim) for k in comp)
        parity = [(left.parity[i] + right_parity[j]) % 2 for i, j in self.pairs]
        action = []
        for b in range(out_algebra.dim):
            rcols = right_action[b]  # sparse columns: r_j . e_b
            cols = []
            for i, j in self.pairs:
                cols.append(self.coords({i * right_dim + k: v for k, v in rcols[j].items()}))
            action.append(Matrix.from_columns(cols, len(comp)) if cols else Matrix.zeros(0, 0))
        SuperModule.__init__(self, out_algebra, len(comp), parity, action, name=name, check=False)

    def coords(self, sparse):
        """Quotient coordinates of a sparse vector of the Q-tensor space."""
        return self.relations.quotient_coords(sparse)

    def pure(self, m, r):
        """Coordinates of ``m (x) r``."""
        vec = {}
        for i, x in enumerate(m):
            if x:
                for j, y in enumerate(r):
                    if y:
                        vec[i * self.right_dim + j] = x * y
        return self.coords(vec)

    def lift(self, k):
        i, j = self.pairs[k]
        return i, j


def _relations(left, right_dim, a_gens, left_cols, right_left_action):
    rows = []
    for b in a_gens:
        lc = left_cols[b]
        for i in range(left.dim):
            mi_a = lc[i]
            for j in range(right_dim):
                r = {}
                for k, v in mi_a.items():
                    r[k * right_dim + j] = v
                for k, v in right_left_action(b, j).items():
                    idx = i * right_dim + k
                    w = r.get(idx, ZERO) - v
                    if w:
                        r[idx] = w
                    else:
                        r.pop(idx, None)
                if r:
                    rows.append(r)
    return Subspace._from_sparse(left.dim * right_dim, rows)


def tensor_over(m: SuperModule, n: SuperModule) -> TensorModule:
    """``M (x)_A N`` with the Koszul-signed balancing ``ma (x) n = m (x) a.n``."""
    _check_same_algebra(m, n)
    a = m.algebra
    ncols = n.action_columns

    def left_act(b, j):
        s = -1 if (a.parity[b] and n.parity[j]) else 1
        return {k: s * v for k, v in ncols[b][j].items()}

    rel = _relations(m, n.dim, a.generators, m.action_columns, left_act)
    t = TensorModule.__new__(TensorModule)
    t._setup(m, n.dim, n.parity, rel, a, ncols, f"{m.name}⊗{n.name}")
    t.right = n
    return t


def base_change(m: SuperModule, f: RingHom) -> TensorModule:
    """``M (x)_A B`` as a right B-supermodule along ``f: A -> B``."""
    if f.source is not m.algebra and f.source != m.algebra:
        raise AlgebraMismatch("base_change: ring map source differs from module algebra")
    a, b = f.source, f.target
    fimg = [f(a.basis_vec(x)) for x in range(a.dim)]
    # left action of A on B: a . r = f(a) r
    lcache = {}

    def left_act(x, j):
        key = (x, j)
        if key not in lcache:
            lcache[key] = ql.to_sparse(b.mul(fimg[x], b.basis_vec(j)))
        return lcache[key]

    rel = _relations(m, b.dim, a.generators, m.action_columns, left_act)
    right_action = [[ql.to_sparse(b.mul(b.basis_vec(j), b.basis_vec(y))) for j in range(b.dim)]
                    for y in range(b.dim)]
    t = TensorModule.__new__(TensorModule)
    t._setup(m, b.dim, b.parity, rel, b, right_action, f"{m.name}⊗{b.name}")
    t.ring_map = f
    return t


def tensor_hom_left(u: ModuleHom, t_src: TensorModule, t_dst: TensorModule) -> ModuleHom:
    """``u (x) 1`` between two tensor modules with the same right factor (u even)."""
    cols = []
    rd = t_src.right_dim
    ucols = [ql.to_sparse(c) for c in u.matrix.columns()]
    for i, j in t_src.pairs:
        cols.append(t_dst.coords({k * rd + j: v for k, v in ucols[i].items()}))
    return ModuleHom(t_src, t_dst, Matrix.from_columns(cols, t_dst.dim) if cols
                     else Matrix.zeros(t_dst.dim, 0), check=False)


def tensor_hom_right(g, t_src: TensorModule, t_dst: TensorModule, target=None) -> ModuleHom:
    """``1 (x) g`` for an even map ``g`` on the right factor (matrix or ring map)."""
    gm = g.matrix if hasattr(g, "matrix") else g
    rd_dst = t_dst.right_dim
    cols = []
    for i, j in t_src.pairs:
        img = gm.col(j)
        cols.append(t_dst.coords({i * rd_dst + k: v for k, v in enumerate(img) if v}))
    mat = Matrix.from_columns(cols, t_dst.dim) if cols else Matrix.zeros(t_dst.dim, 0)
    return ModuleHom(t_src, target or t_dst, mat, check=False)


def unit_map(m: SuperModule, t: TensorModule) -> ModuleHom:
    """``m -> m (x) 1`` into a base change (A-linear through the ring map)."""
    one = t.ring_map.target.unit
    cols = [t.pure(m.basis_vec(i), one) for i in range(m.dim)]
    return ModuleHom(m, t, Matrix.from_columns(cols, t.dim) if cols else Matrix.zeros(t.dim, 0),
                     check=False)


def restrict_scalars(n: SuperModule, f: RingHom) -> SuperModule:
    """View a B-module as an A-module through ``f: A -> B``."""
    a = f.source
    action = [n.action_matrix(f(a.basis_vec(x))) for x in range(a.dim)]
    return SuperModule(a, n.dim, n.parity, action, name=f"{n.name}|{a.name}", check=False)


# -- free tensor lemma -------------------------------------------------------------------

@dataclass
class FreeTensorIso:
    tensor: TensorModule
    target: SuperModule
    phi: ModuleHom
    psi: ModuleHom


def free_tensor_iso(p: int, q: int, m: SuperModule) -> FreeTensorIso:
    """``(A^p + (Pi A)^q) (x) M  ~  M^p + (Pi M)^q`` with both maps verified.

    ``phi(e_c a (x) m) = (-1)^{|a||m|} m a`` in slot ``c``; the sign is the one
    forced by ``e_c a (x) m = e_c (x) a.m``.
    """
    a = m.algebra
    free = free_module(a, p, q)
    t = tensor_over(free, m)
    target = direct_sum([m] * p + [parity_swap(m)] * q, algebra=a)
    na, nm = a.dim, m.dim
    cols_phi = []
    for i, j in t.pairs:
        c, b = divmod(i, na)
        sign = -1 if (a.parity[b] and m.parity[j]) else 1
        img = m.action[b] @ m.basis_vec(j)
        col = [ZERO] * target.dim
        for k, v in enumerate(img):
            if v:
                col[c * nm + k] = sign * v
        cols_phi.append(col)
    phi = Matrix.from_columns(cols_phi, target.dim) if cols_phi else Matrix.zeros(target.dim, 0)
    # phi must vanish on the balancing relations
    for r in t.relations.sparse_vectors():
        acc = [ZERO] * target.dim
        for idx, v in r.items():
            i, j = divmod(idx, nm)
            c, b = divmod(i, na)
            sign = -1 if (a.parity[b] and m.parity[j]) else 1
            for k, w in enumerate(m.action[b] @ m.basis_vec(j)):
                if w:
                    acc[c * nm + k] += sign * v * w
        if any(acc):
            raise VerificationFailed("phi does not respect the balancing relations")
    cols_psi = []
    for c in range(p + q):
        ec = [ZERO] * (na * (p + q))
        ec[c * na:(c + 1) * na] = a.unit
        for j in range(nm):
            cols_psi.append(t.pure(ec, m.basis_vec(j)))
    psi = Matrix.from_columns(cols_psi, t.dim) if cols_psi else Matrix.zeros(t.dim, 0)
    phi_h = ModuleHom(t, target, phi, check=False)
    psi_h = ModuleHom(target, t, psi, check=False)
    if t.dim != target.dim:
        raise VerificationFailed(f"dimensions differ: {t.dim} vs {target.dim}")
    if not (phi @ psi).is_identity():
        raise VerificationFailed("phi . psi != id")
    if not (psi @ phi).is_identity():
        raise VerificationFailed("psi . phi != id")
    if not (phi_h.is_linear() and psi_h.is_linear()):
        raise VerificationFailed("free tensor maps are not A-linear")
    if phi_h.parity != 0 or psi_h.parity != 0:
        raise VerificationFailed("free tensor maps are not even")
    return FreeTensorIso(t, target, phi_h, psi_h)


# -- projectivity and the Cayley-Hamilton corollaries ---------------------------------------

@dataclass
class ProjectivityVerdict:
    projective: bool
    surjection: ModuleHom
    section: ModuleHom | None

    def __bool__(self):
        return self.projective


def is_projective(p: SuperModule) -> ProjectivityVerdict:
    """Search for an even A-linear section of ``A^{p|q} -> P``."""
    pres = presentation_of(p)
    free, pi = pres.free, pres.surjection
    hs = HomSpace(p, free, 0)
    # affine condition: pi(sigma(g_c)) = g_c
    rows, rhs = [], []
    slot_of = {}
    for k, (c, i) in enumerate(hs.slots):
        slot_of.setdefault(c, []).append((k, i))
    pim = pi.matrix
    for c, g in enumerate(hs.gens):
        for r in range(p.dim):
            row = {}
            for k, i in slot_of.get(c, []):
                v = pim[r, i]
                if v:
                    row[k] = v
            rows.append(row)
            rhs.append(g[r])
    n_slots = len(hs.slots)
    allrows = list(hs.constraints.sparse_rows()) + rows
    allrhs = [ZERO] * hs.constraints.nrows + rhs
    a_mat = Matrix._wrap(len(allrows), n_slots, allrows)
    sol = ql.solve(a_mat, Matrix.from_columns([allrhs], len(allrhs)))
    if sol is None:
        return ProjectivityVerdict(False, pi, None)
    sigma = ModuleHom(p, free, hs.matrix_of(sol.col(0)), check=False)
    if not (pi.matrix @ sigma.matrix).is_identity() and p.dim:
        raise VerificationFailed("splitting section does not split")
    if not sigma.is_linear() or sigma.parity != 0:
        raise VerificationFailed("splitting section is not an even A-linear map")
    return ProjectivityVerdict(True, pi, sigma)


def module_times_ideal(m: SuperModule, ideal) -> Subspace:
    cols = []
    for r in ideal.vectors():
        cols.extend(m.action_matrix(r).columns())
    return Subspace(m.dim, cols)


def nakayama_witness(m: SuperModule, ideal):
    """Even ``a`` with ``M (1 + a) = 0``, given ``M = M I``."""
    a = m.algebra
    if module_times_ideal(m, ideal).dim != m.dim:
        raise HypothesisFailed("M != M I", {"dim M": m.dim,
                                            "dim MI": module_times_ideal(m, ideal).dim})
    ev = a.even_basis
    n = m.dim
    cols = []
    for b in ev:
        col = {}
        for i, r in enumerate(m.action[b].sparse_rows()):
            for j, v in r.items():
                col[i * n + j] = v
        cols.append(col)
    rows = [dict() for _ in range(n * n)]
    for c, col in enumerate(cols):
        for k, v in col.items():
            rows[k][c] = v
    target = [ZERO] * (n * n)
    for i in range(n):
        target[i * n + i] = -ONE
    sol = ql.solve(Matrix._wrap(n * n, len(ev), rows), Matrix.from_columns([target], n * n))
    if sol is None:
        raise WitnessNotFound("no even a with M(1+a) = 0 although M = MI")
    x = [ZERO] * a.dim
    for b, v in zip(ev, sol.col(0)):
        x[b] = v
    x = tuple(x)
    if not m.action_matrix(ql.vadd(a.unit, x)).is_zero():
        raise VerificationFailed("(1 + a) does not annihilate M")
    return x


@dataclass
class EndoVerdict:
    status: str  # "isomorphism", "not-surjective" or "rejected"
    inverse: ModuleHom | None = None
    reason: str = ""

    @property
    def is_isomorphism(self):
        return self.status == "isomorphism"


def surjective_endo_check(u: ModuleHom) -> EndoVerdict:
    if u.source is not u.target and u.source.dim != u.target.dim:
        return EndoVerdict("rejected", reason="not an endomorphism")
    if u.parity != 0:
        return EndoVerdict("rejected", reason="not even")
    if not u.is_linear():
        return EndoVerdict("rejected", reason="not A-linear")
    if not u.is_surjective():
        return EndoVerdict("not-surjective", reason=f"rank {u.matrix.rank()} < {u.target.dim}")
    if not u.is_injective():
        raise VerificationFailed("surjective endomorphism with nonzero kernel")
    inv = u.inverse()
    if inv is None or not inv.is_linear() or inv.parity != 0:
        raise VerificationFailed("inverse of surjective endomorphism is not an even A-linear map")
    return EndoVerdict("isomorphism", inverse=inv)


# -- finite limits ----------------------------------------------------------------------------

@dataclass
class LimitTensorIso:
    limit: SuperModule
    tensor_of_limit: TensorModule
    limit_of_tensors: SuperModule
    comparison: ModuleHom
    bijective: bool


def inverse_limit(objects, arrows, algebra=None):
    """Limit of a finite diagram: compatible families inside the direct sum.

    ``arrows`` are ``(i, j, hom)`` with ``hom: objects[i] -> objects[j]``.
    Returns (limit module, inclusion into the direct sum, the direct sum).
    """
    total = direct_sum(list(objects), algebra=algebra)
    offs = [0]
    for o in objects:
        offs.append(offs[-1] + o.dim)
    rows = []
    for i, j, h in arrows:
        # h(x_i) - x_j = 0
        for r in range(objects[j].dim):
            row = {}
            for c, v in h.matrix.sparse_rows()[r].items():
                row[offs[i] + c] = v
            row[offs[j] + r] = row.get(offs[j] + r, ZERO) - ONE
            rows.append({c: v for c, v in row.items() if v})
    space = ql.nullspace(Matrix._wrap(len(rows), total.dim, rows))
    lim, incl = submodule(total, space, name="lim")
    return lim, incl, total, offs


def finite_limit_tensor_iso(p: SuperModule, objects, arrows) -> LimitTensorIso:
    """Compare ``P (x) lim M_i`` with ``lim (P (x) M_i)``."""
    a = p.algebra
    lim, incl, total, offs = inverse_limit(objects, arrows, algebra=a)
    t_lim = tensor_over(p, lim)
    t_objs = [tensor_over(p, o) for o in objects]
    t_arrows = [(i, j, tensor_hom_right(h, t_objs[i], t_objs[j])) for i, j, h in arrows]
    lim_t, incl_t, total_t, offs_t = inverse_limit(t_objs, t_arrows, algebra=a)
    # comparison: p (x) (x_i) -> (p (x) x_i)_i
    cols = []
    for i, j in t_lim.pairs:
        fam = incl(lim.basis_vec(j))
        col = []
        for o, t in enumerate(t_objs):
            xo = fam[offs[o]:offs[o + 1]]
            col.extend(t.pure(p.basis_vec(i), xo))
        coords = Subspace(total_t.dim, incl_t.matrix.columns()).coordinates(tuple(col))
        if coords is None:
            raise VerificationFailed("comparison map leaves the limit")
        cols.append(coords)
    mat = Matrix.from_columns(cols, lim_t.dim) if cols else Matrix.zeros(lim_t.dim, 0)
    comp = ModuleHom(t_lim, lim_t, mat, check=False)
    bij = t_lim.dim == lim_t.dim and comp.is_isomorphism() if t_lim.dim else lim_t.dim == 0
    return LimitTensorIso(lim, t_lim, lim_t, comp, bij)
