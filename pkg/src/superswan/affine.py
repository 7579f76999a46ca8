"""Affine superschemes of finite-dimensional algebras and Čech cohomology.

For artinian ``A`` the space ``Spec A = Spec A_0`` is finite and discrete.
Sections over an open ``U`` are the localization of ``A`` at the sum of the
idempotents of the points in ``U``; restrictions are further localizations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import qlinalg as ql
from .qlinalg import Matrix, Subspace
from .superring import (RingHom, SuperAlgebra, cached_spectrum, localize_at_even)
from .supermodule import (SuperModule, base_change, direct_sum, quotient_module,
                          restrict_scalars, submodule, tensor_hom_right)
from .supersheaf import (FiniteSpace, ModuleSheaf, SuperRingSheaf, classify)


@dataclass
class AffineSuperScheme:
    ring: SuperAlgebra
    points: list
    space: FiniteSpace
    structure_sheaf: SuperRingSheaf
    localizations: dict

    def presentations(self):
        """Each point as a homogeneous maximal ideal of A and as a maximal ideal of A_0."""
        out = []
        for p in self.points:
            out.append({"point": self.space.points[p.index],
                        "homogeneous_ideal_dim": p.maximal_ideal.space.dim,
                        "even_ideal_dim": p.even_maximal_ideal().dim,
                        "residue_dim": self.ring.dim - p.maximal_ideal.space.dim})
        return out

    def global_sections_iso(self) -> bool:
        """Gamma(Spec A, O) is A itself, with the identity as comparison map."""
        o = self.structure_sheaf.global_ring
        return o is self.ring or (o == self.ring and self.localizations[self.space.whole]
                                  .matrix.is_identity())


def _idempotent_sum(a, pts, u):
    e = ql.zero_vec(a.dim)
    for i in u:
        e = ql.vadd(e, pts[i].idempotent)
    return e


def spec(a: SuperAlgebra) -> AffineSuperScheme:
    pts = cached_spectrum(a)
    space = FiniteSpace.discrete(len(pts), labels=[f"m{i}" for i in range(len(pts))])
    sections, locs = {}, {}
    for u in space.opens:
        if u == space.whole:
            sections[u], locs[u] = a, RingHom.identity(a)
        else:
            b, m = localize_at_even(a, _idempotent_sum(a, pts, u))
            b.name = f"{a.name}[{','.join(space.labels(u))}]" if u else "0"
            sections[u], locs[u] = b, m
    sections_inv = {}
    for u in space.opens:
        sol = ql.solve(locs[u].matrix, Matrix.identity(sections[u].dim))
        sections_inv[u] = sol
    res = {}
    for u, v in space.pairs():
        if u != v:
            res[(u, v)] = RingHom(sections[u], sections[v], locs[v].matrix @ sections_inv[u])
    o = SuperRingSheaf(space, sections, res, name=f"O_Spec({a.name})")
    return AffineSuperScheme(a, pts, space, o, locs)


def tensor_presheaf(m: SuperModule, base: SuperRingSheaf, name=None) -> ModuleSheaf:
    """``U -> M (x)_A O(U)`` with restrictions ``1 (x) rho``."""
    sp = base.space
    sections = {u: base_change(m, base.restriction(sp.whole, u)) for u in sp.opens}
    res = {}
    for u, v in sp.pairs():
        if u != v:
            res[(u, v)] = tensor_hom_right(base.restriction(u, v), sections[u], sections[v]).matrix
    return ModuleSheaf(base, sections, res, name=name or f"P({m.name})")


def module_sheaf_tilde(x: AffineSuperScheme, m: SuperModule, check=True) -> ModuleSheaf:
    """``M~`` with ``M~(U) = M (x)_A O(U)``."""
    f = tensor_presheaf(m, x.structure_sheaf, name=f"{m.name}~")
    if check:
        f.validate()
    return f


# -- Čech cohomology ---------------------------------------------------------------------------------

@dataclass
class CechGroup:
    degree: int
    dim: int
    even_dim: int
    odd_dim: int
    module: SuperModule

    def as_dict(self):
        return {"degree": self.degree, "dim": self.dim, "parity": f"{self.even_dim}|{self.odd_dim}"}


@dataclass
class CechResult:
    cover: list
    groups: list
    differentials: list
    dd_zero: bool
    h0_matches_sections: bool
    cochain_dims: list = field(default_factory=list)

    def higher_vanish(self):
        return all(g.dim == 0 for g in self.groups[1:])

    def as_dict(self, space):
        return {"cover": [space.labels(c) for c in self.cover],
                "cochain_dims": self.cochain_dims,
                "groups": [g.as_dict() for g in self.groups],
                "dd_zero": self.dd_zero, "h0_matches_sections": self.h0_matches_sections}


def cech_cohomology(f: ModuleSheaf, cover) -> CechResult:
    """Alternating Čech complex of ``f`` on a finite open cover (increasing index tuples)."""
    sp = f.space
    base = f.base
    cover = [frozenset(c) for c in cover]
    top = frozenset().union(*cover) if cover else frozenset()
    ring = base.section(top)
    k = len(cover)
    simplices, cochains = [], []
    for p in range(k):
        simp = list(combinations(range(k), p + 1))
        inter = [frozenset.intersection(*[cover[i] for i in s]) for s in simp]
        mods = [restrict_scalars(f.section(w), base.restriction(top, w)) for w in inter]
        simplices.append((simp, inter, mods))
        cochains.append(direct_sum(mods, algebra=ring))
    diffs = []
    for p in range(k - 1):
        simp, inter, mods = simplices[p]
        simp1, inter1, mods1 = simplices[p + 1]
        offs = [0]
        for m in mods:
            offs.append(offs[-1] + m.dim)
        offs1 = [0]
        for m in mods1:
            offs1.append(offs1[-1] + m.dim)
        index = {s: i for i, s in enumerate(simp)}
        rows = [dict() for _ in range(offs1[-1])]
        for t, tau in enumerate(simp1):
            for j in range(len(tau)):
                sigma = tau[:j] + tau[j + 1:]
                s = index[sigma]
                r = f.restriction(inter[s], inter1[t])
                sign = -1 if j % 2 else 1
                for a, row in enumerate(r.sparse_rows()):
                    tgt = rows[offs1[t] + a]
                    for c, v in row.items():
                        key = offs[s] + c
                        w = tgt.get(key, 0) + sign * v
                        if w:
                            tgt[key] = w
                        else:
                            tgt.pop(key, None)
        diffs.append(Matrix._wrap(offs1[-1], offs[-1], rows))
    dd = all((diffs[p + 1] @ diffs[p]).is_zero() for p in range(len(diffs) - 1))
    groups = []
    for p in range(k):
        c = cochains[p]
        ker = ql.nullspace(diffs[p]) if p < len(diffs) else Subspace.full(c.dim)
        kmod, kincl = submodule(c, ker)
        if p == 0:
            img_vecs = []
        else:
            img_vecs = diffs[p - 1].columns()
        coords = [ker.coordinates(v) for v in img_vecs]
        if any(x is None for x in coords):
            dd = False
            coords = [x for x in coords if x is not None]
        h, _ = quotient_module(kmod, Subspace(kmod.dim, coords))
        groups.append(CechGroup(p, h.dim, h.even_dim, h.odd_dim, h))
    if k == 0:
        groups.append(CechGroup(0, 0, 0, 0, None))
    h0_ok = True
    if cover:
        stacked = Matrix.vstack([f.restriction(top, c) for c in cover], f.section(top).dim)
        h0_ok = (stacked.rank() == f.section(top).dim
                 and (ql.image(stacked) == (ql.nullspace(diffs[0]) if diffs
                                            else Subspace.full(cochains[0].dim))))
    return CechResult(cover, groups, diffs, dd, h0_ok, [c.dim for c in cochains])


def point_cover(space: FiniteSpace):
    return space.min_open_cover()


def all_opens_cover(space: FiniteSpace):
    return [u for u in space.opens if u]


@dataclass
class AuditEntry:
    module: str
    sheaf_ok: bool
    quasi_coherent: bool
    acyclic: bool
    globally_generated: bool
    cohomology: dict

    @property
    def passed(self):
        return self.sheaf_ok and self.quasi_coherent and self.acyclic and self.globally_generated


def acyclicity_audit(x: AffineSuperScheme, catalog) -> list:
    """Quasi-coherence, vanishing higher Čech cohomology and global generation of each ``M~``."""
    out = []
    for m in catalog:
        f = module_sheaf_tilde(x, m, check=False)
        ok = f.is_sheaf()
        cl = classify(f) if ok else None
        coh = {}
        acyclic = ok
        if ok:
            for label, cover in (("points", point_cover(x.space)),
                                 ("all-opens", all_opens_cover(x.space))):
                r = cech_cohomology(f, cover)
                coh[label] = [g.as_dict() for g in r.groups]
                acyclic = acyclic and r.dd_zero and r.h0_matches_sections and r.higher_vanish()
        out.append(AuditEntry(m.name, ok, bool(cl and cl.quasi_coherent), acyclic,
                              bool(cl and cl.globally_generated), coh))
    return out
