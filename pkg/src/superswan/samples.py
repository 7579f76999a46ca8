"""Seeded generators of algebras, modules, sheaves and maps for property tests."""

from __future__ import annotations

import random

from . import qlinalg as ql
from .qlinalg import Matrix, Subspace
from .superring import (SuperAlgebra, cached_spectrum, grassmann, product, rationals)
from .supermodule import (HomSpace, ModuleHom, SuperModule, direct_sum, free_module,
                          idempotent_summand, parity_swap, quotient_module, regular_module)
from .supersheaf import (FiniteSpace, ModuleSheaf, SuperRingSheaf, constant_ring_sheaf,
                         free_sheaf, module_sheaf_from_stalks, skyscraper)

SMALL = (-2, -1, 1, 2, 3)


def rng_for(seed) -> random.Random:
    return random.Random(seed)


def small_rational(rng):
    if rng.random() < 0.2:
        return ql.q(rng.choice(SMALL)) / rng.choice((2, 3))
    return ql.q(rng.choice(SMALL))


def random_homogeneous(a: SuperAlgebra, parity, rng, density=0.6):
    basis = a.even_basis if parity == 0 else a.odd_basis
    v = [ql.ZERO] * a.dim
    for i in basis:
        if rng.random() < density:
            v[i] = small_rational(rng)
    if basis and not any(v):
        v[rng.choice(basis)] = ql.ONE
    return tuple(v)


def random_module_element(m: SuperModule, parity, rng, density=0.6):
    v = [ql.ZERO] * m.dim
    idx = [i for i in range(m.dim) if m.parity[i] == parity]
    for i in idx:
        if rng.random() < density:
            v[i] = small_rational(rng)
    if idx and not any(v):
        v[rng.choice(idx)] = ql.ONE
    return tuple(v)


def projective_pieces(a: SuperAlgebra):
    """``A e`` and ``Pi(A) e`` for each spectrum point idempotent ``e``."""
    r = regular_module(a)
    out = []
    for p in cached_spectrum(a):
        m, _ = idempotent_summand(r, p.idempotent)
        m.name = f"A·e{p.index}"
        n, _ = idempotent_summand(parity_swap(r), p.idempotent)
        n.name = f"ΠA·e{p.index}"
        out.extend([m, n])
    return out


def random_quotient(m: SuperModule, rng, max_gens=1):
    """``M / (g A)`` for a few random homogeneous ``g``."""
    rows = []
    for _ in range(rng.randint(1, max_gens)):
        g = random_module_element(m, rng.randint(0, 1), rng)
        rows.extend(m.orbit_rows(g))
    sub = Subspace._from_sparse(m.dim, rows)
    q, _ = quotient_module(m, sub)
    return q


def random_module(a: SuperAlgebra, rng, max_rank=2) -> SuperModule:
    """Free modules, their parity twists, projective pieces and random quotients."""
    kind = rng.choice(("free", "free", "quotient", "pieces", "sum"))
    if kind == "free":
        p, q = rng.randint(0, max_rank), rng.randint(0, max_rank)
        if p + q == 0:
            p = 1
        return free_module(a, p, q)
    if kind == "quotient":
        p, q = rng.randint(0, 1), rng.randint(0, 1)
        if p + q == 0:
            q = 1
        m = random_quotient(free_module(a, p, q), rng)
        m.name = f"{a.name}^{{{p}|{q}}}/g"
        return m
    pieces = projective_pieces(a)
    if kind == "pieces":
        return rng.choice(pieces)
    chosen = rng.sample(pieces, min(2, len(pieces)))
    m = direct_sum(chosen)
    m.name = "⊕".join(c.name for c in chosen)
    return m


def random_even_hom(m: SuperModule, n: SuperModule, rng) -> ModuleHom:
    hs = HomSpace(m, n, 0)
    basis = hs.basis()
    mat = Matrix.zeros(n.dim, m.dim)
    for h in basis:
        if rng.random() < 0.7:
            mat = mat + h.matrix.scale(small_rational(rng))
    return ModuleHom(m, n, mat, check=False)


def random_algebra(rng) -> SuperAlgebra:
    choices = [grassmann(1), grassmann(2), product(grassmann(1), grassmann(1)),
               product(grassmann(1), rationals()), product(grassmann(2), grassmann(1))]
    return rng.choice(choices)


# -- sheaves on small finite spaces ----------------------------------------------------------

def spaces():
    return {"sierpinski": FiniteSpace.sierpinski(), "pseudocircle": FiniteSpace.pseudocircle(),
            "discrete2": FiniteSpace.discrete(2)}


def random_stalk_sheaf(base: SuperRingSheaf, rng, ring: SuperAlgebra, max_rank=1,
                       name="F") -> ModuleSheaf:
    """Random stalk modules over a constant base with random even specialization maps.

    Only spaces of height at most one are used, so no composition constraint
    arises among the specialization maps.
    """
    sp = base.space
    stalks = {}
    for x in range(sp.n):
        kind = rng.choice(("free", "free", "quotient", "zero"))
        if kind == "free":
            p, q = rng.randint(0, max_rank), rng.randint(0, max_rank)
            stalks[x] = free_module(ring, p, q)
        elif kind == "quotient":
            stalks[x] = random_quotient(free_module(ring, 1, 0), rng)
        else:
            stalks[x] = free_module(ring, 0, 0)
    maps = {}
    for x, y in sp.specializations():
        maps[(x, y)] = random_even_hom(stalks[x], stalks[y], rng).matrix
    return module_sheaf_from_stalks(base, stalks, maps, name=name)


def sheaf_corpus(seed=0, count=12):
    """Seeded mix of structure, free, skyscraper and random-stalk sheaves."""
    rng = rng_for(seed)
    out = []
    rings = [rationals(), grassmann(1)]
    for name, sp in spaces().items():
        for ring in rings:
            base = constant_ring_sheaf(sp, ring)
            out.append(free_sheaf(base, 1, 0, name=f"O[{name},{ring.name}]"))
            out.append(free_sheaf(base, 1, 1, name=f"O^1|1[{name},{ring.name}]"))
            closed = [x for x in range(sp.n) if sp.is_closed({x})]
            if closed:
                out.append(skyscraper(base, closed[0], free_module(ring, 1, 0),
                                      name=f"sky[{name},{ring.name}]"))
    i = 0
    while len(out) < count + 14:
        sp = rng.choice(list(spaces().values()))
        ring = rng.choice(rings)
        base = constant_ring_sheaf(sp, ring)
        out.append(random_stalk_sheaf(base, rng, ring, name=f"rand{i}[{sp.name},{ring.name}]"))
        i += 1
    return out


# -- presheaves that are not sheaves -----------------------------------------------------------

def doubled_top(f: ModuleSheaf) -> ModuleSheaf:
    """``P(X) = F(X) + F(X)`` with the second copy dying on restriction; not separated."""
    sp = f.space
    top = sp.whole
    secs = dict(f.sections)
    secs[top] = direct_sum([f.section(top), f.section(top)])
    res = {}
    for u, v in sp.pairs():
        r = f.restriction(u, v)
        if u == top and v == top:
            r = Matrix.identity(secs[top].dim)
        elif u == top:
            r = Matrix.hstack([r, Matrix.zeros(r.nrows, r.ncols)])
        res[(u, v)] = r
    return ModuleSheaf(f.base, secs, res, name=f"{f.name}+")


def truncated(f: ModuleSheaf) -> ModuleSheaf:
    """Keep sections over minimal opens only, zero elsewhere; gluing fails."""
    sp = f.space
    keep = {sp.min_open(x) for x in range(sp.n)} | {sp.empty}
    secs = {}
    for u in sp.opens:
        m = f.section(u)
        secs[u] = m if u in keep else free_module(m.algebra, 0, 0)
    res = {}
    for u, v in sp.pairs():
        if u in keep and v in keep:
            res[(u, v)] = f.restriction(u, v)
        else:
            res[(u, v)] = Matrix.zeros(secs[v].dim, secs[u].dim)
    return ModuleSheaf(f.base, secs, res, name=f"{f.name}|min")


def presheaf_corpus(seed=0):
    """Sheaves of ``sheaf_corpus`` plus their non-sheaf variants.

    A variant is kept only when it is a presheaf, i.e. its first broken law is a
    sheaf axiom.
    """
    out = []
    for f in sheaf_corpus(seed):
        out.append(f)
        for p in (doubled_top(f), truncated(f)):
            bad = p.violations()
            if not bad or bad[0]["law"] in ("sheaf-identity", "sheaf-gluing"):
                out.append(p)
    return out
