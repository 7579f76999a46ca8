"""Acceptance suite: one test per criterion, each printing a pass/fail line."""

import pytest

from superswan import cli
from superswan import descriptors as ds
from superswan.affine import acyclicity_audit, cech_cohomology, module_sheaf_tilde, spec
from superswan.qlinalg import Matrix
from superswan.samples import (presheaf_corpus, projective_pieces, random_even_hom,
                               random_homogeneous, random_module, random_module_element,
                               rng_for, sheaf_corpus)
from superswan.serre_swan import adjunction_check, is_free_sheaf, serre_swan_roundtrip
from superswan.superring import (SuperAlgebra, cached_spectrum, grassmann, ideal_generated,
                                 product, rationals)
from superswan.supermodule import (ModuleHom, direct_sum, free_module, free_tensor_iso,
                                   idempotent_summand, module_times_ideal, nakayama_witness,
                                   parity_swap, regular_module, surjective_endo_check,
                                   tensor_over)
from superswan.supersheaf import (FiniteSpace, classify, constant_ring_sheaf, free_sheaf,
                                  glue_homogeneous, sheafify, stalk_hom_iso, support)
from superswan.witness import ring_refails


# 1 -----------------------------------------------------------------------------------------

def test_criterion_1_grassmann(criterion):
    dims_ok = all(grassmann(n).dim == 2 ** n for n in range(9))
    laws_ok = all(not grassmann(n).violations() for n in range(9))
    a = grassmann(3)
    mult = {k: dict(v) for k, v in a._mult.items()}
    i, j = a.labels.index("b1"), a.labels.index("b2")
    k = next(iter(mult[(i, j)]))
    mult[(i, j)][k] = -mult[(i, j)][k]
    bad = SuperAlgebra(a.dim, a.parity, mult, a.unit, labels=a.labels, check=False)
    found = bad.violations(limit=1)
    rejected = bool(found) and ring_refails(bad, found[0]["law"], found[0]["witness"])
    ok = dims_ok and laws_ok and rejected
    criterion("1", ok, f"dims {dims_ok}, laws n<=8 {laws_ok}, mutation rejected "
                       f"({found[0]['law'] if found else 'none'})")
    assert ok


# 2 -----------------------------------------------------------------------------------------

def _four_expressions(t, a, m, n, x):
    """(m(x)n)x, mx(x)n, m(x)x.n and (-1)^{|x||n|} m(x)nx as quotient coordinates."""
    s = -1 if a.parity_of(x) and a.parity_of(n) else 1
    left_n = tuple(s * v for v in a.mul(n, x))  # x.n
    return (t.act(t.pure(m, n), x), t.pure(a.mul(m, x), n), t.pure(m, left_n),
            tuple(s * v for v in t.pure(m, a.mul(n, x))))


@pytest.mark.xfail(strict=True, reason="the literal four-way chain is not a well-defined "
                                       "action on the graded tensor product; see README")
def test_criterion_2_sign_law_literal(criterion):
    a = grassmann(2)
    t = tensor_over(regular_module(a), regular_module(a))
    rng = rng_for(2)
    agree = 0
    for _ in range(200):
        m, n, x = (random_homogeneous(a, rng.randint(0, 1), rng) for _ in range(3))
        e = _four_expressions(t, a, m, n, x)
        agree += all(v == e[0] for v in e)
    ok = agree == 200
    criterion("2", ok, f"literal four-way equality on {agree}/200 triples")
    assert ok


# 3 -----------------------------------------------------------------------------------------

def test_criterion_3_free_tensor_iso(criterion):
    rng = rng_for(3)
    count = 0
    ok = True
    for a in (grassmann(2), product(grassmann(1), grassmann(1))):
        mods = [random_module(a, rng) for _ in range(5)]
        for p in range(4):
            for q in range(4):
                for m in mods:
                    iso = free_tensor_iso(p, q, m)
                    phi, psi = iso.phi.matrix, iso.psi.matrix
                    ok = ok and (phi @ psi).is_identity() and (psi @ phi).is_identity()
                    count += 1
    criterion("3", ok, f"phi psi = id and psi phi = id on {count} instances")
    assert ok


# 4 -----------------------------------------------------------------------------------------

def _nakayama_case(rng):
    a = rng.choice([grassmann(1), grassmann(2), product(grassmann(1), grassmann(1)),
                    product(grassmann(1), rationals()), product(grassmann(2), grassmann(1))])
    pts = cached_spectrum(a)
    chosen = [p for p in pts if rng.random() < 0.6] or [pts[0]]
    e = tuple(sum(c) for c in zip(*(p.idempotent for p in chosen)))
    m, _ = idempotent_summand(random_module(a, rng), e)
    gens = [e] + [random_homogeneous(a, rng.randint(0, 1), rng) for _ in range(rng.randint(0, 2))]
    return m, ideal_generated(a, gens)


def test_criterion_4a_nakayama(criterion):
    rng = rng_for(41)
    ok = True
    for _ in range(50):
        m, ideal = _nakayama_case(rng)
        assert module_times_ideal(m, ideal).dim == m.dim
        x = nakayama_witness(m, ideal)
        a = m.algebra
        one_plus = tuple(u + v for u, v in zip(a.unit, x))
        ok = ok and a.is_homogeneous(x, 0) and m.action_matrix(one_plus).is_zero()
    criterion("4a", ok, "(1+a) annihilates M on 50 cases with M = MI")
    assert ok


def test_criterion_4b_surjective_endomorphisms(criterion):
    rng = rng_for(42)
    cases, ok = 0, True
    while cases < 100:
        a = rng.choice([grassmann(1), grassmann(2), product(grassmann(1), grassmann(1))])
        m = random_module(a, rng)
        if m.dim == 0:
            continue
        u = random_even_hom(m, m, rng)
        u = ModuleHom(m, m, u.matrix + Matrix.identity(m.dim).scale(rng.choice((1, 2, -3))))
        if u.matrix.rank() < m.dim:
            continue
        v = surjective_endo_check(u)
        inv = v.inverse.matrix if v.is_isomorphism else None
        ok = ok and inv is not None and (inv @ u.matrix).is_identity() \
            and (u.matrix @ inv).is_identity()
        cases += 1
    criterion("4b", ok, f"{cases} surjective even endomorphisms inverted exactly")
    assert ok


# 5 -----------------------------------------------------------------------------------------

def test_criterion_5_sheaf_layer(criterion):
    ps = presheaf_corpus(seed=5)
    stalks_ok = True
    for p in ps:
        s = sheafify(p)
        for x in range(p.space.n):
            g = s.canonical.stalk_map(x)
            stalks_ok = stalks_ok and s.sheaf.stalk(x).dim == p.stalk(x).dim \
                and g.rank() == p.stalk(x).dim
    rng = rng_for(5)
    glue_ok, glued = True, 0
    for f in sheaf_corpus(seed=5):
        sp = f.space
        for u in sp.opens:
            if not u:
                continue
            cover = [sp.min_open(x) for x in sorted(u)]
            for parity in (0, 1):
                s = random_module_element(f.section(u), parity, rng)
                pieces = [f.restriction(u, c) @ s for c in cover]
                g = glue_homogeneous(f, u, cover, pieces, parity)
                glue_ok = glue_ok and g == s and f.section(u).is_homogeneous(g, parity)
                glued += 1
    closed_ok, checked, counter = True, 0, 0
    for f in sheaf_corpus(seed=5):
        if f.space.name not in ("sierpinski", "pseudocircle"):
            continue
        sup = support(f)
        assert sup.closed == f.space.is_closed(set(sup.points))
        if classify(f).finite_type:
            closed_ok = closed_ok and sup.closed
            checked += 1
        elif not sup.closed:
            counter += 1
    ok = stalks_ok and glue_ok and closed_ok
    criterion("5", ok, f"stalks kept on {len(ps)} presheaves, {glued} gluings, "
                       f"support closed on {checked} finite-type sheaves "
                       f"({counter} non-finite-type sheaves with open support)")
    assert ok


# 6 -----------------------------------------------------------------------------------------

def test_criterion_6_stalk_hom(criterion):
    groups = {}
    for f in sheaf_corpus(seed=6, count=20):
        groups.setdefault(id(f.base), []).append(f)
    pairs = [(f, g) for fs in groups.values() for f in fs for g in fs
             if classify(f).finitely_presented]
    rng = rng_for(6)
    pairs = rng.sample(pairs, 20)
    ok = True
    for f, g in pairs:
        for x in range(f.space.n):
            r = stalk_hom_iso(f, g, x)
            ok = ok and r.bijective and (r.phi @ r.psi).is_identity() \
                and (r.psi @ r.phi).is_identity()
    criterion("6", ok, f"explicit inverse at every point for {len(pairs)} pairs")
    assert ok


# 7 -----------------------------------------------------------------------------------------

def test_criterion_7_adjunction(criterion):
    rng = rng_for(7)
    ok, n = True, 0
    for a in (grassmann(2), product(grassmann(1), grassmann(1))):
        x = spec(a)
        sheaves = [free_sheaf(x.structure_sheaf, 1, 0), free_sheaf(x.structure_sheaf, 0, 1)]
        sheaves += [module_sheaf_tilde(x, random_module(a, rng)) for _ in range(3)]
        for f in sheaves:
            for _ in range(2):
                d = adjunction_check(random_module(a, rng), f)
                ok = ok and d.bijective and d.triangle_s and d.triangle_gamma and d.passed
                n += 1
    criterion("7", ok and n >= 20, f"lambda bijective and triangles hold on {n} pairs")
    assert ok and n >= 20


# 8 -----------------------------------------------------------------------------------------

def _catalog(a, mixed):
    mods = [free_module(a, p, q) for p in range(3) for q in range(3)]
    return mods + mixed


def _mixed_l1l1(a):
    r = regular_module(a)
    e0, e1 = (p.idempotent for p in cached_spectrum(a))
    m = direct_sum([idempotent_summand(r, e0)[0], idempotent_summand(parity_swap(r), e1)[0]])
    m.name = "Λ1⊕ΠΛ1"
    return m


def _iso_witnessed(rep):
    isos = [e for e in rep.entries if e.check in ("Gamma(S(P)) ~ P", "S(Gamma(F)) ~ F")]
    return bool(isos) and all(e.status == "pass" and "iso" in e.witness for e in isos)


def test_criterion_8_roundtrip_l1xl1(criterion):
    a = product(grassmann(1), grassmann(1))
    x = spec(a)
    mixed = _mixed_l1l1(a)
    mods = _catalog(a, [mixed] + projective_pieces(a))
    sheaves = [module_sheaf_tilde(x, m) for m in mods]
    rep = serre_swan_roundtrip(x, mods, sheaves)
    s = module_sheaf_tilde(x, mixed)
    cl = classify(s)
    ranks = {x.space.points[k]: f"{p}|{q}" for k, (p, q) in cl.rank.items()}
    not_free = is_free_sheaf(s) is None
    homs = sum(1 for e in rep.entries if e.check == "Hom bijection under S")
    ok = rep.passed and _iso_witnessed(rep) and cl.locally_free and not_free \
        and ranks == {"m0": "1|0", "m1": "0|1"} and homs == len(mods) ** 2
    criterion("8.1", ok, f"Λ1×Λ1: {rep.summary()}; S(Λ1⊕ΠΛ1) ranks {ranks}, "
                         f"free={not not_free}; {homs} Hom bijections")
    assert ok


def _l2l3():
    a = product(grassmann(2), grassmann(3))
    r = regular_module(a)
    e0, e1 = (p.idempotent for p in cached_spectrum(a))
    mixed = direct_sum([idempotent_summand(r, e0)[0], idempotent_summand(parity_swap(r), e1)[0]])
    mixed.name = "e0A⊕Πe1A"
    return a, spec(a), _catalog(a, [mixed])


def test_criterion_8_roundtrip_l2xl3_modules(criterion):
    a, x, mods = _l2l3()
    rep = serre_swan_roundtrip(x, mods, [])
    homs = sum(1 for e in rep.entries if e.check == "Hom bijection under S")
    ok = rep.passed and _iso_witnessed(rep) and homs == len(mods) ** 2
    criterion("8.2", ok, f"Λ2×Λ3 modules: {rep.summary()}; {homs} Hom bijections")
    assert ok


def test_criterion_8_roundtrip_l2xl3_sheaves(criterion):
    a, x, mods = _l2l3()
    sheaves = [module_sheaf_tilde(x, m) for m in mods]
    rep = serre_swan_roundtrip(x, [], sheaves, hom_pairs=False)
    ok = rep.passed and _iso_witnessed(rep)
    criterion("8.3", ok, f"Λ2×Λ3 sheaves: {rep.summary()}")
    assert ok


# 9 -----------------------------------------------------------------------------------------

def test_criterion_9_cech(criterion):
    rng = rng_for(9)
    rings = [grassmann(1), grassmann(2), product(grassmann(1), grassmann(1)),
             product(grassmann(1), rationals()), product(grassmann(2), grassmann(1))]
    audited, affine_ok = 0, True
    for a in rings:
        x = spec(a)
        catalog = [random_module(a, rng) for _ in range(4)] + [free_module(a, 1, 1)]
        for entry in acyclicity_audit(x, catalog):
            affine_ok = affine_ok and entry.acyclic and entry.sheaf_ok
            audited += 1
    pc = FiniteSpace.pseudocircle()
    q = free_sheaf(constant_ring_sheaf(pc, rationals()), 1, 0)
    covers = {"{U_c,U_d}": [pc.min_open(2), pc.min_open(3)],
              "points": [pc.min_open(k) for k in range(pc.n)]}
    h1 = {}
    for name, cover in covers.items():
        r = cech_cohomology(q, cover)
        assert r.dd_zero and r.h0_matches_sections
        g = r.groups[1]
        h1[name] = f"{g.even_dim}|{g.odd_dim}"
    control_ok = all(v == "1|0" for v in h1.values())
    ok = affine_ok and control_ok
    criterion("9", ok, f"H^p>=1 vanish on {audited} affine instances; pseudocircle H1 {h1}")
    assert ok


# 10 ----------------------------------------------------------------------------------------

def test_criterion_10_mutation_resistance(criterion):
    root = cli.BUILTIN_CORPUS / "broken"
    files = sorted(root.glob("*.json"))
    rejected = 0
    for path in files:
        doc = ds.read_json(path)
        res = cli._guarded(lambda: cli.check_document(doc, path.name, root), path.name,
                           doc["kind"])
        if res["status"] == "fail" and res["law"] == doc["expect_law"] \
                and cli.recheck(doc, res, root):
            rejected += 1
    ok = len(files) == 10 and rejected == 10
    criterion("10", ok, f"{rejected}/{len(files)} broken descriptors rejected with a "
                        f"re-failing witness")
    assert ok
