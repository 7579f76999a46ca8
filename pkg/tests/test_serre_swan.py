import pytest

from superswan.affine import spec
from superswan.errors import HypothesisFailed, NotSurjective, PreconditionFailed
from superswan.qlinalg import Matrix
from superswan.samples import random_module, rng_for
from superswan.superring import cached_spectrum, grassmann, odd_ideal, product, rationals
from superswan.supermodule import (ModuleHom, SuperModule, direct_sum, free_module,
                                   idempotent_summand, parity_swap, quotient_module,
                                   regular_module)
from superswan.supersheaf import (FiniteSpace, SheafMorphism, classify, constant_ring_sheaf,
                                  direct_sum_sheaves, extend_stalk_family, free_rank,
                                  free_sheaf, module_sheaf_from_stalks, parity_swap_sheaf,
                                  skyscraper, structure_module)
from superswan.serre_swan import (adjunction_check, counit_iso, gamma, gamma_fully_faithful,
                                  gamma_map, generator_map, is_free_sheaf, kernel_locally_free,
                                  lam, rank_lemma, s_functor, serre_swan_roundtrip, unit)

L1, L2 = grassmann(1), grassmann(2)
L1L1 = product(L1, L1)
SIER = FiniteSpace.sierpinski()
D2 = FiniteSpace.discrete(2)


def mixed_projective():
    r = regular_module(L1L1)
    e0, e1 = (p.idempotent for p in cached_spectrum(L1L1))
    m = direct_sum([idempotent_summand(r, e0)[0], idempotent_summand(parity_swap(r), e1)[0]])
    m.name = "P"
    return m


def test_gamma_examples():
    base = constant_ring_sheaf(SIER, L1)
    f = free_sheaf(base, 1, 1)
    assert free_rank(gamma(f)) == (1, 1)
    sky = skyscraper(base, 1, free_module(L1, 1, 0))
    assert gamma(sky).dim == 2
    mixed = module_sheaf_from_stalks(constant_ring_sheaf(D2, L1),
                                     {0: free_module(L1, 1, 0), 1: free_module(L1, 0, 1)})
    g = gamma(mixed)
    assert g.dim == 4 and g.even_dim == 2 and free_rank(g) is None


def test_gamma_functorial():
    f = free_sheaf(constant_ring_sheaf(SIER, L1), 1, 1)
    ident = SheafMorphism.identity(f)
    assert gamma_map(ident).matrix.is_identity()
    swap = Matrix.from_lists([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
    fam = {x: swap for x in range(2)}
    v = extend_stalk_family(f, f, fam)
    assert gamma_map(v.compose(v)).matrix == gamma_map(v).matrix @ gamma_map(v).matrix


def test_s_functor_examples():
    x = spec(L1L1)
    s = s_functor(regular_module(L1L1), x)
    assert is_free_sheaf(s.sheaf) == (1, 0)
    s = s_functor(free_module(L1L1, 2, 1), x)
    assert is_free_sheaf(s.sheaf) == (2, 1)
    s = s_functor(mixed_projective(), x)
    assert classify(s.sheaf).rank == {0: (1, 0), 1: (0, 1)}
    assert is_free_sheaf(s.sheaf) is None


def test_s_preserves_sums_and_parity_swap():
    x = spec(L1L1)
    rng = rng_for(16)
    m, n = random_module(L1L1, rng, max_rank=1), random_module(L1L1, rng, max_rank=1)
    lhs = s_functor(direct_sum([m, parity_swap(n)]), x).sheaf
    rhs = direct_sum_sheaves([s_functor(m, x).sheaf, parity_swap_sheaf(s_functor(n, x).sheaf)])
    for u in x.space.opens:
        a, b = lhs.section(u), rhs.section(u)
        assert a.dim == b.dim and sorted(a.parity) == sorted(b.parity)


def test_unit_is_iso_on_affine():
    rng = rng_for(17)
    for a in (L2, L1L1):
        x = spec(a)
        for _ in range(3):
            m = random_module(a, rng)
            eta = unit(s_functor(m, x))
            assert eta.inverse() is not None and eta.parity == 0


def test_adjunction_examples():
    x = spec(L1L1)
    o = structure_module(x.structure_sheaf)
    d = adjunction_check(regular_module(L1L1), o)
    assert d.passed and d.dims == (gamma(o).even_dim, gamma(o).even_dim)
    m = mixed_projective()
    zero = ModuleHom.zero(m, gamma(o))
    d = adjunction_check(m, o, zero)
    assert d.passed and all(d.image.component(u).is_zero() for u in x.space.opens)
    rng = rng_for(18)
    f = s_functor(random_module(L1L1, rng), x).sheaf
    d = adjunction_check(random_module(L1L1, rng), f)
    assert d.bijective and d.triangle_s and d.triangle_gamma and d.naturality


def test_lambda_of_unit_is_identity():
    x = spec(L2)
    m = free_module(L2, 1, 1)
    sm = s_functor(m, x)
    v = lam(unit(sm), sm, sm.sheaf)
    assert v == SheafMorphism.identity(sm.sheaf)


def test_gamma_fully_faithful_examples():
    x = spec(L1L1)
    o = structure_module(x.structure_sheaf)
    v = gamma_fully_faithful(o, o)
    assert v.bijective and v.dims[0] == L1L1.even_dim
    f = s_functor(mixed_projective(), x).sheaf
    g = s_functor(free_module(L1L1, 1, 1), x).sheaf
    assert gamma_fully_faithful(f, g).bijective
    base = constant_ring_sheaf(SIER, L1)
    ext = skyscraper(base, 0, free_module(L1, 1, 0))
    with pytest.raises(HypothesisFailed) as e:
        gamma_fully_faithful(structure_module(base), ext)
    assert e.value.witness["sheaf"] == ext.name


def test_counit_iso_examples():
    base = constant_ring_sheaf(SIER, L1)
    for f in (structure_module(base), free_sheaf(base, 1, 1)):
        ci = counit_iso(f)
        assert ci.morphism.is_isomorphism()
    f = s_functor(mixed_projective(), spec(L1L1)).sheaf
    assert counit_iso(f).morphism.is_isomorphism()


def test_rank_lemma_examples():
    base = constant_ring_sheaf(SIER, L1)
    v = rank_lemma(free_sheaf(base, 1, 1))
    assert v.locally_free and v.converse_constructed and v.equivalence_holds
    residue = quotient_module(regular_module(L1), odd_ideal(L1).space)[0]
    v = rank_lemma(skyscraper(base, 1, residue))
    assert not v.locally_free and not v.stalks_free and v.equivalence_holds
    proj = Matrix.from_lists([[1, 0, 0, 0], [0, 1, 0, 0]])
    jump = module_sheaf_from_stalks(base, {0: free_module(L1, 1, 0), 1: free_module(L1, 2, 0)},
                                    {(1, 0): proj})
    v = rank_lemma(jump)
    assert v.stalks_free and not v.rank_locally_constant and not v.locally_free
    assert v.equivalence_holds
    with pytest.raises(PreconditionFailed):
        rank_lemma(skyscraper(base, 0, free_module(L1, 1, 0)))


def test_kernel_locally_free_examples():
    base = constant_ring_sheaf(SIER, L1)
    f = free_sheaf(base, 1, 1)
    assert all(kernel_locally_free(SheafMorphism.identity(f)).kernel.stalk(x).dim == 0
               for x in range(2))
    g = free_sheaf(base, 1, 0)
    proj = Matrix.from_lists([[1, 0, 0, 0], [0, 1, 0, 0]])
    u = extend_stalk_family(f, g, {0: proj, 1: proj})
    cert = kernel_locally_free(u)
    assert set(cert.rank.values()) == {(0, 1)}
    with pytest.raises(NotSurjective):
        kernel_locally_free(SheafMorphism.zero(f, g))


def test_kernel_of_generator_map_over_product():
    x = spec(L1L1)
    sp = s_functor(mixed_projective(), x).sheaf
    gm = generator_map(sp)
    cert = kernel_locally_free(gm.morphism)
    p, q = gm.ranks
    for pt in range(2):
        kp, kq = cert.rank[pt]
        sp_, sq = classify(sp).rank[pt]
        assert (kp + sp_, kq + sq) == (p, q)


def test_roundtrip_point_free_catalog():
    x = spec(L2)
    mods = [free_module(L2, p, q) for p, q in [(1, 0), (0, 1), (1, 1)]]
    rep = serre_swan_roundtrip(x, mods, [s_functor(m, x).sheaf for m in mods])
    assert rep.passed and rep.summary()["fail"] == 0


def test_roundtrip_product_projective():
    x = spec(L1L1)
    p = mixed_projective()
    rep = serre_swan_roundtrip(x, [p], [s_functor(p, x).sheaf])
    assert rep.passed
    checks = {(e.object, e.check): e for e in rep.entries}
    assert checks[("P", "free-rank")].detail == "projective, not free"
    assert checks[("P", "S(P) free")].detail == "locally free, not free"
    assert checks[("P", "Gamma(S(P)) ~ P")].witness["iso"]
    d = rep.as_dict(timestamp="T")
    assert d["timestamp"] == "T" and d["passed"]


def test_roundtrip_skips_non_globally_generated():
    # twisted line on the pseudocircle: locally free of rank 1|0, no global sections
    sp = FiniteSpace.pseudocircle()
    base = constant_ring_sheaf(sp, rationals())
    line = free_module(rationals(), 1, 0)
    maps = {k: Matrix.identity(1) for k in sp.specializations()}
    maps[(3, 1)] = Matrix.identity(1).scale(-1)
    twisted = module_sheaf_from_stalks(base, {x: line for x in range(4)}, maps, name="twisted")
    assert classify(twisted).locally_free and gamma(twisted).dim == 0
    rep = serre_swan_roundtrip(base, [], [twisted])
    status = {e.check: e.status for e in rep.entries}
    assert status["hypothesis: global generation"] == "skipped"
    assert "S(Gamma(F)) ~ F" not in status
    assert rep.passed


def test_roundtrip_rejects_corrupted_action():
    p = free_module(L1, 1, 0)
    bad = SuperModule(L1, 2, [0, 1], [p.action[0], Matrix.from_lists([[0, 1], [1, 0]])],
                      name="bad", check=False)
    rep = serre_swan_roundtrip(spec(L1), [bad])
    assert not rep.passed
    assert rep.failures()[0].check == "module-laws"
