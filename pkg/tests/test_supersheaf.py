import pytest

from superswan import qlinalg as ql
from superswan.errors import (IncompatibleSections, NotExtendable, NotHomogeneous,
                              PreconditionFailed, RealizabilityFailed)
from superswan.qlinalg import Matrix
from superswan.samples import presheaf_corpus, rng_for, sheaf_corpus, random_stalk_sheaf
from superswan.superring import RingHom, grassmann, odd_ideal, rationals
from superswan.supermodule import free_module, quotient_module, regular_module
from superswan.supersheaf import (FiniteSpace, ModuleSheaf, SheafMorphism, SuperRingSheaf,
                                  classify, constant_ring_sheaf, direct_sum_sheaves,
                                  extend_stalk_family, free_sheaf, glue_homogeneous,
                                  hom_sheaf, kernel_image_cokernel, local_iso_extension,
                                  module_sheaf_from_stalks, parity_from_stalks,
                                  parity_swap_sheaf, sheafify, sheafify_rings, skyscraper,
                                  stalk_hom_iso, structure_module, support, zero_sheaf)

L1 = grassmann(1)
SIER = FiniteSpace.sierpinski()
CIRCLE = FiniteSpace.pseudocircle()
D2 = FiniteSpace.discrete(2)


def O(space, ring=L1):
    return constant_ring_sheaf(space, ring)


def residue_module():
    """Lambda_1 / J."""
    return quotient_module(regular_module(L1), odd_ideal(L1).space)[0]


def test_space_lattice():
    assert SIER.min_open(1) == SIER.whole and SIER.min_open(0) == frozenset({0})
    assert SIER.specializations() == [(1, 0)]
    assert CIRCLE.min_open(2) == frozenset({0, 1, 2})
    assert len(CIRCLE.components(frozenset({0, 1}))) == 2
    assert len(CIRCLE.components(CIRCLE.whole)) == 1
    bad = FiniteSpace(["a", "b"], [[], [0], [1], [0, 1]], check=False)
    assert bad.violations() == []
    broken = FiniteSpace(["a", "b"], [[], [0], [1]], check=False)
    assert broken.violations()[0]["law"] == "contains-whole"


def test_stalk_examples():
    f = free_sheaf(O(D2), 1, 0)
    for x in range(2):
        assert f.stalk(x).dim == f.section({x}).dim == 2
    g = free_sheaf(O(SIER), 1, 1)
    assert g.stalk(1).dim == g.global_sections.dim
    h = structure_module(O(CIRCLE))
    for x in range(4):
        assert h.stalk(x).dim == L1.dim and h.stalk(x).violations() == []


@pytest.mark.parametrize("space", [SIER, CIRCLE, D2], ids=lambda s: s.name)
def test_structure_sheaves_are_sheaves(space):
    for ring in (rationals(), L1, grassmann(2)):
        base = O(space, ring)
        assert base.violations() == []
        assert structure_module(base).violations() == []


def test_corrupted_restriction_rejected():
    f = free_sheaf(O(CIRCLE), 1, 0)
    res = dict(f._res)
    key = (CIRCLE.whole, frozenset({0, 1, 2}))
    res[key] = res[key].scale(2)
    bad = ModuleSheaf(f.base, f.sections, res)
    assert bad.violations()[0]["law"] == "functoriality"


def test_sheafify_examples():
    f = free_sheaf(O(CIRCLE), 1, 1)
    assert sheafify(f).canonical_is_iso
    ring = {u: L1 for u in D2.opens}
    res = {(u, v): RingHom.identity(L1) for u, v in D2.pairs()}
    const = SuperRingSheaf(D2, ring, res, name="const")
    assert const.violations()
    s, comps = sheafify_rings(const)
    assert s.violations() == []
    assert s.global_ring.dim == 2 * L1.dim
    assert s.section(D2.empty).dim == 0


def test_sheafify_corpus_properties():
    for p in presheaf_corpus(3):
        sh = sheafify(p)
        s = sh.sheaf
        assert s.violations() == []
        assert s.section(s.space.empty).dim == 0
        for x in range(p.space.n):
            assert s.stalk(x).dim == p.stalk(x).dim
            assert sh.canonical.stalk_map(x).is_identity() or sh.canonical.stalk_map(x).rank() == s.stalk(x).dim
        assert sheafify(s).canonical_is_iso
        assert sh.canonical_is_iso == (not p.violations())


def test_glue_examples():
    f = free_sheaf(O(D2), 1, 0)
    beta = list(L1.basis_vec(1))
    s = glue_homogeneous(f, D2.whole, [D2.whole], [beta + beta], 1)
    assert list(s) == beta + beta
    s = glue_homogeneous(f, D2.whole, [{0}, {1}], [beta, beta], 1)
    assert f.section(D2.whole).parity_of(s) == 1
    one = list(L1.unit)
    with pytest.raises(NotHomogeneous):
        glue_homogeneous(f, D2.whole, [{0}, {1}], [one, beta], 1)
    g = free_sheaf(O(CIRCLE), 1, 0)
    ac, bc = frozenset({0, 1, 2}), frozenset({0, 1, 3})
    assert g.section(ac).dim == L1.dim
    with pytest.raises(IncompatibleSections):
        glue_homogeneous(g, CIRCLE.whole, [ac, bc], [beta, [0, 2]], 1)
    glued = glue_homogeneous(g, CIRCLE.whole, [ac, bc], [beta, beta], 1)
    assert g.section(CIRCLE.whole).parity_of(glued) == 1


def test_parity_from_stalks_examples():
    f = free_sheaf(O(CIRCLE), 1, 0)
    beta = list(L1.basis_vec(1))
    top = f.global_sections
    s = list(f.glue_germs(CIRCLE.whole, {x: beta for x in range(4)}))
    v = parity_from_stalks(f, CIRCLE.whole, s)
    assert v["verdict"] == "odd" and v["agree"]
    v = parity_from_stalks(f, CIRCLE.whole, list(top.basis_vec(0)))
    assert v["agree"]
    g = free_sheaf(O(D2), 1, 0)
    mixed = list(L1.unit) + beta
    v = parity_from_stalks(g, D2.whole, mixed)
    assert v["verdict"] == "inhomogeneous" and v["agree"]


def test_local_parity_decides_global_parity_on_corpus():
    for f in sheaf_corpus(4):
        for u in f.space.opens:
            m = f.section(u)
            for j in range(m.dim):
                v = parity_from_stalks(f, u, list(m.basis_vec(j)))
                assert v["agree"]


def test_extend_stalk_family_examples():
    base = O(SIER)
    f = free_sheaf(base, 1, 0)
    ident = SheafMorphism.identity(f)
    fam = {x: ident.stalk_map(x) for x in range(2)}
    assert extend_stalk_family(f, f, fam) == ident
    g = free_sheaf(O(D2), 1, 0)
    fam = {0: Matrix.identity(2), 1: Matrix.zeros(2, 2)}
    u = extend_stalk_family(g, g, fam)
    assert u.component(D2.whole).rank() == 2
    bad = {0: Matrix.identity(2), 1: Matrix.zeros(2, 2)}
    with pytest.raises(RealizabilityFailed) as e:
        extend_stalk_family(f, f, bad)
    assert e.value.witness["point"] == "y" and e.value.witness["germ_at"] == "x"


def test_kernel_image_cokernel_examples():
    f = free_sheaf(O(CIRCLE), 1, 1)
    k = kernel_image_cokernel(SheafMorphism.identity(f))
    assert k.stalk_exact
    assert all(k.kernel.stalk(x).dim == 0 and k.cokernel.stalk(x).dim == 0 for x in range(4))
    assert all(k.image.stalk(x).dim == f.stalk(x).dim for x in range(4))
    k = kernel_image_cokernel(SheafMorphism.zero(f, f))
    assert all(k.kernel.stalk(x).dim == f.stalk(x).dim for x in range(4))
    assert all(k.image.stalk(x).dim == 0 for x in range(4))
    base = O(D2)
    r = structure_module(base)
    e = {0: Matrix.identity(2), 1: Matrix.zeros(2, 2)}
    k = kernel_image_cokernel(extend_stalk_family(r, r, e))
    assert [k.kernel.stalk(x).dim for x in range(2)] == [0, 2]
    assert support(k.kernel).points == (1,)


def test_kernel_image_exact_on_random_morphisms():
    rng = rng_for(11)
    from superswan.samples import random_even_hom
    for sp in (SIER, D2):
        base = O(sp)
        for _ in range(5):
            f = random_stalk_sheaf(base, rng, L1)
            g = free_sheaf(base, 1, 1)
            fam = {x: random_even_hom(f.stalk(x), g.stalk(x), rng).matrix for x in range(sp.n)}
            try:
                u = extend_stalk_family(f, g, fam)
            except RealizabilityFailed:
                continue
            k = kernel_image_cokernel(u)
            assert k.stalk_exact, k.failures


def test_support_examples():
    base = O(SIER)
    assert support(zero_sheaf(base)).points == () and support(zero_sheaf(base)).closed
    sky = skyscraper(base, 1, free_module(L1, 1, 0))
    s = support(sky)
    assert s.points == (1,) and s.closed
    assert support(structure_module(base)).points == (0, 1)
    # extension by zero from the open point: not of finite type, support not closed
    ext = skyscraper(base, 0, free_module(L1, 1, 0))
    assert not classify(ext).finite_type and not support(ext).closed


def test_classify_examples():
    base = O(CIRCLE)
    c = classify(free_sheaf(base, 1, 1))
    assert c.locally_free and c.finitely_presented and c.globally_generated
    assert set(c.rank.values()) == {(1, 1)} and c.rank_locally_constant
    base2 = O(D2)
    mixed = module_sheaf_from_stalks(base2, {0: free_module(L1, 1, 0), 1: free_module(L1, 0, 1)})
    c = classify(mixed)
    assert c.locally_free and len(set(c.rank.values())) == 2 and c.globally_generated
    assert c.rank == {0: (1, 0), 1: (0, 1)}
    sky = skyscraper(O(SIER), 1, residue_module())
    c = classify(sky)
    assert c.finite_type and not c.locally_free


def test_classify_locally_free_ranks_constant_on_min_opens():
    for f in sheaf_corpus(5):
        c = classify(f)
        if c.locally_free:
            sp = f.space
            for x in range(sp.n):
                assert all(c.rank[y] == c.rank[x] for y in sp.min_open(x))


def test_hom_sheaf_examples():
    base = O(SIER)
    f = random_stalk_sheaf(base, rng_for(12), L1)
    h = hom_sheaf(structure_module(base), f)
    assert h.full.violations() == []
    for u in SIER.opens:
        assert h.full.section(u).dim == f.section(u).dim
    one = O(FiniteSpace.point(), rationals())
    q11 = free_sheaf(one, 1, 1)
    h = hom_sheaf(q11, q11)
    assert h.full.global_sections.dim == 4
    assert h.even.global_sections.dim == 2


def test_stalk_hom_iso_examples():
    base = O(CIRCLE)
    f = free_sheaf(base, 1, 0)
    g = random_stalk_sheaf(O(SIER), rng_for(13), L1)
    for x in range(4):
        r = stalk_hom_iso(f, f, x)
        assert r.bijective and r.dims == (2, 2)
    fs = free_sheaf(O(SIER), 1, 1)
    for x in range(2):
        r = stalk_hom_iso(fs, g, x)
        assert r.bijective and r.dims[0] == 2 * g.stalk(x).dim
    ext = skyscraper(O(SIER), 0, free_module(L1, 1, 0))
    with pytest.raises(PreconditionFailed):
        stalk_hom_iso(ext, fs, 0)


def test_local_iso_extension_examples():
    f = free_sheaf(O(D2), 1, 0)
    e = local_iso_extension(f, f, 0, Matrix.identity(2))
    assert e.open == frozenset({0})
    g = free_sheaf(O(SIER), 1, 0)
    assert local_iso_extension(g, g, 0, Matrix.identity(2)).open == frozenset({0})
    e = local_iso_extension(g, g, 1, Matrix.identity(2))
    assert e.open == SIER.whole and e.morphism.is_isomorphism()
    small = skyscraper(O(SIER), 1, free_module(L1, 1, 0))
    big = structure_module(O(SIER))
    # at the closed point the stalks agree but the open point refutes an iso
    with pytest.raises(NotExtendable):
        local_iso_extension(small, big, 1, Matrix.identity(2))


def test_parity_swap_and_sums():
    base = O(CIRCLE)
    f = direct_sum_sheaves([free_sheaf(base, 1, 0), parity_swap_sheaf(free_sheaf(base, 1, 0))])
    assert f.violations() == []
    assert set(classify(f).rank.values()) == {(1, 1)}
