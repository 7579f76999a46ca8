from superswan.affine import (acyclicity_audit, all_opens_cover, cech_cohomology,
                              module_sheaf_tilde, point_cover, spec)
from superswan.samples import random_module, rng_for, sheaf_corpus
from superswan.superring import cached_spectrum, grassmann, product, rationals
from superswan.supermodule import (direct_sum, free_module, idempotent_summand, parity_swap,
                                   regular_module)
from superswan.supersheaf import (FiniteSpace, classify, constant_ring_sheaf, free_sheaf,
                                  structure_module)
from superswan.serre_swan import gamma, s_functor

L1, L2 = grassmann(1), grassmann(2)
L1L1 = product(L1, L1)


def mixed_projective():
    r = regular_module(L1L1)
    e0, e1 = (p.idempotent for p in cached_spectrum(L1L1))
    return direct_sum([idempotent_summand(r, e0)[0], idempotent_summand(parity_swap(r), e1)[0]])


def test_spec_examples():
    for n in range(3):
        x = spec(grassmann(n))
        assert x.space.n == 1 and x.structure_sheaf.global_ring.dim == 2 ** n
        assert x.global_sections_iso()
    x = spec(L1L1)
    assert x.space.n == 2 and x.space.points == ("m0", "m1")
    assert all(x.structure_sheaf.section({i}).dim == L1.dim for i in range(2))
    assert x.structure_sheaf.global_ring.dim == 4 and x.global_sections_iso()
    assert x.structure_sheaf.violations() == []
    q = spec(rationals())
    assert q.space.n == 1 and q.structure_sheaf.global_ring.dim == 1


def test_presentations_of_points():
    x = spec(L1L1)
    for p in x.presentations():
        assert p["residue_dim"] == 1


def test_tilde_examples():
    x = spec(L1L1)
    o = module_sheaf_tilde(x, regular_module(L1L1))
    assert [o.section(u).dim for u in x.space.opens] == [0, 2, 2, 4]
    f = module_sheaf_tilde(x, free_module(L1L1, 2, 1))
    assert set(classify(f).rank.values()) == {(2, 1)}
    p = module_sheaf_tilde(x, mixed_projective())
    assert classify(p).rank == {0: (1, 0), 1: (0, 1)}


def test_tilde_agrees_with_s_functor():
    rng = rng_for(14)
    for a in (L2, L1L1):
        x = spec(a)
        for _ in range(4):
            m = random_module(a, rng)
            t = module_sheaf_tilde(x, m)
            s = s_functor(m, x)
            assert s.presheaf_is_sheaf
            for u in x.space.opens:
                c = s.canonical.component(u)
                assert c.nrows == c.ncols == t.section(u).dim and c.rank() == c.nrows
            assert gamma(t).dim == m.dim


def test_cech_on_points_of_discrete_space():
    base = constant_ring_sheaf(FiniteSpace.discrete(3), L1)
    f = free_sheaf(base, 1, 1)
    r = cech_cohomology(f, point_cover(base.space))
    assert r.dd_zero and r.h0_matches_sections and r.higher_vanish()
    assert r.groups[0].dim == gamma(f).dim


def test_cech_pseudocircle():
    sp = FiniteSpace.pseudocircle()
    f = structure_module(constant_ring_sheaf(sp, rationals()))
    r = cech_cohomology(f, point_cover(sp)[2:])
    assert [c for c in r.cover] == [frozenset({0, 1, 2}), frozenset({0, 1, 3})]
    assert [g.as_dict()["parity"] for g in r.groups] == ["1|0", "1|0"]
    assert r.dd_zero and r.h0_matches_sections
    # refinement by all minimal opens gives the same H1
    fine = cech_cohomology(f, point_cover(sp))
    assert fine.groups[1].as_dict()["parity"] == "1|0"
    assert all(g.dim == 0 for g in fine.groups[2:])


def test_cech_dd_zero_and_h0_on_corpus():
    for f in sheaf_corpus(6):
        sp = f.space
        for cover in (point_cover(sp), all_opens_cover(sp)):
            r = cech_cohomology(f, cover)
            assert r.dd_zero and r.h0_matches_sections


def test_tilde_acyclic():
    x = spec(L1L1)
    for m in (regular_module(L1L1), mixed_projective(), random_module(L1L1, rng_for(15))):
        f = module_sheaf_tilde(x, m)
        for cover in (point_cover(x.space), all_opens_cover(x.space)):
            assert cech_cohomology(f, cover).higher_vanish()


def test_acyclicity_audit():
    x = spec(L2)
    audit = acyclicity_audit(x, [free_module(L2, p, q) for p, q in [(1, 0), (0, 1), (2, 1)]])
    assert all(e.passed for e in audit)
    y = spec(L1L1)
    audit = acyclicity_audit(y, [mixed_projective(), parity_swap(mixed_projective())])
    assert all(e.passed for e in audit)
    assert audit[0].cohomology["points"][0]["parity"] == "2|2"
