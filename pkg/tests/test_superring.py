import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superswan import qlinalg as ql
from superswan.errors import InvariantViolation, NotHomogeneous
from superswan.qlinalg import Subspace
from superswan.samples import random_homogeneous, rng_for
from superswan.superring import (HomogeneousIdeal, RingHom, SuperAlgebra, cached_spectrum,
                                 embed_left, even_polynomial_algebra, grassmann,
                                 grassmann_generator, ideal_generated, ideal_power,
                                 is_local_superring, localize_at_even, odd_ideal, product,
                                 quotient, radical, rationals, whole_ideal, zero_ideal)


def test_grassmann_examples():
    q = grassmann(0)
    assert q.dim == 1 and q.odd_dim == 0
    l2 = grassmann(2)
    b1, b2 = grassmann_generator(l2, 1), grassmann_generator(l2, 2)
    assert l2.dim == 4
    assert l2.mul(b1, b2) == ql.vscale(-1, l2.mul(b2, b1))
    assert ql.is_zero(l2.mul(b1, b1))
    l3 = grassmann(3)
    assert l3.dim == 8 and l3.even_dim == 4


@pytest.mark.parametrize("n", range(7))
def test_grassmann_laws(n):
    assert grassmann(n).violations() == []


def test_product_examples():
    a = product(grassmann(1), grassmann(1))
    assert a.dim == 4
    idem = sorted(tuple(p.idempotent) for p in cached_spectrum(a))
    assert idem == sorted([embed_left(grassmann(1), grassmann(1), grassmann(1).unit),
                           tuple(ql.vsub(a.unit, embed_left(grassmann(1), grassmann(1),
                                                            grassmann(1).unit)))])
    qq = product(rationals(), rationals())
    assert qq.dim == 2 and qq.odd_dim == 0
    assert product(grassmann(1), grassmann(3)).dim == 10


def test_bosonic_reduction():
    for n in range(4):
        a = grassmann(n)
        b, proj = quotient(a, odd_ideal(a))
        assert b.dim == 1 and b.odd_dim == 0
        assert proj.violations() == []


def test_quotient_by_zero_is_identity():
    a = grassmann(2)
    b, proj = quotient(a, zero_ideal(a))
    assert b.dim == a.dim and proj.matrix.is_identity()


def test_quotient_of_product():
    l1 = grassmann(1)
    a = product(l1, l1)
    first = ideal_generated(a, [embed_left(l1, l1, l1.unit)])
    b, _ = quotient(a, first)
    assert b.dim == 2 and b.parity == (0, 1) and b.violations() == []
    beta = tuple(ql.unit_vec(2, 1))
    assert ql.is_zero(b.mul(beta, beta))


def test_odd_ideal_examples():
    assert odd_ideal(grassmann(2)).dim == 3
    assert odd_ideal(rationals()).dim == 0
    assert odd_ideal(product(grassmann(1), grassmann(1))).dim == 2


def test_ideal_power_examples():
    j = odd_ideal(grassmann(2))
    assert ideal_power(j, 2).dim == 1
    assert ideal_power(j, 3).dim == 0
    w = whole_ideal(grassmann(2))
    assert ideal_power(w, 4) == w


def test_spectrum_examples():
    for n in range(4):
        pts = cached_spectrum(grassmann(n))
        assert len(pts) == 1 and pts[0].maximal_ideal.dim == 2 ** n - 1
    assert len(cached_spectrum(product(grassmann(1), grassmann(1)))) == 2
    a = even_polynomial_algebra([-1, 0, 1])
    idem = sorted(tuple(p.idempotent) for p in cached_spectrum(a))
    half = ql.q(1) / 2
    assert idem == sorted([(half, half), (half, -half)])


def test_localization_examples():
    l1 = grassmann(1)
    a = product(l1, l1)
    e = embed_left(l1, l1, l1.unit)
    af, m = localize_at_even(a, e)
    assert af.dim == 2 and af.parity == (0, 1)
    same, ident = localize_at_even(a, a.unit)
    assert same.dim == a.dim and ident.matrix.is_identity()
    l2 = grassmann(2)
    top = l2.mul(grassmann_generator(l2, 1), grassmann_generator(l2, 2))
    zero, _ = localize_at_even(l2, top)
    assert zero.dim == 0
    with pytest.raises(NotHomogeneous):
        localize_at_even(l2, grassmann_generator(l2, 1))


def test_local_examples():
    assert is_local_superring(grassmann(3))[0]
    assert not is_local_superring(product(grassmann(1), grassmann(1)))[0]
    assert is_local_superring(rationals())[0]


def test_radical_is_nilpotent():
    for a in (grassmann(2), product(grassmann(1), grassmann(2)),
              even_polynomial_algebra([0, 0, 1])):
        assert radical(a).is_nilpotent()


def test_mutated_sign_rejected():
    a = grassmann(2)
    mult = {k: dict(v) for k, v in a._mult.items()}
    i, j = a.labels.index("b2"), a.labels.index("b1")
    mult[(i, j)] = {k: -c for k, c in mult[(i, j)].items()}
    bad = SuperAlgebra(a.dim, a.parity, mult, a.unit, labels=a.labels, check=False)
    law = bad.violations()[0]
    assert law["law"] == "supercommutativity" and sorted(law["witness"]["pair"]) == sorted([i, j])
    with pytest.raises(InvariantViolation):
        bad.validate()


def test_non_ideal_rejected():
    a = grassmann(2)
    with pytest.raises(InvariantViolation):
        HomogeneousIdeal(a, Subspace(a.dim, [grassmann_generator(a, 1)]))


def test_ring_hom_laws():
    a = grassmann(2)
    _, proj = quotient(a, odd_ideal(a))
    assert proj.violations() == []
    bad = RingHom(a, a, proj.matrix.T @ proj.matrix.scale(2), check=False)
    assert bad.violations()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1]), st.sampled_from([0, 1]))
def test_supercommutativity_random(seed, p, q):
    rng = rng_for(seed)
    a = rng.choice([grassmann(2), grassmann(3), product(grassmann(1), grassmann(2))])
    x, y = random_homogeneous(a, p, rng), random_homogeneous(a, q, rng)
    s = -1 if p and q else 1
    assert a.mul(x, y) == ql.vscale(s, a.mul(y, x))
    z = random_homogeneous(a, rng.randint(0, 1), rng)
    assert a.mul(a.mul(x, y), z) == a.mul(x, a.mul(y, z))


def test_inverse_of_unit():
    l2 = grassmann(2)
    top = l2.mul(grassmann_generator(l2, 1), grassmann_generator(l2, 2))
    u = ql.vadd(l2.unit, top)
    assert l2.inverse(u) == ql.vsub(l2.unit, top)
    assert l2.inverse(grassmann_generator(l2, 1)) is None
