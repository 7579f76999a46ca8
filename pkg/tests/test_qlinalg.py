import importlib

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superswan import qlinalg as ql
from superswan.qlinalg import Matrix, Subspace, nullspace, rref, solve, subspace_ops
from superswan import _kernels_py

small = st.integers(min_value=-3, max_value=3)


def matrices(max_rows=5, max_cols=5):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def M(rows):
    return Matrix.from_lists(rows)


def test_rref_examples():
    assert rref(M([[2, 4], [1, 2]])) == M([[1, 2], [0, 0]])
    assert rref(Matrix.identity(3)) == Matrix.identity(3)
    assert rref(M([[0, 1], [1, 0]])) == Matrix.identity(2)


def test_solve_examples():
    b = M([[3], [-1]])
    assert solve(Matrix.identity(2), b) == b
    assert solve(M([[1, 1]]), M([[1]])) == M([[1], [0]])
    assert solve(M([[0]]), M([[1]])) is None


def test_solve_dimension_mismatch():
    with pytest.raises(ql.DimensionMismatch):
        solve(Matrix.identity(2), M([[1], [2], [3]]))


def test_exact_rationals():
    x = solve(M([[3]]), M([[1]]))
    assert x.row(0)[0] == ql.q(1) / 3
    assert ql.fmt(x.row(0)[0]) == "1/3"


def test_subspace_examples():
    e1 = Subspace(2, [(1, 0)])
    e2 = Subspace(2, [(0, 1)])
    ops = subspace_ops(e1, e2)
    assert ops.sum.dim == 2 and ops.intersection.dim == 0
    same = subspace_ops(e1, e1)
    assert same.sum == e1 and same.intersection == e1


def test_ambient_mismatch():
    with pytest.raises(ql.DimensionMismatch):
        subspace_ops(Subspace(2, [(1, 0)]), Subspace(3, [(1, 0, 0)]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(small, min_size=5, max_size=5), max_size=4),
       st.lists(st.lists(small, min_size=5, max_size=5), max_size=4))
def test_grassmann_dimension_formula(us, vs):
    u, v = Subspace(5, us), Subspace(5, vs)
    ops = subspace_ops(u, v)
    assert ops.sum.dim == u.dim + v.dim - ops.intersection.dim
    assert u.contains_subspace(ops.intersection) and v.contains_subspace(ops.intersection)
    for w in us + vs:
        assert ops.contains(w)


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rref_idempotent_and_canonical(rows):
    m = M(rows)
    r = rref(m)
    assert rref(r) == r
    assert Subspace(m.ncols, rows) == Subspace(m.ncols, r.to_lists())


@settings(max_examples=80, deadline=None)
@given(matrices(), st.lists(small, min_size=5, max_size=5))
def test_solve_is_exact(rows, xs):
    a = M(rows)
    x = Matrix.from_columns([xs[:a.ncols]], a.ncols)
    b = a @ x
    sol = solve(a, b)
    assert sol is not None and a @ sol == b


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_nullspace(rows):
    a = M(rows)
    ns = nullspace(a)
    assert ns.dim == a.ncols - a.rank()
    for v in ns.vectors():
        assert ql.is_zero(a @ v)


@settings(max_examples=60, deadline=None)
@given(matrices(4, 4))
def test_inverse(rows):
    a = M(rows)
    inv = a.inverse()
    if a.nrows == a.ncols and a.rank() == a.nrows:
        assert (a @ inv).is_identity()
    else:
        assert inv is None


@settings(max_examples=60, deadline=None)
@given(st.lists(st.dictionaries(st.integers(0, 6), small.filter(bool), max_size=5), max_size=6))
def test_backends_agree(rows):
    rows = [{k: ql.q(v) for k, v in r.items()} for r in rows]
    pure = _kernels_py.echelon([dict(r) for r in rows])
    if ql.BACKEND == "compiled":
        compiled = importlib.import_module("superswan._kernels").echelon([dict(r) for r in rows])
        assert compiled == pure
    assert len(pure) == M([[r.get(j, 0) for j in range(7)] for r in rows] or [[0] * 7]).rank()


def test_backend_reported():
    assert ql.BACKEND in ("compiled", "python")
