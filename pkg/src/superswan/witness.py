"""Independent re-check of failure witnesses.

Each function recomputes one law at the witness location only, without going
through the ``violations()`` scan that produced it.
"""

from __future__ import annotations

from .qlinalg import Matrix


def _sign(p, q):
    return -1 if p and q else 1


def _index(space, label):
    return [str(p) for p in space.points].index(str(label))


def _open(space, labels):
    return frozenset(_index(space, x) for x in labels)


def ring_refails(a, law, w) -> bool:
    if law == "supercommutativity":
        i, j = w["pair"]
        s = _sign(a.parity[i], a.parity[j])
        return a.mul(a.basis_vec(i), a.basis_vec(j)) != tuple(
            s * v for v in a.mul(a.basis_vec(j), a.basis_vec(i)))
    if law == "parity-additivity":
        i, j = w["pair"]
        k = w["component"]
        prod = a.mul(a.basis_vec(i), a.basis_vec(j))
        return bool(prod[k]) and a.parity[k] != (a.parity[i] + a.parity[j]) % 2
    if law == "unit-identity":
        e = a.basis_vec(w["basis"])
        return a.mul(a.unit, e) != e or a.mul(e, a.unit) != e
    if law == "unit-even":
        return any(a.unit[i] for i in a.odd_basis)
    if law == "associativity":
        x, y, z = (a.basis_vec(i) for i in w["triple"])
        return a.mul(a.mul(x, y), z) != a.mul(x, a.mul(y, z))
    return False


def module_refails(m, law, w) -> bool:
    if law.startswith("ring-"):
        return ring_refails(m.algebra, law[5:], w)
    a = m.algebra
    if law == "action-parity":
        i, j = w["entry"]
        b = w["basis"]
        return bool(m.action[b].row(i)[j]) and m.parity[i] != (m.parity[j] + a.parity[b]) % 2
    if law == "unit-acts-as-identity":
        return m.action_matrix(a.unit) != Matrix.identity(m.dim)
    if law == "action-associativity":
        x, y = w["pair"]
        for v in range(m.dim):
            e = m.basis_vec(v)
            if m.act(m.act(e, a.basis_vec(x)), a.basis_vec(y)) != m.act(
                    e, a.mul(a.basis_vec(x), a.basis_vec(y))):
                return True
        return False
    return False


def sheaf_refails(f, law, w) -> bool:
    sp = f.space
    if law == "functoriality":
        u, v, x = (_open(sp, o) for o in w["opens"])
        return f.restriction(v, x) @ f.restriction(u, v) != f.restriction(u, x)
    if law == "sheaf-identity":
        u = _open(sp, w["open"])
        cover = [sp.min_open(x) for x in sorted(u)]
        stacked = Matrix.vstack([f.restriction(u, c) for c in cover], f.section(u).dim)
        return stacked.rank() < f.section(u).dim
    if law == "stalk-preserved":
        x = _index(sp, w["point"])
        return f.section(sp.min_open(x)).dim != w["declared"]
    if law.startswith("section-"):
        return module_refails(f.section(_open(sp, w["open"])), law[8:], w)
    return False
