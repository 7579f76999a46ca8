"""JSON descriptors for rings, modules, sheaves, schemes, catalogs and covers.

Rationals are strings ``"num/den"`` (or plain integers).  Objects are either
built from a ``macro`` or spelled out explicitly; explicit data is loaded
without validation so that checkers can report the broken law with a witness.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import qlinalg as ql
from .affine import spec
from .qlinalg import Matrix
from .superring import (SuperAlgebra, cached_spectrum, even_polynomial_algebra, grassmann,
                        product_many, rationals)
from .supermodule import (SuperModule, direct_sum, free_module, idempotent_summand,
                          parity_swap, regular_module)
from .supersheaf import (FiniteSpace, ModuleSheaf, constant_ring_sheaf, free_sheaf,
                         module_sheaf_from_stalks, skyscraper)


class DescriptorError(ValueError):
    """Malformed descriptor; ``location`` is a JSON path."""

    def __init__(self, message, location="$"):
        super().__init__(f"{location}: {message}")
        self.location = location


def parse_q(x, loc="$"):
    if isinstance(x, bool):
        raise DescriptorError("boolean where a rational was expected", loc)
    if isinstance(x, int):
        return ql.q(x)
    if isinstance(x, str):
        try:
            if "/" in x:
                n, d = x.split("/")
                return ql.q(int(n)) / int(d)
            return ql.q(int(x))
        except (ValueError, ZeroDivisionError):
            pass
    raise DescriptorError(f"bad rational {x!r} (use 'num/den')", loc)


def render_q(x) -> str:
    x = ql.q(x)
    return f"{x.numerator}/{x.denominator}"


def parse_matrix(rows, loc="$", ncols=None):
    if not isinstance(rows, list):
        raise DescriptorError("matrix must be a list of rows", loc)
    out = [[parse_q(v, f"{loc}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    width = ncols if ncols is not None else (len(out[0]) if out else 0)
    for i, r in enumerate(out):
        if len(r) != width:
            raise DescriptorError(f"row length {len(r)} != {width}", f"{loc}[{i}]")
    return Matrix.from_lists(out, width)


def render_matrix(m: Matrix):
    return [[render_q(v) for v in row] for row in m.to_lists()]


def _req(d, key, loc):
    if not isinstance(d, dict):
        raise DescriptorError("expected an object", loc)
    if key not in d:
        raise DescriptorError(f"missing key {key!r}", loc)
    return d[key]


# -- rings ---------------------------------------------------------------------------------------

def load_ring(d, loc="$") -> SuperAlgebra:
    if not isinstance(d, dict):
        raise DescriptorError("ring must be an object", loc)
    macro = d.get("macro")
    if macro == "grassmann":
        n = _req(d, "n", loc)
        if not isinstance(n, int) or not 0 <= n <= 8:
            raise DescriptorError("n must be an integer in 0..8", f"{loc}.n")
        return grassmann(n)
    if macro == "rationals":
        return rationals()
    if macro == "product":
        facs = _req(d, "factors", loc)
        algs = [load_ring(f, f"{loc}.factors[{i}]") for i, f in enumerate(facs)]
        a = product_many(algs)
        a.validate()
        return a
    if macro == "even-polynomial":
        return even_polynomial_algebra([parse_q(c, f"{loc}.coeffs[{i}]")
                                        for i, c in enumerate(_req(d, "coeffs", loc))],
                                       name=d.get("name"))
    if macro is not None:
        raise DescriptorError(f"unknown ring macro {macro!r}", f"{loc}.macro")
    dim = _req(d, "dim", loc)
    parity = _req(d, "parity", loc)
    unit = [parse_q(v, f"{loc}.unit[{i}]") for i, v in enumerate(_req(d, "unit", loc))]
    mult = {}
    for t, entry in enumerate(_req(d, "mult", loc)):
        if not (isinstance(entry, list) and len(entry) == 4):
            raise DescriptorError("mult entries are [i, j, k, coeff]", f"{loc}.mult[{t}]")
        i, j, k, c = entry
        mult.setdefault((i, j), {})[k] = parse_q(c, f"{loc}.mult[{t}][3]")
    return SuperAlgebra(dim, parity, mult, unit, labels=d.get("labels"), name=d.get("name"),
                        check=False)


# -- modules -------------------------------------------------------------------------------------

def load_module(d, loc="$", ring=None) -> SuperModule:
    if not isinstance(d, dict):
        raise DescriptorError("module must be an object", loc)
    a = load_ring(d["ring"], f"{loc}.ring") if "ring" in d else ring
    if a is None:
        raise DescriptorError("module needs a ring", loc)
    macro = d.get("macro")
    if macro == "free":
        m = free_module(a, d.get("p", 0), d.get("q", 0))
    elif macro == "regular":
        m = regular_module(a)
    elif macro == "parity-swap":
        m = parity_swap(load_module(_req(d, "of", loc), f"{loc}.of", a))
    elif macro == "sum":
        parts = [load_module(s, f"{loc}.summands[{i}]", a)
                 for i, s in enumerate(_req(d, "summands", loc))]
        m = direct_sum(parts, algebra=a)
    elif macro == "summand":
        of = load_module(_req(d, "of", loc), f"{loc}.of", a)
        pts = cached_spectrum(a)
        k = _req(d, "point", loc)
        if not isinstance(k, int) or not 0 <= k < len(pts):
            raise DescriptorError(f"point index out of range 0..{len(pts) - 1}", f"{loc}.point")
        m, _ = idempotent_summand(of, pts[k].idempotent)
    elif macro is None:
        dim = _req(d, "dim", loc)
        action = [parse_matrix(mat, f"{loc}.action[{b}]", dim)
                  for b, mat in enumerate(_req(d, "action", loc))]
        if len(action) != a.dim:
            raise DescriptorError(f"need {a.dim} action matrices", f"{loc}.action")
        m = SuperModule(a, dim, _req(d, "parity", loc), action, check=False)
    else:
        raise DescriptorError(f"unknown module macro {macro!r}", f"{loc}.macro")
    for t, patch in enumerate(d.get("action_overrides", [])):
        b = _req(patch, "basis", f"{loc}.action_overrides[{t}]")
        mat = parse_matrix(_req(patch, "matrix", f"{loc}.action_overrides[{t}]"),
                           f"{loc}.action_overrides[{t}].matrix", m.dim)
        action = list(m.action)
        action[b] = mat
        m = SuperModule(a, m.dim, m.parity, action, check=False)
    if "parity_override" in d:
        m = SuperModule(a, m.dim, d["parity_override"], m.action, check=False)
    if d.get("name"):
        m.name = d["name"]
    return m


# -- spaces, bases, sheaves ----------------------------------------------------------------------

def load_space(d, loc="$") -> FiniteSpace:
    if isinstance(d, str):
        d = {"macro": d}
    macro = d.get("macro")
    if macro == "sierpinski":
        return FiniteSpace.sierpinski()
    if macro == "pseudocircle":
        return FiniteSpace.pseudocircle()
    if macro == "point":
        return FiniteSpace.point()
    if macro == "discrete":
        return FiniteSpace.discrete(_req(d, "n", loc))
    pts = _req(d, "points", loc)
    index = {p: i for i, p in enumerate(pts)}
    opens = []
    for t, o in enumerate(_req(d, "opens", loc)):
        try:
            opens.append([index[p] for p in o])
        except KeyError as e:
            raise DescriptorError(f"unknown point {e.args[0]!r}", f"{loc}.opens[{t}]") from None
    return FiniteSpace(pts, opens, name=d.get("name"), check=False)


def point_index(space, label, loc):
    try:
        return space.points.index(label)
    except ValueError:
        raise DescriptorError(f"unknown point {label!r}", loc) from None


def open_of(space, labels, loc):
    return frozenset(point_index(space, p, loc) for p in labels)


def load_base(d, loc="$"):
    """A ringed space: ``{"macro": "spec", "ring": ...}`` or a constant sheaf on a space."""
    macro = _req(d, "macro", loc)
    if macro == "spec":
        return spec(load_ring(_req(d, "ring", loc), f"{loc}.ring"))
    if macro == "constant":
        space = load_space(_req(d, "space", loc), f"{loc}.space")
        return constant_ring_sheaf(space, load_ring(_req(d, "ring", loc), f"{loc}.ring"))
    raise DescriptorError(f"unknown base macro {macro!r}", f"{loc}.macro")


def _structure(x):
    return x.structure_sheaf if hasattr(x, "structure_sheaf") else x


def load_sheaf(d, loc="$", base=None) -> ModuleSheaf:
    if not isinstance(d, dict):
        raise DescriptorError("sheaf must be an object", loc)
    b = load_base(d["base"], f"{loc}.base") if "base" in d else base
    if b is None:
        raise DescriptorError("sheaf needs a base", loc)
    o = _structure(b)
    sp = o.space
    macro = d.get("macro")
    name = d.get("name", "F")
    if macro == "free":
        f = free_sheaf(o, d.get("p", 0), d.get("q", 0), name=name)
    elif macro == "structure":
        f = free_sheaf(o, 1, 0, name=name)
    elif macro == "skyscraper":
        x = point_index(sp, _req(d, "point", loc), f"{loc}.point")
        stalk_ring = o.stalk_data[x] if o.stalk_data else o.stalk(x)
        m = load_module(_req(d, "module", loc), f"{loc}.module", stalk_ring)
        f = skyscraper(o, x, m, name=name)
    elif macro == "tilde":
        from .affine import module_sheaf_tilde
        if not hasattr(b, "structure_sheaf"):
            raise DescriptorError("tilde needs a spec base", f"{loc}.base")
        f = module_sheaf_tilde(b, load_module(_req(d, "module", loc), f"{loc}.module", b.ring),
                               check=False)
        f.name = name
    elif macro is None:
        stalks, maps = {}, {}
        for label, md in _req(d, "stalks", loc).items():
            x = point_index(sp, label, f"{loc}.stalks")
            r = o.stalk_data[x] if o.stalk_data else o.stalk(x)
            stalks[x] = load_module(md, f"{loc}.stalks.{label}", r)
        if len(stalks) != sp.n:
            raise DescriptorError("a stalk is needed for every point", f"{loc}.stalks")
        for t, e in enumerate(d.get("maps", [])):
            el = f"{loc}.maps[{t}]"
            x = point_index(sp, _req(e, "from", el), el)
            y = point_index(sp, _req(e, "to", el), el)
            maps[(x, y)] = parse_matrix(_req(e, "matrix", el), f"{el}.matrix", stalks[x].dim)
        f = module_sheaf_from_stalks(o, stalks, maps, name=name)
        f.declared_stalk_dims = {x: stalks[x].dim for x in stalks}
    else:
        raise DescriptorError(f"unknown sheaf macro {macro!r}", f"{loc}.macro")
    overrides = d.get("restriction_overrides", [])
    if overrides:
        res = dict(f._res)
        for t, e in enumerate(overrides):
            el = f"{loc}.restriction_overrides[{t}]"
            u = open_of(sp, _req(e, "from", el), el)
            v = open_of(sp, _req(e, "to", el), el)
            if (u, v) not in res:
                raise DescriptorError("not a restriction pair", el)
            res[(u, v)] = parse_matrix(_req(e, "matrix", el), f"{el}.matrix",
                                       f.section(u).dim)
        f = ModuleSheaf(o, f.sections, res, name=name)
    return f


def sheaf_stalk_mismatch(f: ModuleSheaf):
    """Witness if sections over a minimal open differ from the declared stalk."""
    declared = getattr(f, "declared_stalk_dims", None)
    if not declared:
        return None
    for x, dim in sorted(declared.items()):
        got = f.stalk(x).dim
        if got != dim:
            return {"law": "stalk-preserved", "witness": {"point": f.space.points[x],
                                                          "declared": dim, "sections": got}}
    return None


# -- jobs ----------------------------------------------------------------------------------------

def load_catalog(d, x, loc="$"):
    o = _structure(x)
    a = o.global_ring
    mods = [load_module(m, f"{loc}.modules[{i}]", a) for i, m in enumerate(d.get("modules", []))]
    sheaves = [load_sheaf(s, f"{loc}.sheaves[{i}]", x) for i, s in enumerate(d.get("sheaves", []))]
    return mods, sheaves


def load_cover(d, f: ModuleSheaf, loc="$"):
    sp = f.space
    if isinstance(d, dict) and "macro" in d:
        if d["macro"] == "points":
            return sp.min_open_cover()
        if d["macro"] == "all-opens":
            return [u for u in sp.opens if u]
        raise DescriptorError(f"unknown cover macro {d['macro']!r}", f"{loc}.macro")
    sets = _req(d, "cover", loc)
    out = []
    for i, labels in enumerate(sets):
        u = open_of(sp, labels, f"{loc}.cover[{i}]")
        if not sp.is_open(u):
            raise DescriptorError("cover member is not open", f"{loc}.cover[{i}]")
        out.append(u)
    return out


def read_json(path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise DescriptorError(f"cannot read {p}: {e.strerror}", str(p)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DescriptorError(f"invalid JSON: {e.msg}", f"{p}:{e.lineno}:{e.colno}") from None
