"""Batch verification front end.

Exit codes: 0 all checks pass, 1 a mathematical failure was found, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import descriptors as ds
from .affine import cech_cohomology
from .errors import HypothesisFailed, InvariantViolation
from .serre_swan import serre_swan_roundtrip

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
BUILTIN_CORPUS = Path(__file__).with_name("corpus")


class InputTooLarge(ds.DescriptorError):
    pass


def _result(target, kind, ok, law="", witness=None, detail="", extra=None):
    out = {"target": target, "kind": kind, "status": "pass" if ok else "fail", "law": law,
           "witness": _jsonable(witness or {}), "detail": detail}
    if extra:
        out.update(_jsonable(extra))
    return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    try:
        return ds.render_q(x)
    except (TypeError, ValueError):
        return str(x)


def _guard(dim, max_dim, what, loc):
    if max_dim is not None and dim > max_dim:
        raise InputTooLarge(f"{what} has dimension {dim} > --max-dim {max_dim}", loc)


# -- per-kind checks -------------------------------------------------------------------------------

def check_ring(doc, target, max_dim=None):
    d = doc.get("ring", doc) if isinstance(doc, dict) else doc
    a = ds.load_ring(d, "$.ring" if "ring" in doc else "$")
    _guard(a.dim, max_dim, "ring", "$")
    bad = a.violations(limit=1)
    if bad:
        return _result(target, "ring", False, bad[0]["law"], bad[0]["witness"], a.name)
    return _result(target, "ring", True, detail=f"{a.name} dim {a.even_dim}|{a.odd_dim}")


def check_module(doc, target, max_dim=None):
    from .supermodule import is_projective
    from .supersheaf import free_rank
    d = doc.get("module", doc)
    m = ds.load_module(d, "$.module" if "module" in doc else "$")
    _guard(m.algebra.dim, max_dim, "ring", "$")
    _guard(m.dim, max_dim, "module", "$")
    bad = m.algebra.violations(limit=1)
    if bad:
        return _result(target, "module", False, "ring-" + bad[0]["law"], bad[0]["witness"])
    bad = m.violations()
    if bad:
        return _result(target, "module", False, bad[0]["law"], bad[0]["witness"], m.name)
    pq = free_rank(m)
    proj = is_projective(m)
    extra = {"dim": f"{m.even_dim}|{m.odd_dim}",
             "free_rank": f"{pq[0]}|{pq[1]}" if pq else None,
             "projective": proj.projective}
    return _result(target, "module", True, detail=m.name, extra=extra)


def check_sheaf(doc, target, max_dim=None):
    from .supersheaf import classify, support
    d = doc.get("sheaf", doc)
    f = ds.load_sheaf(d, "$.sheaf" if "sheaf" in doc else "$")
    bad = f.space.violations()
    if bad:
        return _result(target, "sheaf", False, "space-" + bad[0]["law"], bad[0]["witness"])
    for u in f.space.opens:
        _guard(f.section(u).dim, max_dim, "sections", "$")
    mis = ds.sheaf_stalk_mismatch(f)
    if mis:
        return _result(target, "sheaf", False, mis["law"], mis["witness"], f.name)
    bad = f.violations()
    if bad:
        return _result(target, "sheaf", False, bad[0]["law"], bad[0]["witness"], f.name)
    cl = classify(f)
    sup = support(f)
    extra = {"classification": cl.as_dict(f.space),
             "support": [f.space.points[x] for x in sup.points],
             "support_closed": sup.closed}
    return _result(target, "sheaf", True, detail=f.name, extra=extra)


def run_roundtrip(scheme_doc, catalog_doc, target, max_dim=None):
    x = ds.load_base(scheme_doc.get("base", scheme_doc), "$.base")
    o = x.structure_sheaf if hasattr(x, "structure_sheaf") else x
    _guard(o.global_ring.dim, max_dim, "ring", "$.base")
    mods, sheaves = ds.load_catalog(catalog_doc, x)
    for m in mods:
        _guard(m.dim, max_dim, "module", "$.modules")
    rep = serre_swan_roundtrip(x, mods, sheaves)
    fails = rep.failures()
    law, wit = "", {}
    if fails:
        e = fails[0]
        law = e.detail if e.check in ("module-laws", "sheaf-laws") else e.check
        wit = {"object": e.object, **e.witness}
        for group, objs in (("modules", mods), ("sheaves", sheaves)):
            for i, o in enumerate(objs):
                if o.name == e.object:
                    wit["catalog"] = [group, i]
    extra = {"report": rep.as_dict(timestamp=None)}
    extra["report"].pop("timestamp", None)
    return _result(target, "roundtrip", rep.passed, law, wit, rep.title, extra)


def run_cohomology(sheaf_doc, cover_doc, target, max_dim=None, expect=None):
    f = ds.load_sheaf(sheaf_doc.get("sheaf", sheaf_doc), "$.sheaf")
    for u in f.space.opens:
        _guard(f.section(u).dim, max_dim, "sections", "$")
    bad = f.violations()
    if bad:
        return _result(target, "cohomology", False, bad[0]["law"], bad[0]["witness"], f.name)
    cover = ds.load_cover(cover_doc, f, "$.cover")
    union = frozenset().union(*cover) if cover else frozenset()
    if union != f.space.whole:
        missing = [f.space.points[x] for x in sorted(f.space.whole - union)]
        raise ds.DescriptorError(f"cover misses points {missing}", "$.cover")
    r = cech_cohomology(f, cover)
    groups = {str(g.degree): f"{g.even_dim}|{g.odd_dim}" for g in r.groups}
    ok, law, wit = True, "", {}
    if not r.dd_zero:
        ok, law = False, "d∘d=0"
    elif not r.h0_matches_sections:
        ok, law = False, "H0=Gamma"
    elif expect:
        for k, v in sorted(expect.items()):
            if groups.get(str(k), "0|0") != v:
                ok, law, wit = False, "expected-cohomology", {"degree": k, "expected": v,
                                                              "got": groups.get(str(k))}
                break
    extra = {"cohomology": r.as_dict(f.space)}
    return _result(target, "cohomology", ok, law, wit, f.name, extra)


def _resolve(base_dir, ref):
    if isinstance(ref, str):
        return ds.read_json(Path(base_dir) / ref)
    return ref


def check_document(doc, target, base_dir=".", max_dim=None):
    """Dispatch on ``doc["kind"]``; returns one result dict."""
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ds.DescriptorError("descriptor needs a 'kind'", "$")
    kind = doc["kind"]
    if kind == "ring":
        return check_ring(doc, target, max_dim)
    if kind == "module":
        return check_module(doc, target, max_dim)
    if kind == "sheaf":
        return check_sheaf(doc, target, max_dim)
    if kind == "roundtrip":
        return run_roundtrip(_resolve(base_dir, doc["scheme"]), _resolve(base_dir, doc["catalog"]),
                             target, max_dim)
    if kind == "cohomology":
        return run_cohomology(_resolve(base_dir, doc["sheaf"]), _resolve(base_dir, doc["cover"]),
                              target, max_dim, doc.get("expect"))
    if kind in ("scheme", "catalog", "cover"):
        return None
    raise ds.DescriptorError(f"unknown kind {kind!r}", "$.kind")


def recheck(doc, result, base_dir="."):
    """Re-fail ``result`` from its witness alone; True iff the named law is broken there."""
    from . import witness as wt
    law, w = result["law"], result["witness"]
    kind = doc["kind"]
    if kind == "ring":
        return wt.ring_refails(ds.load_ring(doc.get("ring", doc)), law, w)
    if kind == "module":
        return wt.module_refails(ds.load_module(doc.get("module", doc)), law, w)
    if kind == "sheaf":
        f = ds.load_sheaf(doc.get("sheaf", doc))
        return wt.sheaf_refails(f, law, w)
    if kind == "roundtrip":
        scheme, catalog = _resolve(base_dir, doc["scheme"]), _resolve(base_dir, doc["catalog"])
        x = ds.load_base(scheme.get("base", scheme))
        mods, sheaves = ds.load_catalog(catalog, x)
        group, i = w["catalog"]
        if group == "modules":
            return wt.module_refails(mods[i], law, w)
        return wt.sheaf_refails(sheaves[i], law, w)
    return False


def _guarded(fn, target, kind):
    """Turn verifier exceptions into failure results (input errors propagate)."""
    try:
        return fn()
    except ds.DescriptorError:
        raise
    except (InvariantViolation, HypothesisFailed) as e:
        return _result(target, kind, False, type(e).__name__, getattr(e, "witness", {}), str(e))


# -- the suite ---------------------------------------------------------------------------------------

def builtin_checks(seed=0):
    """Small lemma checks independent of the descriptor corpus: (name, ok, detail)."""
    from .samples import random_homogeneous, random_module, rng_for
    from .superring import grassmann, product, rationals
    from .superring import whole_ideal
    from .supermodule import (free_module, free_tensor_iso, nakayama_witness, regular_module,
                              surjective_endo_check, tensor_over)
    from .supersheaf import FiniteSpace, constant_ring_sheaf, free_sheaf, stalk_hom_iso
    from .affine import spec, module_sheaf_tilde
    from .serre_swan import adjunction_check
    out = []
    rng = rng_for(seed)
    l2 = grassmann(2)
    out.append(("grassmann dims", all(grassmann(n).dim == 2 ** n for n in range(6)), ""))
    m = random_module(l2, rng)
    fti = free_tensor_iso(1, 1, m)
    out.append(("free tensor iso", (fti.phi.matrix @ fti.psi.matrix).is_identity(), m.name))
    t = tensor_over(regular_module(l2), regular_module(l2))
    ok = True
    for _ in range(10):
        pa, pn = rng.randint(0, 1), rng.randint(0, 1)
        a = random_homogeneous(l2, pa, rng)
        n = random_homogeneous(l2, pn, rng)
        mm = random_homogeneous(l2, rng.randint(0, 1), rng)
        s = -1 if pa and pn else 1
        lhs = t.act(t.pure(mm, n), a)
        rhs = tuple(s * v for v in t.pure(l2.mul(mm, a), n))
        ok = ok and lhs == rhs and lhs == t.pure(mm, l2.mul(n, a))
    out.append(("graded tensor sign law", ok, "(m⊗n)a = (-1)^{|a||n|} ma⊗n"))
    a = product(grassmann(1), rationals())
    fm = free_module(a, 1, 0)
    x = nakayama_witness(fm, whole_ideal(a))
    out.append(("nakayama witness", fm.action_matrix(tuple(
        u + v for u, v in zip(a.unit, x))).is_zero(), ""))
    from .supermodule import ModuleHom
    ident = ModuleHom.identity(free_module(l2, 1, 1))
    out.append(("surjective endo", surjective_endo_check(ident).is_isomorphism, ""))
    sp = FiniteSpace.sierpinski()
    base = constant_ring_sheaf(sp, grassmann(1))
    f = free_sheaf(base, 1, 0)
    out.append(("stalk hom iso", all(stalk_hom_iso(f, f, y).bijective for y in range(sp.n)), ""))
    xs = spec(product(grassmann(1), grassmann(1)))
    mod = free_module(xs.ring, 1, 0)
    ad = adjunction_check(mod, module_sheaf_tilde(xs, mod))
    out.append(("adjunction", ad.passed, f"dims {ad.dims}"))
    pc = FiniteSpace.pseudocircle()
    o = free_sheaf(constant_ring_sheaf(pc, rationals()), 1, 0)
    uc, ud = pc.min_open(2), pc.min_open(3)
    r = cech_cohomology(o, [uc, ud])
    out.append(("pseudocircle H1 control", r.groups[1].dim == 1 and r.groups[1].even_dim == 1,
                f"H1 = {r.groups[1].even_dim}|{r.groups[1].odd_dim}"))
    return out


def corpus_dir():
    env = os.environ.get("SUPERSWAN_CORPUS")
    return Path(env) if env else BUILTIN_CORPUS


def run_suite(seed=0, max_dim=None):
    root = corpus_dir()
    if not root.is_dir():
        raise ds.DescriptorError(f"corpus directory {root} not found", str(root))
    results = []
    for path in sorted(root.glob("*.json")):
        doc = ds.read_json(path)
        res = _guarded(lambda: check_document(doc, path.name, root, max_dim), path.name,
                       doc.get("kind", "?") if isinstance(doc, dict) else "?")
        if res is not None:
            res["expected"] = "pass"
            results.append(res)
    broken = root / "broken"
    for path in sorted(broken.glob("*.json")) if broken.is_dir() else []:
        doc = ds.read_json(path)
        target = f"broken/{path.name}"
        res = _guarded(lambda: check_document(doc, target, broken, max_dim), target,
                       doc.get("kind", "?"))
        res["expected"] = "fail"
        want = doc.get("expect_law")
        if want and res["status"] == "fail" and want not in (res["law"], res.get("detail", "")):
            res["detail"] = f"rejected for {res['law']!r}, expected {want!r}"
            res["expected_law_matched"] = False
        results.append(res)
    for name, ok, detail in builtin_checks(seed):
        r = _result(f"builtin:{name}", "lemma", ok, "" if ok else name, {}, detail)
        r["expected"] = "pass"
        results.append(r)
    return results


def _as_expected(r):
    return r["status"] == r.get("expected", "pass") and r.get("expected_law_matched", True)


# -- rendering ---------------------------------------------------------------------------------------

def build_report(command, results):
    results = sorted(results, key=lambda r: r["target"])
    ok = all(_as_expected(r) for r in results)
    return {"command": command, "passed": ok,
            "summary": {"total": len(results),
                        "as_expected": sum(1 for r in results if _as_expected(r))},
            "results": results,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}


def render_text(report):
    lines = [f"{report['command']}: {'PASS' if report['passed'] else 'FAIL'} "
             f"({report['summary']['as_expected']}/{report['summary']['total']} as expected)"]
    for r in report["results"]:
        mark = "ok " if _as_expected(r) else "BAD"
        line = f"  {mark} [{r['status']}] {r['target']}"
        if r.get("law"):
            line += f" law={r['law']}"
        if r.get("witness"):
            line += f" witness={json.dumps(r['witness'], sort_keys=True, ensure_ascii=False)}"
        if r.get("detail"):
            line += f" ({r['detail']})"
        lines.append(line)
    return "\n".join(lines)


def render_json(report):
    return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False)


# -- entry point -------------------------------------------------------------------------------------

def make_parser():
    p = argparse.ArgumentParser(prog="superswan", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", metavar="PATH", help="also write the report to PATH")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text")
    common.add_argument("--max-dim", type=int, default=None,
                        help="reject inputs whose dimension exceeds N")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sampling")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify-ring", parents=[common]).add_argument("ring")
    sub.add_parser("verify-module", parents=[common]).add_argument("module")
    rt = sub.add_parser("roundtrip", parents=[common])
    rt.add_argument("scheme")
    rt.add_argument("catalog")
    co = sub.add_parser("cohomology", parents=[common])
    co.add_argument("sheaf")
    co.add_argument("cover")
    sub.add_parser("suite", parents=[common])
    return p


def _dispatch(args):
    if args.command == "verify-ring":
        doc = ds.read_json(args.ring)
        return [_guarded(lambda: check_ring(doc, args.ring, args.max_dim), args.ring, "ring")]
    if args.command == "verify-module":
        doc = ds.read_json(args.module)
        return [_guarded(lambda: check_module(doc, args.module, args.max_dim), args.module,
                         "module")]
    if args.command == "roundtrip":
        s, c = ds.read_json(args.scheme), ds.read_json(args.catalog)
        return [_guarded(lambda: run_roundtrip(s, c, args.catalog, args.max_dim), args.catalog,
                         "roundtrip")]
    if args.command == "cohomology":
        s, c = ds.read_json(args.sheaf), ds.read_json(args.cover)
        return [_guarded(lambda: run_cohomology(s, c, args.sheaf, args.max_dim), args.sheaf,
                         "cohomology")]
    return run_suite(args.seed, args.max_dim)


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        results = _dispatch(args)
    except ds.DescriptorError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    report = build_report(args.command, results)
    text = render_json(report) if args.fmt == "json" else render_text(report)
    print(text)
    if args.report:
        Path(args.report).write_text(render_json(report) + "\n", encoding="utf-8")
    return EXIT_OK if report["passed"] else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
