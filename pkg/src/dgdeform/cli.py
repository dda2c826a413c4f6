"""Command-line front end.

Every subcommand reads an optional JSON workspace (file path or ``-`` for
stdin), calls the library and prints a deterministic JSON report.  Exit
codes: 0 success, 1 mathematical failure (the report carries a witness),
2 input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from typing import Any, Sequence

from .artin import ArtinAlgebra, check_artin
from .complexes import CheckResult, Filtration, GradedComplex
from .dgla import (
    Dgla,
    check_dgla,
    deligne_tangent,
    gauge_act,
    gauge_equivalent,
    mc_lift,
    obstructed_dgla,
    tensor_with_ideal,
)
from .linalg import Matrix
from .models import BUILTIN
from .period import (
    HodgeModel,
    PeriodError,
    SubcomplexPair,
    fm_period,
    fm_square_commutes,
    flag_tangent_vs_quotient,
    grass_tangent_vs_cone,
    is_formal_pair,
    lie_derivative,
    period_tangent,
    transversality,
    validate_model,
)
from .serialize import (
    SchemaError,
    Workspace,
    builtin_ring,
    dumps,
    encode_chain_complex,
    encode_dgla,
    encode_matrix,
    encode_model,
    encode_ring,
    encode_simplicial,
    encode_vector,
    load_json,
    parse_vector,
    validate,
)
from .simplicial import (
    ChainComplexNN,
    SimplicialVectorSpace,
    TensorPair,
    check_simplicial,
    denormalize,
    denormalized_dim,
    normalize,
    random_chain_complex,
)


class MathFailure(Exception):
    """Raised to abort a command with exit code 1 and a witness in the report."""

    def __init__(self, reason: str, witness: Any = None):
        super().__init__(reason)
        self.reason, self.witness = reason, witness


def _check(res: CheckResult) -> dict:
    out = {"ok": bool(res)}
    if not res:
        out["reason"] = res.reason
        out["witness"] = _plain(res.witness)
        if res.detail:
            out["detail"] = res.detail
    return out


def _plain(x):
    if isinstance(x, Matrix):
        return encode_matrix(x)
    if isinstance(x, (tuple, list)):
        return [_plain(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    return x


# ---------------------------------------------------------------------------
# input helpers


def _read_workspace(path: str | None) -> Workspace:
    if path is None:
        return Workspace()
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise SchemaError(path, f"cannot read input: {e.strerror}") from None
    return load_json(text)


def _validated(ws: Workspace, name: str, kind: str):
    obj = ws.get(name, kind)
    res = validate(kind, obj)
    if not res:
        raise MathFailure(f"{kind} {name!r} failed validation: {res.reason}", _check(res))
    return obj


def _dgla(ws: Workspace, name: str) -> Dgla:
    if name in ws.objects:
        return _validated(ws, name, "dgla")
    if name == "obstructed":
        return obstructed_dgla()
    raise SchemaError("--dgla", f"no dgla named {name!r}")


def _ring(ws: Workspace, name: str) -> ArtinAlgebra:
    if name in ws.objects:
        return _validated(ws, name, "ring")
    return builtin_ring(name)


def _model(ws: Workspace, name: str) -> HodgeModel:
    if name in ws.objects:
        m = ws.get(name, "model")
    elif name in BUILTIN:
        m = BUILTIN[name]()
    else:
        raise SchemaError("--model", f"no model named {name!r}; built-ins: {', '.join(sorted(BUILTIN))}")
    res = validate("model", m)
    if not res:
        raise MathFailure(f"model {name!r} failed validation: {res.reason}", _check(res))
    return m


def _vector(text: str, flag: str, length: int) -> tuple:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError:
        raise SchemaError(flag, "expected a JSON list of rationals") from None
    return parse_vector(raw, flag, length)


# ---------------------------------------------------------------------------
# dk


def _roundtrip_chain(V: ChainComplexNN, levels: int) -> dict:
    L = max(levels, V.top)
    K = denormalize(V, L)
    dims_ok = all(K.dims[n] == denormalized_dim(V, n) for n in range(L + 1))
    back = normalize(K)
    return {"levels": L, "dimension_formula": dims_ok, "roundtrip": back == V,
            "simplicial_identities": _check(check_simplicial(K))}


def _roundtrip_simplicial(S: SimplicialVectorSpace) -> dict:
    res = check_simplicial(S)
    out = {"simplicial_identities": _check(res)}
    if res:
        N = normalize(S)
        K = denormalize(N, S.N)
        out["normalized_dims"] = list(N.dims)
        out["roundtrip_dims"] = list(K.dims) == list(S.dims)
    return out


def _ez_aw(A: SimplicialVectorSpace, B: SimplicialVectorSpace, pq: tuple[int, int] | None) -> dict:
    from .linalg import Matrix as M
    T = TensorPair(A, B)
    top = T.N
    failures = []
    for n in range(top + 1):
        for p in range(n + 1):
            ez = T.ez(p, n - p)
            for p2 in range(n + 1):
                comp = T.aw_block(p2, n - p2) @ ez
                want = M.identity(comp.nrows) if p2 == p else M.zeros(*comp.shape)
                if comp != want:
                    failures.append([p, n - p, p2])
    homology = {str(n): _check(T.ez_aw_on_homology(n)) for n in range(top)}
    out = {"levels": top, "aw_ez_identity": not failures, "failures": failures, "ez_aw_on_homology": homology}
    if pq is not None:
        p, q = pq
        if p + q > top:
            raise SchemaError("--pq", f"p + q must be at most {top}")
        out["aw_ez"] = {"p": p, "q": q, "matrix": encode_matrix(T.aw_block(p, q) @ T.ez(p, q))}
    return out


def cmd_dk(args, ws: Workspace) -> dict:
    chains = [(n, ws.get(n)) for n in ws.names("chain_complex")]
    simps = [(n, ws.get(n)) for n in ws.names("simplicial")]
    if args.dims:
        chains.append(("dims", ChainComplexNN([int(x) for x in args.dims.split(",")])))
    if args.random:
        rng = random.Random(args.seed)
        chains.extend((f"random{k:03d}", random_chain_complex(rng, 3, 5)) for k in range(args.random))
    for name, C in chains:
        res = validate("chain_complex", C)
        if not res:
            raise MathFailure(f"chain complex {name!r} is not a complex", _check(res))
    results: dict = {}
    ok = True
    if args.ez_aw:
        objs = [denormalize(C, args.levels) for _, C in chains] + [S for _, S in simps]
        names = [n for n, _ in chains] + [n for n, _ in simps]
        if not objs:
            raise SchemaError("dk", "no chain complex or simplicial object to pair")
        for S, n in zip(objs, names):
            res = check_simplicial(S)
            if not res:
                raise MathFailure(f"{n!r} violates the simplicial identities", _check(res))
        A, B = (objs[0], objs[1]) if len(objs) > 1 else (objs[0], objs[0])
        pq = tuple(int(x) for x in args.pq.split(",")) if args.pq else None
        rep = _ez_aw(A, B, pq)
        results["pair"] = [names[0], names[1] if len(objs) > 1 else names[0]]
        results["ez_aw"] = rep
        ok = rep["aw_ez_identity"] and all(h["ok"] for h in rep["ez_aw_on_homology"].values())
    else:
        for name, C in chains:
            r = _roundtrip_chain(C, args.levels)
            ok &= r["roundtrip"] and r["dimension_formula"] and r["simplicial_identities"]["ok"]
            results[name] = r
        for name, S in simps:
            r = _roundtrip_simplicial(S)
            ok &= r["simplicial_identities"]["ok"] and r.get("roundtrip_dims", False)
            results[name] = r
        results = {"objects": len(results), "results": results}
    return {"ok": bool(ok), "results": results}


# ---------------------------------------------------------------------------
# mc and tangent


def _family(T, fam) -> dict:
    return {"base": encode_vector(fam.base), "dim": fam.dim,
            "directions": [encode_vector(c) for c in fam.directions.columns()]}


def cmd_mc(args, ws: Workspace) -> dict:
    g = _dgla(ws, args.dgla)
    A = _ring(ws, args.ring)
    T = tensor_with_ideal(g, A)
    basis = list(T.names)
    if args.action == "solve":
        res = mc_lift(g, A)
        obs = [{"stratum": o.stratum, "class": encode_vector(o.class_coords), "nonzero": o.nonzero,
                "representative": encode_vector(o.representative)} for o in res.obstructions]
        out = {"basis": basis, "exact": res.exact, "families": [_family(T, f) for f in res.families],
               "obstructions": obs}
        return {"ok": not any(o["nonzero"] for o in obs), "results": out}
    if args.x0 is None:
        raise SchemaError("--x0", "orbit needs --x0")
    x0 = _vector(args.x0, "--x0", T.dim)
    if args.gauge is not None:
        x1 = gauge_act(g, A, _vector(args.gauge, "--gauge", T.dim), x0)
    elif args.x1 is not None:
        x1 = _vector(args.x1, "--x1", T.dim)
    else:
        raise SchemaError("--x1", "orbit needs --x1 or --gauge")
    dec = gauge_equivalent(g, A, x0, x1)
    out = {"basis": basis, "x0": encode_vector(x0), "x1": encode_vector(x1), "equivalent": dec.equivalent,
           "certified": dec.certified, "witness": encode_vector(dec.witness) if dec.witness else None}
    return {"ok": dec.equivalent, "results": out}


def cmd_tangent(args, ws: Workspace) -> dict:
    g = _dgla(ws, args.dgla)
    js = [args.j] if args.j is not None else list(range(-1, 3))
    out = {}
    for j in js:
        t = deligne_tangent(g, j)
        out[str(j)] = {"direct": t.direct, "groupoid": t.groupoid, "via_cone": t.via_cone, "agree": t.agree}
    return {"ok": all(v["agree"] for v in out.values()), "results": out}


# ---------------------------------------------------------------------------
# grass, flag, period


def _grass_report(V: GradedComplex, W) -> dict:
    t = grass_tangent_vs_cone(V, W)
    return {"grass_dim": t.grass_dim, "cone_h1": t.cone_dim, "equal": t.equal,
            "numerator_dim": t.numerator_dim, "group_directions": t.moves_dim}


def cmd_grass(args, ws: Workspace) -> dict:
    out = {}
    if args.sub:
        V, W = _validated(ws, args.sub, "subcomplex")
        out[args.sub] = _grass_report(V, W)
    if args.model:
        m = _model(ws, args.model)
        steps = [args.step] if args.step is not None else list(range(m.F.p_min, m.F.p_max + 1))
        for p in steps:
            out[f"{args.model}.F{p}"] = _grass_report(m.V, m.F.step(p))
    if args.random:
        from .corpus import random_filtered_pair
        rng = random.Random(args.seed)
        agree = 0
        for _ in range(args.random):
            V, W = random_filtered_pair(rng)
            agree += grass_tangent_vs_cone(V, W).equal
        out["random"] = {"count": args.random, "seed": args.seed, "equal": agree}
    if not out:
        raise SchemaError("grass", "give --sub, --model or --random")
    ok = all(v.get("equal", True) is True for v in out.values() if "grass_dim" in v)
    if "random" in out:
        ok &= out["random"]["equal"] == args.random
    return {"ok": ok, "results": out}


def _flag_report(V: GradedComplex, F: Filtration) -> dict:
    t = flag_tangent_vs_quotient(V, F)
    return {"flag_dim": t.flag_dim, "quotient_h1": t.quotient_dim, "cone_h1": t.cone_dim,
            "formal": t.formal, "equal": t.equal}


def cmd_flag(args, ws: Workspace) -> dict:
    out = {}
    if args.filtration:
        F = _validated(ws, args.filtration, "filtration")
        out[args.filtration] = _flag_report(F.complex, F)
    if args.model:
        m = _model(ws, args.model)
        out[args.model] = _flag_report(m.V, m.F)
    if not out:
        raise SchemaError("flag", "give --filtration or --model")
    return {"ok": all(v["equal"] for v in out.values()), "results": out}


def _period_tangent_report(m: HodgeModel) -> dict:
    pt = period_tangent(m)
    kind = "isomorphism" if pt.is_isomorphism else ("injective" if pt.rank == pt.source_dim else "degenerate")
    return {"matrix": encode_matrix(pt.matrix), "rank": pt.rank, "source_dim": pt.source_dim,
            "target_dim": pt.target_dim, "kind": kind, "summary": f"{kind}, rank {pt.rank}",
            "transversality": _check(pt.transversality)}


def cmd_period(args, ws: Workspace) -> dict:
    m = _model(ws, args.model)
    A = _ring(ws, args.ring)
    out: dict = {"model": args.model}
    ok = True
    if args.tangent:
        rep = _period_tangent_report(m)
        out["tangent"] = rep
        ok = rep["transversality"]["ok"]
    if args.square:
        sq = fm_square_commutes(m, A)
        out["square"] = {"commutes": sq.ok, "checked": sq.checked, "failures": _plain(sq.failures)}
        ok &= sq.ok
    if args.xi is not None:
        T = tensor_with_ideal(m.g, A)
        xi = _vector(args.xi, "--xi", T.dim)
        try:
            pc = fm_period(m, A, xi)
        except PeriodError as e:
            raise MathFailure(str(e)) from None
        out["period"] = {"basis": list(pc.tensor.names), "class": encode_vector(pc.vector),
                         "zero": not any(pc.vector)}
    if len(out) == 1:
        raise SchemaError("period", "give --tangent, --square or --xi")
    return {"ok": bool(ok), "results": out}


def elliptic_report() -> dict:
    from .artin import dual_numbers
    m = BUILTIN["elliptic"]()
    lie = lie_derivative(m.g, m.V, m.contraction)
    sq = fm_square_commutes(m, dual_numbers())
    rep = {
        "validation": _check(validate_model(m)),
        "lie_derivative_zero": lie.matrix.is_zero(),
        "formal_pair": is_formal_pair(m.filt),
        "transversality": _check(transversality(m)),
        "period_tangent": _period_tangent_report(m),
        "grass_F1": _grass_report(m.V, m.F.step(1)),
        "flag": _flag_report(m.V, m.F),
        "square": {"commutes": sq.ok, "checked": sq.checked},
    }
    ok = (rep["validation"]["ok"] and rep["formal_pair"] and rep["transversality"]["ok"]
          and rep["period_tangent"]["kind"] == "isomorphism" and rep["grass_F1"]["equal"]
          and rep["flag"]["equal"] and sq.ok)
    return {"ok": ok, "results": rep}


def demo_workspace() -> dict:
    from .artin import dual_numbers, truncated_polynomial
    from .simplicial import denormalize as K
    V = ChainComplexNN([1, 1], {1: Matrix([[1]])})
    objs = [encode_model(BUILTIN[name](), name) for name in sorted(BUILTIN)]
    objs.append(encode_dgla(obstructed_dgla(), "obstructed"))
    objs.append(encode_ring(dual_numbers(), "dual"))
    objs.append(encode_ring(truncated_polynomial(3), "t3"))
    objs.append(encode_chain_complex(V, "interval"))
    objs.append(encode_simplicial(K(V, 2), "interval_K"))
    return {"kind": "workspace", "objects": objs}


def cmd_demo(args, ws: Workspace) -> dict:
    if args.name == "elliptic":
        return elliptic_report()
    return {"ok": True, "document": demo_workspace()}


def cmd_check(args, ws: Workspace) -> dict:
    out = {}
    for name in ws.names():
        kind, obj = ws.objects[name]
        out[name] = {"kind": kind, **_check(validate(kind, obj))}
    ok = all(v["ok"] for v in out.values())
    return {"ok": ok, "results": {"objects": len(out), "summary": f"{len(out)} objects", "checks": out}}


# ---------------------------------------------------------------------------
# output


def _flatten(prefix: str, x, out: list):
    if isinstance(x, dict):
        for k in sorted(x):
            _flatten(f"{prefix}.{k}" if prefix else str(k), x[k], out)
    elif isinstance(x, list) and x and all(isinstance(r, list) for r in x):
        out.append((prefix, "; ".join(" ".join(str(c) for c in r) for r in x)))
    else:
        out.append((prefix, json.dumps(x, ensure_ascii=False) if not isinstance(x, str) else x))


def render_pretty(report: dict) -> str:
    rows: list = []
    _flatten("", report, rows)
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dgdeform", description="Exact deformation-theory computations.")
    ap.add_argument("--pretty", action="store_true", help="aligned text instead of JSON")
    ap.add_argument("--timing", action="store_true", help="include wall-clock time in the report")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, action=None):
        p = sub.add_parser(name, help=help_)
        if action is not None:
            # before the optional input so that `mc solve ws.json` parses
            p.add_argument(action[0], choices=action[1])
        p.add_argument("input", nargs="?", help="JSON workspace file, or - for stdin")
        p.add_argument("--pretty", action="store_true", default=argparse.SUPPRESS)
        p.add_argument("--timing", action="store_true", default=argparse.SUPPRESS)
        return p

    p = add("dk", "Dold-Kan round trips and Eilenberg-Zilber / Alexander-Whitney identities")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--roundtrip", action="store_true")
    mode.add_argument("--ez-aw", action="store_true")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--pq", help="report the AW∘EZ matrix at p,q")
    p.add_argument("--dims", help="add a chain complex with these dimensions and zero boundary")
    p.add_argument("--random", type=int, default=0, help="add this many random chain complexes")
    p.add_argument("--seed", type=int, default=0)

    p = add("mc", "Maurer-Cartan solutions and gauge orbits", ("action", ["solve", "orbit"]))
    p.add_argument("--dgla", required=True)
    p.add_argument("--ring", default="dual", help="ring name or dual | trunc:s | shift:n")
    p.add_argument("--x0")
    p.add_argument("--x1")
    p.add_argument("--gauge", help="set x1 = e^a * x0 for this degree-0 element a")

    p = add("tangent", "Deligne groupoid tangent cohomology")
    p.add_argument("--dgla", required=True)
    p.add_argument("--j", type=int)

    p = add("grass", "Grass functor tangent space versus cone cohomology")
    p.add_argument("--sub", help="subcomplex object name")
    p.add_argument("--model", help="model name (built-in or from the workspace)")
    p.add_argument("--step", type=int)
    p.add_argument("--random", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)

    p = add("flag", "Flag functor tangent space versus the quotient model")
    p.add_argument("--filtration")
    p.add_argument("--model")

    p = add("period", "Period map on a Hodge model")
    p.add_argument("--model", default="elliptic")
    p.add_argument("--ring", default="dual")
    p.add_argument("--tangent", action="store_true")
    p.add_argument("--square", action="store_true")
    p.add_argument("--xi", help="MC element of g ⊗ m_A as a JSON list")

    add("demo", "Built-in demonstrations", ("name", ["elliptic", "workspace"]))

    add("check", "Validate every object of a workspace")
    return ap


COMMANDS = {"dk": cmd_dk, "mc": cmd_mc, "tangent": cmd_tangent, "grass": cmd_grass, "flag": cmd_flag,
            "period": cmd_period, "demo": cmd_demo, "check": cmd_check}


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Execute a command line; returns (exit code, output text)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = ap.parse_args(argv)
    start = time.perf_counter()
    try:
        ws = _read_workspace(args.input)
        body = COMMANDS[args.command](args, ws)
    except SchemaError as e:
        report = {"command": argv, "ok": False, "error": {"kind": "input", "path": e.path, "message": str(e)}}
        return 2, _render(args, report, start)
    except MathFailure as e:
        report = {"command": argv, "ok": False,
                  "error": {"kind": "math", "message": e.reason, "witness": _plain(e.witness)}}
        return 1, _render(args, report, start)
    if "document" in body:
        return 0, dumps(body["document"])
    report = {"command": argv, **body}
    return (0 if body["ok"] else 1), _render(args, report, start)


def _render(args, report: dict, start: float) -> str:
    if getattr(args, "timing", False):
        report["timing_s"] = round(time.perf_counter() - start, 3)
    return render_pretty(report) if getattr(args, "pretty", False) else dumps(report)


def main(argv: Sequence[str] | None = None) -> int:
    code, text = run(argv)
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
