"""JSON documents for every object kind, with exact rationals as "p/q" strings.

A document is either one object ``{"kind": ..., "name": ..., ...}`` or a
workspace ``{"kind": "workspace", "objects": [...]}``.  Objects may refer to
earlier objects by name (a filtration names its complex, for instance).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .artin import ArtinAlgebra, check_artin, dual_numbers, square_zero_shift, truncated_polynomial
from .complexes import CheckResult, Filtration, GradedComplex, filtration_check
from .dgla import Dgla, check_dgla, obstructed_dgla
from .linalg import Matrix, qstr
from .models import BUILTIN
from .period import HodgeModel, contraction_from_constants, validate_model
from .simplicial import ChainComplexNN, SimplicialVectorSpace, check_simplicial


class SchemaError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


# ---------------------------------------------------------------------------
# scalars and matrices


def parse_scalar(x, path: str) -> Fraction:
    if isinstance(x, bool):
        raise SchemaError(path, "expected a rational, got a boolean")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise SchemaError(path, f"cannot parse {x!r} as a rational") from None
    raise SchemaError(path, f"expected an integer or a 'p/q' string, got {type(x).__name__}")


def encode_scalar(x: Fraction) -> str | int:
    x = Fraction(x)
    return int(x) if x.denominator == 1 else qstr(x)


def parse_vector(v, path: str, length: int | None = None) -> tuple:
    if not isinstance(v, list):
        raise SchemaError(path, "expected a list")
    out = tuple(parse_scalar(x, f"{path}[{k}]") for k, x in enumerate(v))
    if length is not None and len(out) != length:
        raise SchemaError(path, f"expected length {length}, got {len(out)}")
    return out


def parse_matrix(m, path: str, shape: tuple[int, int] | None = None) -> Matrix:
    if not isinstance(m, list):
        raise SchemaError(path, "matrix must be a list of rows")
    rows = [parse_vector(r, f"{path}[{i}]") for i, r in enumerate(m)]
    if shape is not None:
        r, c = shape
        if len(rows) != r:
            raise SchemaError(path, f"expected {r} rows, got {len(rows)}")
        for i, row in enumerate(rows):
            if len(row) != c:
                raise SchemaError(f"{path}[{i}]", f"expected {c} entries, got {len(row)}")
        return Matrix(rows, c) if r else Matrix.zeros(0, c)
    if not rows:
        raise SchemaError(path, "empty matrix needs a known shape")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise SchemaError(f"{path}[{i}]", "ragged matrix")
    return Matrix(rows, width)


def encode_vector(v) -> list:
    return [encode_scalar(x) for x in v]


def encode_matrix(M: Matrix) -> list:
    return [encode_vector(r) for r in M.rows]


def _get(doc: dict, key: str, path: str, kind=None, default=...):
    if key not in doc:
        if default is not ...:
            return default
        raise SchemaError(f"{path}.{key}", "missing field")
    val = doc[key]
    if kind is not None and not isinstance(val, kind):
        raise SchemaError(f"{path}.{key}", f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _int_keys(d: dict, path: str) -> dict[int, Any]:
    out = {}
    for k, v in d.items():
        try:
            out[int(k)] = v
        except ValueError:
            raise SchemaError(f"{path}.{k}", "key must be an integer") from None
    return out


# ---------------------------------------------------------------------------
# object decoders (built unchecked; validation is a separate step)


def _complex(doc: dict, path: str) -> GradedComplex:
    lo = _get(doc, "lo", path, int, 0)
    dims = _get(doc, "dims", path, list)
    if not all(isinstance(x, int) and x >= 0 for x in dims):
        raise SchemaError(f"{path}.dims", "dimensions must be non-negative integers")
    d = {}
    for n, m in _int_keys(_get(doc, "d", path, dict, {}), f"{path}.d").items():
        if not lo <= n < lo + len(dims) - 1:
            raise SchemaError(f"{path}.d.{n}", "differential outside the degree window")
        d[n] = parse_matrix(m, f"{path}.d.{n}", (dims[n + 1 - lo], dims[n - lo]))
    return GradedComplex(lo, dims, d, check=False)


def _chain_complex(doc: dict, path: str) -> ChainComplexNN:
    dims = _get(doc, "dims", path, list)
    d = {}
    for n, m in _int_keys(_get(doc, "d", path, dict, {}), f"{path}.d").items():
        if not 1 <= n < len(dims):
            raise SchemaError(f"{path}.d.{n}", "boundary outside levels 1..top")
        d[n] = parse_matrix(m, f"{path}.d.{n}", (dims[n - 1], dims[n]))
    return ChainComplexNN(dims, d, check=False)


def _simplicial(doc: dict, path: str) -> SimplicialVectorSpace:
    dims = _get(doc, "dims", path, list)
    top = len(dims) - 1
    faces, degens = {}, {}
    fdoc = _int_keys(_get(doc, "faces", path, dict), f"{path}.faces")
    for n in range(1, top + 1):
        ms = fdoc.get(n)
        if not isinstance(ms, list) or len(ms) != n + 1:
            raise SchemaError(f"{path}.faces.{n}", f"expected {n + 1} face matrices")
        faces[n] = [parse_matrix(m, f"{path}.faces.{n}[{i}]", (dims[n - 1], dims[n])) for i, m in enumerate(ms)]
    sdoc = _int_keys(_get(doc, "degens", path, dict), f"{path}.degens")
    for n in range(top):
        ms = sdoc.get(n)
        if not isinstance(ms, list) or len(ms) != n + 1:
            raise SchemaError(f"{path}.degens.{n}", f"expected {n + 1} degeneracy matrices")
        degens[n] = [parse_matrix(m, f"{path}.degens.{n}[{j}]", (dims[n + 1], dims[n])) for j, m in enumerate(ms)]
    return SimplicialVectorSpace(dims, faces, degens, check=False)


def _bracket(items, path: str) -> dict:
    if not isinstance(items, list):
        raise SchemaError(path, "bracket must be a list of [a, b, {c: coefficient}]")
    out = {}
    for k, item in enumerate(items):
        p = f"{path}[{k}]"
        if not (isinstance(item, list) and len(item) == 3 and isinstance(item[2], dict)):
            raise SchemaError(p, "expected [a, b, {c: coefficient}]")
        a, b, vec = item
        out[(int(a), int(b))] = {c: parse_scalar(x, f"{p}.{c}") for c, x in _int_keys(vec, p).items()}
    return out


def _dgla(doc: dict, path: str) -> Dgla:
    if "builtin" in doc:
        if doc["builtin"] != "obstructed":
            raise SchemaError(f"{path}.builtin", "unknown built-in dgla")
        return obstructed_dgla()
    degrees = _get(doc, "degrees", path, list)
    n = len(degrees)
    d = parse_matrix(doc["d"], f"{path}.d", (n, n)) if "d" in doc else None
    br = _bracket(_get(doc, "bracket", path, list, []), f"{path}.bracket")
    try:
        return Dgla(degrees, d, br, _get(doc, "names", path, list, None),
                    complete=bool(doc.get("complete", False)), check=False)
    except ValueError as e:
        raise SchemaError(path, str(e)) from None


def builtin_ring(spec: str) -> ArtinAlgebra:
    """'dual', 'trunc:s' (k[t]/t^s) or 'shift:n' (square-zero generator in degree −n)."""
    if spec == "dual":
        return dual_numbers()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "trunc":
            return truncated_polynomial(int(arg))
        if kind == "shift":
            return square_zero_shift(int(arg))
    except ValueError as e:
        raise SchemaError("ring", str(e)) from None
    raise SchemaError("ring", f"unknown ring {spec!r}")


def _ring(doc: dict, path: str) -> ArtinAlgebra:
    if "builtin" in doc:
        return builtin_ring(doc["builtin"])
    names = _get(doc, "names", path, list)
    degrees = _get(doc, "degrees", path, list, [0] * len(names))
    mult = _bracket(_get(doc, "mult", path, list, []), f"{path}.mult")
    n = len(names)
    d = parse_matrix(doc["d"], f"{path}.d", (n, n)) if "d" in doc else None
    try:
        return ArtinAlgebra(names, degrees, mult, d, check=False)
    except (ValueError, ArithmeticError) as e:
        raise SchemaError(path, str(e)) from None


def _resolve_complex(doc, path: str, ws: "Workspace") -> GradedComplex:
    if isinstance(doc, str):
        obj = ws.get(doc, "complex", path)
        return obj
    if isinstance(doc, dict):
        return _complex(doc, path)
    raise SchemaError(path, "expected a complex name or an inline complex")


def _steps(doc: dict, V: GradedComplex, path: str) -> dict:
    """Per degree, a list of basis vectors."""
    out = {}
    for n, vecs in _int_keys(doc, path).items():
        if n not in V.degrees:
            raise SchemaError(f"{path}.{n}", "degree outside the complex")
        if not isinstance(vecs, list):
            raise SchemaError(f"{path}.{n}", "expected a list of basis vectors")
        cols = [parse_vector(v, f"{path}.{n}[{k}]", V.dim(n)) for k, v in enumerate(vecs)]
        out[n] = Matrix.from_columns(cols, V.dim(n))
    return out


def _filtration(doc: dict, path: str, ws: "Workspace") -> Filtration:
    V = _resolve_complex(_get(doc, "complex", path), f"{path}.complex", ws)
    steps = {p: _steps(s, V, f"{path}.steps.{p}")
             for p, s in _int_keys(_get(doc, "steps", path, dict), f"{path}.steps").items()}
    if not steps:
        raise SchemaError(f"{path}.steps", "need at least one step")
    return Filtration(V, steps, doc.get("p_min"), doc.get("p_max"))


def _subcomplex(doc: dict, path: str, ws: "Workspace") -> tuple[GradedComplex, dict]:
    V = _resolve_complex(_get(doc, "complex", path), f"{path}.complex", ws)
    return V, _steps(_get(doc, "basis", path, dict), V, f"{path}.basis")


def _model(doc: dict, path: str, ws: "Workspace") -> HodgeModel:
    if "builtin" in doc:
        make = BUILTIN.get(doc["builtin"])
        if make is None:
            raise SchemaError(f"{path}.builtin", f"unknown model {doc['builtin']!r}")
        return make()
    F = _filtration(_get(doc, "filtration", path, dict), f"{path}.filtration", ws)
    g = _dgla(_get(doc, "dgla", path, dict), f"{path}.dgla")
    V = F.complex
    consts = {}
    for k, item in enumerate(_get(doc, "contraction", path, list, [])):
        p = f"{path}.contraction[{k}]"
        if not (isinstance(item, list) and len(item) == 3 and isinstance(item[2], dict)):
            raise SchemaError(p, "expected [dgla index, vector index, {vector index: coefficient}]")
        a, v, out = item
        if not (0 <= a < g.dim and 0 <= v < V.total_dim):
            raise SchemaError(p, "index out of range")
        consts[(a, v)] = {m: parse_scalar(c, f"{p}.{m}") for m, c in _int_keys(out, p).items()}
    ops = contraction_from_constants(g, V, consts)
    w = doc.get("hodge_weights")
    return HodgeModel(V, F, g, ops, doc.get("name", "model"), tuple(w) if w is not None else None)


# ---------------------------------------------------------------------------
# workspace


KINDS = ("complex", "chain_complex", "simplicial", "filtration", "subcomplex", "dgla", "ring", "model")


@dataclass
class Workspace:
    objects: dict = field(default_factory=dict)  # name → (kind, object)

    def get(self, name: str, kind: str | None = None, path: str = "") -> Any:
        if name not in self.objects:
            raise SchemaError(path or name, f"no object named {name!r}")
        k, obj = self.objects[name]
        if kind is not None and k != kind:
            raise SchemaError(path or name, f"object {name!r} is a {k}, expected a {kind}")
        return obj

    def names(self, kind: str | None = None) -> list[str]:
        return sorted(n for n, (k, _) in self.objects.items() if kind is None or k == kind)


def load_workspace(doc: Any) -> Workspace:
    if isinstance(doc, dict) and doc.get("kind") == "workspace":
        items, base = _get(doc, "objects", "$", list), "$.objects"
    elif isinstance(doc, dict):
        items, base = [doc], "$"
    elif isinstance(doc, list):
        items, base = doc, "$"
    else:
        raise SchemaError("$", "document must be an object, a list or a workspace")
    ws = Workspace()
    for k, item in enumerate(items):
        path = f"{base}[{k}]" if base != "$" or isinstance(doc, list) else "$"
        if not isinstance(item, dict):
            raise SchemaError(path, "object expected")
        kind = _get(item, "kind", path, str)
        name = item.get("name", f"{kind}{k}")
        if name in ws.objects:
            raise SchemaError(f"{path}.name", f"duplicate name {name!r}")
        ws.objects[name] = (kind, decode(kind, item, path, ws))
    return ws


def decode(kind: str, item: dict, path: str, ws: Workspace):
    if kind == "complex":
        return _complex(item, path)
    if kind == "chain_complex":
        return _chain_complex(item, path)
    if kind == "simplicial":
        return _simplicial(item, path)
    if kind == "filtration":
        return _filtration(item, path, ws)
    if kind == "subcomplex":
        return _subcomplex(item, path, ws)
    if kind == "dgla":
        return _dgla(item, path)
    if kind == "ring":
        return _ring(item, path)
    if kind == "model":
        return _model(item, path, ws)
    raise SchemaError(f"{path}.kind", f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")


def load_json(text: str) -> Workspace:
    try:
        doc = json.loads(text) if text.strip() else {"kind": "workspace", "objects": []}
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"invalid JSON: {e.msg} at line {e.lineno}") from None
    return load_workspace(doc)


# ---------------------------------------------------------------------------
# validation


def _check_complex(V: GradedComplex) -> CheckResult:
    for n in range(V.lo, V.hi - 1):
        if not (V.diff(n + 1) @ V.diff(n)).is_zero():
            return CheckResult(False, "d²", (n,), f"d^{n + 1}∘d^{n} ≠ 0")
    return CheckResult.passed()


def _check_chain(C: ChainComplexNN) -> CheckResult:
    for n in range(2, C.top + 1):
        if not (C.boundary(n - 1) @ C.boundary(n)).is_zero():
            return CheckResult(False, "d²", (n,), f"δ_{n - 1}∘δ_{n} ≠ 0")
    return CheckResult.passed()


def _check_subcomplex(obj) -> CheckResult:
    from .complexes import is_d_stable
    V, W = obj
    bad = is_d_stable(V, W)
    if bad is not None:
        return CheckResult(False, "d-stability", (bad[0],), "W is not d-stable")
    return CheckResult.passed()


def validate(kind: str, obj) -> CheckResult:
    try:
        if kind == "complex":
            return _check_complex(obj)
        if kind == "chain_complex":
            return _check_chain(obj)
        if kind == "simplicial":
            return check_simplicial(obj)
        if kind == "filtration":
            res = _check_complex(obj.complex)
            return res if not res else filtration_check(obj)
        if kind == "subcomplex":
            return _check_subcomplex(obj)
        if kind == "dgla":
            return check_dgla(obj)
        if kind == "ring":
            return check_artin(obj)
        if kind == "model":
            res = check_dgla(obj.g)
            if not res:
                return CheckResult(False, "dgla:" + res.reason, res.witness, res.detail)
            return validate_model(obj)
    except ValueError as e:
        return CheckResult(False, "error", (), str(e))
    raise ValueError(f"unknown kind {kind}")


# ---------------------------------------------------------------------------
# encoders


def encode_complex(V: GradedComplex, name: str) -> dict:
    return {"kind": "complex", "name": name, "lo": V.lo, "dims": [V.dim(n) for n in V.degrees],
            "d": {str(n): encode_matrix(V.diff(n)) for n in range(V.lo, V.hi) if not V.diff(n).is_zero()}}


def encode_dgla(g: Dgla, name: str | None = None) -> dict:
    doc = {"kind": "dgla", "degrees": list(g.degrees), "names": list(g.names),
           "d": encode_matrix(g.d),
           "bracket": [[a, b, {str(c): encode_scalar(x) for c, x in sorted(v.items())}]
                       for (a, b), v in sorted(g.bracket_table().items())]}
    if name is not None:
        doc["name"] = name
    return doc


def encode_ring(A: ArtinAlgebra, name: str) -> dict:
    return {"kind": "ring", "name": name, "names": list(A.names), "degrees": list(A.degrees),
            "mult": [[i, j, {str(k): encode_scalar(c) for k, c in sorted(v.items())}]
                     for (i, j), v in sorted(A.mult.items()) if i and j and v],
            "d": encode_matrix(A.d)}


def _encode_steps(bases: dict) -> dict:
    return {str(n): [encode_vector(c) for c in B.columns()] for n, B in sorted(bases.items()) if B.ncols}


def encode_filtration(F: Filtration, complex_ref, name: str) -> dict:
    return {"kind": "filtration", "name": name, "complex": complex_ref, "p_min": F.p_min, "p_max": F.p_max,
            "steps": {str(p): _encode_steps(F.steps[p]) for p in sorted(F.steps)}}


def encode_subcomplex(W: dict, complex_name: str, name: str) -> dict:
    return {"kind": "subcomplex", "name": name, "complex": complex_name, "basis": _encode_steps(W)}


def encode_model(m: HodgeModel, name: str) -> dict:
    V = m.V
    consts = []
    for a, X in enumerate(m.contraction):
        for v in range(V.total_dim):
            col = {str(r): encode_scalar(X[r, v]) for r in range(V.total_dim) if X[r, v]}
            if col:
                consts.append([a, v, col])
    inline = encode_complex(V, name + ".V")
    del inline["kind"], inline["name"]
    filt = encode_filtration(m.F, inline, name + ".F")
    del filt["kind"], filt["name"]
    g = encode_dgla(m.g)
    del g["kind"]
    doc = {"kind": "model", "name": name, "filtration": filt, "dgla": g, "contraction": consts}
    if m.hodge_weights is not None:
        doc["hodge_weights"] = list(m.hodge_weights)
    return doc


def encode_chain_complex(C: ChainComplexNN, name: str) -> dict:
    return {"kind": "chain_complex", "name": name, "dims": list(C.dims),
            "d": {str(n): encode_matrix(C.boundary(n)) for n in range(1, C.top + 1) if not C.boundary(n).is_zero()}}


def encode_simplicial(S: SimplicialVectorSpace, name: str) -> dict:
    return {"kind": "simplicial", "name": name, "dims": list(S.dims),
            "faces": {str(n): [encode_matrix(S.face(n, i)) for i in range(n + 1)] for n in range(1, S.N + 1)},
            "degens": {str(n): [encode_matrix(S.degen(n, j)) for j in range(n + 1)] for n in range(S.N)}}


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, rationals already encoded as strings."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2, default=_default)


def _default(x):
    if isinstance(x, Fraction):
        return encode_scalar(x)
    if isinstance(x, Matrix):
        return encode_matrix(x)
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")
