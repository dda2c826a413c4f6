import json
from fractions import Fraction

import pytest

from dgdeform.artin import truncated_polynomial
from dgdeform.complexes import Filtration, GradedComplex
from dgdeform.dgla import obstructed_dgla
from dgdeform.linalg import Matrix
from dgdeform.models import BUILTIN
from dgdeform.serialize import (
    SchemaError,
    builtin_ring,
    dumps,
    encode_chain_complex,
    encode_complex,
    encode_dgla,
    encode_filtration,
    encode_model,
    encode_ring,
    encode_scalar,
    encode_simplicial,
    encode_subcomplex,
    load_json,
    parse_matrix,
    parse_scalar,
    validate,
)
from dgdeform.simplicial import ChainComplexNN, denormalize


def workspace(*objs):
    return load_json(json.dumps({"kind": "workspace", "objects": list(objs)}))


def test_scalars():
    assert parse_scalar("-3/6", "$") == Fraction(-1, 2)
    assert parse_scalar(4, "$") == 4
    assert encode_scalar(Fraction(1, 3)) == "1/3" and encode_scalar(Fraction(4)) == 4
    for bad in (0.5, True, "x", "1/0", None):
        with pytest.raises(SchemaError):
            parse_scalar(bad, "$.v")


def test_matrix_shape_errors_carry_paths():
    assert parse_matrix([[1, "1/2"]], "$", (1, 2)) == Matrix([[1, Fraction(1, 2)]])
    with pytest.raises(SchemaError) as exc:
        parse_matrix([[1, 2]], "$.objects[0].d.0", (2, 1))
    assert exc.value.path.startswith("$.objects[0].d.0")


def test_roundtrip_every_kind():
    V = GradedComplex(0, [1, 2], {0: Matrix([[1], [0]])})
    W = {0: Matrix([[1]]), 1: Matrix.from_columns([(1, 0)], 2)}
    F = Filtration(V, {1: W})
    C = ChainComplexNN([1, 1], {1: Matrix([[1]])})
    objs = [
        encode_complex(V, "V"),
        encode_subcomplex(W, "V", "W"),
        encode_filtration(F, "V", "F"),
        encode_dgla(obstructed_dgla(), "g"),
        encode_ring(truncated_polynomial(3), "t3"),
        encode_chain_complex(C, "C"),
        encode_simplicial(denormalize(C, 2), "K"),
        encode_model(BUILTIN["elliptic"](), "ell"),
    ]
    ws = workspace(*objs)
    assert ws.names() == sorted(o["name"] for o in objs)
    for name in ws.names():
        kind, obj = ws.objects[name]
        assert validate(kind, obj), name
    assert ws.get("V", "complex") == V
    assert ws.get("C", "chain_complex").d == C.d
    g = ws.get("g", "dgla")
    assert g.degrees == (1, 2) and g.bracket_table() == obstructed_dgla().bracket_table()
    A = ws.get("t3", "ring")
    assert A.mult == truncated_polynomial(3).mult
    m = ws.get("ell", "model")
    assert m.contraction == BUILTIN["elliptic"]().contraction
    # encoding is stable
    again = workspace(*[json.loads(dumps(o)) for o in objs])
    assert dumps(encode_model(again.get("ell"), "ell")) == dumps(objs[-1])


def test_validation_reports_bad_objects():
    bad_complex = {"kind": "complex", "name": "V", "lo": 0, "dims": [1, 1, 1], "d": {"0": [[1]], "1": [[1]]}}
    ws = workspace(bad_complex)
    res = validate("complex", ws.get("V"))
    assert not res
    jac = {"kind": "dgla", "name": "g", "degrees": [0, 0, 0], "complete": True,
           "bracket": [[0, 1, {"1": 1}], [0, 2, {"2": 1}], [1, 2, {"0": 1}]]}
    res = validate("dgla", workspace(jac).get("g"))
    assert not res and res.reason == "jacobi" and res.witness == (0, 1, 2)


def test_schema_errors():
    with pytest.raises(SchemaError):
        load_json("{not json")
    with pytest.raises(SchemaError) as exc:
        workspace({"kind": "complex", "name": "V", "dims": [1, -1]})
    assert "dims" in exc.value.path
    with pytest.raises(SchemaError):
        workspace({"kind": "nonsense", "name": "x"})
    with pytest.raises(SchemaError):
        workspace({"kind": "filtration", "name": "F", "complex": "missing", "steps": {"1": {}}})
    with pytest.raises(SchemaError):
        builtin_ring("trunc:1")
    with pytest.raises(SchemaError):
        builtin_ring("poly")


def test_empty_document_is_empty_workspace():
    assert load_json("").names() == []
    assert load_json('{"kind": "workspace", "objects": []}').names() == []
