import math
from fractions import Fraction

import pytest

from dgdeform.linalg import Matrix
from dgdeform.simplicial import (
    AffineComplex,
    AffineMap,
    ChainComplexNN,
    TensorPair,
    affine_denormalize,
    affine_denormalize_map,
    affine_normalize,
    affine_normalize_map,
    affine_tensor,
    check_simplicial,
    constant_simplicial,
    denormalize,
    denormalized_dim,
    level1_faces,
    normalize,
    pentagon_holds,
    random_chain_complex,
    random_simplicial,
    shuffles,
    surjections,
    triangle_holds,
)


def interval():
    return ChainComplexNN([1, 1], {1: Matrix([[1]])})


def test_trivial_complex_roundtrip():
    V = ChainComplexNN([0, 0])
    K = denormalize(V, 1)
    assert check_simplicial(K)
    assert normalize(K) == V


def test_constant_simplicial_normalizes_to_degree_zero():
    S = constant_simplicial(2, 3)
    assert check_simplicial(S)
    assert normalize(S).dims == (2, 0, 0, 0)


def test_denormalized_dimensions(rng):
    for _ in range(20):
        V = random_chain_complex(rng, 2, 4)
        for n in range(V.top + 1):
            assert denormalized_dim(V, n) == sum(math.comb(n, k) * V.dim(k) for k in range(n + 1))
    assert len(surjections(3)) == 2 ** 3


def test_denormalize_is_simplicial_and_inverts(rng):
    for _ in range(15):
        V = random_chain_complex(rng, 2, 4)
        K = denormalize(V, V.top)
        assert check_simplicial(K)
        assert normalize(K) == V


def test_check_simplicial_detects_broken_face():
    K = denormalize(interval(), 2)
    faces = {n: [K.face(n, i) for i in range(n + 1)] for n in range(1, 3)}
    degens = {n: [K.degen(n, j) for j in range(n + 1)] for n in range(2)}
    faces[1][0] = faces[1][0].scale(2)
    bad = type(K)(K.dims, faces, degens, check=False)
    assert not check_simplicial(bad)


def test_shuffle_count():
    assert len(shuffles(2, 1)) == 3
    assert len(shuffles(2, 2)) == 6


def test_ez_aw_on_interval():
    A = denormalize(interval(), 3)
    T = TensorPair(A, A)
    for p in range(2):
        for q in range(2):
            comp = T.aw_block(p, q) @ T.ez(p, q)
            assert comp == Matrix.identity(comp.nrows)
    for n in range(3):
        assert T.ez_aw_on_homology(n)


def test_ez_aw_random_bases(rng):
    A = random_simplicial(rng, N=3)
    B = random_simplicial(rng, N=3)
    T = TensorPair(A, B)
    for n in range(4):
        for p in range(n + 1):
            comp = T.aw_block(p, n - p) @ T.ez(p, n - p)
            assert comp == Matrix.identity(comp.nrows)


def test_level_one_faces_of_affine_space():
    X = AffineComplex.make(interval())
    d0, d1 = level1_faces(X)
    # on (a, v): ∂0 = a and ∂1 = a − dv
    assert d0 @ (Fraction(3), Fraction(5)) == (3,)
    assert d1 @ (Fraction(3), Fraction(5)) == (-2,)


def test_affine_roundtrip_of_maps():
    X = AffineComplex.make(interval())
    phi = AffineMap(X, X, (Matrix([[2]]), Matrix([[2]])), (Fraction(1),))
    F = affine_denormalize_map(phi, 3)
    assert F.check()
    back = affine_normalize_map(F, X, X)
    assert back.f[:2] == phi.f and back.b == phi.b
    S = affine_denormalize(X, 3)
    assert affine_normalize(S).V == X.V
    ident = AffineMap.identity(X)
    assert ident.compose(phi).f == phi.f
    assert phi.apply(0, (Fraction(1),)) == (3,)


def test_affine_map_rejects_non_chain_maps():
    X = AffineComplex.make(interval())
    with pytest.raises(ValueError):
        AffineMap(X, X, (Matrix([[1]]), Matrix([[2]])), (Fraction(0),))


def test_affine_tensor_dimensions():
    X = AffineComplex.make(interval(), "x")
    Y = AffineComplex.make(ChainComplexNN([2, 0]), "y")
    T = affine_tensor(X, Y)
    # level 0: 1 + 2 + 1·2, level 1: 1 + 0 + (1·0 + 1·2)
    assert T.V.dims == (5, 3)


def test_coherence_pentagon_and_triangle():
    W = AffineComplex.make(interval(), "w")
    X = AffineComplex.make(ChainComplexNN([1, 0]), "x")
    Y = AffineComplex.make(ChainComplexNN([0, 1]), "y")
    Z = AffineComplex.make(interval(), "z")
    assert pentagon_holds(W, X, Y, Z)
    assert triangle_holds(X, W)
