from fractions import Fraction

import pytest

from dgdeform.linalg import (
    Matrix,
    Q,
    block_diag,
    column_basis,
    complement_basis,
    coordinates,
    in_span,
    intersect_spans,
    inverse,
    kernel_basis,
    kron,
    qstr,
    rank,
    rref,
    solve,
    solve_vector,
    span_contains,
)


def test_scalars_are_exact():
    assert Q("1/3") + Q("2/3") == 1
    with pytest.raises(TypeError):
        Q(0.5)  # floats would silently lose exactness
    assert qstr(Fraction(-3, 4)) == "-3/4"
    assert qstr(Fraction(2)) == "2"


def test_matrix_arithmetic_and_shapes():
    a = Matrix([[1, 2], [3, 4]])
    b = Matrix([[0, 1], [1, 0]])
    assert (a @ b).to_lists() == [[2, 1], [4, 3]]
    assert a.T.to_lists() == [[1, 3], [2, 4]]
    assert (a + b - b) == a
    assert a.scale(Fraction(1, 2))[1, 1] == 2
    assert Matrix.zeros(0, 3).shape == (0, 3)
    assert (Matrix.zeros(2, 0) @ Matrix.zeros(0, 3)).is_zero()


def test_rank_kernel_and_rref():
    m = Matrix([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    assert rank(m) == 2
    K = kernel_basis(m)
    assert K.ncols == 1 and (m @ K).is_zero()
    R, piv = rref(m)
    assert piv == [0, 1]
    assert column_basis(m).ncols == 2


def test_solve_and_inverse():
    a = Matrix([[2, 1], [1, 1]])
    inv = inverse(a)
    assert a @ inv == Matrix.identity(2)
    assert solve_vector(a, (3, 2)) == (1, 1)
    assert solve(Matrix([[1], [1]]), Matrix([[1], [2]])) is None
    with pytest.raises(ZeroDivisionError):
        inverse(Matrix([[1, 1], [1, 1]]))


def test_spans():
    B = Matrix.from_columns([(1, 0, 0), (0, 1, 0)], 3)
    assert in_span(B, (2, -1, 0))
    assert not in_span(B, (0, 0, 1))
    C = complement_basis(B, 3)
    assert C.ncols == 1 and rank(block_diag(Matrix.identity(0), Matrix.identity(0))) == 0
    assert span_contains(B, Matrix.from_columns([(1, 1, 0)], 3))
    I = intersect_spans(B, Matrix.from_columns([(1, 0, 1), (0, 1, 0)], 3))
    assert I.ncols == 1 and in_span(I, (0, 1, 0))
    assert coordinates(B, (3, 4, 0)) == (3, 4)


def test_kron_matches_definition():
    a = Matrix([[1, 2], [0, 1]])
    b = Matrix([[0, 1], [1, 0]])
    k = kron(a, b)
    assert k.shape == (4, 4)
    for i in range(2):
        for j in range(2):
            for r in range(2):
                for s in range(2):
                    assert k[2 * i + r, 2 * j + s] == a[i, j] * b[r, s]
