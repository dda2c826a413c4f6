import pytest

from dgdeform.artin import (
    ArtinAlgebra,
    ArtinError,
    check_artin,
    cone_coefficient,
    cone_surjection,
    dual_numbers,
    is_algebra_map,
    small_extensions,
    square_zero_shift,
    truncated_polynomial,
)
from dgdeform.linalg import Matrix


def test_dual_numbers():
    A = dual_numbers()
    assert A.dim == 2 and A.maximal_ideal == (1,)
    assert A.mul((0, 1), (0, 1)) == (0, 0)
    assert A.is_square_zero() and A.nilpotency_index == 2


def test_truncated_polynomial_strata():
    A = truncated_polynomial(4)
    assert A.nilpotency_index == 4
    assert A.is_adapted()
    assert A.strata() == [[1], [2], [3]]
    t = A.basis_vector(1)
    assert A.mul(t, A.mul(t, t)) == A.basis_vector(3)
    assert not any(A.mul(A.basis_vector(3), t))
    with pytest.raises(ValueError):
        truncated_polynomial(1)


def test_shift_degree_and_cone_coefficient():
    A = square_zero_shift(2)
    assert A.degrees == (0, -2)
    C = cone_coefficient(2)
    assert check_artin(C)
    assert C.diff(C.basis_vector(1)) == C.basis_vector(2)
    assert is_algebra_map(C, A, cone_surjection(2))


def test_adapted_rebasing():
    # k[t]/t³ written in the basis 1, t + t², t²
    A = ArtinAlgebra(["1", "a", "b"], [0, 0, 0], {(1, 1): {2: 1}})
    B = A.rebase(Matrix([[1, 0, 0], [0, 1, 0], [0, 1, 1]]))
    assert check_artin(B)
    C = B.adapted()
    assert C.is_adapted() and C.nilpotency_index == 3


def test_truncation_and_small_extensions():
    A = truncated_polynomial(4)
    assert A.truncate(1).dim == 2
    steps = small_extensions(A)
    assert len(steps) == 3
    for k, s in enumerate(steps, start=1):
        assert s.source.dim == k + 1 and s.quotient.dim == k
        # the kernel is killed by m
        for i in s.kernel:
            for j in s.source.maximal_ideal:
                assert not any(s.source.mul(s.source.basis_vector(i), s.source.basis_vector(j)))


def test_check_artin_reasons():
    with pytest.raises(ArtinError) as exc:
        ArtinAlgebra(["1", "x"], [0, 1], {})
    assert exc.value.result.reason == "degree"
    with pytest.raises(ArtinError) as exc:
        ArtinAlgebra(["1", "x"], [0, 0], {(1, 1): {0: 1}})
    assert exc.value.result.reason == "ideal"
    with pytest.raises(ArtinError) as exc:
        ArtinAlgebra(["1", "x", "y"], [0, 0, 0], {(1, 2): {2: 1}, (2, 1): {2: 1}})
    assert exc.value.result.reason in {"nilpotency", "associativity"}
    odd = ArtinAlgebra(["1", "x"], [0, -1], {(1, 1): {}}, check=False)
    assert check_artin(odd)
    odd.mult[(1, 1)] = {0: 1}
    assert check_artin(odd).reason in {"grading", "ideal"}


def test_algebra_map_rejects_non_multiplicative():
    A = truncated_polynomial(3)
    B = truncated_polynomial(3)
    ok = Matrix([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert is_algebra_map(A, B, ok)
    # t ↦ t but t² ↦ 0 is not multiplicative
    res = is_algebra_map(A, B, Matrix([[1, 0, 0], [0, 1, 0], [0, 0, 0]]))
    assert not res
