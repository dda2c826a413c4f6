from fractions import Fraction

import pytest

from dgdeform.artin import dual_numbers, square_zero_shift, truncated_polynomial
from dgdeform.complexes import GradedComplex, betti
from dgdeform.corpus import random_dgla
from dgdeform.dgla import (
    Dgla,
    DglaError,
    abelian_dgla,
    bch,
    check_dgla,
    check_dgla_map,
    deligne_tangent,
    end_dgla,
    gauge_act,
    gauge_equivalent,
    is_mc,
    mc_lift,
    mc_residual,
    obstructed_dgla,
    tensor_with_ideal,
)
from dgdeform.linalg import Matrix, unit_vector


def two_term_end():
    """End of k ⊕ k[−1] with zero differential: gl(1|1)-like, degrees −1, 0, 0, 1."""
    return end_dgla(GradedComplex(0, [1, 1]))


def test_trivial_dgla():
    g = Dgla([])
    assert check_dgla(g) and g.complex.total_dim == 0
    A = dual_numbers()
    assert mc_lift(g, A).families[0].dim == 0
    assert deligne_tangent(g, 0).dim == 0


def test_check_dgla_reasons():
    with pytest.raises(DglaError):
        Dgla([0, 1], d=Matrix([[0, 0], [0, 0]]), bracket={(0, 0): {1: 1}})
    g = Dgla([0, 0], bracket={(0, 1): {1: 1}, (1, 0): {1: 1}}, check=False)
    assert check_dgla(g).reason == "antisymmetry"
    g = Dgla([0, 1], d=Matrix([[0, 0], [1, 0]]), bracket={(0, 0): {0: 0}}, check=False)
    assert check_dgla(g)
    g = Dgla([1, 2], d=Matrix([[0, 0], [0, 0]]), bracket={(0, 0): {1: 1}})
    assert check_dgla(g)
    # d e0 = e2 and [e1, e2] = e2: d[e0, e1] = 0 but [d e0, e1] = −e2
    d = Matrix.from_sparse(3, 3, {(2, 0): 1})
    g = Dgla([0, 0, 1], d=d, bracket={(1, 2): {2: 1}}, complete=True, check=False)
    res = check_dgla(g)
    assert res.reason == "leibniz" and res.witness == (0, 1)


def test_end_dgla_axioms_and_commutator_sign():
    E = two_term_end()
    assert check_dgla(E)
    assert E.graded_dims == {-1: 1, 0: 2, 1: 1}
    h = E.indices(-1)[0]
    u = E.indices(1)[0]
    # [h, u] = hu + uh for odd elements: the identity
    hu = E.operator(E.bracket(unit_vector(E.dim, h), unit_vector(E.dim, u)))
    assert hu == Matrix.identity(2)
    V = GradedComplex(0, [1, 1], {0: Matrix([[1]])})
    E2 = end_dgla(V)
    assert check_dgla(E2)
    assert all(betti(E2.complex, n) == 0 for n in E2.complex.degrees)


def test_subalgebra_and_map_check():
    E = two_term_end()
    idx0 = E.indices(0)
    S = E.subalgebra(Matrix.from_columns([unit_vector(E.dim, i) for i in idx0], E.dim))
    assert S.dim == 2 and check_dgla(S)
    assert check_dgla_map(S, E, S.inclusion)
    with pytest.raises(ValueError):
        # [h, u] = id leaves span(h, u)
        E.subalgebra(Matrix.from_columns([unit_vector(E.dim, E.indices(-1)[0]),
                                          unit_vector(E.dim, E.indices(1)[0])], E.dim))


def test_tensor_dgla_is_a_dgla(rng):
    for _ in range(10):
        g = random_dgla(rng, 5)
        for A in (dual_numbers(), truncated_polynomial(3), square_zero_shift(1)):
            assert check_dgla(tensor_with_ideal(g, A))


def test_abelian_mc_is_cocycles():
    g = abelian_dgla({0: 1, 1: 2, 2: 1}, {0: Matrix([[1], [0]]), 1: Matrix([[0, 1]])})
    A = dual_numbers()
    T = tensor_with_ideal(g, A)
    fam = mc_lift(g, A).families[0]
    assert fam.dim == 1
    x = fam.directions.col(0)
    assert is_mc(g, A, x)
    assert not is_mc(g, A, T.element({(2, 1): 1}))


def test_obstructed_example():
    g = obstructed_dgla()
    A = truncated_polynomial(3)
    T = tensor_with_ideal(g, A)
    x = T.element({(0, 1): 1})
    assert not is_mc(g, A, x)
    assert is_mc(g, dual_numbers(), tensor_with_ideal(g, dual_numbers()).element({(0, 1): 1}))
    lift = mc_lift(g, A)
    assert lift.obstructions and lift.obstructions[0].nonzero
    assert lift.obstructions[0].class_coords == (Fraction(1, 2),)
    assert any(mc_residual(g, A, x))


def test_gauge_is_a_right_action():
    E = two_term_end()
    A = truncated_polynomial(3)
    T = tensor_with_ideal(E, A)
    u = E.indices(1)[0]
    x = T.element({(u, 1): 1, (u, 2): 2})
    assert is_mc(E, A, x)
    d0, d1 = E.indices(0)
    a = T.element({(d0, 1): 1, (d1, 2): Fraction(1, 2)})
    b = T.element({(d1, 1): -1, (d0, 1): 3})
    lhs = gauge_act(E, A, b, gauge_act(E, A, a, x))
    rhs = gauge_act(E, A, bch(E, A, a, b), x)
    assert lhs == rhs
    assert is_mc(E, A, lhs)


def test_bch_low_order():
    E = two_term_end()
    A = dual_numbers()
    T = tensor_with_ideal(E, A)
    a = T.element({(E.indices(0)[0], 1): 1})
    b = T.element({(E.indices(0)[1], 1): 2})
    assert bch(E, A, a, b) == tuple(x + y for x, y in zip(a, b))


def test_gauge_equivalence_decisions():
    E = two_term_end()
    A = truncated_polynomial(3)
    T = tensor_with_ideal(E, A)
    u = E.indices(1)[0]
    x0 = T.element({(u, 1): 1})
    a = T.element({(E.indices(0)[0], 1): 1, (E.indices(0)[1], 2): 1})
    x1 = gauge_act(E, A, a, x0)
    dec = gauge_equivalent(E, A, x0, x1)
    assert dec.equivalent and dec.certified
    assert gauge_act(E, A, dec.witness, x0) == x1
    # zero and a nonzero first-order class are never equivalent
    zero = tuple(Fraction(0) for _ in range(T.dim))
    dec = gauge_equivalent(E, A, zero, x0)
    assert not dec.equivalent and dec.certified


def test_deligne_tangent_known_values():
    g = abelian_dgla({0: 1, 1: 1, 2: 1})
    for j in (-1, 0, 1):
        t = deligne_tangent(g, j)
        assert t.dim == 1 and t.agree
    assert deligne_tangent(g, 2).dim == 0
    with pytest.raises(ValueError):
        deligne_tangent(g, -2)
