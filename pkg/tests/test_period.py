from fractions import Fraction

import pytest

from dgdeform.artin import dual_numbers, square_zero_shift, truncated_polynomial
from dgdeform.complexes import Filtration, GradedComplex, betti
from dgdeform.corpus import random_filtered_complex, random_filtered_pair, random_hodge_model
from dgdeform.dgla import Dgla, tensor_with_ideal
from dgdeform.linalg import Matrix, unit_vector
from dgdeform.models import builtin_elliptic_model, synthetic_cartan_model, weight_two_model
from dgdeform.period import (
    HodgeModel,
    PeriodError,
    SubcomplexPair,
    annihilator,
    check_cartan,
    cone_cocycle,
    cone_complex,
    cone_les_check,
    contraction_from_constants,
    end_filt_dgla,
    end_sub_dgla,
    flag_equivalent,
    flag_is_member,
    flag_point,
    flag_tangent_vs_quotient,
    fm_period,
    fm_square_commutes,
    graded_commutator,
    grass_equivalent,
    grass_is_member,
    grass_point,
    grass_tangent_vs_cone,
    hom_differential,
    is_formal_pair,
    lie_derivative,
    nonnegative_end,
    period_tangent,
    psi_map,
    quotient_model,
    transversality,
    validate_model,
)


def plane_with_line():
    """V = k² in degree 0, d = 0, W = the first coordinate line."""
    return GradedComplex(0, [2]), {0: Matrix.from_columns([(1, 0)], 2)}


def acyclic_pair():
    """V = (k → k, d = id), W = V¹: End^W has H⁰ = k while End is acyclic."""
    return GradedComplex(0, [1, 1], {0: Matrix([[1]])}), {1: Matrix([[1]])}


# subcomplexes and sub-dglas

def test_annihilator():
    B = Matrix.from_columns([(1, 1, 0)], 3)
    Ann = annihilator(B)
    assert Ann.nrows == 2 and (Ann @ B).is_zero()
    assert annihilator(Matrix.zeros(2, 0)) == Matrix.identity(2)


def test_subcomplex_pair_rejects_unstable_spans():
    V = GradedComplex(0, [1, 1], {0: Matrix([[1]])})
    with pytest.raises(PeriodError) as exc:
        SubcomplexPair(V, {0: Matrix([[1]])})
    assert exc.value.result.reason == "d-stability"


def test_end_sub_dgla_of_trivial_pair_is_everything():
    V, _ = plane_with_line()
    h = end_sub_dgla(V, {0: Matrix.identity(2)})
    assert h.dim == h.parent.dim == 4
    assert end_sub_dgla(V, {0: Matrix.zeros(2, 0)}).dim == 4


def test_elliptic_filtered_endomorphisms():
    m = builtin_elliptic_model()
    assert len(m.filt.indices(0)) == 5
    assert len(m.end.indices(0)) == 6
    # End^F is exactly the Hodge-degree-nondecreasing part
    assert m.filt.dim == nonnegative_end(m).ncols


def test_end_filt_rejects_invalid_filtration():
    V = GradedComplex(0, [1, 1], {0: Matrix([[1]])})
    with pytest.raises(PeriodError):
        end_filt_dgla(V, Filtration(V, {1: {0: Matrix([[1]])}}))


# cone, LES and the quotient model

def test_cone_of_hand_instance():
    V, W = acyclic_pair()
    C = cone_complex(end_sub_dgla(V, W)).complex
    assert betti(C, 0) == 1 and betti(C, 1) == 0


def test_cone_of_identity_is_acyclic():
    V, _ = plane_with_line()
    h = end_sub_dgla(V, {0: Matrix.identity(2)})
    C = cone_complex(h).complex
    assert all(betti(C, n) == 0 for n in C.degrees)


def test_cone_squares_to_zero_and_les(rng):
    for _ in range(20):
        V, W = random_filtered_pair(rng, 5)
        chi = end_sub_dgla(V, W)
        C = cone_complex(chi).complex
        for n in range(C.lo, C.hi - 1):
            assert (C.diff(n + 1) @ C.diff(n)).is_zero()
        les = cone_les_check(chi)
        assert les.ok, (les.direct, les.predicted)


def test_non_formal_pair_is_detected():
    V, W = acyclic_pair()
    chi = end_sub_dgla(V, W)
    assert not is_formal_pair(chi)
    assert cone_les_check(chi).ok
    # as complexes the cone and (l/h)[−1] stay quasi-isomorphic; only the
    # abelian bracket on the quotient loses its justification
    C = cone_complex(chi).complex
    Qc = quotient_model(chi).complex
    assert [betti(C, n) for n in range(3)] == [betti(Qc, n) for n in range(3)] == [1, 0, 0]


def test_quotient_model_agrees_on_formal_pairs(rng):
    seen = 0
    for _ in range(20):
        F = random_filtered_complex(rng, 5)
        chi = end_filt_dgla(F.complex, F)
        if not is_formal_pair(chi):
            continue
        seen += 1
        C = cone_complex(chi).complex
        Qc = quotient_model(chi).complex
        for n in set(C.degrees) | set(Qc.degrees):
            assert betti(C, n) == betti(Qc, n)
    assert seen


def test_cone_to_quotient_sign():
    V, W = plane_with_line()
    Qm = quotient_model(end_sub_dgla(V, W))
    g = tuple(Fraction(x) for x in (0, 0, 1, 0))  # the lower-left unit e0 ↦ e1
    assert Qm.from_cone(1, g) == Qm.classify(0, g) != (0,)
    # V = k ⊕ k[−1], W = V⁰: Hom(V⁰, V¹) survives in l¹/h¹
    V = GradedComplex(0, [1, 1])
    Qm = quotient_model(end_sub_dgla(V, {0: Matrix([[1]])}))
    g = (Fraction(1),)
    assert Qm.from_cone(2, g) == tuple(-x for x in Qm.classify(1, g)) != (0,)


# Cartan homotopies

def test_graded_commutator_and_hom_differential():
    X = Matrix([[0, 1], [0, 0]])
    Y = Matrix([[0, 0], [1, 0]])
    assert graded_commutator(X, 1, Y, -1) == Matrix.identity(2)
    assert graded_commutator(X, 0, X, 0).is_zero()
    V = GradedComplex(0, [1, 1], {0: Matrix([[1]])})
    h = Matrix([[0, 1], [0, 0]])
    assert hom_differential(V, h, -1) == Matrix.identity(2)


def test_trivial_contraction_is_cartan():
    V = GradedComplex(0, [1, 1])
    g = Dgla([0, 1])
    assert check_cartan(g, V, None)
    assert lie_derivative(g, V, None).matrix.is_zero()


def test_synthetic_lie_derivative_is_identity():
    m = synthetic_cartan_model()
    assert validate_model(m)
    lie = lie_derivative(m.g, m.V, m.contraction)
    assert lie.operators[0] == Matrix.identity(2)
    assert lie.operators[1].is_zero()


def test_cartan_failures_have_witnesses():
    m = builtin_elliptic_model()
    ops = list(m.contraction)
    ops[0] = Matrix.identity(4)  # i(v) must have degree −1
    res = check_cartan(m.g, m.V, ops)
    assert not res and res.reason == "degree" and res.witness == (0,)
    with pytest.raises(PeriodError):
        lie_derivative(m.g, m.V, ops)
    with pytest.raises(PeriodError):
        check_cartan(m.g, m.V, ops[:1])


def test_transversality_failure():
    m = weight_two_model()
    bad = contraction_from_constants(m.g, m.V, {(0, 1): {3: 1}})
    res = transversality(HodgeModel(m.V, m.F, m.g, bad, "bad", m.hodge_weights))
    assert not res and res.witness == (0, 2)


def test_builtin_models_validate():
    for make in (builtin_elliptic_model, weight_two_model, synthetic_cartan_model):
        assert validate_model(make())


def test_model_validation_reports_non_formal():
    V, W = acyclic_pair()
    F = Filtration(V, {1: W})
    g = Dgla([])
    res = validate_model(HodgeModel(V, F, g, []))
    assert not res and res.reason == "formal"


# Grass and Flag functors

def test_grass_trivial_point_is_member_and_equivalent_to_itself():
    V, W = plane_with_line()
    A = dual_numbers()
    pt = grass_point(V, W, A, {})
    assert pt.f == Matrix.identity(4)
    assert grass_is_member(V, W, A, pt)
    assert grass_equivalent(V, W, A, pt, pt).equivalent


def test_grass_non_member():
    V = GradedComplex(0, [2, 1], {0: Matrix([[1, 0]])})
    W = {0: Matrix.from_columns([(0, 1)], 2)}
    phi = Matrix.from_sparse(3, 3, {(0, 1): 1})  # e1 ↦ e0, so d(e1 + εe0) = εf
    assert not grass_is_member(V, W, dual_numbers(), {1: phi})


def test_grass_rejects_graded_rings():
    V, W = plane_with_line()
    with pytest.raises(PeriodError):
        grass_point(V, W, square_zero_shift(1), {})


def test_grass_equivalence_witness_is_valid():
    V, W = plane_with_line()
    A = truncated_polynomial(3)
    stab = Matrix.from_sparse(2, 2, {(0, 0): 1, (0, 1): 3})  # preserves the line
    p1 = grass_point(V, W, A, {})
    p2 = grass_point(V, W, A, {1: stab, 2: stab})
    wit = grass_equivalent(V, W, A, p1, p2)
    assert wit.equivalent
    moved = grass_point(V, W, A, {1: Matrix.from_sparse(2, 2, {(1, 0): 1})})
    assert not grass_equivalent(V, W, A, p1, moved).equivalent


def test_grass_tangent_matches_cone(rng):
    V, W = acyclic_pair()
    t = grass_tangent_vs_cone(V, W)
    assert t.equal and t.grass_dim == 0
    V, W = plane_with_line()
    t = grass_tangent_vs_cone(V, W)
    assert t.equal and t.grass_dim == 1  # the projective line
    for _ in range(15):
        V, W = random_filtered_pair(rng, 5)
        assert grass_tangent_vs_cone(V, W).equal


def test_flag_tangent_of_models():
    for make in (builtin_elliptic_model, weight_two_model):
        m = make()
        t = flag_tangent_vs_quotient(m.V, m.F)
        assert t.equal and t.formal


def test_flag_members_and_equivalence():
    m = weight_two_model()
    A = dual_numbers()
    triv = flag_point(m.V, m.F, A, {})
    assert flag_is_member(triv)
    assert flag_equivalent(triv, triv).equivalent
    with pytest.raises(PeriodError):
        flag_point(m.V, m.F, A, {7: {}})


# psi map, period map and the square

def test_psi_map_of_zero_is_trivial():
    V, W = plane_with_line()
    C = cone_complex(end_sub_dgla(V, W)).complex
    pt = psi_map(V, W, dual_numbers(), {1: (0,) * C.dim(1)})
    assert pt.f == Matrix.identity(4)


def test_psi_map_of_sub_dgla_direction_is_trivial():
    V, W = plane_with_line()
    h = end_sub_dgla(V, W)
    E = h.parent
    # an upper-triangular g preserves the line
    g = E.hom.from_total_matrix(0, Matrix([[2, 1], [0, 5]]))
    coc = cone_cocycle(h, g)
    A = dual_numbers()
    pt = psi_map(V, W, A, {1: coc})
    assert grass_equivalent(V, W, A, pt, grass_point(V, W, A, {})).equivalent


def test_psi_map_of_nonzero_class_moves_the_point():
    V, W = plane_with_line()
    h = end_sub_dgla(V, W)
    g = h.parent.hom.from_total_matrix(0, Matrix([[0, 0], [1, 0]]))
    A = dual_numbers()
    pt = psi_map(V, W, A, {1: cone_cocycle(h, g)})
    assert grass_is_member(V, W, A, pt)
    assert not grass_equivalent(V, W, A, pt, grass_point(V, W, A, {})).equivalent


def test_psi_map_guards():
    V, W = plane_with_line()
    C = cone_complex(end_sub_dgla(V, W)).complex
    with pytest.raises(PeriodError):
        psi_map(V, W, truncated_polynomial(3), {1: (0,) * C.dim(1)})
    with pytest.raises(PeriodError):
        psi_map(V, W, dual_numbers(), {1: (0,)})


def test_fm_period_zero_and_generator():
    m = builtin_elliptic_model()
    A = dual_numbers()
    T = tensor_with_ideal(m.g, A)
    zero = fm_period(m, A, (0,) * T.dim)
    assert not any(zero.vector)
    xi = T.element({(1, 1): 1})
    pc = fm_period(m, A, xi)
    assert any(pc.vector)
    with pytest.raises(PeriodError):
        fm_period(m, A, T.element({(0, 1): 1}))


def test_period_tangent_of_models():
    pt = period_tangent(builtin_elliptic_model())
    assert pt.is_isomorphism and pt.matrix == Matrix([[1]])
    pt = period_tangent(weight_two_model())
    assert pt.rank == 1 and pt.transversality


def test_period_square_commutes():
    for make in (builtin_elliptic_model, weight_two_model):
        rep = fm_square_commutes(make(), dual_numbers())
        assert rep.ok and rep.checked > 0
    with pytest.raises(PeriodError):
        fm_square_commutes(builtin_elliptic_model(), truncated_polynomial(3))


def test_random_hodge_models_square(rng):
    done = 0
    for _ in range(10):
        m = random_hodge_model(rng)
        if not validate_model(m) or not transversality(m):
            continue
        assert fm_square_commutes(m, dual_numbers()).ok
        done += 1
    assert done


def test_zero_contraction_gives_zero_period_map():
    m = builtin_elliptic_model()
    zero = HodgeModel(m.V, m.F, m.g, [Matrix.zeros(4, 4)] * 2, "zero", m.hodge_weights)
    pt = period_tangent(zero)
    assert pt.rank == 0 and pt.matrix.is_zero()
    assert fm_square_commutes(zero, dual_numbers()).ok


def test_weight_two_transversality_at_the_top_step():
    m = weight_two_model()
    xi = m.contraction[0]
    F2 = m.F.step(2)
    F1 = m.F.step(1)
    from dgdeform.period import total_basis
    from dgdeform.linalg import span_contains
    assert span_contains(total_basis(m.V, F1), xi @ total_basis(m.V, F2))
    assert not span_contains(total_basis(m.V, F2), xi @ total_basis(m.V, F2))


def _period_models(rng):
    models = [builtin_elliptic_model(), weight_two_model(), synthetic_cartan_model()]
    while len(models) < 8:
        m = random_hodge_model(rng)
        if validate_model(m) and transversality(m):
            models.append(m)
    return models


def test_lie_derivative_lands_in_filtered_endomorphisms(rng):
    from dgdeform.linalg import span_contains
    for m in _period_models(rng):
        lie = lie_derivative(m.g, m.V, m.contraction)
        assert span_contains(m.filt.inclusion, lie.matrix)


def test_fm_period_is_gauge_invariant(rng):
    from dgdeform.dgla import gauge_act, mc_lift
    from dgdeform.linalg import in_span
    A = dual_numbers()
    for m in _period_models(rng):
        T = tensor_with_ideal(m.g, A)
        fam = mc_lift(m.g, A).families[0]
        for xi in [fam.base] + fam.directions.columns():
            base = fm_period(m, A, xi)
            TQ = base.tensor
            boundaries = Matrix.from_columns([TQ.diff(unit_vector(TQ.dim, k)) for k in range(TQ.dim)
                                              if TQ.degrees[k] == 0], TQ.dim)
            for k in range(T.dim):
                if T.degrees[k] != 0:
                    continue
                moved = fm_period(m, A, gauge_act(m.g, A, unit_vector(T.dim, k), xi))
                diff = tuple(x - y for x, y in zip(moved.vector, base.vector))
                assert not any(diff) or in_span(boundaries, diff)
