"""Built-in finite Hodge models."""

from __future__ import annotations

from .complexes import Filtration, GradedComplex
from .dgla import Dgla
from .linalg import Matrix
from .period import HodgeModel, contraction_from_constants


def _filtration_from_weights(V: GradedComplex, weights: tuple, p_max: int) -> Filtration:
    """F^p = span of basis vectors with Hodge degree ≥ p, for 1 ≤ p ≤ p_max."""
    steps = {}
    idx = 0
    degree_slices = {}
    for n in V.degrees:
        degree_slices[n] = range(idx, idx + V.dim(n))
        idx += V.dim(n)
    for p in range(1, p_max + 1):
        steps[p] = {}
        for n, sl in degree_slices.items():
            cols = [tuple(int(k == j) for k in range(len(sl))) for j, t in enumerate(sl) if weights[t] >= p]
            if cols:
                steps[p][n] = Matrix.from_columns(cols, len(sl))
    return Filtration(V, steps, 1, p_max)


def builtin_elliptic_model() -> HodgeModel:
    """Cohomology of an elliptic curve.

    Basis of ⊕V: h00 (degree 0), h10, h01 (degree 1), h11 (degree 2).
    g has one vector field direction in degree 0 and one Kodaira-Spencer
    class ξ in degree 1; only ξ contracts, sending h10 to h01.
    """
    V = GradedComplex(0, [1, 2, 1])
    weights = (0, 1, 0, 1)
    F = _filtration_from_weights(V, weights, 1)
    g = Dgla([0, 1], names=["v", "xi"])
    i = contraction_from_constants(g, V, {(1, 1): {2: 1}})
    return HodgeModel(V, F, g, i, "elliptic", weights)


def weight_two_model() -> HodgeModel:
    """Weight-2 Hodge structure with h^{2,0} = h^{1,1} = h^{0,2} = 1 plus H^0 and H^4.

    Basis: h00 (degree 0), h20, h11, h02 (degree 2), h22 (degree 4).
    ξ contracts h20 → h11 → h02.
    """
    V = GradedComplex(0, [1, 0, 3, 0, 1])
    weights = (0, 2, 1, 0, 2)
    F = _filtration_from_weights(V, weights, 2)
    g = Dgla([1], names=["xi"])
    i = contraction_from_constants(g, V, {(0, 1): {2: 1}, (0, 2): {3: 1}})
    return HodgeModel(V, F, g, i, "weight-two", weights)


def synthetic_cartan_model() -> HodgeModel:
    """V = (k → k) with d = id, g = (a → b) with da = b, abelian.

    i(a) is the contracting homotopy h, i(b) = 0, so l(a) = dh + hd = id.
    The filtration is trivial so every endomorphism preserves it.
    """
    V = GradedComplex(0, [1, 1], {0: Matrix([[1]])})
    g = Dgla([0, 1], d=Matrix([[0, 0], [1, 0]]), names=["a", "b"])
    i = contraction_from_constants(g, V, {(0, 1): {0: 1}})
    return HodgeModel(V, Filtration.trivial(V), g, i, "synthetic")


BUILTIN = {
    "elliptic": builtin_elliptic_model,
    "weight-two": weight_two_model,
    "synthetic": synthetic_cartan_model,
}
