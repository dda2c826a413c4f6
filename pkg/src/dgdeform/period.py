"""Grass and Flag functors, mapping cones, Cartan homotopies and the period map.

Deformations of a subcomplex W ⊆ V over a classical Artinian ring A are
handled with explicit matrices on V ⊗ A: index ``v * dim A + a``, and an
A-linear map ``Id + Σ_a φ_a ⊗ L_a`` where L_a is left multiplication by the
basis element a of the maximal ideal.

The filtration-level period map lives in the abelian quotient model
(l/h)[−1] of the cone of h ↪ l, which is only used for formal pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .artin import ArtinAlgebra
from .complexes import (
    CheckResult,
    ComplexMap,
    Filtration,
    GradedComplex,
    SubquotientSpace,
    betti,
    boundaries,
    cohomology,
    filtration_check,
    is_d_stable,
    offsets,
    shift,
    total_differential,
)
from .dgla import Dgla, EndDgla, SubDgla, end_dgla, from_complex, is_mc, tensor_with_ideal
from .linalg import (
    Matrix,
    column_basis,
    hstack,
    inverse,
    kernel_basis,
    kron,
    rank,
    solve,
    solve_vector,
    span_contains,
    unit_vector,
    vstack,
)


class PeriodError(ValueError):
    def __init__(self, message: str, result: CheckResult | None = None):
        super().__init__(message)
        self.result = result


# ---------------------------------------------------------------------------
# subcomplexes and total-space helpers


def total_basis(V: GradedComplex, basis: Mapping[int, Matrix]) -> Matrix:
    """Columns of a graded basis placed in the flattened space ⊕_n V^n."""
    off = offsets(V)
    N = V.total_dim
    cols = []
    for n in V.degrees:
        B = basis.get(n)
        if B is None:
            continue
        for c in B.columns():
            v = [Fraction(0)] * N
            v[off[n]:off[n] + len(c)] = c
            cols.append(tuple(v))
    return Matrix.from_columns(cols, N)


def annihilator(B: Matrix) -> Matrix:
    """Rows spanning the functionals that vanish on span(B)."""
    if B.ncols == 0:
        return Matrix.identity(B.nrows)
    K = kernel_basis(B.T)
    return K.T if K.ncols else Matrix.zeros(0, B.nrows)


@dataclass(frozen=True)
class SubcomplexPair:
    V: GradedComplex
    W: dict

    def __post_init__(self):
        for n, B in self.W.items():
            if B.nrows != self.V.dim(n):
                raise PeriodError(f"W basis in degree {n} has {B.nrows} rows, expected {self.V.dim(n)}")
            if B.ncols and rank(B) != B.ncols:
                raise PeriodError(f"W basis in degree {n} is rank-deficient")
        bad = is_d_stable(self.V, self.W)
        if bad is not None:
            raise PeriodError(f"W is not d-stable: d maps a degree-{bad[0]} vector outside W",
                              CheckResult(False, "d-stability", bad))

    @property
    def total(self) -> Matrix:
        return total_basis(self.V, self.W)


def _pair(V: GradedComplex, W) -> SubcomplexPair:
    return W if isinstance(W, SubcomplexPair) else SubcomplexPair(V, dict(W))


def _degree_array(V: GradedComplex) -> list[int]:
    return [n for n in V.degrees for _ in range(V.dim(n))]


def _preserving_constraints(E: EndDgla, n: int, bases: Sequence[Matrix]) -> Matrix:
    """Linear map Hom^n coords → stacked Ann(B)·f·B for each total basis B."""
    H = E.hom
    rows = []
    for B in bases:
        Ann = annihilator(B)
        if Ann.nrows == 0 or B.ncols == 0:
            continue
        cols = []
        for k in range(H.dim(n)):
            op = H.total_matrix(n, unit_vector(H.dim(n), k))
            cols.append(sum((r for r in (Ann @ op @ B).rows), ()))
        rows.append(Matrix.from_columns(cols, Ann.nrows * B.ncols))
    if not rows:
        return Matrix.zeros(0, H.dim(n))
    return vstack(*rows, ncols=H.dim(n))


def _preserving_subdgla(V: GradedComplex, bases: Sequence[Matrix]) -> SubDgla:
    E = end_dgla(V)
    cols = []
    for n in E.complex.degrees:
        C = _preserving_constraints(E, n, bases)
        K = kernel_basis(C)
        lo = E.hom_offsets[n]
        for v in K.columns():
            full = [Fraction(0)] * E.dim
            full[lo:lo + len(v)] = v
            cols.append(tuple(full))
    return E.subalgebra(Matrix.from_columns(cols, E.dim))


def end_sub_dgla(V: GradedComplex, W) -> SubDgla:
    """End^W(V) = {f : f(W) ⊆ W}, a sub-dgla of End*(V) when W is d-stable."""
    P = _pair(V, W)
    return _preserving_subdgla(V, [P.total])


def end_filt_dgla(V: GradedComplex, F: Filtration) -> SubDgla:
    """Endomorphisms preserving every step of the filtration."""
    res = filtration_check(F)
    if not res:
        raise PeriodError(f"invalid filtration: {res.reason} at {res.witness}", res)
    return _preserving_subdgla(V, [total_basis(V, F.step(p)) for p in range(F.p_min, F.p_max + 1)])


# ---------------------------------------------------------------------------
# mapping cone and the quotient model


@dataclass(frozen=True)
class Inclusion:
    """An injective dgla morphism h → l; columns of M are images of h's basis."""

    h: Dgla
    l: Dgla
    M: Matrix

    def block(self, k: int) -> Matrix:
        return self.M.submatrix(self.l.indices(k), self.h.indices(k))

    def on_cohomology(self, n: int) -> Matrix:
        hc, lc = self.h.complex, self.l.complex
        blocks = {k: self.block(k) for k in hc.degrees}
        return ComplexMap(hc, lc, 0, blocks, is_chain_map=True).induced(n)


def as_inclusion(chi) -> Inclusion:
    if isinstance(chi, Inclusion):
        inc = chi
    elif isinstance(chi, SubDgla):
        inc = Inclusion(chi, chi.parent, chi.inclusion)
    else:
        inc = Inclusion(*chi)
    h, l, M = inc.h, inc.l, inc.M
    if M.shape != (l.dim, h.dim):
        raise PeriodError(f"inclusion matrix has shape {M.shape}, expected {(l.dim, h.dim)}")
    for j in range(h.dim):
        for i in range(l.dim):
            if M[i, j] and l.degrees[i] != h.degrees[j]:
                raise PeriodError(f"inclusion does not preserve degree at basis element {j}")
    if M @ h.d != l.d @ M:
        j = next(j for j in range(h.dim) if (M @ h.d).col(j) != (l.d @ M).col(j))
        raise PeriodError(f"inclusion is not a chain map at basis element {j}",
                          CheckResult(False, "chain map", (j,)))
    if h.dim and rank(M) != h.dim:
        raise PeriodError("inclusion is not injective")
    return inc


def _place(rows: list[list], M: Matrix, r0: int, c0: int, sign: int = 1):
    for r in range(M.nrows):
        for c in range(M.ncols):
            if M.rows[r][c]:
                rows[r0 + r][c0 + c] += sign * M.rows[r][c]


@dataclass(frozen=True)
class ConeComplex:
    """C^i = h^i ⊕ l^{i−1} with δ(f, g) = (df, χ(f) − dg)."""

    chi: Inclusion
    complex: GradedComplex

    def split(self, i: int, vec) -> tuple[tuple, tuple]:
        """Local coordinates (f in h^i, g in l^{i−1})."""
        k = len(self.chi.h.indices(i))
        return tuple(vec[:k]), tuple(vec[k:])

    def join(self, i: int, f, g) -> tuple:
        return tuple(f) + tuple(g)


def cone_complex(chi) -> ConeComplex:
    chi = as_inclusion(chi)
    h, l = chi.h, chi.l
    degs = set(h.degrees) | {x + 1 for x in l.degrees}
    if not degs:
        return ConeComplex(chi, GradedComplex.zero())
    lo, hi = min(degs), max(degs)
    dh = {i: len(h.indices(i)) for i in range(lo - 1, hi + 2)}
    dl = {i: len(l.indices(i)) for i in range(lo - 2, hi + 2)}
    dims = [dh[i] + dl[i - 1] for i in range(lo, hi + 1)]
    d = {}
    for i in range(lo, hi):
        nr, nc = dh[i + 1] + dl[i], dh[i] + dl[i - 1]
        rows = [[Fraction(0)] * nc for _ in range(nr)]
        _place(rows, h.d.submatrix(h.indices(i + 1), h.indices(i)), 0, 0)
        _place(rows, chi.block(i), dh[i + 1], 0)
        _place(rows, l.d.submatrix(l.indices(i), l.indices(i - 1)), dh[i + 1], dh[i], -1)
        d[i] = Matrix(rows, nc) if nr else Matrix.zeros(0, nc)
    return ConeComplex(chi, GradedComplex(lo, dims, d))


def cone_cohomology(chi, n: int) -> SubquotientSpace:
    return cohomology(cone_complex(chi).complex, n)


@dataclass(frozen=True)
class LesCheck:
    ok: bool
    direct: dict
    predicted: dict


def cone_les_check(chi) -> LesCheck:
    """Compare dim H^n(C) with ker(H^n h → H^n l) + coker(H^{n−1} h → H^{n−1} l)."""
    chi = as_inclusion(chi)
    C = cone_complex(chi).complex
    hc, lc = chi.h.complex, chi.l.complex
    degs = sorted(set(C.degrees) | set(hc.degrees) | {x + 1 for x in lc.degrees}) if C.total_dim else []
    ranks = {}

    def rk(n):
        if n not in ranks:
            ranks[n] = rank(chi.on_cohomology(n)) if betti(hc, n) and betti(lc, n) else 0
        return ranks[n]

    direct, predicted = {}, {}
    for n in degs:
        direct[n] = betti(C, n)
        predicted[n] = betti(hc, n) - rk(n) + betti(lc, n - 1) - rk(n - 1)
    return LesCheck(direct == predicted, direct, predicted)


def is_formal_pair(chi) -> bool:
    """H*(h) → H*(l) injective in every degree."""
    chi = as_inclusion(chi)
    hc = chi.h.complex
    for n in hc.degrees:
        b = betti(hc, n)
        if b and rank(chi.on_cohomology(n)) != b:
            return False
    return True


@dataclass
class QuotientModel:
    """The abelian dgla (l/h)[−1]; ``spaces[i]`` is l^i modulo χ(h^i) in local coordinates."""

    chi: Inclusion
    spaces: dict
    complex: GradedComplex
    dgla: Dgla

    def classify(self, i: int, v) -> tuple:
        """Class of a local l^i vector, as coordinates of model degree i + 1."""
        return self.spaces[i].classify(v)

    def lift(self, i: int, coords) -> tuple:
        return self.spaces[i].lift(coords)

    def from_cone(self, i: int, g) -> tuple:
        """Image of a cone element with l-part g ∈ l^{i−1}: (−1)^{i+1}[g]."""
        c = self.classify(i - 1, g)
        return c if i % 2 else tuple(-x for x in c)


def quotient_model(chi) -> QuotientModel:
    chi = as_inclusion(chi)
    l = chi.l
    lc = l.complex
    spaces = {}
    degs = list(lc.degrees) if l.dim else []
    for i in range(min(degs, default=0) - 1, max(degs, default=0) + 2):
        n = len(l.indices(i))
        spaces[i] = SubquotientSpace.make(Matrix.identity(n), chi.block(i))
    if not degs or all(spaces[i].dim == 0 for i in degs):
        U = GradedComplex.zero()
    else:
        d = {}
        for i in degs[:-1]:
            src, tgt = spaces[i], spaces[i + 1]
            dl = l.d.submatrix(l.indices(i + 1), l.indices(i))
            d[i] = Matrix.from_columns([tgt.classify(dl @ r) for r in src.reps.columns()], tgt.dim)
        U = GradedComplex(degs[0], [spaces[i].dim for i in degs], d)
    Qc = shift(U, -1) if U.total_dim else U
    return QuotientModel(chi, spaces, Qc, from_complex(Qc, {}, check=False))


# ---------------------------------------------------------------------------
# Cartan homotopies and the Lie derivative


def _op_degree(V: GradedComplex, X: Matrix) -> int | None:
    """Degree of a homogeneous operator on ⊕V (None for zero, ValueError if mixed)."""
    degs = _degree_array(V)
    found = None
    for r in range(X.nrows):
        for c in range(X.ncols):
            if X.rows[r][c]:
                k = degs[r] - degs[c]
                if found is None:
                    found = k
                elif found != k:
                    raise ValueError("operator is not homogeneous")
    return found


def graded_commutator(X: Matrix, p: int, Y: Matrix, q: int) -> Matrix:
    s = -1 if (p * q) % 2 else 1
    return X @ Y - (Y @ X).scale(s)


def hom_differential(V: GradedComplex, X: Matrix, p: int) -> Matrix:
    d = total_differential(V)
    return graded_commutator(d, 1, X, p)


def _contraction_ops(g: Dgla, V: GradedComplex, i) -> list[Matrix]:
    N = V.total_dim
    ops = [Matrix.zeros(N, N) for _ in range(g.dim)] if i is None else list(i)
    if len(ops) != g.dim:
        raise PeriodError(f"contraction needs {g.dim} operators, got {len(ops)}")
    for k, X in enumerate(ops):
        if X.shape != (N, N):
            raise PeriodError(f"contraction operator {k} has shape {X.shape}, expected {(N, N)}")
    return ops


def _check_degrees(g: Dgla, V: GradedComplex, ops) -> CheckResult:
    for k, X in enumerate(ops):
        try:
            deg = _op_degree(V, X)
        except ValueError:
            return CheckResult(False, "degree", (k,), "contraction operator is not homogeneous")
        if deg is not None and deg != g.degrees[k] - 1:
            return CheckResult(False, "degree", (k,), f"expected degree {g.degrees[k] - 1}, got {deg}")
    return CheckResult.passed()


def _apply(ops, vec) -> Matrix:
    N = ops[0].nrows if ops else 0
    out = Matrix.zeros(N, N)
    for c, X in zip(vec, ops):
        if c:
            out = out + X.scale(c)
    return out


def lie_operators(g: Dgla, V: GradedComplex, ops) -> list[Matrix]:
    """l(b) = D(i(b)) + i(d b) for each basis element b."""
    return [hom_differential(V, ops[b], g.degrees[b] - 1) + _apply(ops, g.d.col(b)) for b in range(g.dim)]


def check_cartan(g: Dgla, V: GradedComplex, i) -> CheckResult:
    """i([a,b]) = [i(a), l(b)] and [i(a), i(b)] = 0 over all basis pairs."""
    ops = _contraction_ops(g, V, i)
    res = _check_degrees(g, V, ops)
    if not res:
        return res
    lie = lie_operators(g, V, ops)
    for a in range(g.dim):
        pa = g.degrees[a] - 1
        for b in range(g.dim):
            pb = g.degrees[b] - 1
            lhs = _apply(ops, g.bracket(unit_vector(g.dim, a), unit_vector(g.dim, b)))
            if lhs != graded_commutator(ops[a], pa, lie[b], pb + 1):
                return CheckResult(False, "bracket", (a, b), "i([a,b]) ≠ [i(a), l(b)]")
            if not graded_commutator(ops[a], pa, ops[b], pb).is_zero():
                return CheckResult(False, "commute", (a, b), "[i(a), i(b)] ≠ 0")
    return CheckResult.passed()


@dataclass(frozen=True)
class LieDerivative:
    operators: list
    matrix: Matrix
    end: EndDgla


def lie_derivative(g: Dgla, V: GradedComplex, i) -> LieDerivative:
    from .dgla import check_dgla_map
    ops = _contraction_ops(g, V, i)
    res = check_cartan(g, V, ops)
    if not res:
        raise PeriodError(f"not a Cartan homotopy: {res.reason} at {res.witness}", res)
    lie = lie_operators(g, V, ops)
    E = end_dgla(V)
    cols = [E.from_operator(X, [g.degrees[b]]) for b, X in enumerate(lie)]
    M = Matrix.from_columns(cols, E.dim)
    res = check_dgla_map(g, E, M)
    if not res:
        raise PeriodError(f"Lie derivative is not a dgla morphism: {res.reason} at {res.witness}", res)
    return LieDerivative(lie, M, E)


# ---------------------------------------------------------------------------
# Hodge models


@dataclass
class HodgeModel:
    """Finite filtered complex with a dgla acting through a contraction.

    ``contraction[k]`` is i(e_k) as an operator on ⊕V of degree |e_k| − 1.
    ``hodge_weights`` optionally gives the Hodge degree p of each basis vector of ⊕V.
    """

    V: GradedComplex
    F: Filtration
    g: Dgla
    contraction: list
    name: str = "model"
    hodge_weights: tuple | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def end(self) -> EndDgla:
        return self.filt.parent

    @property
    def filt(self) -> SubDgla:
        if "filt" not in self._cache:
            self._cache["filt"] = end_filt_dgla(self.V, self.F)
        return self._cache["filt"]

    @property
    def quotient(self) -> QuotientModel:
        if "quotient" not in self._cache:
            self._cache["quotient"] = quotient_model(self.filt)
        return self._cache["quotient"]

    def i(self, vec) -> Matrix:
        return _apply(self.contraction, vec)


def contraction_from_constants(g: Dgla, V: GradedComplex,
                               constants: Mapping[tuple[int, int], Mapping[int, object]]) -> list[Matrix]:
    """Operators from i(e_a)(v_k) = Σ_m c_m v_m, indices in the flattened ⊕V."""
    N = V.total_dim
    rows = [[[Fraction(0)] * N for _ in range(N)] for _ in range(g.dim)]
    for (a, k), out in constants.items():
        for m, c in out.items():
            rows[a][m][k] += Fraction(c)
    return [Matrix(r, N) if N else Matrix.zeros(0, 0) for r in rows]


def transversality(model: HodgeModel) -> CheckResult:
    """i(e_k)(F^p) ⊆ F^{p−1} for every basis element and every p; witness (k, p)."""
    V, F = model.V, model.F
    for k, X in enumerate(model.contraction):
        for p in range(F.p_min, F.p_max + 2):
            src = total_basis(V, F.step(p))
            tgt = total_basis(V, F.step(p - 1))
            if src.ncols and not span_contains(tgt, X @ src):
                return CheckResult(False, "transversality", (k, p), f"i(e_{k}) moves F^{p} outside F^{p - 1}")
    return CheckResult.passed()


def nonnegative_end(model: HodgeModel) -> Matrix:
    """Basis (End coordinates) of endomorphisms that do not lower the Hodge degree."""
    if model.hodge_weights is None:
        raise PeriodError("model has no Hodge weights")
    E = model.end
    w = model.hodge_weights
    off = offsets(model.V)
    cols = []
    for k, (n, i, r, c) in enumerate(E.units):
        if w[off[i + n] + r] >= w[off[i] + c]:
            cols.append(unit_vector(E.dim, k))
    return Matrix.from_columns(cols, E.dim)


def validate_model(model: HodgeModel) -> CheckResult:
    res = filtration_check(model.F)
    if not res:
        return CheckResult(False, "filtration:" + res.reason, res.witness, res.detail)
    res = check_cartan(model.g, model.V, model.contraction)
    if not res:
        return CheckResult(False, "cartan:" + res.reason, res.witness, res.detail)
    lie = lie_derivative(model.g, model.V, model.contraction)
    filt = model.filt
    for b in range(model.g.dim):
        v = lie.matrix.col(b)
        if any(v) and (filt.dim == 0 or solve_vector(filt.inclusion, v) is None):
            return CheckResult(False, "lie-filtration", (b,), "l(b) does not preserve the filtration")
    if not is_formal_pair(filt):
        return CheckResult(False, "formal", (), "End^F → End is not injective on cohomology")
    return CheckResult.passed()


def _require_valid(model: HodgeModel):
    if "valid" not in model._cache:
        model._cache["valid"] = validate_model(model)
    res = model._cache["valid"]
    if not res:
        raise PeriodError(f"invalid model: {res.reason} at {res.witness}", res)


# ---------------------------------------------------------------------------
# Grass functor


def _classical(A: ArtinAlgebra) -> ArtinAlgebra:
    A = A.adapted()
    if any(A.degrees) or not A.d.is_zero():
        raise PeriodError("Grass and Flag functors need a classical (degree-0, d = 0) ring")
    return A


def left_multiplication(A: ArtinAlgebra, a: int) -> Matrix:
    return Matrix.from_columns([A.product_basis(a, b) for b in range(A.dim)], A.dim)


def extend_operator(A: ArtinAlgebra, components: Mapping[int, Matrix], N: int) -> Matrix:
    """Σ_a φ_a ⊗ L_a on V ⊗ A."""
    out = Matrix.zeros(N * A.dim, N * A.dim)
    for a, phi in components.items():
        if a == 0:
            raise PeriodError("components must be indexed by the maximal ideal")
        if not phi.is_zero():
            out = out + kron(phi, left_multiplication(A, a))
    return out


def _check_unital(V: GradedComplex, A: ArtinAlgebra, f: Matrix):
    N, r = V.total_dim, A.dim
    if f.shape != (N * r, N * r):
        raise PeriodError(f"deformation matrix must be {N * r}×{N * r}, got {f.shape}")
    X = f - Matrix.identity(N * r)
    for v in range(N):
        if any(X.rows[v * r]):
            raise PeriodError("f is not the identity modulo the maximal ideal")
    for b in A.maximal_ideal:
        L = kron(Matrix.identity(N), left_multiplication(A, b))
        if f @ L != L @ f:
            raise PeriodError("f is not A-linear")
    degs = _degree_array(V)
    for i in range(N * r):
        for j in range(N * r):
            if X.rows[i][j] and degs[i // r] != degs[j // r]:
                raise PeriodError("f does not preserve degrees")


@dataclass(frozen=True)
class GrassPoint:
    V: GradedComplex
    W: SubcomplexPair
    A: ArtinAlgebra
    f: Matrix

    @property
    def image(self) -> Matrix:
        """Columns spanning f(W ⊗ A) over k."""
        return self.f @ kron(self.W.total, Matrix.identity(self.A.dim))


def grass_point(V: GradedComplex, W, A: ArtinAlgebra, f: Matrix | Mapping[int, Matrix]) -> GrassPoint:
    """Build a point from the big matrix or from {ideal index: φ_a}."""
    A = _classical(A)
    P = _pair(V, W)
    N = V.total_dim
    if not isinstance(f, Matrix):
        f = Matrix.identity(N * A.dim) + extend_operator(A, f, N)
    _check_unital(V, A, f)
    return GrassPoint(V, P, A, f)


def _big_d(V: GradedComplex, A: ArtinAlgebra) -> Matrix:
    return kron(total_differential(V), Matrix.identity(A.dim))


def _flatten(M: Matrix) -> tuple:
    return sum((r for r in M.rows), ())


def _membership_defect(pt: GrassPoint) -> tuple:
    """Ann(W⊗A) · f⁻¹ d f · (W⊗A), zero exactly on members."""
    WA = kron(pt.W.total, Matrix.identity(pt.A.dim))
    D = _big_d(pt.V, pt.A)
    return _flatten(annihilator(WA) @ inverse(pt.f) @ D @ pt.f @ WA)


def grass_is_member(V: GradedComplex, W, A: ArtinAlgebra, f) -> bool:
    pt = f if isinstance(f, GrassPoint) else grass_point(V, W, A, f)
    return not any(_membership_defect(pt))


def _aut_tilde_basis(V: GradedComplex) -> list[Matrix]:
    """Operators spanning B^0(End V), the first-order directions of Ãut."""
    E = end_dgla(V)
    H = E.hom
    if H.dim(0) == 0:
        return []
    B = boundaries(H.complex, 0)
    return [H.total_matrix(0, v) for v in B.columns()]


@dataclass(frozen=True)
class GaugeWitness:
    equivalent: bool
    u: Matrix | None = None
    w: dict | None = None


def _common_u(V: GradedComplex, A: ArtinAlgebra, pairs: Sequence[tuple[Matrix, Matrix]]) -> Matrix | None:
    """Solve for u = Id + Ψ, Ψ ∈ B^0(End) ⊗ m, with u·span(P1) ⊆ span(P2) for every pair."""
    N = V.total_dim
    dirs = [kron(b, left_multiplication(A, a)) for b in _aut_tilde_basis(V) for a in A.maximal_ideal]
    blocks, rhs = [], []
    for P1, P2 in pairs:
        Ann = annihilator(P2)
        if Ann.nrows == 0 or P1.ncols == 0:
            continue
        cols = [_flatten(Ann @ X @ P1) for X in dirs]
        blocks.append(Matrix.from_columns(cols, Ann.nrows * P1.ncols))
        rhs.extend(-x for x in _flatten(Ann @ P1))
    u = Matrix.identity(N * A.dim)
    if not blocks:
        return u
    L = vstack(*blocks, ncols=len(dirs))
    if not dirs:
        return u if not any(rhs) else None
    c = solve_vector(L, tuple(rhs))
    if c is None:
        return None
    for x, X in zip(c, dirs):
        if x:
            u = u + X.scale(x)
    return u


def _stabilizer(pt: GrassPoint, u: Matrix, other: GrassPoint) -> Matrix:
    """w = f1⁻¹ u⁻¹ f2, which must preserve W ⊗ A."""
    w = inverse(pt.f) @ inverse(u) @ other.f
    WA = kron(pt.W.total, Matrix.identity(pt.A.dim))
    if not (annihilator(WA) @ w @ WA).is_zero():
        raise AssertionError("computed stabilizer does not preserve W ⊗ A")
    return w


def grass_equivalent(V: GradedComplex, W, A: ArtinAlgebra, f1, f2) -> GaugeWitness:
    """Decide u f1 w = f2 with u ∈ Ãut^{(V,d)}(A), w ∈ Aut^{W,V}(A).

    Such (u, w) exist iff u·f1(W⊗A) = f2(W⊗A), and u ranges over
    Id + B^0(End V) ⊗ m, so the search is one exact linear solve.
    """
    p1 = f1 if isinstance(f1, GrassPoint) else grass_point(V, W, A, f1)
    p2 = f2 if isinstance(f2, GrassPoint) else grass_point(V, W, A, f2)
    u = _common_u(V, p1.A, [(p1.image, p2.image)])
    if u is None:
        return GaugeWitness(False)
    return GaugeWitness(True, u, {0: _stabilizer(p1, u, p2)})


# first-order computations at k[ε]


def _dual() -> ArtinAlgebra:
    from .artin import dual_numbers
    return dual_numbers()


def _end0_ops(V: GradedComplex) -> list[Matrix]:
    H = end_dgla(V).hom
    return [H.total_matrix(0, unit_vector(H.dim(0), k)) for k in range(H.dim(0))]


def _linear_kernel(defect, basis_ops: Sequence) -> Matrix:
    cols = [defect(X) for X in basis_ops]
    n = len(cols[0]) if cols else 0
    return kernel_basis(Matrix.from_columns(cols, n))


def _aut_tilde_directions(V: GradedComplex, ops: Sequence[Matrix]) -> Matrix:
    """ψ with Id + ψε a chain automorphism of V[ε] acting trivially on cohomology."""
    A = _dual()
    D = _big_d(V, A)
    Z = kernel_basis(D)
    AnnB = annihilator(column_basis(D)) if not D.is_zero() else Matrix.identity(D.nrows)
    L = left_multiplication(A, 1)

    def defect(X):
        big = kron(X, L)
        return _flatten(D @ big - big @ D) + _flatten(AnnB @ big @ Z)

    return _linear_kernel(defect, ops)


def _stabilizer_directions(V: GradedComplex, P: SubcomplexPair, ops: Sequence[Matrix]) -> Matrix:
    A = _dual()
    WA = kron(P.total, Matrix.identity(2))
    Ann = annihilator(WA)
    L = left_multiplication(A, 1)
    return _linear_kernel(lambda X: _flatten(Ann @ kron(X, L) @ WA), ops)


@dataclass(frozen=True)
class GrassTangent:
    grass_dim: int
    cone_dim: int
    numerator_dim: int
    moves_dim: int

    @property
    def equal(self) -> bool:
        return self.grass_dim == self.cone_dim


def grass_tangent_vs_cone(V: GradedComplex, W) -> GrassTangent:
    """dim Grass_{W,V}(k[ε]) from the orbit space versus dim H^1 of the cone of End^W ↪ End."""
    P = _pair(V, W)
    ops = _end0_ops(V)
    A = _dual()
    L = left_multiplication(A, 1)
    N = V.total_dim
    I = Matrix.identity(2 * N)

    def defect(X):
        return _membership_defect(GrassPoint(V, P, A, I + kron(X, L)))

    num = _linear_kernel(defect, ops)
    moves = hstack(_aut_tilde_directions(V, ops), _stabilizer_directions(V, P, ops), nrows=len(ops))
    if not span_contains(num, moves):
        raise AssertionError("group directions leave the Grass tangent set")
    m = rank(moves)
    cone = betti(cone_complex(end_sub_dgla(V, P)).complex, 1)
    return GrassTangent(num.ncols - m, cone, num.ncols, m)


# ---------------------------------------------------------------------------
# Flag functor


@dataclass(frozen=True)
class FlagPoint:
    V: GradedComplex
    F: Filtration
    A: ArtinAlgebra
    points: dict  # p → GrassPoint for F^p


def flag_point(V: GradedComplex, F: Filtration, A: ArtinAlgebra, maps: Mapping[int, object]) -> FlagPoint:
    """``maps[p]`` is a big matrix or a component dict; missing steps default to Id."""
    A = _classical(A)
    pts = {}
    for p in range(F.p_min, F.p_max + 1):
        f = maps.get(p, {})
        pts[p] = grass_point(V, SubcomplexPair(V, F.step(p)), A, f)
    extra = set(maps) - set(pts)
    if extra:
        raise PeriodError(f"filtration has no nontrivial step {min(extra)}")
    return FlagPoint(V, F, A, pts)


def _nesting_defect(inner: GrassPoint, outer: GrassPoint) -> tuple:
    WA = kron(outer.W.total, Matrix.identity(outer.A.dim))
    return _flatten(annihilator(WA) @ inverse(outer.f) @ inner.image)


def flag_is_member(pt: FlagPoint) -> CheckResult:
    for p, gp in sorted(pt.points.items()):
        if any(_membership_defect(gp)):
            return CheckResult(False, "member", (p,), f"step {p} is not a deformation of a subcomplex")
    for p in sorted(pt.points):
        if p - 1 in pt.points and any(_nesting_defect(pt.points[p], pt.points[p - 1])):
            return CheckResult(False, "nesting", (p,), f"G^{p} ⊄ G^{p - 1}")
    return CheckResult.passed()


def flag_equivalent(p1: FlagPoint, p2: FlagPoint) -> GaugeWitness:
    """A common u ∈ Ãut with u·G1^p = G2^p for every step p."""
    if set(p1.points) != set(p2.points):
        raise PeriodError("flag points have different steps")
    u = _common_u(p1.V, p1.A, [(p1.points[p].image, p2.points[p].image) for p in sorted(p1.points)])
    if u is None:
        return GaugeWitness(False)
    return GaugeWitness(True, u, {p: _stabilizer(p1.points[p], u, p2.points[p]) for p in p1.points})


@dataclass(frozen=True)
class FlagTangent:
    flag_dim: int
    quotient_dim: int
    cone_dim: int
    formal: bool

    @property
    def equal(self) -> bool:
        return self.flag_dim == self.quotient_dim == self.cone_dim


def flag_tangent_vs_quotient(V: GradedComplex, F: Filtration) -> FlagTangent:
    ops = _end0_ops(V)
    A = _dual()
    L = left_multiplication(A, 1)
    N = V.total_dim
    I = Matrix.identity(2 * N)
    steps = list(range(F.p_min, F.p_max + 1))
    pairs = {p: SubcomplexPair(V, F.step(p)) for p in steps}
    n = len(ops)
    blocks = []
    zero = Matrix.zeros(N, N)

    def point(p, X):
        return GrassPoint(V, pairs[p], A, I + kron(X, L))

    # unknowns: (φ_p) stacked by step; each block of constraints is linear at k[ε]
    for s, p in enumerate(steps):
        cols = []
        for t in range(len(steps)):
            for X in ops:
                cols.append(_membership_defect(point(p, X if t == s else zero)))
        blocks.append(cols)
        if s:
            cols = []
            for t in range(len(steps)):
                for X in ops:
                    inner = point(p, X if t == s else zero)
                    outer = point(steps[s - 1], X if t == s - 1 else zero)
                    cols.append(_nesting_defect(inner, outer))
            blocks.append(cols)
    total = len(steps) * n
    mats = [Matrix.from_columns(c, len(c[0]) if c else 0) for c in blocks]
    Kmat = kernel_basis(vstack(*mats, ncols=total)) if mats else Matrix.identity(total)
    aut = _aut_tilde_directions(V, ops)
    moves = [tuple(v) * len(steps) for v in aut.columns()]
    for s, p in enumerate(steps):
        for v in _stabilizer_directions(V, pairs[p], ops).columns():
            full = [Fraction(0)] * total
            full[s * n:(s + 1) * n] = v
            moves.append(tuple(full))
    M = Matrix.from_columns(moves, total)
    if not span_contains(Kmat, M):
        raise AssertionError("group directions leave the Flag tangent set")
    filt = end_filt_dgla(V, F)
    formal = is_formal_pair(filt)
    Qm = quotient_model(filt)
    return FlagTangent(Kmat.ncols - rank(M), betti(Qm.complex, 1), betti(cone_complex(filt).complex, 1), formal)


# ---------------------------------------------------------------------------
# cone cocycles to Grass points


def psi_map(V: GradedComplex, W, A: ArtinAlgebra, cocycle: Mapping[int, Sequence]) -> GrassPoint:
    """(f, h) ↦ (Id + h)(W ⊗ A) for a degree-1 cocycle of C_χ ⊗ m_A, m_A² = 0.

    ``cocycle[a]`` holds the cone coordinates (h^1 part, then End^0 part) of the
    component along the ideal basis element a.
    """
    A = _classical(A)
    if not A.is_square_zero():
        raise PeriodError("psi_map is defined for square-zero rings only")
    P = _pair(V, W)
    h = end_sub_dgla(V, P)
    C = cone_complex(h)
    E = h.parent
    comps = {}
    for a, vec in cocycle.items():
        vec = tuple(Fraction(x) for x in vec)
        if len(vec) != C.complex.dim(1):
            raise PeriodError(f"cocycle component {a} must have length {C.complex.dim(1)}")
        if any(C.complex.diff(1) @ vec):
            raise PeriodError(f"cocycle component {a} is not closed")
        _, g = C.split(1, vec)
        comps[a] = E.hom.total_matrix(0, g) if g else Matrix.zeros(V.total_dim, V.total_dim)
    return grass_point(V, P, A, comps)


def cone_cocycle(h: SubDgla, g_part) -> tuple:
    """The degree-1 cone cocycle (f, g) with χ(f) = D g, for g ∈ End^0 with D g ∈ h."""
    E = h.parent
    g_part = tuple(g_part)
    full = [Fraction(0)] * E.dim
    idx = E.indices(0)
    for k, x in zip(idx, g_part):
        full[k] = x
    Dg = E.diff(full)
    f = solve_vector(h.inclusion, Dg) if h.dim else (() if not any(Dg) else None)
    if f is None:
        raise PeriodError("D g does not lie in the sub-dgla")
    f_local = tuple(f[k] for k in h.indices(1))
    return f_local + g_part


# ---------------------------------------------------------------------------
# period map


@dataclass(frozen=True)
class PeriodClass:
    """Class of i(ξ) in ((End/End^F)[−1])^1 ⊗ m_A, as an element of the tensor dgla."""

    vector: tuple
    components: dict  # ideal index → coordinates in model degree 1
    tensor: Dgla


def _operator_local(E: EndDgla, X: Matrix, n: int) -> tuple:
    v = E.hom.from_total_matrix(n, X)
    if E.hom.total_matrix(n, v) != X:
        raise PeriodError(f"operator is not homogeneous of degree {n}")
    return v


def _components(T, xi) -> dict:
    out: dict = {}
    for k, c in enumerate(xi):
        if c:
            x, a = T.pairs[k]
            out.setdefault(a, [Fraction(0)] * T.g.dim)[x] += c
    return out


def fm_period(model: HodgeModel, A: ArtinAlgebra, xi) -> PeriodClass:
    _require_valid(model)
    g = model.g
    T = tensor_with_ideal(g, A)
    xi = tuple(Fraction(x) for x in xi)
    if any(T.degrees[k] != 1 for k, c in enumerate(xi) if c):
        raise PeriodError("ξ must have total degree 1")
    if not is_mc(g, A, xi):
        raise PeriodError("ξ is not a Maurer-Cartan element")
    if any(T.A.degrees):
        raise PeriodError("fm_period needs a classical ring")
    Qm = model.quotient
    E = model.end
    TQ = tensor_with_ideal(Qm.dgla, T.A)
    qidx = Qm.dgla.indices(1)
    comps, terms = {}, {}
    for a, vec in _components(T, xi).items():
        local = _operator_local(E, model.i(vec), 0)
        c = Qm.classify(0, local)
        comps[a] = c
        for j, x in zip(qidx, c):
            if x:
                terms[(j, a)] = x
    vec = TQ.element(terms)
    if any(TQ.diff(vec)):
        raise PeriodError("the quotient class of i(ξ) is not closed")
    return PeriodClass(vec, comps, TQ)


@dataclass(frozen=True)
class PeriodTangent:
    matrix: Matrix
    rank: int
    source_dim: int
    target_dim: int
    transversality: CheckResult

    @property
    def is_isomorphism(self) -> bool:
        return self.rank == self.source_dim == self.target_dim


def period_tangent(model: HodgeModel) -> PeriodTangent:
    """ξ ↦ [i_ξ] from H^1(g) to H^1((End/End^F)[−1])."""
    _require_valid(model)
    g = model.g
    Hg = cohomology(g.complex, 1)
    Qm = model.quotient
    HQ = cohomology(Qm.complex, 1)
    E = model.end
    idx = g.indices(1)
    cols = []
    for rep in Hg.reps.columns():
        full = [Fraction(0)] * g.dim
        for k, x in zip(idx, rep):
            full[k] = x
        c = Qm.classify(0, _operator_local(E, model.i(full), 0))
        cols.append(HQ.classify(c) if HQ.N else ())
    M = Matrix.from_columns(cols, HQ.dim)
    return PeriodTangent(M, rank(M), Hg.dim, HQ.dim, transversality(model))


@dataclass(frozen=True)
class SquareReport:
    ok: bool
    checked: int
    failures: list


def fm_square_commutes(model: HodgeModel, A: ArtinAlgebra) -> SquareReport:
    """Compare, for each basis MC element ξ at square-zero A, the flag point built
    from the period class through the cone cocycles with Id + i(ξ) applied to F•."""
    _require_valid(model)
    A = _classical(A)
    if not A.is_square_zero():
        raise PeriodError("the period square is only checked at square-zero rings")
    g, V, F = model.g, model.V, model.F
    T = tensor_with_ideal(g, A)
    E = model.end
    Qm = model.quotient
    Z1 = kernel_basis(g.d.submatrix(range(g.dim), g.indices(1))) if g.indices(1) else Matrix.zeros(0, 0)
    steps = range(F.p_min, F.p_max + 1)
    subs = {p: end_sub_dgla(V, SubcomplexPair(V, F.step(p))) for p in steps}
    N = V.total_dim
    failures = []
    checked = 0
    for z in Z1.columns():
        for a in T.A.maximal_ideal:
            terms = {(x, a): c for x, c in zip(g.indices(1), z) if c}
            xi = T.element(terms)
            pc = fm_period(model, T.A, xi)
            lift = Qm.lift(0, pc.components.get(a, (0,) * Qm.spaces[0].dim))
            via_cone = {}
            for p in steps:
                coc = cone_cocycle(subs[p], lift)
                via_cone[p] = psi_map(V, SubcomplexPair(V, F.step(p)), T.A, {a: coc}).f
            direct_op = model.i(_components(T, xi).get(a, [0] * g.dim))
            direct = {p: {a: direct_op} for p in steps}
            P1 = flag_point(V, F, T.A, via_cone)
            P2 = flag_point(V, F, T.A, direct)
            checked += 1
            for label, pt in (("period path", P1), ("direct path", P2)):
                res = flag_is_member(pt)
                if not res:
                    failures.append((tuple(z), a, label, res.reason, res.witness))
            if not flag_equivalent(P1, P2).equivalent:
                failures.append((tuple(z), a, "equivalence", None, None))
    return SquareReport(not failures, checked, failures)
