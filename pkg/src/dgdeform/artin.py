"""Local Artinian (dg) coefficient algebras given by structure constants.

Basis index 0 is always the unit; the remaining basis vectors span the
maximal ideal m.  Degrees are cochain degrees and must be ≤ 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

from .complexes import CheckResult
from .linalg import Matrix, Q, column_basis, extend_basis, hstack, inverse, rank, solve_vector


class ArtinError(ValueError):
    def __init__(self, result: CheckResult):
        super().__init__(f"not a local Artinian dg algebra: {result.reason} {result.witness} {result.detail}")
        self.result = result


Sparse = Mapping[int, Fraction]


def _sign(a: int, b: int) -> int:
    return -1 if (a * b) % 2 else 1


class ArtinAlgebra:
    """A finite-dimensional graded-commutative local dg algebra.

    ``mult[(i, j)]`` is the sparse product of basis vectors i and j (missing
    pairs multiply to zero, except that the unit rules are implied);
    ``d`` is the differential as a dim × dim matrix acting on columns.
    """

    def __init__(self, names: Sequence[str], degrees: Sequence[int],
                 mult: Mapping[tuple[int, int], Sparse], d: Matrix | None = None,
                 *, check: bool = True):
        self.names = tuple(names)
        self.degrees = tuple(int(x) for x in degrees)
        n = len(self.names)
        if len(self.degrees) != n or n == 0:
            raise ValueError("names and degrees must be nonempty and of equal length")
        self.dim = n
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i in range(n):
            table[(0, i)] = {i: Fraction(1)}
            table[(i, 0)] = {i: Fraction(1)}
        for (i, j), vec in mult.items():
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"product index ({i}, {j}) out of range")
            clean = {k: Q(c) for k, c in vec.items() if Q(c)}
            if i == 0 or j == 0:
                if clean != table[(i, j)]:
                    raise ArtinError(CheckResult(False, "unit", (i, j), "products with index 0 must be the unit law"))
                continue
            table[(i, j)] = clean
        self.mult = table
        self.d = d if d is not None else Matrix.zeros(n, n)
        if self.d.shape != (n, n):
            raise ValueError("differential must be dim × dim")
        if check:
            res = check_artin(self)
            if not res:
                raise ArtinError(res)

    @property
    def maximal_ideal(self) -> tuple[int, ...]:
        return tuple(range(1, self.dim))

    def __repr__(self) -> str:
        return f"ArtinAlgebra({', '.join(f'{a}:{g}' for a, g in zip(self.names, self.degrees))})"

    # arithmetic on coordinate vectors
    def product_basis(self, i: int, j: int) -> tuple:
        out = [Fraction(0)] * self.dim
        for k, c in self.mult.get((i, j), {}).items():
            out[k] = c
        return tuple(out)

    def mul(self, u, v) -> tuple:
        out = [Fraction(0)] * self.dim
        for i, a in enumerate(u):
            if not a:
                continue
            for j, b in enumerate(v):
                if not b:
                    continue
                for k, c in self.mult.get((i, j), {}).items():
                    out[k] += a * b * c
        return tuple(out)

    def diff(self, u) -> tuple:
        return self.d @ tuple(u)

    def unit(self) -> tuple:
        return tuple(Fraction(int(i == 0)) for i in range(self.dim))

    def basis_vector(self, i: int) -> tuple:
        return tuple(Fraction(int(k == i)) for k in range(self.dim))

    # ideal filtration
    @cached_property
    def ideal_powers(self) -> list[Matrix]:
        """[m, m², …, m^s = 0] as column-basis matrices in A."""
        n = self.dim
        m_basis = [self.basis_vector(i) for i in self.maximal_ideal]
        powers = []
        current = m_basis
        for _ in range(n + 1):
            B = column_basis(Matrix.from_columns(current, n)) if current else Matrix.zeros(n, 0)
            powers.append(B)
            if B.ncols == 0:
                break
            current = [self.mul(B.col(a), v) for a in range(B.ncols) for v in m_basis]
            current = [v for v in current if any(v)]
        if powers[-1].ncols != 0:
            raise ArtinError(CheckResult(False, "nilpotency", None, "maximal ideal is not nilpotent"))
        return powers

    @property
    def nilpotency_index(self) -> int:
        """Least s with m^s = 0."""
        return len(self.ideal_powers)

    def is_square_zero(self) -> bool:
        return self.nilpotency_index <= 2

    @cached_property
    def stratum_of(self) -> tuple[int, ...]:
        """For an adapted algebra, the k with basis vector i in m^k \\ m^{k+1} (0 for the unit)."""
        out = [0] * self.dim
        for i in self.maximal_ideal:
            e = self.basis_vector(i)
            k = 1
            while k < len(self.ideal_powers) and self.ideal_powers[k].ncols and solve_vector(self.ideal_powers[k], e) is not None:
                k += 1
            out[i] = k
        return tuple(out)

    def is_adapted(self) -> bool:
        """True when each m^k is spanned by basis vectors and strata are ordered."""
        strata = self.stratum_of
        if list(strata[1:]) != sorted(strata[1:]):
            return False
        for k, B in enumerate(self.ideal_powers, start=1):
            count = sum(1 for i in self.maximal_ideal if strata[i] >= k)
            if count != B.ncols:
                return False
        return True

    def strata(self) -> list[list[int]]:
        """Basis indices per stratum m^k / m^{k+1}, for an adapted algebra."""
        if not self.is_adapted():
            raise ValueError("strata need an adapted basis; call adapted() first")
        out: list[list[int]] = [[] for _ in range(self.nilpotency_index - 1)]
        for i in self.maximal_ideal:
            out[self.stratum_of[i] - 1].append(i)
        return out

    def rebase(self, P: Matrix, names: Sequence[str] | None = None) -> "ArtinAlgebra":
        """Same algebra in the basis given by the columns of P (column 0 must be the unit)."""
        if P.col(0) != self.unit():
            raise ValueError("first basis vector must be the unit")
        Pinv = inverse(P)
        cols = P.columns()
        degrees = []
        for v in cols:
            degs = {self.degrees[k] for k, x in enumerate(v) if x}
            if len(degs) != 1:
                raise ValueError("rebased basis vectors must be homogeneous")
            degrees.append(degs.pop())
        mult = {}
        for i in range(1, self.dim):
            for j in range(1, self.dim):
                w = Pinv @ self.mul(cols[i], cols[j])
                if any(w):
                    mult[(i, j)] = {k: c for k, c in enumerate(w) if c}
        d = Pinv @ self.d @ P
        if names is None:
            names = [self.names[0]] + [f"b{i}" for i in range(1, self.dim)]
        return ArtinAlgebra(names, degrees, mult, d)

    def adapted(self) -> "ArtinAlgebra":
        """An isomorphic algebra whose basis refines m ⊇ m² ⊇ ⋯ homogeneously."""
        if self.is_adapted():
            return self
        n = self.dim
        by_degree: dict[int, list[int]] = {}
        for i in self.maximal_ideal:
            by_degree.setdefault(self.degrees[i], []).append(i)
        chosen: list[tuple] = []
        # work from the deepest power outwards so every power is a span of chosen vectors
        layers = []
        deeper = Matrix.zeros(n, 0)
        for B in reversed(self.ideal_powers[:-1]):
            layer = []
            for deg in sorted(by_degree):
                # homogeneous part of span(B) in this degree
                idx = by_degree[deg]
                part = [v for v in B.columns()]
                sel = _homogeneous_part(part, idx, n)
                if sel.ncols == 0:
                    continue
                ext = extend_basis(hstack(deeper, Matrix.from_columns(layer, n)) if layer else deeper, sel)
                layer.extend(ext.columns())
            layers.append(layer)
            deeper = hstack(deeper, Matrix.from_columns(layer, n)) if layer else deeper
        for layer in reversed(layers):
            chosen.extend(layer)
        P = Matrix.from_columns([self.unit()] + chosen, n)
        if rank(P) != n:
            raise ArtinError(CheckResult(False, "grading", None, "ideal powers are not graded subspaces"))
        out = self.rebase(P)
        assert out.is_adapted()
        return out

    def truncate(self, k: int) -> "ArtinAlgebra":
        """A / m^{k+1} for an adapted algebra (keeps strata 1..k)."""
        strata = self.stratum_of
        keep = [0] + [i for i in self.maximal_ideal if strata[i] <= k]
        pos = {old: new for new, old in enumerate(keep)}
        mult = {}
        for (i, j), vec in self.mult.items():
            if i in pos and j in pos and i and j:
                w = {pos[c]: x for c, x in vec.items() if c in pos}
                if w:
                    mult[(pos[i], pos[j])] = w
        d = self.d.submatrix(keep, keep)
        return ArtinAlgebra([self.names[i] for i in keep], [self.degrees[i] for i in keep], mult, d)


def _homogeneous_part(vectors: list[tuple], idx: list[int], n: int) -> Matrix:
    """Basis of the projection of span(vectors) onto the coordinates idx.

    Valid as the intersection with the degree piece because the spans passed
    in are graded.
    """
    proj = [tuple(v[k] if k in idx else Fraction(0) for k in range(n)) for v in vectors]
    proj = [v for v in proj if any(v)]
    if not proj:
        return Matrix.zeros(n, 0)
    return column_basis(Matrix.from_columns(proj, n))


@dataclass(frozen=True)
class SmallExtensionStep:
    """source ↠ quotient with kernel a stratum; kernel · m_source = 0."""

    source: ArtinAlgebra
    quotient: ArtinAlgebra
    kernel: tuple[int, ...]


def small_extensions(A: ArtinAlgebra) -> list[SmallExtensionStep]:
    A = A.adapted()
    steps = []
    for k in range(1, A.nilpotency_index):
        src = A.truncate(k)
        quo = A.truncate(k - 1)
        kernel = tuple(i for i in src.maximal_ideal if src.stratum_of[i] == k)
        steps.append(SmallExtensionStep(src, quo, kernel))
    return steps


def check_artin(A: ArtinAlgebra) -> CheckResult:
    n = A.dim
    degs = A.degrees
    if any(g > 0 for g in degs):
        i = next(i for i, g in enumerate(degs) if g > 0)
        return CheckResult(False, "degree", (i,), "basis degrees must be ≤ 0")
    if degs[0] != 0:
        return CheckResult(False, "degree", (0,), "the unit has degree 0")
    # homogeneity of products and of d
    for (i, j), vec in A.mult.items():
        for k in vec:
            if degs[k] != degs[i] + degs[j]:
                return CheckResult(False, "grading", (i, j), f"product lands in degree {degs[k]}")
    for j in range(n):
        for i in range(n):
            if A.d[i, j] and degs[i] != degs[j] + 1:
                return CheckResult(False, "grading", (j,), "d must have degree +1")
    if any(A.d.col(0)):
        return CheckResult(False, "d(1)", (0,), "d(1) ≠ 0")
    if not (A.d @ A.d).is_zero():
        return CheckResult(False, "d²", None, "d∘d ≠ 0")
    # m is an ideal closed under d
    for (i, j), vec in A.mult.items():
        if i and j and vec.get(0):
            return CheckResult(False, "ideal", (i, j), "m·m has a unit component")
    for j in A.maximal_ideal:
        if A.d[0, j]:
            return CheckResult(False, "ideal", (j,), "d(m) ⊄ m")
    basis = [A.basis_vector(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            ab = A.product_basis(i, j)
            ba = A.product_basis(j, i)
            s = _sign(degs[i], degs[j])
            if ab != tuple(s * x for x in ba):
                return CheckResult(False, "commutativity", (i, j), "")
            lhs = A.diff(ab)
            rhs = tuple(x + _sign(degs[i], 1) * y for x, y in zip(A.mul(A.diff(basis[i]), basis[j]),
                                                                A.mul(basis[i], A.diff(basis[j]))))
            if lhs != rhs:
                return CheckResult(False, "leibniz", (i, j), "")
            for k in range(n):
                if A.mul(ab, basis[k]) != A.mul(basis[i], A.product_basis(j, k)):
                    return CheckResult(False, "associativity", (i, j, k), "")
    try:
        A.ideal_powers
    except ArtinError as exc:
        return exc.result
    return CheckResult.passed()


def is_algebra_map(A: ArtinAlgebra, B: ArtinAlgebra, M: Matrix) -> CheckResult:
    """Checks that M : A → B (columns = images of A's basis) is a local dg algebra map."""
    if M.shape != (B.dim, A.dim):
        return CheckResult(False, "shape", M.shape)
    if M.col(0) != B.unit():
        return CheckResult(False, "unit", (0,))
    for j in range(A.dim):
        for i in range(B.dim):
            if M[i, j] and B.degrees[i] != A.degrees[j]:
                return CheckResult(False, "grading", (j,))
        if j and M[0, j]:
            return CheckResult(False, "local", (j,))
    if M @ A.d != B.d @ M:
        return CheckResult(False, "differential", None)
    for i in range(A.dim):
        for j in range(A.dim):
            if M @ A.product_basis(i, j) != B.mul(M.col(i), M.col(j)):
                return CheckResult(False, "multiplicative", (i, j))
    return CheckResult.passed()


# ---------------------------------------------------------------------------
# constructors


def square_zero_shift(n: int) -> ArtinAlgebra:
    """k ⊕ k[n]: one square-zero generator in cochain degree −n."""
    if n < 0:
        raise ValueError("shift must be non-negative")
    return ArtinAlgebra(["1", "e"], [0, -n], {})


def dual_numbers() -> ArtinAlgebra:
    return square_zero_shift(0)


def truncated_polynomial(s: int) -> ArtinAlgebra:
    """k[t]/(t^s)."""
    if s < 2:
        raise ValueError("need s ≥ 2")
    mult = {(i, j): {i + j: 1} for i in range(1, s) for j in range(1, s) if i + j < s}
    return ArtinAlgebra(["1"] + [f"t^{i}" for i in range(1, s)], [0] * s, mult)


def cone_coefficient(n: int) -> ArtinAlgebra:
    """k ⊕ (u → v) with |u| = −n, |v| = 1 − n, du = v and m² = 0."""
    if n < 1:
        raise ValueError("need n ≥ 1")
    d = Matrix([[0, 0, 0], [0, 0, 0], [0, 1, 0]])
    return ArtinAlgebra(["1", "u", "v"], [0, -n, 1 - n], {}, d)


def cone_surjection(n: int) -> Matrix:
    """The dg surjection cone_coefficient(n) ↠ square_zero_shift(n), u ↦ e, v ↦ 0."""
    return Matrix([[1, 0, 0], [0, 1, 0]])


def tensor_nilpotent(g, A: ArtinAlgebra):
    """The nilpotent dgla g ⊗ m_A (see :func:`dgdeform.dgla.tensor_with_ideal`)."""
    from .dgla import tensor_with_ideal
    return tensor_with_ideal(g, A)
