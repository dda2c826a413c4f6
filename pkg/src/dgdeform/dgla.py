"""Differential graded Lie algebras, Maurer-Cartan elements and gauge action.

A :class:`Dgla` has a flat homogeneous basis sorted by degree, a total
differential matrix and sparse bracket structure constants.  Elements are
coordinate tuples over that basis.  Coefficients in an Artinian ring enter
through the nilpotent dgla g ⊗ m_A (:func:`tensor_with_ideal`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .artin import ArtinAlgebra, cone_coefficient, cone_surjection, dual_numbers, square_zero_shift
from .complexes import CheckResult, GradedComplex, SubquotientSpace, betti, cohomology, hom_complex, offsets
from .linalg import (
    Matrix,
    Q,
    column_basis,
    hstack,
    kernel_basis,
    rank,
    solve,
    solve_vector,
    unit_vector,
    zero_vector,
)

Bracket = Mapping[tuple[int, int], Mapping[int, Fraction]]


class DglaError(ValueError):
    def __init__(self, result: CheckResult):
        super().__init__(f"dgla axiom failure: {result.reason} at {result.witness} {result.detail}".rstrip())
        self.result = result


def _sign(a: int, b: int) -> int:
    return -1 if (a * b) % 2 else 1


class Dgla:
    """Finite-dimensional dgla with a degree-sorted homogeneous basis.

    ``bracket[(a, b)]`` is the sparse expansion of [e_a, e_b]; pairs that are
    absent bracket to zero.  With ``complete=True`` the table is filled in by
    graded antisymmetry from whichever of (a, b), (b, a) is given.
    """

    def __init__(self, degrees: Sequence[int], d: Matrix | None = None, bracket: Bracket | None = None,
                 names: Sequence[str] | None = None, *, complete: bool = False, check: bool = True):
        self.degrees = tuple(int(x) for x in degrees)
        if list(self.degrees) != sorted(self.degrees):
            raise ValueError("basis must be sorted by degree")
        n = len(self.degrees)
        self.dim = n
        self.names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(n))
        if len(self.names) != n:
            raise ValueError("names length mismatch")
        self.d = d if d is not None else Matrix.zeros(n, n)
        if self.d.shape != (n, n):
            raise ValueError(f"differential must be {n}×{n}, got {self.d.shape}")
        table: dict[int, dict[int, dict[int, Fraction]]] = {}
        for (a, b), vec in (bracket or {}).items():
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"bracket index ({a}, {b}) out of range")
            clean = {c: Q(x) for c, x in vec.items() if Q(x)}
            for c in clean:
                if not 0 <= c < n:
                    raise ValueError(f"bracket output index {c} out of range")
            if clean:
                table.setdefault(a, {})[b] = clean
        if complete:
            for a in list(table):
                for b, vec in list(table[a].items()):
                    rev = table.setdefault(b, {})
                    if a not in rev:
                        s = -_sign(self.degrees[a], self.degrees[b])
                        rev[a] = {c: s * x for c, x in vec.items()}
        self.br = table
        self._dcols = [{i: x for i, x in enumerate(self.d.col(j)) if x} for j in range(n)]
        self._cache: dict = {}
        if check:
            res = check_dgla(self)
            if not res:
                raise DglaError(res)

    def __repr__(self) -> str:
        return f"Dgla(dims={self.graded_dims})"

    @property
    def graded_dims(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for g in self.degrees:
            out[g] = out.get(g, 0) + 1
        return out

    def indices(self, n: int) -> list[int]:
        return [i for i, g in enumerate(self.degrees) if g == n]

    def bracket_table(self) -> dict[tuple[int, int], dict[int, Fraction]]:
        return {(a, b): dict(v) for a, row in self.br.items() for b, v in row.items()}

    @property
    def complex(self) -> GradedComplex:
        if "complex" not in self._cache:
            if self.dim == 0:
                self._cache["complex"] = GradedComplex.zero()
            else:
                lo, hi = self.degrees[0], self.degrees[-1]
                dims = [len(self.indices(k)) for k in range(lo, hi + 1)]
                dmaps = {k: self.d.submatrix(self.indices(k + 1), self.indices(k)) for k in range(lo, hi)}
                self._cache["complex"] = GradedComplex(lo, dims, dmaps, check=False)
        return self._cache["complex"]

    # sparse arithmetic
    def _bracket_sparse(self, u: dict, v: dict) -> dict:
        out: dict[int, Fraction] = {}
        br = self.br
        for a, x in u.items():
            row = br.get(a)
            if not row:
                continue
            for b, y in v.items():
                vec = row.get(b)
                if not vec:
                    continue
                xy = x * y
                for c, z in vec.items():
                    w = out.get(c, 0) + xy * z
                    if w:
                        out[c] = w
                    else:
                        out.pop(c, None)
        return out

    def _d_sparse(self, u: dict) -> dict:
        out: dict[int, Fraction] = {}
        for j, x in u.items():
            for i, y in self._dcols[j].items():
                w = out.get(i, 0) + x * y
                if w:
                    out[i] = w
                else:
                    out.pop(i, None)
        return out

    def _dense(self, u: dict) -> tuple:
        v = [Fraction(0)] * self.dim
        for i, x in u.items():
            v[i] = x
        return tuple(v)

    @staticmethod
    def _sparse(v) -> dict:
        return {i: Q(x) for i, x in enumerate(v) if x}

    def bracket(self, u, v) -> tuple:
        return self._dense(self._bracket_sparse(self._sparse(u), self._sparse(v)))

    def diff(self, u) -> tuple:
        return self._dense(self._d_sparse(self._sparse(u)))

    def degree_of(self, v) -> int | None:
        """Degree of a nonzero homogeneous vector (None for zero); raises if inhomogeneous."""
        degs = {self.degrees[i] for i, x in enumerate(v) if x}
        if len(degs) > 1:
            raise ValueError("vector is not homogeneous")
        return degs.pop() if degs else None

    def ad_matrix(self, u) -> Matrix:
        su = self._sparse(u)
        cols = [self._dense(self._bracket_sparse(su, {j: Fraction(1)})) for j in range(self.dim)]
        return Matrix.from_columns(cols, self.dim)

    def subalgebra(self, basis: Matrix, names: Sequence[str] | None = None) -> "SubDgla":
        return SubDgla(self, basis, names)


class SubDgla(Dgla):
    """The sub-dgla spanned by homogeneous columns of ``basis``, re-expressed in that basis."""

    def __init__(self, parent: Dgla, basis: Matrix, names: Sequence[str] | None = None):
        cols = basis.columns()
        degs = []
        for v in cols:
            g = parent.degree_of(v)
            if g is None:
                raise ValueError("zero column in sub-dgla basis")
            degs.append(g)
        order = sorted(range(len(cols)), key=lambda k: degs[k])
        cols = [cols[k] for k in order]
        degs = [degs[k] for k in order]
        B = Matrix.from_columns(cols, parent.dim)
        if B.ncols and rank(B) != B.ncols:
            raise ValueError("sub-dgla basis is not independent")
        self.parent = parent
        self.inclusion = B
        n = B.ncols
        if n:
            dB = Matrix.from_columns([parent.diff(c) for c in cols], parent.dim)
            dsub = solve(B, dB)
            if dsub is None:
                raise ValueError("span is not closed under the differential")
        else:
            dsub = Matrix.zeros(0, 0)
        bracket = {}
        if n:
            prods = []
            keys = []
            for a in range(n):
                for b in range(n):
                    w = parent.bracket(cols[a], cols[b])
                    if any(w):
                        prods.append(w)
                        keys.append((a, b))
            if prods:
                coeffs = solve(B, Matrix.from_columns(prods, parent.dim))
                if coeffs is None:
                    raise ValueError("span is not closed under the bracket")
                for k, key in enumerate(keys):
                    bracket[key] = {c: x for c, x in enumerate(coeffs.col(k)) if x}
        super().__init__(degs, dsub, bracket, names, check=False)

    def include(self, v) -> tuple:
        return self.inclusion @ tuple(v)


def check_dgla(g: Dgla) -> CheckResult:
    """Exhaustive axiom check; the witness is the first failing basis tuple."""
    n, degs = g.dim, g.degrees
    for j in range(n):
        for i, x in g._dcols[j].items():
            if degs[i] != degs[j] + 1:
                return CheckResult(False, "degree", (j,), "d must raise degree by one")
    if not (g.d @ g.d).is_zero():
        j = next(j for j in range(n) if any((g.d @ g.d).col(j)))
        return CheckResult(False, "d²", (j,), "d∘d ≠ 0")
    for a, row in g.br.items():
        for b, vec in row.items():
            for c in vec:
                if degs[c] != degs[a] + degs[b]:
                    return CheckResult(False, "degree", (a, b), f"[e{a}, e{b}] has a component in degree {degs[c]}")
    e = [{i: Fraction(1)} for i in range(n)]
    for a in range(n):
        for b in range(a, n):
            ab = g._bracket_sparse(e[a], e[b])
            ba = g._bracket_sparse(e[b], e[a])
            s = -_sign(degs[a], degs[b])
            if ab != {c: s * x for c, x in ba.items()}:
                return CheckResult(False, "antisymmetry", (a, b), "")
    for a in range(n):
        for b in range(n):
            ab = g._bracket_sparse(e[a], e[b])
            lhs = g._d_sparse(ab)
            r1 = g._bracket_sparse(g._d_sparse(e[a]), e[b])
            r2 = g._bracket_sparse(e[a], g._d_sparse(e[b]))
            s = _sign(degs[a], 1)
            rhs = dict(r1)
            for c, x in r2.items():
                w = rhs.get(c, 0) + s * x
                if w:
                    rhs[c] = w
                else:
                    rhs.pop(c, None)
            if lhs != rhs:
                return CheckResult(False, "leibniz", (a, b), "")
    # [x,[y,z]] = [[x,y],z] + (−1)^{|x||y|} [y,[x,z]]
    for a in range(n):
        for b in range(n):
            ab = g._bracket_sparse(e[a], e[b])
            s = _sign(degs[a], degs[b])
            for c in range(n):
                lhs = g._bracket_sparse(e[a], g._bracket_sparse(e[b], e[c]))
                rhs = g._bracket_sparse(ab, e[c])
                t = g._bracket_sparse(e[b], g._bracket_sparse(e[a], e[c]))
                for k, x in t.items():
                    w = rhs.get(k, 0) + s * x
                    if w:
                        rhs[k] = w
                    else:
                        rhs.pop(k, None)
                if lhs != rhs:
                    return CheckResult(False, "jacobi", (a, b, c), "")
    return CheckResult.passed()


def check_dgla_map(g: Dgla, h: Dgla, M: Matrix) -> CheckResult:
    """M : g → h (columns are images of g's basis) is a degree-0 dgla morphism."""
    if M.shape != (h.dim, g.dim):
        return CheckResult(False, "shape", M.shape)
    for j in range(g.dim):
        for i in range(h.dim):
            if M[i, j] and h.degrees[i] != g.degrees[j]:
                return CheckResult(False, "degree", (j,))
    if M @ g.d != h.d @ M:
        j = next(j for j in range(g.dim) if (M @ g.d).col(j) != (h.d @ M).col(j))
        return CheckResult(False, "differential", (j,))
    cols = M.columns()
    for a in range(g.dim):
        for b in range(g.dim):
            if M @ g.bracket(unit_vector(g.dim, a), unit_vector(g.dim, b)) != h.bracket(cols[a], cols[b]):
                return CheckResult(False, "bracket", (a, b))
    return CheckResult.passed()


# ---------------------------------------------------------------------------
# constructions


def abelian_dgla(dims: Mapping[int, int], d: Mapping[int, Matrix] | None = None) -> Dgla:
    V = GradedComplex.from_dict(dims, d)
    return from_complex(V, {})


def from_complex(V: GradedComplex, bracket: Bracket, names=None, **kw) -> Dgla:
    degrees = [n for n in V.degrees for _ in range(V.dim(n))]
    off = offsets(V)
    N = len(degrees)
    rows = [[Fraction(0)] * N for _ in range(N)]
    for n in range(V.lo, V.hi):
        m = V.diff(n)
        for r in range(m.nrows):
            for c in range(m.ncols):
                rows[off[n + 1] + r][off[n] + c] = m.rows[r][c]
    return Dgla(degrees, Matrix(rows, N) if N else Matrix.zeros(0, 0), bracket, names, **kw)


class EndDgla(Dgla):
    """End*(V) with the Hom differential and the graded commutator.

    Basis: the matrix units of each Hom^n block, degree by degree.
    """

    def __init__(self, V: GradedComplex):
        H = hom_complex(V, V)
        C = H.complex
        self.V = V
        self.hom = H
        self.hom_offsets = offsets(C) if C.total_dim else {}
        units = []  # (degree n, source degree i, row r, col c)
        for n in C.degrees:
            for b in H.blocks.get(n, ()):
                for r in range(b.rows):
                    for c in range(b.cols):
                        units.append((n, b.source_degree, r, c))
        self.units = units
        index = {u: k for k, u in enumerate(units)}
        bracket: dict[tuple[int, int], dict[int, Fraction]] = {}
        # composition of units: (n1,i1,r1,c1)∘(n2,i2,r2,c2) = (n1+n2, i2, r1, c2) if i1 = i2+n2 and c1 = r2
        by_source: dict[tuple[int, int], list[int]] = {}
        for k, (n, i, r, c) in enumerate(units):
            by_source.setdefault((i, c), []).append(k)
        for k2, (n2, i2, r2, c2) in enumerate(units):
            for k1 in by_source.get((i2 + n2, r2), ()):
                n1, i1, r1, c1 = units[k1]
                k = index[(n1 + n2, i2, r1, c2)]
                # [u1, u2] gets +u1u2, [u2, u1] gets −(−1)^{n1 n2} u1u2
                _acc(bracket, (k1, k2), k, Fraction(1))
                _acc(bracket, (k2, k1), k, Fraction(-_sign(n1, n2)))
        degrees = [u[0] for u in units]
        N = len(units)
        rows = [[Fraction(0)] * N for _ in range(N)]
        for n in range(C.lo, C.hi):
            m = C.diff(n)
            for r in range(m.nrows):
                for c in range(m.ncols):
                    rows[self.hom_offsets[n + 1] + r][self.hom_offsets[n] + c] = m.rows[r][c]
        d = Matrix(rows, N) if N else Matrix.zeros(0, 0)
        names = [f"E{n}[{i}]({r},{c})" for n, i, r, c in units]
        super().__init__(degrees, d, bracket, names, check=False)

    def operator(self, vec) -> Matrix:
        """The element as a single matrix on ⊕V (sum over its homogeneous parts)."""
        N = self.V.total_dim
        total = Matrix.zeros(N, N)
        C = self.hom.complex
        for n in C.degrees:
            lo = self.hom_offsets[n]
            part = tuple(vec[lo:lo + C.dim(n)])
            if any(part):
                total = total + self.hom.total_matrix(n, part)
        return total

    def from_operator(self, M: Matrix, degrees: Sequence[int] | None = None) -> tuple:
        """Coordinates of the homogeneous components of M in the given degrees (all if None)."""
        C = self.hom.complex
        out = [Fraction(0)] * self.dim
        for n in C.degrees:
            if degrees is not None and n not in degrees:
                continue
            lo = self.hom_offsets[n]
            out[lo:lo + C.dim(n)] = self.hom.from_total_matrix(n, M)
        return tuple(out)


def _acc(table, key, k, x):
    row = table.setdefault(key, {})
    w = row.get(k, 0) + x
    if w:
        row[k] = w
    else:
        row.pop(k, None)


def end_dgla(V: GradedComplex) -> EndDgla:
    return EndDgla(V)


class TensorDgla(Dgla):
    """g ⊗ m_A with |x⊗a| = |x| + |a|.

    [x⊗a, y⊗b] = (−1)^{|a||y|} [x,y]⊗ab and d(x⊗a) = dx⊗a + (−1)^{|x|} x⊗d_A a.
    The ring is replaced by an adapted basis so ideal strata are coordinate blocks.
    """

    def __init__(self, g: Dgla, A: ArtinAlgebra):
        A = A.adapted()
        self.g, self.A = g, A
        pairs = [(x, a) for x in range(g.dim) for a in A.maximal_ideal]
        pairs.sort(key=lambda p: (g.degrees[p[0]] + A.degrees[p[1]], p[1], p[0]))
        self.pairs = pairs
        index = {p: k for k, p in enumerate(pairs)}
        self.index = index
        gd, ad = g.degrees, A.degrees
        bracket: dict[tuple[int, int], dict[int, Fraction]] = {}
        for k1, (x, a) in enumerate(pairs):
            row = g.br.get(x)
            if not row:
                continue
            for k2, (y, b) in enumerate(pairs):
                xy = row.get(y)
                if not xy:
                    continue
                ab = A.mult.get((a, b))
                if not ab:
                    continue
                s = _sign(ad[a], gd[y])
                out = {}
                for z, cz in xy.items():
                    for c, cc in ab.items():
                        if c == 0:
                            continue
                        out[index[(z, c)]] = out.get(index[(z, c)], 0) + s * cz * cc
                out = {k: v for k, v in out.items() if v}
                if out:
                    bracket[(k1, k2)] = out
        N = len(pairs)
        rows = [[Fraction(0)] * N for _ in range(N)]
        for k, (x, a) in enumerate(pairs):
            for i, c in g._dcols[x].items():
                rows[index[(i, a)]][k] += c
            s = _sign(gd[x], 1)
            for b in A.maximal_ideal:
                c = A.d[b, a]
                if c:
                    rows[index[(x, b)]][k] += s * c
        names = [f"{g.names[x]}⊗{A.names[a]}" for x, a in pairs]
        super().__init__([gd[x] + ad[a] for x, a in pairs], Matrix(rows, N) if N else Matrix.zeros(0, 0),
                         bracket, names, check=False)
        self.stratum = tuple(A.stratum_of[a] for _, a in pairs)

    def element(self, terms: Mapping[tuple[int, int], object]) -> tuple:
        """Vector from {(g index, ring index): coefficient}; ring indices refer to the adapted ring."""
        v = [Fraction(0)] * self.dim
        for key, c in terms.items():
            v[self.index[key]] += Q(c)
        return tuple(v)

    def stratum_indices(self, k: int, degree: int | None = None) -> list[int]:
        return [i for i in range(self.dim) if self.stratum[i] == k and (degree is None or self.degrees[i] == degree)]

    def truncate_to(self, v, k: int) -> tuple:
        """Zero out components in strata deeper than k."""
        return tuple(x if self.stratum[i] <= k else Fraction(0) for i, x in enumerate(v))


def tensor_with_ideal(g: Dgla, A: ArtinAlgebra) -> TensorDgla:
    key = ("tensor", id(A), A.names, A.degrees)
    cached = g._cache.get(key)
    if cached is None or cached[0] is not A:
        T = TensorDgla(g, A)
        g._cache[key] = (A, T)
        return T
    return cached[1]


# ---------------------------------------------------------------------------
# Maurer-Cartan and gauge


def _require_degree(T: Dgla, v, n: int, what: str):
    if len(v) != T.dim:
        raise ValueError(f"{what} has length {len(v)}, expected {T.dim}")
    g = T.degree_of(v)
    if g is not None and g != n:
        raise ValueError(f"{what} must have total degree {n}, got {g}")


def mc_residual(g: Dgla, A: ArtinAlgebra, x) -> tuple:
    """dx + ½[x,x] in g ⊗ m_A."""
    T = tensor_with_ideal(g, A)
    x = tuple(Q(c) for c in x)
    _require_degree(T, x, 1, "MC candidate")
    sx = T._sparse(x)
    out = T._d_sparse(sx)
    for k, v in T._bracket_sparse(sx, sx).items():
        w = out.get(k, 0) + v / 2
        if w:
            out[k] = w
        else:
            out.pop(k, None)
    return T._dense(out)


def is_mc(g: Dgla, A: ArtinAlgebra, x) -> bool:
    return not any(mc_residual(g, A, x))


def gauge_act(g: Dgla, A: ArtinAlgebra, a, x) -> tuple:
    """e^a * x = x + Σ_{n≥0} (−ad_a)^n (da − [a,x]) / (n+1)!.

    At square-zero coefficients this is x + da, the first-order action
    (Id + aε, xε) ↦ (x + da)ε.  It is a right action:
    e^b * (e^a * x) = e^{BCH(a,b)} * x.
    """
    T = tensor_with_ideal(g, A)
    a = tuple(Q(c) for c in a)
    x = tuple(Q(c) for c in x)
    _require_degree(T, a, 0, "gauge element")
    _require_degree(T, x, 1, "MC candidate")
    sa, sx = T._sparse(a), T._sparse(x)
    term = T._d_sparse(sa)
    for k, v in T._bracket_sparse(sa, sx).items():
        _sub_into(term, k, v)
    total = dict(sx)
    n = 0
    while term:
        f = Fraction(1, factorial(n + 1))
        for k, v in term.items():
            _add_into(total, k, f * v)
        nxt = {}
        for k, v in T._bracket_sparse(sa, term).items():
            nxt[k] = -v
        term = nxt
        n += 1
        if n > T.dim + 2:
            raise RuntimeError("ad_a is not nilpotent; is the ring Artinian?")
    return T._dense(total)


def _add_into(d: dict, k, v):
    w = d.get(k, 0) + v
    if w:
        d[k] = w
    else:
        d.pop(k, None)


def _sub_into(d: dict, k, v):
    _add_into(d, k, -v)


def bch(g: Dgla, A: ArtinAlgebra, a, b) -> tuple:
    """log(e^a e^b) in the nilpotent Lie algebra (g ⊗ m_A)^0 by Dynkin's formula."""
    T = tensor_with_ideal(g, A)
    a = T._sparse(tuple(Q(c) for c in a))
    b = T._sparse(tuple(Q(c) for c in b))
    s = A.adapted().nilpotency_index
    letters = {0: a, 1: b}
    total: dict = {}
    # words of total length N < s contribute; longer brackets vanish in m^s = 0
    for N in range(1, s):
        for word in itertools.product((0, 1), repeat=N):
            val = dict(letters[word[-1]])
            for w in reversed(word[:-1]):
                val = T._bracket_sparse(letters[w], val)
                if not val:
                    break
            if not val:
                continue
            coef = _dynkin_coefficient(word)
            if coef:
                for k, v in val.items():
                    _add_into(total, k, coef * v)
    return T._dense(total)


def _dynkin_coefficient(word: tuple[int, ...]) -> Fraction:
    """Coefficient of the right-nested bracket of ``word`` in Dynkin's BCH series.

    Sums over splittings of the word into blocks X^{r_i} Y^{s_i} with r_i + s_i > 0.
    """
    N = len(word)
    total = Fraction(0)

    def splittings(pos):
        if pos == N:
            yield []
            return
        for end in range(pos + 1, N + 1):
            seg = word[pos:end]
            if list(seg) == sorted(seg):
                r = seg.count(0)
                for rest in splittings(end):
                    yield [(r, len(seg) - r)] + rest

    for bl in splittings(0):
        n = len(bl)
        denom = 1
        for r, s in bl:
            denom *= factorial(r) * factorial(s)
        total += Fraction((-1) ** (n - 1), n * N * denom)
    return total


# ---------------------------------------------------------------------------
# adic lifting


@dataclass(frozen=True)
class Obstruction:
    stratum: int
    representative: tuple  # vector in T of total degree 2
    class_coords: tuple  # coordinates in H²(g ⊗ gr^k)
    partial: tuple  # the lift up to stratum k − 1 that failed to extend

    @property
    def nonzero(self) -> bool:
        return any(self.class_coords)


@dataclass(frozen=True)
class MCFamily:
    """base + span(directions) ⊆ MC_g(A); directions live in the top stratum."""

    base: tuple
    directions: Matrix

    @property
    def dim(self) -> int:
        return self.directions.ncols


@dataclass
class MCLiftResult:
    ring: ArtinAlgebra
    tensor: TensorDgla
    families: list[MCFamily] = field(default_factory=list)
    obstructions: list[Obstruction] = field(default_factory=list)
    exact: bool = False  # True when the union of families is the whole MC set


class StratumSolver:
    """Linear algebra of g ⊗ gr^k in degrees 0, 1, 2, 3 for one stratum k."""

    def __init__(self, T: TensorDgla, k: int):
        self.T, self.k = T, k
        self.idx = {n: T.stratum_indices(k, n) for n in (0, 1, 2, 3)}
        self.L = {n: T.d.submatrix(self.idx[n + 1], self.idx[n]) for n in (0, 1, 2)}

    def restrict(self, v, n: int) -> tuple:
        return tuple(v[i] for i in self.idx[n])

    def embed(self, local, n: int) -> tuple:
        out = [Fraction(0)] * self.T.dim
        for i, x in zip(self.idx[n], local):
            out[i] = x
        return tuple(out)

    def embed_matrix(self, M: Matrix, n: int) -> Matrix:
        return Matrix.from_columns([self.embed(c, n) for c in M.columns()], self.T.dim)

    def solve(self, n: int, rhs) -> tuple | None:
        """Some local y with L_n y = rhs (rhs local in degree n+1)."""
        L = self.L[n]
        if not self.idx[n]:
            return () if not any(rhs) else None
        if not self.idx[n + 1]:
            return tuple(Fraction(0) for _ in self.idx[n])
        return solve_vector(L, rhs)

    def kernel(self, n: int) -> Matrix:
        if not self.idx[n]:
            return Matrix.zeros(0, 0)
        if not self.idx[n + 1]:
            return Matrix.identity(len(self.idx[n]))
        return kernel_basis(self.L[n])

    def cohomology(self, n: int) -> SubquotientSpace:
        m = len(self.idx[n])
        Z = self.kernel(n) if m else Matrix.zeros(0, 0)
        if n - 1 in self.L and self.idx[n - 1] and m:
            B = self.L[n - 1]
        else:
            B = Matrix.zeros(m, 0)
        return SubquotientSpace.make(Z if m else Matrix.zeros(0, 0), B)


def _strata_solvers(T: TensorDgla) -> list[StratumSolver]:
    if "solvers" not in T._cache:
        s = T.A.nilpotency_index
        T._cache["solvers"] = [StratumSolver(T, k) for k in range(1, s)]
    return T._cache["solvers"]


def extend_mc(g: Dgla, A: ArtinAlgebra, partial, k: int, choice=None):
    """Extend an MC element mod m^k to stratum k.

    Returns (particular + choice, kernel directions) or an Obstruction.
    ``choice`` is a local vector in the stratum-k degree-1 kernel coordinates.
    """
    T = tensor_with_ideal(g, A)
    S = _strata_solvers(T)[k - 1]
    R = mc_residual(g, A, partial)
    rhs = S.restrict(R, 2)
    y = S.solve(1, tuple(-c for c in rhs))
    if y is None:
        H = S.cohomology(2)
        return Obstruction(k, S.embed(rhs, 2), H.classify(rhs), tuple(partial))
    K = S.kernel(1)
    x = tuple(p + q for p, q in zip(partial, S.embed(y, 1)))
    if choice is not None:
        x = tuple(p + q for p, q in zip(x, S.embed(K @ tuple(choice), 1)))
    return x, S.embed_matrix(K, 1)


def mc_lift(g: Dgla, A: ArtinAlgebra, seeds: Sequence | None = None,
            choices: Mapping[int, Sequence] | None = None) -> MCLiftResult:
    """Adic lifting through the strata m^k / m^{k+1}.

    For square-zero rings the result is exact: one family Z¹(g ⊗ m). For
    deeper rings, ``seeds`` are first-stratum MC elements (default: a basis
    of them plus zero); each seed is lifted stratum by stratum using the
    particular solution (plus ``choices[k]`` kernel coordinates if given),
    yielding a family over the top stratum or an obstruction.
    """
    T = tensor_with_ideal(g, A)
    solvers = _strata_solvers(T)
    res = MCLiftResult(T.A, T)
    zero = zero_vector(T.dim)
    if len(solvers) == 0:
        res.families.append(MCFamily(zero, Matrix.zeros(T.dim, 0)))
        res.exact = True
        return res
    if len(solvers) == 1:
        out = extend_mc(g, A, zero, 1)
        base, K = out
        res.families.append(MCFamily(base, K))
        res.exact = True
        return res
    first = solvers[0]
    if seeds is None:
        K1 = first.kernel(1)
        seeds = [zero] + [first.embed(c, 1) for c in K1.columns()]
    choices = choices or {}
    top = len(solvers)
    for seed in seeds:
        seed = tuple(Q(c) for c in seed)
        if any(T.stratum[i] != 1 for i, c in enumerate(seed) if c):
            raise ValueError("seeds must live in the first stratum")
        R = mc_residual(g, A, seed)
        if any(first.restrict(R, 2)):
            raise ValueError("seed is not MC modulo m²")
        x = seed
        failed = None
        for k in range(2, top + 1):
            out = extend_mc(g, A, x, k, choices.get(k) if k < top else None)
            if isinstance(out, Obstruction):
                failed = out
                break
            x, K = out
        if failed is not None:
            res.obstructions.append(failed)
        else:
            res.families.append(MCFamily(x, K))
    return res


# ---------------------------------------------------------------------------
# gauge equivalence


@dataclass(frozen=True)
class GaugeDecision:
    equivalent: bool
    witness: tuple | None
    certified: bool  # False only for a negative answer beyond the exact range


def gauge_equivalent(g: Dgla, A: ArtinAlgebra, x0, x1) -> GaugeDecision:
    """Decide whether some a ∈ (g⊗m)^0 has e^a * x0 = x1.

    Strata are solved in order; at stratum k the correction a_k is solved
    jointly with the free degree-0 cycle directions left over at stratum k−1.
    This is exact up to nilpotency index 3; beyond it a negative answer is
    reported as uncertified.  Positive answers always carry a verified witness.
    """
    T = tensor_with_ideal(g, A)
    x0 = tuple(Q(c) for c in x0)
    x1 = tuple(Q(c) for c in x1)
    for name, x in (("x0", x0), ("x1", x1)):
        if not is_mc(g, A, x):
            raise ValueError(f"{name} is not a Maurer-Cartan element")
    solvers = _strata_solvers(T)
    zero = zero_vector(T.dim)
    if x0 == x1:
        return GaugeDecision(True, zero, True)
    exact = len(solvers) <= 2
    a = zero
    free = Matrix.zeros(T.dim, 0)  # degree-0 cycle directions from the previous stratum
    for k, S in enumerate(solvers, start=1):
        base = S.restrict(_diff(gauge_act(g, A, a, x0), x1), 1)
        # linear response of the stratum-k residual to the free directions
        cols = []
        for j in range(free.ncols):
            moved = gauge_act(g, A, _add(a, free.col(j)), x0)
            cols.append(S.restrict(_diff(moved, gauge_act(g, A, a, x0)), 1))
        m0 = len(S.idx[0])
        L0 = S.L[0] if m0 else Matrix.zeros(len(S.idx[1]), 0)
        nloc = len(S.idx[1])
        if free.ncols and _nonlinear(g, A, a, x0, free, S):
            exact = False
        M = hstack(L0, Matrix.from_columns(cols, nloc)) if cols else L0
        if M.ncols == 0:
            if any(base):
                return GaugeDecision(False, None, exact)
            free = Matrix.zeros(T.dim, 0)
            continue
        sol = solve_vector(M, tuple(-c for c in base)) if nloc else tuple(Fraction(0) for _ in range(M.ncols))
        if sol is None:
            return GaugeDecision(False, None, exact)
        ak = S.embed(sol[:m0], 0)
        shift_free = free @ tuple(sol[m0:]) if free.ncols else zero
        a = _add(_add(a, shift_free), ak)
        free = S.embed_matrix(S.kernel(0), 0) if m0 else Matrix.zeros(T.dim, 0)
    if gauge_act(g, A, a, x0) != x1:
        return GaugeDecision(False, None, False)
    return GaugeDecision(True, a, True)


def _nonlinear(g, A, a, x0, free, S) -> bool:
    """Whether the stratum response to the free directions fails to be affine-linear."""
    base = S.restrict(gauge_act(g, A, a, x0), 1)
    resp = []
    for j in range(free.ncols):
        resp.append(_diff(S.restrict(gauge_act(g, A, _add(a, free.col(j)), x0), 1), base))
    for j in range(free.ncols):
        for l in range(j, free.ncols):
            both = S.restrict(gauge_act(g, A, _add(_add(a, free.col(j)), free.col(l)), x0), 1)
            if _diff(both, base) != _add(resp[j], resp[l]):
                return True
    return False


def _add(u, v) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def _diff(u, v) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


# ---------------------------------------------------------------------------
# Deligne groupoid tangent cohomology


@dataclass(frozen=True)
class DeligneTangent:
    j: int
    dim: int
    basis: Matrix  # representatives in g^{j+1}
    direct: int
    groupoid: int
    via_cone: int | None
    agree: bool


def orbit_space_dim(g: Dgla, A: ArtinAlgebra) -> tuple[int, Matrix]:
    """dim MC_g(A) / gauge at a square-zero ring, from the solver and the action itself."""
    T = tensor_with_ideal(g, A)
    lift = mc_lift(g, A)
    fam = lift.families[0]
    zero = zero_vector(T.dim)
    degree0 = [unit_vector(T.dim, i) for i in range(T.dim) if T.degrees[i] == 0]
    # the action is by translation at square zero; read off the translation vectors
    moves = []
    for a in degree0:
        moves.append(_diff(gauge_act(g, A, a, zero), zero))
        for c in fam.directions.columns():
            if _diff(gauge_act(g, A, a, c), c) != moves[-1]:
                raise AssertionError("gauge action is not a translation at square-zero coefficients")
    M = Matrix.from_columns(moves, T.dim) if moves else Matrix.zeros(T.dim, 0)
    return rank(fam.directions) - (rank(M) if M.ncols else 0), M


def deligne_tangent(g: Dgla, j: int) -> DeligneTangent:
    """H^j of the Deligne groupoid's tangent complex, computed two (or three) ways."""
    if j < -1:
        raise ValueError("j must be ≥ −1")
    C = g.complex
    direct = betti(C, j + 1)
    H = cohomology(C, j + 1)
    reps = H.reps
    via_cone = None
    if j == -1:
        A = dual_numbers()
        T = tensor_with_ideal(g, A)
        zero = zero_vector(T.dim)
        idx0 = [i for i in range(T.dim) if T.degrees[i] == 0]
        cols = [_diff(gauge_act(g, A, unit_vector(T.dim, i), zero), zero) for i in idx0]
        act = Matrix.from_columns(cols, T.dim)
        stab = kernel_basis(act) if idx0 else Matrix.zeros(0, 0)
        # infinitesimal gauges that are themselves d of degree −1 elements act trivially up to homotopy
        idxm = [i for i in range(T.dim) if T.degrees[i] == -1]
        homot = T.d.submatrix(idx0, idxm) if idxm and idx0 else Matrix.zeros(len(idx0), 0)
        groupoid = (stab.ncols if idx0 else 0) - (rank(homot) if homot.ncols else 0)
    else:
        groupoid, _ = orbit_space_dim(g, square_zero_shift(j))
        if j >= 1:
            A = cone_coefficient(j)
            Tc = tensor_with_ideal(g, A)
            fam = mc_lift(g, A).families[0]
            P = cone_surjection(j)
            Ts = tensor_with_ideal(g, square_zero_shift(j))
            images = []
            for c in fam.directions.columns():
                img = [Fraction(0)] * Ts.dim
                for k, (x, a) in enumerate(Tc.pairs):
                    if c[k]:
                        for b in range(1, Ts.A.dim):
                            if P[b, a]:
                                img[Ts.index[(x, b)]] += c[k] * P[b, a]
                images.append(tuple(img))
            Zs = mc_lift(g, square_zero_shift(j)).families[0].directions
            im = Matrix.from_columns(images, Ts.dim) if images else Matrix.zeros(Ts.dim, 0)
            via_cone = rank(Zs) - (rank(im) if im.ncols else 0)
    agree = direct == groupoid and (via_cone is None or via_cone == direct)
    return DeligneTangent(j, direct, reps, direct, groupoid, via_cone, agree)


# ---------------------------------------------------------------------------
# canned examples


def obstructed_dgla() -> Dgla:
    """g¹ = k·e, g² = k·f, [e,e] = f, d = 0: e⊗t is first-order MC but obstructed at t²."""
    return Dgla([1, 2], None, {(0, 0): {1: 1}}, ["e", "f"])
