"""Truncated simplicial vector spaces and the (affine) Dold-Kan correspondence.

Simplicial objects are stored up to a level N.  Chain complexes here are
non-negatively graded with boundary δ_n : V_n → V_{n−1}; ``to_cochain``
reindexes chain degree n as cochain degree −n.

Conventions:

* normalization uses NV_n = ⋂_{i<n} ker ∂_i with δ_n = (−1)^n ∂_n;
* denormalization KV_n = ⊕_{η:[n]↠[p]} V_p, where an injection that
  misses only the last vertex p acts by (−1)^p d_p.  With this sign
  N(K(V)) = V holds on the nose.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .complexes import CheckResult, GradedComplex, SubquotientSpace, cohomology
from .linalg import (
    Matrix,
    block_diag,
    column_basis,
    hstack,
    inverse,
    kernel_basis,
    kron,
    rank,
    solve,
    vstack,
)


class SimplicialError(ValueError):
    def __init__(self, result: CheckResult):
        super().__init__(f"simplicial identity fails: {result.reason} {result.witness}")
        self.result = result


# ---------------------------------------------------------------------------
# chain complexes


class ChainComplexNN:
    """Chain complex V_0 ← V_1 ← ⋯ ← V_L; ``d[n]`` : V_n → V_{n−1} for n ≥ 1."""

    def __init__(self, dims: Sequence[int], d: dict[int, Matrix] | None = None, *, check: bool = True):
        self.dims = tuple(int(x) for x in dims)
        self.top = len(self.dims) - 1
        d = dict(d or {})
        full = {}
        for n in range(1, self.top + 1):
            m = d.pop(n, None)
            shape = (self.dims[n - 1], self.dims[n])
            m = Matrix.zeros(*shape) if m is None else m
            if m.shape != shape:
                raise ValueError(f"δ_{n} has shape {m.shape}, expected {shape}")
            full[n] = m
        for n, m in d.items():
            if not m.is_zero():
                raise ValueError(f"boundary δ_{n} outside levels 1..{self.top}")
        self.d = full
        if check:
            for n in range(2, self.top + 1):
                if not (full[n - 1] @ full[n]).is_zero():
                    raise ValueError(f"δ_{n - 1}∘δ_{n} ≠ 0")

    def dim(self, n: int) -> int:
        return self.dims[n] if 0 <= n <= self.top else 0

    def boundary(self, n: int) -> Matrix:
        if 1 <= n <= self.top:
            return self.d[n]
        return Matrix.zeros(self.dim(n - 1), self.dim(n))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainComplexNN):
            return NotImplemented
        top = max(self.top, other.top)
        return all(self.dim(n) == other.dim(n) for n in range(top + 1)) and all(
            self.boundary(n) == other.boundary(n) for n in range(1, top + 1))

    def __repr__(self) -> str:
        return f"ChainComplexNN(dims={list(self.dims)})"

    def truncate(self, L: int) -> "ChainComplexNN":
        return ChainComplexNN(self.dims[:L + 1], {n: m for n, m in self.d.items() if n <= L}, check=False)

    def to_cochain(self) -> GradedComplex:
        if not self.dims:
            return GradedComplex.zero()
        return GradedComplex(-self.top, list(reversed(self.dims)),
                             {-n: self.d[n] for n in range(1, self.top + 1)}, check=False)

    def homology(self, n: int) -> SubquotientSpace:
        return cohomology(self.to_cochain(), -n)


def chain_tensor(V: ChainComplexNN, W: ChainComplexNN, top: int | None = None) -> tuple[ChainComplexNN, dict]:
    """V ⊗ W with δ(x⊗y) = δx⊗y + (−1)^p x⊗δy.

    Degree n is ⊕_{p+q=n} V_p ⊗ W_q, p ascending; returns the complex and
    the offset of each (p, q) block.
    """
    if top is None:
        top = V.top + W.top
    offs: dict[tuple[int, int], int] = {}
    dims = []
    for n in range(top + 1):
        off = 0
        for p in range(n + 1):
            q = n - p
            offs[(p, q)] = off
            off += V.dim(p) * W.dim(q)
        dims.append(off)
    d = {}
    for n in range(1, top + 1):
        rows = [[Fraction(0)] * dims[n] for _ in range(dims[n - 1])]
        for p in range(n + 1):
            q = n - p
            if not V.dim(p) * W.dim(q):
                continue
            src = offs[(p, q)]
            if p >= 1:
                _place(rows, kron(V.boundary(p), Matrix.identity(W.dim(q))), offs[(p - 1, q)], src)
            if q >= 1:
                sign = -1 if p % 2 else 1
                _place(rows, kron(Matrix.identity(V.dim(p)), W.boundary(q)).scale(sign), offs[(p, q - 1)], src)
        d[n] = Matrix(rows, dims[n]) if rows else Matrix.zeros(0, dims[n])
    return ChainComplexNN(dims, d), offs


def _place(rows, M: Matrix, r0: int, c0: int):
    for r in range(M.nrows):
        row = rows[r0 + r]
        for c, x in enumerate(M.rows[r]):
            if x:
                row[c0 + c] += x


# ---------------------------------------------------------------------------
# simplicial vector spaces


class SimplicialVectorSpace:
    """Levels 0..N with faces[n][i] : V_n → V_{n−1} and degens[n][j] : V_n → V_{n+1}."""

    def __init__(self, dims: Sequence[int], faces: dict[int, Sequence[Matrix]],
                 degens: dict[int, Sequence[Matrix]], *, check: bool = True):
        self.dims = tuple(dims)
        self.N = len(self.dims) - 1
        self.faces = {n: tuple(faces[n]) for n in range(1, self.N + 1)}
        self.degens = {n: tuple(degens[n]) for n in range(0, self.N)}
        for n in range(1, self.N + 1):
            if len(self.faces[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} faces")
            for m in self.faces[n]:
                if m.shape != (self.dims[n - 1], self.dims[n]):
                    raise ValueError(f"face at level {n} has shape {m.shape}")
        for n in range(self.N):
            if len(self.degens[n]) != n + 1:
                raise ValueError(f"level {n} needs {n + 1} degeneracies")
            for m in self.degens[n]:
                if m.shape != (self.dims[n + 1], self.dims[n]):
                    raise ValueError(f"degeneracy at level {n} has shape {m.shape}")
        if check:
            res = check_simplicial(self)
            if not res:
                raise SimplicialError(res)

    def face(self, n: int, i: int) -> Matrix:
        return self.faces[n][i]

    def degen(self, n: int, j: int) -> Matrix:
        return self.degens[n][j]

    def __repr__(self) -> str:
        return f"SimplicialVectorSpace(dims={list(self.dims)})"

    def conjugate(self, g: Sequence[Matrix]) -> "SimplicialVectorSpace":
        """Change basis on each level by the invertible g[n]."""
        ginv = [inverse(m) for m in g]
        faces = {n: [g[n - 1] @ f @ ginv[n] for f in self.faces[n]] for n in self.faces}
        degens = {n: [g[n + 1] @ s @ ginv[n] for s in self.degens[n]] for n in self.degens}
        return SimplicialVectorSpace(self.dims, faces, degens, check=False)

    def tensor(self, other: "SimplicialVectorSpace") -> "SimplicialVectorSpace":
        N = min(self.N, other.N)
        dims = [self.dims[n] * other.dims[n] for n in range(N + 1)]
        faces = {n: [kron(self.faces[n][i], other.faces[n][i]) for i in range(n + 1)] for n in range(1, N + 1)}
        degens = {n: [kron(self.degens[n][j], other.degens[n][j]) for j in range(n + 1)] for n in range(N)}
        return SimplicialVectorSpace(dims, faces, degens, check=False)

    def truncate(self, N: int) -> "SimplicialVectorSpace":
        return SimplicialVectorSpace(self.dims[:N + 1], {n: self.faces[n] for n in range(1, N + 1)},
                                     {n: self.degens[n] for n in range(N)}, check=False)


def check_simplicial(S: SimplicialVectorSpace) -> CheckResult:
    N = S.N
    for n in range(2, N + 1):
        for j in range(n + 1):
            for i in range(j):
                if S.face(n - 1, i) @ S.face(n, j) != S.face(n - 1, j - 1) @ S.face(n, i):
                    return CheckResult(False, "face-face", (n, i, j), "∂_i∂_j ≠ ∂_{j−1}∂_i")
    for n in range(N - 1):
        for j in range(n + 1):
            for i in range(j + 1):
                if S.degen(n + 1, i) @ S.degen(n, j) != S.degen(n + 1, j + 1) @ S.degen(n, i):
                    return CheckResult(False, "degen-degen", (n, i, j), "σ_iσ_j ≠ σ_{j+1}σ_i")
    for n in range(N):
        for j in range(n + 1):
            for i in range(n + 2):
                lhs = S.face(n + 1, i) @ S.degen(n, j)
                if i < j:
                    rhs = S.degen(n - 1, j - 1) @ S.face(n, i)
                elif i in (j, j + 1):
                    rhs = Matrix.identity(S.dims[n])
                else:
                    rhs = S.degen(n - 1, j) @ S.face(n, i - 1)
                if lhs != rhs:
                    return CheckResult(False, "face-degen", (n, i, j), "∂_iσ_j identity fails")
    return CheckResult.passed()


def constant_simplicial(dim: int, N: int) -> SimplicialVectorSpace:
    I = Matrix.identity(dim)
    return SimplicialVectorSpace([dim] * (N + 1), {n: [I] * (n + 1) for n in range(1, N + 1)},
                                 {n: [I] * (n + 1) for n in range(N)})


# ---------------------------------------------------------------------------
# normalization


@dataclass(frozen=True)
class Normalization:
    """N(S) together with the inclusions NV_n ⊆ V_n and projections along degeneracies."""

    complex: ChainComplexNN
    basis: tuple[Matrix, ...]  # basis[n]: columns spanning NV_n inside V_n
    degenerate: tuple[Matrix, ...]  # basis of the degenerate subspace D_n
    projection: tuple[Matrix, ...]  # V_n → NV_n coordinates, killing D_n


def normalization(S: SimplicialVectorSpace) -> Normalization:
    bases, degs, projs = [], [], []
    for n in range(S.N + 1):
        dim = S.dims[n]
        if n == 0:
            B = Matrix.identity(dim)
        elif dim == 0:
            B = Matrix.zeros(0, 0)
        else:
            B = kernel_basis(vstack(*(S.face(n, i) for i in range(n)), ncols=dim))
        bases.append(B)
        if n == 0 or dim == 0:
            D = Matrix.zeros(dim, 0)
        else:
            cols = hstack(*(S.degen(n - 1, j) for j in range(n)), nrows=dim)
            D = column_basis(cols) if cols.ncols else Matrix.zeros(dim, 0)
        degs.append(D)
        if B.ncols + D.ncols != dim:
            raise SimplicialError(CheckResult(False, "splitting", (n,), "NV_n ⊕ D_n ≠ V_n"))
        if dim:
            inv = inverse(hstack(B, D)) if B.ncols + D.ncols else Matrix.zeros(0, 0)
            projs.append(inv.submatrix(range(B.ncols), range(dim)))
        else:
            projs.append(Matrix.zeros(0, 0))
    d = {}
    for n in range(1, S.N + 1):
        sign = -1 if n % 2 else 1
        if bases[n].ncols == 0:
            d[n] = Matrix.zeros(bases[n - 1].ncols, 0)
            continue
        image = S.face(n, n) @ bases[n]
        if bases[n - 1].ncols == 0:
            if not image.is_zero():
                raise SimplicialError(CheckResult(False, "normalization", (n,)))
            d[n] = Matrix.zeros(0, bases[n].ncols)
            continue
        X = solve(bases[n - 1], image)
        if X is None:
            raise SimplicialError(CheckResult(False, "normalization", (n,), "∂_n(NV_n) ⊄ NV_{n−1}"))
        d[n] = X.scale(sign)
    C = ChainComplexNN([b.ncols for b in bases], d)
    return Normalization(C, tuple(bases), tuple(degs), tuple(projs))


def normalize(S: SimplicialVectorSpace) -> ChainComplexNN:
    return normalization(S).complex


# ---------------------------------------------------------------------------
# denormalization


@lru_cache(maxsize=None)
def surjections(n: int) -> tuple[tuple[int, ...], ...]:
    """Monotone surjections [n] ↠ [p] as value tuples, p ascending then lexicographic."""
    out = []
    for p in range(n + 1):
        for steps in itertools.combinations(range(n), p):
            vals = [0]
            for k in range(n):
                vals.append(vals[-1] + (1 if k in steps else 0))
            out.append(tuple(vals))
    out.sort(key=lambda t: (t[-1], t))
    return tuple(out)


def _coface(n: int, i: int) -> tuple[int, ...]:
    """δ^i : [n−1] → [n] missing i."""
    return tuple(k if k < i else k + 1 for k in range(n))


def _codegen(n: int, j: int) -> tuple[int, ...]:
    """s^j : [n+1] → [n] hitting j twice."""
    return tuple(k if k <= j else k - 1 for k in range(n + 2))


def _epi_mono(f: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    image = sorted(set(f))
    pos = {v: k for k, v in enumerate(image)}
    return tuple(pos[v] for v in f), tuple(image)


def _k_matrix(V: ChainComplexNN, n: int, m: int, alpha: tuple[int, ...]) -> Matrix:
    """K(α) : KV_n → KV_m for α : [m] → [n]."""
    src, tgt = surjections(n), surjections(m)
    soff, toff = _summand_offsets(V, src), _summand_offsets(V, tgt)
    tindex = {eta: k for k, eta in enumerate(tgt)}
    rows = [[Fraction(0)] * soff[-1] for _ in range(toff[-1])]
    for k, eta in enumerate(src):
        p = eta[-1]
        if V.dim(p) == 0:
            continue
        comp = tuple(eta[a] for a in alpha)
        eta2, eps = _epi_mono(comp)
        q = len(eps) - 1
        if q == p:
            block = Matrix.identity(V.dim(p))
        elif q == p - 1 and eps == tuple(range(p)):
            block = V.boundary(p).scale(-1 if p % 2 else 1)
        else:
            continue
        t = tindex[eta2]
        _place(rows, block, toff[t], soff[k])
    return Matrix(rows, soff[-1]) if rows else Matrix.zeros(0, soff[-1])


def _summand_offsets(V: ChainComplexNN, etas) -> list[int]:
    out = [0]
    for eta in etas:
        out.append(out[-1] + V.dim(eta[-1]))
    return out


def denormalize(V: ChainComplexNN, N: int = 4) -> SimplicialVectorSpace:
    if N < 0:
        raise ValueError("truncation level must be ≥ 0")
    dims = [sum(comb(n, k) * V.dim(k) for k in range(n + 1)) for n in range(N + 1)]
    faces = {n: [_k_matrix(V, n, n - 1, _coface(n, i)) for i in range(n + 1)] for n in range(1, N + 1)}
    degens = {n: [_k_matrix(V, n, n + 1, _codegen(n, j)) for j in range(n + 1)] for n in range(N)}
    return SimplicialVectorSpace(dims, faces, degens, check=False)


def denormalized_dim(V: ChainComplexNN, n: int) -> int:
    return sum(comb(n, k) * V.dim(k) for k in range(n + 1))


# ---------------------------------------------------------------------------
# Eilenberg-Zilber and Alexander-Whitney


@dataclass(frozen=True)
class Shuffle:
    mu: tuple[int, ...]
    nu: tuple[int, ...]
    sign: int


def shuffles(p: int, q: int) -> list[Shuffle]:
    out = []
    for mu in itertools.combinations(range(p + q), p):
        nu = tuple(k for k in range(p + q) if k not in mu)
        perm = list(mu) + list(nu)
        inversions = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
        out.append(Shuffle(tuple(mu), nu, -1 if inversions % 2 else 1))
    return out


def _degeneracy_word(S: SimplicialVectorSpace, level: int, word: Sequence[int]) -> Matrix:
    """s_{w_k}∘⋯∘s_{w_1} starting at ``level`` (s_{w_1} applied first)."""
    M = Matrix.identity(S.dims[level])
    for j in word:
        M = S.degen(level, j) @ M
        level += 1
    return M


class TensorPair:
    """A, B and A⊗B with their normalizations, shared by the EZ and AW maps."""

    def __init__(self, A: SimplicialVectorSpace, B: SimplicialVectorSpace):
        self.A, self.B = A, B
        self.AB = A.tensor(B)
        self.NA, self.NB = normalization(A), normalization(B)
        self.NAB = normalization(self.AB)
        self.N = self.AB.N

    def ez(self, p: int, q: int) -> Matrix:
        """N(A)_p ⊗ N(B)_q → N(A⊗B)_{p+q} in normalized coordinates."""
        n = p + q
        if n > self.N:
            raise ValueError(f"p + q = {n} exceeds the truncation level {self.N}")
        A, B = self.A, self.B
        total = Matrix.zeros(A.dims[n] * B.dims[n], A.dims[p] * B.dims[q])
        for sh in shuffles(p, q):
            term = kron(_degeneracy_word(A, p, sh.nu), _degeneracy_word(B, q, sh.mu))
            total = total + (term if sh.sign > 0 else -term)
        incl = kron(self.NA.basis[p], self.NB.basis[q])
        return self.NAB.projection[n] @ (total @ incl)

    def aw_block(self, p: int, q: int) -> Matrix:
        """Component N(A⊗B)_{p+q} → N(A)_p ⊗ N(B)_q."""
        n = p + q
        A, B = self.A, self.B
        front = Matrix.identity(A.dims[n])
        for k in range(n, p, -1):
            front = A.face(k, k) @ front
        back = Matrix.identity(B.dims[n])
        for k in range(n, q, -1):
            back = B.face(k, 0) @ back
        proj = kron(self.NA.projection[p], self.NB.projection[q])
        return proj @ kron(front, back) @ self.NAB.basis[n]

    def aw(self, n: int) -> Matrix:
        """N(A⊗B)_n → ⊕_{p+q=n} N(A)_p ⊗ N(B)_q, blocks stacked by p ascending."""
        cols = self.NAB.basis[n].ncols
        return vstack(*(self.aw_block(p, n - p) for p in range(n + 1)), ncols=cols)

    def ez_total(self, n: int) -> Matrix:
        rows = self.NAB.basis[n].ncols
        return hstack(*(self.ez(p, n - p) for p in range(n + 1)), nrows=rows)

    def ez_aw_on_homology(self, n: int) -> CheckResult:
        """EZ∘AW − id sends every n-cycle of N(A⊗B) to a boundary."""
        if n + 1 > self.N:
            raise ValueError("homology at level n needs level n + 1")
        H = self.NAB.complex.homology(n)
        M = self.ez_total(n) @ self.aw(n)
        for j in range(H.dim):
            z = H.reps.col(j)
            if H.classify(M @ z) != H.classify(z):
                return CheckResult(False, "ez-aw", (n, j), "EZ∘AW is not the identity on homology")
        return CheckResult.passed()


def ez_map(A: SimplicialVectorSpace, B: SimplicialVectorSpace, p: int, q: int) -> Matrix:
    return TensorPair(A, B).ez(p, q)


def aw_map(A: SimplicialVectorSpace, B: SimplicialVectorSpace, n: int) -> Matrix:
    return TensorPair(A, B).aw(n)


# ---------------------------------------------------------------------------
# affine Dold-Kan


Label = tuple


@dataclass(frozen=True)
class AffineComplex:
    """(A_0, V): A_0 is recorded by its difference space V_0.

    ``labels[n][k]`` names basis vector k of V_n; they let canonical
    isomorphisms between iterated tensor products be matched by name.
    """

    V: ChainComplexNN
    labels: tuple[tuple[Label, ...], ...]

    @classmethod
    def make(cls, V: ChainComplexNN, name: str = "x") -> "AffineComplex":
        return cls(V, tuple(tuple(((name, n, k),) for k in range(V.dim(n))) for n in range(V.top + 1)))

    @classmethod
    def unit(cls, top: int = 0) -> "AffineComplex":
        """({*}, 0)."""
        return cls(ChainComplexNN([0] * (top + 1)), tuple(() for _ in range(top + 1)))

    def dim(self, n: int) -> int:
        return self.V.dim(n)


@dataclass(frozen=True)
class AffineMap:
    """(f, b): linear chain map f plus translation b ∈ W_0."""

    source: AffineComplex
    target: AffineComplex
    f: tuple[Matrix, ...]  # per level
    b: tuple

    def __post_init__(self):
        S, T = self.source.V, self.target.V
        top = min(S.top, T.top)
        if len(self.f) != top + 1:
            raise ValueError("linear part needs one matrix per level")
        for n in range(1, top + 1):
            if T.boundary(n) @ self.f[n] != self.f[n - 1] @ S.boundary(n):
                raise ValueError(f"linear part is not a chain map at level {n}")
        if len(self.b) != T.dim(0):
            raise ValueError("translation must lie in the target's degree 0")

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self ∘ other: (g, c)∘(f, b) = (g∘f, g_0(b) + c)."""
        f = tuple(g @ h for g, h in zip(self.f, other.f))
        b = tuple(x + y for x, y in zip(self.f[0] @ other.b, self.b))
        return AffineMap(other.source, self.target, f, b)

    @classmethod
    def identity(cls, X: AffineComplex) -> "AffineMap":
        return cls(X, X, tuple(Matrix.identity(X.dim(n)) for n in range(X.V.top + 1)),
                   tuple(Fraction(0) for _ in range(X.dim(0))))

    def apply(self, n: int, v) -> tuple:
        out = self.f[n] @ tuple(v)
        return tuple(x + y for x, y in zip(out, self.b)) if n == 0 else out


@dataclass(frozen=True)
class SimplicialAffineMap:
    """Levelwise affine maps F_n(v) = L_n v + t_n between simplicial affine spaces."""

    source: SimplicialVectorSpace
    target: SimplicialVectorSpace
    linear: tuple[Matrix, ...]
    translation: tuple[tuple, ...]

    def check(self) -> CheckResult:
        S, T = self.source, self.target
        for n in range(1, min(S.N, T.N) + 1):
            for i in range(n + 1):
                if T.face(n, i) @ self.linear[n] != self.linear[n - 1] @ S.face(n, i):
                    return CheckResult(False, "face", (n, i))
                if T.face(n, i) @ self.translation[n] != self.translation[n - 1]:
                    return CheckResult(False, "face-translation", (n, i))
        for n in range(min(S.N, T.N)):
            for j in range(n + 1):
                if T.degen(n, j) @ self.linear[n] != self.linear[n + 1] @ S.degen(n, j):
                    return CheckResult(False, "degeneracy", (n, j))
                if T.degen(n, j) @ self.translation[n] != self.translation[n + 1]:
                    return CheckResult(False, "degeneracy-translation", (n, j))
        return CheckResult.passed()


def affine_denormalize(X: AffineComplex, N: int = 4) -> SimplicialVectorSpace:
    """K̆(A_0, V): level n is A_0 × ⊕_{p≥1} V_p^{C(n,p)}; the A_0 slot comes first.

    With an origin chosen in A_0 the faces are the linear maps of K(V).
    """
    return denormalize(X.V, N)


def affine_denormalize_map(phi: AffineMap, N: int = 4) -> SimplicialAffineMap:
    S, T = denormalize(phi.source.V, N), denormalize(phi.target.V, N)
    linear = []
    trans = []
    for n in range(N + 1):
        rows = [[Fraction(0)] * S.dims[n] for _ in range(T.dims[n])]
        soff = _summand_offsets(phi.source.V, surjections(n))
        toff = _summand_offsets(phi.target.V, surjections(n))
        for k, eta in enumerate(surjections(n)):
            p = eta[-1]
            fp = phi.f[p] if p < len(phi.f) else Matrix.zeros(phi.target.dim(p), phi.source.dim(p))
            _place(rows, fp, toff[k], soff[k])
        linear.append(Matrix(rows, S.dims[n]) if rows else Matrix.zeros(0, S.dims[n]))
        t = [Fraction(0)] * T.dims[n]
        t[:len(phi.b)] = phi.b
        trans.append(tuple(t))
    return SimplicialAffineMap(S, T, tuple(linear), tuple(trans))


def affine_normalize(S: SimplicialVectorSpace, labels=None) -> AffineComplex:
    C = normalize(S)
    if labels is None:
        return AffineComplex.make(C)
    return AffineComplex(C, labels)


def affine_normalize_map(F: SimplicialAffineMap, source: AffineComplex | None = None,
                         target: AffineComplex | None = None) -> AffineMap:
    """Linear part N(L) and the level-0 translation."""
    NS, NT = normalization(F.source), normalization(F.target)
    top = min(F.source.N, F.target.N)
    f = []
    for n in range(top + 1):
        img = F.linear[n] @ NS.basis[n]
        if NT.basis[n].ncols == 0:
            f.append(Matrix.zeros(0, NS.basis[n].ncols))
            continue
        X = solve(NT.basis[n], img) if img.ncols else Matrix.zeros(NT.basis[n].ncols, 0)
        if X is None:
            raise ValueError(f"linear part does not preserve normalized chains at level {n}")
        f.append(X)
    source = source or AffineComplex.make(NS.complex)
    target = target or AffineComplex.make(NT.complex)
    keep = min(source.V.top, target.V.top) + 1
    return AffineMap(source, target, tuple(f[:keep]), tuple(F.translation[0]))


def level1_faces(X: AffineComplex) -> tuple[Matrix, Matrix]:
    """∂_0, ∂_1 : A_0 × V_1 → A_0 of K̆(X); ∂_0(a, v) = a and ∂_1(a, v) = a − d v."""
    S = affine_denormalize(X, 1)
    return S.face(1, 0), S.face(1, 1)


# tensor structure


def affine_tensor(X: AffineComplex, Y: AffineComplex) -> AffineComplex:
    """(A_0, V) ⊗ (B_0, W) = (A_0 × B_0, V ⊕ W ⊕ V⊗W) with the Koszul differential."""
    V, W = X.V, Y.V
    top = max(V.top, W.top)
    VW, offs = chain_tensor(_pad(V, top), _pad(W, top), top)
    dims = [V.dim(n) + W.dim(n) + VW.dim(n) for n in range(top + 1)]
    d = {}
    for n in range(1, top + 1):
        d[n] = block_diag(V.boundary(n), W.boundary(n), VW.boundary(n))
    labels = []
    for n in range(top + 1):
        lab = list(_labels(X, n)) + list(_labels(Y, n))
        for p in range(n + 1):
            q = n - p
            for a in _labels(X, p):
                for b in _labels(Y, q):
                    lab.append(a + b)
        labels.append(tuple(lab))
    return AffineComplex(ChainComplexNN(dims, d), tuple(labels))


def _labels(X: AffineComplex, n: int):
    return X.labels[n] if n < len(X.labels) else ()


def _pad(V: ChainComplexNN, top: int) -> ChainComplexNN:
    if V.top >= top:
        return V
    return ChainComplexNN(list(V.dims) + [0] * (top - V.top), V.d, check=False)


def affine_tensor_maps(phi: AffineMap, psi: AffineMap) -> AffineMap:
    """(f, b) ⊗ (g, c): (u, v, x⊗y) ↦ (f(u) + b, g(v) + c, f(x)⊗g(y))."""
    S = affine_tensor(phi.source, psi.source)
    T = affine_tensor(phi.target, psi.target)
    top = S.V.top
    blocks = []
    for n in range(top + 1):
        fn = _level(phi, n)
        gn = _level(psi, n)
        parts = [fn, gn]
        for p in range(n + 1):
            parts.append(kron(_level(phi, p), _level(psi, n - p)))
        blocks.append(block_diag(*parts))
    b = tuple(phi.b) + tuple(psi.b) + tuple(Fraction(0) for _ in range(phi.target.dim(0) * psi.target.dim(0)))
    return AffineMap(S, T, tuple(blocks), b)


def _level(phi: AffineMap, n: int) -> Matrix:
    if n < len(phi.f):
        return phi.f[n]
    return Matrix.zeros(phi.target.dim(n), phi.source.dim(n))


def relabel_iso(X: AffineComplex, Y: AffineComplex) -> AffineMap:
    """The canonical isomorphism X → Y matching basis labels (associators, unitors)."""
    top = max(X.V.top, Y.V.top)
    f = []
    for n in range(top + 1):
        lx, ly = _labels(X, n), _labels(Y, n)
        if sorted(lx) != sorted(ly):
            raise ValueError(f"labels differ at level {n}")
        pos = {lab: k for k, lab in enumerate(ly)}
        rows = [[Fraction(0)] * len(lx) for _ in range(len(ly))]
        for k, lab in enumerate(lx):
            rows[pos[lab]][k] = Fraction(1)
        f.append(Matrix(rows, len(lx)) if rows else Matrix.zeros(0, len(lx)))
    return AffineMap(X, Y, tuple(f), tuple(Fraction(0) for _ in range(Y.dim(0))))


def associator(X: AffineComplex, Y: AffineComplex, Z: AffineComplex) -> AffineMap:
    return relabel_iso(affine_tensor(affine_tensor(X, Y), Z), affine_tensor(X, affine_tensor(Y, Z)))


def left_unitor(X: AffineComplex) -> AffineMap:
    return relabel_iso(affine_tensor(AffineComplex.unit(X.V.top), X), X)


def right_unitor(X: AffineComplex) -> AffineMap:
    return relabel_iso(affine_tensor(X, AffineComplex.unit(X.V.top)), X)


def _same_map(f: AffineMap, g: AffineMap) -> bool:
    return f.f == g.f and tuple(f.b) == tuple(g.b)


def pentagon_holds(W: AffineComplex, X: AffineComplex, Y: AffineComplex, Z: AffineComplex) -> bool:
    idW, idZ = AffineMap.identity(W), AffineMap.identity(Z)
    a1 = associator(affine_tensor(W, X), Y, Z)
    a2 = associator(W, X, affine_tensor(Y, Z))
    lhs = a2.compose(a1)
    b1 = affine_tensor_maps(associator(W, X, Y), idZ)
    b2 = associator(W, affine_tensor(X, Y), Z)
    b3 = affine_tensor_maps(idW, associator(X, Y, Z))
    rhs = b3.compose(b2).compose(b1)
    return _same_map(lhs, rhs)


def triangle_holds(X: AffineComplex, Y: AffineComplex) -> bool:
    one = AffineComplex.unit(max(X.V.top, Y.V.top))
    a = associator(X, one, Y)
    lhs = affine_tensor_maps(AffineMap.identity(X), left_unitor_for(one, Y)).compose(a)
    rhs = affine_tensor_maps(right_unitor_for(X, one), AffineMap.identity(Y))
    return _same_map(lhs, rhs)


def left_unitor_for(one: AffineComplex, X: AffineComplex) -> AffineMap:
    return relabel_iso(affine_tensor(one, X), X)


def right_unitor_for(X: AffineComplex, one: AffineComplex) -> AffineMap:
    return relabel_iso(affine_tensor(X, one), X)


# ---------------------------------------------------------------------------
# random data for tests and the CLI


def random_chain_complex(rng, max_dim: int = 3, levels: int = 5, max_entry: int = 2) -> ChainComplexNN:
    """Random complex; δ_n is a random combination of a kernel basis of δ_{n−1}."""
    dims = [rng.randint(0, max_dim) for _ in range(levels)]
    d: dict[int, Matrix] = {}
    for n in range(1, levels):
        src, tgt = dims[n], dims[n - 1]
        if n == 1:
            K = Matrix.identity(tgt)
        else:
            K = kernel_basis(d[n - 1]) if tgt else Matrix.zeros(0, 0)
        R = _random_matrix(rng, K.ncols, src, max_entry)
        d[n] = K @ R if K.ncols else Matrix.zeros(tgt, src)
    return ChainComplexNN(dims, d)


def _random_matrix(rng, m: int, n: int, max_entry: int) -> Matrix:
    if m == 0:
        return Matrix.zeros(0, n)
    return Matrix([[rng.randint(-max_entry, max_entry) for _ in range(n)] for _ in range(m)], n)


def random_invertible(rng, n: int, max_entry: int = 2) -> Matrix:
    while True:
        M = _random_matrix(rng, n, n, max_entry)
        if n == 0 or rank(M) == n:
            return M


def random_simplicial(rng, V: ChainComplexNN | None = None, N: int = 4) -> SimplicialVectorSpace:
    """K(V) for a random (or given) small V, in a random basis on each level."""
    if V is None:
        V = random_chain_complex(rng, max_dim=1, levels=3)
    S = denormalize(V, N)
    return S.conjugate([random_invertible(rng, S.dims[n]) for n in range(N + 1)])
