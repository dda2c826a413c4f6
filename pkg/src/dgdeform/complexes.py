"""Bounded cochain complexes of finite-dimensional rational vector spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .linalg import (
    Matrix,
    column_basis,
    complement_basis,
    extend_basis,
    hstack,
    inverse,
    kernel_basis,
    rank,
    solve,
    solve_vector,
    span_contains,
    unit_vector,
)


class ComplexError(ValueError):
    """Malformed complex data (shapes, window, or d∘d ≠ 0)."""


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a validator: ``ok`` plus a reason tag and witness on failure."""

    ok: bool
    reason: str | None = None
    witness: object = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    @classmethod
    def passed(cls) -> "CheckResult":
        return cls(True)


def _as_matrix(m, ncols: int) -> Matrix:
    if isinstance(m, Matrix):
        return m
    m = [list(r) for r in m]
    return Matrix(m) if m else Matrix.zeros(0, ncols)


class GradedComplex:
    """Cochain complex concentrated in the window ``[lo, hi]``.

    ``d[n]`` is the matrix V^n → V^{n+1}; missing entries inside the window
    default to zero, entries outside it are rejected.
    """

    __slots__ = ("lo", "hi", "_dims", "_d")

    def __init__(self, lo: int, dims: Sequence[int], d: Mapping[int, Matrix] | None = None,
                 *, check: bool = True):
        dims = tuple(int(x) for x in dims)
        if any(x < 0 for x in dims):
            raise ComplexError("negative dimension")
        self.lo = lo
        self.hi = lo + len(dims) - 1
        self._dims = dims
        d = dict(d or {})
        full = {}
        for n in range(self.lo, self.hi):
            m = d.pop(n, None)
            shape = (self.dim(n + 1), self.dim(n))
            m = Matrix.zeros(*shape) if m is None else _as_matrix(m, shape[1])
            if m.shape != shape:
                raise ComplexError(f"d[{n}] has shape {m.shape}, expected {shape}")
            full[n] = m
        for n, m in d.items():
            if not _as_matrix(m, 0).is_zero():
                raise ComplexError(f"nonzero differential d[{n}] outside window [{self.lo}, {self.hi}]")
        self._d = full
        if check:
            for n in range(self.lo, self.hi - 1):
                if not (full[n + 1] @ full[n]).is_zero():
                    raise ComplexError(f"d[{n + 1}]·d[{n}] ≠ 0")

    @classmethod
    def from_dict(cls, dims: Mapping[int, int], d: Mapping[int, Matrix] | None = None) -> "GradedComplex":
        degs = [n for n, k in dims.items() if k]
        if not degs:
            return cls(0, ())
        lo, hi = min(degs), max(degs)
        return cls(lo, [dims.get(n, 0) for n in range(lo, hi + 1)], d)

    def dim(self, n: int) -> int:
        if self.lo <= n <= self.hi:
            return self._dims[n - self.lo]
        return 0

    def diff(self, n: int) -> Matrix:
        m = self._d.get(n)
        return m if m is not None else Matrix.zeros(self.dim(n + 1), self.dim(n))

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    @property
    def dims(self) -> dict[int, int]:
        return {n: self.dim(n) for n in self.degrees}

    @property
    def total_dim(self) -> int:
        return sum(self._dims)

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * self.dim(n) for n in self.degrees)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GradedComplex):
            return NotImplemented
        degs = set(self.degrees) | set(other.degrees)
        return all(self.dim(n) == other.dim(n) for n in degs) and all(
            self.diff(n) == other.diff(n) for n in degs)

    def __hash__(self):
        return hash(tuple((n, self.dim(n)) for n in self.degrees if self.dim(n)))

    def __repr__(self) -> str:
        return f"GradedComplex(lo={self.lo}, dims={list(self._dims)})"

    @classmethod
    def zero(cls) -> "GradedComplex":
        return cls(0, ())


def cycles(V: GradedComplex, n: int) -> Matrix:
    return kernel_basis(V.diff(n)) if V.dim(n) else Matrix.zeros(0, 0)


def boundaries(V: GradedComplex, n: int) -> Matrix:
    return column_basis(V.diff(n - 1)) if V.dim(n - 1) else Matrix.zeros(V.dim(n), 0)


@dataclass(frozen=True)
class SubquotientSpace:
    """span(ambient) / span(sub) inside k^N, with an explicit projection.

    ``reps`` are columns of k^N whose classes form the quotient basis;
    ``proj`` (dim × N) sends a vector of the ambient span to its coordinates
    in that basis and kills ``sub``.
    """

    N: int
    ambient: Matrix
    sub: Matrix
    reps: Matrix
    proj: Matrix

    @classmethod
    def make(cls, ambient: Matrix, sub: Matrix) -> "SubquotientSpace":
        N = ambient.nrows
        amb = column_basis(ambient) if ambient.ncols else Matrix.zeros(N, 0)
        B = column_basis(sub) if sub.ncols else Matrix.zeros(N, 0)
        if not span_contains(amb, B):
            raise ValueError("subspace is not contained in the ambient space")
        reps = extend_basis(B, amb) if amb.ncols else Matrix.zeros(N, 0)
        if N == 0:
            return cls(0, amb, B, reps, Matrix.zeros(0, 0))
        base = hstack(B, reps)
        full = hstack(base, complement_basis(base, N))
        inv = inverse(full)
        proj = inv.submatrix(range(B.ncols, B.ncols + reps.ncols), range(N))
        return cls(N, amb, B, reps, proj)

    @property
    def dim(self) -> int:
        return self.reps.ncols

    @property
    def ambient_dim(self) -> int:
        return self.ambient.ncols

    def contains(self, v) -> bool:
        if not any(v):
            return True
        return self.ambient.ncols > 0 and solve_vector(self.ambient, v) is not None

    def classify(self, v) -> tuple:
        """Quotient coordinates of v, which must lie in the ambient span."""
        if not self.contains(v):
            raise ValueError("vector is outside the ambient space")
        return self.proj @ tuple(v)

    def is_zero_class(self, v) -> bool:
        return not any(self.classify(v))

    def lift(self, coords) -> tuple:
        return self.reps @ tuple(coords)


def cohomology(V: GradedComplex, n: int) -> SubquotientSpace:
    N = V.dim(n)
    Z = cycles(V, n) if N else Matrix.zeros(0, 0)
    return SubquotientSpace.make(Z, boundaries(V, n))


def betti(V: GradedComplex, n: int) -> int:
    """dim H^n without building the projection."""
    N = V.dim(n)
    if N == 0:
        return 0
    return N - rank(V.diff(n)) - rank(V.diff(n - 1))


def shift(V: GradedComplex, n: int) -> GradedComplex:
    """V[n]^j = V^{j+n}, same differential matrices."""
    return GradedComplex(V.lo - n, [V.dim(j) for j in V.degrees],
                         {j - n: V.diff(j) for j in range(V.lo, V.hi)}, check=False)


def direct_sum(*cs: GradedComplex) -> GradedComplex:
    from .linalg import block_diag
    live = [c for c in cs if c.total_dim]
    if not live:
        return GradedComplex.zero()
    lo = min(c.lo for c in live)
    hi = max(c.hi for c in live)
    dims = [sum(c.dim(n) for c in cs) for n in range(lo, hi + 1)]
    d = {n: block_diag(*(c.diff(n) for c in cs)) for n in range(lo, hi)}
    return GradedComplex(lo, dims, d, check=False)


# ---------------------------------------------------------------------------
# Hom complexes


@dataclass(frozen=True)
class HomBlock:
    source_degree: int
    offset: int
    rows: int
    cols: int


class HomComplex:
    """Hom*(V, W) with matrix-unit bases and the Koszul differential.

    A degree-n element is the tuple of blocks V^i → W^{i+n}, flattened row
    major in increasing i.  ``D(f) = d_W∘f − (−1)^n f∘d_V``.
    """

    def __init__(self, V: GradedComplex, W: GradedComplex):
        self.V, self.W = V, W
        self.blocks: dict[int, list[HomBlock]] = {}
        if V.total_dim == 0 or W.total_dim == 0:
            self.complex = GradedComplex.zero()
            return
        lo, hi = W.lo - V.hi, W.hi - V.lo
        dims = []
        for n in range(lo, hi + 1):
            off = 0
            bl = []
            for i in V.degrees:
                r, c = W.dim(i + n), V.dim(i)
                if r and c:
                    bl.append(HomBlock(i, off, r, c))
                    off += r * c
            self.blocks[n] = bl
            dims.append(off)
        while dims and dims[-1] == 0:
            dims.pop()
            hi -= 1
        start = 0
        while start < len(dims) and dims[start] == 0:
            start += 1
        dims = dims[start:]
        lo += start
        self._lo = lo
        d = {n: self._differential(n) for n in range(lo, lo + len(dims) - 1)}
        self.complex = GradedComplex(lo, dims, d, check=False)

    def dim(self, n: int) -> int:
        return sum(b.rows * b.cols for b in self.blocks.get(n, ()))

    def to_blocks(self, n: int, vec) -> dict[int, Matrix]:
        """Per source degree i, the matrix V^i → W^{i+n} (zero blocks included)."""
        vec = tuple(vec)
        if len(vec) != self.dim(n):
            raise ValueError(f"degree {n} Hom vector must have length {self.dim(n)}")
        out = {i: Matrix.zeros(self.W.dim(i + n), self.V.dim(i)) for i in self.V.degrees}
        for b in self.blocks.get(n, ()):
            chunk = vec[b.offset:b.offset + b.rows * b.cols]
            out[b.source_degree] = Matrix._raw(
                tuple(tuple(chunk[r * b.cols:(r + 1) * b.cols]) for r in range(b.rows)), b.cols)
        return out

    def from_blocks(self, n: int, blocks: Mapping[int, Matrix]) -> tuple:
        vec = [Fraction(0)] * self.dim(n)
        for b in self.blocks.get(n, ()):
            m = blocks.get(b.source_degree)
            if m is None:
                continue
            if m.shape != (b.rows, b.cols):
                raise ValueError(f"block at source degree {b.source_degree} has wrong shape")
            for r in range(b.rows):
                vec[b.offset + r * b.cols:b.offset + (r + 1) * b.cols] = m.rows[r]
        for i, m in blocks.items():
            if not any(b.source_degree == i for b in self.blocks.get(n, ())) and not m.is_zero():
                raise ValueError(f"nonzero block at source degree {i} outside Hom^{n}")
        return tuple(vec)

    def apply_D(self, n: int, blocks: Mapping[int, Matrix]) -> dict[int, Matrix]:
        V, W = self.V, self.W
        sign = -1 if n % 2 else 1
        out = {}
        for i in V.degrees:
            acc = Matrix.zeros(W.dim(i + n + 1), V.dim(i))
            f_i = blocks.get(i)
            if f_i is not None and f_i.nrows and f_i.ncols:
                acc = acc + W.diff(i + n) @ f_i
            f_next = blocks.get(i + 1)
            if f_next is not None and f_next.nrows and f_next.ncols:
                acc = acc - (f_next @ V.diff(i)).scale(sign)
            out[i] = acc
        return out

    def _differential(self, n: int) -> Matrix:
        cols = []
        for k in range(self.dim(n)):
            e = unit_vector(self.dim(n), k)
            cols.append(self.from_blocks(n + 1, self.apply_D(n, self.to_blocks(n, e))))
        return Matrix.from_columns(cols, self.dim(n + 1))

    def total_matrix(self, n: int, vec) -> Matrix:
        """The degree-n element as one big matrix on ⊕V → ⊕W (degree-ordered)."""
        blocks = self.to_blocks(n, vec)
        rows = [[Fraction(0)] * self.V.total_dim for _ in range(self.W.total_dim)]
        voff = offsets(self.V)
        woff = offsets(self.W)
        for i, m in blocks.items():
            for r in range(m.nrows):
                for c in range(m.ncols):
                    rows[woff[i + n] + r][voff[i] + c] = m.rows[r][c]
        return Matrix(rows, self.V.total_dim) if rows else Matrix.zeros(0, self.V.total_dim)

    def from_total_matrix(self, n: int, M: Matrix) -> tuple:
        voff = offsets(self.V)
        woff = offsets(self.W)
        blocks = {}
        for b in self.blocks.get(n, ()):
            i = b.source_degree
            blocks[i] = M.submatrix(range(woff[i + n], woff[i + n] + b.rows), range(voff[i], voff[i] + b.cols))
        return self.from_blocks(n, blocks)


def offsets(V: GradedComplex) -> dict[int, int]:
    """Start index of each degree in the flattened total space ⊕_n V^n."""
    out, off = {}, 0
    for n in range(V.lo, V.hi + 2):
        out[n] = off
        off += V.dim(n)
    return out


def hom_complex(V: GradedComplex, W: GradedComplex) -> HomComplex:
    return HomComplex(V, W)


def total_differential(V: GradedComplex) -> Matrix:
    """d as one nilpotent matrix on ⊕_n V^n."""
    N = V.total_dim
    off = offsets(V)
    rows = [[Fraction(0)] * N for _ in range(N)]
    for n in range(V.lo, V.hi):
        m = V.diff(n)
        for r in range(m.nrows):
            for c in range(m.ncols):
                rows[off[n + 1] + r][off[n] + c] = m.rows[r][c]
    return Matrix(rows, N) if N else Matrix.zeros(0, 0)


def degree_of_index(V: GradedComplex, k: int) -> int:
    off = offsets(V)
    for n in V.degrees:
        if k < off[n] + V.dim(n):
            return n
    raise IndexError(k)


# ---------------------------------------------------------------------------
# maps


class ComplexMap:
    """A homogeneous map of degree ``degree``; ``blocks[n]`` : source^n → target^{n+degree}."""

    def __init__(self, source: GradedComplex, target: GradedComplex, degree: int,
                 blocks: Mapping[int, Matrix], is_chain_map: bool | None = None):
        self.source, self.target, self.degree = source, target, degree
        full = {}
        for n in source.degrees:
            shape = (target.dim(n + degree), source.dim(n))
            m = blocks.get(n)
            if m is None:
                m = Matrix.zeros(*shape)
            if m.shape != shape:
                raise ComplexError(f"block {n} has shape {m.shape}, expected {shape}")
            full[n] = m
        for n, m in blocks.items():
            if n not in full and not m.is_zero():
                raise ComplexError(f"nonzero block at degree {n} outside the source window")
        self.blocks = full
        H = HomComplex(source, target)
        self._hom = H
        D = H.apply_D(degree, full)
        actual = all(m.is_zero() for m in D.values())
        if is_chain_map is not None and is_chain_map != actual:
            raise ComplexError(f"is_chain_map={is_chain_map} disagrees with the Hom differential")
        self.is_chain_map = actual

    def block(self, n: int) -> Matrix:
        m = self.blocks.get(n)
        return m if m is not None else Matrix.zeros(self.target.dim(n + self.degree), self.source.dim(n))

    def as_hom_vector(self) -> tuple:
        return self._hom.from_blocks(self.degree, self.blocks)

    def compose(self, other: "ComplexMap") -> "ComplexMap":
        """self ∘ other."""
        if other.target != self.source:
            raise ComplexError("composition of incompatible maps")
        blocks = {n: self.block(n + other.degree) @ other.block(n) for n in other.source.degrees}
        return ComplexMap(other.source, self.target, self.degree + other.degree, blocks)

    @classmethod
    def identity(cls, V: GradedComplex) -> "ComplexMap":
        return cls(V, V, 0, {n: Matrix.identity(V.dim(n)) for n in V.degrees})

    def induced(self, n: int) -> Matrix:
        """Matrix of H^n(source) → H^{n+degree}(target) in representative bases."""
        if not self.is_chain_map:
            raise ComplexError("induced map on cohomology needs a chain map")
        Hs = cohomology(self.source, n)
        Ht = cohomology(self.target, n + self.degree)
        cols = []
        for j in range(Hs.dim):
            v = self.block(n) @ Hs.reps.col(j)
            cols.append(Ht.classify(v) if Ht.N else ())
        return Matrix.from_columns(cols, Ht.dim)


# ---------------------------------------------------------------------------
# subcomplexes, quotients, filtrations


def is_d_stable(V: GradedComplex, basis: Mapping[int, Matrix]) -> tuple[int, tuple] | None:
    """None if span(basis) is d-stable, else (degree, offending vector)."""
    for n in V.degrees:
        B = basis.get(n)
        if B is None or B.ncols == 0:
            continue
        target = basis.get(n + 1)
        for j in range(B.ncols):
            v = V.diff(n) @ B.col(j)
            if not any(v):
                continue
            if target is None or target.ncols == 0 or solve_vector(target, v) is None:
                return n, B.col(j)
    return None


def induced_subcomplex(V: GradedComplex, basis: Mapping[int, Matrix]) -> GradedComplex:
    """The complex span(basis) with d restricted, in the given bases."""
    dims = {n: (basis[n].ncols if n in basis else 0) for n in V.degrees}
    d = {}
    for n in range(V.lo, V.hi):
        if dims[n] == 0 or dims.get(n + 1, 0) == 0:
            continue
        X = solve(basis[n + 1], V.diff(n) @ basis[n])
        if X is None:
            raise ComplexError(f"subspace is not d-stable at degree {n}")
        d[n] = X
    return GradedComplex(V.lo, [dims[n] for n in V.degrees], d)


@dataclass
class Filtration:
    """Decreasing filtration F^p of a complex.

    ``steps[p][n]`` is a basis matrix (columns in V^n) of F^p V^n for
    p_min ≤ p ≤ p_max.  Below p_min the step is the whole space, above p_max
    it is zero.  A degree missing from ``steps[p]`` means F^p V^n = 0.
    """

    complex: GradedComplex
    steps: dict[int, dict[int, Matrix]]
    p_min: int = field(default=None)
    p_max: int = field(default=None)

    def __post_init__(self):
        if not self.steps:
            raise ComplexError("filtration needs at least one step")
        if self.p_min is None:
            self.p_min = min(self.steps)
        if self.p_max is None:
            self.p_max = max(self.steps)
        for p in range(self.p_min, self.p_max + 1):
            self.steps.setdefault(p, {})
        for p, bases in self.steps.items():
            for n, B in bases.items():
                if B.nrows != self.complex.dim(n):
                    raise ComplexError(f"F^{p} basis in degree {n} has {B.nrows} rows, "
                                       f"expected {self.complex.dim(n)}")

    def basis(self, p: int, n: int) -> Matrix:
        V = self.complex
        if p < self.p_min:
            return Matrix.identity(V.dim(n))
        if p > self.p_max:
            return Matrix.zeros(V.dim(n), 0)
        B = self.steps[p].get(n)
        return B if B is not None else Matrix.zeros(V.dim(n), 0)

    def step(self, p: int) -> dict[int, Matrix]:
        return {n: self.basis(p, n) for n in self.complex.degrees}

    @classmethod
    def trivial(cls, V: GradedComplex) -> "Filtration":
        """F^0 = V, F^1 = 0."""
        return cls(V, {0: {n: Matrix.identity(V.dim(n)) for n in V.degrees}}, 0, 0)


def filtration_check(F: Filtration) -> CheckResult:
    V = F.complex
    for p in range(F.p_min, F.p_max + 1):
        for n in V.degrees:
            B = F.basis(p, n)
            if B.ncols and rank(B) != B.ncols:
                return CheckResult(False, "rank", (p, n, None), f"F^{p} basis in degree {n} is rank-deficient")
    for p in range(F.p_min, F.p_max + 1):
        for n in V.degrees:
            B = F.basis(p, n)
            outer = F.basis(p - 1, n)
            for j in range(B.ncols):
                v = B.col(j)
                if outer.ncols == 0 or solve_vector(outer, v) is None:
                    return CheckResult(False, "nesting", (p, n, v), f"F^{p} ⊄ F^{p - 1} in degree {n}")
        bad = is_d_stable(V, F.step(p))
        if bad is not None:
            n, v = bad
            return CheckResult(False, "d-stability", (p, n, v), f"d(F^{p}) ⊄ F^{p} at degree {n}")
    return CheckResult.passed()
