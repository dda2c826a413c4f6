"""Exact linear algebra over the rationals.

Matrices are immutable and hold :class:`fractions.Fraction` entries.  Row
reduction runs on a sparse dict-of-rows copy, which keeps the structured
(mostly 0/±1) matrices that show up in simplicial and Hom-complex code cheap.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


def Q(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def qstr(x: Fraction) -> str:
    x = Q(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


class Matrix:
    __slots__ = ("rows", "nrows", "ncols", "_hash")

    def __init__(self, rows: Iterable[Sequence], ncols: int | None = None):
        rows = tuple(tuple(Q(x) for x in r) for r in rows)
        if ncols is None:
            if not rows:
                raise ValueError("ncols is required for a matrix with no rows")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix rows")
        self.rows = rows
        self.nrows = len(rows)
        self.ncols = ncols
        self._hash = None

    @classmethod
    def _raw(cls, rows: tuple, ncols: int) -> "Matrix":
        m = cls.__new__(cls)
        m.rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        m._hash = None
        return m

    # construction helpers
    @classmethod
    def zeros(cls, m: int, n: int) -> "Matrix":
        z = Fraction(0)
        return cls._raw(tuple((z,) * n for _ in range(m)), n)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        one, z = Fraction(1), Fraction(0)
        return cls._raw(tuple(tuple(one if i == j else z for j in range(n)) for i in range(n)), n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "Matrix":
        cols = [tuple(Q(x) for x in c) for c in cols]
        for c in cols:
            if len(c) != nrows:
                raise ValueError("column length mismatch")
        return cls._raw(tuple(tuple(c[i] for c in cols) for i in range(nrows)), len(cols))

    @classmethod
    def from_sparse(cls, m: int, n: int, entries: dict) -> "Matrix":
        rows = [[Fraction(0)] * n for _ in range(m)]
        for (i, j), v in entries.items():
            rows[i][j] = Q(v)
        return cls._raw(tuple(tuple(r) for r in rows), n)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple:
        return self.rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list[tuple]:
        return [self.col(j) for j in range(self.ncols)]

    @property
    def T(self) -> "Matrix":
        if self.nrows == 0:
            return Matrix.zeros(self.ncols, 0)
        return Matrix._raw(tuple(zip(*self.rows)), self.nrows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self.rows))
        return self._hash

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.rows)
        return f"Matrix({self.nrows}x{self.ncols}: [{body}])"

    def __add__(self, other: "Matrix") -> "Matrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return Matrix._raw(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)),
                           self.ncols)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + (-other)

    def __neg__(self) -> "Matrix":
        return Matrix._raw(tuple(tuple(-a for a in r) for r in self.rows), self.ncols)

    def scale(self, c) -> "Matrix":
        c = Q(c)
        return Matrix._raw(tuple(tuple(c * a for a in r) for r in self.rows), self.ncols)

    __rmul__ = scale

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            ocols = other.ncols
            out = []
            for r in self.rows:
                acc = [Fraction(0)] * ocols
                for k, a in enumerate(r):
                    if a:
                        orow = other.rows[k]
                        for j in range(ocols):
                            b = orow[j]
                            if b:
                                acc[j] += a * b
                out.append(tuple(acc))
            return Matrix._raw(tuple(out), ocols)
        v = tuple(other)
        if len(v) != self.ncols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * b for a, b in zip(r, v) if a and b), Fraction(0)) for r in self.rows)

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.rows)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self.rows]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix._raw(tuple(tuple(self.rows[i][j] for j in cols) for i in rows), len(cols))


Vector = tuple


def zero_vector(n: int) -> tuple:
    return (Fraction(0),) * n


def unit_vector(n: int, i: int) -> tuple:
    v = [Fraction(0)] * n
    v[i] = Fraction(1)
    return tuple(v)


def vadd(u, v) -> tuple:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v) -> tuple:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, v) -> tuple:
    c = Q(c)
    return tuple(c * a for a in v)


def is_zero_vector(v) -> bool:
    return not any(v)


def hstack(*mats: Matrix, nrows: int | None = None) -> Matrix:
    mats = [m for m in mats]
    if nrows is None:
        if not mats:
            raise ValueError("hstack of nothing needs nrows")
        nrows = mats[0].nrows
    for m in mats:
        if m.nrows != nrows:
            raise ValueError("hstack row mismatch")
    rows = tuple(tuple(x for m in mats for x in m.rows[i]) for i in range(nrows))
    return Matrix._raw(rows, sum(m.ncols for m in mats))


def vstack(*mats: Matrix, ncols: int | None = None) -> Matrix:
    if ncols is None:
        if not mats:
            raise ValueError("vstack of nothing needs ncols")
        ncols = mats[0].ncols
    for m in mats:
        if m.ncols != ncols:
            raise ValueError("vstack column mismatch")
    return Matrix._raw(tuple(r for m in mats for r in m.rows), ncols)


def block_diag(*mats: Matrix) -> Matrix:
    n = sum(m.ncols for m in mats)
    rows = []
    off = 0
    z = Fraction(0)
    for m in mats:
        pre, post = (z,) * off, (z,) * (n - off - m.ncols)
        rows.extend(pre + r + post for r in m.rows)
        off += m.ncols
    return Matrix._raw(tuple(rows), n)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; index (i, k) of a tensor is i * dim_b + k."""
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            rows.append(tuple(x * y for x in ra for y in rb))
    return Matrix._raw(tuple(rows), a.ncols * b.ncols)


# ---------------------------------------------------------------------------
# row reduction


def _sparse_rows(m: Matrix) -> list[dict]:
    return [{j: x for j, x in enumerate(r) if x} for r in m.rows]


def _rref_sparse(rows: list[dict], ncols: int) -> tuple[list[dict], list[int]]:
    """Reduced row echelon form of sparse rows; returns nonzero rows and pivots."""
    rows = [dict(r) for r in rows if r]
    pivots: list[int] = []
    done: list[dict] = []
    for c in range(ncols):
        piv = None
        for idx, r in enumerate(rows):
            if c in r:
                if piv is None or len(r) < len(rows[piv]):
                    piv = idx
        if piv is None:
            continue
        prow = rows.pop(piv)
        inv = 1 / prow[c]
        prow = {j: x * inv for j, x in prow.items()}
        for r in rows:
            f = r.get(c)
            if f:
                for j, x in prow.items():
                    y = r.get(j, 0) - f * x
                    if y:
                        r[j] = y
                    else:
                        r.pop(j, None)
        for r in done:
            f = r.get(c)
            if f:
                for j, x in prow.items():
                    y = r.get(j, 0) - f * x
                    if y:
                        r[j] = y
                    else:
                        r.pop(j, None)
        rows = [r for r in rows if r]
        done.append(prow)
        pivots.append(c)
        if not rows:
            break
    return done, pivots


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    done, pivots = _rref_sparse(_sparse_rows(m), m.ncols)
    z = Fraction(0)
    rows = tuple(tuple(r.get(j, z) for j in range(m.ncols)) for r in done)
    return Matrix._raw(rows, m.ncols), pivots


def rank(m: Matrix) -> int:
    if m.nrows == 0 or m.ncols == 0:
        return 0
    return len(_rref_sparse(_sparse_rows(m), m.ncols)[1])


def kernel_basis(m: Matrix) -> Matrix:
    """Columns spanning ker m (ncols(m) rows, nullity columns)."""
    n = m.ncols
    done, pivots = _rref_sparse(_sparse_rows(m), n)
    pivset = set(pivots)
    free = [j for j in range(n) if j not in pivset]
    cols = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in zip(done, pivots):
            x = r.get(f)
            if x:
                v[p] = -x
        cols.append(v)
    return Matrix.from_columns(cols, n)


def column_basis(m: Matrix) -> Matrix:
    """An independent subset of the columns of m spanning its image."""
    if m.ncols == 0:
        return m
    _, pivots = _rref_sparse(_sparse_rows(m), m.ncols)
    return m.submatrix(range(m.nrows), pivots)


def solve(a: Matrix, b: Matrix) -> Matrix | None:
    """Some X with a @ X == b, or None when the system is inconsistent."""
    if a.nrows != b.nrows:
        raise ValueError("solve: row mismatch")
    n = a.ncols
    aug = hstack(a, b)
    done, pivots = _rref_sparse(_sparse_rows(aug), n + b.ncols)
    if any(p >= n for p in pivots):
        return None
    z = Fraction(0)
    out = [[z] * b.ncols for _ in range(n)]
    for r, p in zip(done, pivots):
        for k in range(b.ncols):
            out[p][k] = r.get(n + k, z)
    return Matrix(out, b.ncols)


def solve_vector(a: Matrix, v) -> tuple | None:
    x = solve(a, Matrix.from_columns([v], a.nrows))
    return None if x is None else x.col(0)


def inverse(m: Matrix) -> Matrix:
    if m.nrows != m.ncols:
        raise ValueError("inverse of a non-square matrix")
    x = solve(m, Matrix.identity(m.nrows))
    if x is None or rank(m) != m.nrows:
        raise ZeroDivisionError("matrix is singular")
    return x


def in_span(basis: Matrix, v) -> bool:
    if basis.ncols == 0:
        return is_zero_vector(v)
    return solve_vector(basis, v) is not None


def span_contains(big: Matrix, small: Matrix) -> bool:
    if small.ncols == 0:
        return True
    if big.ncols == 0:
        return small.is_zero()
    return solve(big, small) is not None


def complement_basis(basis: Matrix, n: int) -> Matrix:
    """Standard unit vectors completing the columns of ``basis`` to a basis of k^n.

    ``basis`` must have independent columns; the non-pivot columns of the
    reduced transpose index the missing unit vectors.
    """
    if basis.ncols == 0:
        return Matrix.identity(n)
    _, pivots = _rref_sparse(_sparse_rows(basis.T), n)
    taken = set(pivots)
    return Matrix.from_columns([unit_vector(n, i) for i in range(n) if i not in taken], n)


def extend_basis(sub: Matrix, ambient: Matrix) -> Matrix:
    """Columns of ``ambient`` that extend a basis of span(sub) to one of span(sub + ambient)."""
    k = column_basis(sub).ncols if sub.ncols else 0
    stacked = hstack(column_basis(sub), ambient) if k else ambient
    if stacked.ncols == 0:
        return stacked
    _, pivots = _rref_sparse(_sparse_rows(stacked), stacked.ncols)
    return stacked.submatrix(range(stacked.nrows), [p for p in pivots if p >= k])


def intersect_spans(a: Matrix, b: Matrix) -> Matrix:
    """Basis of span(a) ∩ span(b) as columns in the ambient space."""
    n = a.nrows
    if a.ncols == 0 or b.ncols == 0:
        return Matrix.zeros(n, 0)
    k = kernel_basis(hstack(a, -b))
    if k.ncols == 0:
        return Matrix.zeros(n, 0)
    coeffs = k.submatrix(range(a.ncols), range(k.ncols))
    return column_basis(a @ coeffs)


def coordinates(basis: Matrix, v) -> tuple:
    """Coordinates of v in an independent column basis; raises if v is outside."""
    x = solve_vector(basis, v)
    if x is None:
        raise ValueError("vector is not in the span of the basis")
    return x
