"""Seeded random instances for fuzz checks: dglas, filtered pairs and Hodge models."""

from __future__ import annotations

import random
from fractions import Fraction

from .complexes import Filtration, GradedComplex, is_d_stable
from .dgla import Dgla, end_dgla, from_complex
from .linalg import Matrix, column_basis, kernel_basis
from .models import _filtration_from_weights
from .period import HodgeModel


def _rand_matrix(rng: random.Random, m: int, n: int, k: int = 2) -> Matrix:
    if m == 0:
        return Matrix.zeros(0, n)
    return Matrix([[rng.randint(-k, k) for _ in range(n)] for _ in range(m)], n)


def random_cochain_complex(rng: random.Random, lo: int = -1, levels: int = 3, max_dim: int = 2,
                           max_total: int | None = None) -> GradedComplex:
    """Built top-down: d^n is a kernel basis of d^{n+1} times a random matrix, so d² = 0."""
    while True:
        dims = [rng.randint(0, max_dim) for _ in range(levels)]
        if max_total is None or sum(dims) <= max_total:
            break
    d = {}
    nxt = None
    for n in range(lo + levels - 2, lo - 1, -1):
        src, tgt = dims[n - lo], dims[n + 1 - lo]
        K = Matrix.identity(tgt) if nxt is None else kernel_basis(nxt)
        if K.ncols == 0 or src == 0:
            d[n] = Matrix.zeros(tgt, src)
        else:
            d[n] = K @ _rand_matrix(rng, K.ncols, src, 1)
        nxt = d[n]
    return GradedComplex(lo, dims, d)


def random_dgla(rng: random.Random, max_total: int = 8) -> Dgla:
    """A random dgla from one of three families: abelian with differential,
    two-step nilpotent U ⊕ Z with d: U → Z, or End of a tiny complex."""
    kind = rng.choice(("abelian", "nilpotent", "nilpotent", "end"))
    if kind == "abelian":
        V = random_cochain_complex(rng, -1, 4, 2, max_total)
        return from_complex(V, {})
    if kind == "end":
        while True:
            V = random_cochain_complex(rng, 0, 2, 1)
            if 0 < V.total_dim <= 2:
                return end_dgla(V)
    return _random_two_step(rng, max_total)


def _random_two_step(rng: random.Random, max_total: int) -> Dgla:
    while True:
        udeg = sorted(rng.choice((0, 1, 1, 2)) for _ in range(rng.randint(1, 4)))
        zdeg = sorted(rng.choice((1, 2, 2, 3)) for _ in range(rng.randint(0, 3)))
        if len(udeg) + len(zdeg) <= max_total:
            break
    basis = sorted([(g, "u", k) for k, g in enumerate(udeg)] + [(g, "z", k) for k, g in enumerate(zdeg)])
    degrees = [b[0] for b in basis]
    us = [i for i, b in enumerate(basis) if b[1] == "u"]
    zs = [i for i, b in enumerate(basis) if b[1] == "z"]
    n = len(basis)
    bracket = {}
    for x, a in enumerate(us):
        for b in us[x:]:
            target = [z for z in zs if degrees[z] == degrees[a] + degrees[b]]
            if not target or (a == b and degrees[a] % 2 == 0):
                continue
            vec = {z: rng.randint(-2, 2) for z in target}
            vec = {z: c for z, c in vec.items() if c}
            if vec:
                bracket[(a, b)] = vec
    rows = [[Fraction(0)] * n for _ in range(n)]
    for a in us:
        for z in zs:
            if degrees[z] == degrees[a] + 1:
                rows[z][a] = Fraction(rng.randint(-1, 1))
    return Dgla(degrees, Matrix(rows, n), bracket, complete=True)


def random_closed_subspace(rng: random.Random, V: GradedComplex, inside: dict | None = None) -> dict:
    """A d-stable graded subspace containing ``inside``: random vectors closed under d."""
    W = {}
    for n in V.degrees:
        cols = []
        if inside and n in inside:
            cols.extend(inside[n].columns())
        if n - 1 in W and W[n - 1].ncols:
            cols.extend((V.diff(n - 1) @ W[n - 1]).columns())
        for _ in range(rng.randint(0, V.dim(n))):
            cols.append(tuple(rng.randint(-1, 1) for _ in range(V.dim(n))))
        M = Matrix.from_columns(cols, V.dim(n))
        W[n] = column_basis(M) if M.ncols else M
    assert is_d_stable(V, W) is None
    return W


def random_filtered_pair(rng: random.Random, max_total: int = 6) -> tuple[GradedComplex, dict]:
    V = random_cochain_complex(rng, 0, 3, 3, max_total)
    return V, random_closed_subspace(rng, V)


def random_filtered_complex(rng: random.Random, max_total: int = 6, steps: int = 2) -> Filtration:
    """F^1 ⊇ … ⊇ F^steps, each d-stable."""
    V = random_cochain_complex(rng, 0, 3, 3, max_total)
    chain = []
    cur = None
    for _ in range(steps):
        cur = random_closed_subspace(rng, V, None) if cur is None else _shrink(rng, V, cur)
        chain.append(cur)
    return Filtration(V, {p + 1: chain[p] for p in range(steps)}, 1, steps)


def _shrink(rng: random.Random, V: GradedComplex, outer: dict) -> dict:
    """A random d-stable subspace of ``outer``."""
    W = {}
    for n in V.degrees:
        B = outer.get(n, Matrix.zeros(V.dim(n), 0))
        cols = []
        if n - 1 in W and W[n - 1].ncols:
            cols.extend((V.diff(n - 1) @ W[n - 1]).columns())
        for _ in range(rng.randint(0, B.ncols)):
            cols.append(B @ tuple(rng.randint(-1, 1) for _ in range(B.ncols)))
        M = Matrix.from_columns(cols, V.dim(n))
        W[n] = column_basis(M) if M.ncols else M
    return W


def random_hodge_model(rng: random.Random, max_total: int = 6) -> HodgeModel:
    """d = 0 cohomology model with random Hodge weights and commuting transversal contractions.

    Every i(ξ) is a combination of one weight-lowering-by-at-most-one operator
    and the identity, so the contractions commute and l = 0.
    """
    while True:
        dims = [rng.randint(0, 2) for _ in range(3)]
        if 0 < sum(dims) <= max_total:
            break
    V = GradedComplex(0, dims)
    N = V.total_dim
    weights = tuple(rng.randint(0, 2) for _ in range(N))
    degs = [n for n in V.degrees for _ in range(V.dim(n))]
    Nop = [[Fraction(0)] * N for _ in range(N)]
    for r in range(N):
        for c in range(N):
            if degs[r] == degs[c] and weights[r] >= weights[c] - 1:
                Nop[r][c] = Fraction(rng.randint(-1, 1))
    Nop = Matrix(Nop, N)
    ng1 = rng.randint(1, 2)
    ng0 = rng.randint(0, 1)
    g = Dgla([0] * ng0 + [1] * ng1)
    ops = [Matrix.zeros(N, N) for _ in range(ng0)]
    for _ in range(ng1):
        ops.append(Nop.scale(rng.randint(-2, 2)) + Matrix.identity(N).scale(rng.randint(-1, 1)))
    F = _filtration_from_weights(V, weights, 2)
    return HodgeModel(V, F, g, ops, "random", weights)
