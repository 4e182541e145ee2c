"""Group cohomology of Z/m with trivial Z/k coefficients from the normalized bar complex.

This is an independent check on the categorical cochain machinery: it builds
the integral normalized bar chain complex of the cyclic group directly, finds
the Smith-form pivot valuations of its boundary maps over each Z/p^e dividing
k, and reads off H^n(Z/m; Z/p^e) from them.  For a complex of free modules
B, the cochains Hom(B, Z/p^e) have cohomology

    (Z/p^e)^(N_n - a_n - a_{n+1})  +  sum of Z/p^v over pivots of valuation v,

where N_n is the rank of B_n and a_j counts the pivots of the boundary
d_j: B_j -> B_{j-1} that are nonzero mod p^e.
"""
from __future__ import annotations

import itertools

import numpy as np

from .abelcore import FgAbGroup
from .errors import UnsupportedInputError
from .kernels import local_pivot_valuations

MAX_ORDER = 8
MAX_DEGREE = 4


def _prime_powers(k: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= k:
        if k % p == 0:
            e = 0
            while k % p == 0:
                k //= p
                e += 1
            out.append((p, e))
        p += 1
    if k > 1:
        out.append((k, 1))
    return out


def bar_boundary(m: int, n: int) -> np.ndarray:
    """Matrix of d_n: B_n -> B_{n-1} for the normalized bar complex of Z/m.

    Basis of B_n: tuples [g1|...|gn] with every g_i in 1..m-1 in lexicographic
    order; B_0 = Z.
    """
    if n == 0:
        return np.zeros((0, 1), dtype=np.int64)
    base = m - 1
    rows = base ** (n - 1)
    cols = base ** n
    out = np.zeros((rows, cols), dtype=np.int64)
    if n == 1:
        return out            # d[g] = [] - [] = 0

    def index(t: tuple[int, ...]) -> int:
        i = 0
        for g in t:
            i = i * base + (g - 1)
        return i

    for j, t in enumerate(itertools.product(range(1, m), repeat=n)):
        out[index(t[1:]), j] += 1
        for i in range(1, n):
            s = (t[i - 1] + t[i]) % m
            if s:
                out[index(t[:i - 1] + (s,) + t[i + 1:]), j] += (-1) ** i
        out[index(t[:-1]), j] += (-1) ** n
    return out


def bar_oracle(m: int, k: int, n: int, backend: str = "auto") -> FgAbGroup:
    """H^n(Z/m; Z/k) with trivial action, as a canonical group."""
    if not 1 <= m <= MAX_ORDER:
        raise UnsupportedInputError(f"group order must lie in 1..{MAX_ORDER}")
    if not 0 <= n <= MAX_DEGREE:
        raise UnsupportedInputError(f"degree must lie in 0..{MAX_DEGREE}")
    if k < 1:
        raise UnsupportedInputError("coefficient modulus must be at least 1")
    rank_n = (m - 1) ** n
    d_n = bar_boundary(m, n)
    d_up = bar_boundary(m, n + 1)
    primary: dict[int, list[int]] = {}
    for p, e in _prime_powers(k):
        low = local_pivot_valuations(d_n, p, e, backend) if d_n.size else []
        high = local_pivot_valuations(d_up, p, e, backend) if d_up.size else []
        exps = [e] * (rank_n - len(low) - len(high))
        exps += [v for v in low + high if v > 0]
        primary[p] = sorted(exps, reverse=True)
    # recombine p-primary parts into invariant factors
    length = max((len(v) for v in primary.values()), default=0)
    factors = []
    for i in range(length):
        f = 1
        for p, exps in primary.items():
            if i < len(exps):
                f *= p ** exps[i]
        factors.append(f)
    return FgAbGroup.from_invariants(sorted(factors))
