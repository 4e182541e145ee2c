"""Exact integer linear algebra over Z.

Everything here works with Python ints, so entries never overflow.  The
central primitive is a deterministic Smith normal form; solving, kernels,
group canonical forms and homology are all derived from it.

>>> smith_normal_form([[2, 4], [6, 8]]).d.to_rows()
[[2, 0], [0, 4]]
>>> FgAbGroup.cyclic(2).invariant_factors
(2,)
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InputError, ValidationError

Rows = list[list[int]]


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix stored row-major."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows * self.cols:
            raise InputError(
                f"matrix has {len(self.entries)} entries, expected {self.rows}x{self.cols}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else (cols or 0)
        flat: list[int] = []
        for r in rows:
            if len(r) != nc:
                raise InputError("ragged matrix rows")
            flat.extend(int(x) for x in r)
        return cls(nr, nc, tuple(flat))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    def to_rows(self) -> Rows:
        c = self.cols
        return [list(self.entries[i * c:(i + 1) * c]) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(transpose(self.to_rows(), self.rows, self.cols), self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise InputError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        return IntMatrix.from_rows(matmul(self.to_rows(), other.to_rows(), other.cols), other.cols)

    def apply(self, x: Sequence[int]) -> list[int]:
        if len(x) != self.cols:
            raise InputError("vector length does not match matrix columns")
        c = self.cols
        e = self.entries
        return [sum(e[i * c + j] * x[j] for j in range(c) if x[j]) for i in range(self.rows)]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.to_rows()]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[object]], cols: int | None = None) -> "IntMatrix":
        try:
            return cls.from_rows([[int(str(x)) for x in r] for r in data], cols)
        except ValueError as exc:
            raise InputError(f"bad matrix entry: {exc}") from exc


def as_rows(m: IntMatrix | Sequence[Sequence[int]]) -> Rows:
    if isinstance(m, IntMatrix):
        return m.to_rows()
    return [[int(x) for x in r] for r in m]


def transpose(rows: Rows, nr: int | None = None, nc: int | None = None) -> Rows:
    nr = len(rows) if nr is None else nr
    if nc is None:
        nc = len(rows[0]) if nr else 0
    return [[rows[i][j] for i in range(nr)] for j in range(nc)]


def matmul(a: Rows, b: Rows, bcols: int | None = None) -> Rows:
    if bcols is None:
        bcols = len(b[0]) if b else 0
    bt = transpose(b, len(b), bcols)
    return [[sum(x * y for x, y in zip(r, c) if x) for c in bt] for r in a]


def mat_vec(a: Rows, x: Sequence[int]) -> list[int]:
    return [sum(p * q for p, q in zip(r, x) if p) for r in a]


def identity_rows(n: int) -> Rows:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def determinant(rows: Rows) -> int:
    """Bareiss fraction-free determinant."""
    n = len(rows)
    if n == 0:
        return 1
    a = [r[:] for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SmithForm:
    d: IntMatrix
    u: IntMatrix
    v: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.d[i, i] for i in range(min(self.d.rows, self.d.cols))]

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x)


@dataclass
class _Snf:
    """Working result of the elimination; any transform not requested is None."""

    d: list[int]
    rank: int
    u: Rows | None
    uinv: Rows | None
    v: Rows | None
    vinv: Rows | None


def _snf(a: Rows, nr: int, nc: int, want_u: bool = False, want_uinv: bool = False,
         want_v: bool = False, want_vinv: bool = False) -> _Snf:
    """Reduce ``a`` in place to diagonal form.

    Row operations are mirrored on ``u`` (and inversely on ``uinv``),
    column operations on ``v`` (and ``vinv``), so u * a0 * v = diag.
    """
    u = identity_rows(nr) if want_u else None
    uinv = identity_rows(nr) if want_uinv else None
    v = identity_rows(nc) if want_v else None
    vinv = identity_rows(nc) if want_vinv else None

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        if u is not None:
            u[i], u[j] = u[j], u[i]
        if uinv is not None:
            for r in uinv:
                r[i], r[j] = r[j], r[i]

    def swap_cols(i: int, j: int) -> None:
        for r in a:
            r[i], r[j] = r[j], r[i]
        if v is not None:
            for r in v:
                r[i], r[j] = r[j], r[i]
        if vinv is not None:
            vinv[i], vinv[j] = vinv[j], vinv[i]

    def add_row(dst: int, src: int, q: int) -> None:
        # row[dst] += q * row[src]
        rs = a[src]
        a[dst] = [x + q * y for x, y in zip(a[dst], rs)]
        if u is not None:
            us = u[src]
            u[dst] = [x + q * y for x, y in zip(u[dst], us)]
        if uinv is not None:
            for r in uinv:
                if r[dst]:
                    r[src] -= q * r[dst]

    def add_col(dst: int, src: int, q: int) -> None:
        # col[dst] += q * col[src]
        for r in a:
            if r[src]:
                r[dst] += q * r[src]
        if v is not None:
            for r in v:
                if r[src]:
                    r[dst] += q * r[src]
        if vinv is not None:
            vd = vinv[dst]
            vinv[src] = [x - q * y for x, y in zip(vinv[src], vd)]

    def negate_row(i: int) -> None:
        a[i] = [-x for x in a[i]]
        if u is not None:
            u[i] = [-x for x in u[i]]
        if uinv is not None:
            for r in uinv:
                r[i] = -r[i]

    t = 0
    size = min(nr, nc)
    while t < size:
        # minimal |entry| in the trailing block, first in row-major order on ties
        best = 0
        bi = bj = -1
        for i in range(t, nr):
            row = a[i]
            for j in range(t, nc):
                x = row[j]
                if x and (best == 0 or abs(x) < best):
                    best = abs(x)
                    bi, bj = i, j
                    if best == 1:
                        break
            if best == 1:
                break
        if best == 0:
            break
        if bi != t:
            swap_rows(t, bi)
        if bj != t:
            swap_cols(t, bj)
        while True:
            p = a[t][t]
            clean = True
            for i in range(t + 1, nr):
                x = a[i][t]
                if x:
                    q = x // p
                    if q:
                        add_row(i, t, -q)
                    if a[i][t]:
                        clean = False
            for j in range(t + 1, nc):
                x = a[t][j]
                if x:
                    q = x // p
                    if q:
                        add_col(j, t, -q)
                    if a[t][j]:
                        clean = False
            if not clean:
                # a smaller remainder exists in row or column t; move it to the pivot
                best = abs(p)
                bi, bj = t, t
                for i in range(t + 1, nr):
                    x = a[i][t]
                    if x and abs(x) < best:
                        best, bi, bj = abs(x), i, t
                for j in range(t + 1, nc):
                    x = a[t][j]
                    if x and abs(x) < best:
                        best, bi, bj = abs(x), t, j
                if bi != t:
                    swap_rows(t, bi)
                if bj != t:
                    swap_cols(t, bj)
                continue
            # divisibility of the trailing block by the pivot
            bad = -1
            for i in range(t + 1, nr):
                row = a[i]
                for j in range(t + 1, nc):
                    if row[j] % p:
                        bad = i
                        break
                if bad >= 0:
                    break
            if bad < 0:
                break
            add_row(t, bad, 1)
        if a[t][t] < 0:
            negate_row(t)
        t += 1
    diag = [a[i][i] for i in range(size)]
    return _Snf(diag, t, u, uinv, v, vinv)


def smith_normal_form(m: IntMatrix | Sequence[Sequence[int]]) -> SmithForm:
    """Return (d, u, v) with u*m*v = d diagonal, d1 | d2 | ..., det u, det v = +-1.

    Pivoting always takes the entry of least absolute value (first in
    row-major order on ties), so the transforms are reproducible.
    """
    mm = m if isinstance(m, IntMatrix) else IntMatrix.from_rows(as_rows(m))
    nr, nc = mm.rows, mm.cols
    res = _snf(mm.to_rows(), nr, nc, want_u=True, want_v=True)
    d = IntMatrix.zeros(nr, nc).to_rows()
    for i, x in enumerate(res.d):
        d[i][i] = x
    assert res.u is not None and res.v is not None
    return SmithForm(IntMatrix.from_rows(d, nc), IntMatrix.from_rows(res.u, nr),
                     IntMatrix.from_rows(res.v, nc))


# ---------------------------------------------------------------------------
# Solving and kernels


def solve_linear(m: IntMatrix | Sequence[Sequence[int]], b: Sequence[int],
                 cols: int | None = None) -> list[int] | None:
    """An integer x with m x = b, or None when no integer solution exists."""
    rows = as_rows(m)
    nr = len(rows)
    nc = len(rows[0]) if nr else (cols if cols is not None else
                                  (m.cols if isinstance(m, IntMatrix) else 0))
    if len(b) != nr:
        raise InputError(f"right-hand side has length {len(b)}, matrix has {nr} rows")
    res = _snf(rows, nr, nc, want_u=True, want_v=True)
    return _solve_from(res, nr, nc, b)


def _solve_from(res: _Snf, nr: int, nc: int, b: Sequence[int]) -> list[int] | None:
    assert res.u is not None and res.v is not None
    ub = mat_vec(res.u, b)
    y = [0] * nc
    for i in range(nr):
        if i < res.rank:
            q, r = divmod(ub[i], res.d[i])
            if r:
                return None
            y[i] = q
        elif ub[i]:
            return None
    return mat_vec(res.v, y)


class LinearSolver:
    """Factor a matrix once, then solve many right-hand sides."""

    def __init__(self, m: IntMatrix | Sequence[Sequence[int]], cols: int | None = None) -> None:
        rows = as_rows(m)
        self.nr = len(rows)
        self.nc = len(rows[0]) if self.nr else (cols if cols is not None else
                                                (m.cols if isinstance(m, IntMatrix) else 0))
        self._res = _snf(rows, self.nr, self.nc, want_u=True, want_v=True)

    def solve(self, b: Sequence[int]) -> list[int] | None:
        if len(b) != self.nr:
            raise InputError("right-hand side length mismatch")
        return _solve_from(self._res, self.nr, self.nc, b)


def integer_kernel(m: IntMatrix | Sequence[Sequence[int]], cols: int | None = None) -> Rows:
    """Basis of {x in Z^n : m x = 0}, returned as a list of vectors."""
    rows = as_rows(m)
    nr = len(rows)
    nc = len(rows[0]) if nr else (cols if cols is not None else
                                  (m.cols if isinstance(m, IntMatrix) else 0))
    res = _snf(rows, nr, nc, want_v=True)
    assert res.v is not None
    return [[res.v[i][j] for i in range(nc)] for j in range(res.rank, nc)]


def lattice_basis(gens: Sequence[Sequence[int]], dim: int) -> Rows:
    """A basis (as vectors) of the sublattice of Z^dim spanned by ``gens``."""
    if not gens:
        return []
    cols = transpose([list(g) for g in gens], len(gens), dim)
    res = _snf(cols, dim, len(gens), want_uinv=True)
    assert res.uinv is not None
    return [[res.uinv[i][j] * res.d[j] for i in range(dim)] for j in range(res.rank)]


# ---------------------------------------------------------------------------
# Finitely generated abelian groups


@dataclass(frozen=True)
class _Canon:
    """Change of basis putting a group in invariant-factor form."""

    u: Rows
    uinv: Rows
    mods: tuple[int, ...]          # one modulus per generator after the change
    keep: tuple[int, ...]          # positions whose modulus is not 1

    def normal(self, x: Sequence[int]) -> tuple[int, ...]:
        out = []
        for i in self.keep:
            val = sum(p * q for p, q in zip(self.u[i], x) if p)
            d = self.mods[i]
            out.append(val % d if d else val)
        return tuple(out)

    def lift(self, c: Sequence[int]) -> list[int]:
        y = [0] * len(self.mods)
        for pos, val in zip(self.keep, c):
            y[pos] = val
        return mat_vec(self.uinv, y)


@dataclass(frozen=True, eq=False)
class FgAbGroup:
    """Z^n modulo the row space of ``relations``.

    Equality and hashing go through the invariant factors, so two groups are
    equal exactly when they are isomorphic.

    :param ngens: number of generators
    :param relations: one relation per row, each of length ``ngens``
    """

    ngens: int
    relations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        for r in self.relations:
            if len(r) != self.ngens:
                raise InputError("relation length differs from generator count")

    @classmethod
    def from_relations(cls, ngens: int, relations: Iterable[Sequence[int]]) -> "FgAbGroup":
        rels = tuple(tuple(int(x) for x in r) for r in relations)
        return cls(ngens, tuple(r for r in rels if any(r)))

    @classmethod
    def free(cls, rank: int) -> "FgAbGroup":
        return cls(rank, ())

    @classmethod
    def trivial(cls) -> "FgAbGroup":
        return cls(0, ())

    @classmethod
    def cyclic(cls, n: int) -> "FgAbGroup":
        if n == 1:
            return cls.trivial()
        if n == 0:
            return cls.free(1)
        return cls(1, ((n,),))

    @classmethod
    def from_invariants(cls, factors: Sequence[int]) -> "FgAbGroup":
        facs = [int(f) for f in factors if int(f) != 1]
        if any(f < 0 for f in facs):
            raise InputError("invariant factors must be non-negative")
        rels = []
        for i, f in enumerate(facs):
            if f:
                rels.append(tuple(f if j == i else 0 for j in range(len(facs))))
        return cls(len(facs), tuple(rels))

    @cached_property
    def _canon(self) -> _Canon:
        g = self.ngens
        r = len(self.relations)
        cols = transpose([list(x) for x in self.relations], r, g) if r else [[] for _ in range(g)]
        res = _snf(cols, g, r, want_u=True, want_uinv=True)
        assert res.u is not None and res.uinv is not None
        mods = tuple(res.d[i] if i < res.rank else 0 for i in range(g))
        keep = tuple(i for i in range(g) if mods[i] != 1)
        return _Canon(res.u, res.uinv, mods, keep)

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        """Divisibility chain, 1s dropped, 0 for each free summand (listed last)."""
        c = self._canon
        return tuple(c.mods[i] for i in c.keep)

    @property
    def free_rank(self) -> int:
        return sum(1 for d in self.invariant_factors if d == 0)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d)

    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def is_finite(self) -> bool:
        return self.free_rank == 0

    def order(self) -> int | None:
        if not self.is_finite():
            return None
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FgAbGroup):
            return NotImplemented
        return self.invariant_factors == other.invariant_factors

    def __hash__(self) -> int:
        return hash(self.invariant_factors)

    def __repr__(self) -> str:
        return f"FgAbGroup{list(self.invariant_factors)}"

    def describe(self) -> str:
        if not self.invariant_factors:
            return "0"
        parts = ["Z" if d == 0 else f"Z/{d}" for d in self.invariant_factors]
        return " + ".join(parts)

    # element level -------------------------------------------------------

    def normal_form(self, x: Sequence[int]) -> tuple[int, ...]:
        """Canonical coordinates of x; equal exactly for congruent vectors."""
        if len(x) != self.ngens:
            raise InputError("element length differs from generator count")
        return self._canon.normal(x)

    def from_normal(self, c: Sequence[int]) -> list[int]:
        return self._canon.lift(c)

    def reduce(self, x: Sequence[int]) -> list[int]:
        """A deterministic representative of the class of x."""
        return self.from_normal(self.normal_form(x))

    def is_zero(self, x: Sequence[int]) -> bool:
        return not any(self.normal_form(x))

    def equal(self, x: Sequence[int], y: Sequence[int]) -> bool:
        return self.is_zero([a - b for a, b in zip(x, y)])

    def zero(self) -> list[int]:
        return [0] * self.ngens

    def elements(self) -> Iterator[list[int]]:
        """Every element once, as reduced coordinate vectors (finite groups only)."""
        if not self.is_finite():
            raise InputError("cannot enumerate an infinite group")
        for c in itertools.product(*(range(d) for d in self.invariant_factors)):
            yield self.from_normal(c)

    def element(self, coords: Sequence[int]) -> "AbElement":
        return AbElement(self, tuple(int(x) for x in coords))

    def relation_rows(self) -> Rows:
        return [list(r) for r in self.relations]

    def to_json(self) -> dict:
        return {"generators": self.ngens,
                "relations": [[str(x) for x in r] for r in self.relations]}

    @classmethod
    def from_json(cls, data: Mapping | Sequence) -> "FgAbGroup":
        if isinstance(data, Mapping):
            if "invariants" in data:
                return cls.from_invariants([int(str(x)) for x in data["invariants"]])
            try:
                g = int(data["generators"])
                rels = [[int(str(x)) for x in r] for r in data.get("relations", [])]
            except (KeyError, ValueError, TypeError) as exc:
                raise InputError(f"bad group description: {exc}") from exc
            return cls.from_relations(g, rels)
        return cls.from_invariants([int(str(x)) for x in data])


def direct_sum(groups: Sequence[FgAbGroup]) -> FgAbGroup:
    total = sum(g.ngens for g in groups)
    rels: list[tuple[int, ...]] = []
    off = 0
    for g in groups:
        for r in g.relations:
            rels.append((0,) * off + r + (0,) * (total - off - g.ngens))
        off += g.ngens
    return FgAbGroup(total, tuple(rels))


def group_from_table(elements: Sequence[str], add: Mapping[tuple[str, str], str]
                     ) -> tuple[FgAbGroup, dict[str, tuple[int, ...]], dict[tuple[int, ...], str]]:
    """A finite abelian group given by its addition table, in invariant-factor form.

    Returns the group, the encoding of each element as canonical coordinates,
    and its inverse.  The table is checked to be an abelian group law.
    """
    els = list(elements)
    n = len(els)
    pos = {e: i for i, e in enumerate(els)}
    if len(pos) != n or n == 0:
        raise InputError("element labels must be distinct and non-empty")
    for a in els:
        for b in els:
            if add.get((a, b)) not in pos:
                raise InputError(f"addition table has no valid entry for ({a}, {b})")
            if add[(a, b)] != add[(b, a)]:
                raise InputError(f"addition is not commutative at ({a}, {b})")
    for a in els:
        for b in els:
            ab = add[(a, b)]
            for c in els:
                if add[(ab, c)] != add[(a, add[(b, c)])]:
                    raise InputError(f"addition is not associative at ({a}, {b}, {c})")
    rels = []
    for a in els:
        for b in els:
            r = [0] * n
            r[pos[a]] += 1
            r[pos[b]] += 1
            r[pos[add[(a, b)]]] -= 1
            rels.append(r)
    big = FgAbGroup.from_relations(n, rels)
    encode = {e: big.normal_form([int(i == pos[e]) for i in range(n)]) for e in els}
    decode = {v: e for e, v in encode.items()}
    group = FgAbGroup.from_invariants(big.invariant_factors)
    if len(decode) != n or group.order() != n:
        raise InputError("addition table is not a group law (no neutral element or inverses)")
    return group, encode, decode


@dataclass(frozen=True)
class AbElement:
    group: FgAbGroup
    coords: tuple[int, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbElement):
            return NotImplemented
        return self.group == other.group and self.group.equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash(self.group.normal_form(self.coords))

    def __add__(self, other: "AbElement") -> "AbElement":
        return AbElement(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "AbElement":
        return AbElement(self.group, tuple(-a for a in self.coords))

    def __sub__(self, other: "AbElement") -> "AbElement":
        return self + (-other)

    def is_zero(self) -> bool:
        return self.group.is_zero(self.coords)


@dataclass(frozen=True, eq=False)
class AbHom:
    """Homomorphism given by a (target gens x source gens) integer matrix."""

    source: FgAbGroup
    target: FgAbGroup
    matrix: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, source: FgAbGroup, target: FgAbGroup,
                  rows: Sequence[Sequence[int]]) -> "AbHom":
        mat = tuple(tuple(int(x) for x in r) for r in rows)
        if len(mat) != target.ngens or any(len(r) != source.ngens for r in mat):
            raise InputError(
                f"hom matrix must be {target.ngens}x{source.ngens}")
        return cls(source, target, mat)

    @classmethod
    def identity(cls, g: FgAbGroup) -> "AbHom":
        return cls(g, g, tuple(tuple(int(i == j) for j in range(g.ngens)) for i in range(g.ngens)))

    @classmethod
    def zero(cls, source: FgAbGroup, target: FgAbGroup) -> "AbHom":
        return cls(source, target, tuple((0,) * source.ngens for _ in range(target.ngens)))

    def apply(self, x: Sequence[int]) -> list[int]:
        return [sum(p * q for p, q in zip(r, x) if p) for r in self.matrix]

    def rows(self) -> Rows:
        return [list(r) for r in self.matrix]

    def compose_after(self, other: "AbHom") -> "AbHom":
        """self o other."""
        m = matmul(self.rows(), other.rows(), other.source.ngens) if self.matrix else []
        return AbHom(other.source, self.target, tuple(tuple(r) for r in m))

    def is_well_defined(self) -> bool:
        return all(self.target.is_zero(self.apply(r)) for r in self.source.relations)

    def equals(self, other: "AbHom") -> bool:
        """Equality as maps (images of generators agree modulo relations)."""
        for j in range(self.source.ngens):
            e = [int(i == j) for i in range(self.source.ngens)]
            if not self.target.equal(self.apply(e), other.apply(e)):
                return False
        return True

    def kernel(self) -> "Subquotient":
        return subquotient(self.source, [self], [])

    def cokernel(self) -> FgAbGroup:
        cols = transpose(self.rows(), self.target.ngens, self.source.ngens)
        return FgAbGroup.from_relations(self.target.ngens, list(self.target.relations) + cols)

    def is_isomorphism(self) -> bool:
        return self.kernel().group.is_trivial() and self.cokernel().is_trivial()

    def inverse(self) -> "AbHom":
        """The inverse of an isomorphism; raises ValidationError otherwise."""
        if not self.is_isomorphism():
            raise ValidationError("map is not an isomorphism")
        s, t = self.source, self.target
        rels = t.relations
        full = [list(r) + [rel[i] for rel in rels] for i, r in enumerate(self.matrix)]
        width = s.ngens + len(rels)
        solver = LinearSolver(full, width) if full else None
        cols = []
        for j in range(t.ngens):
            e = [int(i == j) for i in range(t.ngens)]
            x = solver.solve(e) if solver is not None else []
            if x is None:
                raise ValidationError("map is not surjective on generators")
            cols.append(s.reduce(x[:s.ngens]))
        rows = tuple(tuple(cols[j][i] for j in range(t.ngens)) for i in range(s.ngens))
        return AbHom(t, s, rows)

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.matrix]


@dataclass(frozen=True, eq=False)
class HomGroup:
    """Hom(G, H) as a group of "cells".

    In canonical coordinates G = sum Z/d_i and H = sum Z/e_j, a homomorphism
    is a matrix Y with Y[j][i] a multiple of e_j / gcd(d_i, e_j); the cell
    (i, j) carries that multiple modulo gcd(d_i, e_j).
    """

    source: FgAbGroup
    target: FgAbGroup
    group: FgAbGroup
    cells: tuple[tuple[int, int, int], ...]      # (i, j, step)

    @classmethod
    def build(cls, source: FgAbGroup, target: FgAbGroup) -> "HomGroup":
        d, e = source.invariant_factors, target.invariant_factors
        cells = []
        mods = []
        for i, di in enumerate(d):
            for j, ej in enumerate(e):
                g = math.gcd(di, ej)
                if ej == 0 and di != 0:
                    continue
                step = ej // g if g else 1
                if g == 1:
                    continue
                cells.append((i, j, step))
                mods.append(g)
        rels = tuple(tuple(m if k == c else 0 for k in range(len(mods))) for c, m in enumerate(mods) if m)
        return cls(source, target, FgAbGroup(len(mods), rels), tuple(cells))

    def to_hom(self, x: Sequence[int]) -> AbHom:
        s, t = self.source, self.target
        ns, nt = len(s.invariant_factors), len(t.invariant_factors)
        y = [[0] * ns for _ in range(nt)]
        for (i, j, step), v in zip(self.cells, x):
            y[j][i] += step * v
        cols = []
        for k in range(s.ngens):
            c = s.normal_form([int(q == k) for q in range(s.ngens)])
            cols.append(t.from_normal([sum(y[j][i] * c[i] for i in range(ns)) for j in range(nt)]))
        rows = tuple(tuple(cols[k][r] for k in range(s.ngens)) for r in range(t.ngens))
        return AbHom(s, t, rows)

    def coords(self, h: AbHom) -> list[int]:
        s, t = self.source, self.target
        imgs = []
        for i in range(len(s.invariant_factors)):
            e = [int(q == i) for q in range(len(s.invariant_factors))]
            imgs.append(t.normal_form(h.apply(s.from_normal(e))))
        out = []
        for i, j, step in self.cells:
            q, r = divmod(imgs[i][j], step)
            if r:
                raise ValidationError("map is not a homomorphism of the groups")
            out.append(q)
        return out


def hom_tuple(source: FgAbGroup, parts: Sequence[AbHom]) -> AbHom:
    """The map x -> (h1 x, ..., hk x) into the direct sum of the targets."""
    target = direct_sum([h.target for h in parts])
    rows: list[tuple[int, ...]] = []
    for h in parts:
        rows.extend(h.matrix)
    return AbHom(source, target, tuple(rows))


# ---------------------------------------------------------------------------
# Subquotients and homology


@dataclass(frozen=True)
class Subquotient:
    """Z / B where Z is a lattice of cycles in an ambient group.

    ``group`` is in invariant-factor form; ``classify`` sends an ambient
    vector lying in Z to canonical coordinates, ``represent`` goes back.
    """

    ambient: FgAbGroup
    group: FgAbGroup
    basis: tuple[tuple[int, ...], ...]      # ambient vectors spanning Z
    _basis_solver: "_BasisCoords" = field(repr=False)
    _rel_u: Rows = field(repr=False)
    _rel_uinv: Rows = field(repr=False)
    _mods: tuple[int, ...] = field(repr=False)
    _keep: tuple[int, ...] = field(repr=False)

    def cycle_coords(self, x: Sequence[int]) -> list[int] | None:
        return self._basis_solver.coords(x)

    def classify(self, x: Sequence[int]) -> tuple[int, ...]:
        y = self.cycle_coords(x)
        if y is None:
            raise ValidationError("vector is not a cycle")
        out = []
        for i in self._keep:
            val = sum(p * q for p, q in zip(self._rel_u[i], y) if p)
            d = self._mods[i]
            out.append(val % d if d else val)
        return tuple(out)

    def contains(self, x: Sequence[int]) -> bool:
        return self.cycle_coords(x) is not None

    def represent(self, c: Sequence[int]) -> list[int]:
        k = len(self.basis)
        y0 = [0] * k
        for pos, val in zip(self._keep, c):
            y0[pos] = int(val)
        y = mat_vec(self._rel_uinv, y0) if k else []
        out = [0] * self.ambient.ngens
        for coef, vec in zip(y, self.basis):
            if coef:
                for i, v in enumerate(vec):
                    if v:
                        out[i] += coef * v
        return out

    def is_trivial_class(self, x: Sequence[int]) -> bool:
        return not any(self.classify(x))

    def generators(self) -> list[list[int]]:
        """Representatives of the canonical generators of the group."""
        n = len(self._keep)
        return [self.represent([int(i == j) for j in range(n)]) for i in range(n)]


class _BasisCoords:
    """Coordinates with respect to a full-column-rank lattice basis."""

    def __init__(self, basis: Rows, dim: int) -> None:
        self.k = len(basis)
        self.dim = dim
        if self.k:
            cols = transpose(basis, self.k, dim)
            self._res = _snf(cols, dim, self.k, want_u=True, want_v=True)

    def coords(self, x: Sequence[int]) -> list[int] | None:
        if self.k == 0:
            return [] if not any(x) else None
        return _solve_from(self._res, self.dim, self.k, x)


def subquotient(ambient: FgAbGroup, outgoing: Sequence[AbHom],
                incoming: Sequence[AbHom], extra_boundaries: Sequence[Sequence[int]] = ()
                ) -> Subquotient:
    """(intersection of kernels of ``outgoing``) / (sum of images of ``incoming``).

    All maps are taken modulo the relations of their groups.
    """
    g = ambient.ngens
    # cycles: x with h(x) in rel(target) for every outgoing h
    if outgoing:
        blocks: Rows = []
        total_aux = sum(len(h.target.relations) for h in outgoing)
        aux_off = 0
        for h in outgoing:
            rel_t = h.target.relations
            for i, row in enumerate(h.matrix):
                aux = [0] * total_aux
                for k, r in enumerate(rel_t):
                    aux[aux_off + k] = r[i]
                blocks.append(list(row) + aux)
            aux_off += len(rel_t)
        if blocks:
            ker = integer_kernel(blocks, g + total_aux)
            zgens = [v[:g] for v in ker]
            # ambient relations are cycles too; include them so Z contains rel(ambient)
            zgens.extend(list(r) for r in ambient.relations)
            basis = lattice_basis(zgens, g)
        else:
            basis = identity_rows(g)
    else:
        basis = identity_rows(g)
    coords = _BasisCoords(basis, g)
    k = len(basis)
    rels: Rows = []
    for r in ambient.relations:
        y = coords.coords(r)
        assert y is not None
        rels.append(y)
    for h in incoming:
        for j in range(h.source.ngens):
            col = [h.matrix[i][j] for i in range(g)]
            if not any(col):
                continue
            y = coords.coords(col)
            if y is None:
                raise ValidationError("incoming map does not land in the cycles")
            rels.append(y)
    for b in extra_boundaries:
        y = coords.coords(b)
        if y is None:
            raise ValidationError("boundary vector is not a cycle")
        rels.append(y)
    rels = [r for r in rels if any(r)]
    cols = transpose(rels, len(rels), k) if rels else [[] for _ in range(k)]
    res = _snf(cols, k, len(rels), want_u=True, want_uinv=True)
    assert res.u is not None and res.uinv is not None
    mods = tuple(res.d[i] if i < res.rank else 0 for i in range(k))
    keep = tuple(i for i in range(k) if mods[i] != 1)
    group = FgAbGroup.from_invariants([mods[i] for i in keep])
    return Subquotient(ambient, group, tuple(tuple(b) for b in basis), coords,
                       res.u, res.uinv, mods, keep)


@dataclass(frozen=True)
class ChainComplexZ:
    """Groups and differentials indexed by integer degree.

    ``differentials[n]`` goes from degree n to degree n + step.  The default
    step of -1 is a chain complex; cochain complexes use step = +1.  Missing
    degrees are zero groups.
    """

    groups: Mapping[int, FgAbGroup]
    differentials: Mapping[int, AbHom]
    step: int = -1

    def group(self, n: int) -> FgAbGroup:
        return self.groups.get(n, FgAbGroup.trivial())

    def validate(self) -> None:
        for n, dn in self.differentials.items():
            if dn.source != self.group(n) or dn.target != self.group(n + self.step):
                if dn.source.ngens != self.group(n).ngens or \
                        dn.target.ngens != self.group(n + self.step).ngens:
                    raise ValidationError(f"differential at degree {n} has wrong shape")
            if not dn.is_well_defined():
                raise ValidationError(f"differential at degree {n} is not well defined")
            nxt = self.differentials.get(n + self.step)
            if nxt is not None:
                comp = nxt.compose_after(dn)
                if not all(comp.target.is_zero(comp.apply([int(i == j) for i in range(dn.source.ngens)]))
                           for j in range(dn.source.ngens)):
                    raise ValidationError(f"d o d is nonzero at degree {n}")


def homology_at(c: ChainComplexZ, n: int, check: bool = True) -> Subquotient:
    """ker(d_n) / im(d_{n-step}) in canonical form, with class lifting."""
    if check:
        c.validate()
    amb = c.group(n)
    out = [c.differentials[n]] if n in c.differentials else []
    inc = [c.differentials[n - c.step]] if (n - c.step) in c.differentials else []
    return subquotient(amb, out, inc)
