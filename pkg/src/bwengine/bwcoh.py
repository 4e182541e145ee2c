"""Cochains of a finite category with coefficients in a natural system.

C^n(C; D) is the product of D_{a1...an} over composable tuples
A0 <-a1- A1 <- ... <-an- An; in degree 0 it is the product of D_{1_A} over
objects.  The coboundary is

    (d phi)(a1, ..., a_{n+1}) = a1 phi(a2, ..., a_{n+1})
        + sum_{i=1..n} (-1)^i phi(a1, ..., a_i a_{i+1}, ..., a_{n+1})
        + (-1)^{n+1} phi(a1, ..., a_n) a_{n+1}.

Cochain vectors concatenate the coordinates of each tuple's group in the
lexicographic tuple order of ``FinCat.composable_tuples``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .abelcore import AbHom, FgAbGroup, Subquotient, _snf, _solve_from, subquotient, transpose
from .errors import InputError, UnsupportedInputError, ValidationError
from .fincat import FinCat, FunctorData, carrier_section
from .natsys import NaturalSystem, pullback_natural_system

DEFAULT_DEGREE_CAP = 4
MAX_DENSE_ENTRIES = 60_000_000

Tuple = tuple[str, ...]


@dataclass(frozen=True, eq=False)
class Cochain:
    """An n-cochain: a value in D_{a1...an} for every composable n-tuple.

    In degree 0 the keys are 1-tuples of objects.
    """

    base: FinCat
    coeff: NaturalSystem
    degree: int
    values: Mapping[Tuple, tuple[int, ...]]

    def __call__(self, *args: str) -> tuple[int, ...]:
        return self.values[tuple(args)]

    def group_at(self, t: Tuple) -> FgAbGroup:
        return self.coeff.groups[_composite(self.base, self.degree, t)]

    def is_zero(self) -> bool:
        return all(self.group_at(t).is_zero(v) for t, v in self.values.items())

    def equals(self, other: "Cochain") -> bool:
        if self.degree != other.degree:
            return False
        return all(self.group_at(t).equal(v, other.values[t]) for t, v in self.values.items())

    def __add__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.base, self.coeff, self.degree,
                       {t: tuple(a + b for a, b in zip(v, other.values[t])) for t, v in self.values.items()})

    def __neg__(self) -> "Cochain":
        return Cochain(self.base, self.coeff, self.degree,
                       {t: tuple(-a for a in v) for t, v in self.values.items()})

    def __sub__(self, other: "Cochain") -> "Cochain":
        return self + (-other)

    def scaled(self, k: int) -> "Cochain":
        return Cochain(self.base, self.coeff, self.degree,
                       {t: tuple(k * a for a in v) for t, v in self.values.items()})

    def reduced(self) -> "Cochain":
        return Cochain(self.base, self.coeff, self.degree,
                       {t: tuple(self.group_at(t).reduce(v)) for t, v in self.values.items()})

    def is_normalized(self) -> bool:
        """Vanishes on every tuple containing an identity (degree >= 1)."""
        if self.degree == 0:
            return True
        c = self.base
        return all(self.group_at(t).is_zero(v) for t, v in self.values.items()
                   if any(c.is_identity(a) for a in t))

    def to_json(self) -> dict:
        return {"degree": self.degree,
                "values": [{"tuple": list(t), "value": [str(x) for x in v]}
                           for t, v in sorted(self.values.items()) if any(v)]}

    @classmethod
    def from_json(cls, d: NaturalSystem, data: Mapping) -> "Cochain":
        try:
            n = int(data["degree"])
            given = {tuple(str(x) for x in item["tuple"]): tuple(int(str(v)) for v in item["value"])
                     for item in data["values"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed cochain: {exc!r}") from exc
        cx = CochainComplex(d)
        vals = {}
        for t in cx.tuples(n):
            g = d.groups[_composite(d.base, n, t)]
            v = given.pop(t, None)
            vals[t] = v if v is not None else (0,) * g.ngens
            if len(vals[t]) != g.ngens:
                raise InputError(f"value at {list(t)} has the wrong length")
        if given:
            raise InputError(f"values given at non-composable tuples: {sorted(given)[:3]}")
        return cls(d.base, d, n, vals)


def _composite(c: FinCat, n: int, t: Tuple) -> str:
    if n == 0:
        return c.identities[t[0]]
    return c.compose_many(t)


class CochainComplex:
    """The cochain complex C*(C; D), materialized degree by degree on demand."""

    def __init__(self, d: NaturalSystem) -> None:
        self.coeff = d
        self.base = d.base

    def tuples(self, n: int) -> list[Tuple]:
        return self.base.composable_tuples(n)

    def composites(self, n: int) -> list[str]:
        return self.base.tuple_composites(n)

    @cached_property
    def _layout_cache(self) -> dict[int, tuple[dict[Tuple, int], list[int], int]]:
        return {}

    def layout(self, n: int) -> tuple[dict[Tuple, int], list[int], int]:
        """(tuple -> position, start offset per position, total generator count)."""
        cache = self._layout_cache
        if n not in cache:
            tups = self.tuples(n)
            comps = self.composites(n)
            index = {t: i for i, t in enumerate(tups)}
            offs = []
            off = 0
            for cmp in comps:
                offs.append(off)
                off += self.coeff.groups[cmp].ngens
            cache[n] = (index, offs, off)
        return cache[n]

    def dimension(self, n: int) -> int:
        return self.layout(n)[2]

    def _guard(self, n: int) -> None:
        size = self.dimension(n) * self.dimension(n + 1)
        if size > MAX_DENSE_ENTRIES:
            raise UnsupportedInputError(
                f"the differential C^{n} -> C^{n + 1} has {size} entries, above the guard {MAX_DENSE_ENTRIES}")

    @cached_property
    def _group_cache(self) -> dict[int, FgAbGroup]:
        return {}

    def group(self, n: int) -> FgAbGroup:
        if n < 0:
            return FgAbGroup.trivial()
        cache = self._group_cache
        if n not in cache:
            _, offs, total = self.layout(n)
            rels: list[tuple[int, ...]] = []
            for off, cmp in zip(offs, self.composites(n)):
                g = self.coeff.groups[cmp]
                for r in g.relations:
                    row = [0] * total
                    row[off:off + g.ngens] = r
                    rels.append(tuple(row))
            cache[n] = FgAbGroup(total, tuple(rels))
        return cache[n]

    # vectors <-> cochains ----------------------------------------------

    def to_vector(self, phi: Cochain) -> list[int]:
        _, offs, total = self.layout(phi.degree)
        vec = [0] * total
        for t, off in zip(self.tuples(phi.degree), offs):
            v = phi.values[t]
            vec[off:off + len(v)] = v
        return vec

    def from_vector(self, n: int, vec: Sequence[int]) -> Cochain:
        _, offs, _total = self.layout(n)
        vals = {}
        for t, off, cmp in zip(self.tuples(n), offs, self.composites(n)):
            k = self.coeff.groups[cmp].ngens
            vals[t] = tuple(vec[off:off + k])
        return Cochain(self.base, self.coeff, n, vals)

    def zero(self, n: int) -> Cochain:
        return self.from_vector(n, [0] * self.dimension(n))

    # coboundary ------------------------------------------------------------

    def _terms(self, n: int, s: Tuple) -> list[tuple[int, Tuple, AbHom | None]]:
        """Summands of (d phi)(s) for an (n+1)-tuple s: (sign, face tuple, action or None=identity)."""
        c = self.base
        d = self.coeff
        terms: list[tuple[int, Tuple, AbHom | None]] = []
        if n == 0:
            a = s[0]
            A1, A0 = c.morphisms[a]
            terms.append((1, (A1,), d.left[(a, c.identities[A1])]))
            terms.append((-1, (A0,), d.right[(c.identities[A0], a)]))
            return terms
        rest = s[1:]
        terms.append((1, rest, d.left[(s[0], c.compose_many(rest))]))
        for i in range(1, n + 1):
            merged = s[:i - 1] + (c.table[(s[i - 1], s[i])],) + s[i + 1:]
            terms.append(((-1) ** i, merged, None))
        head = s[:-1]
        terms.append(((-1) ** (n + 1), head, d.right[(c.compose_many(head), s[-1])]))
        return terms

    def coboundary(self, phi: Cochain) -> Cochain:
        n = phi.degree
        vals = {}
        for s, cmp in zip(self.tuples(n + 1), self.composites(n + 1)):
            acc = [0] * self.coeff.groups[cmp].ngens
            for sign, face, act in self._terms(n, s):
                v = phi.values[face]
                img = act.apply(v) if act is not None else v
                for i, x in enumerate(img):
                    if x:
                        acc[i] += sign * x
            vals[s] = tuple(acc)
        return Cochain(self.base, self.coeff, n + 1, vals)

    @cached_property
    def _matrix_cache(self) -> dict[int, list[list[int]]]:
        return {}

    def matrix(self, n: int) -> list[list[int]]:
        """Dense matrix of d: C^n -> C^{n+1} (rows index C^{n+1} generators)."""
        cache = self._matrix_cache
        if n in cache:
            return cache[n]
        self._guard(n)
        index, offs, total = self.layout(n)
        _, offs1, total1 = self.layout(n + 1)
        rows = [[0] * total for _ in range(total1)]
        for s, off1, cmp1 in zip(self.tuples(n + 1), offs1, self.composites(n + 1)):
            k = self.coeff.groups[cmp1].ngens
            for sign, face, act in self._terms(n, s):
                off = offs[index[face]]
                if act is None:
                    for i in range(k):
                        rows[off1 + i][off + i] += sign
                else:
                    for i, r in enumerate(act.matrix):
                        row = rows[off1 + i]
                        for j, x in enumerate(r):
                            if x:
                                row[off + j] += sign * x
        cache[n] = rows
        return rows

    def differential(self, n: int) -> AbHom:
        return AbHom(self.group(n), self.group(n + 1), tuple(tuple(r) for r in self.matrix(n)))

    # elementary coefficients -----------------------------------------------

    @cached_property
    def elementary_prime(self) -> int | None:
        """p when every D_f is presented as (Z/p)^r with relations p*e_i, else None."""
        found = None
        for g in self.coeff.groups.values():
            if g.ngens == 0:
                continue
            if len(g.relations) != g.ngens:
                return None
            for i, r in enumerate(g.relations):
                d = r[i]
                if d < 2 or any(x for j, x in enumerate(r) if j != i):
                    return None
                if found is None:
                    found = d
                elif d != found:
                    return None
        if found is None or not kernels._is_prime(found):
            return None
        return found

    @cached_property
    def _np_cache(self) -> dict[int, np.ndarray]:
        return {}

    def matrix_np(self, n: int) -> np.ndarray:
        """The matrix of d: C^n -> C^{n+1} as an int64 array."""
        cache = self._np_cache
        if n in cache:
            return cache[n]
        self._guard(n)
        index, offs, total = self.layout(n)
        _, offs1, total1 = self.layout(n + 1)
        out = np.zeros((total1, total), dtype=np.int64)
        blocks: dict[int, np.ndarray] = {}
        for s, off1, cmp1 in zip(self.tuples(n + 1), offs1, self.composites(n + 1)):
            k = self.coeff.groups[cmp1].ngens
            if k == 0:
                continue
            for sign, face, act in self._terms(n, s):
                off = offs[index[face]]
                if act is None:
                    out[range(off1, off1 + k), range(off, off + k)] += sign
                else:
                    blk = blocks.get(id(act))
                    if blk is None:
                        blk = np.array(act.matrix, dtype=np.int64).reshape(k, act.source.ngens)
                        blocks[id(act)] = blk
                    out[off1:off1 + k, off:off + blk.shape[1]] += sign * blk
        cache[n] = out
        return out

    # cohomology ------------------------------------------------------------

    def cohomology(self, n: int) -> "CohomologyGroup":
        if n < 0:
            raise InputError("degree must be non-negative")
        p = self.elementary_prime
        if p is not None:
            return CohomologyGroup(self, n, ModPSubquotient.build(self, n, p))
        out = [self.differential(n)]
        inc = [self.differential(n - 1)] if n >= 1 else []
        sq = subquotient(self.group(n), out, inc)
        return CohomologyGroup(self, n, sq)


class ModPSubquotient:
    """ker d^n / im d^{n-1} over F_p for elementary coefficients.

    Same interface as ``abelcore.Subquotient``.  The frame stacks a basis of
    the coboundaries (in reduced echelon form) over a complement inside the
    cocycles; class coordinates are the complement coefficients.
    """

    def __init__(self, ambient: FgAbGroup, p: int, outgoing: np.ndarray,
                 bound: np.ndarray, comp: np.ndarray) -> None:
        self.ambient = ambient
        self.p = p
        self.outgoing = outgoing
        self.group = FgAbGroup.from_invariants([p] * comp.shape[0])
        self.nb = bound.shape[0]
        frame = np.vstack([bound, comp]) if (bound.size or comp.size) else np.zeros((0, ambient.ngens), np.int64)
        self.frame = frame
        k = frame.shape[0]
        if k:
            aug = np.hstack([frame, np.eye(k, dtype=np.int64)])
            r, piv = kernels.rref_mod_p(aug, p, ncols=frame.shape[1])
            self._pivots = piv
            self._transform = r[:, frame.shape[1]:]
        else:
            self._pivots = []
            self._transform = np.zeros((0, 0), np.int64)
        self.basis = tuple(tuple(int(x) for x in row) for row in comp)

    @classmethod
    def build(cls, cx: "CochainComplex", n: int, p: int) -> "ModPSubquotient":
        dim = cx.dimension(n)
        d_out = np.mod(cx.matrix_np(n), p)
        if d_out.shape[0]:
            z = kernels.nullspace_mod_p(d_out, p)
        else:
            z = np.eye(dim, dtype=np.int64)
        if n >= 1 and cx.dimension(n - 1):
            b_rows = np.mod(cx.matrix_np(n - 1).T, p)
            bb, bpiv = kernels.rref_mod_p(b_rows, p)
        else:
            bb, bpiv = np.zeros((0, dim), np.int64), []
        red = np.mod(z, p)
        for i, j in enumerate(bpiv):
            coef = red[:, j].copy()
            if coef.any():
                red = np.mod(red - np.outer(coef, bb[i]), p)
        if red.shape[0]:
            comp, _ = kernels.rref_mod_p(red, p)
        else:
            comp = np.zeros((0, dim), np.int64)
        return cls(cx.group(n), p, d_out, bb, comp)

    def _coeffs(self, x: Sequence[int]) -> np.ndarray | None:
        v = np.mod(np.asarray(list(x), dtype=np.int64), self.p)
        k = self.frame.shape[0]
        if k == 0:
            return np.zeros(0, np.int64) if not v.any() else None
        c = np.mod(v[self._pivots] @ self._transform, self.p)
        if np.any(np.mod(c @ self.frame - v, self.p)):
            return None
        return c

    def contains(self, x: Sequence[int]) -> bool:
        v = np.asarray(list(x), dtype=np.int64)
        if self.outgoing.shape[0] and np.any(np.mod(self.outgoing @ v, self.p)):
            return False
        return True

    def classify(self, x: Sequence[int]) -> tuple[int, ...]:
        if not self.contains(x):
            raise ValidationError("vector is not a cycle")
        c = self._coeffs(x)
        if c is None:
            raise ValidationError("vector is not a cycle")
        return tuple(int(v) for v in c[self.nb:])

    def represent(self, c: Sequence[int]) -> list[int]:
        out = np.zeros(self.ambient.ngens, dtype=np.int64)
        for coef, row in zip(c, self.frame[self.nb:]):
            if coef:
                out = out + int(coef) * row
        return [int(v) % self.p for v in out]

    def is_trivial_class(self, x: Sequence[int]) -> bool:
        return not any(self.classify(x))

    def generators(self) -> list[list[int]]:
        n = self.frame.shape[0] - self.nb
        return [self.represent([int(i == j) for j in range(n)]) for i in range(n)]


@dataclass(frozen=True)
class CohomologyClass:
    degree: int
    group: FgAbGroup
    coords: tuple[int, ...]
    representative: Cochain

    def is_zero(self) -> bool:
        return not any(self.coords)

    def to_json(self) -> dict:
        return {"degree": self.degree, "group": list(self.group.invariant_factors),
                "class": [str(x) for x in self.coords],
                "representative": self.representative.to_json()}


@dataclass(frozen=True)
class CohomologyGroup:
    """H^n with maps between cocycles and canonical class coordinates."""

    complex: CochainComplex
    degree: int
    data: "Subquotient | ModPSubquotient"

    @property
    def group(self) -> FgAbGroup:
        return self.data.group

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        return self.group.invariant_factors

    def is_cocycle(self, phi: Cochain) -> bool:
        return self.complex.coboundary(phi).is_zero()

    def classify(self, phi: Cochain) -> tuple[int, ...]:
        if phi.degree != self.degree:
            raise InputError("cochain degree does not match")
        return self.data.classify(self.complex.to_vector(phi))

    def class_of(self, phi: Cochain) -> CohomologyClass:
        return CohomologyClass(self.degree, self.group, self.classify(phi), phi)

    def representative(self, coords: Sequence[int]) -> Cochain:
        return self.complex.from_vector(self.degree, self.data.represent(coords))

    def elements(self) -> list[tuple[int, ...]]:
        return [tuple(self.group.normal_form(x)) for x in self.group.elements()]


def coboundary(phi: Cochain) -> Cochain:
    return CochainComplex(phi.coeff).coboundary(phi)


def _check_degree(n: int, cap: int) -> None:
    if n < 0:
        raise InputError("degree must be non-negative")
    if n > cap:
        raise UnsupportedInputError(f"degree {n} exceeds the degree cap {cap}")


def cohomology(c: FinCat, d: NaturalSystem, n: int, cap: int = DEFAULT_DEGREE_CAP) -> CohomologyGroup:
    _check_degree(n, cap)
    if d.base is not c and d.base.morphism_ids != c.morphism_ids:
        raise InputError("natural system is defined on a different category")
    return CochainComplex(d).cohomology(n)


# ---------------------------------------------------------------------------
# Normalization


def normalizing_cochain(z: Cochain) -> Cochain | None:
    """psi of degree n-1 with z - d psi vanishing on tuples containing an identity.

    Returns None if no such psi exists.  ``z`` need not be a cocycle.
    """
    n = z.degree
    if n == 0:
        raise InputError("degree-0 cochains have nothing to normalize")
    cx = CochainComplex(z.coeff)
    c = z.base
    index, offs, _ = cx.layout(n)
    mat = cx.matrix(n - 1)
    rows: list[list[int]] = []
    rhs: list[int] = []
    aux_rows: list[tuple[int, int, FgAbGroup]] = []
    for t, off, cmp in zip(cx.tuples(n), offs, cx.composites(n)):
        if not any(c.is_identity(a) for a in t):
            continue
        g = z.coeff.groups[cmp]
        for i in range(g.ngens):
            rows.append(mat[off + i])
            rhs.append(z.values[t][i])
            aux_rows.append((len(rows) - 1, i, g))
    if not rows:
        return cx.zero(n - 1)
    prime = cx.elementary_prime
    if prime is not None:
        sel = [off + i for t, off, cmp in zip(cx.tuples(n), offs, cx.composites(n))
               if any(c.is_identity(a) for a in t) for i in range(z.coeff.groups[cmp].ngens)]
        x = kernels.solve_mod_p(cx.matrix_np(n - 1)[sel], np.array(rhs, dtype=np.int64), prime)
        return None if x is None else cx.from_vector(n - 1, [int(v) for v in x])
    # relations of the target groups enter as extra unknowns
    base_cols = cx.dimension(n - 1)
    extra: list[list[int]] = []
    r0 = 0
    for t, off, cmp in zip(cx.tuples(n), offs, cx.composites(n)):
        if not any(c.is_identity(a) for a in t):
            continue
        g = z.coeff.groups[cmp]
        for rel in g.relations:
            col = [0] * len(rows)
            for i, x in enumerate(rel):
                col[r0 + i] = x
            extra.append(col)
        r0 += g.ngens
    full = [row + [col[k] for col in extra] for k, row in enumerate(rows)]
    res = _snf([r[:] for r in full], len(full), base_cols + len(extra), want_u=True, want_v=True)
    sol = _solve_from(res, len(full), base_cols + len(extra), rhs)
    if sol is None:
        return None
    return cx.from_vector(n - 1, sol[:base_cols])


def normalize(z: Cochain) -> tuple[Cochain, Cochain]:
    """(z', psi) with z' = z - d psi normalized; raises if impossible."""
    psi = normalizing_cochain(z)
    if psi is None:
        raise ValidationError("no normalized representative exists for this cochain")
    zn = (z - coboundary(psi)).reduced()
    return zn, psi


# ---------------------------------------------------------------------------
# Relative cohomology


def pullback_cochain(p: FunctorData, phi: Cochain, dk: NaturalSystem | None = None) -> Cochain:
    """(p* phi)(k1, ..., kn) = phi(p k1, ..., p kn) as a cochain on the source of p."""
    dk = dk if dk is not None else pullback_natural_system(p, phi.coeff)
    k = p.source
    n = phi.degree
    vals = {}
    for t in k.composable_tuples(n):
        if n == 0:
            vals[t] = phi.values[(p.obj_map[t[0]],)]
        else:
            vals[t] = phi.values[tuple(p.mor_map[a] for a in t)]
    return Cochain(k, dk, n, vals)


class RelativeComplex:
    """Quotient complex C*(K; p*D) / p* C*(C; D) for p: K -> C full and identity on objects.

    H^n(C, K; D) is its homology in degree n - 1.
    """

    def __init__(self, p: FunctorData, d: NaturalSystem) -> None:
        section = carrier_section(p)
        if section is None:
            raise InputError("carrier functor must be full and the identity on objects")
        self.p = p
        self.section = section
        self.d = d
        self.dk = pullback_natural_system(p, d)
        self.upper = CochainComplex(self.dk)
        self.lower = CochainComplex(d)

    def pullback_matrix(self, n: int) -> list[list[int]]:
        """Matrix of p*: C^n(C) -> C^n(K)."""
        idx_c, offs_c, tot_c = self.lower.layout(n)
        _, offs_k, tot_k = self.upper.layout(n)
        rows = [[0] * tot_c for _ in range(tot_k)]
        p = self.p
        for t, off_k, cmp in zip(self.upper.tuples(n), offs_k, self.upper.composites(n)):
            img = (p.obj_map[t[0]],) if n == 0 else tuple(p.mor_map[a] for a in t)
            off_c = offs_c[idx_c[img]]
            for i in range(self.dk.groups[cmp].ngens):
                rows[off_k + i][off_c + i] = 1
        return rows

    def quotient_group(self, n: int) -> FgAbGroup:
        g = self.upper.group(n)
        pm = self.pullback_matrix(n)
        cols = transpose(pm, len(pm), self.lower.dimension(n)) if pm else []
        return FgAbGroup.from_relations(g.ngens, list(g.relations) + cols)

    def quotient_differential(self, n: int) -> AbHom:
        return AbHom(self.quotient_group(n), self.quotient_group(n + 1),
                     tuple(tuple(r) for r in self.upper.matrix(n)))

    def cohomology(self, n: int) -> "RelativeCohomologyGroup":
        if n < 1:
            return RelativeCohomologyGroup(self, n, None)
        m = n - 1
        out = [self.quotient_differential(m)]
        inc = [self.quotient_differential(m - 1)] if m >= 1 else []
        sq = subquotient(self.quotient_group(m), out, inc)
        return RelativeCohomologyGroup(self, n, sq)

    def section_values(self, psi_k: Cochain) -> Cochain:
        """Read a cochain on K along the chosen section, giving a cochain on C."""
        n = psi_k.degree
        vals = {}
        s = self.section
        for t in self.lower.tuples(n):
            if n == 0:
                vals[t] = psi_k.values[t]
            else:
                vals[t] = psi_k.values[tuple(s[a] for a in t)]
        return Cochain(self.d.base, self.d, n, vals)


@dataclass(frozen=True)
class RelativeCohomologyGroup:
    rel: RelativeComplex
    degree: int
    data: Subquotient | None

    @property
    def group(self) -> FgAbGroup:
        return self.data.group if self.data is not None else FgAbGroup.trivial()

    def is_relative_cocycle(self, phi: Cochain) -> bool:
        """d phi lies in the image of p* (modulo the relations)."""
        dphi = self.rel.upper.coboundary(phi)
        down = self.rel.section_values(dphi)
        return self.rel.upper.coboundary(phi).equals(pullback_cochain(self.rel.p, down, self.rel.dk))

    def classify(self, phi: Cochain) -> tuple[int, ...]:
        if self.data is None:
            return ()
        return self.data.classify(self.rel.upper.to_vector(phi))

    def representative(self, coords: Sequence[int]) -> Cochain:
        if self.data is None:
            raise InputError("relative cohomology vanishes in degree 0")
        return self.rel.upper.from_vector(self.degree - 1, self.data.represent(coords))


def relative_cohomology(p: FunctorData, d: NaturalSystem, n: int,
                        cap: int = DEFAULT_DEGREE_CAP) -> RelativeCohomologyGroup:
    _check_degree(n, cap)
    return RelativeComplex(p, d).cohomology(n)


def connecting_hom(p: FunctorData, d: NaturalSystem, phi: Cochain,
                   cap: int = DEFAULT_DEGREE_CAP) -> CohomologyClass:
    """Class of d(phi) in H^n(C; D) for a relative cocycle phi in C^{n-1}(K; p*D)."""
    n = phi.degree + 1
    _check_degree(n, cap)
    rel = RelativeComplex(p, d)
    dphi = rel.upper.coboundary(phi)
    down = rel.section_values(dphi)
    if not dphi.equals(pullback_cochain(p, down, rel.dk)):
        raise ValidationError("cochain is not a relative cocycle: its coboundary does not come from C")
    h = rel.lower.cohomology(n)
    return h.class_of(down.reduced())


def invert_connecting(p: FunctorData, d: NaturalSystem, z: Cochain,
                      cap: int = DEFAULT_DEGREE_CAP, normalized: bool = False) -> Cochain | None:
    """phi in C^{n-1}(K; p*D) with d phi = p* z, or None when no such phi exists.

    With ``normalized`` the search is restricted to phi vanishing on tuples
    containing an identity.
    """
    n = z.degree
    _check_degree(n, cap)
    rel = RelativeComplex(p, d)
    target = pullback_cochain(p, z, rel.dk)
    return solve_coboundary(rel.upper, target, normalized=normalized)


def solve_coboundary(cx: CochainComplex, target: Cochain, normalized: bool = False) -> Cochain | None:
    """phi with d phi = target in C^n (modulo the coefficient relations)."""
    n = target.degree
    m = n - 1
    mat = cx.matrix(m)
    _, offs, tot = cx.layout(m)
    cols = list(range(tot))
    if normalized and m >= 1:
        c = cx.base
        keep = []
        for t, off, cmp in zip(cx.tuples(m), offs, cx.composites(m)):
            if any(c.is_identity(a) for a in t):
                continue
            keep.extend(range(off, off + cx.coeff.groups[cmp].ngens))
        cols = keep
    grp = cx.group(n)
    nrows = cx.dimension(n)
    prime = cx.elementary_prime
    if prime is not None:
        if nrows == 0:
            return cx.zero(m)
        a = cx.matrix_np(m)[:, cols]
        x = kernels.solve_mod_p(a, np.array(cx.to_vector(target), dtype=np.int64), prime)
        if x is None:
            return None
        vec = [0] * tot
        for j, col in enumerate(cols):
            vec[col] = int(x[j])
        return cx.from_vector(m, vec)
    full = [[row[j] for j in cols] + [rel[i] for rel in grp.relations] for i, row in enumerate(mat)]
    width = len(cols) + len(grp.relations)
    if nrows == 0:
        return cx.zero(m)
    res = _snf(full, nrows, width, want_u=True, want_v=True)
    sol = _solve_from(res, nrows, width, cx.to_vector(target))
    if sol is None:
        return None
    vec = [0] * tot
    for j, col in enumerate(cols):
        vec[col] = sol[j]
    return cx.from_vector(m, vec)


def exact_window(p: FunctorData, d: NaturalSystem, n: int = 3) -> dict:
    """Orders and invariants along H^{n-1}(K) -> H^n(C,K) -> H^n(C) -> H^n(K), plus exactness checks.

    Exactness at H^n(C,K) and H^n(C) is checked by explicit images and kernels
    computed from class representatives.
    """
    rel = RelativeComplex(p, d)
    hk_prev = rel.upper.cohomology(n - 1)
    hrel = rel.cohomology(n)
    hc = rel.lower.cohomology(n)
    hk = rel.upper.cohomology(n)

    def boundary(coords: Sequence[int]) -> tuple[int, ...]:
        phi = hrel.representative(coords)
        return connecting_hom(p, d, phi).coords

    def inflate(coords: Sequence[int]) -> tuple[int, ...]:
        z = hc.representative(coords)
        return hk.classify(pullback_cochain(p, z, rel.dk))

    def to_relative(coords: Sequence[int]) -> tuple[int, ...]:
        return hrel.classify(hk_prev.representative(coords))

    rel_elements = [tuple(hrel.group.normal_form(x)) for x in hrel.group.elements()]
    c_elements = [tuple(hc.group.normal_form(x)) for x in hc.group.elements()]
    kprev_elements = [tuple(hk_prev.group.normal_form(x)) for x in hk_prev.group.elements()]
    zero_c = tuple(0 for _ in hc.group.invariant_factors)
    zero_rel = tuple(0 for _ in hrel.group.invariant_factors)
    zero_k = tuple(0 for _ in hk.group.invariant_factors)
    img_j = {to_relative(x) for x in kprev_elements}
    ker_bd = {x for x in rel_elements if boundary(x) == zero_c}
    img_bd = {boundary(x) for x in rel_elements}
    ker_inf = {x for x in c_elements if inflate(x) == zero_k}
    return {
        "H_prev_K": list(hk_prev.group.invariant_factors),
        "H_rel": list(hrel.group.invariant_factors),
        "H_C": list(hc.group.invariant_factors),
        "H_K": list(hk.group.invariant_factors),
        "exact_at_relative": img_j == ker_bd,
        "exact_at_C": img_bd == ker_inf,
        "image_of_boundary": sorted(img_bd),
        "zero_relative": zero_rel,
    }


def cochain_from_function(d: NaturalSystem, n: int, fn) -> Cochain:
    """Build an n-cochain from a Python function of the tuple."""
    cx = CochainComplex(d)
    vals = {}
    for t, cmp in zip(cx.tuples(n), cx.composites(n)):
        v = tuple(int(x) for x in fn(t))
        if len(v) != d.groups[cmp].ngens:
            raise InputError(f"value at {t} has the wrong length")
        vals[t] = v
    return Cochain(d.base, d, n, vals)


__all__ = [
    "Cochain", "CochainComplex", "CohomologyClass", "CohomologyGroup", "RelativeComplex",
    "coboundary", "cohomology", "relative_cohomology", "connecting_hom", "invert_connecting",
    "normalize", "normalizing_cochain", "pullback_cochain", "solve_coboundary", "exact_window",
    "cochain_from_function", "DEFAULT_DEGREE_CAP",
]
