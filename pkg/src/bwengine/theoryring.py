"""Truncated finite-product theories, their models, enveloping ringoids and Hom solvers.

A theory is materialized in sorted, rank-truncated form: a finite category with
a terminal object, listed binary product witnesses, and for every object an
arity (a list of projections onto sorts exhibiting it as a product of sorts).

Presentations of enveloping ringoids and of the module of differentials are
never rewritten or normalized.  Every question about their modules is
answered by a linear solve against explicit module values.  Ext in degrees
one and above is not computed anywhere in this package.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .abelcore import AbHom, FgAbGroup, HomGroup, Subquotient, direct_sum, group_from_table, subquotient
from .errors import InputError, UnsupportedInputError, ValidationError
from .fincat import FinCat, FunctorData, SetFunctor, validate_category
from .natsys import AbFunctor, NaturalSystem, natural_system_from_functor, require_valid_system
from .report import Report

MAX_RANK = 3
MAX_THEORY_MORPHISMS = 6000


# ---------------------------------------------------------------------------
# Finite rings


@dataclass(frozen=True, eq=False)
class FiniteRing:
    """A finite ring with unit given by its addition and multiplication tables."""

    elements: tuple[str, ...]
    add: Mapping[tuple[str, str], str]
    mul: Mapping[tuple[str, str], str]
    zero: str
    one: str
    name: str = ""

    @classmethod
    def integers_mod(cls, n: int) -> "FiniteRing":
        if n < 1:
            raise InputError("modulus must be positive")
        els = tuple(str(i) for i in range(n))
        add = {(a, b): str((int(a) + int(b)) % n) for a in els for b in els}
        mul = {(a, b): str((int(a) * int(b)) % n) for a in els for b in els}
        return cls(els, add, mul, "0", str(1 % n), f"Z/{n}")

    @classmethod
    def field_of_four(cls) -> "FiniteRing":
        """F_4 = {0, 1, w, w2} with w^2 = w2 = w + 1."""
        els = ("0", "1", "w", "w2")
        vec = {"0": (0, 0), "1": (1, 0), "w": (0, 1), "w2": (1, 1)}
        back = {v: k for k, v in vec.items()}
        power = {"1": 0, "w": 1, "w2": 2}
        add = {(a, b): back[((vec[a][0] + vec[b][0]) % 2, (vec[a][1] + vec[b][1]) % 2)]
               for a in els for b in els}
        by_power = {0: "1", 1: "w", 2: "w2"}
        mul = {}
        for a in els:
            for b in els:
                mul[(a, b)] = "0" if "0" in (a, b) else by_power[(power[a] + power[b]) % 3]
        return cls(els, add, mul, "0", "1", "F4")

    def plus(self, a: str, b: str) -> str:
        return self.add[(a, b)]

    def times(self, a: str, b: str) -> str:
        return self.mul[(a, b)]

    def neg(self, a: str) -> str:
        for b in self.elements:
            if self.add[(a, b)] == self.zero:
                return b
        raise ValidationError(f"{a} has no additive inverse")

    def sum(self, xs: Iterable[str]) -> str:
        out = self.zero
        for x in xs:
            out = self.add[(out, x)]
        return out

    @cached_property
    def additive(self) -> tuple[FgAbGroup, dict[str, tuple[int, ...]], dict[tuple[int, ...], str]]:
        """The additive group in invariant-factor form with its element coding."""
        return group_from_table(self.elements, self.add)

    def left_multiplication(self, r: str) -> AbHom:
        """x -> r x on the additive group."""
        g, enc, dec = self.additive
        cols = []
        for j in range(g.ngens):
            e = tuple(int(i == j) for i in range(g.ngens))
            cols.append(enc[self.times(r, dec[g.normal_form(e)])])
        return AbHom(g, g, tuple(tuple(cols[j][i] for j in range(g.ngens)) for i in range(g.ngens)))

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "zero": self.zero, "one": self.one,
                "add": [[self.add[(a, b)] for b in self.elements] for a in self.elements],
                "mul": [[self.mul[(a, b)] for b in self.elements] for a in self.elements],
                "name": self.name}

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteRing":
        try:
            els = tuple(str(e) for e in data["elements"])
            add = {(a, b): str(data["add"][i][j]) for i, a in enumerate(els) for j, b in enumerate(els)}
            mul = {(a, b): str(data["mul"][i][j]) for i, a in enumerate(els) for j, b in enumerate(els)}
            r = cls(els, add, mul, str(data["zero"]), str(data["one"]), str(data.get("name", "")))
        except (KeyError, IndexError, TypeError) as exc:
            raise InputError(f"malformed ring: {exc!r}") from exc
        rep = validate_ring(r)
        if not rep:
            raise InputError(f"invalid ring: {rep.first_failure}")
        return r


def validate_ring(r: FiniteRing) -> Report:
    rep = Report("ring")
    els = r.elements
    if r.zero not in els or r.one not in els:
        return rep.fail("zero or one is not an element")
    try:
        group_from_table(els, r.add)
    except InputError as exc:
        return rep.fail(f"addition: {exc}")
    for a in els:
        if r.mul[(r.one, a)] != a or r.mul[(a, r.one)] != a:
            return rep.fail(f"one is not a unit for {a}")
        for b in els:
            if r.mul.get((a, b)) not in set(els):
                return rep.fail(f"product ({a}, {b}) is missing")
    for a, b, c in itertools.product(els, repeat=3):
        if r.mul[(r.mul[(a, b)], c)] != r.mul[(a, r.mul[(b, c)])]:
            return rep.fail(f"multiplication is not associative at ({a}, {b}, {c})")
        if r.mul[(a, r.add[(b, c)])] != r.add[(r.mul[(a, b)], r.mul[(a, c)])]:
            return rep.fail(f"left distributivity fails at ({a}, {b}, {c})")
        if r.mul[(r.add[(a, b)], c)] != r.add[(r.mul[(a, c)], r.mul[(b, c)])]:
            return rep.fail(f"right distributivity fails at ({a}, {b}, {c})")
    return rep


def validate_ring_hom(r: FiniteRing, s: FiniteRing, f: Mapping[str, str]) -> Report:
    rep = Report("ring homomorphism")
    if set(f) != set(r.elements) or any(v not in s.elements for v in f.values()):
        return rep.fail("map is not a function between the rings")
    if f[r.one] != s.one:
        return rep.fail("unit is not preserved")
    for a in r.elements:
        for b in r.elements:
            if f[r.add[(a, b)]] != s.add[(f[a], f[b])]:
                return rep.fail(f"addition not preserved at ({a}, {b})")
            if f[r.mul[(a, b)]] != s.mul[(f[a], f[b])]:
                return rep.fail(f"multiplication not preserved at ({a}, {b})")
    return rep


# ---------------------------------------------------------------------------
# Truncated theories


@dataclass(frozen=True)
class ProductWitness:
    left: str
    right: str
    product: str
    p1: str
    p2: str

    def to_json(self) -> dict:
        return {"left": self.left, "right": self.right, "product": self.product,
                "p1": self.p1, "p2": self.p2}


@dataclass(frozen=True, eq=False)
class TruncatedTheory:
    """A finite category with a terminal object, product witnesses and sorted arities.

    :param arities: object -> ((sort, projection), ...) exhibiting it as a
        product of sorts; a sort's own arity is ((sort, identity),)
    :param matrices: for matrix-type theories, the (linear part of the)
        matrix of each morphism, entries being elements of ``ring``
    """

    cat: FinCat
    sorts: tuple[str, ...]
    terminal: str | None
    product_witnesses: tuple[ProductWitness, ...]
    arities: Mapping[str, tuple[tuple[str, str], ...]]
    ring: FiniteRing | None = None
    matrices: Mapping[str, tuple[tuple[str, ...], ...]] | None = None
    name: str = ""

    def arity(self, x: str) -> tuple[tuple[str, str], ...]:
        return self.arities[x]

    def operations(self, sort: str) -> list[str]:
        """Every morphism into ``sort``."""
        return list(self.cat.into(sort))

    @cached_property
    def _tupling(self) -> dict[str, dict[tuple[str, ...], str]]:
        c = self.cat
        out: dict[str, dict[tuple[str, ...], str]] = {}
        for x in c.objects:
            tab: dict[tuple[str, ...], str] = {}
            for h in c.into(x):
                tab[(c.src(h),) + tuple(c.table[(p, h)] for _s, p in self.arities[x])] = h
            out[x] = tab
        return out

    def tuple_map(self, source: str, target: str, parts: Sequence[str]) -> str:
        """The unique h: source -> target with (projection_nu o h) = parts[nu]."""
        try:
            return self._tupling[target][(source,) + tuple(parts)]
        except KeyError as exc:
            raise InputError(f"no morphism {source} -> {target} with components {list(parts)}") from exc

    def validate(self) -> Report:
        return validate_theory(self)

    def to_json(self) -> dict:
        return {"category": self.cat.to_json(), "sorts": list(self.sorts), "terminal": self.terminal,
                "product_witnesses": [w.to_json() for w in self.product_witnesses],
                "arities": {x: [[s, p] for s, p in a] for x, a in sorted(self.arities.items())},
                "ring": self.ring.to_json() if self.ring is not None else None,
                "matrices": ({m: [list(r) for r in v] for m, v in sorted(self.matrices.items())}
                             if self.matrices is not None else None),
                "name": self.name}

    @classmethod
    def from_json(cls, data: Mapping) -> "TruncatedTheory":
        try:
            cat = FinCat.from_json(data["category"])
            ws = tuple(ProductWitness(str(w["left"]), str(w["right"]), str(w["product"]),
                                      str(w["p1"]), str(w["p2"])) for w in data.get("product_witnesses", []))
            ar = {str(x): tuple((str(s), str(p)) for s, p in a) for x, a in data["arities"].items()}
            ring = FiniteRing.from_json(data["ring"]) if data.get("ring") else None
            mats = ({str(m): tuple(tuple(str(e) for e in r) for r in v) for m, v in data["matrices"].items()}
                    if data.get("matrices") else None)
            t = cls(cat, tuple(str(s) for s in data["sorts"]), data.get("terminal"), ws, ar, ring, mats,
                    str(data.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed theory: {exc!r}") from exc
        return t


def validate_theory(t: TruncatedTheory) -> Report:
    """Universal properties of the terminal object, every witness and every arity, exhaustively."""
    rep = Report("truncated theory")
    c = t.cat
    rep.merge(validate_category(c), "category: ")
    if not rep:
        return rep
    if t.terminal is not None:
        if t.terminal not in c.objects:
            return rep.fail("terminal object is not an object")
        for z in c.objects:
            if len(c.hom(z, t.terminal)) != 1:
                return rep.fail(f"terminal witness {t.terminal}: |Hom({z}, {t.terminal})| != 1")
    for w in t.product_witnesses:
        if c.morphisms.get(w.p1) != (w.product, w.left) or c.morphisms.get(w.p2) != (w.product, w.right):
            return rep.fail(f"product witness {w.product}: projections are mistyped")
        for z in c.objects:
            seen = set()
            for h in c.hom(z, w.product):
                key = (c.table[(w.p1, h)], c.table[(w.p2, h)])
                if key in seen:
                    return rep.fail(f"product witness {w.product}: tupling not unique from {z}")
                seen.add(key)
            if len(seen) != len(c.hom(z, w.left)) * len(c.hom(z, w.right)):
                return rep.fail(f"product witness {w.product}: tupling does not exist for all pairs from {z}")
    for s in t.sorts:
        if t.arities.get(s) != ((s, c.identities[s]),):
            return rep.fail(f"sort {s} must have arity ((sort, identity),)")
    for x in c.objects:
        ar = t.arities.get(x)
        if ar is None:
            return rep.fail(f"object {x} has no arity")
        for s, p in ar:
            if s not in t.sorts or c.morphisms.get(p) != (x, s):
                return rep.fail(f"arity of {x}: projection {p} onto {s} is mistyped")
        for z in c.objects:
            seen = set()
            for h in c.hom(z, x):
                key = tuple(c.table[(p, h)] for _s, p in ar)
                if key in seen:
                    return rep.fail(f"arity of {x}: components do not determine maps from {z}")
                seen.add(key)
            want = 1
            for s, _p in ar:
                want *= len(c.hom(z, s))
            if len(seen) != want:
                return rep.fail(f"arity of {x}: not every family of components from {z} is realized")
    if t.matrices is not None and set(t.matrices) != set(c.morphism_ids):
        return rep.fail("matrix data does not cover every morphism")
    return rep


def require_valid_theory(t: TruncatedTheory) -> TruncatedTheory:
    rep = validate_theory(t)
    if not rep:
        raise ValidationError(f"invalid theory: {rep.first_failure}")
    return t


def _matrix_label(prefix: str, n: int, m: int, rows: Sequence[Sequence[str]]) -> str:
    return f"{prefix}{n}x{m}:" + ";".join(",".join(r) for r in rows)


def _all_matrices(r: FiniteRing, n: int, m: int) -> list[tuple[tuple[str, ...], ...]]:
    out = []
    for vals in itertools.product(r.elements, repeat=n * m):
        out.append(tuple(tuple(vals[i * m:(i + 1) * m]) for i in range(n)))
    return out


def _matmul(r: FiniteRing, b: Sequence[Sequence[str]], a: Sequence[Sequence[str]], inner: int,
            cols: int) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(r.sum(r.times(row[j], a[j][k]) for j in range(inner)) for k in range(cols))
                 for row in b)


def _unit_rows(r: FiniteRing, n: int, rows: Sequence[int]) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(r.one if j == i else r.zero for j in range(n)) for i in rows)


def _guard(r: FiniteRing, rank: int, affine: bool = False) -> None:
    if rank < 0 or rank > MAX_RANK:
        raise UnsupportedInputError(f"rank must lie in 0..{MAX_RANK}")
    q = len(r.elements)
    total = sum(q ** (n * m + (n if affine else 0)) for n in range(rank + 1) for m in range(rank + 1))
    if total > MAX_THEORY_MORPHISMS:
        raise UnsupportedInputError(f"theory would have {total} morphisms (guard {MAX_THEORY_MORPHISMS})")


def matrix_theory(r: FiniteRing, rank: int) -> TruncatedTheory:
    """The theory of left r-modules truncated at X^rank: Hom(X^m, X^n) = n x m matrices."""
    _guard(r, rank)
    objs = [f"X{n}" for n in range(rank + 1)]
    mats: dict[tuple[int, int], list[tuple[tuple[str, ...], ...]]] = {
        (n, m): _all_matrices(r, n, m) for n in range(rank + 1) for m in range(rank + 1)}
    mors = []
    data = {}
    for (n, m), ms in mats.items():
        for a in ms:
            lab = _matrix_label("M", n, m, a)
            mors.append((lab, f"X{m}", f"X{n}"))
            data[lab] = a
    ids = {f"X{n}": _matrix_label("M", n, n, _unit_rows(r, n, range(n))) for n in range(rank + 1)}
    comp = []
    for (p, n), bs in mats.items():
        for m in range(rank + 1):
            for b in bs:
                for a in mats[(n, m)]:
                    comp.append((_matrix_label("M", p, n, b), _matrix_label("M", n, m, a),
                                 _matrix_label("M", p, m, _matmul(r, b, a, n, m))))
    cat = FinCat.build(objs, mors, ids, comp, name=f"M_{r.name or 'R'}^{rank}")
    proj = {n: [_matrix_label("M", 1, n, _unit_rows(r, n, [i])) for i in range(n)] for n in range(rank + 1)}
    sorts = ("X1",) if rank >= 1 else ()
    arities = {f"X{n}": tuple(("X1", p) for p in proj[n]) for n in range(rank + 1)}
    ws = []
    for a in range(1, rank + 1):
        for b in range(1, rank + 1 - a):
            n = a + b
            ws.append(ProductWitness(f"X{a}", f"X{b}", f"X{n}",
                                     _matrix_label("M", a, n, _unit_rows(r, n, range(a))),
                                     _matrix_label("M", b, n, _unit_rows(r, n, range(a, n)))))
    return TruncatedTheory(cat, sorts, "X0", tuple(ws), arities, r, data, cat.name)


def projection_theory(r: FiniteRing, rank: int) -> TruncatedTheory:
    """The subtheory of matrix_theory whose morphisms are tuples of projections.

    Every row has a single entry one; there are no constants, so
    Hom(X0, X1) is empty.  This is the theory of sets written over r.
    """
    full = matrix_theory(r, rank)
    c = full.cat
    keep = {m for m in c.morphism_ids
            if all(sum(e != r.zero for e in row) == 1 and r.one in row for row in full.matrices[m])}
    mors = [(m, c.src(m), c.tgt(m)) for m in c.morphism_ids if m in keep]
    comp = [(g, f, gf) for (g, f), gf in c.table.items() if g in keep and f in keep]
    cat = FinCat.build(c.objects, mors, c.identities, comp, name=f"P^{rank}")
    mats = {m: full.matrices[m] for m in keep}
    return TruncatedTheory(cat, full.sorts, full.terminal, full.product_witnesses, full.arities, r, mats,
                           cat.name)


def affine_theory(r: FiniteRing, rank: int) -> tuple[TruncatedTheory, FunctorData]:
    """Affine maps x -> Ax + a between the X^n, with the functor forgetting the constant a.

    The projection onto ``matrix_theory(r, rank)`` is full and the identity on
    objects, and products are strict upstairs.
    """
    _guard(r, rank, affine=True)
    base = matrix_theory(r, rank)
    objs = [f"X{n}" for n in range(rank + 1)]

    def lab(n: int, m: int, a: Sequence[Sequence[str]], v: Sequence[str]) -> str:
        return _matrix_label("A", n, m, a) + "|" + ",".join(v)

    vecs = {n: [tuple(v) for v in itertools.product(r.elements, repeat=n)] for n in range(rank + 1)}
    mats = {(n, m): _all_matrices(r, n, m) for n in range(rank + 1) for m in range(rank + 1)}
    mors = []
    data = {}
    down = {}
    for (n, m), ms in mats.items():
        for a in ms:
            for v in vecs[n]:
                k = lab(n, m, a, v)
                mors.append((k, f"X{m}", f"X{n}"))
                data[k] = a
                down[k] = _matrix_label("M", n, m, a)
    zero = {n: tuple(r.zero for _ in range(n)) for n in range(rank + 1)}
    ids = {f"X{n}": lab(n, n, _unit_rows(r, n, range(n)), zero[n]) for n in range(rank + 1)}
    comp = []
    for (p, n), bs in mats.items():
        for m in range(rank + 1):
            for b in bs:
                for w in vecs[p]:
                    for a in mats[(n, m)]:
                        ba = _matmul(r, b, a, n, m)
                        for v in vecs[n]:
                            bv = tuple(r.plus(r.sum(r.times(b[i][j], v[j]) for j in range(n)), w[i])
                                       for i in range(p))
                            comp.append((lab(p, n, b, w), lab(n, m, a, v), lab(p, m, ba, bv)))
    cat = FinCat.build(objs, mors, ids, comp, name=f"Aff_{r.name or 'R'}^{rank}")
    proj = {n: [lab(1, n, _unit_rows(r, n, [i]), zero[1]) for i in range(n)] for n in range(rank + 1)}
    sorts = ("X1",) if rank >= 1 else ()
    arities = {f"X{n}": tuple(("X1", p) for p in proj[n]) for n in range(rank + 1)}
    ws = []
    for a in range(1, rank + 1):
        for b in range(1, rank + 1 - a):
            n = a + b
            ws.append(ProductWitness(f"X{a}", f"X{b}", f"X{n}",
                                     lab(a, n, _unit_rows(r, n, range(a)), zero[a]),
                                     lab(b, n, _unit_rows(r, n, range(a, n)), zero[b])))
    t = TruncatedTheory(cat, sorts, "X0", tuple(ws), arities, r, data, cat.name)
    return t, FunctorData(cat, base.cat, {x: x for x in objs}, down)


def codab_functor(t: TruncatedTheory) -> AbFunctor:
    """T(X^n) = R^n as an abelian group, T(f) = the matrix of f; needs matrix data."""
    if t.ring is None or t.matrices is None:
        raise InputError("the codomain functor needs a matrix-type theory")
    g = t.ring.additive[0]
    c = t.cat
    ranks = {x: len(t.arities[x]) for x in c.objects}
    groups = {x: direct_sum([g] * ranks[x]) for x in c.objects}
    mult = {e: t.ring.left_multiplication(e) for e in t.ring.elements}
    k = g.ngens
    maps = {}
    for f in c.morphism_ids:
        a = t.matrices[f]
        n, m = ranks[c.tgt(f)], ranks[c.src(f)]
        rows = []
        for i in range(n):
            for r in range(k):
                row = []
                for j in range(m):
                    row.extend(mult[a[i][j]].matrix[r])
                rows.append(tuple(row))
        maps[f] = AbHom(groups[c.src(f)], groups[c.tgt(f)], tuple(rows))
    return AbFunctor(c, groups, maps)


def codab_system(t: TruncatedTheory) -> NaturalSystem:
    """The natural system D_f = T(target f) of the codomain functor; it is cartesian."""
    return natural_system_from_functor(t.cat, codab_functor(t))


# ---------------------------------------------------------------------------
# Models


@dataclass(frozen=True, eq=False)
class FiniteModel:
    """A product-preserving functor from the theory to finite sets."""

    theory: TruncatedTheory
    carriers: SetFunctor

    def elements(self, x: str) -> tuple[str, ...]:
        return self.carriers.sets[x]

    def act(self, m: str, e: str) -> str:
        return self.carriers.maps[m][e]

    def components(self, x: str, e: str) -> tuple[str, ...]:
        return tuple(self.carriers.maps[p][e] for _s, p in self.theory.arities[x])

    def validate(self) -> Report:
        return validate_model(self)

    def to_json(self) -> dict:
        return {"sets": {x: list(v) for x, v in sorted(self.carriers.sets.items())},
                "maps": {m: dict(sorted(v.items())) for m, v in sorted(self.carriers.maps.items())}}

    @classmethod
    def from_json(cls, t: TruncatedTheory, data: Mapping) -> "FiniteModel":
        try:
            sets = {str(x): tuple(str(e) for e in v) for x, v in data["sets"].items()}
            maps = {str(m): {str(a): str(b) for a, b in v.items()} for m, v in data["maps"].items()}
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed model: {exc!r}") from exc
        return cls(t, SetFunctor(t.cat, sets, maps))


def validate_model(m: FiniteModel) -> Report:
    rep = Report("model")
    rep.merge(m.carriers.validate(), "functor: ")
    if not rep:
        return rep
    t = m.theory
    if t.terminal is not None and len(m.elements(t.terminal)) != 1:
        return rep.fail(f"terminal witness {t.terminal}: carrier is not a singleton")
    for w in t.product_witnesses:
        pairs = {(m.act(w.p1, e), m.act(w.p2, e)) for e in m.elements(w.product)}
        if len(pairs) != len(m.elements(w.product)) or \
                len(pairs) != len(m.elements(w.left)) * len(m.elements(w.right)):
            return rep.fail(f"product witness {w.product}: carrier is not the product")
    for x in t.cat.objects:
        comps = {m.components(x, e) for e in m.elements(x)}
        want = 1
        for s, _p in t.arities[x]:
            want *= len(m.elements(s))
        if len(comps) != len(m.elements(x)) or len(comps) != want:
            return rep.fail(f"arity of {x}: carrier is not the product of its sorts")
    return rep


def free_model(t: TruncatedTheory, x: str) -> FiniteModel:
    """F(x) = Hom(x, -), the free model on the object x."""
    c = t.cat
    sets = {y: c.hom(x, y) for y in c.objects}
    maps = {g: {f: c.table[(g, f)] for f in sets[c.src(g)]} for g in c.morphism_ids}
    return FiniteModel(t, SetFunctor(c, sets, maps))


def module_model(t: TruncatedTheory, elements: Sequence[str], add: Mapping[tuple[str, str], str],
                 smul: Mapping[tuple[str, str], str]) -> FiniteModel:
    """The model X^n -> V^n of a matrix theory given by a left module V over its ring."""
    if t.ring is None or t.matrices is None:
        raise InputError("module models need a matrix-type theory")
    c = t.cat
    ranks = {x: len(t.arities[x]) for x in c.objects}
    zero = None
    for v in elements:
        if all(add[(v, w)] == w for w in elements):
            zero = v
    if zero is None:
        raise InputError("module has no zero element")

    def label(n: int, vs: Sequence[str]) -> str:
        return vs[0] if n == 1 else "(" + ",".join(vs) + ")"

    tuples = {x: list(itertools.product(elements, repeat=ranks[x])) for x in c.objects}
    sets = {x: tuple(label(ranks[x], v) for v in tuples[x]) for x in c.objects}
    maps = {}
    for f in c.morphism_ids:
        a = t.matrices[f]
        n = ranks[c.tgt(f)]
        tab = {}
        for v in tuples[c.src(f)]:
            out = []
            for i in range(n):
                acc = zero
                for j, vj in enumerate(v):
                    acc = add[(acc, smul[(a[i][j], vj)])]
                out.append(acc)
            tab[label(len(v), v)] = label(n, out)
        maps[f] = tab
    m = FiniteModel(t, SetFunctor(c, sets, maps))
    rep = validate_model(m)
    if not rep:
        raise ValidationError(f"module data does not give a model: {rep.first_failure}")
    return m


def _prime_of(t: TruncatedTheory) -> int:
    if t.ring is None or t.ring.name[:2] != "Z/" or not kernels._is_prime(len(t.ring.elements)):
        raise InputError("random fixtures are built for matrix theories over Z/p")
    return len(t.ring.elements)


def random_model(rng: random.Random, t: TruncatedTheory, max_dim: int = 2) -> FiniteModel:
    """The model given by (Z/p)^j for random j <= max_dim, with randomly permuted element labels."""
    p = _prime_of(t)
    j = rng.randint(0, max_dim)
    vecs = list(itertools.product(range(p), repeat=j))
    names = [f"v{i}" for i in range(len(vecs))]
    rng.shuffle(names)
    lab = dict(zip(vecs, names))
    add = {(lab[a], lab[b]): lab[tuple((x + y) % p for x, y in zip(a, b))] for a in vecs for b in vecs}
    smul = {(str(s), lab[a]): lab[tuple((s * x) % p for x in a)] for s in range(p) for a in vecs}
    return module_model(t, names, add, smul)


# ---------------------------------------------------------------------------
# Presentations


Word = tuple[str, ...]          # (g1, ..., gk) means g1 o ... o gk


@dataclass(frozen=True)
class RingoidRelation:
    source: str
    target: str
    terms: tuple[tuple[int, Word], ...]


@dataclass(frozen=True, eq=False)
class RingoidPresentation:
    objects: tuple[str, ...]
    generators: Mapping[str, tuple[str, str]]
    relations: tuple[RingoidRelation, ...]

    def validate(self) -> Report:
        rep = Report("ringoid presentation")
        objs = set(self.objects)
        for g, (s, t) in self.generators.items():
            if s not in objs or t not in objs:
                return rep.fail(f"generator {g} has an unknown endpoint")
        for k, rel in enumerate(self.relations):
            for _c, w in rel.terms:
                if self.word_type(w, rel.source) != rel.target:
                    return rep.fail(f"relation {k}: word {w} is not a map {rel.source} -> {rel.target}")
        return rep

    def word_type(self, w: Word, source: str) -> str | None:
        cur = source
        for g in reversed(w):
            s, t = self.generators[g]
            if s != cur:
                return None
            cur = t
        return cur

    def to_json(self) -> dict:
        return {"objects": list(self.objects),
                "generators": {g: list(st) for g, st in sorted(self.generators.items())},
                "relations": [{"source": r.source, "target": r.target,
                               "terms": [[str(c), list(w)] for c, w in r.terms]} for r in self.relations]}


@dataclass(frozen=True)
class ModuleRelation:
    at: str
    terms: tuple[tuple[int, Word, str], ...]        # (coefficient, word, generator)


@dataclass(frozen=True, eq=False)
class ModulePresentation:
    over: RingoidPresentation
    generators: Mapping[str, str]                   # generator -> object
    relations: tuple[ModuleRelation, ...]

    def validate(self) -> Report:
        rep = Report("module presentation")
        objs = set(self.over.objects)
        for g, x in self.generators.items():
            if x not in objs:
                return rep.fail(f"generator {g} sits at an unknown object")
        for k, rel in enumerate(self.relations):
            for _c, w, g in rel.terms:
                if self.over.word_type(w, self.generators[g]) != rel.at:
                    return rep.fail(f"relation {k}: term on {g} does not land at {rel.at}")
        return rep

    def to_json(self) -> dict:
        return {"generators": dict(sorted(self.generators.items())),
                "relations": [{"at": r.at, "terms": [[str(c), list(w), g] for c, w, g in r.terms]}
                              for r in self.relations]}


def element_object(sort: str, x: str) -> str:
    return f"{sort}:{x}"


def bracket(op: str, xs: str, nu: int) -> str:
    return f"<{op}|{xs}|{nu}>"


def enveloping_presentation(t: TruncatedTheory, m: FiniteModel) -> RingoidPresentation:
    """Generators <w, x, nu> and the bracket relations of the enveloping ringoid of m.

    Objects are the elements of the sort carriers.  For an operation w: S -> s,
    a point x of M(S) and a place nu of the arity of S, <w, x, nu> goes from
    the nu-th component of x to w(x).  Relations are indexed by w, g: Y -> S,
    y in M(Y) and a place mu of Y:

        <w g, y, mu> = sum_nu <w, g(y), nu> o <pi_nu g, y, mu>,

    together with <1_s, x, 1> = identity of x.
    """
    c = t.cat
    objects = tuple(element_object(s, x) for s in t.sorts for x in m.elements(s))
    gens: dict[str, tuple[str, str]] = {}
    for s in t.sorts:
        for w in c.into(s):
            S = c.src(w)
            ar = t.arities[S]
            for xs in m.elements(S):
                comps = m.components(S, xs)
                tgt = element_object(s, m.act(w, xs))
                for nu, (sn, _p) in enumerate(ar):
                    gens[bracket(w, xs, nu)] = (element_object(sn, comps[nu]), tgt)
    rels: list[RingoidRelation] = []
    for s in t.sorts:
        for x in m.elements(s):
            o = element_object(s, x)
            rels.append(RingoidRelation(o, o, ((1, (bracket(c.identities[s], x, 0),)), (-1, ()))))
        for w in c.into(s):
            S = c.src(w)
            ar_s = t.arities[S]
            for g in c.into(S):
                Y = c.src(g)
                wg = c.table[(w, g)]
                ar_y = t.arities[Y]
                for y in m.elements(Y):
                    gy = m.act(g, y)
                    ycomps = m.components(Y, y)
                    for mu, (sm, _q) in enumerate(ar_y):
                        terms: list[tuple[int, Word]] = [(1, (bracket(wg, y, mu),))]
                        for nu, (_sn, p) in enumerate(ar_s):
                            terms.append((-1, (bracket(w, gy, nu), bracket(c.table[(p, g)], y, mu))))
                        rels.append(RingoidRelation(element_object(sm, ycomps[mu]),
                                                    element_object(s, m.act(w, gy)), tuple(terms)))
    return RingoidPresentation(objects, gens, tuple(rels))


def differential(sort: str, x: str) -> str:
    return f"d({sort}:{x})"


def omega1_presentation(t: TruncatedTheory, m: FiniteModel,
                        over: RingoidPresentation | None = None) -> ModulePresentation:
    """Generators d(x) for the sort elements, relations d(w(x)) = sum_nu <w, x, nu> d(x_nu)."""
    c = t.cat
    ring = over if over is not None else enveloping_presentation(t, m)
    gens = {differential(s, x): element_object(s, x) for s in t.sorts for x in m.elements(s)}
    rels = []
    for s in t.sorts:
        for w in c.into(s):
            S = c.src(w)
            ar = t.arities[S]
            for xs in m.elements(S):
                comps = m.components(S, xs)
                terms: list[tuple[int, Word, str]] = [(1, (), differential(s, m.act(w, xs)))]
                for nu, (sn, _p) in enumerate(ar):
                    terms.append((-1, (bracket(w, xs, nu),), differential(sn, comps[nu])))
                rels.append(ModuleRelation(element_object(s, m.act(w, xs)), tuple(terms)))
    return ModulePresentation(ring, gens, tuple(rels))


# ---------------------------------------------------------------------------
# Linear systems over finitely generated abelian groups


def _elementary_prime(groups: Iterable[FgAbGroup]) -> int | None:
    p = None
    for g in groups:
        if g.ngens == 0:
            continue
        rels = g.relations
        if len(rels) != g.ngens:
            return None
        for i, r in enumerate(rels):
            q = r[i]
            if q < 2 or any(v for j, v in enumerate(r) if j != i):
                return None
            if p is None:
                p = q
            elif q != p:
                return None
    if p is None or not kernels._is_prime(p):
        return None
    return p


@dataclass(frozen=True, eq=False)
class SolutionSpace:
    """The solutions of a homogeneous system: a subgroup of a direct sum of unknown groups."""

    ambient: FgAbGroup
    blocks: Mapping[str, tuple[int, FgAbGroup]]         # unknown -> (offset, group)
    group: FgAbGroup
    basis: tuple[tuple[int, ...], ...]
    _sub: Subquotient | None = field(default=None, repr=False)
    _prime: int | None = None

    def contains(self, x: Sequence[int]) -> bool:
        if self._sub is not None:
            return self._sub.contains(x)
        p = self._prime
        assert p is not None
        if not self.basis:
            return not any(v % p for v in x)
        a = np.array(self.basis, dtype=np.int64).T
        return kernels.solve_mod_p(a, np.array(x, dtype=np.int64), p) is not None

    def value(self, x: Sequence[int], unknown: str) -> list[int]:
        off, g = self.blocks[unknown]
        return list(x[off:off + g.ngens])


class LinearSystem:
    """Unknowns in named groups and equations sum_k h_k(u_k) = 0 in a target group."""

    def __init__(self) -> None:
        self.unknowns: dict[str, FgAbGroup] = {}
        self.equations: list[tuple[FgAbGroup, list[tuple[str, AbHom]]]] = []

    def unknown(self, name: str, g: FgAbGroup) -> None:
        if name in self.unknowns:
            raise InputError(f"unknown {name} declared twice")
        self.unknowns[name] = g

    def equation(self, target: FgAbGroup, terms: Sequence[tuple[str, AbHom]]) -> None:
        if target.ngens:
            self.equations.append((target, list(terms)))

    def solve(self) -> SolutionSpace:
        names = list(self.unknowns)
        blocks = {}
        off = 0
        for n in names:
            blocks[n] = (off, self.unknowns[n])
            off += self.unknowns[n].ngens
        width = off
        ambient = direct_sum([self.unknowns[n] for n in names])
        rows: list[list[int]] = []
        for target, terms in self.equations:
            block = [[0] * width for _ in range(target.ngens)]
            for name, h in terms:
                o = blocks[name][0]
                for i, r in enumerate(h.matrix):
                    for j, v in enumerate(r):
                        if v:
                            block[i][o + j] += v
            rows.extend(block)
        targets = direct_sum([tg for tg, _ in self.equations])
        p = _elementary_prime(list(self.unknowns.values()) + [tg for tg, _ in self.equations])
        if p is not None:
            if width == 0:
                return SolutionSpace(ambient, blocks, FgAbGroup.trivial(), (), None, p)
            a = np.array(rows, dtype=np.int64) if rows else np.zeros((0, width), dtype=np.int64)
            basis = kernels.nullspace_mod_p(a, p) if rows else np.eye(width, dtype=np.int64)
            bt = tuple(tuple(int(v) for v in r) for r in basis)
            return SolutionSpace(ambient, blocks, FgAbGroup.from_invariants([p] * len(bt)), bt, None, p)
        h = AbHom(ambient, targets, tuple(tuple(r) for r in rows))
        sub = h.kernel()
        return SolutionSpace(ambient, blocks, sub.group, tuple(tuple(g) for g in sub.generators()), sub)


# ---------------------------------------------------------------------------
# Module values, derivations and Hom


@dataclass(frozen=True, eq=False)
class ModuleValues:
    """A module over a presented ringoid: a group per object, a map per generator."""

    presentation: RingoidPresentation
    groups: Mapping[str, FgAbGroup]
    action: Mapping[str, AbHom]

    def word_map(self, w: Word, source: str) -> AbHom:
        out = AbHom.identity(self.groups[source])
        for g in reversed(w):
            out = self.action[g].compose_after(out)
        return out

    def validate(self) -> Report:
        rep = Report("module values")
        p = self.presentation
        for x in p.objects:
            if x not in self.groups:
                return rep.fail(f"no group at {x}")
        for g, (s, t) in p.generators.items():
            h = self.action.get(g)
            if h is None or h.source.ngens != self.groups[s].ngens or h.target.ngens != self.groups[t].ngens:
                return rep.fail(f"action of {g} is missing or misshapen")
            if not h.is_well_defined():
                return rep.fail(f"action of {g} is not a homomorphism")
        for k, rel in enumerate(p.relations):
            src, tgt = self.groups[rel.source], self.groups[rel.target]
            total = [[0] * src.ngens for _ in range(tgt.ngens)]
            for coef, w in rel.terms:
                m = self.word_map(w, rel.source)
                for i, r in enumerate(m.matrix):
                    for j, v in enumerate(r):
                        total[i][j] += coef * v
            for j in range(src.ngens):
                if not tgt.is_zero([total[i][j] for i in range(tgt.ngens)]):
                    return rep.fail(f"relation {k} fails ({rel.source} -> {rel.target})")
        return rep


def require_valid_module(a: ModuleValues) -> ModuleValues:
    rep = a.validate()
    if not rep:
        raise ValidationError(f"module values violate the presentation: {rep.first_failure}",
                              {"failure": rep.first_failure})
    return a


def hom_from_presentation(p: ModulePresentation, a: ModuleValues, check: bool = True) -> SolutionSpace:
    """Hom(P, A): values of the generators of P in A satisfying every relation of P."""
    if check:
        require_valid_module(a)
    ls = LinearSystem()
    for g, x in p.generators.items():
        ls.unknown(g, a.groups[x])
    for rel in p.relations:
        terms = []
        for coef, w, g in rel.terms:
            h = a.word_map(w, p.generators[g])
            terms.append((g, AbHom(h.source, h.target, tuple(tuple(coef * v for v in r) for r in h.matrix))))
        ls.equation(a.groups[rel.at], terms)
    return ls.solve()


@dataclass(frozen=True, eq=False)
class GroupObject:
    """An abelian group object over a model M, given fibrewise.

    ``fibers`` assigns A(x) to each sort element (keyed by ``element_object``);
    ``ops[(w, x)]`` is the linear part sum_nu A(x_nu) -> A(w(x)) of the
    operation w over the point x of M(source w).
    """

    model: FiniteModel
    fibers: Mapping[str, FgAbGroup]
    ops: Mapping[tuple[str, str], AbHom]

    def validate(self) -> Report:
        rep = Report("group object")
        t = self.model.theory
        c = t.cat
        m = self.model
        for s in t.sorts:
            for w in c.into(s):
                S = c.src(w)
                for xs in m.elements(S):
                    h = self.ops.get((w, xs))
                    comps = m.components(S, xs)
                    src = direct_sum([self.fibers[element_object(sn, comps[nu])]
                                      for nu, (sn, _p) in enumerate(t.arities[S])])
                    tgt = self.fibers[element_object(s, m.act(w, xs))]
                    if h is None or h.source.ngens != src.ngens or h.target.ngens != tgt.ngens:
                        return rep.fail(f"operation {w} over {xs} is missing or misshapen")
                    if not h.is_well_defined():
                        return rep.fail(f"operation {w} over {xs} is not a homomorphism")
        vals = module_of_group_object(self, check=False)
        rep.merge(vals.validate(), "total model: ")
        return rep

    def to_json(self) -> dict:
        return {"fibers": {k: g.to_json() for k, g in sorted(self.fibers.items())},
                "ops": [{"operation": w, "point": xs, "matrix": h.to_json()}
                        for (w, xs), h in sorted(self.ops.items())]}

    @classmethod
    def from_json(cls, m: FiniteModel, data: Mapping) -> "GroupObject":
        t = m.theory
        try:
            fibers = {str(k): FgAbGroup.from_json(g) for k, g in data["fibers"].items()}
            ops = {}
            for item in data["ops"]:
                w, xs = str(item["operation"]), str(item["point"])
                comps = m.components(t.cat.src(w), xs)
                src = direct_sum([fibers[element_object(sn, comps[nu])]
                                  for nu, (sn, _p) in enumerate(t.arities[t.cat.src(w)])])
                tgt = fibers[element_object(t.cat.tgt(w), m.act(w, xs))]
                ops[(w, xs)] = AbHom.from_rows(src, tgt, [[int(str(v)) for v in r] for r in item["matrix"]])
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"malformed group object: {exc!r}") from exc
        return cls(m, fibers, ops)


def module_of_group_object(a: GroupObject, over: RingoidPresentation | None = None,
                           check: bool = True) -> ModuleValues:
    """<w, x, nu> acts as the nu-th partial map of the operation w over x."""
    t = a.model.theory
    m = a.model
    c = t.cat
    p = over if over is not None else enveloping_presentation(t, m)
    action = {}
    for s in t.sorts:
        for w in c.into(s):
            S = c.src(w)
            for xs in m.elements(S):
                h = a.ops[(w, xs)]
                off = 0
                comps = m.components(S, xs)
                for nu, (sn, _p) in enumerate(t.arities[S]):
                    g = a.fibers[element_object(sn, comps[nu])]
                    rows = tuple(tuple(r[off:off + g.ngens]) for r in h.matrix)
                    action[bracket(w, xs, nu)] = AbHom(g, h.target, rows)
                    off += g.ngens
    vals = ModuleValues(p, dict(a.fibers), action)
    if check:
        require_valid_module(vals)
    return vals


def solve_derivations(t: TruncatedTheory, m: FiniteModel, a: GroupObject) -> SolutionSpace:
    """Der(M; A): families d(x) in A(x) with d(w(x)) = w_A(d(x_1), ..., d(x_n))."""
    c = t.cat
    ls = LinearSystem()
    for s in t.sorts:
        for x in m.elements(s):
            ls.unknown(element_object(s, x), a.fibers[element_object(s, x)])
    for s in t.sorts:
        for w in c.into(s):
            S = c.src(w)
            for xs in m.elements(S):
                tgt_obj = element_object(s, m.act(w, xs))
                tgt = a.fibers[tgt_obj]
                h = a.ops[(w, xs)]
                terms = [(tgt_obj, AbHom.identity(tgt))]
                off = 0
                comps = m.components(S, xs)
                for nu, (sn, _p) in enumerate(t.arities[S]):
                    o = element_object(sn, comps[nu])
                    g = a.fibers[o]
                    rows = tuple(tuple(-v for v in r[off:off + g.ngens]) for r in h.matrix)
                    terms.append((o, AbHom(g, tgt, rows)))
                    off += g.ngens
                ls.equation(tgt, terms)
    return ls.solve()


def check_generic_derivation(t: TruncatedTheory, m: FiniteModel, a: GroupObject,
                             morphism: tuple[GroupObject, Mapping[str, AbHom]] | None = None) -> Report:
    """Hom(Omega^1, A) -> Der(M; A), f -> f o d, is an isomorphism (and natural along ``morphism``).

    The generator d(x) of Omega^1 sits at x, so f o d has the value f(d(x)) at
    x: both solution spaces live in the product of the A(x) and the map is the
    identity on coordinates.  The check is that the two subgroups coincide.
    With ``morphism = (A2, h)``, h: A -> A2 fibrewise, it also checks that h
    carries both spaces into their counterparts for A2 compatibly.
    """
    rep = Report("generic derivation")
    ring = enveloping_presentation(t, m)
    omega = omega1_presentation(t, m, ring)
    hom = hom_from_presentation(omega, module_of_group_object(a, ring))
    der = solve_derivations(t, m, a)
    if hom.group != der.group:
        return rep.fail(f"Hom(Omega^1, A) = {hom.group.describe()} but Der = {der.group.describe()}")
    order = [element_object(s, x) for s in t.sorts for x in m.elements(s)]

    def via_d(v: Sequence[int]) -> list[int]:
        out: list[int] = []
        for o in order:
            out.extend(hom.value(v, differential(*o.split(":", 1))))
        return out

    for v in hom.basis:
        if not der.contains(via_d(v)):
            return rep.fail("f o d is not a derivation for some f")
    for v in der.basis:
        back: list[int] = []
        for g in omega.generators:
            o = omega.generators[g]
            off, grp = der.blocks[o]
            back.extend(v[off:off + grp.ngens])
        if not hom.contains(back):
            return rep.fail("a derivation does not come from a module map")
    if morphism is not None:
        a2, h = morphism
        hom2 = hom_from_presentation(omega, module_of_group_object(a2, ring))
        der2 = solve_derivations(t, m, a2)
        for v in der.basis:
            img: list[int] = []
            for o in order:
                off, grp = der.blocks[o]
                img.extend(h[o].apply(v[off:off + grp.ngens]))
            if not der2.contains(img):
                return rep.fail("h o d is not a derivation into the second object")
            if not hom2.contains(img):
                return rep.fail("naturality square fails: h o f is not a module map")
    return rep


def _random_invertible(rng: random.Random, k: int, p: int) -> tuple[list[list[int]], list[list[int]]]:
    a = [[int(i == j) for j in range(k)] for i in range(k)]
    inv = [row[:] for row in a]
    for _ in range(3 * k):
        if k < 2:
            break
        i, j = rng.sample(range(k), 2)
        s = rng.randrange(1, p)
        # row_i += s row_j on a; the inverse gets col_j -= s col_i
        a[i] = [(x + s * y) % p for x, y in zip(a[i], a[j])]
        for row in inv:
            row[j] = (row[j] - s * row[i]) % p
    if k:
        u = rng.randrange(1, p)
        a[0] = [(x * u) % p for x in a[0]]
        ui = pow(u, -1, p)
        for row in inv:
            row[0] = (row[0] * ui) % p
    return a, inv


def _mm(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], p: int) -> list[list[int]]:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][t] * b[t][j] for t in range(inner)) % p for j in range(cols)] for i in range(len(a))]


def _coefficient(t: TruncatedTheory, w: str, nu: int) -> int:
    assert t.matrices is not None
    return int(t.matrices[w][0][nu])


def random_group_object(rng: random.Random, m: FiniteModel, k: int) -> GroupObject:
    """A = (Z/p)^k over every sort element, with operations twisted by random automorphisms.

    Over x the fibre is identified with W = (Z/p)^k through a random
    automorphism theta_x, and w acts as theta_{w(x)} (sum_nu w_nu theta_{x_nu}^-1).
    """
    return _twisted_group_object(rng, m, k)[0]


def random_group_object_morphism(rng: random.Random, m: FiniteModel, k: int, k2: int
                                 ) -> tuple[GroupObject, GroupObject, dict[str, AbHom]]:
    """Two random group objects and h: A -> A2, h_x = theta2_x L theta_x^-1 for a random L: W -> W2."""
    a, th = _twisted_group_object(rng, m, k)
    a2, th2 = _twisted_group_object(rng, m, k2)
    p = _prime_of(m.theory)
    lin = [[rng.randrange(p) for _ in range(k)] for _ in range(k2)]
    h = {}
    for o in a.fibers:
        rows = _mm(_mm(th2[o][0], lin, p), th[o][1], p) if k and k2 else [[0] * k for _ in range(k2)]
        h[o] = AbHom(a.fibers[o], a2.fibers[o], tuple(tuple(r) for r in rows))
    return a, a2, h


def _twisted_group_object(rng: random.Random, m: FiniteModel, k: int):
    t = m.theory
    p = _prime_of(t)
    c = t.cat
    grp = FgAbGroup.from_invariants([p] * k)
    theta = {}
    for s in t.sorts:
        for x in m.elements(s):
            theta[element_object(s, x)] = _random_invertible(rng, k, p)
    fibers = {o: grp for o in theta}
    ops = {}
    for s in t.sorts:
        for w in c.into(s):
            S = c.src(w)
            ar = t.arities[S]
            for xs in m.elements(S):
                comps = m.components(S, xs)
                top = theta[element_object(s, m.act(w, xs))][0]
                blocks = []
                for nu, (sn, _p) in enumerate(ar):
                    inv = theta[element_object(sn, comps[nu])][1]
                    cnu = _coefficient(t, w, nu)
                    blocks.append([[cnu * v % p for v in r] for r in _mm(top, inv, p)])
                rows = tuple(tuple(v for b in blocks for v in b[i]) for i in range(k))
                ops[(w, xs)] = AbHom(direct_sum([grp] * len(ar)), grp, rows)
    return GroupObject(m, fibers, ops), theta


# ---------------------------------------------------------------------------
# Modules over the functor X -> U(F(X)) and the natural system Der(-; B)


@dataclass(frozen=True, eq=False)
class TheoryModule:
    """A module over the enveloping ringoids of the free models F(X).

    ``modules[X]`` is a module over the enveloping presentation of F(X); for
    h: W -> X, ``transitions[h][y]`` maps B_X(y) to B_W(y h) for every
    y: X -> s with s a sort (objects keyed by ``element_object(s, y)``).
    """

    theory: TruncatedTheory
    modules: Mapping[str, ModuleValues]
    transitions: Mapping[str, Mapping[str, AbHom]]

    def validate(self) -> Report:
        rep = Report("theory module")
        t = self.theory
        c = t.cat
        for x in c.objects:
            rep.merge(self.modules[x].validate(), f"module at {x}: ")
            if not rep:
                return rep
        for h in c.morphism_ids:
            W, X = c.morphisms[h]
            tr = self.transitions.get(h)
            if tr is None:
                return rep.fail(f"no transition for {h}")
            bx, bw = self.modules[X], self.modules[W]
            for s in t.sorts:
                for y in c.hom(X, s):
                    o = element_object(s, y)
                    m = tr.get(o)
                    if m is None or m.source.ngens != bx.groups[o].ngens or \
                            m.target.ngens != bw.groups[element_object(s, c.table[(y, h)])].ngens:
                        return rep.fail(f"transition of {h} at {y} is missing or misshapen")
                    if c.is_identity(h) and not m.equals(AbHom.identity(bx.groups[o])):
                        return rep.fail(f"identity {h} does not act trivially at {y}")
            # module map: T_h o <w, x, nu>_X = <w, x h, nu>_W o T_h
            for g, (src, tgt) in bx.presentation.generators.items():
                w, xs, nu = _parse_bracket(g)
                left = tr[tgt].compose_after(bx.action[g])
                right = bw.action[bracket(w, c.table[(xs, h)], nu)].compose_after(tr[src])
                if not left.equals(right):
                    return rep.fail(f"transition of {h} is not a module map at {g}")
        for (k2, h), kh in c.table.items():
            # k2 o h, with h: V -> W and k2: W -> X; T_{k2 h} = T_h o T_{k2}
            X = c.tgt(k2)
            for s in t.sorts:
                for y in c.hom(X, s):
                    o = element_object(s, y)
                    yk = element_object(s, c.table[(y, k2)])
                    two = self.transitions[h][yk].compose_after(self.transitions[k2][o])
                    if not two.equals(self.transitions[kh][o]):
                        return rep.fail(f"transitions do not compose at ({k2}, {h})")
        return rep


def _parse_bracket(g: str) -> tuple[str, str, int]:
    inner = g[1:-1]
    w, rest = inner.split("|", 1)
    xs, nu = rest.rsplit("|", 1)
    return w, xs, int(nu)


@dataclass
class _FreeData:
    models: dict[str, FiniteModel]
    rings: dict[str, RingoidPresentation]


def _free_data(t: TruncatedTheory) -> _FreeData:
    models = {x: free_model(t, x) for x in t.cat.objects}
    rings = {x: enveloping_presentation(t, models[x]) for x in t.cat.objects}
    return _FreeData(models, rings)


def random_theory_module(rng: random.Random, t: TruncatedTheory, k: int,
                         twist: bool = True) -> TheoryModule:
    """B_X(y) = (Z/p)^k for every y: X -> s, twisted by random automorphisms theta_{X,y}.

    <w, x, nu> acts by theta (w_nu) theta^-1 and the transitions are
    theta_{W, y h} theta_{X, y}^-1.  With ``twist=False`` every theta is the
    identity; for k = 1 this is the module whose natural system is CodAb.
    """
    p = _prime_of(t)
    c = t.cat
    fd = _free_data(t)
    grp = FgAbGroup.from_invariants([p] * k)
    ident = ([[int(i == j) for j in range(k)] for i in range(k)],) * 2
    theta: dict[tuple[str, str], tuple[list[list[int]], list[list[int]]]] = {}
    for x in c.objects:
        for s in t.sorts:
            for y in c.hom(x, s):
                theta[(x, element_object(s, y))] = _random_invertible(rng, k, p) if twist else ident
    modules = {}
    for x in c.objects:
        ring = fd.rings[x]
        action = {}
        for g, (src, tgt) in ring.generators.items():
            w, _xs, nu = _parse_bracket(g)
            mat = _mm(theta[(x, tgt)][0], theta[(x, src)][1], p)
            cnu = _coefficient(t, w, nu)
            action[g] = AbHom(grp, grp, tuple(tuple(cnu * v % p for v in r) for r in mat))
        modules[x] = ModuleValues(ring, {o: grp for o in ring.objects}, action)
    transitions = {}
    for h in c.morphism_ids:
        W, X = c.morphisms[h]
        tab = {}
        for s in t.sorts:
            for y in c.hom(X, s):
                o = element_object(s, y)
                o2 = element_object(s, c.table[(y, h)])
                mat = _mm(theta[(W, o2)][0], theta[(X, o)][1], p)
                tab[o] = AbHom(grp, grp, tuple(tuple(r) for r in mat))
        transitions[h] = tab
    return TheoryModule(t, modules, transitions)


def der_natural_system(t: TruncatedTheory, b: TheoryModule) -> NaturalSystem:
    """D_f = Der(F(Y); f^* B_X) for f: X -> Y, identified with the sum of B_X(p_nu f).

    A morphism g: Y -> Z acts on the left through the brackets <p_mu g, f, nu>
    of B_X, and h: W -> X acts on the right through the transitions of h.
    """
    c = t.cat
    groups = {}
    parts: dict[str, list[str]] = {}
    for f in c.morphism_ids:
        X, Y = c.morphisms[f]
        objs = [element_object(s, c.table[(p, f)]) for s, p in t.arities[Y]]
        parts[f] = objs
        groups[f] = direct_sum([b.modules[X].groups[o] for o in objs])
    left = {}
    right = {}
    for f in c.morphism_ids:
        X, Y = c.morphisms[f]
        bx = b.modules[X]
        for g in c.out_of(Y):
            gf = c.table[(g, f)]
            Z = c.tgt(g)
            rows = []
            for mu, (_sm, pm) in enumerate(t.arities[Z]):
                om = parts[gf][mu]
                tg = bx.groups[om]
                op = c.table[(pm, g)]
                for i in range(tg.ngens):
                    row: list[int] = []
                    for nu, o in enumerate(parts[f]):
                        row.extend(bx.action[bracket(op, f, nu)].matrix[i])
                    rows.append(tuple(row))
            left[(g, f)] = AbHom(groups[f], groups[gf], tuple(rows))
        for h in c.into(X):
            fh = c.table[(f, h)]
            blocks = [b.transitions[h][o] for o in parts[f]]
            rows = []
            off_src = [0]
            for blk in blocks:
                off_src.append(off_src[-1] + blk.source.ngens)
            for k, blk in enumerate(blocks):
                for r in blk.matrix:
                    row = [0] * groups[f].ngens
                    row[off_src[k]:off_src[k + 1]] = list(r)
                    rows.append(tuple(row))
            right[(f, h)] = AbHom(groups[f], groups[fh], tuple(rows))
    return require_valid_system(NaturalSystem(c, groups, left, right))


def hom_omega1_global(t: TruncatedTheory, b: TheoryModule) -> SolutionSpace:
    """Hom(Omega^1, B) over all free models at once.

    Unknowns are phi_X(d(y)) in B_X(y); they satisfy the differential
    relations of every Omega^1_{F(X)} and phi_W(d(y h)) = T_h(phi_X(d(y))).
    """
    c = t.cat
    fd = _free_data(t)
    ls = LinearSystem()
    key = {}
    for x in c.objects:
        om = omega1_presentation(t, fd.models[x], fd.rings[x])
        for g, o in om.generators.items():
            key[(x, o)] = f"{x}/{g}"
            ls.unknown(f"{x}/{g}", b.modules[x].groups[o])
        bx = b.modules[x]
        for rel in om.relations:
            terms = []
            for coef, w, g in rel.terms:
                h = bx.word_map(w, om.generators[g])
                terms.append((f"{x}/{g}", AbHom(h.source, h.target,
                                                tuple(tuple(coef * v for v in r) for r in h.matrix))))
            ls.equation(bx.groups[rel.at], terms)
    for h in c.morphism_ids:
        if c.is_identity(h):
            continue
        W, X = c.morphisms[h]
        for s in t.sorts:
            for y in c.hom(X, s):
                o = element_object(s, y)
                o2 = element_object(s, c.table[(y, h)])
                tr = b.transitions[h][o]
                neg = AbHom(tr.source, tr.target, tuple(tuple(-v for v in r) for r in tr.matrix))
                ls.equation(b.modules[W].groups[o2], [(key[(W, o2)], AbHom.identity(b.modules[W].groups[o2])),
                                                      (key[(X, o)], neg)])
    return ls.solve()


# ---------------------------------------------------------------------------
# Ring-valued functors, their modules, local and global Hom


@dataclass(frozen=True, eq=False)
class RingFunctor:
    base: FinCat
    rings: Mapping[str, FiniteRing]
    maps: Mapping[str, Mapping[str, str]]

    def validate(self) -> Report:
        rep = Report("ring-valued functor")
        c = self.base
        for x in c.objects:
            rep.merge(validate_ring(self.rings[x]), f"ring at {x}: ")
        for m in c.morphism_ids:
            s, t = c.morphisms[m]
            rep.merge(validate_ring_hom(self.rings[s], self.rings[t], self.maps[m]), f"map {m}: ")
            if c.is_identity(m) and any(self.maps[m][e] != e for e in self.rings[s].elements):
                rep.fail(f"identity {m} does not act trivially")
        for (g, f), gf in c.table.items():
            for e in self.rings[c.src(f)].elements:
                if self.maps[g][self.maps[f][e]] != self.maps[gf][e]:
                    return rep.fail(f"ring maps do not compose at ({g}, {f})")
        return rep


    def to_json(self) -> dict:
        return {"category": self.base.to_json(),
                "rings": {x: r.to_json() for x, r in sorted(self.rings.items())},
                "maps": {m: dict(sorted(v.items())) for m, v in sorted(self.maps.items())}}

    @classmethod
    def from_json(cls, data: Mapping, base: FinCat | None = None) -> "RingFunctor":
        try:
            c = base if base is not None else FinCat.from_json(data["category"])
            rings = {str(x): FiniteRing.from_json(r) for x, r in data["rings"].items()}
            maps = {str(m): {str(a): str(b) for a, b in v.items()} for m, v in data["maps"].items()}
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed ring-valued functor: {exc!r}") from exc
        return cls(c, rings, maps)


def constant_ring_functor(c: FinCat, r: FiniteRing) -> RingFunctor:
    ident = {e: e for e in r.elements}
    return RingFunctor(c, {x: r for x in c.objects}, {m: ident for m in c.morphism_ids})


@dataclass(frozen=True, eq=False)
class RingModule:
    """A module over a ring-valued functor: R_x-modules M_x and maps M_chi with R_chi(r m) = R_chi(r) M_chi(m)."""

    rings: RingFunctor
    groups: Mapping[str, FgAbGroup]
    scalars: Mapping[str, Mapping[str, AbHom]]
    maps: Mapping[str, AbHom]

    def validate(self) -> Report:
        rep = Report("module over a ring-valued functor")
        rf = self.rings
        c = rf.base
        for x in c.objects:
            r = rf.rings[x]
            g = self.groups[x]
            act = self.scalars[x]
            for e in r.elements:
                if not act[e].is_well_defined():
                    return rep.fail(f"scalar {e} at {x} is not a homomorphism")
            if not act[r.one].equals(AbHom.identity(g)):
                return rep.fail(f"one does not act as the identity at {x}")
            for a in r.elements:
                for b in r.elements:
                    if not act[r.mul[(a, b)]].equals(act[a].compose_after(act[b])):
                        return rep.fail(f"scalars do not multiply at {x}: ({a}, {b})")
                    s = act[r.add[(a, b)]]
                    sm = AbHom(g, g, tuple(tuple(p + q for p, q in zip(ra, rb))
                                           for ra, rb in zip(act[a].matrix, act[b].matrix)))
                    if not s.equals(sm):
                        return rep.fail(f"scalars do not add at {x}: ({a}, {b})")
        for m in c.morphism_ids:
            s, t = c.morphisms[m]
            h = self.maps[m]
            if not h.is_well_defined():
                return rep.fail(f"map of {m} is not a homomorphism")
            if c.is_identity(m) and not h.equals(AbHom.identity(self.groups[s])):
                return rep.fail(f"identity {m} does not act trivially")
            for e in rf.rings[s].elements:
                lhs = h.compose_after(self.scalars[s][e])
                rhs = self.scalars[t][rf.maps[m][e]].compose_after(h)
                if not lhs.equals(rhs):
                    return rep.fail(f"module law R_chi(r m) = R_chi(r) M_chi(m) fails at {m}, r = {e}")
        for (g, f), gf in c.table.items():
            if not self.maps[g].compose_after(self.maps[f]).equals(self.maps[gf]):
                return rep.fail(f"module maps do not compose at ({g}, {f})")
        return rep


def ring_module_to_json(m: RingModule) -> dict:
    return {"groups": {x: g.to_json() for x, g in sorted(m.groups.items())},
            "scalars": {x: {e: h.to_json() for e, h in sorted(v.items())} for x, v in sorted(m.scalars.items())},
            "maps": {chi: h.to_json() for chi, h in sorted(m.maps.items())}}


def ring_module_from_json(rf: RingFunctor, data: Mapping) -> RingModule:
    """Groups per object, scalar matrices per ring element (omitted: integer action) and maps per morphism."""
    def rows(x) -> list[list[int]]:
        return [[int(str(v)) for v in r] for r in x]

    c = rf.base
    try:
        groups = {str(x): FgAbGroup.from_json(g) for x, g in data["groups"].items()}
        given = data.get("scalars") or {}
        scalars = {}
        for x in c.objects:
            if x in given:
                scalars[x] = {str(e): AbHom.from_rows(groups[x], groups[x], rows(h)) for e, h in given[x].items()}
            else:
                scalars[x] = integer_scalars(rf.rings[x], groups[x])
        maps = {str(chi): AbHom.from_rows(groups[c.src(chi)], groups[c.tgt(chi)], rows(h))
                for chi, h in data["maps"].items()}
        for chi in c.morphism_ids:
            if chi not in maps and c.is_identity(chi):
                maps[chi] = AbHom.identity(groups[c.src(chi)])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"malformed module: {exc!r}") from exc
    return RingModule(rf, groups, scalars, maps)


def require_valid_ring_module(m: RingModule) -> RingModule:
    rep = m.validate()
    if not rep:
        raise ValidationError(f"invalid module: {rep.first_failure}", {"failure": rep.first_failure})
    return m


def integer_scalars(r: FiniteRing, g: FgAbGroup) -> dict[str, AbHom]:
    """Scalar action of Z/n on a group killed by n, r acting as multiplication by int(r)."""
    return {e: AbHom(g, g, tuple(tuple(int(e) * int(i == j) for j in range(g.ngens)) for i in range(g.ngens)))
            for e in r.elements}


def _linear_constraint(hg_src: HomGroup, hg_tgt: HomGroup, fn) -> AbHom:
    """The map of cell groups induced by X -> fn(X) on homomorphisms."""
    cols = []
    for j in range(hg_src.group.ngens):
        e = [int(i == j) for i in range(hg_src.group.ngens)]
        cols.append(hg_tgt.coords(fn(hg_src.to_hom(e))))
    rows = tuple(tuple(cols[j][i] for j in range(hg_src.group.ngens)) for i in range(hg_tgt.group.ngens))
    return AbHom(hg_src.group, hg_tgt.group, rows)


def _sub(a: AbHom, b: AbHom) -> AbHom:
    return AbHom(a.source, a.target, tuple(tuple(p - q for p, q in zip(ra, rb))
                                           for ra, rb in zip(a.matrix, b.matrix)))


@dataclass(frozen=True, eq=False)
class LocalHom:
    """Hom_{R_i}(M_i, N_j) along chi: i -> j, as a subgroup of the cell group of Hom_Z."""

    cells: HomGroup
    sub: Subquotient

    @property
    def group(self) -> FgAbGroup:
        return self.sub.group

    def hom_of(self, coords: Sequence[int]) -> AbHom:
        return self.cells.to_hom(self.sub.represent(coords))

    def classify(self, h: AbHom) -> tuple[int, ...]:
        return self.sub.classify(self.cells.coords(h))


def _local_hom(rf: RingFunctor, m: RingModule, n: RingModule, chi: str) -> LocalHom:
    c = rf.base
    i, j = c.morphisms[chi]
    hg = HomGroup.build(m.groups[i], n.groups[j])
    cons = []
    for e in rf.rings[i].elements:
        ae = m.scalars[i][e]
        be = n.scalars[j][rf.maps[chi][e]]
        cons.append(_linear_constraint(hg, hg, lambda x, ae=ae, be=be: _sub(x.compose_after(ae),
                                                                          be.compose_after(x))))
    return LocalHom(hg, subquotient(hg.group, cons, []))


def local_hom_system(rf: RingFunctor, m: RingModule, n: RingModule) -> tuple[NaturalSystem, dict[str, LocalHom]]:
    """The natural system chi: i -> j  |->  Hom_{R_i}(M_i, N_j), scalars restricted along R_chi."""
    require_valid_ring_module(m)
    require_valid_ring_module(n)
    c = rf.base
    loc = {chi: _local_hom(rf, m, n, chi) for chi in c.morphism_ids}
    groups = {chi: loc[chi].group for chi in c.morphism_ids}
    left = {}
    right = {}
    for chi in c.morphism_ids:
        i, j = c.morphisms[chi]
        src = loc[chi]
        k = len(src.group.invariant_factors)
        gens = [src.hom_of([int(a == b) for b in range(k)]) for a in range(k)]
        for psi in c.out_of(j):
            dst = loc[c.table[(psi, chi)]]
            cols = [dst.classify(n.maps[psi].compose_after(x)) for x in gens]
            left[(psi, chi)] = AbHom(src.group, dst.group,
                                     tuple(tuple(cols[b][a] for b in range(k)) for a in range(len(dst.group.invariant_factors))))
        for phi in c.into(i):
            dst = loc[c.table[(chi, phi)]]
            cols = [dst.classify(x.compose_after(m.maps[phi])) for x in gens]
            right[(chi, phi)] = AbHom(src.group, dst.group,
                                      tuple(tuple(cols[b][a] for b in range(k)) for a in range(len(dst.group.invariant_factors))))
    # groups are in invariant-factor form, so canonical coordinates are generator coordinates
    canon = {chi: FgAbGroup.from_invariants(g.invariant_factors) for chi, g in groups.items()}
    left = {key: AbHom(canon[key[1]], canon[c.table[key]], h.matrix) for key, h in left.items()}
    right = {key: AbHom(canon[key[0]], canon[c.table[key]], h.matrix) for key, h in right.items()}
    return require_valid_system(NaturalSystem(c, canon, left, right)), loc


def global_hom(rf: RingFunctor, m: RingModule, n: RingModule) -> FgAbGroup:
    """Families f_i: M_i -> N_i of R_i-maps with N_chi f_i = f_j M_chi, by a direct linear solve."""
    require_valid_ring_module(m)
    require_valid_ring_module(n)
    c = rf.base
    hgs = {x: HomGroup.build(m.groups[x], n.groups[x]) for x in c.objects}
    ls = LinearSystem()
    for x in c.objects:
        ls.unknown(x, hgs[x].group)
    for x in c.objects:
        for e in rf.rings[x].elements:
            ae, be = m.scalars[x][e], n.scalars[x][e]
            ls.equation(hgs[x].group, [(x, _linear_constraint(
                hgs[x], hgs[x], lambda h, ae=ae, be=be: _sub(h.compose_after(ae), be.compose_after(h))))])
    for chi in c.morphism_ids:
        if c.is_identity(chi):
            continue
        i, j = c.morphisms[chi]
        hg = HomGroup.build(m.groups[i], n.groups[j])
        ls.equation(hg.group, [
            (i, _linear_constraint(hgs[i], hg, lambda h, chi=chi: n.maps[chi].compose_after(h))),
            (j, _linear_constraint(hgs[j], hg, lambda h, chi=chi: AbHom(
                m.groups[i], n.groups[j], tuple(tuple(-v for v in r) for r in h.compose_after(m.maps[chi]).matrix)))),
        ])
    return FgAbGroup.from_invariants(ls.solve().group.invariant_factors)


def random_ring_module(rng: random.Random, rf: RingFunctor, choices: Sequence[Sequence[int]] = (
        (4,), (2,), (4, 2), (2, 2), (4, 4)), tries: int = 200) -> RingModule:
    """Random module over a constant Z/n functor: random groups, functorial random maps.

    Maps are chosen object by object along the composition order; where a
    composite is forced the map is solved for by enumeration.
    """
    c = rf.base
    rings = {rf.rings[x].name for x in c.objects}
    if len(rings) != 1 or not next(iter(rings)).startswith("Z/"):
        raise InputError("random modules are built for constant Z/n functors")
    r = rf.rings[c.objects[0]]
    nmod = len(r.elements)
    for _ in range(tries):
        groups = {x: FgAbGroup.from_invariants([d for d in rng.choice(choices) if nmod % d == 0])
                  for x in c.objects}
        maps: dict[str, AbHom] = {}
        ok = True
        for x in c.objects:
            maps[c.identities[x]] = AbHom.identity(groups[x])
        nonid = [q for q in c.morphism_ids if not c.is_identity(q)]
        for mor in nonid:
            s, t = c.morphisms[mor]
            hg = HomGroup.build(groups[s], groups[t])
            cands = [hg.to_hom(x) for x in hg.group.elements()]
            rng.shuffle(cands)
            maps[mor] = cands[0]
        # repair composites: any (g, f) with gf non-identity must satisfy M_g M_f = M_gf
        for _round in range(3):
            bad = [(g, f, gf) for (g, f), gf in c.table.items()
                   if not c.is_identity(g) and not c.is_identity(f)
                   and not maps[g].compose_after(maps[f]).equals(maps[gf])]
            if not bad:
                break
            for g, f, gf in bad:
                maps[gf] = maps[g].compose_after(maps[f])
        else:
            ok = False
        if not ok:
            continue
        mod = RingModule(rf, groups, {x: integer_scalars(r, groups[x]) for x in c.objects}, maps)
        if mod.validate():
            return mod
    raise ValidationError("could not draw a functorial random module")


# ---------------------------------------------------------------------------
# Ringoids and the total ringoid


@dataclass(frozen=True, eq=False)
class Ringoid:
    """A finite ringoid: Hom groups and bilinear composition given on generators.

    ``compose[(x, y, z)][i][j]`` is the coordinate vector in Hom(x, z) of
    (generator i of Hom(y, z)) o (generator j of Hom(x, y)).
    """

    objects: tuple[str, ...]
    hom: Mapping[tuple[str, str], FgAbGroup]
    compose_table: Mapping[tuple[str, str, str], Sequence[Sequence[Sequence[int]]]]
    identities: Mapping[str, tuple[int, ...]]

    def compose(self, x: str, y: str, z: str, b: Sequence[int], a: Sequence[int]) -> list[int]:
        tab = self.compose_table[(x, y, z)]
        out = [0] * self.hom[(x, z)].ngens
        for i, bi in enumerate(b):
            if not bi:
                continue
            for j, aj in enumerate(a):
                if aj:
                    for k, v in enumerate(tab[i][j]):
                        out[k] += bi * aj * v
        return self.hom[(x, z)].reduce(out)

    def validate(self) -> Report:
        rep = Report("ringoid")
        ob = self.objects
        for x, y, z in itertools.product(ob, repeat=3):
            hxy, hyz, hxz = self.hom[(x, y)], self.hom[(y, z)], self.hom[(x, z)]
            for rel in hyz.relations:
                for j in range(hxy.ngens):
                    if not hxz.is_zero(self.compose(x, y, z, rel, [int(q == j) for q in range(hxy.ngens)])):
                        return rep.fail(f"composition {x}->{y}->{z} is not bilinear (left relation)")
            for rel in hxy.relations:
                for i in range(hyz.ngens):
                    if not hxz.is_zero(self.compose(x, y, z, [int(q == i) for q in range(hyz.ngens)], rel)):
                        return rep.fail(f"composition {x}->{y}->{z} is not bilinear (right relation)")
        for x, y in itertools.product(ob, repeat=2):
            h = self.hom[(x, y)]
            for j in range(h.ngens):
                e = [int(q == j) for q in range(h.ngens)]
                if not h.equal(self.compose(x, y, y, self.identities[y], e), e) or \
                        not h.equal(self.compose(x, x, y, e, self.identities[x]), e):
                    return rep.fail(f"identities fail on Hom({x}, {y})")
        for w, x, y, z in itertools.product(ob, repeat=4):
            hwx, hxy, hyz = self.hom[(w, x)], self.hom[(x, y)], self.hom[(y, z)]
            for i in range(hyz.ngens):
                c_ = [int(q == i) for q in range(hyz.ngens)]
                for j in range(hxy.ngens):
                    b = [int(q == j) for q in range(hxy.ngens)]
                    cb = self.compose(x, y, z, c_, b)
                    for k in range(hwx.ngens):
                        a = [int(q == k) for q in range(hwx.ngens)]
                        if not self.hom[(w, z)].equal(self.compose(w, x, z, cb, a),
                                                      self.compose(w, y, z, c_, self.compose(w, x, y, b, a))):
                            return rep.fail(f"associativity fails on generators {w}->{x}->{y}->{z}")
        return rep


@dataclass(frozen=True, eq=False)
class TotalRingoid:
    """R[I] with Hom(i, j) = sum over alpha: i -> j of R_j, plus the coding of its elements."""

    ringoid: Ringoid
    rings: RingFunctor
    blocks: Mapping[tuple[str, str], tuple[str, ...]]          # (i, j) -> morphisms alpha in order

    def element(self, i: str, j: str, terms: Mapping[str, str]) -> list[int]:
        """Coordinates of sum_alpha terms[alpha] (an element of R_j) in the alpha-th summand."""
        r = self.rings.rings[j]
        _g, enc, _dec = r.additive
        out: list[int] = []
        for a in self.blocks[(i, j)]:
            out.extend(enc[terms.get(a, r.zero)])
        return out

    def decode(self, i: str, j: str, v: Sequence[int]) -> dict[str, str]:
        r = self.rings.rings[j]
        g, _enc, dec = r.additive
        out = {}
        k = g.ngens
        for n, a in enumerate(self.blocks[(i, j)]):
            out[a] = dec[g.normal_form(v[n * k:(n + 1) * k])]
        return out


def total_ringoid(rf: RingFunctor) -> TotalRingoid:
    """(beta, s) o (alpha, r) = (beta alpha, s R_beta(r))."""
    rep = rf.validate()
    if not rep:
        raise ValidationError(f"ring-valued functor is invalid: {rep.first_failure}")
    c = rf.base
    ob = c.objects
    blocks = {(i, j): c.hom(i, j) for i in ob for j in ob}
    hom = {(i, j): direct_sum([rf.rings[j].additive[0]] * len(blocks[(i, j)])) for i in ob for j in ob}

    def gens(i: str, j: str) -> list[tuple[str, str]]:
        g, _enc, dec = rf.rings[j].additive
        out = []
        for a in blocks[(i, j)]:
            for k in range(g.ngens):
                out.append((a, dec[g.normal_form([int(q == k) for q in range(g.ngens)])]))
        return out

    table = {}
    for i, j, k in itertools.product(ob, repeat=3):
        rk = rf.rings[k]
        _g, enc, _dec = rk.additive
        rows = []
        for beta, s in gens(j, k):
            row = []
            for alpha, r in gens(i, j):
                prod = rk.times(s, rf.maps[beta][r])
                ga = c.table[(beta, alpha)]
                vec: list[int] = []
                for a in blocks[(i, k)]:
                    vec.extend(enc[prod] if a == ga else enc[rk.zero])
                row.append(vec)
            rows.append(row)
        table[(i, j, k)] = rows
    ids = {}
    for i in ob:
        r = rf.rings[i]
        _g, enc, _dec = r.additive
        vec = []
        for a in blocks[(i, i)]:
            vec.extend(enc[r.one] if a == c.identities[i] else enc[r.zero])
        ids[i] = tuple(vec)
    ring = Ringoid(tuple(ob), hom, table, ids)
    return TotalRingoid(ring, rf, blocks)


__all__ = [
    "FiniteRing", "validate_ring", "validate_ring_hom", "ProductWitness", "TruncatedTheory",
    "validate_theory", "require_valid_theory", "matrix_theory", "projection_theory", "affine_theory", "codab_functor",
    "codab_system", "FiniteModel", "validate_model", "free_model", "module_model", "random_model",
    "RingoidRelation", "RingoidPresentation", "ModuleRelation", "ModulePresentation",
    "enveloping_presentation", "omega1_presentation", "element_object", "bracket", "differential",
    "LinearSystem", "SolutionSpace", "ModuleValues", "hom_from_presentation", "GroupObject",
    "module_of_group_object", "solve_derivations", "check_generic_derivation", "random_group_object",
    "random_group_object_morphism",
    "TheoryModule", "random_theory_module", "der_natural_system", "hom_omega1_global", "RingFunctor",
    "constant_ring_functor", "RingModule", "integer_scalars", "LocalHom", "local_hom_system",
    "global_hom", "random_ring_module", "ring_module_to_json", "ring_module_from_json", "Ringoid",
    "TotalRingoid", "total_ringoid",
]
