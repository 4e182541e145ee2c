"""Natural systems: functors from the factorization category to abelian groups.

A natural system D on C assigns a group D_f to each morphism f and, for each
composable pair, a left action a_*: D_f -> D_{af} and a right action
b^*: D_g -> D_{gb}.  Both are stored for every composable pair.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol, Sequence

from .abelcore import AbHom, FgAbGroup, direct_sum, hom_tuple
from .errors import InputError, ValidationError
from .fincat import FinCat, FunctorData, factorization_category
from .report import Report


@dataclass(frozen=True, eq=False)
class NaturalSystem:
    """:param left: (a, f) -> group map D_f -> D_{a o f}
    :param right: (g, b) -> group map D_g -> D_{g o b}
    """

    base: FinCat
    groups: Mapping[str, FgAbGroup]
    left: Mapping[tuple[str, str], AbHom]
    right: Mapping[tuple[str, str], AbHom]

    def group(self, f: str) -> FgAbGroup:
        return self.groups[f]

    def act_left(self, a: str, f: str, x: Sequence[int]) -> list[int]:
        return self.left[(a, f)].apply(x)

    def act_right(self, g: str, b: str, x: Sequence[int]) -> list[int]:
        return self.right[(g, b)].apply(x)

    def induced(self, a: str, b: str, f: str) -> AbHom:
        """(a, b)_*: D_f -> D_{b f a}."""
        c = self.base
        r = self.right[(f, a)]
        return self.left[(b, c.table[(f, a)])].compose_after(r)

    def validate(self) -> Report:
        return validate_natural_system(self)

    def to_json(self) -> dict:
        acts = []
        for (a, f), h in sorted(self.left.items()):
            acts.append({"actor": a, "side": "left", "on": f, "matrix": h.to_json()})
        for (g, b), h in sorted(self.right.items()):
            acts.append({"actor": b, "side": "right", "on": g, "matrix": h.to_json()})
        return {"category": self.base.to_json(),
                "groups": {f: g.to_json() for f, g in sorted(self.groups.items())},
                "actions": acts}

    @classmethod
    def from_json(cls, data: Mapping, base: FinCat | None = None) -> "NaturalSystem":
        try:
            c = base if base is not None else FinCat.from_json(data["category"])
            groups = {str(f): FgAbGroup.from_json(g) for f, g in data["groups"].items()}
            left: dict[tuple[str, str], AbHom] = {}
            right: dict[tuple[str, str], AbHom] = {}
            for act in data["actions"]:
                a, on, side = str(act["actor"]), str(act["on"]), act["side"]
                rows = [[int(str(x)) for x in r] for r in act["matrix"]]
                if side == "left":
                    left[(a, on)] = AbHom.from_rows(groups[on], groups[c.table[(a, on)]], rows)
                elif side == "right":
                    right[(on, a)] = AbHom.from_rows(groups[on], groups[c.table[(on, a)]], rows)
                else:
                    raise InputError(f"unknown action side {side!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed natural system: {exc!r}") from exc
        return cls(c, groups, left, right)


def validate_natural_system(d: NaturalSystem) -> Report:
    """Exhaustive functoriality check on all composable data."""
    rep = Report("natural system")
    c = d.base
    for f in c.morphism_ids:
        if f not in d.groups:
            return rep.fail(f"no group at {f}")
    for f in c.morphism_ids:
        A, B = c.morphisms[f]
        for a in c.out_of(B):
            h = d.left.get((a, f))
            af = c.table[(a, f)]
            if h is None or h.source.ngens != d.groups[f].ngens or h.target.ngens != d.groups[af].ngens:
                return rep.fail(f"left action of {a} on {f} is missing or misshapen")
            if not h.is_well_defined():
                return rep.fail(f"left action of {a} on {f} is not a homomorphism of the groups")
        for b in c.into(A):
            h = d.right.get((f, b))
            fb = c.table[(f, b)]
            if h is None or h.source.ngens != d.groups[f].ngens or h.target.ngens != d.groups[fb].ngens:
                return rep.fail(f"right action of {b} on {f} is missing or misshapen")
            if not h.is_well_defined():
                return rep.fail(f"right action of {b} on {f} is not a homomorphism of the groups")
    for f in c.morphism_ids:
        A, B = c.morphisms[f]
        if not d.left[(c.identities[B], f)].equals(AbHom.identity(d.groups[f])):
            return rep.fail(f"identity does not act trivially on the left of {f}")
        if not d.right[(f, c.identities[A])].equals(AbHom.identity(d.groups[f])):
            return rep.fail(f"identity does not act trivially on the right of {f}")
        for a in c.out_of(B):
            af = c.table[(a, f)]
            la = d.left[(a, f)]
            for a2 in c.out_of(c.tgt(a)):
                two = d.left[(a2, af)].compose_after(la)
                one = d.left[(c.table[(a2, a)], f)]
                if not two.equals(one):
                    return rep.fail(f"left actions do not compose at ({a2},{a},{f})")
        for b in c.into(A):
            fb = c.table[(f, b)]
            rb = d.right[(f, b)]
            for b2 in c.into(c.src(b)):
                two = d.right[(fb, b2)].compose_after(rb)
                one = d.right[(f, c.table[(b, b2)])]
                if not two.equals(one):
                    return rep.fail(f"right actions do not compose at ({f},{b},{b2})")
            for a in c.out_of(B):
                lr = d.left[(a, fb)].compose_after(rb)
                rl = d.right[(c.table[(a, f)], b)].compose_after(d.left[(a, f)])
                if not lr.equals(rl):
                    return rep.fail(f"left and right actions do not commute at ({a},{f},{b})")
    return rep


def require_valid_system(d: NaturalSystem) -> NaturalSystem:
    rep = validate_natural_system(d)
    if not rep:
        raise ValidationError(f"invalid natural system: {rep.first_failure}")
    return d


# ---------------------------------------------------------------------------
# Functor and bifunctor coefficients


@dataclass(frozen=True, eq=False)
class AbFunctor:
    """Covariant functor C -> Ab: a group per object, a map per morphism."""

    base: FinCat
    groups: Mapping[str, FgAbGroup]
    maps: Mapping[str, AbHom]

    def validate(self) -> Report:
        rep = Report("functor to abelian groups")
        c = self.base
        for m in c.morphism_ids:
            h = self.maps.get(m)
            s, t = c.morphisms[m]
            if h is None or h.source.ngens != self.groups[s].ngens or h.target.ngens != self.groups[t].ngens:
                return rep.fail(f"map of {m} is missing or misshapen")
            if not h.is_well_defined():
                return rep.fail(f"map of {m} is not a homomorphism")
        for x in c.objects:
            if not self.maps[c.identities[x]].equals(AbHom.identity(self.groups[x])):
                return rep.fail(f"identity at {x} is not sent to the identity")
        for (g, f), gf in sorted(c.table.items()):
            if not self.maps[g].compose_after(self.maps[f]).equals(self.maps[gf]):
                return rep.fail(f"composition {g} o {f} is not preserved")
        return rep

    def to_json(self) -> dict:
        return {"groups": {x: g.to_json() for x, g in sorted(self.groups.items())},
                "maps": {m: h.to_json() for m, h in sorted(self.maps.items())}}

    @classmethod
    def from_json(cls, base: FinCat, data: Mapping) -> "AbFunctor":
        try:
            groups = {str(x): FgAbGroup.from_json(g) for x, g in data["groups"].items()}
            maps = {}
            for m, rows in data["maps"].items():
                s, t = base.morphisms[str(m)]
                maps[str(m)] = AbHom.from_rows(groups[s], groups[t], [[int(str(v)) for v in r] for r in rows])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed functor: {exc!r}") from exc
        return cls(base, groups, maps)


def constant_functor(c: FinCat, g: FgAbGroup) -> AbFunctor:
    return AbFunctor(c, {x: g for x in c.objects}, {m: AbHom.identity(g) for m in c.morphism_ids})


def natural_system_from_functor(c: FinCat, f: AbFunctor) -> NaturalSystem:
    """D_{a: A -> B} = F(B); a morphism c acts on the left by F(c), on the right trivially."""
    rep = f.validate()
    if not rep:
        raise ValidationError(f"functor laws fail: {rep.first_failure}")
    groups = {m: f.groups[c.tgt(m)] for m in c.morphism_ids}
    left = {}
    right = {}
    for m in c.morphism_ids:
        A, B = c.morphisms[m]
        for a in c.out_of(B):
            left[(a, m)] = f.maps[a]
        for b in c.into(A):
            right[(m, b)] = AbHom.identity(groups[m])
    return NaturalSystem(c, groups, left, right)


def natural_system_from_contravariant(c: FinCat, groups_at: Mapping[str, FgAbGroup],
                                      maps: Mapping[str, AbHom]) -> NaturalSystem:
    """D_{a: A -> B} = F(A) for a contravariant F; ``maps[m]`` goes F(tgt m) -> F(src m)."""
    groups = {m: groups_at[c.src(m)] for m in c.morphism_ids}
    left = {}
    right = {}
    for m in c.morphism_ids:
        A, B = c.morphisms[m]
        for a in c.out_of(B):
            left[(a, m)] = AbHom.identity(groups[m])
        for b in c.into(A):
            right[(m, b)] = maps[b]
    d = NaturalSystem(c, groups, left, right)
    return require_valid_system(d)


@dataclass(frozen=True, eq=False)
class Bifunctor:
    """d: C^op x C -> Ab.

    :param pre: (a, B) -> map d(tgt a, B) -> d(src a, B)
    :param post: (b, A) -> map d(A, src b) -> d(A, tgt b)
    """

    base: FinCat
    groups: Mapping[tuple[str, str], FgAbGroup]
    pre: Mapping[tuple[str, str], AbHom]
    post: Mapping[tuple[str, str], AbHom]


def natural_system_from_bifunctor(c: FinCat, d: Bifunctor) -> NaturalSystem:
    """D_{f: A -> B} = d(A, B) with the actions of d in each variable."""
    groups = {m: d.groups[c.morphisms[m]] for m in c.morphism_ids}
    left = {}
    right = {}
    for m in c.morphism_ids:
        A, B = c.morphisms[m]
        for a in c.out_of(B):
            left[(a, m)] = d.post[(a, A)]
        for b in c.into(A):
            right[(m, b)] = d.pre[(b, B)]
    out = NaturalSystem(c, groups, left, right)
    rep = validate_natural_system(out)
    if not rep:
        raise ValidationError(f"bifunctor laws fail: {rep.first_failure}")
    return out


def hom_bifunctor(c: FinCat, modulus: int = 0) -> Bifunctor:
    """(A, B) -> Z/modulus[Hom(A, B)], acting by composition."""
    groups = {}
    for A in c.objects:
        for B in c.objects:
            n = len(c.hom(A, B))
            groups[(A, B)] = FgAbGroup.from_relations(
                n, [[modulus if i == j else 0 for j in range(n)] for i in range(n)] if modulus else [])
    pre = {}
    post = {}
    for a in c.morphism_ids:
        A2, A = c.morphisms[a]
        for B in c.objects:
            src = c.hom(A, B)
            tgt = c.hom(A2, B)
            rows = [[int(c.table[(h, a)] == k) for h in src] for k in tgt]
            pre[(a, B)] = AbHom.from_rows(groups[(A, B)], groups[(A2, B)], rows)
    for b in c.morphism_ids:
        B, B2 = c.morphisms[b]
        for A in c.objects:
            src = c.hom(A, B)
            tgt = c.hom(A, B2)
            rows = [[int(c.table[(b, h)] == k) for h in src] for k in tgt]
            post[(b, A)] = AbHom.from_rows(groups[(A, B)], groups[(A, B2)], rows)
    return Bifunctor(c, groups, pre, post)


def zero_system(c: FinCat) -> NaturalSystem:
    return natural_system_from_functor(c, constant_functor(c, FgAbGroup.trivial()))


def trivial_system(c: FinCat, g: FgAbGroup) -> NaturalSystem:
    """Constant functor coefficients: D_f = g, all actions identities."""
    return natural_system_from_functor(c, constant_functor(c, g))


def pullback_natural_system(q: FunctorData, d: NaturalSystem) -> NaturalSystem:
    """(q*D)_f = D_{q(f)} with actions transported along q."""
    c = q.source
    groups = {m: d.groups[q.mor_map[m]] for m in c.morphism_ids}
    left = {}
    right = {}
    for m in c.morphism_ids:
        A, B = c.morphisms[m]
        for a in c.out_of(B):
            left[(a, m)] = d.left[(q.mor_map[a], q.mor_map[m])]
        for b in c.into(A):
            right[(m, b)] = d.right[(q.mor_map[m], q.mor_map[b])]
    return NaturalSystem(c, groups, left, right)


def direct_sum_systems(systems: Sequence[NaturalSystem]) -> NaturalSystem:
    c = systems[0].base
    groups = {m: direct_sum([s.groups[m] for s in systems]) for m in c.morphism_ids}

    def block(maps: Sequence[AbHom], src: FgAbGroup, tgt: FgAbGroup) -> AbHom:
        rows: list[list[int]] = []
        col_off = 0
        total_cols = src.ngens
        for h in maps:
            for r in h.matrix:
                rows.append([0] * col_off + list(r) + [0] * (total_cols - col_off - h.source.ngens))
            col_off += h.source.ngens
        return AbHom.from_rows(src, tgt, rows)

    left = {k: block([s.left[k] for s in systems], groups[k[1]], groups[c.table[k]])
            for k in systems[0].left}
    right = {k: block([s.right[k] for s in systems], groups[k[0]], groups[c.table[k]])
             for k in systems[0].right}
    return NaturalSystem(c, groups, left, right)


def representable_system(c: FinCat, f0: str, modulus: int = 0) -> NaturalSystem:
    """Z/modulus[FC(f0, -)], the linearized representable functor on the factorization category."""
    fc = factorization_category(c)
    homs = {g: fc.hom(f0, g) for g in c.morphism_ids}
    index = {g: {m: i for i, m in enumerate(hs)} for g, hs in homs.items()}

    def grp(n: int) -> FgAbGroup:
        if not modulus:
            return FgAbGroup.free(n)
        return FgAbGroup.from_relations(n, [[modulus if i == j else 0 for j in range(n)] for i in range(n)])

    groups = {g: grp(len(homs[g])) for g in c.morphism_ids}

    def parts(mid: str) -> tuple[str, str]:
        # ids look like "(a,b):f"; recover (a, b) from the composition table of fc
        return _fc_pairs[mid]

    _fc_pairs: dict[str, tuple[str, str]] = {}
    for g in c.morphism_ids:
        A, B = c.morphisms[g]
        for a in c.into(A):
            for b in c.out_of(B):
                _fc_pairs[f"({a},{b}):{g}"] = (a, b)

    def action(g: str, h_of: Callable[[str, str], tuple[str, str]], tgt: str) -> AbHom:
        rows = [[0] * len(homs[g]) for _ in homs[tgt]]
        for j, m in enumerate(homs[g]):
            a, b = parts(m)
            na, nb = h_of(a, b)
            rows[index[tgt][f"({na},{nb}):{f0}"]][j] = 1
        return AbHom.from_rows(groups[g], groups[tgt], rows)

    left = {}
    right = {}
    for g in c.morphism_ids:
        A, B = c.morphisms[g]
        for x in c.out_of(B):
            left[(x, g)] = action(g, lambda a, b, x=x: (a, c.table[(x, b)]), c.table[(x, g)])
        for y in c.into(A):
            right[(g, y)] = action(g, lambda a, b, y=y: (c.table[(a, y)], b), c.table[(g, y)])
    return NaturalSystem(c, groups, left, right)


def random_natural_system(rng: random.Random, c: FinCat, max_summands: int = 2,
                          max_rank: int = 12) -> NaturalSystem:
    """Direct sum of a few randomly chosen systems: constants, Hom bifunctors, representables."""
    parts: list[NaturalSystem] = []
    for _ in range(rng.randint(1, max_summands)):
        kind = rng.randrange(3)
        mod = rng.choice([0, 2, 3, 4, 6])
        if kind == 0:
            parts.append(trivial_system(c, FgAbGroup.cyclic(mod)))
        elif kind == 1:
            if max(len(c.hom(a, b)) for a in c.objects for b in c.objects) <= max_rank:
                parts.append(natural_system_from_bifunctor(c, hom_bifunctor(c, mod)))
        else:
            f0 = rng.choice(c.morphism_ids)
            s = representable_system(c, f0, mod)
            if max(g.ngens for g in s.groups.values()) <= max_rank:
                parts.append(s)
    if not parts:
        parts.append(trivial_system(c, FgAbGroup.cyclic(rng.choice([0, 2, 3]))))
    return parts[0] if len(parts) == 1 else direct_sum_systems(parts)


def random_functor(rng: random.Random, c: FinCat, max_summands: int = 2) -> AbFunctor:
    """Sum of linearized representables Z/k[Hom(x0, -)] and constants."""
    funcs: list[AbFunctor] = []
    for _ in range(rng.randint(1, max_summands)):
        mod = rng.choice([0, 2, 3, 4])
        if rng.random() < 0.3:
            funcs.append(constant_functor(c, FgAbGroup.cyclic(mod)))
        else:
            funcs.append(representable_functor(c, rng.choice(c.objects), mod))
    return sum_functors(funcs)


def representable_functor(c: FinCat, x0: str, modulus: int = 0) -> AbFunctor:
    def grp(n: int) -> FgAbGroup:
        if not modulus:
            return FgAbGroup.free(n)
        return FgAbGroup.from_relations(n, [[modulus if i == j else 0 for j in range(n)] for i in range(n)])

    groups = {x: grp(len(c.hom(x0, x))) for x in c.objects}
    maps = {}
    for m in c.morphism_ids:
        s, t = c.morphisms[m]
        src, tgt = c.hom(x0, s), c.hom(x0, t)
        rows = [[int(c.table[(m, h)] == k) for h in src] for k in tgt]
        maps[m] = AbHom.from_rows(groups[s], groups[t], rows)
    return AbFunctor(c, groups, maps)


def sum_functors(funcs: Sequence[AbFunctor]) -> AbFunctor:
    c = funcs[0].base
    groups = {x: direct_sum([f.groups[x] for f in funcs]) for x in c.objects}
    maps = {}
    for m in c.morphism_ids:
        s, t = c.morphisms[m]
        rows: list[list[int]] = []
        off = 0
        total = groups[s].ngens
        for f in funcs:
            h = f.maps[m]
            for r in h.matrix:
                rows.append([0] * off + list(r) + [0] * (total - off - h.source.ngens))
            off += h.source.ngens
        maps[m] = AbHom.from_rows(groups[s], groups[t], rows)
    return AbFunctor(c, groups, maps)


# ---------------------------------------------------------------------------
# Comparisons and the cartesian condition


def systems_equal(d: NaturalSystem, e: NaturalSystem) -> bool:
    """Object-wise group equality and literal equality of action matrices."""
    if d.base.morphism_ids != e.base.morphism_ids:
        return False
    for m in d.base.morphism_ids:
        if d.groups[m].ngens != e.groups[m].ngens or d.groups[m] != e.groups[m]:
            return False
    return all(d.left[k].matrix == e.left[k].matrix for k in d.left) and \
        all(d.right[k].matrix == e.right[k].matrix for k in d.right)


def check_natural_iso(d: NaturalSystem, e: NaturalSystem, theta: Mapping[str, AbHom]) -> Report:
    """Verify that theta_f: D_f -> E_f are isomorphisms commuting with all actions."""
    rep = Report("natural isomorphism")
    c = d.base
    for f in c.morphism_ids:
        t = theta[f]
        if not t.is_well_defined() or not t.is_isomorphism():
            return rep.fail(f"component at {f} is not an isomorphism")
    for (a, f), h in d.left.items():
        af = c.table[(a, f)]
        if not theta[af].compose_after(h).equals(e.left[(a, f)].compose_after(theta[f])):
            return rep.fail(f"left action of {a} on {f} not respected")
    for (g, b), h in d.right.items():
        gb = c.table[(g, b)]
        if not theta[gb].compose_after(h).equals(e.right[(g, b)].compose_after(theta[g])):
            return rep.fail(f"right action of {b} on {g} not respected")
    return rep


class ProductShape(Protocol):
    left: str
    right: str
    product: str
    p1: str
    p2: str


class TheoryShape(Protocol):
    cat: FinCat
    terminal: str | None
    product_witnesses: Sequence[ProductShape]


def cartesian_report(d: NaturalSystem, t: TheoryShape) -> Report:
    """Check D_{!_X} = 0 and D_f ~ D_{p1 f} + D_{p2 f} on every listed witness."""
    rep = Report("cartesian")
    c = t.cat
    if c is not d.base and c.morphism_ids != d.base.morphism_ids:
        return rep.fail("natural system lives on a different category")
    if t.terminal is not None:
        for f in c.morphism_ids:
            if c.tgt(f) == t.terminal and not d.groups[f].is_trivial():
                return rep.fail(f"terminal witness: D_{f} = {d.groups[f].describe()} is not zero")
    for w in t.product_witnesses:
        for f in c.into(w.product):
            comp = hom_tuple(d.groups[f], [d.left[(w.p1, f)], d.left[(w.p2, f)]])
            if not comp.is_isomorphism():
                return rep.fail(f"product witness {w.product}: comparison at {f} is not an isomorphism")
    return rep


def is_cartesian(d: NaturalSystem, t: TheoryShape) -> bool:
    return cartesian_report(d, t).ok
