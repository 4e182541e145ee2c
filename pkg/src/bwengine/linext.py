"""Linear extensions  D >-> E -> C  and their classification by H^2(C; D).

Morphisms of a built extension are pairs (f, x) with x in D_f, named
"f[x1,...]" by the canonical coordinates of x, and compose by

    (f, x)(g, y) = (fg, x g + f y + z(f, g)).

The cocycle is first normalized so that (1_X, 0) is an identity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .bwcoh import (Cochain, CochainComplex, CohomologyClass, coboundary, cohomology,
                    normalize, solve_coboundary)
from .errors import InputError, UnsupportedInputError, ValidationError
from .fincat import (FinCat, FunctorData, carrier_section, validate_category, validate_functor)
from .natsys import NaturalSystem, TheoryShape
from .report import Report

Coords = tuple[int, ...]


def element_label(f: str, coords: Coords) -> str:
    return f"{f}[{','.join(str(c) for c in coords)}]"


@dataclass(frozen=True, eq=False)
class LinearExtension:
    """A category over C whose fibre over f is a D_f-torsor.

    :param action: f -> {(canonical coords of a, e): a + e}
    :param section: a chosen lift of every morphism, when one is known
    """

    total: FinCat
    proj: FunctorData
    coeff: NaturalSystem
    action: Mapping[str, Mapping[tuple[Coords, str], str]]
    section: Mapping[str, str] | None = None
    cocycle: Cochain | None = None

    @property
    def base(self) -> FinCat:
        return self.proj.target

    def fiber(self, f: str) -> list[str]:
        return self._fibers[f]

    @property
    def _fibers(self) -> dict[str, list[str]]:
        cache = self.__dict__.get("_fiber_cache")
        if cache is None:
            cache = {f: [] for f in self.base.morphism_ids}
            for x in self.total.morphism_ids:
                cache[self.proj.mor_map[x]].append(x)
            object.__setattr__(self, "_fiber_cache", cache)
        return cache

    def act(self, f: str, a: Sequence[int], x: str) -> str:
        g = self.coeff.groups[f]
        return self.action[f][(g.normal_form(a), x)]

    def chosen_section(self) -> dict[str, str]:
        if self.section is not None:
            return dict(self.section)
        out = {f: fib[0] for f, fib in self._fibers.items()}
        for X in self.base.objects:
            out[self.base.identities[X]] = self.total.identities[X]
        return out

    def coordinates(self, section: Mapping[str, str]) -> dict[str, Coords]:
        """For each upstairs x over f, the unique a with a + s(f) = x (canonical coords)."""
        out: dict[str, Coords] = {}
        for f, fib in self._fibers.items():
            g = self.coeff.groups[f]
            s = section[f]
            for x in g.elements():
                c = g.normal_form(x)
                out[self.action[f][(c, s)]] = c
        return out

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "total": self.total.to_json(),
            "projection": self.proj.to_json(),
            "fibers": {f: fib for f, fib in sorted(self._fibers.items())},
            "action": [{"over": f, "element": [str(v) for v in a], "on": x, "result": y}
                       for f, tab in sorted(self.action.items()) for (a, x), y in sorted(tab.items())],
            "section": dict(sorted(self.section.items())) if self.section else None,
            "coeff": self.coeff.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LinearExtension":
        try:
            base = FinCat.from_json(data["base"])
            total = FinCat.from_json(data["total"])
            proj = FunctorData.from_json(total, base, data["projection"])
            coeff = NaturalSystem.from_json(data["coeff"], base)
            action: dict[str, dict[tuple[Coords, str], str]] = {f: {} for f in base.morphism_ids}
            for item in data["action"]:
                key = (tuple(int(str(v)) for v in item["element"]), str(item["on"]))
                action[str(item["over"])][key] = str(item["result"])
            sec = data.get("section")
            section = {str(k): str(v) for k, v in sec.items()} if sec else None
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InputError(f"malformed linear extension: {exc!r}") from exc
        return cls(total, proj, coeff, action, section)


def _require_finite(d: NaturalSystem) -> None:
    for f, g in d.groups.items():
        if not g.is_finite():
            raise UnsupportedInputError(f"D_{f} is infinite; fibres cannot be materialized")


def build_linear_extension(c: FinCat, d: NaturalSystem, z: Cochain) -> LinearExtension:
    """The extension E_z with composition (f,x)(g,y) = (fg, xg + fy + z(f,g))."""
    if z.degree != 2:
        raise InputError("a linear extension needs a 2-cocycle")
    if not coboundary(z).is_zero():
        raise InputError("z is not a cocycle")
    _require_finite(d)
    if z.is_normalized():
        zn = z
    else:
        zn, _psi = normalize(z)
    groups = d.groups
    elems: dict[str, list[Coords]] = {f: [groups[f].normal_form(x) for x in groups[f].elements()]
                                      for f in c.morphism_ids}
    mors = []
    for f in c.morphism_ids:
        s, t = c.morphisms[f]
        for a in elems[f]:
            mors.append((element_label(f, a), s, t))
    comp = []
    for g in c.morphism_ids:
        gg = groups[g]
        for f in c.into(c.src(g)):
            gf = c.table[(g, f)]
            tgt = groups[gf]
            zv = zn.values[(g, f)]
            for a in elems[g]:
                ag = d.right[(g, f)].apply(gg.from_normal(a))
                for b in elems[f]:
                    gb = d.left[(g, f)].apply(groups[f].from_normal(b))
                    val = [p + q + r for p, q, r in zip(ag, gb, zv)]
                    comp.append((element_label(g, a), element_label(f, b),
                                 element_label(gf, tgt.normal_form(val))))
    ids = {X: element_label(c.identities[X], tuple(0 for _ in groups[c.identities[X]].invariant_factors))
           for X in c.objects}
    total = FinCat.build(c.objects, mors, ids, comp)
    proj = FunctorData(total, c, {X: X for X in c.objects},
                       {element_label(f, a): f for f in c.morphism_ids for a in elems[f]})
    action: dict[str, dict[tuple[Coords, str], str]] = {}
    for f in c.morphism_ids:
        g = groups[f]
        tab = {}
        for a in elems[f]:
            av = g.from_normal(a)
            for x in elems[f]:
                tab[(a, element_label(f, x))] = element_label(
                    f, g.normal_form([p + q for p, q in zip(av, g.from_normal(x))]))
        action[f] = tab
    zero = {f: element_label(f, tuple(0 for _ in groups[f].invariant_factors)) for f in c.morphism_ids}
    return LinearExtension(total, proj, d, action, zero, zn)


def validate_linear_extension(e: LinearExtension) -> Report:
    """Category axioms, projection, torsor actions and the distributive law, all exhaustively."""
    rep = Report("linear extension")
    rep.merge(validate_category(e.total), "total: ")
    if not rep:
        return rep
    rep.merge(validate_functor(e.proj), "projection: ")
    if not rep:
        return rep
    if carrier_section(e.proj) is None:
        return rep.fail("projection is not full and the identity on objects")
    c = e.base
    d = e.coeff
    for f in c.morphism_ids:
        g = d.groups[f]
        fib = e.fiber(f)
        els = [g.normal_form(x) for x in g.elements()]
        zero = tuple(0 for _ in g.invariant_factors)
        tab = e.action.get(f, {})
        for x in fib:
            if tab.get((zero, x)) != x:
                return rep.fail(f"zero does not act trivially on {x}")
            orbit = {tab.get((a, x)) for a in els}
            if orbit != set(fib) or len(orbit) != len(els):
                return rep.fail(f"action on the fibre over {f} is not simply transitive at {x}")
            for a in els:
                for b in els:
                    ab = g.normal_form([p + q for p, q in zip(g.from_normal(a), g.from_normal(b))])
                    if tab[(a, tab[(b, x)])] != tab[(ab, x)]:
                        return rep.fail(f"action over {f} is not additive at {x}")
    # distributive law (a + x)(b + y) = (f b + a g) + x y
    tot = e.total
    for xg in tot.morphism_ids:
        g = e.proj.mor_map[xg]
        Dg = d.groups[g]
        els_g = [Dg.normal_form(v) for v in Dg.elements()]
        for xf in tot.into(tot.src(xg)):
            f = e.proj.mor_map[xf]
            Df = d.groups[f]
            gf = c.table[(g, f)]
            Dgf = d.groups[gf]
            prod = tot.table[(xg, xf)]
            for a in els_g:
                ag = e.action[g][(a, xg)]
                a_f = d.right[(g, f)].apply(Dg.from_normal(a))
                for b in (Df.normal_form(v) for v in Df.elements()):
                    bf = e.action[f][(b, xf)]
                    gb = d.left[(g, f)].apply(Df.from_normal(b))
                    shift = Dgf.normal_form([p + q for p, q in zip(a_f, gb)])
                    if tot.table[(ag, bf)] != e.action[gf][(shift, prod)]:
                        return rep.fail(f"distributive law fails at ({xg}, {xf})")
    return rep


def extract_cocycle(e: LinearExtension, section: Mapping[str, str] | None = None) -> Cochain:
    """z(f, g) = the unique a with s(f) s(g) = a + s(fg)."""
    s = dict(section) if section is not None else e.chosen_section()
    coords = e.coordinates(s)
    c = e.base
    d = e.coeff
    vals = {}
    for f, g in c.composable_tuples(2):
        prod = e.total.table[(s[f], s[g])]
        vals[(f, g)] = tuple(d.groups[c.table[(f, g)]].from_normal(coords[prod]))
    return Cochain(c, d, 2, vals)


@dataclass(frozen=True)
class ExtensionEquivalence:
    mapping: Mapping[str, str]
    psi: Cochain

    def to_json(self) -> dict:
        return {"mapping": dict(sorted(self.mapping.items())), "psi": self.psi.to_json()}


def are_equivalent(e: LinearExtension, e2: LinearExtension) -> ExtensionEquivalence | None:
    """Solve z - z' = d psi and return eps(a + s(f)) = (a + psi(f)) + s'(f), verified."""
    if e.base.morphism_ids != e2.base.morphism_ids:
        raise InputError("extensions live over different categories")
    for f in e.base.morphism_ids:
        if e.coeff.groups[f] != e2.coeff.groups[f]:
            raise InputError("extensions have different coefficient systems")
    s, s2 = e.chosen_section(), e2.chosen_section()
    z, z2 = extract_cocycle(e, s), extract_cocycle(e2, s2)
    cx = CochainComplex(e.coeff)
    psi = solve_coboundary(cx, z - z2)
    if psi is None:
        return None
    coords = e.coordinates(s)
    d = e.coeff
    mapping = {}
    for x in e.total.morphism_ids:
        f = e.proj.mor_map[x]
        g = d.groups[f]
        shifted = g.normal_form([p + q for p, q in zip(g.from_normal(coords[x]), psi.values[(f,)])])
        mapping[x] = e2.action[f][(shifted, s2[f])]
    rep = check_equivalence(e, e2, mapping)
    if not rep:
        raise ValidationError(f"constructed equivalence fails: {rep.first_failure}")
    return ExtensionEquivalence(mapping, psi)


def check_equivalence(e: LinearExtension, e2: LinearExtension, eps: Mapping[str, str]) -> Report:
    rep = Report("extension equivalence")
    if sorted(eps.values()) != sorted(e2.total.morphism_ids):
        return rep.fail("map is not a bijection on morphisms")
    for x in e.total.morphism_ids:
        if e2.proj.mor_map[eps[x]] != e.proj.mor_map[x]:
            return rep.fail(f"p' eps != p at {x}")
    for (g, f), gf in e.total.table.items():
        if e2.total.table[(eps[g], eps[f])] != eps[gf]:
            return rep.fail(f"composition {g} o {f} not preserved")
    for f, tab in e.action.items():
        for (a, x), y in tab.items():
            if e2.action[f][(a, eps[x])] != eps[y]:
                return rep.fail(f"action not preserved at {x}")
    return rep


def enumerate_extension_classes(c: FinCat, d: NaturalSystem) -> list[tuple[CohomologyClass, LinearExtension]]:
    """One extension for every element of H^2(C; D)."""
    h = cohomology(c, d, 2)
    if not h.group.is_finite():
        raise UnsupportedInputError("H^2 is infinite; classes cannot be enumerated")
    out = []
    for coords in h.elements():
        z = h.representative(coords)
        ext = build_linear_extension(c, d, z)
        out.append((CohomologyClass(2, h.group, coords, z), ext))
    return out


def classify_extension(e: LinearExtension) -> CohomologyClass:
    h = cohomology(e.base, e.coeff, 2)
    z = extract_cocycle(e)
    return h.class_of(z)


def census_extensions(c: FinCat, d: NaturalSystem, limit: int = 1 << 20) -> list[LinearExtension]:
    """Every composition table on the fixed fibres {f} x D_f giving a linear extension.

    The fibres and the D-action (a + (f, x) = (f, a + x)) are fixed; all
    assignments of composites to composable pairs are tried and those
    satisfying the category axioms, the projection and the distributive law
    are kept.  Exhaustive, so only for tiny inputs.
    """
    _require_finite(d)
    groups = d.groups
    elems = {f: [groups[f].normal_form(x) for x in groups[f].elements()] for f in c.morphism_ids}
    up = [(element_label(f, a), f, a) for f in c.morphism_ids for a in elems[f]]
    over = {lab: f for lab, f, _ in up}
    coord = {lab: a for lab, _f, a in up}
    pairs = [(x, y) for x, fx, _ in up for y, fy, _ in up if c.src(fx) == c.tgt(fy)]
    choices = [[element_label(c.table[(over[x], over[y])], a) for a in elems[c.table[(over[x], over[y])]]]
               for x, y in pairs]
    total = 1
    for ch in choices:
        total *= len(ch)
    if total > limit:
        raise UnsupportedInputError(f"census would try {total} tables (limit {limit})")

    def add(f: str, a: Coords, b: Coords) -> Coords:
        g = groups[f]
        return g.normal_form([p + q for p, q in zip(g.from_normal(a), g.from_normal(b))])

    # precompute the distributive shift for each (a on x, b on y)
    pair_index = {p: i for i, p in enumerate(pairs)}
    constraints = []
    for x, y in pairs:
        fx, fy = over[x], over[y]
        fxy = c.table[(fx, fy)]
        for a in elems[fx]:
            ax = element_label(fx, add(fx, a, coord[x]))
            a_g = d.right[(fx, fy)].apply(groups[fx].from_normal(a))
            for b in elems[fy]:
                by = element_label(fy, add(fy, b, coord[y]))
                fb = d.left[(fx, fy)].apply(groups[fy].from_normal(b))
                shift = groups[fxy].normal_form([p + q for p, q in zip(a_g, fb)])
                constraints.append((pair_index[(ax, by)], pair_index[(x, y)], fxy, shift))
    found = []
    for combo in itertools.product(*choices):
        ok = True
        for i, j, fxy, shift in constraints:
            if combo[i] != element_label(fxy, add(fxy, shift, coord[combo[j]])):
                ok = False
                break
        if not ok:
            continue
        table = {p: combo[i] for i, p in enumerate(pairs)}
        # identities: a two-sided unit over each base identity
        ids = {}
        for X in c.objects:
            one = c.identities[X]
            for cand in (element_label(one, a) for a in elems[one]):
                if all(table[(cand, y)] == y for y, fy, _ in up if c.tgt(fy) == X) and \
                        all(table[(x, cand)] == x for x, fx, _ in up if c.src(fx) == X):
                    ids[X] = cand
                    break
        if len(ids) != len(c.objects):
            continue
        cat = FinCat.build(c.objects, [(lab, c.src(f), c.tgt(f)) for lab, f, _ in up], ids,
                           [(x, y, v) for (x, y), v in table.items()])
        if not validate_category(cat):
            continue
        proj = FunctorData(cat, c, {X: X for X in c.objects}, dict(over))
        if not validate_functor(proj):
            continue
        action = {f: {(a, element_label(f, b)): element_label(f, add(f, a, b)) for a in elems[f] for b in elems[f]}
                  for f in c.morphism_ids}
        found.append(LinearExtension(cat, proj, d, action))
    return found


def check_theory_extension(e: LinearExtension, theory: TheoryShape) -> Report:
    """Lifted projections exhibit products in E for each witness; terminal hom-sets are singletons."""
    rep = Report("theory extension")
    tot = e.total
    s = e.chosen_section()
    if theory.terminal is not None:
        T = theory.terminal
        for Z in tot.objects:
            n = len(tot.hom(Z, T))
            if n != 1:
                return rep.fail(f"terminal witness {T}: |Hom_E({Z}, {T})| = {n}")
    for w in theory.product_witnesses:
        q1, q2 = s[w.p1], s[w.p2]
        for Z in tot.objects:
            seen = {}
            for h in tot.hom(Z, w.product):
                key = (tot.table[(q1, h)], tot.table[(q2, h)])
                if key in seen:
                    return rep.fail(f"product witness {w.product}: comparison not injective at {Z}")
                seen[key] = h
            want = len(tot.hom(Z, w.left)) * len(tot.hom(Z, w.right))
            if len(seen) != want:
                return rep.fail(f"product witness {w.product}: comparison not surjective at {Z}")
    return rep


__all__ = [
    "LinearExtension", "ExtensionEquivalence", "build_linear_extension", "validate_linear_extension",
    "extract_cocycle", "are_equivalent", "check_equivalence", "enumerate_extension_classes",
    "classify_extension", "census_extensions", "check_theory_extension", "element_label",
]


