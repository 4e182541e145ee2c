"""Finite categories as explicit composition tables.

Morphism ids are strings and every iteration runs in sorted id order, so all
derived data (tuple enumerations, cochain bases, chosen sections) is
reproducible.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import InputError, UnsupportedInputError, ValidationError
from .report import Report


@dataclass(frozen=True, eq=False)
class FinCat:
    """A finite category.

    :param objects: object ids
    :param morphisms: id -> (source, target)
    :param identities: object -> identity morphism id
    :param table: (g, f) -> g o f for every composable pair
    """

    objects: tuple[str, ...]
    morphisms: Mapping[str, tuple[str, str]]
    identities: Mapping[str, str]
    table: Mapping[tuple[str, str], str]
    name: str = ""

    @classmethod
    def build(cls, objects: Iterable[str], morphisms: Iterable[tuple[str, str, str]],
              identities: Mapping[str, str], compose: Iterable[tuple[str, str, str]],
              name: str = "") -> "FinCat":
        objs = tuple(sorted(set(objects)))
        mors: dict[str, tuple[str, str]] = {}
        for mid, s, t in sorted(morphisms):
            if mid in mors:
                raise InputError(f"duplicate morphism id {mid!r}")
            mors[mid] = (s, t)
        table: dict[tuple[str, str], str] = {}
        for g, f, gf in compose:
            if (g, f) in table and table[(g, f)] != gf:
                raise InputError(f"composition {g} o {f} given twice")
            table[(g, f)] = gf
        return cls(objs, mors, dict(sorted(identities.items())), table, name)

    # basic access --------------------------------------------------------

    @cached_property
    def morphism_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.morphisms))

    def src(self, m: str) -> str:
        return self.morphisms[m][0]

    def tgt(self, m: str) -> str:
        return self.morphisms[m][1]

    def identity(self, x: str) -> str:
        return self.identities[x]

    def is_identity(self, m: str) -> bool:
        return self.identities.get(self.src(m)) == m

    def compose(self, g: str, f: str) -> str:
        """g o f (apply f first)."""
        try:
            return self.table[(g, f)]
        except KeyError:
            raise InputError(f"{g} o {f} is not composable") from None

    def compose_many(self, ms: Sequence[str]) -> str:
        """a1 o a2 o ... o an; the empty sequence is not allowed."""
        out = ms[-1]
        for m in reversed(ms[:-1]):
            out = self.table[(m, out)]
        return out

    @cached_property
    def _homs(self) -> dict[tuple[str, str], tuple[str, ...]]:
        out: dict[tuple[str, str], list[str]] = {}
        for m in self.morphism_ids:
            out.setdefault(self.morphisms[m], []).append(m)
        return {k: tuple(v) for k, v in out.items()}

    def hom(self, a: str, b: str) -> tuple[str, ...]:
        return self._homs.get((a, b), ())

    @cached_property
    def _incoming(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {x: [] for x in self.objects}
        for m in self.morphism_ids:
            out[self.tgt(m)].append(m)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def _outgoing(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {x: [] for x in self.objects}
        for m in self.morphism_ids:
            out[self.src(m)].append(m)
        return {k: tuple(v) for k, v in out.items()}

    def into(self, x: str) -> tuple[str, ...]:
        return self._incoming[x]

    def out_of(self, x: str) -> tuple[str, ...]:
        return self._outgoing[x]

    def __len__(self) -> int:
        return len(self.morphisms)

    # nerve ---------------------------------------------------------------

    def composable_tuples(self, n: int) -> list[tuple[str, ...]]:
        """All (a1, ..., an) with src(a_i) = tgt(a_{i+1}), in lexicographic order.

        For n = 0 the tuples are the 1-element tuples of objects.
        """
        return self._nerve(n)[0]

    def tuple_composites(self, n: int) -> list[str]:
        """Composite a1 ... an for each tuple of ``composable_tuples(n)`` (n >= 1)."""
        return self._nerve(n)[1]

    def nerve_size(self, n: int) -> int:
        return len(self._nerve(n)[0])

    @cached_property
    def _nerve_cache(self) -> dict[int, tuple[list[tuple[str, ...]], list[str]]]:
        return {}

    def _nerve(self, n: int) -> tuple[list[tuple[str, ...]], list[str]]:
        cache = self._nerve_cache
        if n in cache:
            return cache[n]
        if n == 0:
            res = ([(x,) for x in self.objects], [self.identities[x] for x in self.objects])
        elif n == 1:
            res = ([(m,) for m in self.morphism_ids], list(self.morphism_ids))
        else:
            prev, comps = self._nerve(n - 1)
            tups: list[tuple[str, ...]] = []
            out: list[str] = []
            table = self.table
            for t, c in zip(prev, comps):
                for a in self._incoming[self.src(t[-1])]:
                    tups.append(t + (a,))
                    out.append(table[(c, a)])
            res = (tups, out)
        cache[n] = res
        return res

    # serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "objects": list(self.objects),
            "morphisms": [{"id": m, "src": s, "tgt": t} for m, (s, t) in sorted(self.morphisms.items())],
            "identities": dict(sorted(self.identities.items())),
            "compose": [{"g": g, "f": f, "gf": gf} for (g, f), gf in sorted(self.table.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FinCat":
        try:
            return cls.build(
                [str(x) for x in data["objects"]],
                [(str(m["id"]), str(m["src"]), str(m["tgt"])) for m in data["morphisms"]],
                {str(k): str(v) for k, v in data["identities"].items()},
                [(str(c["g"]), str(c["f"]), str(c["gf"])) for c in data["compose"]],
                str(data.get("name", "")),
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed category description: {exc!r}") from exc

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<FinCat{label}: {len(self.objects)} objects, {len(self.morphisms)} morphisms>"


def validate_category(c: FinCat) -> Report:
    """Check typing, totality of composition, identity laws and associativity."""
    rep = Report("category")
    objs = set(c.objects)
    for m, (s, t) in sorted(c.morphisms.items()):
        if s not in objs or t not in objs:
            return rep.fail(f"morphism {m} has unknown endpoint")
    for x in c.objects:
        i = c.identities.get(x)
        if i is None or i not in c.morphisms or c.morphisms[i] != (x, x):
            return rep.fail(f"object {x} lacks a valid identity")
    for (g, f), gf in sorted(c.table.items()):
        if g not in c.morphisms or f not in c.morphisms or gf not in c.morphisms:
            return rep.fail(f"composition entry ({g},{f}) names an unknown morphism")
        if c.src(g) != c.tgt(f):
            return rep.fail(f"composition entry ({g},{f}) is not composable")
        if c.morphisms[gf] != (c.src(f), c.tgt(g)):
            return rep.fail(f"composite {g} o {f} = {gf} has the wrong type")
    for g in c.morphism_ids:
        for f in c.into(c.src(g)):
            if (g, f) not in c.table:
                return rep.fail(f"composition {g} o {f} is missing")
    for m in c.morphism_ids:
        if c.table[(c.identities[c.tgt(m)], m)] != m:
            return rep.fail(f"left identity law fails at {m}")
        if c.table[(m, c.identities[c.src(m)])] != m:
            return rep.fail(f"right identity law fails at {m}")
    for h in c.morphism_ids:
        for g in c.into(c.src(h)):
            hg = c.table[(h, g)]
            for f in c.into(c.src(g)):
                if c.table[(hg, f)] != c.table[(h, c.table[(g, f)])]:
                    return rep.fail(f"associativity fails at ({h},{g},{f})")
    return rep


def require_valid(c: FinCat) -> FinCat:
    rep = validate_category(c)
    if not rep:
        raise ValidationError(f"invalid category: {rep.first_failure}")
    return c


# ---------------------------------------------------------------------------
# Functors


@dataclass(frozen=True, eq=False)
class FunctorData:
    source: FinCat
    target: FinCat
    obj_map: Mapping[str, str]
    mor_map: Mapping[str, str]

    def __call__(self, m: str) -> str:
        return self.mor_map[m]

    def on_object(self, x: str) -> str:
        return self.obj_map[x]

    def compose_after(self, other: "FunctorData") -> "FunctorData":
        """self o other."""
        return FunctorData(other.source, self.target,
                           {x: self.obj_map[y] for x, y in other.obj_map.items()},
                           {m: self.mor_map[n] for m, n in other.mor_map.items()})

    def to_json(self) -> dict:
        return {"objects": dict(sorted(self.obj_map.items())),
                "morphisms": dict(sorted(self.mor_map.items()))}

    @classmethod
    def from_json(cls, source: FinCat, target: FinCat, data: Mapping) -> "FunctorData":
        try:
            return cls(source, target, {str(k): str(v) for k, v in data["objects"].items()},
                       {str(k): str(v) for k, v in data["morphisms"].items()})
        except (KeyError, AttributeError) as exc:
            raise InputError(f"malformed functor description: {exc!r}") from exc


def identity_functor(c: FinCat) -> FunctorData:
    return FunctorData(c, c, {x: x for x in c.objects}, {m: m for m in c.morphism_ids})


def validate_functor(p: FunctorData) -> Report:
    rep = Report("functor")
    c, d = p.source, p.target
    for x in c.objects:
        if p.obj_map.get(x) not in d.objects:
            return rep.fail(f"object {x} is not mapped to an object")
    for m in c.morphism_ids:
        fm = p.mor_map.get(m)
        if fm not in d.morphisms:
            return rep.fail(f"morphism {m} is not mapped to a morphism")
        if d.morphisms[fm] != (p.obj_map[c.src(m)], p.obj_map[c.tgt(m)]):
            return rep.fail(f"image of {m} has the wrong endpoints")
    for x in c.objects:
        if p.mor_map[c.identities[x]] != d.identities[p.obj_map[x]]:
            return rep.fail(f"identity of {x} is not preserved")
    for (g, f), gf in sorted(c.table.items()):
        if d.table[(p.mor_map[g], p.mor_map[f])] != p.mor_map[gf]:
            return rep.fail(f"composition {g} o {f} is not preserved")
    return rep


def is_discrete_opfibration(p: FunctorData) -> bool:
    """Every x upstairs and every arrow out of P(x) has exactly one lift at x."""
    c, d = p.source, p.target
    for x in c.objects:
        lifts: dict[str, int] = {}
        for m in c.out_of(x):
            lifts[p.mor_map[m]] = lifts.get(p.mor_map[m], 0) + 1
        for phi in d.out_of(p.obj_map[x]):
            if lifts.get(phi, 0) != 1:
                return False
    return True


def carrier_section(p: FunctorData) -> dict[str, str] | None:
    """Lexicographically least preimage of each downstairs morphism.

    Returns None unless p is the identity on objects and full.
    """
    c, d = p.source, p.target
    if set(c.objects) != set(d.objects) or any(p.obj_map[x] != x for x in c.objects):
        return None
    section: dict[str, str] = {}
    for m in c.morphism_ids:
        section.setdefault(p.mor_map[m], m)
    if len(section) != len(d.morphisms):
        return None
    for x in d.objects:
        # identities are always chosen as identities
        section[d.identities[x]] = c.identities[x]
    return dict(sorted(section.items()))


def is_full_identity_on_objects(p: FunctorData) -> bool:
    return carrier_section(p) is not None


# ---------------------------------------------------------------------------
# Constructions


def _fc_id(a: str, b: str, f: str) -> str:
    return f"({a},{b}):{f}"


def factorization_category(c: FinCat) -> FinCat:
    """Objects: morphisms of c.  A morphism f -> g is a pair (a, b) with b f a = g."""
    mors: list[tuple[str, str, str]] = []
    parts: dict[str, tuple[str, str]] = {}
    for f in c.morphism_ids:
        A, B = c.morphisms[f]
        for a in c.into(A):
            fa = c.table[(f, a)]
            for b in c.out_of(B):
                m = _fc_id(a, b, f)
                mors.append((m, f, c.table[(b, fa)]))
                parts[m] = (a, b)
    key = _fc_id
    comp: list[tuple[str, str, str]] = []
    for m1, f, g in mors:
        a, b = parts[m1]
        A2, B2 = c.morphisms[g]
        for a2 in c.into(A2):
            for b2 in c.out_of(B2):
                m2 = key(a2, b2, g)
                comp.append((m2, m1, key(c.table[(a, a2)], c.table[(b2, b)], f)))
    ids = {f: key(c.identities[c.src(f)], c.identities[c.tgt(f)], f) for f in c.morphism_ids}
    return FinCat.build(c.morphism_ids, mors, ids, comp, name=f"F({c.name})" if c.name else "")


@dataclass(frozen=True)
class Graph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]     # (id, src, tgt)

    @classmethod
    def build(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str, str]]) -> "Graph":
        ns = tuple(sorted(set(nodes)))
        es = tuple(sorted(edges))
        ids = [e[0] for e in es]
        if len(set(ids)) != len(ids) or set(ids) & set(ns):
            raise InputError("graph ids must be unique")
        for _e, s, t in es:
            if s not in ns or t not in ns:
                raise InputError(f"edge endpoint {s!r} or {t!r} is not a node")
        return cls(ns, es)

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes),
                "edges": [{"id": e, "src": s, "tgt": t} for e, s, t in self.edges]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        try:
            return cls.build([str(n) for n in data["nodes"]],
                             [(str(e["id"]), str(e["src"]), str(e["tgt"])) for e in data["edges"]])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed graph: {exc!r}") from exc


def path_category(g: Graph, max_morphisms: int = 20000) -> FinCat:
    """Free category on an acyclic graph.

    A path e1 -> e2 -> ... -> ek (e1 first) is named "ek.....e1", i.e. in
    composition order; the empty path at x is "1_x".
    """
    out: dict[str, list[tuple[str, str]]] = {n: [] for n in g.nodes}
    for e, s, t in g.edges:
        out[s].append((e, t))
    # cycle check by DFS colouring
    colour: dict[str, int] = {n: 0 for n in g.nodes}

    def visit(n: str) -> None:
        colour[n] = 1
        for _e, t in out[n]:
            if colour[t] == 1:
                raise UnsupportedInputError("graph has a directed cycle; its path category is infinite")
            if colour[t] == 0:
                visit(t)
        colour[n] = 2

    for n in g.nodes:
        if colour[n] == 0:
            visit(n)

    paths: dict[str, tuple[str, str, tuple[str, ...]]] = {}
    for n in g.nodes:
        paths[f"1_{n}"] = (n, n, ())
    frontier = [(n, n, ()) for n in g.nodes]
    while frontier:
        nxt = []
        for s, t, es in frontier:
            for e, t2 in out[t]:
                p = (s, t2, es + (e,))
                paths[".".join(reversed(p[2]))] = p
                nxt.append(p)
        if len(paths) > max_morphisms:
            raise UnsupportedInputError("path category exceeds the morphism guard")
        frontier = nxt
    by_edges = {v[2]: (k, v[0]) for k, v in paths.items() if v[2]}
    ident = {n: f"1_{n}" for n in g.nodes}
    comp: list[tuple[str, str, str]] = []
    for gid, (gs, _gt, ge) in paths.items():
        for fid, (_fs, ft, fe) in paths.items():
            if ft != gs:
                continue
            if not fe:
                comp.append((gid, fid, gid))
            elif not ge:
                comp.append((gid, fid, fid))
            else:
                comp.append((gid, fid, by_edges[fe + ge][0]))
    return FinCat.build(g.nodes, [(k, v[0], v[1]) for k, v in paths.items()], ident, comp)


@dataclass(frozen=True, eq=False)
class SetFunctor:
    """A functor from a finite category to finite sets."""

    base: FinCat
    sets: Mapping[str, tuple[str, ...]]
    maps: Mapping[str, Mapping[str, str]]

    def validate(self) -> Report:
        rep = Report("set functor")
        c = self.base
        for m in c.morphism_ids:
            s, t = c.morphisms[m]
            fm = self.maps.get(m)
            if fm is None or set(fm) != set(self.sets[s]) or any(v not in self.sets[t] for v in fm.values()):
                return rep.fail(f"map of {m} is not a function {s} -> {t}")
        for x in c.objects:
            if any(self.maps[c.identities[x]][e] != e for e in self.sets[x]):
                return rep.fail(f"identity at {x} does not act trivially")
        for (g, f), gf in sorted(c.table.items()):
            for e in self.sets[c.src(f)]:
                if self.maps[g][self.maps[f][e]] != self.maps[gf][e]:
                    return rep.fail(f"composition {g} o {f} not respected at {e}")
        return rep


def grothendieck_integral(c: FinCat, m: SetFunctor) -> tuple[FinCat, FunctorData]:
    """Category of elements of m with its projection to c."""
    rep = m.validate()
    if not rep:
        raise ValidationError(rep.first_failure or "invalid set functor")

    def obj(x: str, e: str) -> str:
        return f"{x}|{e}"

    def mor(phi: str, e: str) -> str:
        return f"{phi}|{e}"

    objs = [obj(x, e) for x in c.objects for e in m.sets[x]]
    mors = []
    for phi in c.morphism_ids:
        s, t = c.morphisms[phi]
        for e in m.sets[s]:
            mors.append((mor(phi, e), obj(s, e), obj(t, m.maps[phi][e])))
    ids = {obj(x, e): mor(c.identities[x], e) for x in c.objects for e in m.sets[x]}
    comp = []
    for (g, f), gf in c.table.items():
        for e in m.sets[c.src(f)]:
            comp.append((mor(g, m.maps[f][e]), mor(f, e), mor(gf, e)))
    total = FinCat.build(objs, mors, ids, comp)
    proj = FunctorData(total, c,
                       {obj(x, e): x for x in c.objects for e in m.sets[x]},
                       {mor(phi, e): phi for phi in c.morphism_ids for e in m.sets[c.src(phi)]})
    return total, proj


def opposite(c: FinCat) -> FinCat:
    return FinCat.build(c.objects, [(m, t, s) for m, (s, t) in c.morphisms.items()],
                        c.identities, [(f, g, gf) for (g, f), gf in c.table.items()])


def isomorphic_to_monoid_table(c: FinCat, table: Sequence[Sequence[int]]) -> bool:
    """Whether the one-object category c is isomorphic to the monoid ``table``.

    ``table[i][j]`` is the product i*j on {0..n-1}; brute force over bijections.
    """
    if len(c.objects) != 1 or len(table) != len(c.morphisms):
        return False
    ms = list(c.morphism_ids)
    n = len(ms)
    for perm in itertools.permutations(range(n)):
        if all(c.table[(ms[perm[i]], ms[perm[j]])] == ms[perm[table[i][j]]]
               for i in range(n) for j in range(n)):
            return True
    return False


def concrete_category(sizes: Mapping[str, int],
                      generators: Iterable[tuple[str, str, Sequence[int]]],
                      max_morphisms: int = 200) -> FinCat:
    """Subcategory of finite sets generated by explicit functions.

    ``sizes`` gives each object a set {0..n-1}; each generator (src, tgt, f)
    is a function written as the tuple of its values.  Morphisms are named
    "src>tgt:values".
    """
    objs = sorted(sizes)

    def name(s: str, t: str, vals: Sequence[int]) -> str:
        return f"{s}>{t}:" + ",".join(str(v) for v in vals)

    funcs: dict[str, tuple[str, str, tuple[int, ...]]] = {}
    for x in objs:
        vals = tuple(range(sizes[x]))
        funcs[name(x, x, vals)] = (x, x, vals)
    gens = []
    for s, t, vals in generators:
        vals = tuple(int(v) for v in vals)
        if len(vals) != sizes[s] or any(not 0 <= v < sizes[t] for v in vals):
            raise InputError(f"generator {s}->{t} is not a function between the given sets")
        gens.append((s, t, vals))
        funcs[name(s, t, vals)] = (s, t, vals)
    changed = True
    while changed:
        changed = False
        for f in list(funcs.values()):
            for g in gens:
                if g[0] != f[1]:
                    continue
                h = (f[0], g[1], tuple(g[2][v] for v in f[2]))
                k = name(*h)
                if k not in funcs:
                    funcs[k] = h
                    changed = True
                    if len(funcs) > max_morphisms:
                        raise UnsupportedInputError("generated category exceeds the morphism guard")
    ids = {x: name(x, x, tuple(range(sizes[x]))) for x in objs}
    comp = []
    for gk, (gs, gt, gv) in funcs.items():
        for fk, (fs, ft, fv) in funcs.items():
            if ft == gs:
                comp.append((gk, fk, name(fs, gt, tuple(gv[v] for v in fv))))
    return FinCat.build(objs, [(k, v[0], v[1]) for k, v in funcs.items()], ids, comp)



def marked_category(c: FinCat, suffix: str = "~") -> tuple[FinCat, FunctorData]:
    """The product of c with the monoid {1, e}, e idempotent.

    (m, 1) keeps the name m and (m, e) is named m + suffix; a composite is
    marked when either factor is.  Returns the category and the projection
    forgetting the mark, which is full and the identity on objects.
    """
    for m in c.morphism_ids:
        if m + suffix in c.morphisms:
            raise InputError(f"{m + suffix} already names a morphism")
    orig = {m: m for m in c.morphism_ids}
    orig.update({m + suffix: m for m in c.morphism_ids})
    mors = [(m, c.src(o), c.tgt(o)) for m, o in orig.items()]
    comp = []
    for (g, f), gf in c.table.items():
        comp.append((g, f, gf))
        comp.append((g + suffix, f, gf + suffix))
        comp.append((g, f + suffix, gf + suffix))
        comp.append((g + suffix, f + suffix, gf + suffix))
    big = FinCat.build(c.objects, mors, c.identities, comp)
    return big, FunctorData(big, c, {x: x for x in c.objects}, orig)
