"""Finite track categories, their linear extensions, and realization of H^3 classes.

A track category is stored as a FinCat of 1-cells together with tables for
tracks (2-cells between parallel 1-cells): vertical composition
``vcomp[(b, a)] = b o a`` (a first), inverses, identity tracks ``0_f`` and
whiskering ``lwhisk[(x, a)] = x.a`` and ``rwhisk[(a, y)] = a.y``.  Every
validator is exhaustive; the tables are compiled to integer arrays so that the
interchange and functoriality checks run vectorized.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .abelcore import AbHom, FgAbGroup, _snf, _solve_from, group_from_table
from .bwcoh import (Cochain, CochainComplex, RelativeComplex, cohomology, normalize,
                    normalizing_cochain, pullback_cochain, solve_coboundary, invert_connecting)
from .errors import InputError, ObstructionError, UnsupportedInputError, ValidationError
from .fincat import FinCat, FunctorData, carrier_section, validate_category, validate_functor
from .natsys import (NaturalSystem, check_natural_iso, pullback_natural_system,
                     require_valid_system, systems_equal)
from .report import Report

MAX_TRACKS = 6000
Coords = tuple[int, ...]


# ---------------------------------------------------------------------------
# Track categories


@dataclass(frozen=True, eq=False)
class TrackCat:
    cells: FinCat
    tracks: Mapping[str, tuple[str, str]]
    identity_tracks: Mapping[str, str]
    vcomp: Mapping[tuple[str, str], str]
    inverse: Mapping[str, str]
    lwhisk: Mapping[tuple[str, str], str]
    rwhisk: Mapping[tuple[str, str], str]

    @cached_property
    def _between(self) -> dict[tuple[str, str], tuple[str, ...]]:
        out: dict[tuple[str, str], list[str]] = {}
        for a, st in sorted(self.tracks.items()):
            out.setdefault(st, []).append(a)
        return {k: tuple(v) for k, v in out.items()}

    def between(self, f: str, g: str) -> tuple[str, ...]:
        return self._between.get((f, g), ())

    def aut(self, f: str) -> tuple[str, ...]:
        return self.between(f, f)

    def hcomp(self, b: str, a: str) -> str:
        """b * a = (b.f1) o (x.a) for a: f => f1 and b: x => x1."""
        x = self.tracks[b][0]
        f1 = self.tracks[a][1]
        return self.vcomp[(self.rwhisk[(b, f1)], self.lwhisk[(x, a)])]

    def validate(self) -> Report:
        return validate_track_category(self)

    def to_json(self) -> dict:
        return {
            "cells": self.cells.to_json(),
            "tracks": [{"name": a, "source": s, "target": t} for a, (s, t) in sorted(self.tracks.items())],
            "identity": dict(sorted(self.identity_tracks.items())),
            "vertical": [[b, a, v] for (b, a), v in sorted(self.vcomp.items())],
            "inverse": dict(sorted(self.inverse.items())),
            "left": [[x, a, v] for (x, a), v in sorted(self.lwhisk.items())],
            "right": [[a, y, v] for (a, y), v in sorted(self.rwhisk.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "TrackCat":
        try:
            cells = FinCat.from_json(data["cells"])
            tracks = {str(t["name"]): (str(t["source"]), str(t["target"])) for t in data["tracks"]}
            ids = {str(k): str(v) for k, v in data["identity"].items()}
            vc = {(str(b), str(a)): str(v) for b, a, v in data["vertical"]}
            inv = {str(k): str(v) for k, v in data["inverse"].items()}
            lw = {(str(x), str(a)): str(v) for x, a, v in data["left"]}
            rw = {(str(a), str(y)): str(v) for a, y, v in data["right"]}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed track category: {exc!r}") from exc
        return cls(cells, tracks, ids, vc, inv, lw, rw)


def discrete_track_category(c: FinCat) -> TrackCat:
    """Only the identity tracks 0_f."""
    tracks = {f"0_{f}": (f, f) for f in c.morphism_ids}
    ids = {f: f"0_{f}" for f in c.morphism_ids}
    vc = {(f"0_{f}", f"0_{f}"): f"0_{f}" for f in c.morphism_ids}
    inv = {f"0_{f}": f"0_{f}" for f in c.morphism_ids}
    lw = {(x, f"0_{f}"): f"0_{c.table[(x, f)]}" for (x, f) in c.table}
    rw = {(f"0_{f}", y): f"0_{c.table[(f, y)]}" for (f, y) in c.table}
    return TrackCat(c, tracks, ids, vc, inv, lw, rw)


def codiscrete_track_category(c: FinCat) -> TrackCat:
    """Exactly one track between any two parallel 1-cells."""
    def name(f: str, g: str) -> str:
        return f"{f}=>{g}"

    tracks = {}
    for x in c.objects:
        for y in c.objects:
            hs = c.hom(x, y)
            for f in hs:
                for g in hs:
                    tracks[name(f, g)] = (f, g)
    ids = {f: name(f, f) for f in c.morphism_ids}
    vc = {}
    for a, (f, g) in tracks.items():
        for h in c.hom(c.src(g), c.tgt(g)):
            vc[(name(g, h), a)] = name(f, h)
    inv = {a: name(g, f) for a, (f, g) in tracks.items()}
    lw = {}
    rw = {}
    for a, (f, g) in tracks.items():
        for x in c.out_of(c.tgt(f)):
            lw[(x, a)] = name(c.table[(x, f)], c.table[(x, g)])
        for y in c.into(c.src(f)):
            rw[(a, y)] = name(c.table[(f, y)], c.table[(g, y)])
    return TrackCat(c, tracks, ids, vc, inv, lw, rw)


class _Compiled:
    """Integer-array form of a track category (missing entries are -1)."""

    def __init__(self, t: TrackCat) -> None:
        c = t.cells
        self.cells = list(c.morphism_ids)
        self.ci = {m: i for i, m in enumerate(self.cells)}
        objs = list(c.objects)
        oi = {x: i for i, x in enumerate(objs)}
        nc = len(self.cells)
        self.csrc = np.array([oi[c.src(m)] for m in self.cells], dtype=np.int64)
        self.ctgt = np.array([oi[c.tgt(m)] for m in self.cells], dtype=np.int64)
        self.comp = np.full((nc, nc), -1, dtype=np.int64)
        for (g, f), gf in c.table.items():
            self.comp[self.ci[g], self.ci[f]] = self.ci[gf]
        self.cell_ids = np.array([self.ci[c.identities[x]] for x in objs], dtype=np.int64)
        self.tr = sorted(t.tracks)
        if len(self.tr) > MAX_TRACKS:
            raise UnsupportedInputError(f"{len(self.tr)} tracks exceed the guard {MAX_TRACKS}")
        self.ti = {a: i for i, a in enumerate(self.tr)}
        nt = len(self.tr)
        self.tsrc = np.array([self.ci[t.tracks[a][0]] for a in self.tr], dtype=np.int64)
        self.ttgt = np.array([self.ci[t.tracks[a][1]] for a in self.tr], dtype=np.int64)
        self.V = np.full((nt, nt), -1, dtype=np.int64)
        for (b, a), v in t.vcomp.items():
            self.V[self.ti[b], self.ti[a]] = self.ti[v]
        self.I = np.array([self.ti[t.identity_tracks[m]] for m in self.cells], dtype=np.int64)
        self.N = np.array([self.ti[t.inverse[a]] for a in self.tr], dtype=np.int64)
        self.L = np.full((nc, nt), -1, dtype=np.int64)
        for (x, a), v in t.lwhisk.items():
            self.L[self.ci[x], self.ti[a]] = self.ti[v]
        self.R = np.full((nt, nc), -1, dtype=np.int64)
        for (a, y), v in t.rwhisk.items():
            self.R[self.ti[a], self.ci[y]] = self.ti[v]


def _names_ok(t: TrackCat, rep: Report) -> bool:
    c = t.cells
    tr = t.tracks
    for a, (f, g) in tr.items():
        if f not in c.morphisms or g not in c.morphisms:
            rep.fail(f"track {a} has an unknown endpoint")
            return False
        if c.morphisms[f] != c.morphisms[g]:
            rep.fail(f"track {a}: {f} and {g} are not parallel")
            return False
    for f in c.morphism_ids:
        i = t.identity_tracks.get(f)
        if i not in tr or tr[i] != (f, f):
            rep.fail(f"identity track of {f} is missing or mistyped")
            return False
    for a in tr:
        if t.inverse.get(a) not in tr:
            rep.fail(f"track {a} has no inverse")
            return False
    for (b, a), v in t.vcomp.items():
        if b not in tr or a not in tr or v not in tr:
            rep.fail(f"vertical table entry ({b}, {a}) names an unknown track")
            return False
    for tab, side in ((t.lwhisk, "left"), (t.rwhisk, "right")):
        for key, v in tab.items():
            cell, a = (key[0], key[1]) if side == "left" else (key[1], key[0])
            if cell not in c.morphisms or a not in tr or v not in tr:
                rep.fail(f"{side} whisker entry {key} names an unknown cell or track")
                return False
    return True


def _first(mask: np.ndarray) -> tuple[int, ...] | None:
    hit = np.argwhere(mask)
    return tuple(int(v) for v in hit[0]) if hit.size else None


def validate_track_category(t: TrackCat) -> Report:
    """Groupoid axioms, whiskering functoriality, the bimodule law and interchange, exhaustively."""
    rep = Report("track category")
    rep.merge(validate_category(t.cells), "1-cells: ")
    if not rep or not _names_ok(t, rep):
        return rep
    k = _Compiled(t)
    tr, cells = k.tr, k.cells
    nt, nc = len(tr), len(cells)
    ar = np.arange(nt)
    V, L, R, I, N = k.V, k.L, k.R, k.I, k.N
    # vertical composition: defined exactly on composable pairs, correctly typed
    want = k.tsrc[:, None] == k.ttgt[None, :]
    bad = _first(want != (V >= 0))
    if bad is not None:
        b, a = bad
        state = "missing" if want[b, a] else "defined for non-composable tracks"
        return rep.fail(f"vertical composite {tr[b]} o {tr[a]} is {state}")
    bb, aa = np.nonzero(V >= 0)
    vv = V[bb, aa]
    bad = _first((k.tsrc[vv] != k.tsrc[aa]) | (k.ttgt[vv] != k.ttgt[bb]))
    if bad is not None:
        return rep.fail(f"vertical composite {tr[bb[bad[0]]]} o {tr[aa[bad[0]]]} is mistyped")
    bad = _first((V[I[k.ttgt], ar] != ar) | (V[ar, I[k.tsrc]] != ar))
    if bad is not None:
        return rep.fail(f"identity tracks are not units at {tr[bad[0]]}")
    bad = _first((k.tsrc[N] != k.ttgt) | (k.ttgt[N] != k.tsrc) | (V[N, ar] != I[k.tsrc]) | (V[ar, N] != I[k.ttgt]))
    if bad is not None:
        return rep.fail(f"inverse of {tr[bad[0]]} is wrong")
    for a in range(nt):
        bs = np.nonzero(V[:, a] >= 0)[0]
        ba = V[bs, a]
        left = V[:, ba]
        mid = V[:, bs]
        ok = mid >= 0
        right = np.where(ok, V[np.where(ok, mid, 0), a], -1)
        bad = _first(ok & (left != right))
        if bad is not None:
            g, j = bad
            return rep.fail(f"vertical composition is not associative at ({tr[g]}, {tr[bs[j]]}, {tr[a]})")
    # whisker tables: domains and typing
    wantL = k.csrc[:, None] == k.ctgt[k.tsrc][None, :]
    bad = _first(wantL != (L >= 0))
    if bad is not None:
        return rep.fail(f"left whisker {cells[bad[0]]}.{tr[bad[1]]} is "
                        f"{'missing' if wantL[bad] else 'defined off its domain'}")
    wantR = k.ctgt[None, :] == k.csrc[k.tsrc][:, None]
    bad = _first(wantR != (R >= 0))
    if bad is not None:
        return rep.fail(f"right whisker {tr[bad[0]]}.{cells[bad[1]]} is "
                        f"{'missing' if wantR[bad] else 'defined off its domain'}")
    xs, as_ = np.nonzero(L >= 0)
    lv = L[xs, as_]
    bad = _first((k.tsrc[lv] != k.comp[xs, k.tsrc[as_]]) | (k.ttgt[lv] != k.comp[xs, k.ttgt[as_]]))
    if bad is not None:
        return rep.fail(f"left whisker {cells[xs[bad[0]]]}.{tr[as_[bad[0]]]} is mistyped")
    as2, ys = np.nonzero(R >= 0)
    rv = R[as2, ys]
    bad = _first((k.tsrc[rv] != k.comp[k.tsrc[as2], ys]) | (k.ttgt[rv] != k.comp[k.ttgt[as2], ys]))
    if bad is not None:
        return rep.fail(f"right whisker {tr[as2[bad[0]]]}.{cells[ys[bad[0]]]} is mistyped")
    # functoriality in the track variable
    for x in range(nc):
        lx = L[x]
        sel = lx[aa] >= 0
        pb, pa = bb[sel], aa[sel]
        bad = _first(lx[V[pb, pa]] != V[lx[pb], lx[pa]])
        if bad is not None:
            return rep.fail(f"left whiskering by {cells[x]} does not preserve {tr[pb[bad[0]]]} o {tr[pa[bad[0]]]}")
        ry = R[:, x]
        sel = ry[aa] >= 0
        pb, pa = bb[sel], aa[sel]
        bad = _first(ry[V[pb, pa]] != V[ry[pb], ry[pa]])
        if bad is not None:
            return rep.fail(f"right whiskering by {cells[x]} does not preserve {tr[pb[bad[0]]]} o {tr[pa[bad[0]]]}")
    xs2, fs = np.nonzero(k.comp >= 0)
    bad = _first(L[xs2, I[fs]] != I[k.comp[xs2, fs]])
    if bad is not None:
        return rep.fail(f"left whiskering by {cells[xs2[bad[0]]]} does not fix the identity of {cells[fs[bad[0]]]}")
    bad = _first(R[I[xs2], fs] != I[k.comp[xs2, fs]])
    if bad is not None:
        return rep.fail(f"right whiskering by {cells[fs[bad[0]]]} does not fix the identity of {cells[xs2[bad[0]]]}")
    # functoriality in the 1-cell variable
    for tab, label in ((L, "left"), (R.T, "right")):
        idc = tab[k.cell_ids]
        mask = idc >= 0
        bad = _first(mask & (idc != ar[None, :]))
        if bad is not None:
            return rep.fail(f"{label} whiskering by an identity moves {tr[bad[1]]}")
    step = 256
    for s0 in range(0, len(xs2), step):
        g2, g1 = xs2[s0:s0 + step], fs[s0:s0 + step]
        # left: (g2 g1).a = g2.(g1.a)
        inner = L[g1]
        ok = inner >= 0
        rhs = np.where(ok, L[g2[:, None], np.where(ok, inner, 0)], -1)
        bad = _first(ok & (L[k.comp[g2, g1]] != rhs))
        if bad is not None:
            i, a = bad
            return rep.fail(f"left whiskering is not functorial at ({cells[g2[i]]}, {cells[g1[i]]}, {tr[a]})")
        # right: a.(g2 g1) = (a.g2).g1
        inner = R[:, g2].T
        ok = inner >= 0
        rhs = np.where(ok, R[np.where(ok, inner, 0), g1[:, None]], -1)
        bad = _first(ok & (R[:, k.comp[g2, g1]].T != rhs))
        if bad is not None:
            i, a = bad
            return rep.fail(f"right whiskering is not functorial at ({tr[a]}, {cells[g2[i]]}, {cells[g1[i]]})")
    # bimodule law (x.a).y = x.(a.y)
    for x in range(nc):
        lx = L[x]
        sel = np.nonzero(lx >= 0)[0]
        lhs = R[lx[sel]]
        ray = R[sel]
        ok = ray >= 0
        rhs = np.where(ok, lx[np.where(ok, ray, 0)], -1)
        bad = _first(ok & (lhs != rhs))
        if bad is not None:
            i, y = bad
            return rep.fail(f"whiskering is not associative at ({cells[x]}, {tr[sel[i]]}, {cells[y]})")
    # interchange (b.f1) o (x.a) = (x1.a) o (b.f)
    by_target: dict[int, np.ndarray] = {}
    for o in range(len(t.cells.objects)):
        by_target[o] = np.nonzero(k.ctgt[k.tsrc] == o)[0]
    for b in range(nt):
        x, x1 = k.tsrc[b], k.ttgt[b]
        A = by_target[int(k.csrc[x])]
        if not A.size:
            continue
        f, f1 = k.tsrc[A], k.ttgt[A]
        lhs = V[R[b, f1], L[x, A]]
        rhs = V[L[x1, A], R[b, f]]
        bad = _first(lhs != rhs)
        if bad is not None:
            return rep.fail(f"interchange fails for {tr[b]} and {tr[A[bad[0]]]}")
    return rep


def require_valid_track(t: TrackCat) -> TrackCat:
    rep = validate_track_category(t)
    if not rep:
        raise ValidationError(f"invalid track category: {rep.first_failure}", {"failure": rep.first_failure})
    return t


def homotopy_category(t: TrackCat) -> tuple[FinCat, FunctorData]:
    """1-cells modulo tracks; each class is named by its least member."""
    c = t.cells
    parent = {m: m for m in c.morphism_ids}

    def find(m: str) -> str:
        while parent[m] != m:
            parent[m] = parent[parent[m]]
            m = parent[m]
        return m

    for _a, (f, g) in t.tracks.items():
        rf, rg = find(f), find(g)
        if rf != rg:
            parent[max(rf, rg)] = min(rf, rg)
    members: dict[str, list[str]] = {}
    for m in c.morphism_ids:
        members.setdefault(find(m), []).append(m)
    name = {}
    for ms in members.values():
        least = min(ms)
        for m in ms:
            name[m] = least
    reps = sorted(set(name.values()))
    mors = [(r, c.src(r), c.tgt(r)) for r in reps]
    ids = {x: name[c.identities[x]] for x in c.objects}
    comp = []
    for g in reps:
        for f in c.into(c.src(g)):
            if name[f] == f:
                comp.append((g, f, name[c.table[(g, f)]]))
    ho = FinCat.build(c.objects, mors, ids, comp, name=f"ho({c.name})" if c.name else "")
    return ho, FunctorData(c, ho, {x: x for x in c.objects}, name)


# ---------------------------------------------------------------------------
# T-natural systems


@dataclass(frozen=True, eq=False)
class TNaturalSystem:
    """A natural system on the 1-cells with transport maps nabla_a: D_f -> D_g for a: f => g."""

    track: TrackCat
    system: NaturalSystem
    nabla: Mapping[str, AbHom]

    def validate(self) -> Report:
        return validate_tnatural_system(self)

    def is_inert(self) -> bool:
        return not _inertness_failures(self)


def validate_tnatural_system(dn: TNaturalSystem) -> Report:
    rep = Report("T-natural system")
    t, d = dn.track, dn.system
    c = t.cells
    rep.merge(d.validate(), "underlying system: ")
    if not rep:
        return rep
    for a, (f, g) in t.tracks.items():
        h = dn.nabla.get(a)
        if h is None or h.source.ngens != d.groups[f].ngens or h.target.ngens != d.groups[g].ngens:
            return rep.fail(f"transport along {a} is missing or misshapen")
    for f in c.morphism_ids:
        if not dn.nabla[t.identity_tracks[f]].equals(AbHom.identity(d.groups[f])):
            return rep.fail(f"axiom i): transport along 0_{f} is not the identity")
    for (b, a), ba in t.vcomp.items():
        if not dn.nabla[ba].equals(dn.nabla[b].compose_after(dn.nabla[a])):
            return rep.fail(f"axiom ii): transport along {b} o {a} is not the composite")
    for a, (g, g1) in t.tracks.items():
        B = c.src(g)
        C = c.tgt(g)
        for f in c.out_of(C):
            lhs = dn.nabla[t.lwhisk[(f, a)]].compose_after(d.left[(f, g)])
            rhs = d.left[(f, g1)].compose_after(dn.nabla[a])
            if not lhs.equals(rhs):
                return rep.fail(f"axiom iii): transport along {f}.{a} does not commute with {f}_")
        for h in c.into(B):
            lhs = dn.nabla[t.rwhisk[(a, h)]].compose_after(d.right[(g, h)])
            rhs = d.right[(g1, h)].compose_after(dn.nabla[a])
            if not lhs.equals(rhs):
                return rep.fail(f"axiom iii): transport along {a}.{h} does not commute with _{h}")
        # axiom iv): a = xi: f => f1 acting on D_g through whiskered composites
        f, f1 = g, g1
        for gg in c.into(c.src(f)):
            lhs = dn.nabla[t.rwhisk[(a, gg)]].compose_after(d.left[(f, gg)])
            if not lhs.equals(d.left[(f1, gg)]):
                return rep.fail(f"axiom iv): transport along {a}.{gg} is not compatible with {f}_ and {f1}_")
        for gg in c.out_of(c.tgt(f)):
            lhs = dn.nabla[t.lwhisk[(gg, a)]].compose_after(d.right[(gg, f)])
            if not lhs.equals(d.right[(gg, f1)]):
                return rep.fail(f"axiom iv): transport along {gg}.{a} is not compatible with _{f} and _{f1}")
    return rep


def _inertness_failures(dn: TNaturalSystem) -> list[str]:
    t, d = dn.track, dn.system
    out = []
    for f in t.cells.morphism_ids:
        for a in t.aut(f):
            if not dn.nabla[a].equals(AbHom.identity(d.groups[f])):
                out.append(a)
    return out


@dataclass(frozen=True)
class AutData:
    """Aut(f) in invariant-factor form with its element coding."""

    group: FgAbGroup
    encode: Mapping[str, Coords]
    decode: Mapping[Coords, str]

    def track_of(self, x: Sequence[int]) -> str:
        return self.decode[self.group.normal_form(x)]

    def generator_tracks(self) -> list[str]:
        n = self.group.ngens
        return [self.track_of([int(i == j) for i in range(n)]) for j in range(n)]


def aut_groups(t: TrackCat) -> dict[str, AutData]:
    out = {}
    for f in t.cells.morphism_ids:
        els = t.aut(f)
        add = {(a, b): t.vcomp[(a, b)] for a in els for b in els}
        try:
            g, enc, dec = group_from_table(els, add)
        except InputError as exc:
            raise ValidationError(f"Aut({f}) is not an abelian group: {exc}", {"one_cell": f}) from exc
        out[f] = AutData(g, enc, dec)
    return out


def _map_from_function(src: AutData, tgt: AutData, fn) -> AbHom:
    cols = [tgt.encode[fn(a)] for a in src.generator_tracks()]
    rows = tuple(tuple(cols[j][i] for j in range(len(cols))) for i in range(tgt.group.ngens))
    return AbHom(src.group, tgt.group, rows)


def aut_tnatural_system(t: TrackCat) -> TNaturalSystem:
    """D_f = Aut(f) with whiskering as actions and conjugation as transport."""
    require_valid_track(t)
    c = t.cells
    auts = aut_groups(t)
    groups = {f: auts[f].group for f in c.morphism_ids}
    left = {}
    right = {}
    for f in c.morphism_ids:
        for x in c.out_of(c.tgt(f)):
            left[(x, f)] = _map_from_function(auts[f], auts[c.table[(x, f)]], lambda a, x=x: t.lwhisk[(x, a)])
        for y in c.into(c.src(f)):
            right[(f, y)] = _map_from_function(auts[f], auts[c.table[(f, y)]], lambda a, y=y: t.rwhisk[(a, y)])
    nabla = {}
    for xi, (f, g) in t.tracks.items():
        inv = t.inverse[xi]
        nabla[xi] = _map_from_function(auts[f], auts[g], lambda a, xi=xi, inv=inv: t.vcomp[(xi, t.vcomp[(a, inv)])])
    d = require_valid_system(NaturalSystem(c, groups, left, right))
    return TNaturalSystem(t, d, nabla)


@dataclass(frozen=True, eq=False)
class Descent:
    """E on the homotopy category with Delta_f: D_f -> E_{q f}, plus the choices made."""

    system: NaturalSystem
    ho: FinCat
    q: FunctorData
    delta: Mapping[str, AbHom]
    rep_of: Mapping[str, str]           # class -> chosen 1-cell u(a)
    to_rep: Mapping[str, str]           # 1-cell f -> chosen track f => u(q f)


def descend_inert(t: TrackCat, dn: TNaturalSystem, rng: random.Random | None = None) -> Descent:
    """E_a = D_{u(a)} with c.e = nabla_{delta(u(c)u(a))}(u(c).e); Delta_f = nabla_{delta(f)}.

    Without ``rng`` the least representative and the least track are chosen.
    """
    bad = _inertness_failures(dn)
    if bad:
        raise ValidationError(f"T-natural system is not inert: transport along {bad[0]} is not the identity",
                              {"track": bad[0]})
    d = dn.system
    c = t.cells
    ho, q = homotopy_category(t)
    members: dict[str, list[str]] = {}
    for m in c.morphism_ids:
        members.setdefault(q.mor_map[m], []).append(m)
    u = {}
    for a, ms in members.items():
        ms = sorted(ms)
        u[a] = rng.choice(ms) if rng is not None else ms[0]
    for x in ho.objects:
        u[ho.identities[x]] = c.identities[x] if rng is None else u[ho.identities[x]]
    delta_track = {}
    for m in c.morphism_ids:
        opts = t.between(m, u[q.mor_map[m]])
        delta_track[m] = rng.choice(opts) if rng is not None else opts[0]
    groups = {a: d.groups[u[a]] for a in ho.morphism_ids}
    left = {}
    right = {}
    for (g, f), gf in ho.table.items():
        comp = c.table[(u[g], u[f])]
        nab = dn.nabla[delta_track[comp]]
        left[(g, f)] = nab.compose_after(d.left[(u[g], u[f])])
        right[(g, f)] = nab.compose_after(d.right[(u[g], u[f])])
    e = require_valid_system(NaturalSystem(ho, groups, left, right))
    delta = {m: AbHom(d.groups[m], groups[q.mor_map[m]], dn.nabla[delta_track[m]].matrix)
             for m in c.morphism_ids}
    rep = check_natural_iso(d, pullback_natural_system(q, e), delta)
    if not rep:
        raise ValidationError(f"descended system is not isomorphic to D: {rep.first_failure}")
    for xi, (f, g) in t.tracks.items():
        if not delta[g].compose_after(dn.nabla[xi]).equals(delta[f]):
            raise ValidationError(f"Delta does not absorb transport along {xi}")
    return Descent(e, ho, q, delta, u, delta_track)


def descent_isomorphism(t: TrackCat, dn: TNaturalSystem, a: Descent, b: Descent) -> dict[str, AbHom]:
    """theta_c = nabla along any track u_a(c) => u_b(c); verified natural."""
    theta = {}
    for m in a.ho.morphism_ids:
        x, y = a.rep_of[m], b.rep_of[m]
        xi = t.between(x, y)[0]
        theta[m] = AbHom(a.system.groups[m], b.system.groups[m], dn.nabla[xi].matrix)
    rep = check_natural_iso(a.system, b.system, theta)
    if not rep:
        raise ValidationError(f"descent outputs are not isomorphic: {rep.first_failure}")
    return theta


# ---------------------------------------------------------------------------
# Linear track extensions


@dataclass(frozen=True, eq=False)
class LinearTrackExtension:
    """D >-> T1 => T0 -> C with tau_f: D_{q f} -> Aut(f) (keyed by canonical coordinates)."""

    track: TrackCat
    base: FinCat
    q: FunctorData
    coeff: NaturalSystem
    tau: Mapping[str, Mapping[Coords, str]]
    phi: Cochain | None = field(default=None, compare=False)

    @cached_property
    def tau_inverse(self) -> dict[str, dict[str, Coords]]:
        return {f: {v: k for k, v in tab.items()} for f, tab in self.tau.items()}

    def tau_of(self, f: str, x: Sequence[int]) -> str:
        g = self.coeff.groups[self.q.mor_map[f]]
        return self.tau[f][g.normal_form(x)]

    def coords_of(self, loop: str) -> list[int]:
        """tau^-1 of a loop, as generator coordinates of D."""
        f = self.track.tracks[loop][0]
        g = self.coeff.groups[self.q.mor_map[f]]
        return g.from_normal(self.tau_inverse[f][loop])

    def validate(self) -> Report:
        return validate_track_extension(self)

    def to_json(self) -> dict:
        return {
            "track": self.track.to_json(),
            "base": self.base.to_json(),
            "q": self.q.to_json(),
            "coeff": self.coeff.to_json(),
            "tau": [{"cell": f, "element": [str(v) for v in k], "track": a}
                    for f, tab in sorted(self.tau.items()) for k, a in sorted(tab.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LinearTrackExtension":
        try:
            track = TrackCat.from_json(data["track"])
            base = FinCat.from_json(data["base"])
            q = FunctorData.from_json(track.cells, base, data["q"])
            coeff = NaturalSystem.from_json(data["coeff"], base)
            tau: dict[str, dict[Coords, str]] = {}
            for item in data["tau"]:
                tau.setdefault(str(item["cell"]), {})[tuple(int(str(v)) for v in item["element"])] = str(item["track"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed track extension: {exc!r}") from exc
        return cls(track, base, q, coeff, tau)


def validate_track_extension(e: LinearTrackExtension) -> Report:
    rep = Report("linear track extension")
    t = e.track
    rep.merge(validate_track_category(t), "track category: ")
    rep.merge(validate_category(e.base), "base: ")
    if not rep:
        return rep
    rep.merge(validate_functor(e.q), "q: ")
    rep.merge(e.coeff.validate(), "coefficients: ")
    if not rep:
        return rep
    if carrier_section(e.q) is None:
        return rep.fail("q is not full and the identity on objects")
    c = t.cells
    for x in c.objects:
        for y in c.objects:
            hs = c.hom(x, y)
            for f in hs:
                for g in hs:
                    same = e.q.mor_map[f] == e.q.mor_map[g]
                    if same != bool(t.between(f, g)):
                        return rep.fail(f"q({f}) = q({g}) must hold exactly when a track {f} => {g} exists")
    d = e.coeff
    for f in c.morphism_ids:
        g = d.groups[e.q.mor_map[f]]
        if not g.is_finite():
            return rep.fail(f"D_{e.q.mor_map[f]} is infinite")
        tab = e.tau.get(f, {})
        els = [g.normal_form(x) for x in g.elements()]
        if set(tab) != set(els) or set(tab.values()) != set(t.aut(f)) or len(set(tab.values())) != len(els):
            return rep.fail(f"tau_{f} is not a bijection D_{e.q.mor_map[f]} -> Aut({f})")
        zero = g.normal_form(g.zero())
        if tab[zero] != t.identity_tracks[f]:
            return rep.fail(f"tau_{f}(0) is not the identity track")
        for a in els:
            for b in els:
                s = g.normal_form([p + r for p, r in zip(g.from_normal(a), g.from_normal(b))])
                if t.vcomp[(tab[a], tab[b])] != tab[s]:
                    return rep.fail(f"tau_{f} is not additive at ({a}, {b})")
    for f in c.morphism_ids:
        qf = e.q.mor_map[f]
        g = d.groups[qf]
        for a in (g.normal_form(x) for x in g.elements()):
            av = g.from_normal(a)
            for x in c.out_of(c.tgt(f)):
                img = d.act_left(e.q.mor_map[x], qf, av)
                if t.lwhisk[(x, e.tau[f][a])] != e.tau_of(c.table[(x, f)], img):
                    return rep.fail(f"tau is not natural for left whiskering by {x} at {f}")
            for y in c.into(c.src(f)):
                img = d.act_right(qf, e.q.mor_map[y], av)
                if t.rwhisk[(e.tau[f][a], y)] != e.tau_of(c.table[(f, y)], img):
                    return rep.fail(f"tau is not natural for right whiskering by {y} at {f}")
    for xi, (f, g1) in t.tracks.items():
        if f == g1:
            continue
        inv = t.inverse[xi]
        for a, loop in e.tau[f].items():
            if t.vcomp[(xi, t.vcomp[(loop, inv)])] != e.tau[g1][a]:
                return rep.fail(f"tau is not compatible with transport along {xi}")
    return rep


def require_valid_extension(e: LinearTrackExtension) -> LinearTrackExtension:
    rep = validate_track_extension(e)
    if not rep:
        raise ValidationError(f"invalid track extension: {rep.first_failure}", {"failure": rep.first_failure})
    return e


def default_section(e: LinearTrackExtension) -> dict[str, str]:
    """Least 1-cell over each base morphism, identities over identities."""
    s = carrier_section(e.q)
    if s is None:
        raise InputError("q is not full and the identity on objects")
    return s


def reference_tracks(e: LinearTrackExtension, s: Mapping[str, str] | None = None) -> dict[str, str]:
    """rho_u: u => s(q u), the identity track on section cells and the least track otherwise."""
    s = s if s is not None else default_section(e)
    t = e.track
    out = {}
    for u in t.cells.morphism_ids:
        target = s[e.q.mor_map[u]]
        out[u] = t.identity_tracks[u] if u == target else t.between(u, target)[0]
    return out


def default_track_section(e: LinearTrackExtension, s: Mapping[str, str]) -> dict[tuple[str, str], str]:
    """s_{f,g}: s_f s_g => s_{fg}, the reference track of the composite."""
    t = e.track
    b = e.base
    cells = t.cells
    out = {}
    for (f, g), fg in b.table.items():
        top = cells.table[(s[f], s[g])]
        out[(f, g)] = t.identity_tracks[top] if top == s[fg] else t.between(top, s[fg])[0]
    return out


def characteristic_cocycle(e: LinearTrackExtension, s: Mapping[str, str] | None = None,
                           s2: Mapping[tuple[str, str], str] | None = None) -> Cochain:
    """t(f,g,h) = tau^-1(s_{f,gh} + s_f.s_{g,h} - s_{f,g}.s_h - s_{fg,h}), read in Aut(s_{fgh})."""
    s = dict(s) if s is not None else default_section(e)
    s2 = dict(s2) if s2 is not None else default_track_section(e, s)
    t = e.track
    b = e.base
    cells = t.cells
    for (f, g), tr in s2.items():
        if t.tracks.get(tr) != (cells.table[(s[f], s[g])], s[b.table[(f, g)]]):
            raise InputError(f"s_({f},{g}) is not a track s_f s_g => s_fg")
    vals = {}
    for f, g, h in b.composable_tuples(3):
        fg, gh = b.table[(f, g)], b.table[(g, h)]
        a = s2[(f, gh)]
        bb = t.lwhisk[(s[f], s2[(g, h)])]
        cc = t.rwhisk[(s2[(f, g)], s[h])]
        dd = s2[(fg, h)]
        loop = t.vcomp[(a, t.vcomp[(bb, t.vcomp[(t.inverse[cc], t.inverse[dd])])])]
        vals[(f, g, h)] = tuple(e.coords_of(loop))
    return Cochain(b, e.coeff, 3, vals)


def relative_cochain(e: LinearTrackExtension, s: Mapping[str, str] | None = None) -> Cochain:
    """phi(w,u) = tau_{wu}^-1(-rho_{wu} + s_{qw,qu} + rho_w * rho_u) on the 1-cells, with s_{a,b} = rho_{s_a s_b}."""
    s = dict(s) if s is not None else default_section(e)
    t = e.track
    cells = t.cells
    rho = reference_tracks(e, s)
    dk = pullback_natural_system(e.q, e.coeff)
    vals = {}
    for w, u in cells.composable_tuples(2):
        wu = cells.table[(w, u)]
        star = t.hcomp(rho[w], rho[u])
        mid = cells.table[(s[e.q.mor_map[w]], s[e.q.mor_map[u]])]
        path = t.vcomp[(rho[mid], star)]
        loop = t.vcomp[(t.inverse[rho[wu]], path)]
        vals[(w, u)] = tuple(e.coords_of(loop))
    return Cochain(cells, dk, 2, vals)


def relative_class(e: LinearTrackExtension) -> tuple[int, ...]:
    rel = RelativeComplex(e.q, e.coeff)
    return rel.cohomology(3).classify(relative_cochain(e))


def extension_class(e: LinearTrackExtension) -> tuple[int, ...]:
    return cohomology(e.base, e.coeff, 3).classify(characteristic_cocycle(e))


# ---------------------------------------------------------------------------
# Realization


def track_label(u: str, v: str, coords: Sequence[int]) -> str:
    return f"{u}=>{v}@{','.join(str(c) for c in coords)}"


def _finite_elements(d: NaturalSystem) -> dict[str, list[Coords]]:
    out = {}
    for f, g in d.groups.items():
        if not g.is_finite():
            raise UnsupportedInputError(f"D_{f} is infinite; tracks cannot be materialized")
        out[f] = [g.normal_form(x) for x in g.elements()]
    return out


def build_from_cochain(c: FinCat, d: NaturalSystem, p: FunctorData, phi: Cochain) -> LinearTrackExtension:
    """Tracks u => v are the elements of D_{p u}; whiskers are twisted by phi.

    a.w := a p(w) + phi(u, w) - phi(u', w) and w.a := p(w) a + phi(w, u) - phi(w, u')
    for a: u => u'.  phi must be normalized with d phi pulled back from C.
    """
    k = p.source
    els = _finite_elements(d)
    groups = d.groups
    fibres: dict[tuple[str, str, str], list[str]] = {}
    for m in k.morphism_ids:
        fibres.setdefault((k.src(m), k.tgt(m), p.mor_map[m]), []).append(m)
    tracks = {}
    ident = {}
    vc = {}
    inv = {}
    tau: dict[str, dict[Coords, str]] = {}
    for (_x, _y, f), ms in fibres.items():
        g = groups[f]
        elements = els[f]
        for u in ms:
            tau[u] = {}
            for v in ms:
                for a in elements:
                    tracks[track_label(u, v, a)] = (u, v)
            ident[u] = track_label(u, u, g.normal_form(g.zero()))
            for a in elements:
                tau[u][a] = track_label(u, u, a)
        for u in ms:
            for v in ms:
                for a in elements:
                    av = g.from_normal(a)
                    inv[track_label(u, v, a)] = track_label(v, u, g.normal_form([-x for x in av]))
                    for w in ms:
                        for b in elements:
                            s = g.normal_form([x + y for x, y in zip(av, g.from_normal(b))])
                            vc[(track_label(v, w, b), track_label(u, v, a))] = track_label(u, w, s)
    lw = {}
    rw = {}
    pv = phi.values
    for a_name, (u, u1) in tracks.items():
        f = p.mor_map[u]
        g = groups[f]
        coords = g.from_normal(_coords_from_label(a_name))
        for w in k.out_of(k.tgt(u)):
            pw = p.mor_map[w]
            wf = d.base.table[(pw, f)]
            gg = groups[wf]
            val = d.act_left(pw, f, coords)
            val = [x + y - z for x, y, z in zip(val, pv[(w, u)], pv[(w, u1)])]
            lw[(w, a_name)] = track_label(k.table[(w, u)], k.table[(w, u1)], gg.normal_form(val))
        for w in k.into(k.src(u)):
            pw = p.mor_map[w]
            fw = d.base.table[(f, pw)]
            gg = groups[fw]
            val = d.act_right(f, pw, coords)
            val = [x + y - z for x, y, z in zip(val, pv[(u, w)], pv[(u1, w)])]
            rw[(a_name, w)] = track_label(k.table[(u, w)], k.table[(u1, w)], gg.normal_form(val))
    t = TrackCat(k, tracks, ident, vc, inv, lw, rw)
    return LinearTrackExtension(t, c, p, d, tau, phi)


def _coords_from_label(name: str) -> Coords:
    tail = name.rsplit("@", 1)[1]
    return tuple(int(v) for v in tail.split(",")) if tail else ()


def _solve_twist(c: FinCat, d: NaturalSystem, tn: Cochain, p: FunctorData) -> Cochain | None:
    dk = pullback_natural_system(p, d)
    if tn.is_zero():
        return CochainComplex(dk).zero(2)
    eta = solve_coboundary(CochainComplex(d), tn, normalized=True)
    if eta is not None:
        return pullback_cochain(p, eta, dk)
    phi = invert_connecting(p, d, tn, normalized=True)
    if phi is not None:
        return phi
    phi = invert_connecting(p, d, tn, normalized=False)
    if phi is None:
        return None
    psi = normalizing_cochain(phi)
    if psi is None:
        return None
    return (phi - CochainComplex(dk).coboundary(psi)).reduced()


def realize_class(c: FinCat, d: NaturalSystem, t: Cochain, p: FunctorData,
                  validate: bool = True) -> LinearTrackExtension:
    """A linear track extension over the carrier p: K -> C whose class is [t]."""
    if carrier_section(p) is None:
        raise InputError("carrier must be full and the identity on objects")
    if t.degree != 3:
        raise InputError("realization needs a 3-cocycle")
    cx = CochainComplex(d)
    if not cx.coboundary(t).is_zero():
        raise InputError("t is not a cocycle")
    _finite_elements(d)
    tn = t if t.is_normalized() else normalize(t)[0]
    phi = _solve_twist(c, d, tn, p)
    if phi is None:
        dk = pullback_natural_system(p, d)
        residual = cohomology(p.source, dk, 3).classify(pullback_cochain(p, tn, dk))
        raise ObstructionError("the class does not vanish on the carrier: no twisting cochain exists",
                               {"residual_class": list(residual)})
    e = build_from_cochain(c, d, p, phi)
    if validate:
        require_valid_extension(e)
    return e


def split_extension(c: FinCat, d: NaturalSystem, p: FunctorData | None = None) -> LinearTrackExtension:
    from .fincat import identity_functor
    p = p if p is not None else identity_functor(c)
    return realize_class(c, d, CochainComplex(d).zero(3), p)


# ---------------------------------------------------------------------------
# Pullback along a functor and restriction of the carrier


def pullback_track_extension(e: LinearTrackExtension, f: FunctorData) -> LinearTrackExtension:
    """1-cells (x, a) with q x = f a; tracks (x, a) => (y, a) are the tracks x => y."""
    t = e.track
    c2 = f.source
    cells = t.cells
    fib: dict[str, list[str]] = {}
    for x in cells.morphism_ids:
        fib.setdefault(e.q.mor_map[x], []).append(x)

    def cell(x: str, a: str) -> str:
        return f"{x}@{a}"

    def tr(xi: str, a: str) -> str:
        return f"{xi}@{a}"

    mors = []
    over = {}
    for a in c2.morphism_ids:
        for x in fib[f.mor_map[a]]:
            mors.append((cell(x, a), c2.src(a), c2.tgt(a)))
            over[cell(x, a)] = (x, a)
    ids = {X: cell(cells.identities[f.obj_map[X]], c2.identities[X]) for X in c2.objects}
    comp = []
    for (b, a), ba in c2.table.items():
        for y in fib[f.mor_map[b]]:
            for x in fib[f.mor_map[a]]:
                comp.append((cell(y, b), cell(x, a), cell(cells.table[(y, x)], ba)))
    new_cells = FinCat.build(c2.objects, mors, ids, comp)
    tracks = {}
    for a in c2.morphism_ids:
        for x in fib[f.mor_map[a]]:
            for y in fib[f.mor_map[a]]:
                for xi in t.between(x, y):
                    tracks[tr(xi, a)] = (cell(x, a), cell(y, a))
    ident = {m: tr(t.identity_tracks[over[m][0]], over[m][1]) for m in new_cells.morphism_ids}
    inv = {n: tr(t.inverse[n.rsplit("@", 1)[0]], n.rsplit("@", 1)[1]) for n in tracks}
    track_of = {n: (n.rsplit("@", 1)[0], n.rsplit("@", 1)[1]) for n in tracks}
    by_a: dict[str, list[str]] = {}
    for n, (xi, a) in track_of.items():
        by_a.setdefault(a, []).append(n)
    vc = {}
    for a, ns in by_a.items():
        for n1 in ns:
            for n2 in ns:
                xi1, xi2 = track_of[n1][0], track_of[n2][0]
                v = t.vcomp.get((xi1, xi2))
                if v is not None:
                    vc[(n1, n2)] = tr(v, a)
    lw = {}
    rw = {}
    for n, (xi, a) in track_of.items():
        for m in new_cells.out_of(c2.tgt(a)):
            z, g = over[m]
            lw[(m, n)] = tr(t.lwhisk[(z, xi)], c2.table[(g, a)])
        for m in new_cells.into(c2.src(a)):
            z, g = over[m]
            rw[(n, m)] = tr(t.rwhisk[(xi, z)], c2.table[(a, g)])
    tt = TrackCat(new_cells, tracks, ident, vc, inv, lw, rw)
    q2 = FunctorData(new_cells, c2, {X: X for X in c2.objects}, {m: over[m][1] for m in new_cells.morphism_ids})
    d2 = pullback_natural_system(f, e.coeff)
    tau = {m: {k: tr(v, over[m][1]) for k, v in e.tau[over[m][0]].items()} for m in new_cells.morphism_ids}
    return LinearTrackExtension(tt, c2, q2, d2, tau)


def restrict_carrier(e: LinearTrackExtension, g: FunctorData) -> tuple[LinearTrackExtension, "LaxFunctorData"]:
    """f^!(T): 1-cells from E, tracks u => v the tracks g(u) => g(v); with the canonical morphism to T."""
    t = e.track
    E = g.source
    if g.target.morphism_ids != t.cells.morphism_ids:
        raise InputError("restriction functor must land in the 1-cells of the extension")
    if set(E.objects) != set(t.cells.objects) or any(g.obj_map[x] != x for x in E.objects):
        raise InputError("restriction functor must be the identity on objects")
    rep = validate_functor(g)
    if not rep:
        raise InputError(f"restriction data is not a functor: {rep.first_failure}")
    qg = e.q.compose_after(g)
    if carrier_section(qg) is None:
        raise InputError("q o f is not full")

    def tr(xi: str, u: str, v: str) -> str:
        return f"{xi}[{u}|{v}]"

    tracks = {}
    origin = {}
    for X in E.objects:
        for Y in E.objects:
            hs = E.hom(X, Y)
            for u in hs:
                for v in hs:
                    for xi in t.between(g.mor_map[u], g.mor_map[v]):
                        n = tr(xi, u, v)
                        if n in tracks:
                            raise InputError(f"track name {n} is ambiguous; rename the 1-cells")
                        tracks[n] = (u, v)
                        origin[n] = xi
    ident = {u: tr(t.identity_tracks[g.mor_map[u]], u, u) for u in E.morphism_ids}
    inv = {n: tr(t.inverse[origin[n]], v, u) for n, (u, v) in tracks.items()}
    vc = {}
    for n1, (v, w) in tracks.items():
        for u in E.hom(E.src(v), E.tgt(v)):
            for xi in t.between(g.mor_map[u], g.mor_map[v]):
                n2 = tr(xi, u, v)
                vc[(n1, n2)] = tr(t.vcomp[(origin[n1], xi)], u, w)
    lw = {}
    rw = {}
    for n, (u, v) in tracks.items():
        for x in E.out_of(E.tgt(u)):
            lw[(x, n)] = tr(t.lwhisk[(g.mor_map[x], origin[n])], E.table[(x, u)], E.table[(x, v)])
        for y in E.into(E.src(u)):
            rw[(n, y)] = tr(t.rwhisk[(origin[n], g.mor_map[y])], E.table[(u, y)], E.table[(v, y)])
    tt = TrackCat(E, tracks, ident, vc, inv, lw, rw)
    tau = {u: {k: tr(a, u, u) for k, a in e.tau[g.mor_map[u]].items()} for u in E.morphism_ids}
    out = LinearTrackExtension(tt, e.base, qg, e.coeff, tau)
    units = {X: t.identity_tracks[t.cells.identities[X]] for X in E.objects}
    compositors = {(a, b): t.identity_tracks[g.mor_map[E.table[(a, b)]]] for (a, b) in E.table}
    mor = LaxFunctorData(tt, t, {X: X for X in E.objects}, dict(g.mor_map), dict(origin), units, compositors)
    rep = check_weak_equivalence(mor)
    if not rep:
        raise ValidationError(f"canonical morphism is not a weak equivalence: {rep.first_failure}")
    return out, mor


# ---------------------------------------------------------------------------
# Lax functors


@dataclass(frozen=True, eq=False)
class LaxFunctorData:
    """Object and 1-cell maps, a track map, units o_X: 1_{FX} => F(1_X) and a_{f,g}: Ff.Fg => F(fg)."""

    source: TrackCat
    target: TrackCat
    obj_map: Mapping[str, str]
    cell_map: Mapping[str, str]
    track_map: Mapping[str, str]
    units: Mapping[str, str]
    compositors: Mapping[tuple[str, str], str]

    def is_strict(self) -> bool:
        t2 = self.target
        return all(t2.identity_tracks.get(t2.tracks[a][0]) == a for a in self.units.values()) and \
            all(t2.identity_tracks.get(t2.tracks[a][0]) == a for a in self.compositors.values())


def validate_lax_functor(F: LaxFunctorData) -> Report:
    rep = Report("lax functor")
    s, t = F.source, F.target
    c, d = s.cells, t.cells
    for m in c.morphism_ids:
        fm = F.cell_map.get(m)
        if fm not in d.morphisms or d.morphisms[fm] != (F.obj_map[c.src(m)], F.obj_map[c.tgt(m)]):
            return rep.fail(f"1-cell {m} is not mapped to a 1-cell with the right endpoints")
    for a, (f, g) in s.tracks.items():
        fa = F.track_map.get(a)
        if fa not in t.tracks or t.tracks[fa] != (F.cell_map[f], F.cell_map[g]):
            return rep.fail(f"track {a} is not mapped to a track {F.cell_map.get(f)} => {F.cell_map.get(g)}")
    for f in c.morphism_ids:
        if F.track_map[s.identity_tracks[f]] != t.identity_tracks[F.cell_map[f]]:
            return rep.fail(f"hom-functor does not preserve the identity track of {f}")
    for (b, a), ba in s.vcomp.items():
        if F.track_map[ba] != t.vcomp[(F.track_map[b], F.track_map[a])]:
            return rep.fail(f"hom-functor does not preserve {b} o {a}")
    for X in c.objects:
        o = F.units.get(X)
        fx = F.obj_map[X]
        if o not in t.tracks or t.tracks[o] != (d.identities[fx], F.cell_map[c.identities[X]]):
            return rep.fail(f"unit o_{X} is missing or mistyped")
    for (f, g), fg in c.table.items():
        a = F.compositors.get((f, g))
        if a not in t.tracks or t.tracks[a] != (d.table[(F.cell_map[f], F.cell_map[g])], F.cell_map[fg]):
            return rep.fail(f"compositor a_({f},{g}) is missing or mistyped")
    # naturality: a_{f1,g1} o (F alpha * F beta) = F(alpha * beta) o a_{f,g}
    for alpha, (f, f1) in s.tracks.items():
        B = c.src(f)
        for beta, (g, g1) in s.tracks.items():
            if c.tgt(g) != B:
                continue
            lhs = t.vcomp[(F.compositors[(f1, g1)], t.hcomp(F.track_map[alpha], F.track_map[beta]))]
            rhs = t.vcomp[(F.track_map[s.hcomp(alpha, beta)], F.compositors[(f, g)])]
            if lhs != rhs:
                return rep.fail(f"compositor is not natural at ({alpha}, {beta})")
    # unit triangles
    for f in c.morphism_ids:
        X, Y = c.src(f), c.tgt(f)
        ff = F.cell_map[f]
        zero = t.identity_tracks[ff]
        left = t.vcomp[(F.compositors[(c.identities[Y], f)], t.rwhisk[(F.units[Y], ff)])]
        if left != zero:
            return rep.fail(f"left unit triangle fails at {f}")
        right = t.vcomp[(F.compositors[(f, c.identities[X])], t.lwhisk[(ff, F.units[X])])]
        if right != zero:
            return rep.fail(f"right unit triangle fails at {f}")
    # associativity
    for f, g, h in c.composable_tuples(3):
        fg, gh = c.table[(f, g)], c.table[(g, h)]
        lhs = t.vcomp[(F.compositors[(f, gh)], t.lwhisk[(F.cell_map[f], F.compositors[(g, h)])])]
        rhs = t.vcomp[(F.compositors[(fg, h)], t.rwhisk[(F.compositors[(f, g)], F.cell_map[h])])]
        if lhs != rhs:
            return rep.fail(f"associativity coherence fails at ({f}, {g}, {h})")
    return rep


def identity_lax_functor(t: TrackCat) -> LaxFunctorData:
    c = t.cells
    return LaxFunctorData(t, t, {x: x for x in c.objects}, {m: m for m in c.morphism_ids},
                          {a: a for a in t.tracks}, {x: t.identity_tracks[c.identities[x]] for x in c.objects},
                          {(f, g): t.identity_tracks[fg] for (f, g), fg in c.table.items()})


def check_weak_equivalence(F: LaxFunctorData) -> Report:
    """Bijective on every Aut group and on the hom-sets of the homotopy categories."""
    rep = Report("weak equivalence")
    s, t = F.source, F.target
    for f in s.cells.morphism_ids:
        img = {F.track_map[a] for a in s.aut(f)}
        if len(img) != len(s.aut(f)) or img != set(t.aut(F.cell_map[f])):
            return rep.fail(f"Aut({f}) -> Aut(F {f}) is not bijective")
    ho_s, q_s = homotopy_category(s)
    ho_t, q_t = homotopy_category(t)
    for X in ho_s.objects:
        for Y in ho_s.objects:
            img = {q_t.mor_map[F.cell_map[m]] for m in ho_s.hom(X, Y)}
            if len(img) != len(ho_s.hom(X, Y)) or img != set(ho_t.hom(F.obj_map[X], F.obj_map[Y])):
                return rep.fail(f"homotopy classes {X} -> {Y} are not mapped bijectively")
    return rep


def check_lax_class_preservation(F: LaxFunctorData, e: LinearTrackExtension, e2: LinearTrackExtension,
                                 s: Mapping[str, str] | None = None,
                                 s2: Mapping[tuple[str, str], str] | None = None) -> Report:
    """With s'_f = F s_f and s'_{f,g} = F(s_{f,g}) o a_{s_f,s_g}, the cocycle t' equals t exactly."""
    rep = Report("lax class preservation")
    if F.source is not e.track or F.target is not e2.track:
        raise InputError("lax functor must go between the two extensions' track categories")
    for m in e.track.cells.morphism_ids:
        if e2.q.mor_map[F.cell_map[m]] != e.q.mor_map[m]:
            raise ValidationError(f"F does not cover the identity of the base at {m}")
        for k, loop in e.tau[m].items():
            if F.track_map[loop] != e2.tau[F.cell_map[m]][k]:
                raise ValidationError(f"compatibility triangle tau' F = tau fails at {m}", {"one_cell": m})
    s = dict(s) if s is not None else default_section(e)
    s2 = dict(s2) if s2 is not None else default_track_section(e, s)
    t1 = characteristic_cocycle(e, s, s2)
    sp = {f: F.cell_map[x] for f, x in s.items()}
    s2p = {(f, g): e2.track.vcomp[(F.track_map[a], F.compositors[(s[f], s[g])])] for (f, g), a in s2.items()}
    t2 = characteristic_cocycle(e2, sp, s2p)
    if not t1.equals(t2):
        bad = next(k for k in t1.values if not t1.group_at(k).equal(t1.values[k], t2.values[k]))
        return rep.fail(f"transported cocycle differs at {bad}")
    rep.details["cocycle_equal"] = True
    return rep


# ---------------------------------------------------------------------------
# Comparing extensions on one carrier


def _kappa(e: LinearTrackExtension, rho: Mapping[str, str], a: str) -> list[int]:
    t = e.track
    u, v = t.tracks[a]
    return e.coords_of(t.vcomp[(rho[v], t.vcomp[(a, t.inverse[rho[u]])])])


def _kappa_inverse(e: LinearTrackExtension, rho: Mapping[str, str], s: Mapping[str, str], u: str, v: str,
                   x: Sequence[int]) -> str:
    t = e.track
    loop = e.tau_of(s[e.q.mor_map[u]], x)
    return t.vcomp[(t.inverse[rho[v]], t.vcomp[(loop, rho[u])])]


def _solve_shift(e: LinearTrackExtension, delta: Cochain) -> Cochain | None:
    """psi in C^1(K; q*D) with d psi + q* beta = delta for some beta in C^2(C; D)."""
    rel = RelativeComplex(e.q, e.coeff)
    up = rel.upper
    m1 = up.matrix(1)
    pm = rel.pullback_matrix(2)
    n1 = up.dimension(1)
    rows = [list(r1) + list(r2) for r1, r2 in zip(m1, pm)] if m1 else [list(r) for r in pm]
    rhs = up.to_vector(delta)
    if not rows:
        return up.zero(1)
    width = len(rows[0])
    prime = up.elementary_prime
    if prime is not None:
        x = kernels.solve_mod_p(np.array(rows, dtype=np.int64), np.array(rhs, dtype=np.int64), prime)
        if x is None:
            return None
        return up.from_vector(1, [int(v) for v in x[:n1]])
    grp = up.group(2)
    full = [row + [rel_[i] for rel_ in grp.relations] for i, row in enumerate(rows)]
    w2 = width + len(grp.relations)
    res = _snf(full, len(full), w2, want_u=True, want_v=True)
    sol = _solve_from(res, len(full), w2, rhs)
    if sol is None:
        return None
    return up.from_vector(1, sol[:n1])


def connect_same_class(e: LinearTrackExtension, e2: LinearTrackExtension) -> LaxFunctorData | None:
    """An isomorphism e -> e2, identity on 1-cells and an affine shift on tracks, or None.

    With phi, phi2 the relative cochains, one solves phi2 - phi = d psi + q* beta;
    a track a: u => v goes to kappa2^-1(kappa(a) - psi(u) + psi(v)).
    """
    t1, t2 = e.track, e2.track
    if t1.cells.morphism_ids != t2.cells.morphism_ids or t1.cells.table != t2.cells.table:
        raise InputError("extensions must share their 1-cells")
    if e.q.mor_map != e2.q.mor_map or not systems_equal(e.coeff, e2.coeff):
        raise InputError("extensions must share the carrier and the coefficients")
    s = default_section(e)
    phi1 = relative_cochain(e, s)
    phi2 = relative_cochain(e2, s)
    psi = _solve_shift(e, (phi2 - phi1).reduced())
    if psi is None:
        return None
    rho1 = reference_tracks(e, s)
    rho2 = reference_tracks(e2, s)
    cells = t1.cells
    tmap = {}
    for a, (u, v) in t1.tracks.items():
        x = [k - m + n for k, m, n in zip(_kappa(e, rho1, a), _psi_at(psi, u), _psi_at(psi, v))]
        tmap[a] = _kappa_inverse(e2, rho2, s, u, v, x)
    F = LaxFunctorData(t1, t2, {x: x for x in cells.objects}, {m: m for m in cells.morphism_ids}, tmap,
                       {x: t2.identity_tracks[cells.identities[x]] for x in cells.objects},
                       {(f, g): t2.identity_tracks[fg] for (f, g), fg in cells.table.items()})
    rep = validate_lax_functor(F)
    if not rep:
        raise ValidationError(f"constructed isomorphism fails coherence: {rep.first_failure}")
    if len(set(tmap.values())) != len(tmap) or set(tmap.values()) != set(t2.tracks):
        raise ValidationError("constructed track map is not bijective")
    for m in cells.morphism_ids:
        for k, loop in e.tau[m].items():
            if tmap[loop] != e2.tau[m][k]:
                raise ValidationError(f"constructed isomorphism does not respect tau at {m}")
    return F


def _psi_at(psi: Cochain, u: str) -> tuple[int, ...]:
    """psi is a 1-cochain on the 1-cells: a value in D_{q u} for every 1-cell u."""
    return psi.values[(u,)]


# ---------------------------------------------------------------------------
# Track theories


@dataclass(frozen=True)
class _Lifts:
    p1: str
    p2: str



def _projection_lifts(e: LinearTrackExtension, theory, lifts) -> dict:
    s = default_section(e)
    out = {}
    for w in theory.product_witnesses:
        if lifts is not None:
            match = [v for v in lifts.product_witnesses
                     if (v.left, v.right, v.product) == (w.left, w.right, w.product)]
            if not match:
                raise InputError(f"carrier has no product witness over {w.product}")
            v = match[0]
            if e.q.mor_map.get(v.p1) != w.p1 or e.q.mor_map.get(v.p2) != w.p2:
                raise InputError(f"carrier witness {v.product} does not lie over the base witness")
            out[w] = _Lifts(v.p1, v.p2)
        else:
            out[w] = _Lifts(s[w.p1], s[w.p2])
    return out


def track_theory_report(e: LinearTrackExtension, theory, lifts=None) -> tuple[Report, Report]:
    """(strong, lax) reports for the comparison functors of every witness and test object.

    ``lifts`` is a TruncatedTheory on the 1-cells whose witnesses lie over
    those of ``theory``; without it the projections are lifted by the least
    1-cell in each fibre.
    """
    strong = Report("strong track theory")
    lax = Report("lax products")
    t = e.track
    c = t.cells
    ho, q = homotopy_category(t)
    if theory.terminal is not None:
        T = theory.terminal
        for Z in c.objects:
            hs = c.hom(Z, T)
            if len(hs) != 1 or len(t.aut(hs[0])) != 1:
                if strong:
                    strong.fail(f"terminal witness {T}: [[{Z}, {T}]] is not the one-point groupoid")
            if not hs or any(len(t.between(a, b)) != 1 for a in hs for b in hs):
                if lax:
                    lax.fail(f"terminal witness {T}: [[{Z}, {T}]] is not contractible")
    pl = _projection_lifts(e, theory, lifts)
    for w in theory.product_witnesses:
        P1, P2 = pl[w].p1, pl[w].p2
        for Z in c.objects:
            H = c.hom(Z, w.product)
            A = c.hom(Z, w.left)
            B = c.hom(Z, w.right)
            objs = {h: (c.table[(P1, h)], c.table[(P2, h)]) for h in H}
            if len(set(objs.values())) != len(H) or len(H) != len(A) * len(B):
                if strong:
                    strong.fail(f"product witness {w.product}: comparison not bijective on 1-cells from {Z}")
            classes = {(q.mor_map[a], q.mor_map[b]) for a, b in objs.values()}
            want = {(q.mor_map[a], q.mor_map[b]) for a in A for b in B}
            if classes != want and lax:
                lax.fail(f"product witness {w.product}: comparison not essentially surjective from {Z}")
            for h in H:
                for h2 in H:
                    src = t.between(h, h2)
                    a1, b1 = objs[h]
                    a2, b2 = objs[h2]
                    img = {(t.lwhisk[(P1, xi)], t.lwhisk[(P2, xi)]) for xi in src}
                    n = len(t.between(a1, a2)) * len(t.between(b1, b2))
                    if len(img) != len(src) or len(src) != n:
                        msg = f"product witness {w.product}: comparison not bijective on tracks {h} => {h2}"
                        if strong:
                            strong.fail(msg)
                        if lax:
                            lax.fail(msg)
                        break
    return strong, lax


def is_strong_track_theory(e: LinearTrackExtension, theory, lifts=None) -> Report:
    """Strong: comparisons are isomorphisms of groupoids; details carry the lax-product verdict."""
    strong, lax = track_theory_report(e, theory, lifts)
    strong.details["strong"] = strong.ok
    strong.details["lax"] = lax.ok
    if not lax.ok:
        strong.details["lax_failure"] = lax.first_failure
    return strong


def as_track_extension(t: TrackCat, rng: random.Random | None = None) -> tuple[LinearTrackExtension, Descent]:
    """Package an abelian track category as a linear track extension of its homotopy category by the descended Aut."""
    dn = aut_tnatural_system(t)
    desc = descend_inert(t, dn, rng)
    auts = aut_groups(t)
    tau: dict[str, dict[Coords, str]] = {}
    for f in t.cells.morphism_ids:
        inv = desc.delta[f].inverse()
        g = desc.system.groups[desc.q.mor_map[f]]
        tab = {}
        for x in g.elements():
            tab[g.normal_form(x)] = auts[f].track_of(inv.apply(x))
        tau[f] = tab
    e = LinearTrackExtension(t, desc.ho, desc.q, desc.system, tau)
    return require_valid_extension(e), desc


def strengthen(t: TrackCat, theory, carrier: FunctorData, carrier_theory=None) -> LinearTrackExtension:
    """descend, read off the characteristic cocycle, realize over the carrier, check strongness.

    ``theory`` is the TruncatedTheory structure of the homotopy category (or
    None for a non-theory base, which skips the strongness check);
    ``carrier_theory`` gives the product witnesses upstairs.
    """
    e, _desc = as_track_extension(t)
    ho = e.base
    if theory is not None:
        tc = theory.cat
        if tc.morphism_ids != ho.morphism_ids or tc.table != ho.table or tc.morphisms != ho.morphisms:
            raise InputError("the homotopy category does not match the given theory")
    if carrier.target.morphism_ids != ho.morphism_ids:
        raise InputError("carrier must land in the homotopy category")
    if carrier_section(carrier) is None:
        raise InputError("carrier must be full and the identity on objects")
    cls = characteristic_cocycle(e)
    p = FunctorData(carrier.source, ho, dict(carrier.obj_map), dict(carrier.mor_map))
    try:
        out = realize_class(ho, e.coeff, cls, p)
    except ObstructionError as exc:
        raise ObstructionError("the class does not vanish on this carrier; supply a freer carrier",
                               exc.payload) from exc
    t_out = characteristic_cocycle(out)
    diff = (t_out - cls).reduced()
    if not diff.is_zero() and solve_coboundary(CochainComplex(e.coeff), diff) is None:
        raise ValidationError("strengthened extension has a different class")
    if theory is not None:
        rep = is_strong_track_theory(out, theory, carrier_theory)
        if not rep:
            raise ValidationError(f"strengthened extension is not strong: {rep.first_failure}", rep.to_json())
    return out


__all__ = [
    "TrackCat", "discrete_track_category", "codiscrete_track_category", "validate_track_category",
    "require_valid_track", "homotopy_category", "TNaturalSystem", "validate_tnatural_system", "aut_groups",
    "aut_tnatural_system", "Descent", "descend_inert", "descent_isomorphism", "LinearTrackExtension",
    "validate_track_extension", "require_valid_extension", "default_section", "reference_tracks",
    "default_track_section", "characteristic_cocycle", "relative_cochain", "relative_class",
    "extension_class", "track_label", "build_from_cochain", "realize_class", "split_extension",
    "pullback_track_extension", "restrict_carrier", "LaxFunctorData", "validate_lax_functor",
    "identity_lax_functor", "check_weak_equivalence", "check_lax_class_preservation", "connect_same_class",
    "track_theory_report", "is_strong_track_theory", "as_track_extension", "strengthen",
]
