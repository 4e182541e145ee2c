from __future__ import annotations

import random
from dataclasses import replace

import pytest

from bwengine import trackcat as tc
from bwengine.bwcoh import CochainComplex, cohomology, pullback_cochain
from bwengine.errors import InputError, ObstructionError
from bwengine.fincat import FunctorData, identity_functor, marked_category
from bwengine.natsys import pullback_natural_system
from bwengine.samples import commutative_square, cyclic_quotient, random_category


@pytest.fixture(scope="module")
def realized(z2):
    c, d, p = z2
    h = cohomology(c, d, 3)
    return {coords: tc.realize_class(c, d, h.representative(coords), p) for coords in h.elements()}


@pytest.mark.parametrize("seed", range(4))
def test_discrete_and_codiscrete_validate(seed):
    c = random_category(random.Random(seed), max_objects=3, max_morphisms=8)
    disc = tc.discrete_track_category(c)
    assert tc.validate_track_category(disc)
    ho, q = tc.homotopy_category(disc)
    assert ho.table == c.table
    assert all(g.invariant_factors == () for g in (a.group for a in tc.aut_groups(disc).values()))
    codisc = tc.codiscrete_track_category(c)
    assert tc.validate_track_category(codisc)
    ho, q = tc.homotopy_category(codisc)
    nonempty = sum(1 for x in c.objects for y in c.objects if c.hom(x, y))
    assert len(ho.morphisms) == nonempty


def _corrupt(t: tc.TrackCat, field: str) -> tc.TrackCat:
    table = dict(getattr(t, field))
    keys = sorted(table)
    values = sorted(set(table.values()))
    for k in keys:
        for v in values:
            if v != table[k] and t.tracks[v] == t.tracks[table[k]]:
                table[k] = v
                return replace(t, **{field: table})
    raise AssertionError("nothing to corrupt")


@pytest.mark.parametrize("field", ["vcomp", "inverse", "lwhisk", "rwhisk"])
def test_corrupted_tables_are_caught(realized, field):
    t = realized[(1,)].track
    assert not tc.validate_track_category(_corrupt(t, field))


def test_untyped_track_caught():
    c = commutative_square()
    t = tc.codiscrete_track_category(c)
    tracks = dict(t.tracks)
    tracks["a=>a"] = ("a", "b")
    assert not tc.validate_track_category(replace(t, tracks=tracks))


def test_realized_structure(z2, realized):
    c, d, p = z2
    for coords, e in realized.items():
        ho, q = tc.homotopy_category(e.track)
        assert ho.table == c.table
        assert tc.extension_class(e) == coords
        auts = tc.aut_groups(e.track)
        assert all(a.group.invariant_factors == (2,) for a in auts.values())
    assert tc.extension_class(tc.split_extension(c, d, p)) == (0,)


def test_identity_carrier_obstructed(z2):
    c, d, _p = z2
    with pytest.raises(ObstructionError) as info:
        tc.realize_class(c, d, cohomology(c, d, 3).representative((1,)), identity_functor(c))
    assert info.value.payload["residual_class"] == [1]
    with pytest.raises(InputError):
        tc.realize_class(c, d, CochainComplex(d).zero(2), identity_functor(c))


def test_json_round_trip(realized):
    e = realized[(1,)]
    t2 = tc.TrackCat.from_json(e.track.to_json())
    assert t2.vcomp == e.track.vcomp and t2.lwhisk == e.track.lwhisk
    e2 = tc.LinearTrackExtension.from_json(e.to_json())
    assert tc.validate_track_extension(e2)
    assert tc.extension_class(e2) == (1,)
    with pytest.raises(InputError):
        tc.LinearTrackExtension.from_json({"track": e.track.to_json()})


def test_identity_lax_functor(realized):
    t = realized[(1,)].track
    F = tc.identity_lax_functor(t)
    assert tc.validate_lax_functor(F)
    assert F.is_strict() and tc.check_weak_equivalence(F)


@pytest.mark.parametrize("m,expected", [(2, (1,)), (4, (0,)), (6, (1,))])
def test_pullback_along_base_functor(realized, m, expected):
    e = realized[(1,)]
    f = identity_functor(e.base) if m == 2 else cyclic_quotient(m, 2)
    pb = tc.pullback_track_extension(e, f)
    assert tc.validate_track_extension(pb)
    dk = pullback_natural_system(f, e.coeff)
    # inflation of the cube class dies on Z/4 and survives on Z/6
    assert cohomology(f.source, dk, 3).classify(pullback_cochain(f, tc.characteristic_cocycle(e), dk)) == expected
    assert tc.extension_class(pb) == expected


def test_restrict_carrier(realized):
    e = realized[(1,)]
    big, pr = marked_category(e.track.cells)
    out, mor = tc.restrict_carrier(e, pr)
    assert tc.validate_track_extension(out)
    assert tc.validate_lax_functor(mor)
    assert tc.extension_class(out) == (1,)
    bad = FunctorData(e.base, e.track.cells, {"*": "*"}, {"0": "0", "1": "1"})
    with pytest.raises(InputError):
        tc.restrict_carrier(e, bad)


def test_connect_within_a_class(z2, realized, rng):
    c, d, p = z2
    cx = CochainComplex(d)
    t = cohomology(c, d, 3).representative((1,))
    beta = cx.from_vector(2, [rng.randrange(2) for _ in range(cx.dimension(2))])
    e2 = tc.realize_class(c, d, (t + cx.coboundary(beta)).reduced(), p)
    F = tc.connect_same_class(realized[(1,)], e2)
    assert F is not None and tc.validate_lax_functor(F)
    assert tc.check_lax_class_preservation(F, realized[(1,)], e2).details["cocycle_equal"]
    assert tc.connect_same_class(realized[(0,)], e2) is None


def test_descent_of_aut_system(realized):
    e = realized[(0,)]
    dn = tc.aut_tnatural_system(e.track)
    assert dn.validate() and dn.is_inert()
    a = tc.descend_inert(e.track, dn)
    b = tc.descend_inert(e.track, dn, random.Random(3))
    assert tc.descent_isomorphism(e.track, dn, a, b)
    ext, desc = tc.as_track_extension(e.track)
    assert tc.validate_track_extension(ext)
    assert tc.extension_class(ext) == (0,)
