from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from bwengine.abelcore import FgAbGroup
from bwengine.bwcoh import CochainComplex, cohomology, normalize
from bwengine.errors import InputError, UnsupportedInputError
from bwengine.fincat import validate_category, validate_functor
from bwengine.linext import (LinearExtension, are_equivalent, build_linear_extension, census_extensions,
                             check_equivalence, classify_extension, enumerate_extension_classes,
                             extract_cocycle, validate_linear_extension)
from bwengine.natsys import natural_system_from_bifunctor, hom_bifunctor, trivial_system
from bwengine.samples import commutative_square, cyclic_group


def _system(m: int, k: int):
    c = cyclic_group(m)
    return c, trivial_system(c, FgAbGroup.cyclic(k))


# |Z^2| = |H^2| |C^1| / |Z^1|: every unnormalized cocycle gives one table on the fixed fibres
@pytest.mark.parametrize("m,k,count", [(2, 2, 4), (1, 2, 2), (1, 3, 3)])
def test_census_counts(m, k, count):
    c, d = _system(m, k)
    assert len(census_extensions(c, d)) == count


def test_census_guard_and_finiteness():
    c, d = _system(2, 3)
    with pytest.raises(UnsupportedInputError):
        census_extensions(c, d)
    c, d = _system(2, 0)
    with pytest.raises(UnsupportedInputError):
        census_extensions(c, d)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_build_extract_round_trip(seed):
    rng = random.Random(seed)
    c = commutative_square() if seed % 2 else cyclic_group(3)
    d = natural_system_from_bifunctor(c, hom_bifunctor(c, 3)) if seed % 2 else trivial_system(c, FgAbGroup.cyclic(3))
    cx = CochainComplex(d)
    h = cohomology(c, d, 2)
    coords = h.group.normal_form([rng.randrange(9) for _ in range(h.group.ngens)])
    psi = cx.from_vector(1, [rng.randrange(3) for _ in range(cx.dimension(1))])
    z = (h.representative(coords) + cx.coboundary(psi)).reduced()
    e = build_linear_extension(c, d, z)
    assert validate_linear_extension(e)
    assert validate_category(e.total) and validate_functor(e.proj)
    # the extension is built from a normalized representative of z
    assert extract_cocycle(e).equals(z if z.is_normalized() else normalize(z)[0])
    assert classify_extension(e).coords == coords
    base = build_linear_extension(c, d, h.representative(coords))
    eq = are_equivalent(e, base)
    assert eq is not None and check_equivalence(e, base, eq.mapping)


def test_distinct_classes_are_inequivalent():
    c, d = _system(3, 3)
    classes = enumerate_extension_classes(c, d)
    assert len(classes) == 3
    for i, (_a, e) in enumerate(classes):
        for j, (_b, e2) in enumerate(classes):
            assert (are_equivalent(e, e2) is not None) == (i == j)


def test_corruption_detected():
    c, d = _system(2, 2)
    z = cohomology(c, d, 2).representative((1,))
    e = build_linear_extension(c, d, z)
    action = {f: dict(tab) for f, tab in e.action.items()}
    key = next(k for k in action["1"] if k[0] == (0,))
    other = next(v for k, v in action["1"].items() if v != action["1"][key])
    action["1"][key] = other
    assert not validate_linear_extension(replace(e, action=action))
    e2 = build_linear_extension(c, d, cohomology(c, d, 2).representative((0,)))
    ident = {x: x for x in e.total.morphism_ids}
    assert sorted(e.total.morphism_ids) == sorted(e2.total.morphism_ids)
    assert not check_equivalence(e, e2, ident)


def test_build_rejects_non_cocycles():
    c, d = _system(2, 2)
    cx = CochainComplex(d)
    with pytest.raises(InputError):
        build_linear_extension(c, d, cx.zero(1))
    bad = cx.from_vector(2, [0, 1, 0, 0])
    assert not cx.coboundary(bad).is_zero()
    with pytest.raises(InputError):
        build_linear_extension(c, d, bad)


def test_json_round_trip():
    c, d = _system(2, 2)
    e = build_linear_extension(c, d, cohomology(c, d, 2).representative((1,)))
    e2 = LinearExtension.from_json(e.to_json())
    assert validate_linear_extension(e2)
    assert classify_extension(e2).coords == (1,)
    assert are_equivalent(e, e2) is not None
    with pytest.raises(InputError):
        LinearExtension.from_json({"base": c.to_json()})
