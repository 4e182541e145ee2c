from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from bwengine.abelcore import AbHom, FgAbGroup
from bwengine.errors import InputError, ValidationError
from bwengine.fincat import identity_functor
from bwengine.natsys import (AbFunctor, NaturalSystem, cartesian_report, check_natural_iso, direct_sum_systems,
                             hom_bifunctor, natural_system_from_bifunctor, natural_system_from_functor,
                             pullback_natural_system, random_functor, random_natural_system,
                             representable_system, require_valid_system, systems_equal, trivial_system,
                             validate_natural_system, zero_system)
from bwengine.samples import arrow, commutative_square, cyclic_group, cyclic_quotient, random_category
from bwengine.theoryring import FiniteRing, matrix_theory


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_systems_validate(seed):
    rng = random.Random(seed)
    c = random_category(rng, max_objects=4, max_morphisms=12)
    assert validate_natural_system(random_natural_system(rng, c))
    f = random_functor(rng, c)
    assert f.validate()
    assert validate_natural_system(natural_system_from_functor(c, f))


def test_hom_bifunctor_groups_are_hom_sets():
    c = commutative_square()
    d = natural_system_from_bifunctor(c, hom_bifunctor(c))
    for m in c.morphism_ids:
        assert d.groups[m].ngens == len(c.hom(*c.morphisms[m]))
    assert validate_natural_system(d)


def test_representable_system_ranks():
    c = arrow()
    for f0 in c.morphism_ids:
        d = representable_system(c, f0, 3)
        assert validate_natural_system(d)
        # one generator per factorization g = b f0 a
        for g in c.morphism_ids:
            count = sum(1 for a in c.into(c.src(f0)) for b in c.out_of(c.tgt(f0))
                        if c.table.get((b, c.table[(f0, a)])) == g)
            assert d.groups[g].ngens == count


def test_broken_action_is_detected():
    c = cyclic_group(2)
    d = trivial_system(c, FgAbGroup.cyclic(0))
    g = d.groups["1"]
    left = dict(d.left)
    left[("1", "1")] = AbHom.from_rows(g, g, [[2]])
    rep = validate_natural_system(replace(d, left=left))
    assert not rep
    with pytest.raises(ValidationError):
        require_valid_system(replace(d, left=left))


def test_non_functor_rejected():
    c = cyclic_group(2)
    g = FgAbGroup.cyclic(0)
    f = AbFunctor(c, {"*": g}, {"0": AbHom.identity(g), "1": AbHom.from_rows(g, g, [[2]])})
    assert not f.validate()
    with pytest.raises(ValidationError):
        natural_system_from_functor(c, f)


def test_pullback_along_quotient():
    p = cyclic_quotient(4, 2)
    d = trivial_system(p.target, FgAbGroup.cyclic(2))
    pd = pullback_natural_system(p, d)
    assert validate_natural_system(pd)
    assert systems_equal(pd, trivial_system(p.source, FgAbGroup.cyclic(2)))
    assert systems_equal(pullback_natural_system(identity_functor(p.target), d), d)


def test_direct_sum_and_identity_iso():
    c = arrow()
    d = direct_sum_systems([trivial_system(c, FgAbGroup.cyclic(2)), representable_system(c, "u", 0)])
    assert validate_natural_system(d)
    theta = {m: AbHom.identity(d.groups[m]) for m in c.morphism_ids}
    assert check_natural_iso(d, d, theta)
    killed = dict(theta, u=AbHom.zero(d.groups["u"], d.groups["u"]))
    assert not check_natural_iso(d, d, killed)


def test_json_round_trip():
    rng = random.Random(4)
    c = random_category(rng, max_objects=3, max_morphisms=8)
    d = random_natural_system(rng, c)
    d2 = NaturalSystem.from_json(d.to_json())
    assert systems_equal(d, d2)
    assert systems_equal(d, NaturalSystem.from_json(d.to_json(), c))
    bad = d.to_json()
    bad["actions"] = [dict(bad["actions"][0], side="middle")] if bad["actions"] else [{"x": 1}]
    with pytest.raises(InputError):
        NaturalSystem.from_json(bad)


def test_systems_equal_distinguishes():
    c = cyclic_group(2)
    assert not systems_equal(trivial_system(c, FgAbGroup.cyclic(2)), trivial_system(c, FgAbGroup.cyclic(3)))
    assert systems_equal(zero_system(c), trivial_system(c, FgAbGroup.trivial()))


def test_cartesian_report(m2):
    t, d = m2
    assert cartesian_report(d, t)
    rep = cartesian_report(trivial_system(t.cat, FgAbGroup.cyclic(2)), t)
    assert not rep and rep.first_failure.startswith("terminal witness")
    other = matrix_theory(FiniteRing.integers_mod(2), 1)
    assert not cartesian_report(d, other)
