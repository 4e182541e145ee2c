from __future__ import annotations

import random
from dataclasses import replace

import pytest

from bwengine.errors import InputError, ValidationError
from bwengine.fincat import (FinCat, FunctorData, Graph, SetFunctor, carrier_section, factorization_category,
                             grothendieck_integral, identity_functor, is_discrete_opfibration,
                             is_full_identity_on_objects, isomorphic_to_monoid_table, marked_category,
                             opposite, path_category, require_valid, validate_category, validate_functor)
from bwengine.samples import (arrow, commutative_square, cyclic_group, cyclic_quotient, discrete, random_category,
                              random_dag)


def _count_paths(g: Graph) -> int:
    out: dict[str, list[str]] = {n: [] for n in g.nodes}
    for _e, s, t in g.edges:
        out[s].append(t)

    def from_node(n: str) -> int:
        return 1 + sum(from_node(t) for t in out[n])

    return sum(from_node(n) for n in g.nodes)


@pytest.mark.parametrize("seed", range(8))
def test_random_categories_validate(seed):
    c = random_category(random.Random(seed))
    assert validate_category(c)
    assert validate_category(opposite(c))
    assert validate_functor(identity_functor(c))


def test_corrupted_composition_is_caught():
    c = cyclic_group(3)
    table = dict(c.table)
    table[("1", "1")] = "0"
    bad = replace(c, table=table)
    rep = validate_category(bad)
    assert not rep and "associativity" in rep.first_failure
    with pytest.raises(ValidationError):
        require_valid(bad)
    table = dict(c.table)
    del table[("1", "2")]
    assert "missing" in validate_category(replace(c, table=table)).first_failure


def test_bad_identity_is_caught():
    c = cyclic_group(2)
    bad = replace(c, identities={"*": "1"})
    assert not validate_category(bad)


def test_duplicate_morphism_rejected():
    with pytest.raises(InputError):
        FinCat.build(["x"], [("a", "x", "x"), ("a", "x", "x")], {"x": "a"}, [("a", "a", "a")])


@pytest.mark.parametrize("seed", range(6))
def test_path_category_counts_paths(seed):
    rng = random.Random(seed)
    g = random_dag(rng, rng.randint(2, 5), rng.randint(1, 6))
    c = path_category(g)
    assert validate_category(c)
    assert len(c.morphisms) == _count_paths(g)


def test_factorization_category():
    for c in (arrow(), commutative_square(), cyclic_group(3)):
        fc = factorization_category(c)
        assert validate_category(fc)
        assert set(fc.objects) == set(c.morphism_ids)
        expected = sum(len(c.into(c.src(f))) * len(c.out_of(c.tgt(f))) for f in c.morphism_ids)
        assert len(fc.morphisms) == expected


def test_cyclic_quotient_is_a_full_functor():
    p = cyclic_quotient(4, 2)
    assert validate_functor(p)
    assert carrier_section(p) == {"0": "0", "1": "1"}
    assert is_full_identity_on_objects(p)
    assert not is_discrete_opfibration(p)
    assert is_discrete_opfibration(identity_functor(p.target))


def test_carrier_section_requires_fullness():
    c = discrete(1)
    inc = FunctorData(c, cyclic_group(2, "x0"), {"x0": "x0"}, {"1_x0": "0"})
    assert validate_functor(inc)
    assert carrier_section(inc) is None


def test_broken_functor_detected():
    p = cyclic_quotient(4, 2)
    bad = FunctorData(p.source, p.target, p.obj_map, {**p.mor_map, "2": "1"})
    assert not validate_functor(bad)


def test_marked_category():
    c = cyclic_group(2)
    big, pr = marked_category(c)
    assert validate_category(big) and validate_functor(pr)
    assert len(big.morphisms) == 4
    assert big.table[("1~", "1")] == "0~"
    assert is_full_identity_on_objects(pr)
    with pytest.raises(InputError):
        marked_category(big, suffix="")


def test_grothendieck_integral_is_discrete_opfibration():
    c = cyclic_group(2)
    m = SetFunctor(c, {"*": ("a", "b")}, {"0": {"a": "a", "b": "b"}, "1": {"a": "b", "b": "a"}})
    total, pr = grothendieck_integral(c, m)
    assert validate_category(total) and validate_functor(pr)
    assert is_discrete_opfibration(pr)
    assert len(total.objects) == 2
    bad = SetFunctor(c, m.sets, {"0": m.maps["0"], "1": {"a": "a", "b": "a"}})
    with pytest.raises(ValidationError):
        grothendieck_integral(c, bad)


def test_monoid_table_isomorphism():
    z2 = [[0, 1], [1, 0]]
    assert isomorphic_to_monoid_table(cyclic_group(2), z2)
    assert not isomorphic_to_monoid_table(cyclic_group(3), z2)
    assert not isomorphic_to_monoid_table(marked_category(cyclic_group(1))[0], z2)


@pytest.mark.parametrize("seed", range(4))
def test_json_round_trip(seed):
    c = random_category(random.Random(seed))
    c2 = FinCat.from_json(c.to_json())
    assert c2.table == c.table and c2.morphisms == c.morphisms and c2.identities == c.identities
    p = identity_functor(c)
    assert FunctorData.from_json(c, c, p.to_json()).mor_map == p.mor_map
    with pytest.raises(InputError):
        FinCat.from_json({"objects": []})
