"""Small named categories and random generators used by tests, the CLI and benchmarks."""
from __future__ import annotations

import random
from typing import Sequence

from .errors import InputError
from .fincat import FinCat, FunctorData, Graph, concrete_category, path_category


def cyclic_group(m: int, obj: str = "*") -> FinCat:
    """One-object category of Z/m; morphism "k" is the k-th power of the generator."""
    if m < 1:
        raise InputError("group order must be positive")
    mors = [(str(k), obj, obj) for k in range(m)]
    comp = [(str(a), str(b), str((a + b) % m)) for a in range(m) for b in range(m)]
    return FinCat.build([obj], mors, {obj: "0"}, comp, name=f"Z/{m}")


def cyclic_quotient(m: int, k: int) -> FunctorData:
    """The surjection Z/m -> Z/k (k divides m), as a functor of one-object categories."""
    if m % k:
        raise InputError("quotient order must divide the group order")
    big, small = cyclic_group(m), cyclic_group(k)
    return FunctorData(big, small, {"*": "*"}, {str(a): str(a % k) for a in range(m)})


def discrete(n: int) -> FinCat:
    objs = [f"x{i}" for i in range(n)]
    return FinCat.build(objs, [(f"1_{x}", x, x) for x in objs], {x: f"1_{x}" for x in objs},
                        [(f"1_{x}", f"1_{x}", f"1_{x}") for x in objs])


def arrow() -> FinCat:
    """0 -> 1."""
    return path_category(Graph.build(["0", "1"], [("u", "0", "1")]))


def commutative_square() -> FinCat:
    """Objects 00, 01, 10, 11 with the two composites to 11 identified."""
    objs = ["00", "01", "10", "11"]
    mors = [("1_" + x, x, x) for x in objs] + [
        ("a", "00", "01"), ("b", "00", "10"), ("c", "01", "11"), ("d", "10", "11"), ("e", "00", "11")]
    ids = {x: "1_" + x for x in objs}
    comp = []
    for m, s, t in mors:
        comp.append((ids[t], m, m))
        if m != ids[s]:
            comp.append((m, ids[s], m))
    comp += [("c", "a", "e"), ("d", "b", "e")]
    return FinCat.build(objs, mors, ids, comp, name="square")


def poset(elements: Sequence[str], less_equal: set[tuple[str, str]]) -> FinCat:
    """Thin category of a partial order given by a reflexive-transitive relation."""
    rel = set(less_equal) | {(x, x) for x in elements}
    mors = [(f"{a}<{b}", a, b) for a, b in sorted(rel)]
    comp = []
    for a, b in rel:
        for b2, c in rel:
            if b == b2:
                comp.append((f"{b}<{c}", f"{a}<{b}", f"{a}<{c}"))
    return FinCat.build(elements, mors, {x: f"{x}<{x}" for x in elements}, comp)


def random_bottomed_poset(rng: random.Random, n: int) -> tuple[FinCat, str]:
    """Random poset on n elements with least element "p0"."""
    names = [f"p{i}" for i in range(n)]
    rel = {(names[0], x) for x in names}
    for i in range(1, n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                rel.add((names[i], names[j]))
    # transitive closure
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for b2, c in list(rel):
                if b == b2 and (a, c) not in rel:
                    rel.add((a, c))
                    changed = True
    return poset(names, rel), names[0]


def random_dag(rng: random.Random, nodes: int, edges: int) -> Graph:
    names = [f"v{i}" for i in range(nodes)]
    es = []
    for k in range(edges):
        i = rng.randrange(nodes - 1)
        j = rng.randrange(i + 1, nodes)
        es.append((f"e{k}", names[i], names[j]))
    return Graph.build(names, es)


def random_category(rng: random.Random, max_objects: int = 5, max_morphisms: int = 20,
                    attempts: int = 200) -> FinCat:
    """A random subcategory of finite sets generated by a few random functions."""
    for _ in range(attempts):
        nobj = rng.randint(1, max_objects)
        sizes = {f"o{i}": rng.randint(1, 3) for i in range(nobj)}
        objs = sorted(sizes)
        gens = []
        for _g in range(rng.randint(0, 4)):
            s, t = rng.choice(objs), rng.choice(objs)
            gens.append((s, t, [rng.randrange(sizes[t]) for _ in range(sizes[s])]))
        try:
            c = concrete_category(sizes, gens, max_morphisms=max_morphisms)
        except InputError:
            continue
        return c
    return discrete(1)
