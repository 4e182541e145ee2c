from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bwengine import kernels
from bwengine.abelcore import smith_normal_form

BACKENDS = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])


def int_arrays(max_rows=6, max_cols=6, lo=-20, hi=20):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r)))


def _valuation(x: int, p: int, e: int) -> int:
    v = 0
    while v < e and x % p == 0:
        x //= p
        v += 1
    return v


@settings(max_examples=80, deadline=None)
@given(int_arrays(), st.sampled_from([(2, 1), (2, 3), (3, 2), (5, 1)]))
def test_local_pivots_match_smith_form(rows, pe):
    p, e = pe
    expected = sorted(v for v in (_valuation(d, p, e) for d in smith_normal_form(rows).diagonal if d) if v < e)
    for b in BACKENDS:
        assert kernels.local_pivot_valuations(np.array(rows), p, e, backend=b) == expected


@settings(max_examples=80, deadline=None)
@given(int_arrays(), st.sampled_from([2, 3, 5, 7]), st.data())
def test_solve_and_nullspace_mod_p(rows, p, data):
    a = np.array(rows, dtype=np.int64) % p
    x0 = np.array(data.draw(st.lists(st.integers(0, p - 1), min_size=a.shape[1], max_size=a.shape[1])))
    b = a @ x0 % p
    for be in BACKENDS:
        x = kernels.solve_mod_p(a, b, p, backend=be)
        assert x is not None and np.all((a @ x - b) % p == 0)
        ns = kernels.nullspace_mod_p(a, p, backend=be)
        r, piv = kernels.rref_mod_p(a, p, backend=be)
        assert ns.shape[0] == a.shape[1] - len(piv)
        assert np.all((a @ ns.T) % p == 0)


def test_backends_agree_on_rref():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 7, size=(12, 15))
    results = [kernels.rref_mod_p(a, 7, backend=b) for b in BACKENDS]
    for r, piv in results[1:]:
        assert piv == results[0][1]
        assert np.array_equal(r, results[0][0])


def test_inconsistent_system_has_no_solution():
    a = np.array([[1, 1], [1, 1]])
    assert kernels.solve_mod_p(a, np.array([0, 1]), 2) is None


def test_backend_and_modulus_guards():
    with pytest.raises(ValueError):
        kernels.resolve_backend("gpu")
    with pytest.raises(ValueError):
        kernels.rref_mod_p(np.eye(2, dtype=np.int64), 4)
    with pytest.raises(ValueError):
        kernels.local_pivot_valuations(np.eye(2, dtype=np.int64), 2, 0)
    assert kernels.resolve_backend("numpy") == "numpy"
