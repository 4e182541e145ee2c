"""The bar-resolution oracle: frozen values, guards, and agreement with the cochain engine."""
from __future__ import annotations

import pytest

from bwengine.abelcore import FgAbGroup
from bwengine.bwcoh import cohomology
from bwengine.errors import UnsupportedInputError
from bwengine.kernels import HAS_NUMBA
from bwengine.natsys import trivial_system
from bwengine.oracle import bar_oracle
from bwengine.samples import cyclic_group

# frozen from the oracle itself (the independent implementation, built first)
FROZEN = {
    (2, 2, 0): (2,), (2, 2, 1): (2,), (2, 2, 2): (2,), (2, 2, 3): (2,), (2, 2, 4): (2,),
    (3, 2, 1): (), (3, 2, 2): (), (3, 2, 3): (), (3, 2, 4): (),
    (4, 2, 2): (2,), (4, 4, 1): (4,), (4, 4, 2): (4,), (6, 6, 2): (6,), (3, 3, 3): (3,),
    (4, 6, 2): (2,), (8, 2, 2): (2,), (1, 5, 3): (),
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_values(key):
    assert bar_oracle(*key).invariant_factors == FROZEN[key]


@pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")
def test_backends_agree():
    for m in (2, 3, 4, 5):
        for n in range(4):
            assert bar_oracle(m, 4, n, "numba") == bar_oracle(m, 4, n, "numpy")


@pytest.mark.parametrize("args", [(9, 2, 1), (0, 2, 1), (2, 2, 5), (2, 0, 1), (2, 2, -1)])
def test_guards(args):
    with pytest.raises(UnsupportedInputError):
        bar_oracle(*args)


@pytest.mark.parametrize("m", [5, 6])
def test_engine_agrees_beyond_the_criteria_range(m):
    c = cyclic_group(m)
    d = trivial_system(c, FgAbGroup.cyclic(6))
    for n in range(3):
        assert cohomology(c, d, n).invariant_factors == bar_oracle(m, 6, n).invariant_factors
