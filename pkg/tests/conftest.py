from __future__ import annotations

import random

import pytest

from bwengine.abelcore import FgAbGroup
from bwengine.natsys import trivial_system
from bwengine.samples import cyclic_group, cyclic_quotient
from bwengine import theoryring as tr

ACCEPTANCE = "test_acceptance.py"


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20241014)


@pytest.fixture(scope="session")
def z2():
    """The group Z/2 with trivial Z/2 coefficients and the carrier Z/4 -> Z/2."""
    c = cyclic_group(2)
    return c, trivial_system(c, FgAbGroup.cyclic(2)), cyclic_quotient(4, 2)


@pytest.fixture(scope="session")
def m2():
    """Modules over Z/2 truncated at rank 2, with CodAb."""
    r = tr.FiniteRing.integers_mod(2)
    t = tr.matrix_theory(r, 2)
    return t, tr.codab_system(t)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if ACCEPTANCE in nodeid and getattr(rep, "when", "call") in ("call", "setup"):
                if outcome == "passed" and rep.when != "call":
                    continue
                lines.append((nodeid.split("::")[-1], "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")
