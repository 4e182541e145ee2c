from __future__ import annotations

import json
import random
import subprocess
import sys

import pytest

from bwengine import theoryring as tr
from bwengine import trackcat as tc
from bwengine.abelcore import FgAbGroup
from bwengine.bwcoh import cohomology
from bwengine.cli import dumps, main, run
from bwengine.fincat import identity_functor, marked_category
from bwengine.linext import build_linear_extension
from bwengine.natsys import trivial_system
from bwengine.samples import arrow, cyclic_group, cyclic_quotient


@pytest.fixture
def put(tmp_path):
    def write(name: str, doc) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
        return str(path)
    return write


def _ok(argv):
    code, doc = run(argv)
    assert code == 0, doc
    assert doc["ok"] and doc["meta"]["flags"]["seed"] == 0
    return doc["result"]


def test_oracle_and_kernel_flag():
    for k in ("auto", "numpy"):
        assert _ok(["oracle", "group-cohomology", "--order", "2", "--coeff", "2", "--degree", "3",
                    "--kernel", k])["invariant_factors"] == [2]
    code, doc = run(["oracle", "group-cohomology", "--order", "99", "--coeff", "2", "--degree", "1"])
    assert code == 3 and doc["error"]["type"] == "UnsupportedInputError"


def test_validate_kinds(put, z2):
    c, d, p = z2
    assert _ok(["validate", "category", put("c.json", c.to_json())])["ok"]
    fdoc = {"source": p.source.to_json(), "target": p.target.to_json(), "functor": p.to_json()}
    assert _ok(["validate", "functor", put("f.json", fdoc)])["ok"]
    assert _ok(["validate", "system", put("d.json", d.to_json())])["ok"]
    z = cohomology(c, d, 3).representative((1,))
    res = _ok(["validate", "cochain", put("z.json", {"category": c.to_json(), "system": d.to_json(),
                                                      "cochain": z.to_json()})])
    assert res["cocycle"] and res["degree"] == 3
    e = build_linear_extension(c, d, cohomology(c, d, 2).representative((1,)))
    assert _ok(["validate", "linext", put("e.json", e.to_json())])["ok"]
    te = tc.realize_class(c, d, z, p)
    assert _ok(["validate", "track", put("t.json", te.track.to_json())])["ok"]
    assert _ok(["validate", "track-extension", put("te.json", te.to_json())])["ok"]


def test_validation_failure_exit_code(put):
    doc = cyclic_group(3).to_json()
    for x in doc["compose"]:
        if x["g"] == "1" and x["f"] == "1":
            x["gf"] = "0"
    code, out = run(["validate", "category", put("bad.json", doc)])
    assert code == 1 and out["error"]["type"] == "ValidationError"
    assert out["error"]["payload"]["ok"] is False


def test_malformed_input(put, tmp_path):
    code, out = run(["cohomology", str(tmp_path / "missing.json"), "--degree", "1"])
    assert code == 3
    code, out = run(["cohomology", put("junk.json", "{not json"), "--degree", "1"])
    assert code == 3 and "not valid JSON" in out["error"]["message"]
    code, out = run(["cohomology", put("nosys.json", {"category": arrow().to_json()}), "--degree", "1"])
    assert code == 3 and out["error"]["location"].endswith("nosys.json")
    code, out = run(["cohomology", "--bogus"])
    assert code == 3


def test_cohomology_and_factorization(put, z2):
    c, d, _p = z2
    path = put("cd.json", {"category": c.to_json(), "system": d.to_json()})
    assert [_ok(["cohomology", path, "--degree", str(n)])["invariant_factors"] for n in range(4)] == [[2]] * 4
    fc = _ok(["factorization", put("a.json", arrow().to_json())])
    assert len(fc["objects"]) == 3


def test_linext_commands(put, z2):
    c, d, _p = z2
    base = {"category": c.to_json(), "system": d.to_json()}
    enum = _ok(["linext", "enumerate", put("b.json", base)])
    assert len(enum["classes"]) == 2
    built = _ok(["linext", "build", put("b1.json", dict(base, **{"class": [1]}))])
    path = put("ext.json", built)
    assert _ok(["linext", "classify", path])["class"] == ["1"]
    assert _ok(["linext", "extract", path])["cocycle"]["degree"] == 2
    code, out = run(["linext", "build", put("b2.json", dict(base, **{"class": [1, 0]}))])
    assert code == 3


def test_track_commands(put, z2):
    c, d, p = z2
    doc = {"category": c.to_json(), "system": d.to_json(), "class": [1],
           "carrier": {"category": p.source.to_json(), "functor": p.to_json()}}
    real = _ok(["track", "realize", put("r.json", doc)])
    assert real["class"] == [1]
    ext = real["extension"]
    assert _ok(["track", "extract-class", put("x.json", ext)])["class"] == [1]
    assert _ok(["track", "validate", put("v.json", ext)])["ok"]
    q = cyclic_quotient(6, 2)
    pb = _ok(["track", "pullback", put("pb.json", {"extension": ext, "functor": {
        "source": q.source.to_json(), "functor": q.to_json()}})])
    assert pb["class"] == [1]
    e = tc.LinearTrackExtension.from_json(ext)
    big, pr = marked_category(e.track.cells)
    rs = _ok(["track", "restrict", put("rs.json", {"extension": ext, "functor": {
        "source": big.to_json(), "functor": pr.to_json()}})])
    assert rs["class"] == [1]
    zero = _ok(["track", "realize", put("r0.json", dict(doc, **{"class": [0]}))])["extension"]
    assert not _ok(["track", "connect", put("cn.json", {"first": ext, "second": zero})])["isomorphic"]
    same = _ok(["track", "connect", put("cs.json", {"first": ext, "second": ext})])
    assert same["isomorphic"] and same["cocycle_preserved"]
    obstructed = dict(doc, carrier={"category": c.to_json(), "functor": identity_functor(c).to_json()})
    code, out = run(["track", "realize", put("ob.json", obstructed)])
    assert code == 2 and out["error"]["payload"]["residual_class"] == [1]


def test_track_strengthen_small(put):
    c = cyclic_group(2)
    d = trivial_system(c, FgAbGroup.cyclic(2))
    p = cyclic_quotient(4, 2)
    e = tc.realize_class(c, d, cohomology(c, d, 3).representative((1,)), p)
    res = _ok(["track", "strengthen", put("s.json", {"track": e.track.to_json(), "carrier": {
        "category": p.source.to_json(), "functor": p.to_json()}})])
    assert res["class"] == [1]


def test_theory_commands(put, m2):
    t, _d = m2
    mat = _ok(["theory", "matrix", "--ring", "Z/2", "--rank", "2"])
    assert len(mat["category"]["morphisms"]) == 31
    assert run(["theory", "matrix", "--ring", "Q", "--rank", "2"])[0] == 3
    assert run(["theory", "matrix"])[0] == 3
    tdoc = t.to_json()
    assert _ok(["theory", "check-cartesian", put("t.json", {"theory": tdoc})])["ok"]
    const = trivial_system(t.cat, FgAbGroup.cyclic(2))
    code, out = run(["theory", "check-cartesian", put("tc.json", {"theory": tdoc, "system": const.to_json()})])
    assert code == 1
    m = tr.random_model(random.Random(5), t, max_dim=2)
    mdoc = {"theory": tdoc, "model": m.to_json()}
    path = put("m.json", mdoc)
    assert _ok(["theory", "envelope", path])
    assert _ok(["theory", "omega1", path])
    der = _ok(["theory", "derivations", path, "--dim", "2", "--seed", "0"])
    assert der["generic_derivation"]["ok"]
    again = _ok(["theory", "derivations", put("m2.json", dict(mdoc, group_object=der["group_object"]))])
    assert again["derivations"] == der["derivations"]


def test_global_hom_command(put):
    c = arrow()
    rf = tr.constant_ring_functor(c, tr.FiniteRing.integers_mod(4))
    rng = random.Random(2)
    m, n = tr.random_ring_module(rng, rf), tr.random_ring_module(rng, rf)
    res = _ok(["theory", "global-hom", put("g.json", {"category": c.to_json(), "rings": rf.to_json(),
                                                       "M": tr.ring_module_to_json(m),
                                                       "N": tr.ring_module_to_json(n)})])
    assert res["global_hom"] == res["local_h0"]


def test_output_is_deterministic(put, z2, tmp_path, capsys):
    c, d, p = z2
    doc = {"category": c.to_json(), "system": d.to_json(), "class": [1],
           "carrier": {"category": p.source.to_json(), "functor": p.to_json()}}
    path = put("r.json", doc)
    first = dumps(run(["track", "realize", path])[1])
    assert first == dumps(run(["track", "realize", path])[1])
    out = tmp_path / "out.json"
    assert main(["track", "realize", path, "--out", str(out)]) == 0
    assert out.read_text() == first
    assert json.loads(capsys.readouterr().out)["written"] == str(out)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bwengine.cli", "oracle", "group-cohomology",
                           "--order", "3", "--coeff", "3", "--degree", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["invariant_factors"] == [3]
