"""Command-line front door.  Every command reads JSON, calls one module operation and prints JSON.

Exit codes: 0 success, 1 validation failure, 2 mathematical obstruction,
3 malformed input.  Errors are printed as ``{"ok": false, "error": {...}}``
with the input location being read when the error occurred.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

from . import __version__
from .bwcoh import Cochain, CochainComplex, cohomology
from .errors import EngineError, InputError, ObstructionError, ValidationError
from .fincat import FinCat, FunctorData, factorization_category, validate_category, validate_functor
from .kernels import BACKENDS
from .linext import (LinearExtension, build_linear_extension, classify_extension, enumerate_extension_classes,
                     extract_cocycle, validate_linear_extension)
from .natsys import NaturalSystem, cartesian_report
from .oracle import bar_oracle
from .report import Report
from . import theoryring as tr
from . import trackcat as tc

EXIT_CODES = {ValidationError: 1, ObstructionError: 2, InputError: 3}
SAFE_INT = 2 ** 53


class Job:
    """Parsed flags plus the location currently being read, for error messages."""

    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.location = "arguments"
        self.rng = random.Random(args.seed)

    def read(self, path: str | None = None) -> Any:
        path = path if path is not None else self.args.input
        self.location = path
        try:
            return json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise InputError(f"no such file: {path}") from exc
        except json.JSONDecodeError as exc:
            raise InputError(f"not valid JSON: {exc.msg} at line {exc.lineno}") from exc

    def part(self, doc: Mapping, key: str, parse: Callable[[Any], Any], required: bool = True) -> Any:
        if not isinstance(doc, Mapping):
            raise InputError("expected a JSON object")
        if key not in doc:
            if required:
                raise InputError(f"missing key {key!r}")
            return None
        outer = self.location
        self.location = f"{outer.split('#')[0]}#/{key}" if "#" not in outer else f"{outer}/{key}"
        out = parse(doc[key])
        self.location = outer
        return out


def _safe(x: Any) -> Any:
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return str(x) if abs(x) >= SAFE_INT else x
    if isinstance(x, Mapping):
        return {str(k): _safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_safe(v) for v in x]
    return x


def _report(rep: Report) -> dict:
    if not rep:
        raise ValidationError(rep.first_failure or rep.name, rep.to_json())
    return rep.to_json()


# ---------------------------------------------------------------------------
# Input shapes


def _category(job: Job, doc: Mapping, key: str = "category") -> FinCat:
    return job.part(doc, key, FinCat.from_json)


def _system(job: Job, doc: Mapping, c: FinCat) -> NaturalSystem:
    return job.part(doc, "system", lambda v: NaturalSystem.from_json(v, c))


def _carrier(job: Job, doc: Mapping, c: FinCat) -> FunctorData:
    def parse(v: Mapping) -> FunctorData:
        k = _category(job, v)
        p = job.part(v, "functor", lambda f: FunctorData.from_json(k, c, f))
        _report(validate_functor(p))
        return p
    return job.part(doc, "carrier", parse)


def _cocycle(job: Job, doc: Mapping, d: NaturalSystem, degree: int) -> Cochain:
    if "cocycle" in doc:
        z = job.part(doc, "cocycle", lambda v: Cochain.from_json(d, v))
        if z.degree != degree:
            raise InputError(f"expected a {degree}-cochain")
        return z
    coords = job.part(doc, "class", lambda v: [int(str(x)) for x in v])
    h = cohomology(d.base, d, degree)
    if len(coords) != h.group.ngens:
        raise InputError(f"class needs {h.group.ngens} coordinates for {list(h.invariant_factors)}")
    return h.representative(coords)


def _theory(job: Job, doc: Mapping) -> tr.TruncatedTheory:
    return job.part(doc, "theory", tr.TruncatedTheory.from_json)


def _model(job: Job, doc: Mapping, t: tr.TruncatedTheory) -> tr.FiniteModel:
    m = job.part(doc, "model", lambda v: tr.FiniteModel.from_json(t, v))
    _report(tr.validate_model(m))
    return m


def _extension(job: Job, doc: Mapping, key: str = "extension") -> tc.LinearTrackExtension:
    return job.part(doc, key, tc.LinearTrackExtension.from_json)


# ---------------------------------------------------------------------------
# Commands


def cmd_validate(job: Job) -> dict:
    kind = job.args.kind
    doc = job.read()
    if kind == "category":
        return _report(validate_category(FinCat.from_json(doc)))
    if kind == "functor":
        s, t = _category(job, doc, "source"), _category(job, doc, "target")
        return _report(validate_functor(job.part(doc, "functor", lambda v: FunctorData.from_json(s, t, v))))
    if kind == "system":
        return _report(NaturalSystem.from_json(doc).validate())
    if kind == "cochain":
        c = _category(job, doc)
        d = _system(job, doc, c)
        _report(d.validate())
        z = job.part(doc, "cochain", lambda v: Cochain.from_json(d, v))
        dz = CochainComplex(d).coboundary(z)
        return {"check": "cochain", "ok": True, "degree": z.degree, "cocycle": dz.is_zero(),
                "normalized": z.is_normalized()}
    if kind == "linext":
        return _report(validate_linear_extension(LinearExtension.from_json(doc)))
    if kind == "track":
        return _report(tc.validate_track_category(tc.TrackCat.from_json(doc)))
    if kind == "track-extension":
        return _report(tc.validate_track_extension(tc.LinearTrackExtension.from_json(doc)))
    if kind == "theory":
        return _report(tr.validate_theory(tr.TruncatedTheory.from_json(doc)))
    if kind == "model":
        t = _theory(job, doc)
        return _report(tr.validate_model(job.part(doc, "model", lambda v: tr.FiniteModel.from_json(t, v))))
    raise InputError(f"unknown kind {kind!r}")


def cmd_factorization(job: Job) -> dict:
    c = FinCat.from_json(job.read())
    return factorization_category(c).to_json()


def cmd_cohomology(job: Job) -> dict:
    doc = job.read()
    c = _category(job, doc)
    d = _system(job, doc, c)
    _report(d.validate())
    h = cohomology(c, d, job.args.degree)
    return {"degree": job.args.degree, "invariant_factors": list(h.invariant_factors),
            "description": h.group.describe()}


def cmd_linext(job: Job) -> dict:
    action = job.args.action
    doc = job.read()
    if action in ("build", "enumerate"):
        c = _category(job, doc)
        d = _system(job, doc, c)
        _report(d.validate())
        if action == "enumerate":
            return {"classes": [{"class": cl.to_json(), "extension": e.to_json()}
                                for cl, e in enumerate_extension_classes(c, d)]}
        return build_linear_extension(c, d, _cocycle(job, doc, d, 2)).to_json()
    e = LinearExtension.from_json(doc)
    _report(validate_linear_extension(e))
    if action == "extract":
        return {"cocycle": extract_cocycle(e).to_json()}
    return classify_extension(e).to_json()


def cmd_track(job: Job) -> dict:
    action = job.args.action
    doc = job.read()
    if action == "realize":
        c = _category(job, doc)
        d = _system(job, doc, c)
        _report(d.validate())
        t = _cocycle(job, doc, d, 3)
        p = _carrier(job, doc, c)
        e = tc.realize_class(c, d, t, p)
        return {"class": list(tc.extension_class(e)), "extension": e.to_json()}
    if action == "validate":
        return _report(tc.validate_track_extension(tc.LinearTrackExtension.from_json(doc)))
    if action == "extract-class":
        e = tc.require_valid_extension(tc.LinearTrackExtension.from_json(doc))
        h = cohomology(e.base, e.coeff, 3)
        z = tc.characteristic_cocycle(e)
        return {"invariant_factors": list(h.invariant_factors), "class": list(h.classify(z)),
                "cocycle": z.to_json()}
    if action in ("pullback", "restrict"):
        e = tc.require_valid_extension(_extension(job, doc))
        target = e.base if action == "pullback" else e.track.cells

        def parse(v: Mapping) -> FunctorData:
            s = _category(job, v, "source")
            f = job.part(v, "functor", lambda m: FunctorData.from_json(s, target, m))
            _report(validate_functor(f))
            return f

        f = job.part(doc, "functor", parse)
        if action == "pullback":
            out = tc.require_valid_extension(tc.pullback_track_extension(e, f))
            return {"class": list(tc.extension_class(out)), "extension": out.to_json()}
        out, mor = tc.restrict_carrier(e, f)
        tc.require_valid_extension(out)
        return {"class": list(tc.extension_class(out)), "extension": out.to_json(),
                "comparison": {"tracks": dict(sorted(mor.track_map.items()))}}
    if action == "connect":
        e1 = tc.require_valid_extension(_extension(job, doc, "first"))
        e2 = tc.require_valid_extension(_extension(job, doc, "second"))
        F = tc.connect_same_class(e1, e2)
        if F is None:
            return {"isomorphic": False, "isomorphism": None}
        pres = tc.check_lax_class_preservation(F, e1, e2)
        return {"isomorphic": True, "cocycle_preserved": pres.ok,
                "isomorphism": {"tracks": dict(sorted(F.track_map.items()))}}
    if action == "strengthen":
        t = job.part(doc, "track", tc.TrackCat.from_json)
        theory = job.part(doc, "theory", tr.TruncatedTheory.from_json, required=False)
        carrier_theory = job.part(doc, "carrier_theory", tr.TruncatedTheory.from_json, required=False)
        ho, _q = tc.homotopy_category(t)
        p = _carrier(job, doc, ho)
        out = tc.strengthen(t, theory, p, carrier_theory)
        result = {"class": list(tc.extension_class(out)), "extension": out.to_json()}
        if theory is not None:
            result["strong"] = tc.is_strong_track_theory(out, theory, carrier_theory).to_json()
        return result
    raise InputError(f"unknown track action {action!r}")


def _ring(name: str) -> tr.FiniteRing:
    if name in ("F4", "F_4"):
        return tr.FiniteRing.field_of_four()
    if name.startswith("Z/"):
        try:
            return tr.FiniteRing.integers_mod(int(name[2:]))
        except ValueError as exc:
            raise InputError(f"bad ring {name!r}") from exc
    raise InputError(f"unknown ring {name!r}; use Z/n or F4")


def cmd_theory(job: Job) -> dict:
    action = job.args.action
    a = job.args
    if action == "matrix":
        if a.ring is None or a.rank is None:
            raise InputError("theory matrix needs --ring and --rank")
        t = tr.require_valid_theory(tr.matrix_theory(_ring(a.ring), a.rank))
        return t.to_json()
    doc = job.read()
    if action == "global-hom":
        c = _category(job, doc)
        rf = job.part(doc, "rings", lambda v: tr.RingFunctor.from_json(v, c))
        _report(rf.validate())
        m = job.part(doc, "M", lambda v: tr.ring_module_from_json(rf, v))
        n = job.part(doc, "N", lambda v: tr.ring_module_from_json(rf, v))
        g = tr.global_hom(rf, m, n)
        loc, _cells = tr.local_hom_system(rf, m, n)
        h0 = cohomology(c, loc, 0)
        return {"global_hom": list(g.invariant_factors), "local_h0": list(h0.invariant_factors)}
    t = _theory(job, doc)
    tr.require_valid_theory(t)
    if action == "check-cartesian":
        d = job.part(doc, "system", lambda v: NaturalSystem.from_json(v, t.cat), required=False)
        d = d if d is not None else tr.codab_system(t)
        return _report(cartesian_report(d, t))
    m = _model(job, doc, t)
    ring = tr.enveloping_presentation(t, m)
    if action == "envelope":
        return ring.to_json()
    if action == "omega1":
        return tr.omega1_presentation(t, m, ring).to_json()
    if action == "derivations":
        a_obj = job.part(doc, "group_object", lambda v: tr.GroupObject.from_json(m, v), required=False)
        if a_obj is None:
            a_obj = tr.random_group_object(job.rng, m, job.args.dim)
        _report(a_obj.validate())
        der = tr.solve_derivations(t, m, a_obj)
        rep = tr.check_generic_derivation(t, m, a_obj)
        return {"derivations": list(der.group.invariant_factors), "generic_derivation": _report(rep),
                "group_object": a_obj.to_json()}
    raise InputError(f"unknown theory action {action!r}")


def cmd_oracle(job: Job) -> dict:
    a = job.args
    g = bar_oracle(a.order, a.coeff, a.degree, backend=a.kernel)
    return {"order": a.order, "coeff": a.coeff, "degree": a.degree,
            "invariant_factors": list(g.invariant_factors)}


# ---------------------------------------------------------------------------
# Parsing and dispatch


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result JSON to this file instead of standard output")
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized choice (default 0)")
    common.add_argument("--kernel", choices=BACKENDS, default="auto", help="elimination backend for the oracle")
    ap = argparse.ArgumentParser(prog="bwengine", description="Exact cohomology of finite categories.",
                                 parents=[common])
    ap.add_argument("--version", action="version", version=f"bwengine {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="validate a JSON object of the given kind")
    p.add_argument("kind", choices=["category", "functor", "system", "cochain", "linext", "track",
                                    "track-extension", "theory", "model"])
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("factorization", parents=[common], help="factorization category of a category")
    p.add_argument("input")
    p.set_defaults(func=cmd_factorization)

    p = sub.add_parser("cohomology", parents=[common], help="H^n(C; D) from {category, system}")
    p.add_argument("input")
    p.add_argument("--degree", type=int, required=True)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("linext", parents=[common], help="linear extensions and H^2")
    p.add_argument("action", choices=["build", "extract", "classify", "enumerate"])
    p.add_argument("input")
    p.set_defaults(func=cmd_linext)

    p = sub.add_parser("track", parents=[common], help="linear track extensions and H^3")
    p.add_argument("action", choices=["realize", "extract-class", "validate", "pullback", "restrict",
                                      "connect", "strengthen"])
    p.add_argument("input")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("theory", parents=[common], help="truncated theories, models and their modules")
    p.add_argument("action", choices=["check-cartesian", "matrix", "envelope", "omega1", "derivations",
                                      "global-hom"])
    p.add_argument("input", nargs="?")
    p.add_argument("--ring", help="Z/n or F4 (theory matrix)")
    p.add_argument("--rank", type=int, help="truncation rank (theory matrix)")
    p.add_argument("--dim", type=int, default=1, help="fibre rank of a random group object (derivations)")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("oracle", parents=[common], help="independent bar-resolution oracle")
    p.add_argument("which", choices=["group-cohomology"])
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--coeff", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.set_defaults(func=cmd_oracle)
    return ap


def _meta(args: argparse.Namespace) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    return {"version": __version__, "flags": flags}


def _execute(argv: Sequence[str] | None) -> tuple[int, dict, str | None]:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        return 3, {"ok": False, "error": {"type": "InputError", "message": "bad command line",
                                          "location": "arguments"}}, None
    needs_input = args.command != "oracle" and not (args.command == "theory" and args.action == "matrix")
    if needs_input and getattr(args, "input", None) is None:
        return 3, {"ok": False, "meta": _meta(args), "error": {
            "type": "InputError", "message": "an input file is required", "location": "arguments"}}, None
    job = Job(args)
    try:
        result = args.func(job)
    except EngineError as exc:
        code = next((v for k, v in EXIT_CODES.items() if isinstance(exc, k)), 3)
        return code, {"ok": False, "meta": _meta(args),
                      "error": {"type": type(exc).__name__, "message": str(exc), "location": job.location,
                                "payload": _safe(exc.payload)}}, None
    return 0, {"ok": True, "command": args.command, "meta": _meta(args), "result": _safe(result)}, args.out


def run(argv: Sequence[str] | None = None) -> tuple[int, dict]:
    """Parse ``argv`` and execute; returns the exit code and the JSON document."""
    code, doc, _out = _execute(argv)
    return code, doc


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, doc, out = _execute(argv)
    if out:
        Path(out).write_text(dumps(doc), encoding="utf-8")
        sys.stdout.write(dumps({"ok": True, "written": out}))
    else:
        sys.stdout.write(dumps(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())
