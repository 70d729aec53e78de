"""Command-line calculator.

Every successful run prints one JSON report (or a short text rendering with
``--format text``) wrapped as ``{"schema_version", "command", "result"}``.
Failures print ``{"schema_version", "error": {...}}`` on stderr and exit with
2 for bad input or 3 for a violated internal invariant.
"""

from __future__ import annotations

import argparse
import json
import math
import random
import sys
from fractions import Fraction
from importlib import resources
from typing import Callable, Sequence

from . import arith, brauer, charclasses, grr, motive, qform
from .errors import InputError, InvariantViolation

SCHEMA_VERSION = "ncmotive-report/1"

PROP2_CITATION = (
    "not of Lefschetz Z-type (cited: rests on Rost's motive decomposition; not computed here)"
)


def load_schema(command: str) -> dict:
    """The shipped JSON schema for a command (``"qf analyze"``) or for ``"error"``."""
    name = command.replace(" ", "_") + ".schema.json"
    return json.loads(resources.files("ncmotive").joinpath("schemas", name).read_text())


def _tag(value: str | None) -> arith.RingTag:
    if value is None or value.strip().upper() in ("Z", "1"):
        return arith.ZZ
    if value.strip().upper() == "Q":
        return arith.QQ
    try:
        n = int(value)
    except ValueError as exc:
        raise InputError(f"--invert expects a positive integer or Q, got {value!r}") from exc
    return arith.RingTag(n)


def _schemes(text: str) -> grr.ToyScheme:
    return grr.ToyScheme.parse(text)


# -- handlers (each returns a JSON-ready dict) -----------------------------------


def cmd_qf_analyze(args) -> dict:
    q = qform.parse_form(args.form)
    out = qform.analyze(q)
    if out["prop2"]["all_hypotheses"]:
        out["chow_annotation"] = PROP2_CITATION
    return out


def cmd_qf_pfister(args) -> dict:
    slots = [arith.parse_rational(s) for s in args.slots.split(",") if s.strip()]
    q = qform.pfister(slots)
    out = qform.analyze(q)
    out["slots"] = [arith.format_rational(a) for a in slots]
    if out["prop2"]["all_hypotheses"]:
        out["chow_annotation"] = PROP2_CITATION
    return out


def cmd_motive_quadric(args) -> dict:
    q = qform.parse_form(args.form)
    nc = motive.quadric_nc_motive(q)
    report = qform.prop2_hypotheses(q)
    out = {
        "form": q.to_json()["diag"],
        "quadric_dimension": q.dimension - 2,
        "nc_motive": nc.to_json(),
        "rendered": str(nc),
        "unit_type": motive.is_unit_type(nc),
        "prop2": report.to_json(),
    }
    if report.all_hypotheses:
        out["chow_annotation"] = PROP2_CITATION
    return out


def cmd_motive_sb(args) -> dict:
    if (args.klass is None) == (args.order is None):
        raise InputError("give exactly one of --class or --order")
    klass = brauer.parse_class(args.klass) if args.klass is not None else brauer.abstract_class(args.order)
    nc = motive.severi_brauer_nc_motive(klass, args.degree)
    return {
        "class": klass.to_json(),
        "degree": args.degree,
        "nc_motive": nc.to_json(),
        "rendered": str(nc),
        "unit_type": motive.is_unit_type(nc),
        "decomposable": nc.is_decomposable(),
        "chow_indecomposable_by_citation": motive.chow_indecomposable_by_citation(klass, args.degree, args.division),
    }


def cmd_motive_reconstruct(args) -> dict:
    if args.m < 1 or args.d < 0 or args.trials < 0:
        raise InputError("need m >= 1, d >= 0, trials >= 0")
    rng = random.Random(args.seed)
    failures = []
    last = None
    for t in range(args.trials):
        hidden, found = motive.reconstruction_trial(args.m, args.d, rng)
        last = {"hidden": list(hidden), "reconstructed": list(found)}
        if hidden != found:
            failures.append({"trial": t, **last})
    if failures:
        raise InvariantViolation(f"{len(failures)} reconstruction failures, first: {failures[0]}")
    return {"m": args.m, "d": args.d, "seed": args.seed, "trials": args.trials, "passes": args.trials, "last": last}


def cmd_chern(args) -> dict:
    rows = []
    for m in range(1, args.max_degree + 1):
        s = charclasses.chern_numerator(m)
        rows.append({"degree": m, "power_sum": str(s), "factorial": str(math.factorial(m)), "ch": str(s * Fraction(1, math.factorial(m)))})
    return {"max_degree": args.max_degree, "terms": rows}


def cmd_todd(args) -> dict:
    if args.max_degree < 0:
        raise InputError("--max-degree must be non-negative")
    rows = []
    for m in range(args.max_degree + 1):
        td = charclasses.todd_polynomial(m)
        den = td.denominator_lcm()
        T = arith.todd_denominator(m)
        rows.append({"degree": m, "todd": str(td), "denominator": str(den), "T_m": str(T), "divides": T % den == 0})
    return {"max_degree": args.max_degree, "terms": rows}


def cmd_ring_invertible(args) -> dict:
    tag = _tag(args.invert)
    x = arith.parse_rational(args.value)
    in_ring = tag.contains(x)
    return {
        "value": arith.format_rational(x),
        "tag": tag.to_json(),
        "in_ring": in_ring,
        "invertible": tag.is_unit(x),
        "uninverted_denominator_primes": arith.uninvertible_primes(x, tag),
        "uninverted_numerator_primes": [] if x == 0 else arith.uninvertible_primes(1 / x, tag),
    }


def cmd_grr_euler(args) -> dict:
    X = _schemes(args.scheme)
    x = grr.parse_bundle(args.bundle, X)
    return {"scheme": str(X), "bundle": args.bundle, "euler_characteristic": grr.euler_characteristic(x, X)}


def cmd_grr_chiso(args) -> dict:
    return grr.ch_iso_check(_schemes(args.scheme), _tag(args.invert)).to_json()


def cmd_grr_todd(args) -> dict:
    X = _schemes(args.scheme)
    tag = _tag(args.invert) if args.invert is not None else arith.QQ
    td = grr.todd_of(X, tag)
    return {"scheme": str(X), "tag": tag.to_json(), "todd": str(td), "coefficients": td.to_json()}


def cmd_selftest(args) -> dict:
    if args.trials < 0:
        raise InputError("--trials must be non-negative")
    rng = random.Random(args.seed)
    recon_pass = law_pass = 0
    for _ in range(args.trials):
        m, d = rng.randint(1, 6), rng.randint(0, 4)
        hidden, found = motive.reconstruction_trial(m, d, rng)
        recon_pass += hidden == found
        law_pass += motive.orbit_law_trial(rng)
    out = {
        "seed": args.seed,
        "trials": args.trials,
        "reconstruction": {"passes": recon_pass, "failures": args.trials - recon_pass},
        "orbit_laws": {"passes": law_pass, "failures": args.trials - law_pass},
    }
    if recon_pass != args.trials or law_pass != args.trials:
        raise InvariantViolation(json.dumps(out, sort_keys=True))
    return out


# -- text rendering ---------------------------------------------------------------


def _render_text(command: str, result: dict) -> str:
    if "rendered" in result:
        return result["rendered"]
    if command in ("todd", "chern"):
        key = "todd" if command == "todd" else "ch"
        lines = []
        for r in result["terms"]:
            extra = f"    [denominator {r['denominator']}, T_m {r['T_m']}]" if command == "todd" else ""
            lines.append(f"{r['degree']}: {r[key]}{extra}")
        return "\n".join(lines)
    return "\n".join(f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in result.items())


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncmotive", description="Exact calculators for motives of quadrics, Severi-Brauer varieties and toy schemes.")
    p.add_argument("--format", choices=("json", "text"), default="json", help="output format (default json)")
    sub = p.add_subparsers(dest="group", required=True)

    def leaf(parent, name: str, fn: Callable, help: str):
        sp = parent.add_parser(name, help=help)
        sp.set_defaults(handler=fn)
        return sp

    qf = sub.add_parser("qf", help="quadratic forms over Q").add_subparsers(dest="action", required=True)
    a = leaf(qf, "analyze", cmd_qf_analyze, "invariants, anisotropy and the I^3 test")
    a.add_argument("--form", required=True, help='diagonal "1,1,1,-7" or JSON {"gram": [[...]]}')
    a = leaf(qf, "pfister", cmd_qf_pfister, "analyze the Pfister form <<a_1,...,a_k>>")
    a.add_argument("--slots", required=True, help='comma separated, e.g. "1,1,1"')

    mo = sub.add_parser("motive", help="noncommutative motives and twist reconstruction").add_subparsers(dest="action", required=True)
    a = leaf(mo, "quadric", cmd_motive_quadric, "NC motive of the quadric of a form")
    a.add_argument("--form", required=True)
    a = leaf(mo, "sb", cmd_motive_sb, "NC motive of a Severi-Brauer variety")
    a.add_argument("--class", dest="klass", help='Brauer class of Q: "(a,b)" or "inf:1/2,2:1/2"')
    a.add_argument("--order", type=int, help="abstract class of this order (field unspecified)")
    a.add_argument("--degree", type=int, required=True)
    a.add_argument("--division", action="store_true", help="declare the algebra a division algebra")
    a = leaf(mo, "reconstruct", cmd_motive_reconstruct, "randomized twist reconstruction")
    a.add_argument("--m", type=int, required=True)
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--trials", type=int, default=1)

    a = leaf(sub, "chern", cmd_chern, "Chern character in terms of Chern classes")
    a.add_argument("--max-degree", type=int, default=4)
    a = leaf(sub, "todd", cmd_todd, "Todd polynomials with their denominators")
    a.add_argument("--max-degree", type=int, default=4)

    ring = sub.add_parser("ring", help="arithmetic of Z[1/N]").add_subparsers(dest="action", required=True)
    a = leaf(ring, "invertible", cmd_ring_invertible, "is a rational a unit of Z[1/N]?")
    a.add_argument("--value", required=True)
    a.add_argument("--invert", required=True, help="N, or Q for the rationals")

    g = sub.add_parser("grr", help="toy Riemann-Roch on products of projective spaces").add_subparsers(dest="action", required=True)
    a = leaf(g, "euler", cmd_grr_euler, "Euler characteristic of a line bundle")
    a.add_argument("--scheme", required=True, help='"P2", "P1xP1", "pt"')
    a.add_argument("--bundle", required=True, help='"O(3)" or "O(1,-2)"')
    a = leaf(g, "chiso", cmd_grr_chiso, "is ch an isomorphism over Z[1/N]?")
    a.add_argument("--scheme", required=True)
    a.add_argument("--invert", default="1")
    a = leaf(g, "todd", cmd_grr_todd, "Todd class of a toy scheme")
    a.add_argument("--scheme", required=True)
    a.add_argument("--invert", default=None)

    a = leaf(sub, "selftest", cmd_selftest, "seeded reconstruction and orbit-law suites")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--trials", type=int, default=100)
    return p


def _command_name(args) -> str:
    return " ".join(x for x in (args.group, getattr(args, "action", None)) if x)


def _emit_error(code: int, exc: BaseException, stream) -> int:
    payload = {"schema_version": SCHEMA_VERSION, "error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    if hasattr(exc, "prime"):
        payload["error"]["prime"] = exc.prime
    print(json.dumps(payload, sort_keys=True), file=stream)
    return code


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    command = _command_name(args)
    try:
        result = args.handler(args)
    except InvariantViolation as exc:
        return _emit_error(3, exc, stderr)
    except (InputError, ValueError, ZeroDivisionError) as exc:
        return _emit_error(2, exc, stderr)
    if args.format == "text":
        print(_render_text(command, result), file=stdout)
    else:
        print(json.dumps({"schema_version": SCHEMA_VERSION, "command": command, "result": result}, sort_keys=True), file=stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
