"""Command-line front end: ``triakis <command> [options]``.

Exit codes: 0 when every cross-check passes, 1 when one fails, 2 on a
usage error.  JSON output carries a schema version header and contains no
timestamps or timings, so identical invocations give identical bytes.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import checks
from .closed_forms import LEADING_KEY, coefficient_closed_forms, listed
from .critical import critical_scan
from .geometry import Family, GeometryError, build
from .harmonic import (GUARD_DEGREES, SPACE_INFO, SYSTEMS, Space, equivalence_check, solve)
from .invariants import decompose, symmetry_basis, tau_series
from .meanvalue import PASS_TOL, verify_space
from .polycore import Poly, e2, is_exact, to_float

SCHEMA = "triakis-report/1"
SNAP_DISTANCE = mpf("1e-5")

# JSON Schema of the envelope shared by every command's JSON output
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "command", "config", "result"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA},
        "command": {"enum": ["analyze", "coeffs", "critical", "harmonics", "mvp", "check", "paper-check",
                             "dump-geometry"]},
        "config": {"type": "object"},
        "result": {"type": "object"},
    },
}
MIN_PRECISION = 64


class UsageError(Exception):
    pass


# -- argument types ----------------------------------------------------------

def family_arg(text: str) -> Family:
    try:
        return Family.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def scalar_arg(text: str):
    """Decimals and p/q are read exactly; r must be positive."""
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a decimal or p/q number: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"r must be positive, got {text}")
    return value


def k_arg(text: str) -> list:
    if text == "all":
        return [0, 1, 2, 3]
    try:
        ks = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be 0, 1, 2, 3, a comma list or 'all': {text!r}") from None
    if not ks or any(k not in (0, 1, 2, 3) for k in ks):
        raise argparse.ArgumentTypeError(f"k must be 0, 1, 2 or 3: {text!r}")
    return ks


def scan_arg(text: str) -> list:
    try:
        lo, hi, step = (Fraction(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"scan must be lo:hi:step, got {text!r}") from None
    if step <= 0 or lo <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("scan needs 0 < lo <= hi and step > 0")
    out = []
    r = lo
    while r <= hi:
        out.append(r)
        r += step
    return out


def range_arg(text: str) -> list:
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split(".."))
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"degrees must look like 2..8 or 2,4,6: {text!r}") from None


def positive_float(text: str) -> mpf:
    try:
        v = mpf(text)
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def precision_arg(text: str) -> int:
    try:
        bits = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"precision must be an integer number of bits: {text!r}") from None
    if bits < MIN_PRECISION:
        raise argparse.ArgumentTypeError(f"precision must be at least {MIN_PRECISION} bits")
    return bits


# -- helpers -----------------------------------------------------------------

def _num(v, digits: int = 15) -> str:
    return str(v) if is_exact(v) else mpmath.nstr(v, digits)


def _flat_ks(groups) -> list:
    return sorted({k for g in groups for k in g})


def _r_values(args) -> list:
    values = list(args.r or [])
    if getattr(args, "scan", None):
        values += args.scan
    if not values:
        raise UsageError("give --r or --scan")
    return values


def snap(family: Family, k: int, r, prec: int):
    """Replace r by the certified critical value it abbreviates, if any lies within 1e-5."""
    for c in critical_scan(family, k, prec).critical:
        if abs(to_float(r) - c.r) < SNAP_DISTANCE and to_float(r) != c.r:
            return c.r, r
    return r, None


def _cell_header(family, k, r, snapped_from) -> dict:
    out = {"family": family.value, "k": k, "r": _num(r)}
    if snapped_from is not None:
        out["snapped_from"] = _num(snapped_from)
    return out


# -- commands ----------------------------------------------------------------

def cmd_analyze(args) -> tuple:
    cells, ok = [], True
    for k in _flat_ks(args.k):
        for r0 in _r_values(args):
            r, snapped = snap(args.family, k, r0, args.precision)
            inst = build(args.family, r, args.precision)
            eq = equivalence_check(args.family, k, r, max_tau_degree=args.max_tau_degree, prec=args.precision,
                                   instance=inst)
            cell = _cell_header(args.family, k, r, snapped)
            cell.update({key: v for key, v in eq.to_json().items() if key not in ("family", "k", "r")})
            diagnostics = []
            if eq.space is Space.INDETERMINATE:
                diagnostics.append("zero pattern of the decision coefficients is indeterminate")
            else:
                if not eq.annihilated:
                    diagnostics.append("skeleton operators do not annihilate the generator")
                gen = SPACE_INFO[eq.space][2]
                rep = verify_space(inst, k, [(gen.__name__, gen())], {"e2": e2()}, pass_tol=args.tol)
                cell["mean_value"] = {
                    "checked": gen.__name__,
                    "max_defect": mpmath.nstr(max(rep.defects.values()), 5),
                    "e2_defect": mpmath.nstr(rep.counterexamples["e2"], 5),
                    "ok": rep.ok,
                }
                diagnostics += rep.failures
            cell["diagnostics"] = diagnostics
            cell["ok"] = not diagnostics
            ok = ok and cell["ok"]
            cells.append(cell)
    return {"cells": cells}, ok


def _text_analyze(result) -> str:
    lines = []
    for c in result["cells"]:
        r = c["r"] + (f" (snapped from {c['snapped_from']})" if "snapped_from" in c else "")
        lines.append(f"{c['family']} k={c['k']} r={r}")
        lines.append(f"  space {c['space']}  dim {c['dimension']}  generator {c['generator']}")
        lines.append("  coefficients " + "  ".join(f"a{m}={v}" for m, v in c["coefficients"].items()))
        lines.append("  pattern " + "  ".join(f"a{m}:{p}" for m, p in c["pattern"].items()))
        if "mean_value" in c:
            mv = c["mean_value"]
            lines.append(f"  mean value: max defect {mv['max_defect']}, e2 defect {mv['e2_defect']}")
        lines.append(f"  {'ok' if c['ok'] else 'FAILED: ' + '; '.join(c['diagnostics'])}")
    return "\n".join(lines)


def cmd_coeffs(args) -> tuple:
    degrees = args.m or [2, 3, 4, 5, 6, 7, 8]
    if min(degrees) < 1:
        raise UsageError("degrees must be at least 1")
    cells, ok = [], True
    for k in _flat_ks(args.k):
        kk = 2 if k == 3 else k
        for r0 in _r_values(args):
            r, snapped = snap(args.family, k, r0, args.precision)
            inst = build(args.family, r, args.precision)
            basis = symmetry_basis(inst)
            series = tau_series(inst, k, max(degrees))
            rows = []
            with mpmath.workprec(args.precision):
                for m in degrees:
                    t = series[m]
                    dec = decompose(t.poly, basis, scale=None if t.poly.exact else t.magnitude)
                    row = {"m": m, "terms": {_key_name(basis, key): _num(v) for key, v in dec.coefficients.items()}}
                    if (args.family, kk, m) in listed():
                        lead = dec[LEADING_KEY[args.family][m]]
                        closed = coefficient_closed_forms(args.family, kk, m, r, args.precision)
                        diff = abs(to_float(lead) - to_float(closed))
                        agree = diff <= mpf("1e-10") * max(1, abs(to_float(closed)))
                        row["closed_form"] = {"term": _key_name(basis, LEADING_KEY[args.family][m]),
                                              "value": _num(closed), "agrees": agree}
                        ok = ok and agree
                    rows.append(row)
            cell = _cell_header(args.family, k, r, snapped)
            cell["basis"] = basis.group.value
            cell["degrees"] = rows
            cells.append(cell)
    return {"cells": cells}, ok


def _key_name(basis, key) -> str:
    names = ("e2", "e3", "e4") if basis.group.value == "A3" else ("e2", "e4", "e6")
    parts = [n if p == 1 else f"{n}^{p}" for n, p in zip(names, key) if p]
    return "*".join(parts) or "1"


def _text_coeffs(result) -> str:
    lines = []
    for c in result["cells"]:
        lines.append(f"{c['family']} k={c['k']} r={c['r']}  basis {c['basis']}")
        for row in c["degrees"]:
            terms = "  ".join(f"{n}: {v}" for n, v in row["terms"].items()) or "0"
            lines.append(f"  m={row['m']}  {terms}")
            if "closed_form" in row:
                cf = row["closed_form"]
                lines.append(f"        closed form {cf['term']} = {cf['value']}  "
                             f"{'agrees' if cf['agrees'] else 'DISAGREES'}")
    return "\n".join(lines)


def cmd_critical(args) -> tuple:
    ks = _flat_ks(args.k) if args.k else [0, 1, 2, 3]
    rows = []
    for k in ks:
        scan = critical_scan(args.family, k, args.precision)
        rows.append({"k": k, "candidates": [c.to_json() for c in scan.candidates],
                     "critical": [mpmath.nstr(c.r, 15) for c in scan.critical]})
    return {"family": args.family.value, "rows": rows}, True


def _text_critical(result) -> str:
    lines = [f"family {result['family']}",
             f"{'k':>2}  {'critical r':<18} {'bracket':<44} {'vanishing':<22} {'companions':<40} space"]
    for row in result["rows"]:
        if not row["candidates"]:
            lines.append(f"{row['k']:>2}  none")
        for c in row["candidates"]:
            lo, hi = c["bracket"]
            bracket = lo if lo == hi else f"[{float(Fraction(lo)):.13f}, {float(Fraction(hi)):.13f}]"
            van = f"a{c['vanishing_coefficient']['m']}={c['vanishing_coefficient']['value']}"
            comp = " ".join(f"a{m}={v}" for m, v in c["companions"].items())
            space = f"{c['space']} dim {c['dimension']}" if c["critical"] else f"not critical: {c['note']}"
            lines.append(f"{row['k']:>2}  {c['r']:<18} {bracket:<44} {van:<22} {comp:<40} {space}")
    return "\n".join(lines)


def cmd_harmonics(args) -> tuple:
    system = SYSTEMS[args.system]()
    top = args.max_degree if args.max_degree is not None else 13 + GUARD_DEGREES
    basis = solve(system, top)
    out = {"system": args.system, "generators": [g.format() for g in system.generators],
           "max_degree": top, "total_dim": basis.total_dim, "top_degree": basis.top_degree,
           "dims": {str(d): n for d, n in basis.dims.items()}}
    if args.emit_basis:
        out["basis"] = basis.to_json()["basis"]
    return out, True


def _text_harmonics(result) -> str:
    lines = [f"system {result['system']}: " + ", ".join(result["generators"]),
             f"solved through degree {result['max_degree']}: dimension {result['total_dim']}, "
             f"top degree {result['top_degree']}",
             "dims " + "  ".join(f"{d}:{n}" for d, n in result["dims"].items())]
    for d, polys in result.get("basis", {}).items():
        lines.append(f"degree {d}:")
        lines += [f"  {Poly.from_json(p).format()}" for p in polys]
    return "\n".join(lines)


def cmd_mvp(args) -> tuple:
    reports, ok = [], True
    system = SYSTEMS[args.space]()
    for k in _flat_ks(args.k):
        for r0 in _r_values(args):
            r, snapped = snap(args.family, k, r0, args.precision)
            inst = build(args.family, r, args.precision)
            top = args.max_degree if args.max_degree is not None else 13 + GUARD_DEGREES
            basis = solve(system, top)
            rep = verify_space(inst, k, basis, {"e2": e2()}, pass_tol=args.tol)
            body = _cell_header(args.family, k, r, snapped)
            body.update({key: v for key, v in rep.to_json().items() if key not in ("family", "k", "r")})
            body["space"] = args.space
            reports.append(body)
            ok = ok and rep.ok
    return {"reports": reports}, ok


def _text_mvp(result) -> str:
    lines = []
    for rep in result["reports"]:
        lines.append(f"{rep['family']} k={rep['k']} r={rep['r']}  space {rep['space']}  members {rep['members']}")
        lines.append(f"  measure {rep['measure']}  max member defect {rep['max_member_defect']} "
                     f"(pass < {rep['pass_tol']})")
        lines += [f"  counterexample {n}: {v}" for n, v in rep["counterexamples"].items()]
        lines.append(f"  {'ok' if rep['ok'] else 'FAILED: ' + '; '.join(rep['failures'])}")
        lines.append(f"  note: {rep['note']}")
    return "\n".join(lines)


def cmd_check(args) -> tuple:
    only = set(args.only) if args.only else None
    if only and not only <= set(checks.CHECKS):
        raise UsageError(f"unknown check(s): {', '.join(sorted(only - set(checks.CHECKS)))}")
    results = checks.run_all(args.precision, only)
    body = {"checks": [], "failures": sum(not r.passed for r in results)}
    for r in results:
        j = r.to_json()
        j.pop("seconds")
        body["checks"].append(j)
    return body, body["failures"] == 0


def _text_check(result) -> str:
    lines = []
    for c in result["checks"]:
        n = len(c["items"])
        bad = [i for i in c["items"] if not i["passed"]]
        lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  {c['key']:<20} {c['title']}  ({n - len(bad)}/{n})")
        lines += [f"      warning: {w}" for w in c["warnings"]]
        for i in bad:
            lines.append(f"      {i['label']}: observed {i['observed']}, expected {i['expected']}")
    lines.append(f"{result['failures']} failing check(s)")
    return "\n".join(lines)


def cmd_dump_geometry(args) -> tuple:
    cells = []
    for r in _r_values(args):
        inst = build(args.family, r, args.precision)
        cells.append(inst.to_json())
    return {"instances": cells}, True


def _text_geometry(result) -> str:
    lines = []
    for inst in result["instances"]:
        lines.append(f"{inst['family']} r={inst['r']}: {len(inst['vertices'])} vertices, "
                     f"{len(inst['edges'])} edges, {len(inst['faces'])} faces, {len(inst['flags'])} flags")
        lines += [f"  {k} = ({', '.join(v)})" for k, v in inst["vertices"].items()]
        lines.append("  incidence " + "  ".join(f"{k}={v[:14]}" for k, v in inst["incidence"].items()))
    return "\n".join(lines)


COMMANDS = {
    "analyze": (cmd_analyze, _text_analyze),
    "coeffs": (cmd_coeffs, _text_coeffs),
    "critical": (cmd_critical, _text_critical),
    "harmonics": (cmd_harmonics, _text_harmonics),
    "mvp": (cmd_mvp, _text_mvp),
    "check": (cmd_check, _text_check),
    "paper-check": (cmd_check, _text_check),
    "dump-geometry": (cmd_dump_geometry, _text_geometry),
}


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=precision_arg, default=100, help="working precision in bits (>= 64)")
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--tol", type=positive_float, default=PASS_TOL,
                        help="mean value pass tolerance (default 1e-9)")

    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", type=family_arg, required=True, help="tetra or octa")

    cell = argparse.ArgumentParser(add_help=False)
    cell.add_argument("--k", type=k_arg, action="append", default=None,
                      help="skeleton dimension: 0..3, a comma list, or 'all' (repeatable)")
    cell.add_argument("--r", type=scalar_arg, action="append", help="parameter, decimal or p/q (repeatable)")
    cell.add_argument("--scan", type=scan_arg, help="parameter range lo:hi:step")

    p = argparse.ArgumentParser(prog="triakis", description="Polyhedral harmonics of triakis solids.")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common, fam, cell], help="identify the harmonic space per (k, r)")
    a.add_argument("--max-tau-degree", type=int, default=8)

    c = sub.add_parser("coeffs", parents=[common, fam, cell], help="invariant coefficients of skeleton polynomials")
    c.add_argument("--m", type=range_arg, help="degrees, e.g. 2..8")

    sub.add_parser("critical", parents=[common, fam, cell], help="critical values of r")

    h = sub.add_parser("harmonics", parents=[common], help="solve a PDE system degree by degree")
    h.add_argument("--system", choices=sorted(SYSTEMS), required=True)
    h.add_argument("--max-degree", type=int)
    h.add_argument("--emit-basis", action="store_true")

    m = sub.add_parser("mvp", parents=[common, fam, cell], help="mean value property of a space")
    m.add_argument("--space", choices=sorted(SYSTEMS), required=True)
    m.add_argument("--max-degree", type=int)

    for name in ("check", "paper-check"):
        chk = sub.add_parser(name, parents=[common], help="run the full reproduction suite")
        chk.add_argument("--only", nargs="+", metavar="CHECK", help=f"subset of: {', '.join(checks.CHECKS)}")
        chk.add_argument("--family", type=family_arg, help=argparse.SUPPRESS)

    g = sub.add_parser("dump-geometry", parents=[common, fam], help="vertices, feet, flags and incidence numbers")
    g.add_argument("--r", type=scalar_arg, action="append")
    g.add_argument("--scan", type=scan_arg)
    return p


def _validate(args):
    if args.command in ("analyze", "coeffs", "mvp") and not args.k:
        raise UsageError("give --k")
    if getattr(args, "max_degree", None) is not None and args.max_degree < 0:
        raise UsageError("--max-degree must be non-negative")
    if getattr(args, "max_tau_degree", 8) < 1:
        raise UsageError("--max-tau-degree must be at least 1")


def render(command: str, config: dict, result: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {"schema": SCHEMA, "command": command, "config": config, "result": result}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    return COMMANDS[command][1](result) + "\n"


def _config(args) -> dict:
    out = {}
    for key, v in sorted(vars(args).items()):
        if key in ("command", "out", "format"):
            continue
        if key == "k" and v:
            v = _flat_ks(v)
        elif isinstance(v, Family):
            v = v.value
        elif isinstance(v, list):
            v = [[str(x) for x in e] if isinstance(e, list) else str(e) for e in v]
        elif v is not None and not isinstance(v, (bool, int, str)):
            v = _num(v)
        out[key] = v
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _validate(args)
        mpmath.mp.prec = args.precision
        result, ok = COMMANDS[args.command][0](args)
    except (UsageError, GeometryError) as exc:
        print(f"triakis {args.command}: error: {exc}", file=sys.stderr)
        return 2
    text = render(args.command, _config(args), result, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
