"""Command-line front end.

Every command writes one deterministic report (JSON by default, CSV with
--format csv) and exits with 0 when all checks pass, 1 when some check
fails and 2 on malformed input or violated hypotheses.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from fractions import Fraction
from math import inf

from . import bounds as B
from .errors import (CapExceeded, DivergenceDetected, DomainError, LevelMismatch, NotInvertible,
                     NotPsiZero, PrecisionExhausted, PrtowerError)
from .padic import PadicContext

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _enc(x):
    if isinstance(x, float) and x == inf:
        return "inf"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    return x


def _flatten(prefix: str, x, out: list):
    if isinstance(x, dict):
        for k in sorted(x, key=str):
            _flatten(f"{prefix}.{k}" if prefix else str(k), x[k], out)
    elif isinstance(x, list) and any(isinstance(v, (dict, list)) for v in x):
        for i, v in enumerate(x):
            _flatten(f"{prefix}.{i}", v, out)
    else:
        out.append((prefix, json.dumps(x) if isinstance(x, list) else x))


def render(report, fmt: str, table: list | None = None) -> str:
    if fmt == "json":
        return json.dumps(_enc(report), sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if table is not None:
        cols = ["p", "k", "e", "n", "new_exponent", "laurent_exponent", "winner"]
        w.writerow(cols)
        for row in table:
            w.writerow([row[c] for c in cols])
    else:
        rows: list = []
        _flatten("", _enc(report), rows)
        w.writerow(["key", "value"])
        w.writerows(rows)
    return buf.getvalue()


def _context(args, doc: dict | None = None) -> PadicContext:
    doc = doc or {}
    mdoc = doc.get("module") if isinstance(doc.get("module"), dict) else {}
    if doc.get("p") is None:
        found = mdoc.get("p", (mdoc.get("modular_form") or {}).get("p"))
        if found is not None:
            doc = dict(doc, p=found)
    p = args.p if args.p is not None else doc.get("p")
    if p is None:
        raise InputError("no prime given (use --p or a 'p' field)")
    if args.p is not None and doc.get("p") is not None and int(doc["p"]) != args.p:
        raise InputError(f"--p {args.p} does not match the instance prime {doc['p']}")
    N = args.precision if args.precision is not None else int(doc.get("N", 64))
    D = args.degree if args.degree is not None else doc.get("D")
    cap = args.tower_cap if args.tower_cap is not None else doc.get("tower_cap")
    u = args.u if args.u is not None else doc.get("u")
    return PadicContext(int(p), int(N), 1, None if D is None else int(D),
                        None if cap is None else int(cap), None if u is None else int(u))


def _load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("instance must be a JSON object")
    return doc


def _module_and_g(doc: dict, ctx: PadicContext):
    from .dieudonne import DieudonneModule, modular_form_module
    from .solver import ModuleSeries
    mdoc = doc.get("module")
    if not isinstance(mdoc, dict):
        raise InputError("instance needs a 'module' object")
    if "modular_form" in mdoc:
        mf = mdoc["modular_form"]
        module = modular_form_module(ctx.p, int(mf["k"]), Fraction(mf.get("a_p", 0)),
                                     Fraction(mf.get("eps_p", 1)), ctx=ctx)
    else:
        mdoc = dict(mdoc)
        mdoc.setdefault("p", ctx.p)
        module = DieudonneModule.from_json(mdoc, ctx)
    if "g" not in doc or not isinstance(doc["g"], list) or len(doc["g"]) != module.rank:
        raise InputError("'g' must list one {exponent: coefficient} object per basis vector")
    parts = [{int(k): Fraction(v) for k, v in comp.items()} for comp in doc["g"]]
    return module, ModuleSeries.from_psi_zero(module, parts, ctx)


# -- commands ----------------------------------------------------------------

def cmd_bounds(args):
    if args.general:
        rows = []
        report = {"mode": "general", "rows": rows}
        for n in range(1, args.n_max + 1):
            b = B.BoundInputs(args.p, n, args.d, args.d_prime, args.r, args.s1, args.s2, args.det_val,
                              args.base_degree)
            rows.append({"n": n, "general_exponent": B.general_bound_exponent(b),
                         "index_exponent": B.index_bound_exponent(b),
                         "index_sum_identity": B.index_sum_identity_check(b),
                         "stable_exponent": B.stable_bound_exponent(b)})
        ok = all(r["index_sum_identity"] for r in rows)
        return report, None, ok
    if args.k is None:
        raise InputError("bounds needs --k (or --general)")
    table = B.comparison_table(args.p, args.k, args.e, args.n_max, args.base_degree)
    report = {"p": args.p, "k": args.k, "e": args.e, "rows": table,
              "crossover": B.crossover(args.p, args.k, args.e, args.n_max, args.base_degree)}
    for row in table:
        b = B.modular_form_inputs(args.p, args.k, args.e, row["n"])
        row["identity_ok"] = B.general_bound_exponent(b) == row["new_exponent"]
    ok = all(r["identity_ok"] for r in table)
    return report, table, ok


def cmd_solve(args):
    from .solver import (solve, theta_direct, theta_levels_via_solver, trace_identity_defect,
                         valuation_bound_check)
    doc = _load(args.instance)
    ctx = _context(args, doc)
    module, g = _module_and_g(doc, ctx)
    levels = args.levels if args.levels is not None else int(doc.get("levels", 2))
    levels = min(levels, ctx.tower_cap)
    t0 = time.perf_counter()
    G, rep = solve(g)
    report = {"solve": rep.to_json(), "checks": {}}
    checks = report["checks"]
    checks["solve_residual"] = rep.residual_valuation >= ctx.N - rep.loss_bound
    checks["psi_invariance"] = bool(rep.psi_ok)
    if levels >= 1:
        via = theta_levels_via_solver(g, levels)
        theta = {}
        for n in range(1, levels + 1):
            direct = theta_direct(g, n)
            agree = direct.agreement(via[n - 1])
            theta[n] = {"direct": direct.to_json(), "agreement": agree,
                        "certified": via[n - 1].certified}
            checks[f"theta_oracle_level_{n}"] = agree >= min(ctx.N - 8, via[n - 1].certified)
        report["theta"] = theta
        for n in range(1, levels):
            checks[f"trace_step_level_{n}"] = trace_identity_defect(g, n) >= ctx.N
        vb = valuation_bound_check(g, levels)
        report["valuation_bound"] = {str(i): {"valuation": v, "bound": b} for i, (v, b) in vb.per_level.items()}
        checks["valuation_bound"] = vb.ok
    if args.timing:
        report["seconds"] = round(time.perf_counter() - t0, 3)
    return report, None, all(checks.values())


def cmd_qsystem(args):
    from .qsystems import generate, verify, verify_scheduled
    doc = _load(args.instance)
    ctx = _context(args, doc)
    module, g = _module_and_g(doc, ctx)
    if "Q" not in doc:
        raise InputError("qsystem instance needs 'Q' (coefficients a_0..a_N)")
    Q = [Fraction(a) for a in doc["Q"]]
    m = int(doc.get("m", 0))
    n_max = int(doc.get("n_max", len(Q)))
    qs = generate(g, Q, m, n_max)
    rep = verify(qs)
    report = {"family": qs.to_json(), "verify": rep.to_json()}
    ok = rep.ok
    for kind in ("b_poly", "r_poly"):
        key = f"{kind}_Q"
        if key in doc:
            res = verify_scheduled(qs, [Fraction(a) for a in doc[key]], kind)
            report[f"{kind}_relation_ok"] = {str(n): v for n, v in res.items()}
            ok = ok and all(res.values())
    return report, None, ok


def cmd_lemmas(args):
    from .iwasawa import lemma_A2_check, lemma_A3_check
    from .padic import lemma_A1_check
    ctx = _context(args)
    p = ctx.p
    n_max = args.n_max
    results = {}
    a1 = {}
    for vb in (0, 1):
        for beta in (1, 2, p - 1, 1 + p):
            b = beta * p ** vb
            for n in range(0, n_max + 1):
                r = lemma_A1_check(b, n, ctx)
                a1[f"beta={b},n={n}"] = {"valuation_ok": r.valuation_ok, "congruence_ok": r.congruence_ok,
                                         "truncated_congruence_ok": r.truncated_congruence_ok}
    results["lemma_A1_check"] = a1
    a2 = {}
    for n in range(0, n_max):
        for k in range(n + 1, n_max + 1):
            for i in (-1, 0, 1):
                for j in (-1, 0, 1):
                    try:
                        r = lemma_A2_check(ctx, k, i, n, j)
                    except CapExceeded:
                        continue
                    a2[f"k={k},i={i},n={n},j={j}"] = {"is_constant": r.is_constant,
                                                      "in_one_plus_pn": r.in_one_plus_pn}
    results["lemma_A2_check"] = a2
    a3 = {}
    for i in range(-3, 4):
        for j in range(-3, 4):
            a3[f"i={i},j={j}"] = lemma_A3_check(ctx, i, j, min(n_max, ctx.tower_cap)).ok
    results["lemma_A3_check"] = a3
    ok = (all(v["valuation_ok"] and v["congruence_ok"] for v in a1.values())
          and all(v["is_constant"] and v["in_one_plus_pn"] for v in a2.values())
          and all(a3.values()))
    return results, None, ok


def _parse_element(ctx, text: str):
    from .iwasawa import IwasawaElement
    try:
        raw = json.loads(text)
        terms = {int(k): Fraction(v) for k, v in raw.items()}
    except (json.JSONDecodeError, AttributeError, ValueError) as exc:
        raise InputError(f"--element must be a JSON object {{gamma_power: coefficient}}: {exc}") from exc
    return IwasawaElement.from_gamma_powers(ctx, terms)


def _signed(terms: dict, mod: int, scale: int) -> dict:
    return {str(a): str(Fraction(b - mod if b > mod // 2 else b, scale)) for a, b in sorted(terms.items())}


def cmd_mellin(args):
    from .iwasawa import distinguished, divisibility_test, mellin, mellin_inv_mod
    ctx = _context(args)
    if args.omega is not None:
        n, m = args.omega
        f = distinguished(ctx, "omega", n, m)
        if args.element is not None:
            f = f * _parse_element(ctx, args.element)
    elif args.element is not None:
        f = _parse_element(ctx, args.element)
    else:
        raise InputError("mellin needs --element and/or --omega")
    h = mellin(f)
    report = {"element": _signed(f.gamma_power_coefficients(), f.mod, ctx.p ** f.shift),
              "mellin": _signed(h.terms, ctx.p ** (ctx.N + h.shift), ctx.p ** h.shift),
              "divisibility": {}}
    for n in range(1, min(args.n_max, ctx.tower_cap) + 1):
        for m in range(0, args.m_max + 1):
            report["divisibility"][f"n={n},m={m}"] = divisibility_test(f, n, m)
    n_rt = min(args.n_max, ctx.tower_cap)
    back = mellin_inv_mod(h, n_rt)
    ok = back == f.reduce(n_rt, 0)
    report["round_trip_level"] = n_rt
    report["round_trip_ok"] = ok
    return report, None, ok


def cmd_wach(args):
    from .wach import WachData, cor43_check, first_iterate, solve_M
    doc = _load(args.instance)
    ctx = _context(args, doc)
    if "A0" not in doc or "weights" not in doc:
        raise InputError("wach instance needs 'A0' and 'weights'")
    w = WachData.from_json(ctx, doc, strict=bool(doc.get("strict", True)))
    target = doc.get("pi_target")
    report = {"data": w.to_json()}
    try:
        M, rep = solve_M(w, None if target is None else int(target))
    except DivergenceDetected as exc:
        report["diverged"] = str(exc)
        return report, None, False
    report["solve"] = rep.to_json()
    levels = [int(n) for n in doc.get("levels", [1, 2])]
    report["cor43_check"] = {str(n): cor43_check(M, n, w.r_d) for n in levels}
    ok = rep.residual_valuation >= ctx.N - rep.loss_bound and all(report["cor43_check"].values())
    report["congruence_ok"] = rep.congruence_ok
    return report, None, ok


COMMANDS = {"bounds": cmd_bounds, "solve": cmd_solve, "qsystem": cmd_qsystem,
            "lemmas": cmd_lemmas, "mellin": cmd_mellin, "wach": cmd_wach}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, help="odd prime")
    common.add_argument("--precision", type=int, help="p-adic precision N")
    common.add_argument("--degree", type=int, help="pi-adic degree cap D")
    common.add_argument("--tower-cap", type=int, help="largest cyclotomic level")
    common.add_argument("--u", type=int, help="cyclotomic character value of the generator of Gamma")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(prog="prtower", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", parents=[common], help="Tamagawa bound exponents")
    b.add_argument("--k", type=int)
    b.add_argument("--e", type=int, default=1)
    b.add_argument("--n-max", type=int, default=6)
    b.add_argument("--base-degree", type=int, default=1)
    b.add_argument("--general", action="store_true", help="general bound from r, s1, s2, d', det_val")
    b.add_argument("--d", type=int, default=2)
    b.add_argument("--d-prime", type=int, default=1)
    b.add_argument("--r", type=int, default=1)
    b.add_argument("--s1", type=int, default=0)
    b.add_argument("--s2", type=int, default=0)
    b.add_argument("--det-val", type=int, default=0)

    s = sub.add_parser("solve", parents=[common], help="solve (1 - phi) G = g for an instance")
    s.add_argument("instance")
    s.add_argument("--levels", type=int)
    s.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")

    q = sub.add_parser("qsystem", parents=[common], help="generate and verify a Q-system family")
    q.add_argument("instance")

    lm = sub.add_parser("lemmas", parents=[common], help="valuation and congruence lemma grids")
    lm.add_argument("--n-max", type=int, default=3)

    me = sub.add_parser("mellin", parents=[common], help="Mellin transform and divisibility tests")
    me.add_argument("--element", help='JSON object {gamma_power: coefficient}, e.g. \'{"1": 1, "0": -1}\'')
    me.add_argument("--omega", type=int, nargs=2, metavar=("N", "M"), help="multiply by omega_{N,M}")
    me.add_argument("--n-max", type=int, default=2)
    me.add_argument("--m-max", type=int, default=1)

    wa = sub.add_parser("wach", parents=[common], help="solve P M = phi(M) A and check divisibility")
    wa.add_argument("instance")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, table, ok = COMMANDS[args.command](args)
    except (InputError, DomainError, LevelMismatch, NotPsiZero, KeyError, ValueError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PrecisionExhausted, DivergenceDetected, NotInvertible, CapExceeded, PrtowerError) as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = render(report, args.format, table)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if not ok:
        print(f"check failed: {args.command} report contains failing checks", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL
