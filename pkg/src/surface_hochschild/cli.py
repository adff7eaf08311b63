"""Batch front end: build models, compute Betti tables, print surface
product tables, and run verification suites.

One job per invocation; identical configurations produce byte-identical
output.  Results are emitted as JSON (structures) or CSV (tables) with an
embedded schema version.  The environment variable ``HH_THREADS`` caps
internal parallelism (the exact solvers are single-threaded, so the cap
is validated and echoed into the output metadata).

Exit codes: 0 on success, 1 when a verification suite fails, 2 on a
usage or configuration error.
"""

import argparse
import csv
import io
import json
import os
import sys

from .exactla import ONE, QQ
from .gca import free_gcda, module_over_self
from .homology import betti, completeness_bound
from .hochschild import (
    Cochain, build_complex, cochain_D, cup_genus0, cup_mixed, cup_positive,
    cup_tilde, dual_basis_cochain, enumerate_atuples, eval_pieces,
    is_degenerate_tuple, mccarthy_D2, pushforward_chain)
from .hkr import ClosedSurfaceAlgebra, eps_map, free_model, pi_wedge
from .simplicial import (
    collapse_to_sphere, pinch0_maps, pinch_map, sigma, sphere2,
    sphere_pinch, skeleton_inclusion, standard_model, to_json, validate,
    validate_map, wedge_circles)

SCHEMA = "surface-hochschild/1"

STANDARD_SPACES = ["pt", "interval", "circle", "square", "triangle",
                   "torus", "sphere2"]


class UsageError(Exception):
    """Configuration problem: reported on stderr with exit code 2."""


# ---------------------------------------------------------------------------
# configuration parsing
# ---------------------------------------------------------------------------

def parse_threads():
    raw = os.environ.get("HH_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("HH_THREADS must be an integer, got %r" % raw)
    if n < 1:
        raise UsageError("HH_THREADS must be positive, got %d" % n)
    return n


def parse_degrees(text):
    """Parse a degree range ``a..b`` (inclusive)."""
    parts = text.split("..")
    if len(parts) != 2:
        raise UsageError("degree range must look like a..b, got %r" % text)
    try:
        lo, hi = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError("degree range bounds must be integers: %r" % text)
    if lo > hi:
        raise UsageError("empty degree range %r" % text)
    return list(range(lo, hi + 1))


def build_model(space, genus, levels):
    if levels < 0:
        raise UsageError("levels must be nonnegative, got %d" % levels)
    if space == "sigma":
        if genus is None or genus < 1:
            raise UsageError("sigma needs --genus >= 1")
        return sigma(genus, levels)
    if space == "sphere2":
        return sphere2(levels)
    if space == "wedge_circles":
        if genus is None or genus < 1:
            raise UsageError("wedge_circles needs --genus >= 1 "
                             "(the number of circles)")
        return wedge_circles(genus, levels)
    if space in STANDARD_SPACES:
        return standard_model(space, levels)
    raise UsageError("unknown space %r (try one of %s, sigma, "
                     "wedge_circles)" % (space, ", ".join(STANDARD_SPACES)))


def algebra_from_spec(text):
    """Build a free algebra from an inline JSON descriptor or a file.

    The descriptor holds ``generators`` (label/degree pairs), a degree
    ``window`` and optionally a ``derivation``: for each generator label a
    list of ``[exponents, numerator, denominator]`` terms.
    """
    if text is None:
        doc = {"generators": [{"label": "x", "degree": 3}],
               "window": [0, 3]}
    else:
        if os.path.exists(text):
            with open(text) as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError("bad algebra JSON: %s" % exc)
    try:
        gens = [(g["label"], int(g["degree"])) for g in doc["generators"]]
        lo, hi = doc["window"]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError("bad algebra descriptor: %s" % exc)
    derivation = None
    if doc.get("derivation"):
        base = free_gcda(gens, (lo, hi))
        derivation = {}
        for lab, terms in sorted(doc["derivation"].items()):
            vec = {}
            for exps, num, den in terms:
                vec[base.index(tuple(exps))] = QQ(num, den)
            derivation[lab] = vec
    try:
        return doc, free_gcda(gens, (lo, hi), derivation=derivation)
    except (ValueError, KeyError) as exc:
        raise UsageError("bad algebra: %s" % exc)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def emit(args, document, rows, header):
    """Write the JSON document or the CSV rows to --out (or stdout)."""
    if args.format == "json":
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["schema", SCHEMA])
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def metadata(args, threads):
    meta = {"schema": SCHEMA, "command": args.command}
    if threads is not None:
        meta["threads"] = threads
    return meta


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_model(args, threads):
    X = build_model(args.space, args.genus, args.levels)
    problems = validate(X)
    doc = metadata(args, threads)
    doc.update({
        "space": args.space,
        "genus": args.genus,
        "levels": args.levels,
        "sizes": list(X.sizes),
        "valid": not problems,
        "problems": problems,
        "model": json.loads(to_json(X)),
    })
    rows = [(k, X.sizes[k]) for k in range(X.max_level + 1)]
    emit(args, doc, rows, ["level", "size"])
    return 0


def cmd_betti(args, threads):
    adoc, A = algebra_from_spec(args.algebra)
    M = module_over_self(A)
    degrees = parse_degrees(args.degrees)
    K = args.levels
    if K is None:
        # Default to the certified truncation level for the top degree.
        probe = build_model(args.space, args.genus, 3)
        K = completeness_bound(probe, A, max(degrees))
        if K is None:
            raise UsageError("no certified truncation level for this "
                             "algebra; pass --levels")
    X = build_model(args.space, args.genus, K)
    try:
        table = betti(X, A, M, degrees, K=K)
    except ValueError as exc:
        raise UsageError(str(exc))
    doc = metadata(args, threads)
    doc.update({
        "space": args.space,
        "genus": args.genus,
        "levels": table.K,
        "algebra": adoc,
        "degrees": degrees,
        "betti": [{"degree": n, "value": table.values[n],
                   "certified": table.certified[n],
                   "chain_dimension": table.dimensions[n]}
                  for n in degrees],
    })
    rows = [(n, table.values[n], table.certified[n], table.dimensions[n])
            for n in degrees]
    emit(args, doc, rows, ["degree", "betti", "certified",
                           "chain_dimension"])
    return 0


def _letter_name(lab):
    if lab[0] == "x":
        return "x%d" % (lab[1] + 1)
    if lab[0] == "w":
        return "omega%d" % (lab[1] + 1)
    name = "alpha" if lab[0] == "a" else "beta"
    return "%s%d_%d" % (name, lab[2] + 1, lab[1])


def format_element(alg, elem):
    """Deterministic text form of a closed-form element."""
    if not elem:
        return "0"
    terms = []
    for (genus, exps) in sorted(elem):
        c = elem[(genus, exps)]
        lets = alg.letters(genus)
        factors = []
        for p, e in enumerate(exps):
            if e:
                name = _letter_name(lets[p][0])
                factors.append(name if e == 1 else "%s^%d" % (name, e))
        word = "*".join(factors) if factors else "1"
        if c == 1:
            lead = ""
        elif c == -1:
            lead = "-"
        else:
            lead = "%s*" % c
        terms.append("%s%s[g%d]" % (lead, word, genus))
    return " + ".join(terms)


def cmd_surface_product(args, threads):
    try:
        exponents = [int(p) for p in args.exponents.split(",")]
    except ValueError:
        raise UsageError("exponents must be a comma list of integers")
    g, h = args.genus, args.genus2
    if g < 0 or h < 0:
        raise UsageError("genus must be nonnegative")
    try:
        alg = ClosedSurfaceAlgebra(exponents, g + h)
    except ValueError as exc:
        raise UsageError(str(exc))
    lg = [lab for lab, _ in alg.letters(g)]
    lh = [lab for lab, _ in alg.letters(h)]
    entries = []
    for labL in lg:
        u = alg.generator(labL[0], g, k=labL[-1],
                          i=labL[1] if len(labL) == 3 else 1)
        for labR in lh:
            v = alg.generator(labR[0], h, k=labR[-1],
                              i=labR[1] if len(labR) == 3 else 1)
            prod = alg.cup(u, v)
            entries.append({
                "left": "%s[g%d]" % (_letter_name(labL), g),
                "right": "%s[g%d]" % (_letter_name(labR), h),
                "degree_left": alg.degree(u),
                "degree_right": alg.degree(v),
                "product": format_element(alg, prod),
                "genus": g + h,
            })
    doc = metadata(args, threads)
    doc.update({
        "exponents": exponents,
        "genus_left": g,
        "genus_right": h,
        "presentation": alg.presentation(),
        "products": entries,
    })
    rows = [(e["left"], e["right"], e["product"], e["genus"])
            for e in entries]
    emit(args, doc, rows, ["left", "right", "product", "genus"])
    return 0


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------

def _lam_x():
    V = free_gcda([("x", 3)], (0, 3), name="L(x)")
    return V, module_over_self(V)


def verify_simplicial(genus):
    checks = []
    for name in STANDARD_SPACES + ["wedge_circles(2)", "sigma(1)",
                                   "sigma(2)"]:
        X = standard_model(name, 4)
        checks.append(("model %s satisfies the simplicial identities"
                       % name, validate(X) == [], ""))
    for g in range(1, 3):
        for h in range(1, 4 - g):
            f = pinch_map(g, h, 2)
            checks.append(("pinch(%d,%d) is simplicial" % (g, h),
                           validate_map(f) == [], ""))
    for g in (1, 2):
        checks.append(("collapse of sigma(%d) onto the sphere is "
                       "simplicial" % g,
                       validate_map(collapse_to_sphere(g, 3)) == [], ""))
    P0g, Pg0 = pinch0_maps(1, 1)
    checks.append(("subdivided sphere/surface pinches are simplicial",
                   validate_map(P0g) == [] and validate_map(Pg0) == [],
                   ""))
    checks.append(("skeleton inclusion is simplicial",
                   validate_map(skeleton_inclusion(1, 3)) == [], ""))
    return checks


def verify_hkr(genus):
    V, M = _lam_x()
    checks = []

    def drop(Y, chain):
        return {(k, t): c for (k, t), c in chain.items()
                if not is_degenerate_tuple(Y, k, t, V)}

    # projection after inclusion is the identity on generators
    m = 2 * genus
    W = wedge_circles(m, 3)
    CW = build_complex(W, V, M, 3, (-2, 6), check=False)
    FW = free_model("wedge(%d)" % m, V, (-2, 6))
    eW = eps_map(FW, CW)
    ok = all(pi_wedge(FW, CW, eW(FW.gen_element(("c", j), "x"))) ==
             FW.gen_element(("c", j), "x") for j in range(1, m + 1))
    checks.append(("projection inverts the inclusion of the %d loop "
                   "classes" % m, ok, ""))

    # the model generators map to cycles
    for space, Y in [("sphere2", sphere2(3)),
                     ("sigma(%d)" % genus, sigma(genus, 3))]:
        C = build_complex(Y, V, M, 2, (-2, 4), normalized=True,
                          check=False)
        F = free_model(space, V, (-2, 4))
        e = eps_map(F, C)
        ok = all(C.apply_D(e.of_generator(gi)) == {}
                 for gi in range(len(F.generators)))
        checks.append(("comparison classes over %s are cycles" % space,
                       ok, ""))

    # the surface top class collapses onto the sphere top class
    Y = sigma(genus, 3)
    C = build_complex(Y, V, M, 2, (-2, 4), normalized=True, check=False)
    F = free_model("sigma(%d)" % genus, V, (-2, 4))
    z = eps_map(F, C).of_generator(F.generator_index(("s",), "x"))
    q = collapse_to_sphere(genus, 3)
    S2 = q.target
    CS = build_complex(S2, V, M, 2, (-2, 4), normalized=True, check=False)
    FS = free_model("sphere2", V, (-2, 4))
    w = eps_map(FS, CS).of_generator(FS.generator_index(("s",), "x"))
    pushed = pushforward_chain(V, M, q.levels, S2.sizes, z)
    checks.append(("surface top class collapses onto the sphere class",
                   drop(S2, pushed) == drop(S2, w), ""))

    # pinch diagram: the subdivided sphere top class splits in two
    qp = sphere_pinch(2)
    Ybig = sphere2(5)
    Ws, iL, iR = qp.wedge_parts
    Cbig = build_complex(Ybig, V, M, 2, (-2, 4), normalized=True,
                         check=False)
    Fb = free_model("sphere2", V, (-2, 4))
    top = eps_map(Fb, Cbig).of_generator(Fb.generator_index(("s",), "x"))
    lhs = pushforward_chain(V, M, qp.levels, Ws.sizes,
                            mccarthy_D2(Ybig, V, M, top))
    Csm = build_complex(sphere2(2), V, M, 2, (-2, 4), normalized=True,
                        check=False)
    Fs = free_model("sphere2", V, (-2, 4))
    tsm = eps_map(Fs, Csm).of_generator(Fs.generator_index(("s",), "x"))
    rhs = {}
    for inc in (iL, iR):
        for key, c in pushforward_chain(V, M, inc.levels, Ws.sizes,
                                        tsm).items():
            rhs[key] = rhs.get(key, 0) + c
    rhs = {k: c for k, c in rhs.items() if c != 0}
    checks.append(("sphere top class splits under the subdivided pinch",
                   drop(Ws, lhs) == drop(Ws, rhs), ""))
    return checks


def verify_cup(genus):
    V, M = _lam_x()
    x = V.index((1,))
    checks = []

    # sphere cup product: unital and associative
    S2 = sphere2(4)
    one = Cochain(S2, V, M, 0, 0, table={(): {V.unit: ONE}})
    f = dual_basis_cochain(S2, V, M, 1, (x,), 0)
    h = dual_basis_cochain(S2, V, M, 1, (V.unit,), 1)
    k3 = dual_basis_cochain(S2, V, M, 1, (x,), 1)
    ok = all(cup_genus0(one, f).ev(a) == f.ev(a) and
             cup_genus0(f, one).ev(a) == f.ev(a)
             for a in enumerate_atuples(S2, V, 1, {0, 3}))
    checks.append(("sphere cup product is unital", ok, ""))
    lhs = cup_genus0(cup_genus0(f, h), k3)
    rhs = cup_genus0(f, cup_genus0(h, k3))
    ok = all(lhs.ev(a) == rhs.ev(a)
             for a in enumerate_atuples(S2, V, 3, {0, 3, 6, 9}))
    checks.append(("sphere cup product is associative", ok, ""))

    # positive-genus cup product satisfies the Leibniz rule
    pin = pinch_map(genus, genus, 3)
    S1 = sigma(genus, 3)
    atup = tuple([x] + [V.unit] * (S1.sizes[1] - 2))
    btup = tuple([V.unit, x] + [V.unit] * (S1.sizes[1] - 3))
    fg = dual_basis_cochain(S1, V, M, 1, atup, 0)
    hg = dual_basis_cochain(S1, V, M, 1, btup, 0)
    nf = fg.level + fg.fdeg
    lhs = cochain_D([cup_positive(fg, hg, pin)])
    s = QQ(-1) if nf % 2 else ONE
    rhs = [cup_positive(p, hg, pin) for p in cochain_D([fg])] + \
          [cup_positive(fg, p, pin).scaled(s) for p in cochain_D([hg])]
    ok = all(eval_pieces(lhs, 3, a) == eval_pieces(rhs, 3, a)
             for a in enumerate_atuples(pin.source, V, 3, {3}))
    checks.append(("surface cup product satisfies the Leibniz rule",
                   ok, ""))

    # the subdivided product agrees with the direct mixed product
    Ybig = sigma(1, 5)
    S2s = sphere2(3)
    fs = dual_basis_cochain(S2s, V, M, 1, (x,), 0)
    al = dual_basis_cochain(Ybig, V, M, 1,
                            tuple([x] + [V.unit] *
                                  (Ybig.sizes[1] - 2)), 0)
    u1 = cup_tilde(fs, al, 1)
    u2 = cup_mixed(fs, al, "left")
    ok = all(u1.ev(a) == u2.ev(a)
             for a in enumerate_atuples(Ybig, V, 2, {3, 6},
                                        nondegenerate_only=True))
    checks.append(("subdivided and direct mixed cup products agree on "
                   "normalized cochains", ok, ""))
    return checks


SUITES = {
    "simplicial": verify_simplicial,
    "hkr": verify_hkr,
    "cup": verify_cup,
}


def cmd_verify(args, threads):
    if args.suite == "all":
        names = sorted(SUITES)
    else:
        if args.suite not in SUITES:
            raise UsageError("unknown suite %r (have: %s, all)"
                             % (args.suite, ", ".join(sorted(SUITES))))
        names = [args.suite]
    genus = args.genus if args.genus is not None else 1
    if genus < 1:
        raise UsageError("verification suites need --genus >= 1")
    checks = []
    for name in names:
        for cname, ok, detail in SUITES[name](genus):
            checks.append({"suite": name, "name": cname, "ok": ok,
                           "detail": detail})
    all_ok = all(c["ok"] for c in checks)
    doc = metadata(args, threads)
    doc.update({
        "suite": args.suite,
        "genus": genus,
        "checks": checks,
        "ok": all_ok,
    })
    rows = [(c["suite"], c["name"], "pass" if c["ok"] else "FAIL")
            for c in checks]
    emit(args, doc, rows, ["suite", "check", "result"])
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="surface-hochschild",
        description="Exact higher Hochschild complexes over surface "
                    "models: model dumps, Betti tables, surface product "
                    "tables and verification suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, levels_default):
        p.add_argument("--space", default="sigma",
                       help="model name (default sigma)")
        p.add_argument("--genus", type=int, default=None,
                       help="genus for sigma, circle count for "
                            "wedge_circles")
        p.add_argument("--levels", type=int, default=levels_default,
                       help="simplicial truncation level")
        p.add_argument("--out", default=None, help="output file")
        p.add_argument("--format", choices=("json", "csv"),
                       default="json")

    p = sub.add_parser("model", help="build a model and dump it")
    common(p, 2)

    p = sub.add_parser("betti", help="Betti table of the Hochschild "
                                     "complex")
    common(p, None)
    p.add_argument("--algebra", default=None,
                   help="inline JSON or path (default: one exterior "
                        "generator of degree 3)")
    p.add_argument("--degrees", default="0..4",
                   help="total degree range a..b")

    p = sub.add_parser("surface-product",
                       help="closed-form genus-graded product table")
    p.add_argument("--exponents", default="1",
                   help="comma list; sphere factor S^(2d+1) per entry")
    p.add_argument("--genus", type=int, default=1,
                   help="genus of the left factors")
    p.add_argument("--genus2", type=int, default=1,
                   help="genus of the right factors")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help="simplicial, hkr, cup or all")
    p.add_argument("--genus", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


COMMANDS = {
    "model": cmd_model,
    "betti": cmd_betti,
    "surface-product": cmd_surface_product,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        threads = parse_threads()
        return COMMANDS[args.command](args, threads)
    except UsageError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
