"""Command-line interface: ``mzl <group> <verb> ...``.

Exit codes: 0 success, 1 a verified mismatch, 2 an input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import List, Optional

from . import groth, identity, io, jets, lattice, series, zeta
from .groth import GrothElement, Specialization

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2

INPUT_ERRORS = (io.InputError, groth.GrothError, series.SeriesError, lattice.CellError,
                zeta.ResolutionError, jets.JetError, identity.IdentityError)


class Mismatch(Exception):
    """A check ran and failed; carries the rendered report."""

    def __init__(self, payload):
        super().__init__("mismatch")
        self.payload = payload


def _num(x) -> str:
    return str(Fraction(x)) if not isinstance(x, str) else x


def _key(k, variables) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in zip(variables, k) if e) or "1"


def _series_payload(p: series.RationalSeries, args) -> dict:
    out = {"series": series.render(p), "json": series.to_json(p)}
    if args.expand_order is not None:
        out["expansion"] = {_key(k, p.variables): groth.render(c)
                            for k, c in series.rs_expand(p, args.expand_order).items()}
    return out


def _series_text(payload: dict) -> str:
    lines = [payload["series"]]
    for k, v in payload.get("expansion", {}).items():
        lines.append(f"  {k}: {v}")
    return "\n".join(lines)


def _spec(args) -> Optional[Specialization]:
    if getattr(args, "spec", None):
        s = io.load(args.spec, "specialization")
        q = getattr(args, "q", None)
        if q is not None and s.q is None:
            s = Specialization(s.symbols, q)
        return s
    q = getattr(args, "q", None)
    return Specialization({}, q) if q is not None else None


# ------------------------------------------------------------------- ring

def cmd_ring_eval(args):
    e = io.load(args.expr, "groth")
    s = _spec(args)
    out = {"element": groth.render(e)}
    if s is not None:
        v = groth.gr_specialize(e, s)
        out["value"] = groth.render(GrothElement.from_poly(v)) if s.q is None else _num(v)
    return out, out.get("value", out["element"])


def cmd_ring_mul(args):
    a, b = io.load(args.a, "groth"), io.load(args.b, "groth")
    r = groth.render(a * b)
    return {"product": r}, r


# ----------------------------------------------------------------- series

def cmd_series_expand(args):
    p = io.load(args.file, "series")
    order = args.order if args.order is not None else (args.expand_order or 5)
    coeffs = series.rs_expand(p, order)
    rows = {_key(k, p.variables): groth.render(c) for k, c in coeffs.items()}
    text = "\n".join(f"{k}: {v}" for k, v in rows.items()) or "0"
    return {"order": order, "coefficients": rows}, text


def cmd_series_limit(args):
    p = io.load(args.file, "series")
    v = groth.render(series.rs_limit(p))
    return {"limit": v}, v


def cmd_series_hadamard(args):
    p, q = io.load(args.a, "series"), io.load(args.b, "series")
    payload = _series_payload(series.rs_hadamard(p, q), args)
    return payload, _series_text(payload)


def cmd_series_eq(args):
    p, q = io.load(args.a, "series"), io.load(args.b, "series")
    eq = series.rs_eq(p, q)
    payload = {"equal": eq}
    if not eq:
        raise Mismatch((payload, "false"))
    return payload, "true"


def _parse_subst(items: List[str], variables):
    """``VAR=c:d1,d2,...`` meaning ``VAR -> L^c * prod(remaining^d)``."""
    out = {}
    for item in items:
        try:
            var, rhs = item.split("=", 1)
            c, _, ds = rhs.partition(":")
            d = tuple(int(x) for x in ds.split(",") if x.strip()) if ds else None
            out[var.strip()] = (int(c), d)
        except ValueError as exc:
            raise io.InputError(f"bad substitution {item!r}; expected VAR=c:d1,d2") from exc
    remaining = [v for v in variables if v not in out]
    return {v: (c, d if d is not None else (0,) * len(remaining)) for v, (c, d) in out.items()}


def cmd_series_subst(args):
    p = io.load(args.file, "series")
    payload = _series_payload(series.rs_substitute(p, _parse_subst(args.map, p.variables)), args)
    return payload, _series_text(payload)


# ------------------------------------------------------------------- cone

def cmd_cone_gf(args):
    c = io.load(args.cell, "cell")
    payload = _series_payload(lattice.cell_gf(c), args)
    payload["pieces"] = [lattice.piece_to_json(p) for p in lattice.cell_decompose(c)]
    return payload, _series_text(payload)


def cmd_cone_enumerate(args):
    c = io.load(args.cell, "cell")
    pts = lattice.cell_enumerate(c, args.bound)
    return {"points": [list(p) for p in pts]}, "\n".join(" ".join(map(str, p)) for p in pts) or "(empty)"


# ------------------------------------------------------------------- zeta

def _resolution(path):
    r = io.load(path, "resolution")
    if isinstance(r, zeta.MultiResolutionData):
        raise io.InputError(f"{path}: expected a plain resolution, got a multi-resolution")
    return r


def cmd_zeta_from_resolution(args):
    payload = _series_payload(zeta.zeta_from_resolution(_resolution(args.file), args.local), args)
    return payload, _series_text(payload)


def cmd_zeta_nearby(args):
    if args.series:
        z = io.load(args.file, "series")
    else:
        z = zeta.zeta_from_resolution(_resolution(args.file), args.local)
    v = groth.render(zeta.nearby_cycles(z))
    return {"nearby": v}, v


def cmd_zeta_multi(args):
    r = io.load(args.file, "resolution")
    if not isinstance(r, zeta.MultiResolutionData):
        raise io.InputError(f"{args.file}: expected a multi-resolution (divisors with Nvec)")
    theta = io.load(args.theta, "cell")
    rvars = args.r if args.r is not None else theta.dim - r.m
    payload = _series_payload(zeta.zeta_multi(r, theta, rvars), args)
    return payload, _series_text(payload)


# ------------------------------------------------------------------- jets

def _poly(args, required=True):
    if args.poly is None:
        if required:
            raise io.InputError("--poly is required")
        return None
    return io.load(args.poly, "poly")


def _condition(args, f):
    if args.cond is None:
        if f is None:
            raise io.InputError("give --cond or --poly")
        return jets.contact_condition(f, args.n)
    return io.load(args.cond, "arc-condition", f=f)


def _table(headers, rows) -> str:
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    return "\n".join([fmt.format(*headers)] + [fmt.format(*map(str, r)) for r in rows])


def cmd_jets_count(args):
    f = _poly(args, required=False)
    cond = _condition(args, f)
    rep = jets.count_jets(cond, args.n, args.q, args.method, args.threads)
    return rep.as_dict(), f"count={rep.count}"


def cmd_jets_integral(args):
    f = _poly(args, required=False)
    cond = io.load(args.cond, "arc-condition", f=f) if args.cond else jets.ArcCondition(f.d if f else args.d)
    d = cond.d
    weight = io.load(args.weight, "weight", d=d, f=f) if args.weight else ()
    rep = jets.jet_integral(cond, weight, args.q, args.cap, args.threads)
    text = f"value={rep.value} tail<={rep.tail_bound} (q={rep.q}, cap={rep.cap})"
    return rep.as_dict(), text


def cmd_jets_stability(args):
    f = _poly(args, required=False)
    cond = _condition(args, f)
    rep = jets.stability_probe(cond, args.q, args.start, args.stop, args.threads)
    if not rep.supported:
        raise Mismatch((rep.as_dict(), f"unsupported: {rep.note}"))
    rows = [(m, c, r) for m, c, r in zip(rep.levels, rep.counts, [""] + [str(x) for x in rep.ratios])]
    text = _table(("level", "count", "ratio"), rows)
    text += f"\nexpected ratio q^d = {args.q ** cond.d}; " + ("stable" if rep.stable else
                                                             f"first failure at level {rep.first_failure}")
    if not rep.stable:
        raise Mismatch((rep.as_dict(), text))
    return rep.as_dict(), text


def cmd_jets_compare(args):
    r = _resolution(args.res)
    f = _poly(args)
    spec = _spec(args)
    rep = jets.compare_zeta(r, f, args.nmax, args.q, spec, args.local, args.method, args.threads)
    rows = [(row.n, row.predicted, row.counted, row.method, "ok" if row.ok else "MISMATCH") for row in rep.rows]
    text = _table(("n", "predicted", "counted", "method", ""), rows)
    text += "\n" + ("all match" if rep.ok else f"first mismatch at n = {rep.first_mismatch}")
    if not rep.ok:
        raise Mismatch((rep.as_dict(), text))
    return rep.as_dict(), text


# --------------------------------------------------------------- identity

def cmd_identity_u_part(args):
    z = io.load(args.zloc, "series") if args.zloc else series.RationalSeries(("T",))
    v = groth.render(identity.u_part(args.d1, args.d2, z))
    return {"u_part": v}, v


def cmd_identity_w_cancel(args):
    data = io.load(args.file, "cone-data")
    d = args.d if args.d is not None else io.read_json(args.file).get("d", 0)
    rep = identity.w_cancellation(data, int(d))
    payload = {"limit_plain": groth.render(rep.limit_plain), "limit_twisted": groth.render(rep.limit_twisted),
               "difference": groth.render(rep.difference)}
    text = f"W = {payload['difference']} (limits {payload['limit_plain']} and {payload['limit_twisted']})"
    if not rep.ok:
        raise Mismatch((payload, text))
    return payload, text


def cmd_identity_check(args):
    path = args.instance or args.instance_opt
    if not path:
        raise io.InputError("give an identity instance")
    inst = io.load(path, "identity-instance")
    specs = [io.load(s, "specialization") for s in (args.spec or [])]
    rep = identity.identity_check(inst, specs)
    payload = {"lhs": groth.render(rep.lhs), "rhs": groth.render(rep.rhs), "match": rep.ok,
               "symbolic": rep.symbolic, "homogeneous": rep.homogeneous,
               "specialized": [{"q": q, "lhs": _num(a), "rhs": _num(b), "match": ok}
                               for q, a, b, ok in rep.specialized]}
    lines = [rep.summary()]
    for q, a, b, ok in rep.specialized:
        lines.append(f"  q={q}: LHS = {a}, RHS = {b}, {'MATCH' if ok else 'MISMATCH'}")
    if rep.homogeneous is False:
        lines.append("  polynomial is not of weight zero under (x, y) -> (lambda x, y / lambda)")
    if not rep.ok:
        raise Mismatch((payload, "\n".join(lines)))
    return payload, "\n".join(lines)


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the verb; the copy attached to
    # verbs uses SUPPRESS so it does not reset a value given earlier
    def flags(parser, default):
        parser.add_argument("--json", action="store_true", default=default(False),
                            help="emit JSON instead of text")
        parser.add_argument("--expand-order", type=int, default=default(None), metavar="N",
                            help="append the truncated expansion of series results")
        parser.add_argument("--threads", type=int, default=default(1), help="worker threads for jet enumeration")

    common = argparse.ArgumentParser(add_help=False)
    flags(common, lambda v: argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="mzl", description="Motivic zeta functions, rational series and jet counts.")
    flags(p, lambda v: v)
    groups = p.add_subparsers(dest="group", required=True)

    def verb(group, name, fn, help_):
        sp = group.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    g = groups.add_parser("ring", help="Grothendieck ring elements").add_subparsers(dest="verb", required=True)
    sp = verb(g, "eval", cmd_ring_eval, "canonicalize or specialize an element")
    sp.add_argument("expr")
    sp.add_argument("--spec")
    sp.add_argument("-q", type=int)
    sp = verb(g, "mul", cmd_ring_mul, "multiply two elements")
    sp.add_argument("a")
    sp.add_argument("b")

    g = groups.add_parser("series", help="rational series").add_subparsers(dest="verb", required=True)
    sp = verb(g, "expand", cmd_series_expand, "truncated expansion")
    sp.add_argument("file")
    sp.add_argument("--order", type=int)
    sp = verb(g, "limit", cmd_series_limit, "limit as T -> infinity")
    sp.add_argument("file")
    sp = verb(g, "hadamard", cmd_series_hadamard, "Hadamard product")
    sp.add_argument("a")
    sp.add_argument("b")
    sp = verb(g, "eq", cmd_series_eq, "exact equality")
    sp.add_argument("a")
    sp.add_argument("b")
    sp = verb(g, "subst", cmd_series_subst, "monomial substitution")
    sp.add_argument("file")
    sp.add_argument("--map", action="append", required=True, metavar="VAR=c:d1,d2")

    g = groups.add_parser("cone", help="lattice points of cells").add_subparsers(dest="verb", required=True)
    sp = verb(g, "gf", cmd_cone_gf, "generating function and decomposition")
    sp.add_argument("cell")
    sp = verb(g, "enumerate", cmd_cone_enumerate, "brute-force points")
    sp.add_argument("cell")
    sp.add_argument("--bound", type=int, default=6, help="largest coordinate sum")

    g = groups.add_parser("zeta", help="zeta functions from resolutions").add_subparsers(dest="verb", required=True)
    sp = verb(g, "from-resolution", cmd_zeta_from_resolution, "zeta function of a resolution")
    sp.add_argument("file")
    sp.add_argument("--local", action="store_true")
    sp = verb(g, "nearby", cmd_zeta_nearby, "nearby cycles (minus the limit)")
    sp.add_argument("file")
    sp.add_argument("--local", action="store_true")
    sp.add_argument("--series", action="store_true", help="the input is a series, not a resolution")
    sp = verb(g, "multi", cmd_zeta_multi, "multivariable zeta function")
    sp.add_argument("file")
    sp.add_argument("--theta", required=True)
    sp.add_argument("--r", type=int)

    g = groups.add_parser("jets", help="jet counts over finite fields").add_subparsers(dest="verb", required=True)

    def jet_common(sp):
        sp.add_argument("--poly")
        sp.add_argument("--cond")
        sp.add_argument("-q", type=int, required=True)
        sp.add_argument("--method", choices=("auto", "brute", "recursive"), default="auto")

    sp = verb(g, "count", cmd_jets_count, "count jets satisfying a condition")
    jet_common(sp)
    sp.add_argument("-n", type=int, required=True, help="jet level (and contact order for --poly alone)")
    sp = verb(g, "integral", cmd_jets_integral, "truncated motivic integral")
    jet_common(sp)
    sp.add_argument("--weight")
    sp.add_argument("--cap", type=int, default=6)
    sp.add_argument("-d", type=int, default=1, help="ambient dimension when neither --poly nor --cond is given")
    sp = verb(g, "stability", cmd_jets_stability, "check count(m+1) = q^d count(m)")
    jet_common(sp)
    sp.add_argument("-n", type=int, default=1, help="contact order for --poly alone")
    sp.add_argument("--from", dest="start", type=int, default=1)
    sp.add_argument("--to", dest="stop", type=int, default=3)
    sp = verb(g, "compare", cmd_jets_compare, "zeta coefficients against contact-locus counts")
    sp.add_argument("--res", required=True)
    sp.add_argument("--poly", required=True)
    sp.add_argument("--nmax", type=int, default=4)
    sp.add_argument("-q", type=int, required=True)
    sp.add_argument("--spec")
    sp.add_argument("--local", action="store_true")
    sp.add_argument("--method", choices=("auto", "brute", "recursive"), default="auto")

    g = groups.add_parser("identity", help="the integral identity").add_subparsers(dest="verb", required=True)
    sp = verb(g, "u-part", cmd_identity_u_part, "U part from a local zeta function")
    sp.add_argument("--d1", type=int, required=True)
    sp.add_argument("--d2", type=int, required=True)
    sp.add_argument("--zloc")
    sp = verb(g, "w-cancel", cmd_identity_w_cancel, "W cancellation on cone data")
    sp.add_argument("file")
    sp.add_argument("-d", type=int)
    sp = verb(g, "check", cmd_identity_check, "both sides of the identity")
    sp.add_argument("instance", nargs="?")
    sp.add_argument("--instance", dest="instance_opt")
    sp.add_argument("--spec", action="append")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload, text = args.fn(args)
        code = EXIT_OK
    except Mismatch as m:
        payload, text = m.payload
        code = EXIT_MISMATCH
    except series.DivergentSeriesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (zeta.InvarianceError, AssertionError) as exc:
        print(f"mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        print(json.dumps(payload, indent=2, default=str))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
