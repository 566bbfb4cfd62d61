"""Exact point counts of truncated arcs over small finite fields.

Two independent counters: exhaustive vectorized enumeration of all jets, and a
recursive lifting counter for contact loci (Hensel lifting at smooth points,
weighted substitution at singular ones).  The second one reaches levels that
exhaustive search cannot.
"""
from __future__ import annotations

import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ffield import Field, get_field

DEFAULT_BUDGET = 10 ** 8
# above this many jets, "auto" prefers the lifting counter when it applies
FAST_BRUTE = 2 * 10 ** 6
BLOCK = 1 << 17


class JetError(ValueError):
    pass


class BudgetExceeded(JetError):
    pass


def budget() -> int:
    env = os.environ.get("MZL_BUDGET")
    if env:
        try:
            return int(float(env))
        except ValueError as exc:
            raise JetError(f"MZL_BUDGET must be a number, got {env!r}") from exc
    return DEFAULT_BUDGET


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class PolySpec:
    d: int
    monomials: Tuple[Tuple[Tuple[int, ...], int], ...]

    def __post_init__(self):
        merged: Dict[Tuple[int, ...], int] = {}
        for exp, c in self.monomials:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self.d or any(e < 0 for e in exp):
                raise JetError(f"bad exponent {exp} for {self.d} variables")
            merged[exp] = merged.get(exp, 0) + int(c)
        object.__setattr__(self, "monomials", tuple(sorted((e, c) for e, c in merged.items() if c)))

    @classmethod
    def coordinate(cls, i: int, d: int) -> "PolySpec":
        return cls(d, ((tuple(int(j == i) for j in range(d)), 1),))

    def __call__(self, x: Sequence[int]) -> int:
        total = 0
        for exp, c in self.monomials:
            term = c
            for v, e in zip(x, exp):
                term *= v ** e
            total += term
        return total

    def degree(self) -> int:
        return max((sum(e) for e, _ in self.monomials), default=0)

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        names = list(names or default_names(self.d))
        parts = []
        for exp, c in self.monomials:
            vs = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, exp) if e]
            body = "*".join(vs)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ") if parts else "0"


def default_names(d: int) -> List[str]:
    return ["x", "y", "z", "w"][:d] if d <= 4 else [f"x{i + 1}" for i in range(d)]


def parse_poly(text: str, names: Sequence[str]) -> PolySpec:
    """Parse sums of monomials like ``x*y + 3*z^2 - 1``."""
    names = list(names)
    d = len(names)
    src = text.replace(" ", "").replace("-", "+-")
    monos = []
    for chunk in src.split("+"):
        if not chunk:
            continue
        sign = 1
        if chunk.startswith("-"):
            sign, chunk = -1, chunk[1:]
        coeff, exp = sign, [0] * d
        for f in chunk.split("*"):
            m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?", f)
            if m:
                if m.group(1) not in names:
                    raise JetError(f"unknown variable {m.group(1)!r} in {text!r}")
                exp[names.index(m.group(1))] += int(m.group(2) or 1)
            elif re.fullmatch(r"\d+", f):
                coeff *= int(f)
            else:
                raise JetError(f"cannot parse factor {f!r} in {text!r}")
        monos.append((tuple(exp), coeff))
    return PolySpec(d, tuple(monos))


# ----------------------------------------------------------------- conditions

OPS = ("=", ">=", ">", "<=", "<")


@dataclass(frozen=True)
class OrdTerm:
    """``coef * ord_t(g_1, ..., g_k)``; the ord of a tuple is the minimum."""

    coef: int
    polys: Tuple[PolySpec, ...]


@dataclass(frozen=True)
class OrdConstraint:
    terms: Tuple[OrdTerm, ...]
    op: str
    rhs: int

    def __post_init__(self):
        if self.op not in OPS:
            raise JetError(f"unknown comparison {self.op!r}")


@dataclass(frozen=True)
class OrdCongruence:
    terms: Tuple[OrdTerm, ...]
    r: int
    d: int


@dataclass(frozen=True)
class ArcCondition:
    """Conjunction of contact, ord, congruence and base-point conditions.

    Ord values are read off the jet, so an ord beyond the jet level is seen
    as ``level + 1``; conditions are meant to be stable at the level used.
    """

    d: int
    contact: Tuple[Tuple[PolySpec, int], ...] = ()
    ords: Tuple[OrdConstraint, ...] = ()
    congs: Tuple[OrdCongruence, ...] = ()
    base_zero: Tuple[int, ...] = ()
    ambient: Tuple[PolySpec, ...] = ()

    def __post_init__(self):
        for f in self._polys():
            if f.d != self.d:
                raise JetError(f"polynomial with {f.d} variables in a condition on {self.d}")
        for i in self.base_zero:
            if not 0 <= i < self.d:
                raise JetError(f"base-point coordinate {i} out of range")

    def _polys(self):
        for f, _n in self.contact:
            yield f
        for c in self.ords + self.congs:
            for t in c.terms:
                yield from t.polys
        yield from self.ambient

    def contact_only(self) -> bool:
        return len(self.contact) == 1 and not self.ords and not self.congs and not self.ambient

    def min_level(self) -> int:
        return max((n for _f, n in self.contact), default=0)

    def stable_level(self) -> int:
        """A level from which the condition is a cylinder: contact orders and
        ord thresholds are both visible.  Congruences are not bounded here."""
        return max([self.min_level()] + [max(c.rhs, 0) for c in self.ords])


def contact_condition(f: PolySpec, n: int, at_origin: bool = False) -> ArcCondition:
    return ArcCondition(f.d, ((f, n),), base_zero=tuple(range(f.d)) if at_origin else ())


@dataclass
class JetCountReport:
    q: int
    level: int
    d: int
    count: int
    method: str = "brute"

    @property
    def measure(self) -> Fraction:
        return Fraction(self.count, self.q ** ((self.level + 1) * self.d))

    def as_dict(self) -> dict:
        return {"q": self.q, "level": self.level, "count": self.count,
                "measure": str(self.measure), "method": self.method}


# ------------------------------------------------------- vectorized counting

class _Evaluator:
    """Truncated power-series arithmetic on arrays of field labels."""

    def __init__(self, F: Field, level: int):
        self.F = F
        self.n = level + 1

    def add(self, a, b):
        F = self.F
        return (a + b) % F.p if F.prime else F.add_t[a, b]

    def mul(self, a, b):
        F = self.F
        return (a * b) % F.p if F.prime else F.mul_t[a, b]

    def smul(self, c: int, a):
        c %= self.F.p
        if self.F.prime:
            return (a * c) % self.F.p
        out = np.zeros_like(a)
        for _ in range(c):
            out = self.F.add_t[out, a]
        return out

    def series_mul(self, a, b):
        n = self.n
        out = []
        for k in range(n):
            acc = self.mul(a[0], b[k])
            for i in range(1, k + 1):
                acc = self.add(acc, self.mul(a[i], b[k - i]))
            out.append(acc)
        return out

    def poly(self, f: PolySpec, jets, cache):
        key = f
        if key in cache:
            return cache[key]
        B = jets[0][0].shape[0]
        zero = np.zeros(B, dtype=np.int64)
        total = [zero] * self.n
        for exp, c in f.monomials:
            term = [np.ones(B, dtype=np.int64)] + [zero] * (self.n - 1)
            for i, e in enumerate(exp):
                for _ in range(e):
                    term = self.series_mul(term, jets[i])
            total = [self.add(t, self.smul(c, x)) for t, x in zip(total, term)]
        cache[key] = total
        return total

    def ord(self, series):
        o = np.full(series[0].shape[0], self.n, dtype=np.int64)
        for k in range(self.n - 1, -1, -1):
            o = np.where(series[k] != 0, k, o)
        return o


def _ord_value(ev, term: OrdTerm, jets, cache):
    o = None
    for g in term.polys:
        og = ev.ord(ev.poly(g, jets, cache))
        o = og if o is None else np.minimum(o, og)
    return term.coef * o


def _linear_ord(ev, terms, jets, cache):
    total = None
    for t in terms:
        v = _ord_value(ev, t, jets, cache)
        total = v if total is None else total + v
    return total


def _compare(v, op, rhs):
    return {"=": v == rhs, ">=": v >= rhs, ">": v > rhs, "<=": v <= rhs, "<": v < rhs}[op]


def _mask(ev, cond: ArcCondition, jets, cache):
    B = jets[0][0].shape[0]
    ok = np.ones(B, dtype=bool)
    for f, c in cond.contact:
        s = ev.poly(f, jets, cache)
        for k in range(c):
            ok &= s[k] == 0
        ok &= s[c] == 1
    for oc in cond.ords:
        ok &= _compare(_linear_ord(ev, oc.terms, jets, cache), oc.op, oc.rhs)
    for cg in cond.congs:
        ok &= (_linear_ord(ev, cg.terms, jets, cache) - cg.r) % cg.d == 0
    return ok


def _blocks(total: int):
    start = 0
    while start < total:
        yield start, min(BLOCK, total - start)
        start += BLOCK


def _enumerate(cond: ArcCondition, level: int, q: int, threads: int, reducer):
    """Run ``reducer(ev, jets, cache)`` over all jets in blocks and sum the results."""
    d = cond.d
    n = level + 1
    fixed = {(i, 0) for i in cond.base_zero}
    free = [(i, k) for i in range(d) for k in range(n) if (i, k) not in fixed]
    total = q ** len(free)
    lim = budget()
    if total > lim:
        raise BudgetExceeded(f"{total} jets exceed the enumeration budget {lim} (set MZL_BUDGET)")
    F = get_field(q)
    ev = _Evaluator(F, level)
    powers = [q ** j for j in range(len(free))]

    def work(block):
        start, size = block
        idx = np.arange(start, start + size, dtype=np.int64)
        zero = np.zeros(size, dtype=np.int64)
        jets = [[zero] * n for _ in range(d)]
        for j, (i, k) in enumerate(free):
            jets[i][k] = (idx // powers[j]) % q
        return reducer(ev, jets, {})

    blocks = list(_blocks(total))
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    return parts


def brute_count(cond: ArcCondition, level: int, q: int, threads: int = 1) -> int:
    if level < cond.min_level():
        raise JetError(f"level {level} is below the contact order {cond.min_level()}")
    parts = _enumerate(cond, level, q, threads, lambda ev, jets, cache: int(_mask(ev, cond, jets, cache).sum()))
    return sum(parts)


# --------------------------------------------------------- recursive counting

TPoly = Dict[Tuple[int, Tuple[int, ...]], int]  # (t-exponent, y-exponents) -> coeff mod p


class _LiftCounter:
    """Counts c-jets with ``g(gamma) = t^c mod t^(c+1)`` for ``g`` over F_p[t]."""

    def __init__(self, p: int, d: int):
        self.p, self.d = p, d
        self.memo: Dict[Tuple, int] = {}
        self.points = list(product(range(p), repeat=d))

    def _eval(self, gbar, a):
        p = self.p
        total = 0
        for exp, c in gbar.items():
            term = c
            for v, e in zip(a, exp):
                if e:
                    term = term * pow(v, e, p) % p
            total += term
        return total % p

    def _grad_zero(self, gbar, a) -> bool:
        p = self.p
        for i in range(self.d):
            total = 0
            for exp, c in gbar.items():
                e = exp[i]
                if e == 0 or e % p == 0:
                    continue
                term = c * e
                for j, (v, ej) in enumerate(zip(a, exp)):
                    k = ej - 1 if j == i else ej
                    if k:
                        term = term * pow(v, k, p) % p
                total += term
            if total % p:
                return False
        return True

    def _shift(self, g: TPoly, a, cap: int) -> TPoly:
        """``g(a + t*y)`` truncated to t-degree <= cap."""
        p = self.p
        out: TPoly = {}
        for (te, exp), c in g.items():
            choices = []
            for v, e in zip(a, exp):
                opts = []
                for j in range(e + 1):
                    w = comb(e, j) * pow(v, e - j, p) % p if (e - j == 0 or v) else 0
                    if w:
                        opts.append((j, w))
                choices.append(opts)
            for combo in product(*choices):
                tdeg = te + sum(j for j, _w in combo)
                if tdeg > cap:
                    continue
                w = c
                for _j, x in combo:
                    w = w * x % p
                if w:
                    key = (tdeg, tuple(j for j, _w in combo))
                    out[key] = (out.get(key, 0) + w) % p
        return {k: v for k, v in out.items() if v}

    def count(self, g: TPoly, c: int, base_zero=()) -> int:
        g = {k: v for k, v in g.items() if k[0] <= c and v % self.p}
        key = (tuple(sorted(g.items())), c, tuple(base_zero))
        if key in self.memo:
            return self.memo[key]
        p, d = self.p, self.d
        gbar = {exp: v for (te, exp), v in g.items() if te == 0}
        total = 0
        for a in self.points:
            if any(a[i] for i in base_zero):
                continue
            val = self._eval(gbar, a)
            if c == 0:
                total += val == 1
                continue
            if val:
                continue
            if not self._grad_zero(gbar, a):
                total += p ** (c * (d - 1))
                continue
            ga = self._shift(g, a, c)
            if not ga:
                continue
            e = min(te for te, _ in ga)
            if e > c:
                continue
            g2 = {(te - e, exp): v for (te, exp), v in ga.items()}
            total += p ** (d * (e - 1)) * self.count(g2, c - e)
        self.memo[key] = total
        return total


def recursive_count(f: PolySpec, n: int, level: int, q: int, at_origin_coords=()) -> int:
    F = get_field(q)
    if not F.prime:
        raise JetError("the lifting counter needs a prime field")
    if level < n:
        raise JetError(f"level {level} is below the contact order {n}")
    lc = _LiftCounter(q, f.d)
    g = {}
    for exp, c in f.monomials:
        if c % q:
            g[(0, exp)] = c % q
    return q ** ((level - n) * f.d) * lc.count(g, n, tuple(at_origin_coords))


def count_jets(cond: ArcCondition, n: int, q: int, method: str = "auto", threads: int = 1) -> JetCountReport:
    """Exact number of level-``n`` jets over F_q satisfying ``cond``."""
    if cond.ambient:
        raise JetError("only affine space is supported as ambient variety")
    get_field(q)
    for f, c in cond.contact:
        if c > n:
            raise JetError(f"contact order {c} exceeds the jet level {n}")
    free = cond.d * (n + 1) - len(set(cond.base_zero))
    if method == "auto":
        size = q ** free
        liftable = cond.contact_only() and get_field(q).prime
        within = size <= budget()
        method = "brute" if within and (size <= FAST_BRUTE or not liftable) else "recursive"
    if method == "recursive":
        if not cond.contact_only():
            raise BudgetExceeded("enumeration budget exceeded and the condition is not a pure contact locus")
        f, c = cond.contact[0]
        return JetCountReport(q, n, cond.d, recursive_count(f, c, n, q, cond.base_zero), "recursive")
    if method != "brute":
        raise JetError(f"unknown method {method!r}")
    return JetCountReport(q, n, cond.d, brute_count(cond, n, q, threads), "brute")


# -------------------------------------------------------------- integration

@dataclass
class IntegralReport:
    q: int
    cap: int
    value: Fraction
    tail_bound: Fraction
    fibers: Dict[int, Fraction] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"q": self.q, "cap": self.cap, "value": str(self.value), "tail_bound": str(self.tail_bound),
                "fibers": {str(k): str(v) for k, v in sorted(self.fibers.items())}}


def jet_integral(cond: ArcCondition, weight: Sequence[OrdTerm], q: int, cap: int,
                 threads: int = 1) -> IntegralReport:
    """``sum_{n <= cap} mu(cond and weight = n) q^-n`` with the tail bound
    ``mu(cond and weight > cap) q^-(cap+1)``.

    Weight terms need nonnegative coefficients so that values up to ``cap``
    are read exactly at jet level ``cap``.
    """
    if cond.ambient:
        raise JetError("only affine space is supported as ambient variety")
    if any(t.coef < 0 for t in weight):
        raise JetError("weight coefficients must be nonnegative")
    level = max(cap, cond.stable_level())
    top = cap + 1

    def reducer(ev, jets, cache):
        ok = _mask(ev, cond, jets, cache)
        w = _linear_ord(ev, weight, jets, cache) if weight else np.zeros(ok.shape[0], dtype=np.int64)
        w = np.minimum(w, top)
        return np.bincount(w[ok], minlength=top + 1)[: top + 1]

    parts = _enumerate(cond, level, q, threads, reducer)
    hist = sum(parts) if parts else np.zeros(top + 1, dtype=np.int64)
    denom = q ** ((level + 1) * cond.d)
    fibers = {k: Fraction(int(hist[k]), denom) for k in range(top) if hist[k]}
    value = sum((m * Fraction(1, q ** k) for k, m in fibers.items()), Fraction(0))
    tail = Fraction(int(hist[top]), denom) * Fraction(1, q ** top)
    return IntegralReport(q, cap, value, tail, fibers)


# ---------------------------------------------------------------- stability

@dataclass
class StabilityReport:
    q: int
    levels: List[int]
    counts: List[int]
    supported: bool = True
    first_failure: Optional[int] = None
    note: str = ""

    @property
    def ratios(self) -> List[Fraction]:
        return [Fraction(b, a) if a else Fraction(0) for a, b in zip(self.counts, self.counts[1:])]

    @property
    def stable(self) -> bool:
        return self.supported and self.first_failure is None

    def as_dict(self) -> dict:
        return {"q": self.q, "levels": self.levels, "counts": self.counts,
                "ratios": [str(r) for r in self.ratios], "supported": self.supported,
                "first_failure": self.first_failure, "note": self.note}


def stability_probe(cond: ArcCondition, q: int, m0: int, m1: int, threads: int = 1) -> StabilityReport:
    """Check ``count(m+1) = q^d count(m)`` for ``m0 <= m < m1``, starting no
    lower than the stable level of ``cond``."""
    if cond.ambient:
        return StabilityReport(q, [], [], supported=False,
                               note="ambient variety is not affine space; the fibration check does not apply")
    levels = list(range(max(m0, cond.stable_level()), m1 + 1))
    counts = [brute_count(cond, m, q, threads) for m in levels]
    rep = StabilityReport(q, levels, counts)
    for m, a, b in zip(levels, counts, counts[1:]):
        if b != q ** cond.d * a:
            rep.first_failure = m
            break
    return rep


# ------------------------------------------------------------ zeta compare

@dataclass
class CompareRow:
    n: int
    predicted: Fraction
    counted: int
    method: str

    @property
    def ok(self) -> bool:
        return self.predicted == self.counted


@dataclass
class CompareReport:
    q: int
    rows: List[CompareRow]

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def first_mismatch(self) -> Optional[int]:
        return next((r.n for r in self.rows if not r.ok), None)

    def as_dict(self) -> dict:
        return {"q": self.q, "ok": self.ok, "first_mismatch": self.first_mismatch,
                "rows": [{"n": r.n, "predicted": str(r.predicted), "counted": r.counted,
                          "method": r.method, "ok": r.ok} for r in self.rows]}


def compare_zeta(r, f: PolySpec, n_max: int, q: int, spec=None, local: bool = False,
                 method: str = "auto", threads: int = 1) -> CompareReport:
    """Check ``spec(coefficient of T^n) * q^(n d) = #contact locus at level n``."""
    from .groth import Specialization, gr_specialize
    from .series import rs_expand
    from .zeta import zeta_from_resolution

    if f.d != r.dim:
        raise JetError(f"polynomial has {f.d} variables, resolution has dimension {r.dim}")
    if spec is None:
        spec = Specialization({}, q)
    elif spec.q is None:
        spec = Specialization(spec.symbols, q)
    elif spec.q != q:
        raise JetError(f"specialization is for q={spec.q}, comparison for q={q}")
    coeffs = rs_expand(zeta_from_resolution(r, local), n_max)
    rows = []
    for n in range(1, n_max + 1):
        c = coeffs.get((n,))
        pred = Fraction(gr_specialize(c, spec)) * q ** (n * f.d) if c is not None else Fraction(0)
        rep = count_jets(contact_condition(f, n, local), n, q, method, threads)
        rows.append(CompareRow(n, pred, rep.count, rep.method))
    return CompareReport(q, rows)


# ------------------------------------------------------------------- JSON

def poly_from_json(obj, d: Optional[int] = None) -> PolySpec:
    if isinstance(obj, str):
        if d is None:
            raise JetError("a text polynomial needs its variables")
        return parse_poly(obj, default_names(d))
    if "text" in obj or "poly" in obj:
        names = obj.get("vars")
        if isinstance(names, int) or names is None:
            names = default_names(obj.get("d", names or d))
        return parse_poly(obj.get("text", obj.get("poly")), names)
    try:
        dd = int(obj.get("d", d))
        return PolySpec(dd, tuple((tuple(m["exp"]), int(m["coeff"])) for m in obj["monomials"]))
    except (KeyError, TypeError) as exc:
        raise JetError(f"bad polynomial: {exc}") from exc


def poly_to_json(f: PolySpec) -> dict:
    return {"kind": "poly", "d": f.d, "monomials": [{"exp": list(e), "coeff": c} for e, c in f.monomials],
            "text": f.render()}


def _terms_from_json(obj, d, f):
    out = []
    for t in obj:
        polys = t.get("polys")
        if polys is None:
            if f is None:
                raise JetError("ord term without polynomial and no default polynomial given")
            polys = [f]
        else:
            polys = [poly_from_json(p, d) if not isinstance(p, PolySpec) else p for p in polys]
        out.append(OrdTerm(int(t.get("coef", 1)), tuple(polys)))
    return tuple(out)


def condition_from_json(obj, f: Optional[PolySpec] = None) -> ArcCondition:
    """Arc condition schema; a missing polynomial refers to ``f``."""
    d = obj.get("d", f.d if f is not None else None)
    if d is None:
        raise JetError("condition needs 'd' or a default polynomial")
    d = int(d)
    contact = []
    c = obj.get("contact")
    if c is not None:
        for item in (c if isinstance(c, list) else [c]):
            g = poly_from_json(item["poly"], d) if "poly" in item else f
            if g is None:
                raise JetError("contact condition without polynomial")
            contact.append((g, int(item["n"])))
    ords = tuple(OrdConstraint(_terms_from_json(o["terms"], d, f), o.get("op", ">="), int(o["rhs"]))
                 for o in obj.get("ord", []))
    congs = tuple(OrdCongruence(_terms_from_json(o["terms"], d, f), int(o["r"]), int(o["d"]))
                  for o in obj.get("cong", []))
    bz = obj.get("base_zero", [])
    if bz == "origin":
        bz = list(range(d))
    amb = tuple(poly_from_json(p, d) for p in obj.get("ambient", []))
    return ArcCondition(d, tuple(contact), ords, congs, tuple(int(i) for i in bz), amb)


def weight_from_json(obj, d: int, f: Optional[PolySpec] = None) -> Tuple[OrdTerm, ...]:
    if not obj:
        return ()
    return _terms_from_json(obj, d, f)
