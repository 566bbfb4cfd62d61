"""Closed-form rational series over the symbol ring.

A series is a finite sum of terms ``c * T^b0 / prod(1 - L^a_i T^b_i)`` plus a
polynomial part.  Coefficients ``c`` are GrothElements (they absorb any
numerator power of L).
"""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from . import groth
from .groth import GrothElement, LaurentPoly

MultiIndex = Tuple[int, ...]


class SeriesError(ValueError):
    pass


class DivergentSeriesError(SeriesError):
    pass


class NonConvergentSubstitution(SeriesError):
    pass


@dataclass(frozen=True, order=True)
class GeomFactor:
    """The factor ``1 / (1 - L^a T^b)``."""

    a: int
    b: MultiIndex

    def __post_init__(self):
        if any(x < 0 for x in self.b) or not any(self.b):
            raise SeriesError(f"factor exponent {self.b} must be nonzero and nonnegative")


@dataclass(frozen=True)
class SeriesTerm:
    coeff: GrothElement
    b0: MultiIndex
    den: Tuple[GeomFactor, ...]


TermKey = Tuple[MultiIndex, Tuple[GeomFactor, ...]]


class RationalSeries:
    """Immutable multivariate rational series.

    ``terms`` maps ``(b0, sorted denominator factors)`` to coefficients; terms
    without denominator live in the polynomial part keyed by exponent.
    """

    __slots__ = ("variables", "_terms", "_poly")

    def __init__(self, variables: Sequence[str], terms: Optional[Mapping[TermKey, GrothElement]] = None,
                 poly: Optional[Mapping[MultiIndex, GrothElement]] = None):
        self.variables = tuple(variables)
        r = len(self.variables)
        t: Dict[TermKey, GrothElement] = {}
        p: Dict[MultiIndex, GrothElement] = {}
        for (b0, den), c in (terms or {}).items():
            b0 = tuple(b0)
            if len(b0) != r or any(len(f.b) != r for f in den):
                raise SeriesError(f"arity mismatch: expected {r} variables")
            if any(x < 0 for x in b0):
                raise SeriesError(f"negative exponent {b0} in numerator")
            c = GrothElement.coerce(c)
            if not c:
                continue
            if den:
                key = (b0, tuple(sorted(den)))
                t[key] = t[key] + c if key in t else c
            else:
                p[b0] = p[b0] + c if b0 in p else c
        for b0, c in (poly or {}).items():
            b0 = tuple(b0)
            if len(b0) != r or any(x < 0 for x in b0):
                raise SeriesError(f"bad polynomial exponent {b0}")
            c = GrothElement.coerce(c)
            p[b0] = p[b0] + c if b0 in p else c
        self._terms = {k: t[k] for k in sorted(t) if t[k]}
        self._poly = {k: p[k] for k in sorted(p) if p[k]}

    # ------------------------------------------------------------ builders
    @classmethod
    def zero(cls, variables=("T",)) -> "RationalSeries":
        return cls(variables)

    @classmethod
    def constant(cls, c, variables=("T",)) -> "RationalSeries":
        return cls(variables, poly={(0,) * len(variables): GrothElement.coerce(c)})

    @classmethod
    def monomial(cls, b: MultiIndex, c=1, variables=("T",)) -> "RationalSeries":
        return cls(variables, poly={tuple(b): GrothElement.coerce(c)})

    @classmethod
    def geometric(cls, a: int, b: Union[int, MultiIndex], variables=("T",), coeff=1) -> "RationalSeries":
        """``coeff * L^a T^b / (1 - L^a T^b)``."""
        b = (b,) if isinstance(b, int) else tuple(b)
        c = GrothElement.coerce(coeff).times_L(a)
        return cls(variables, {(b, (GeomFactor(a, b),)): c})

    @classmethod
    def term(cls, coeff, b0, den: Iterable[Tuple[int, Union[int, MultiIndex]]], variables=("T",)) -> "RationalSeries":
        b0 = (b0,) if isinstance(b0, int) else tuple(b0)
        factors = tuple(GeomFactor(a, (b,) if isinstance(b, int) else tuple(b)) for a, b in den)
        return cls(variables, {(b0, factors): GrothElement.coerce(coeff)})

    # ---------------------------------------------------------- inspection
    @property
    def arity(self) -> int:
        return len(self.variables)

    @property
    def poly_part(self) -> Dict[MultiIndex, GrothElement]:
        return dict(self._poly)

    def terms(self) -> List[SeriesTerm]:
        return [SeriesTerm(c, b0, den) for (b0, den), c in self._terms.items()]

    def all_terms(self) -> List[SeriesTerm]:
        """Denominator terms followed by polynomial monomials as empty-den terms."""
        return self.terms() + [SeriesTerm(c, b0, ()) for b0, c in self._poly.items()]

    def is_zero_repr(self) -> bool:
        return not self._terms and not self._poly

    def factors(self) -> set:
        return {f for (_b, den) in self._terms for f in den}

    def _check(self, other: "RationalSeries"):
        if self.variables != other.variables:
            raise SeriesError(f"variable mismatch: {self.variables} vs {other.variables}")

    # ---------------------------------------------------------- arithmetic
    def __add__(self, other):
        if not isinstance(other, RationalSeries):
            other = RationalSeries.constant(other, self.variables)
        self._check(other)
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms[k] + c if k in terms else c
        poly = dict(self._poly)
        for k, c in other._poly.items():
            poly[k] = poly[k] + c if k in poly else c
        return RationalSeries(self.variables, terms, poly)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, RationalSeries):
            other = RationalSeries.constant(other, self.variables)
        return self + (-other)

    def scale(self, c) -> "RationalSeries":
        c = GrothElement.coerce(c)
        return RationalSeries(self.variables,
                              {k: v * c for k, v in self._terms.items()},
                              {k: v * c for k, v in self._poly.items()})

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            return self.scale(other)
        self._check(other)
        out: Dict[TermKey, GrothElement] = {}
        for t1 in self.all_terms():
            for t2 in other.all_terms():
                key = (tuple(x + y for x, y in zip(t1.b0, t2.b0)), tuple(sorted(t1.den + t2.den)))
                c = t1.coeff * t2.coeff
                out[key] = out[key] + c if key in out else c
        return RationalSeries(self.variables, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __repr__(self):
        return f"RationalSeries({render(self)!r})"

    def __str__(self):
        return render(self)

    def rename(self, variables: Sequence[str]) -> "RationalSeries":
        """The same series in differently named variables."""
        if len(variables) != len(self.variables):
            raise SeriesError(f"cannot rename {len(self.variables)} variables to {len(variables)}")
        return RationalSeries(variables, self._terms, self._poly)

    # structural equality of the canonical representation
    def same_repr(self, other: "RationalSeries") -> bool:
        return (self.variables == other.variables and self._terms == other._terms
                and self._poly == other._poly)


def rs_arith(op: str, p: RationalSeries, q) -> RationalSeries:
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    if op in ("scalar-mul", "scale"):
        return p.scale(q)
    raise SeriesError(f"unknown operation {op!r}")


# ------------------------------------------------------------- expansion

def _indices_upto(r: int, order: int):
    if r == 0:
        yield ()
        return
    for first in range(order + 1):
        for rest in _indices_upto(r - 1, order - first):
            yield (first,) + rest


@lru_cache(maxsize=4096)
def _expand_den(den: Tuple[GeomFactor, ...], order: int) -> Dict[MultiIndex, LaurentPoly]:
    """Truncated expansion of prod 1/(1 - L^a T^b) to total degree <= order."""
    r = len(den[0].b) if den else 0
    cur: Dict[MultiIndex, LaurentPoly] = {(0,) * r: LaurentPoly(1)} if r else {(): LaurentPoly(1)}
    for f in den:
        step = sum(f.b)
        nxt: Dict[MultiIndex, LaurentPoly] = {}
        for idx, poly in cur.items():
            deg = sum(idx)
            k = 0
            while deg + k * step <= order:
                new = tuple(i + k * b for i, b in zip(idx, f.b))
                add = poly.shift(k * f.a)
                nxt[new] = nxt[new] + add if new in nxt else add
                k += 1
        cur = nxt
    return cur


def rs_expand(p: RationalSeries, order: int) -> Dict[MultiIndex, GrothElement]:
    """Exact coefficients of all monomials of total degree <= order (zeros dropped)."""
    out: Dict[MultiIndex, GrothElement] = {}
    for t in p.all_terms():
        d0 = sum(t.b0)
        if d0 > order:
            continue
        if not t.den:
            out[t.b0] = out[t.b0] + t.coeff if t.b0 in out else t.coeff
            continue
        for idx, poly in _expand_den(t.den, order - d0).items():
            key = tuple(a + b for a, b in zip(idx, t.b0))
            c = t.coeff * poly
            out[key] = out[key] + c if key in out else c
    return {k: v for k, v in sorted(out.items()) if v}


# --------------------------------------------------- single-fraction form

PolyT = Dict[MultiIndex, GrothElement]


def _poly_mul(a: PolyT, b: PolyT) -> PolyT:
    out: PolyT = {}
    for i, x in a.items():
        for j, y in b.items():
            k = tuple(p + q for p, q in zip(i, j))
            c = x * y
            out[k] = out[k] + c if k in out else c
    return {k: v for k, v in out.items() if v}


def _poly_add(a: PolyT, b: PolyT) -> PolyT:
    out = dict(a)
    for k, v in b.items():
        out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=4096)
def _factor_product(factors: Tuple[GeomFactor, ...], r: int) -> Tuple[Tuple[MultiIndex, GrothElement], ...]:
    cur: PolyT = {(0,) * r: GrothElement.one()}
    for f in factors:
        cur = _poly_mul(cur, {(0,) * r: GrothElement.one(), f.b: GrothElement.L(f.a) * -1})
    return tuple(sorted(cur.items()))


def _common_form(series: Sequence[RationalSeries]):
    """Bring each series over the common denominator ``prod`` of the lcm factor multiset.

    Returns ``(lcm_counter, [numerator polynomials])``.
    """
    lcm: Counter = Counter()
    for s in series:
        for (_b0, den) in s._terms:
            for f, k in Counter(den).items():
                lcm[f] = max(lcm[f], k)
    r = series[0].arity
    full = tuple(sorted(lcm.elements()))
    nums = []
    for s in series:
        num: PolyT = {}
        for t in s.all_terms():
            missing = lcm - Counter(t.den)
            prod = dict(_factor_product(tuple(sorted(missing.elements())), r))
            num = _poly_add(num, _poly_mul({t.b0: t.coeff}, prod))
        nums.append(num)
    return full, nums


def rs_eq(p: RationalSeries, q: RationalSeries) -> bool:
    """Exact equality of the underlying formal series (cross-multiplication)."""
    p._check(q)
    _den, (np_, nq) = _common_form([p, q])
    return np_ == nq


def rs_limit(p: RationalSeries) -> GrothElement:
    """The limit as T -> infinity of a univariate rational series.

    Evaluated as a rational function: zero when the numerator has lower
    T-degree than the denominator, the ratio of leading coefficients when the
    degrees agree.
    """
    if p.arity != 1:
        raise SeriesError("limit requires a univariate series")
    total = GrothElement()
    convergent = True
    for t in p.terms():
        deg_den = sum(f.b[0] for f in t.den)
        if t.b0[0] < deg_den:
            continue
        if t.b0[0] > deg_den:
            convergent = False
            break
        sign = (-1) ** len(t.den)
        total = total + t.coeff.times_L(-sum(f.a for f in t.den)) * sign
    for b0, c in p.poly_part.items():
        if b0[0] > 0:
            convergent = False
        else:
            total = total + c
    if convergent:
        return total
    # some term diverges on its own; decide on the single reduced fraction
    den, (num,) = _common_form([p])
    if not num:
        return GrothElement()
    deg_p = max(k[0] for k in num)
    deg_q = sum(f.b[0] for f in den)
    if deg_p > deg_q:
        raise DivergentSeriesError(f"divergent: numerator degree {deg_p} exceeds denominator degree {deg_q}")
    if deg_p < deg_q:
        return GrothElement()
    sign = (-1) ** len(den)
    return num[(deg_p,)].times_L(-sum(f.a for f in den)) * sign


def rs_substitute(p: RationalSeries, subst: Mapping[str, Tuple[int, MultiIndex]]) -> RationalSeries:
    """Substitute ``var -> L^c * prod(remaining^d)`` for each mapped variable."""
    for v in subst:
        if v not in p.variables:
            raise SeriesError(f"unknown variable {v!r}")
    remaining = tuple(v for v in p.variables if v not in subst)
    pos = {v: i for i, v in enumerate(p.variables)}
    maps = []
    for v, (c, d) in subst.items():
        d = tuple(d)
        if len(d) != len(remaining):
            raise SeriesError(f"substitution for {v!r} needs {len(remaining)} exponents")
        maps.append((pos[v], c, d))
    keep = [pos[v] for v in remaining]

    def image(b):
        a = sum(b[i] * c for i, c, _ in maps)
        nb = [b[i] for i in keep]
        for i, _c, d in maps:
            nb = [x + b[i] * y for x, y in zip(nb, d)]
        return a, tuple(nb)

    terms: Dict[TermKey, GrothElement] = {}
    for t in p.all_terms():
        a0, nb0 = image(t.b0)
        den = []
        for f in t.den:
            a, nb = image(f.b)
            if not any(nb):
                raise NonConvergentSubstitution(f"non-convergent substitution: factor "
                                                f"1/(1 - {_mono(f.b, p.variables, f.a)}) loses all series degree")
            den.append(GeomFactor(f.a + a, nb))
        key = (nb0, tuple(sorted(den)))
        c = t.coeff.times_L(a0)
        terms[key] = terms[key] + c if key in terms else c
    return RationalSeries(remaining, terms)


def rs_hadamard(p: RationalSeries, q: RationalSeries) -> RationalSeries:
    """Coefficientwise product, computed through fiber-product cells."""
    from .lattice import hadamard_terms
    p._check(q)
    return hadamard_terms(p, q)


# ------------------------------------------------------------- rendering

def _mono(b: MultiIndex, variables, a: int = 0) -> str:
    parts = []
    if a:
        parts.append("L" if a == 1 else f"L^{a}")
    for v, e in zip(variables, b):
        if e:
            parts.append(v if e == 1 else f"{v}^{e}")
    return "*".join(parts)


def render(p: RationalSeries) -> str:
    """Canonical text: ``series(T): (c) * T^2 / ((1 - L^-1*T)(1 - T^2)) + ...``."""
    head = f"series({','.join(p.variables)}): "
    chunks = []
    for t in p.all_terms():
        s = f"({groth.render(t.coeff)})"
        m = _mono(t.b0, p.variables)
        if m:
            s += f"*{m}"
        if t.den:
            s += " / (" + "".join(f"(1 - {_mono(f.b, p.variables, f.a)})" for f in t.den) + ")"
        chunks.append(s)
    return head + (" + ".join(chunks) if chunks else "0")


_SERIES_HEAD = re.compile(r"\s*series\(([^)]*)\)\s*:\s*")


def _split_top(text: str, seps: str) -> List[Tuple[str, str]]:
    """Split on separator characters at bracket depth 0; returns (sep, chunk)."""
    out = []
    depth = 0
    cur = ""
    sep = "+"
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if depth == 0 and ch in seps:
            prev = text[:i].rstrip()
            # exponent signs like ^-1 are not separators
            if prev.endswith("^") or (ch in "+-" and not cur.strip()):
                cur += ch
                i += 1
                continue
            out.append((sep, cur))
            sep, cur = ch, ""
        else:
            cur += ch
        i += 1
    out.append((sep, cur))
    return out


def _parse_mono(text: str, variables) -> Tuple[GrothElement, MultiIndex]:
    """Product of integers, L-powers, [symbols], (class expressions) and variable powers."""
    coeff = GrothElement.one()
    b = [0] * len(variables)
    for _sep, factor in _split_top(text, "*"):
        factor = factor.strip()
        if not factor:
            raise SeriesError(f"empty factor in {text!r}")
        m = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?", factor)
        if m and m.group(1) in variables:
            b[variables.index(m.group(1))] += int(m.group(2) or 1)
            continue
        coeff = coeff * groth.parse(factor)
    return coeff, tuple(b)


def parse(text: str, variables: Optional[Sequence[str]] = None) -> RationalSeries:
    """Parse the text grammar of :func:`render`; hand-written forms such as
    ``L^3*T^2/(1 - L^3*T^2)`` are accepted too."""
    m = _SERIES_HEAD.match(text)
    if m:
        variables = [v.strip() for v in m.group(1).split(",") if v.strip()]
        text = text[m.end():]
    variables = list(variables or ["T"])
    out = RationalSeries(variables)
    if text.strip() == "0":
        return out
    for sep, chunk in _split_top(text, "+-"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = _split_top(chunk, "/")
        num_txt = parts[0][1]
        coeff, b0 = _parse_mono(num_txt, variables)
        den = []
        for _s, dtxt in parts[1:]:
            dtxt = dtxt.strip()
            if not (dtxt.startswith("(") and dtxt.endswith(")")):
                raise SeriesError(f"bad denominator {dtxt!r}")
            inner = dtxt[1:-1].strip()
            groups = re.findall(r"\(([^()]*)\)(?:\^(\d+))?", inner) if inner.startswith("(") else [(inner, "")]
            for body, power in groups:
                fm = re.fullmatch(r"\s*1\s*-\s*(.+)", body)
                if not fm:
                    raise SeriesError(f"denominator factor must be (1 - monomial): {body!r}")
                fc, fb = _parse_mono(fm.group(1), variables)
                poly = fc.as_poly()
                if poly is None or len(poly.coeffs) != 1 or list(poly.coeffs.values()) != [1]:
                    raise SeriesError(f"denominator monomial must be L^a times variables: {body!r}")
                a = next(iter(poly.coeffs))
                den.extend([GeomFactor(a, fb)] * int(power or 1))
        if sep == "-":
            coeff = -coeff
        out = out + RationalSeries(variables, {(b0, tuple(den)): coeff})
    return out


def to_json(p: RationalSeries) -> dict:
    return {
        "kind": "series",
        "vars": list(p.variables),
        "terms": [{"coeff": groth.to_json(t.coeff), "num": {"a": 0, "b": list(t.b0)},
                   "den": [{"a": f.a, "b": list(f.b)} for f in t.den]} for t in p.terms()],
        "poly": [{"b": list(b), "coeff": groth.to_json(c)} for b, c in p.poly_part.items()],
    }


def from_json(obj) -> RationalSeries:
    if isinstance(obj, str):
        return parse(obj)
    if "text" in obj:
        return parse(obj["text"], obj.get("vars"))
    variables = obj.get("vars", ["T"])
    out = RationalSeries(variables)
    for i, t in enumerate(obj.get("terms", [])):
        try:
            coeff = groth.from_json(t.get("coeff", 1))
            num = t.get("num", {"a": 0, "b": [0] * len(variables)})
            coeff = coeff.times_L(int(num.get("a", 0)))
            den = tuple(GeomFactor(int(f["a"]), tuple(f["b"])) for f in t.get("den", []))
            out = out + RationalSeries(variables, {(tuple(num["b"]), den): coeff})
        except (KeyError, TypeError) as exc:
            raise SeriesError(f"terms[{i}]: {exc}") from exc
    for i, t in enumerate(obj.get("poly", [])):
        out = out + RationalSeries(variables, poly={tuple(t["b"]): groth.from_json(t.get("coeff", 1))})
    return out
