"""Exact arithmetic in a model of the localized (equivariant, relative)
Grothendieck ring of varieties.

Elements are finite sums ``c * L^e * [S1]...[Sk] @ base`` where ``c`` is an
integer, ``L`` the Lefschetz class (invertible), ``[Si]`` opaque class symbols
carrying a mu_m label and ``base`` an optional stratum label of the base
variety.  Symbols generate a free commutative algebra over Z[L, 1/L]; no
scissor relations are imposed.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union


class GrothError(ValueError):
    pass


class LaurentPoly:
    """Integer Laurent polynomial in the single indeterminate L."""

    __slots__ = ("_c", "_hash")

    def __init__(self, coeffs: Union[Mapping[int, int], int, None] = None):
        if coeffs is None:
            coeffs = {}
        elif isinstance(coeffs, int):
            coeffs = {0: coeffs}
        self._c = {int(e): int(c) for e, c in sorted(coeffs.items()) if c}
        self._hash = None

    @classmethod
    def monomial(cls, exp: int, coeff: int = 1) -> "LaurentPoly":
        return cls({exp: coeff})

    @property
    def coeffs(self) -> Dict[int, int]:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def is_zero(self) -> bool:
        return not self._c

    def degree(self) -> int:
        return max(self._c)

    def low_degree(self) -> int:
        return min(self._c)

    def __bool__(self):
        return bool(self._c)

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly(other)
        return isinstance(other, LaurentPoly) and self._c == other._c

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._c.items()))
        return self._hash

    def __add__(self, other):
        if isinstance(other, int):
            other = LaurentPoly(other)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        out = dict(self._c)
        for e, c in other._c.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self._c.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return LaurentPoly({e: c * other for e, c in self._c.items()})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        out: Dict[int, int] = {}
        for e1, c1 in self._c.items():
            for e2, c2 in other._c.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            if len(self._c) != 1:
                raise GrothError("only monomials in L are invertible")
            (e, c), = self._c.items()
            if abs(c) != 1:
                raise GrothError("only monomials in L are invertible")
            return LaurentPoly({e * k: c ** (-k)})
        out = LaurentPoly(1)
        for _ in range(k):
            out = out * self
        return out

    def shift(self, k: int) -> "LaurentPoly":
        return LaurentPoly({e + k: c for e, c in self._c.items()})

    def evaluate(self, q) -> Fraction:
        total = Fraction(0)
        for e, c in self._c.items():
            total += c * Fraction(q) ** e
        return total

    def __repr__(self):
        return f"LaurentPoly({self._c})"

    def __str__(self):
        return render(GrothElement.from_poly(self))


@dataclass(frozen=True, order=True)
class ClassSymbol:
    """An opaque class; ``mu_order`` is the m of its mu_m-action (1 = trivial)."""

    name: str
    mu_order: int = 1

    def __post_init__(self):
        if not self.name:
            raise GrothError("class symbol name must be nonempty")
        if self.mu_order < 1:
            raise GrothError("mu_order must be >= 1")

    def __str__(self):
        if self.mu_order == 1:
            return f"[{self.name}]"
        if self.name == "mu":
            return f"[mu{self.mu_order}]"
        return f"[{self.name};mu={self.mu_order}]"


def mu_symbol(m: int) -> ClassSymbol:
    """The class of the group scheme mu_m with its natural action."""
    return ClassSymbol("mu", m)


def is_root_scheme(sym: ClassSymbol) -> bool:
    return sym.name == "mu"


Key = Tuple[Tuple[ClassSymbol, ...], Optional[str]]


class GrothElement:
    """Element of the free symbol algebra over Z[L, 1/L], optionally relative.

    Terms are keyed by ``(sorted symbol multiset, base label)``.  Two labeled
    terms multiply to zero unless their labels agree (fiber product over
    disjoint strata); unlabeled terms act as scalars.
    """

    __slots__ = ("_t", "_hash")

    def __init__(self, terms: Optional[Mapping[Key, LaurentPoly]] = None):
        out: Dict[Key, LaurentPoly] = {}
        for (syms, base), poly in (terms or {}).items():
            if not isinstance(poly, LaurentPoly):
                poly = LaurentPoly(poly)
            if poly:
                key = (tuple(sorted(syms)), base)
                out[key] = out[key] + poly if key in out else poly
        self._t = {k: out[k] for k in sorted(out, key=_key_order) if out[k]}
        self._hash = None

    # constructors
    @classmethod
    def zero(cls) -> "GrothElement":
        return cls()

    @classmethod
    def one(cls) -> "GrothElement":
        return cls.from_poly(LaurentPoly(1))

    @classmethod
    def from_int(cls, n: int) -> "GrothElement":
        return cls.from_poly(LaurentPoly(n))

    @classmethod
    def from_poly(cls, p: LaurentPoly, base: Optional[str] = None) -> "GrothElement":
        return cls({((), base): p})

    @classmethod
    def L(cls, k: int = 1) -> "GrothElement":
        return cls.from_poly(LaurentPoly.monomial(k))

    @classmethod
    def symbol(cls, sym: Union[ClassSymbol, str], mu: int = 1, base: Optional[str] = None) -> "GrothElement":
        if isinstance(sym, str):
            sym = ClassSymbol(sym, mu)
        return cls({((sym,), base): LaurentPoly(1)})

    @classmethod
    def coerce(cls, x) -> "GrothElement":
        if isinstance(x, GrothElement):
            return x
        if isinstance(x, int):
            return cls.from_int(x)
        if isinstance(x, LaurentPoly):
            return cls.from_poly(x)
        if isinstance(x, ClassSymbol):
            return cls.symbol(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to GrothElement")

    # inspection
    @property
    def terms(self) -> Dict[Key, LaurentPoly]:
        return dict(self._t)

    def items(self):
        return self._t.items()

    def is_zero(self) -> bool:
        return not self._t

    def __bool__(self):
        return bool(self._t)

    def symbols(self) -> set:
        return {s for (syms, _), _p in self._t.items() for s in syms}

    def bases(self) -> set:
        return {b for (_, b) in self._t if b is not None}

    def is_absolute(self) -> bool:
        return not self.bases()

    def as_poly(self) -> Optional[LaurentPoly]:
        """The Laurent polynomial if this element has no symbols or labels."""
        if not self._t:
            return LaurentPoly()
        if list(self._t) == [((), None)]:
            return self._t[((), None)]
        return None

    def l_degree_range(self) -> Tuple[int, int]:
        exps = [e for p in self._t.values() for e in p.coeffs]
        return min(exps), max(exps)

    # arithmetic
    def __eq__(self, other):
        if isinstance(other, (int, LaurentPoly)):
            other = GrothElement.coerce(other)
        return isinstance(other, GrothElement) and self._t == other._t

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._t.items()))
        return self._hash

    def __add__(self, other):
        try:
            other = GrothElement.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._t)
        for k, p in other._t.items():
            out[k] = out[k] + p if k in out else p
        return GrothElement(out)

    __radd__ = __add__

    def __neg__(self):
        return GrothElement({k: -p for k, p in self._t.items()})

    def __sub__(self, other):
        return self + (-GrothElement.coerce(other))

    def __rsub__(self, other):
        return GrothElement.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, int):
            return GrothElement({k: p * other for k, p in self._t.items()})
        try:
            other = GrothElement.coerce(other)
        except TypeError:
            return NotImplemented
        out: Dict[Key, LaurentPoly] = {}
        for (s1, b1), p1 in self._t.items():
            for (s2, b2), p2 in other._t.items():
                if b1 is not None and b2 is not None and b1 != b2:
                    continue
                key = (tuple(sorted(s1 + s2)), b1 if b1 is not None else b2)
                prod = p1 * p2
                out[key] = out[key] + prod if key in out else prod
        return GrothElement(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            poly = self.as_poly()
            if poly is None:
                raise GrothError("only monomials in L are invertible")
            return GrothElement.from_poly(poly ** k)
        out = GrothElement.one()
        for _ in range(k):
            out = out * self
        return out

    def times_L(self, k: int) -> "GrothElement":
        return GrothElement({key: p.shift(k) for key, p in self._t.items()})

    def with_base(self, base: Optional[str]) -> "GrothElement":
        """Attach (or replace) the base label on every term."""
        out: Dict[Key, LaurentPoly] = {}
        for (s, _b), p in self._t.items():
            out[(s, base)] = out[(s, base)] + p if (s, base) in out else p
        return GrothElement(out)

    def __repr__(self):
        return f"GrothElement({render(self)!r})"

    def __str__(self):
        return render(self)


def _key_order(key: Key):
    syms, base = key
    return (base is not None, base or "", len(syms), syms)


Scalar = Union[int, LaurentPoly, GrothElement]


def gr_add(a: Scalar, b: Scalar) -> GrothElement:
    return GrothElement.coerce(a) + GrothElement.coerce(b)


def gr_mul(a: Scalar, b: Scalar) -> GrothElement:
    return GrothElement.coerce(a) * GrothElement.coerce(b)


# ---------------------------------------------------------------- relative

def rel_pullback(e: GrothElement, table: Mapping[str, Iterable[Tuple[str, Scalar]]]) -> GrothElement:
    """Pull a relative class back along a stratum map given as a table.

    ``table[label]`` lists ``(new_label, factor)`` images; an empty list means
    the stratum does not meet the subvariety.  Unlabeled terms pass through.
    """
    out = GrothElement()
    for (syms, base), poly in e.items():
        piece = GrothElement({(syms, None): poly})
        if base is None:
            out = out + piece
            continue
        if base not in table:
            raise GrothError(f"no pullback table entry for base label {base!r}")
        for new_label, factor in table[base]:
            out = out + (piece * GrothElement.coerce(factor)).with_base(new_label)
    return out


def rel_pushforward(e: GrothElement) -> GrothElement:
    """Push forward to the point: erase all base labels."""
    return e.with_base(None)


# ---------------------------------------------------------- specialization

@dataclass
class Specialization:
    """Ring map sending symbols to Laurent polynomials and optionally L to q."""

    symbols: Dict[ClassSymbol, LaurentPoly] = field(default_factory=dict)
    q: Optional[int] = None

    def __post_init__(self):
        self.symbols = {s: (v if isinstance(v, LaurentPoly) else LaurentPoly(v))
                        for s, v in self.symbols.items()}
        if self.q is not None and self.q < 2:
            raise GrothError("q must be a prime power >= 2")

    def resolve(self, sym: ClassSymbol) -> LaurentPoly:
        if sym in self.symbols:
            return self.symbols[sym]
        if self.q is not None and is_root_scheme(sym):
            if (self.q - 1) % sym.mu_order:
                raise GrothError(
                    f"q={self.q} is not 1 mod {sym.mu_order}; cannot count {sym}")
            return LaurentPoly(sym.mu_order)
        raise GrothError(f"unresolved symbol {sym}")


def gr_specialize(e: Scalar, s: Specialization):
    """Apply ``s``; base labels are erased first (point count of the total space).

    Returns a LaurentPoly when ``s.q`` is unset, otherwise an int or an exact
    Fraction (negative powers of q).
    """
    e = rel_pushforward(GrothElement.coerce(e))
    total = LaurentPoly()
    for (syms, _b), poly in e.items():
        term = poly
        for sym in syms:
            term = term * s.resolve(sym)
        total = total + term
    if s.q is None:
        return total
    val = total.evaluate(s.q)
    return int(val) if val.denominator == 1 else val


# ------------------------------------------------------------- rendering

def _render_monomial(coeff: int, exp: int, syms, base) -> str:
    parts = []
    if exp != 0:
        parts.append("L" if exp == 1 else f"L^{exp}")
    # group repeated symbols as powers
    i = 0
    syms = list(syms)
    while i < len(syms):
        j = i
        while j < len(syms) and syms[j] == syms[i]:
            j += 1
        k = j - i
        parts.append(str(syms[i]) + (f"^{k}" if k > 1 else ""))
        i = j
    mag = abs(coeff)
    if not parts:
        body = str(mag)
    elif mag == 1:
        body = "*".join(parts)
    else:
        body = f"{mag}*" + "*".join(parts)
    if base is not None:
        body += f"@{base}"
    return ("-" if coeff < 0 else "+") + body


def render(e: Scalar) -> str:
    """Canonical text form, e.g. ``3*L^2*[E1o;mu=2]@origin - L^-1``."""
    e = GrothElement.coerce(e)
    if e.is_zero():
        return "0"
    chunks = []
    for (syms, base), poly in e.items():
        for exp in sorted(poly.coeffs, reverse=True):
            chunks.append(_render_monomial(poly.coeffs[exp], exp, syms, base))
    out = chunks[0][1:] if chunks[0][0] == "+" else "-" + chunks[0][1:]
    for c in chunks[1:]:
        out += f" {c[0]} {c[1:]}"
    return out


_TOKEN = re.compile(r"""
    \s*(?:
      (?P<int>\d+)
    | (?P<L>L)
    | (?P<sym>\[[^\]]*\])
    | (?P<op>[-+*^()])
    )""", re.VERBOSE)


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        if text[pos] == "@":
            m = re.compile(r"@([A-Za-z0-9_.*']+)").match(text, pos)
            if not m:
                raise GrothError(f"bad base label at column {pos}")
            toks.append(("base", m.group(1)))
            pos = m.end()
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GrothError(f"unexpected character {text[pos]!r} at column {pos}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind)))
        pos = m.end()
    return toks


def _parse_symbol(tok: str) -> Tuple[ClassSymbol, Optional[str]]:
    body = tok[1:-1].strip()
    parts = [p.strip() for p in body.split(";")]
    name, mu, base = parts[0], 1, None
    shorthand = re.fullmatch(r"mu(\d+)", name)
    if shorthand:
        name, mu = "mu", int(shorthand.group(1))
    for p in parts[1:]:
        if "=" not in p:
            raise GrothError(f"bad symbol attribute {p!r} in {tok}")
        k, v = (x.strip() for x in p.split("=", 1))
        if k == "mu":
            mu = int(v)
        elif k == "base":
            base = v
        else:
            raise GrothError(f"unknown symbol attribute {k!r} in {tok}")
    return ClassSymbol(name, mu), base


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise GrothError(f"parse error near token {self.i}: expected {value or kind}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self) -> GrothElement:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        acc = self.product() * sign
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            nxt = self.product()
            acc = acc + nxt if op == "+" else acc - nxt
        return acc

    def product(self) -> GrothElement:
        acc = self.power()
        while self.peek() == ("op", "*"):
            self.take()
            acc = acc * self.power()
        if self.peek()[0] == "base":
            acc = acc.with_base(self.take()[1])
        return acc

    def power(self) -> GrothElement:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            neg = False
            if self.peek() == ("op", "-"):
                self.take()
                neg = True
            k = int(self.take("int")[1])
            base = base ** (-k if neg else k)
        return base

    def atom(self) -> GrothElement:
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return GrothElement.from_int(int(val))
        if kind == "L":
            self.take()
            return GrothElement.L()
        if kind == "sym":
            self.take()
            sym, base = _parse_symbol(val)
            return GrothElement.symbol(sym, base=base)
        if (kind, val) == ("op", "("):
            self.take()
            inner = self.expr()
            self.take("op", ")")
            return inner
        if (kind, val) == ("op", "-"):
            self.take()
            return -self.atom()
        raise GrothError(f"parse error: unexpected {val!r}")


def parse(text: str) -> GrothElement:
    """Parse the text grammar produced by :func:`render` (plus parentheses)."""
    p = _Parser(text)
    if not p.toks:
        raise GrothError("empty expression")
    out = p.expr()
    if p.i != len(p.toks):
        raise GrothError(f"trailing input at token {p.i}: {p.toks[p.i][1]!r}")
    return out


def to_json(e: Scalar) -> dict:
    e = GrothElement.coerce(e)
    terms = []
    for (syms, base), poly in e.items():
        t = {"poly": {str(k): v for k, v in poly.coeffs.items()},
             "symbols": [{"name": s.name, "mu": s.mu_order} for s in syms]}
        if base is not None:
            t["base"] = base
        terms.append(t)
    return {"terms": terms}


def from_json(obj) -> GrothElement:
    """Accept the JSON schema, a text string, or a bare integer."""
    if isinstance(obj, GrothElement):
        return obj
    if isinstance(obj, int):
        return GrothElement.from_int(obj)
    if isinstance(obj, str):
        return parse(obj)
    if not isinstance(obj, dict) or "terms" not in obj:
        raise GrothError("expected a class element: text, integer or {terms: [...]}")
    out = GrothElement()
    for i, t in enumerate(obj["terms"]):
        try:
            poly = LaurentPoly({int(k): int(v) for k, v in t.get("poly", {"0": 1}).items()})
            base = t.get("base")
            syms = []
            for s in t.get("symbols", []):
                syms.append(ClassSymbol(s["name"], int(s.get("mu", 1))))
                if s.get("base") is not None:
                    base = s["base"]
        except (KeyError, TypeError, ValueError) as exc:
            raise GrothError(f"terms[{i}]: {exc}") from exc
        out = out + GrothElement({(tuple(syms), base): poly})
    return out


def mu_count(m: int, q: int) -> int:
    """Number of F_q-points of mu_m."""
    return gcd(m, q - 1)
